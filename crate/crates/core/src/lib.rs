//! Closed-form unbalanced Sobolev transport on weighted graphs.
//!
//! A graph is preprocessed once per root into its shortest-path tree; every
//! distance afterwards is a sum over the tree edges touched by the two
//! measures. Linear-program oracles for the same problem live in [`oracle`]
//! and serve as a reference for the closed form.

// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod builders;
pub mod error;
pub mod graph;
pub mod io;
pub mod kernel;
pub mod measure;
pub mod oracle;
pub mod par;
pub mod slicing;
pub mod ust;

pub use error::{Result, UstError};
pub use graph::{shortest_path_tree, validate_root, PhysicalGraph, RootedPreprocess, TreeOptions};
pub use measure::DiscreteMeasure;
pub use par::Execution;
pub use slicing::{sample_roots, sliced_ust, RootSet, SlicedUst};
pub use ust::{pairwise_matrix, ust_distance, EdgeWeights, Order, UstEvaluator, UstParams};
