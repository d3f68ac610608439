//! Sliced distance: the mean of the rooted distance over several root nodes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, UstError};
use crate::graph::{shortest_path_tree, validate_root, NodeId, PhysicalGraph, RootedPreprocess, TreeOptions};
use crate::measure::DiscreteMeasure;
use crate::par::{self, Execution};
use crate::ust::{matrix_from_profiles, DistanceMatrix, UstEvaluator, UstParams};

pub const DEFAULT_SLICES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSet {
    pub roots: Vec<NodeId>,
    pub seed: u64,
    /// Set when fewer valid roots than requested were available.
    pub short: bool,
}

impl RootSet {
    pub fn single(root: NodeId) -> Self {
        RootSet {
            roots: vec![root],
            seed: 0,
            short: false,
        }
    }
}

/// Draws `k` distinct roots uniformly among nodes with unique shortest paths.
///
/// Nodes are visited in a seeded random order and the first `k` that pass the
/// uniqueness check are kept, which is a uniform draw without replacement from
/// the valid nodes. Requests above the node count are clamped and flagged.
pub fn sample_roots(g: &PhysicalGraph, k: usize, seed: u64, tie_tol: f64) -> Result<RootSet> {
    if k == 0 {
        return Err(UstError::InvalidParams("number of slices must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<NodeId> = (0..g.node_count()).collect();
    order.shuffle(&mut rng);
    let mut roots = Vec::with_capacity(k.min(order.len()));
    for v in order {
        if roots.len() == k {
            break;
        }
        if validate_root(g, v, tie_tol)?.ok {
            roots.push(v);
        }
    }
    if roots.is_empty() {
        return Err(UstError::NoValidRoot);
    }
    let short = roots.len() < k;
    Ok(RootSet { roots, seed, short })
}

/// Cached per-root preprocesses for repeated sliced evaluations.
#[derive(Debug, Clone)]
pub struct SlicedUst {
    pres: Vec<RootedPreprocess>,
    params: UstParams,
    exec: Execution,
}

impl SlicedUst {
    pub fn new(g: &PhysicalGraph, roots: &RootSet, params: &UstParams, opts: TreeOptions) -> Result<Self> {
        Self::with_execution(g, roots, params, opts, Execution::default())
    }

    pub fn with_execution(
        g: &PhysicalGraph,
        roots: &RootSet,
        params: &UstParams,
        opts: TreeOptions,
        exec: Execution,
    ) -> Result<Self> {
        params.validate()?;
        if roots.roots.is_empty() {
            return Err(UstError::NoValidRoot);
        }
        let pres = par::try_map_indices(exec, roots.roots.len(), |i| shortest_path_tree(g, roots.roots[i], opts))?;
        Ok(SlicedUst {
            pres,
            params: params.clone(),
            exec,
        })
    }

    pub fn preprocesses(&self) -> &[RootedPreprocess] {
        &self.pres
    }

    pub fn distance(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
        let per_root = par::try_map_indices(self.exec, self.pres.len(), |i| {
            UstEvaluator::new(&self.pres[i], &self.params)?.distance(mu, nu)
        })?;
        Ok(per_root.iter().sum::<f64>() / per_root.len() as f64)
    }

    /// Mean over roots of the pairwise matrices; roots are shared by every pair.
    pub fn pairwise_matrix(&self, ms: &[DiscreteMeasure]) -> Result<DistanceMatrix> {
        if self.params.w1_root != self.params.w2_root {
            return Err(UstError::InvalidParams(
                "pairwise matrix needs w1_root == w2_root for symmetry".into(),
            ));
        }
        let n = ms.len();
        let mut acc = vec![vec![0.0; n]; n];
        for pre in &self.pres {
            let eval = UstEvaluator::new(pre, &self.params)?;
            let profiles = par::try_map_indices(self.exec, n, |i| eval.profile(&ms[i]))?;
            let m = matrix_from_profiles(&eval, &profiles, self.exec);
            for (acc_row, row) in acc.iter_mut().zip(m) {
                for (a, d) in acc_row.iter_mut().zip(row) {
                    *a += d;
                }
            }
        }
        let k = self.pres.len() as f64;
        for row in &mut acc {
            for a in row.iter_mut() {
                *a /= k;
            }
        }
        Ok(acc)
    }
}

/// Mean distance over `roots`.
pub fn sliced_ust(
    g: &PhysicalGraph,
    roots: &RootSet,
    params: &UstParams,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<f64> {
    SlicedUst::new(g, roots, params, TreeOptions::default())?.distance(mu, nu)
}
