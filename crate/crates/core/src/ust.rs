//! Closed-form unbalanced Sobolev transport between node-supported measures.
//!
//! For a rooted shortest-path tree the distance is
//!
//! ```text
//! US(μ, ν) = b · (Σ_e ω(e) |μ(γ_e) − ν(γ_e)|^p)^(1/p) + Θ · |μ(G) − ν(G)|
//! ```
//!
//! where `γ_e` is the set of nodes whose root path crosses tree edge `e` (the
//! subtree below it) and `Θ = w_root + bλ/2 − α`, with `w_root` taken from the
//! heavier side. Non-tree edges have empty `γ_e` and never contribute.

use std::cell::RefCell;

use crate::error::{Result, UstError};
use crate::graph::{NodeId, PhysicalGraph, RootedPreprocess};
use crate::measure::DiscreteMeasure;
use crate::par::{self, Execution};

/// Order of the Sobolev norm, `1 <= p <= ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    Finite(f64),
    Infinity,
}

impl Order {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Order::Infinity)
        } else if p >= 1.0 && p.is_finite() {
            Ok(Order::Finite(p))
        } else {
            Err(UstError::InvalidParams(format!("order p must be in [1, inf], got {p}")))
        }
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Order::Finite(p) => 1.0 / p,
            Order::Infinity => 0.0,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Order::Finite(p) => p,
            Order::Infinity => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Finite(p) => write!(f, "{p}"),
            Order::Infinity => f.write_str("inf"),
        }
    }
}

/// Edge measure ω used to integrate the subtree-mass discrepancy.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum EdgeWeights {
    /// ω(e) = length of e.
    #[default]
    Length,
    /// Explicit nonnegative ω(e), indexed by edge id.
    PerEdge(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UstParams {
    pub p: Order,
    /// Bound on the critic's derivative norm.
    pub b: f64,
    /// Lagrange multiplier of the mass constraint.
    pub lambda: f64,
    pub alpha: f64,
    /// Weight functions evaluated at the root; only these values enter the closed form.
    pub w1_root: f64,
    pub w2_root: f64,
    pub omega: EdgeWeights,
}

impl Default for UstParams {
    fn default() -> Self {
        UstParams {
            p: Order::Finite(1.0),
            b: 1.0,
            lambda: 1.0,
            alpha: 0.0,
            w1_root: 1.0,
            w2_root: 1.0,
            omega: EdgeWeights::Length,
        }
    }
}

fn nonneg(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(UstError::InvalidParams(format!(
            "{name} must be finite and nonnegative, got {x}"
        )))
    }
}

impl UstParams {
    pub fn with_order(mut self, p: Order) -> Self {
        self.p = p;
        self
    }

    /// Checks the admissible range `0 <= α <= (bλ + w1 + w2) / 2` and nonnegativity.
    pub fn validate(&self) -> Result<()> {
        if let Order::Finite(p) = self.p {
            Order::new(p)?;
        }
        nonneg("b", self.b)?;
        nonneg("lambda", self.lambda)?;
        nonneg("alpha", self.alpha)?;
        nonneg("w1_root", self.w1_root)?;
        nonneg("w2_root", self.w2_root)?;
        let cap = 0.5 * (self.b * self.lambda + self.w1_root + self.w2_root);
        if self.alpha > cap {
            return Err(UstError::InvalidParams(format!(
                "alpha = {} exceeds (b*lambda + w1_root + w2_root)/2 = {cap}",
                self.alpha
            )));
        }
        if let EdgeWeights::PerEdge(w) = &self.omega {
            if let Some(x) = w.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
                return Err(UstError::InvalidParams(format!(
                    "omega values must be nonnegative, got {x}"
                )));
            }
        }
        Ok(())
    }

    /// Stricter regime in which the distance is a metric: equal root weights and
    /// `α < bλ/2 + min(w1, w2)`.
    pub fn validate_metric(&self) -> Result<()> {
        self.validate()?;
        if self.w1_root != self.w2_root {
            return Err(UstError::InvalidParams(format!(
                "metric mode needs w1_root == w2_root, got {} and {}",
                self.w1_root, self.w2_root
            )));
        }
        let cap = 0.5 * self.b * self.lambda + self.w1_root.min(self.w2_root);
        if !(self.alpha < cap) {
            return Err(UstError::InvalidParams(format!(
                "metric mode needs alpha < b*lambda/2 + min(w1_root, w2_root) = {cap}"
            )));
        }
        Ok(())
    }

    /// Mass-imbalance coefficient Θ; the heavier measure selects the root weight.
    pub fn theta(&self, mass_mu: f64, mass_nu: f64) -> f64 {
        let w = if mass_mu >= mass_nu { self.w1_root } else { self.w2_root };
        w + 0.5 * self.b * self.lambda - self.alpha
    }

    /// ω per tree position for `pre`.
    fn tree_weights(&self, pre: &RootedPreprocess) -> Result<Vec<f64>> {
        match &self.omega {
            EdgeWeights::Length => Ok(pre.tree_lengths().to_vec()),
            EdgeWeights::PerEdge(w) => {
                let needed = pre.tree_edges().iter().copied().max().map_or(0, |e| e + 1);
                if w.len() < needed {
                    return Err(UstError::InvalidParams(format!(
                        "omega has {} entries but the graph uses edge id {}",
                        w.len(),
                        needed - 1
                    )));
                }
                Ok(pre.tree_edges().iter().map(|&e| w[e]).collect())
            }
        }
    }

    /// ω(G), the total edge measure of the graph.
    pub fn total_weight(&self, g: &PhysicalGraph) -> f64 {
        match &self.omega {
            EdgeWeights::Length => g.total_length(),
            EdgeWeights::PerEdge(w) => w.iter().sum(),
        }
    }
}

/// Subtree masses μ(γ_e) for the tree edges carrying nonzero mass.
///
/// Entries are `(position in tree_edges, mass)` sorted by position; positions
/// not listed have zero mass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeMassProfile {
    entries: Vec<(usize, f64)>,
    tree_len: usize,
    total_mass: f64,
}

impl EdgeMassProfile {
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Number of tree edges with nonzero subtree mass.
    pub fn touched_edges(&self) -> usize {
        self.entries.len()
    }

    /// Full profile aligned with `tree_edges`.
    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.tree_len];
        for &(pos, m) in &self.entries {
            out[pos] = m;
        }
        out
    }
}

/// Folds the masses of `mu` up the shortest-path tree.
///
/// Only the edges on root paths of support nodes are visited, so the cost is
/// linear in that edge set rather than in the graph size.
pub fn edge_cumulative_masses(pre: &RootedPreprocess, mu: &DiscreteMeasure) -> Result<EdgeMassProfile> {
    mu.check_support(pre.node_count())?;
    SLOTS.with(|cell| {
        let mut slot = cell.borrow_mut();
        if slot.len() < pre.node_count() {
            slot.resize(pre.node_count(), UNSEEN);
        }
        let profile = fold_profile(pre, mu, &mut slot);
        Ok(profile)
    })
}

const UNSEEN: u32 = u32::MAX;

thread_local! {
    /// Per-node slot index into the touched list, `UNSEEN` between calls.
    static SLOTS: RefCell<Vec<u32>> = const { RefCell::new(Vec::new()) };
}

fn fold_profile(pre: &RootedPreprocess, mu: &DiscreteMeasure, slot: &mut [u32]) -> EdgeMassProfile {
    let root = pre.root();
    // (tree position, node, mass) for every node on a support's root path
    let mut touched: Vec<(usize, NodeId, f64)> = Vec::with_capacity(2 * mu.support_len());
    for &(s, m) in mu.entries() {
        if s == root {
            continue;
        }
        let mut v = s;
        while v != root && slot[v] == UNSEEN {
            slot[v] = touched.len() as u32;
            touched.push((pre.position(v).expect("non-root node has a parent edge"), v, 0.0));
            v = pre.parent(v).expect("non-root node has a parent");
        }
        touched[slot[s] as usize].2 += m;
    }

    // Children precede parents in tree order, so one ascending pass folds every
    // subtree mass into its parent before the parent is read.
    touched.sort_unstable_by_key(|t| t.0);
    for (k, t) in touched.iter().enumerate() {
        slot[t.1] = k as u32;
    }
    let mut entries = Vec::with_capacity(touched.len());
    for k in 0..touched.len() {
        let (pos, v, m) = touched[k];
        entries.push((pos, m));
        let parent = pre.parent(v).unwrap();
        if parent != root {
            touched[slot[parent] as usize].2 += m;
        }
    }
    for t in &touched {
        slot[t.1] = UNSEEN;
    }

    EdgeMassProfile {
        entries,
        tree_len: pre.tree_edges().len(),
        total_mass: mu.total_mass(),
    }
}

#[derive(Debug, Clone)]
pub struct UstEvaluator<'a> {
    pre: &'a RootedPreprocess,
    params: UstParams,
    weights: Vec<f64>,
}

impl<'a> UstEvaluator<'a> {
    pub fn new(pre: &'a RootedPreprocess, params: &UstParams) -> Result<Self> {
        params.validate()?;
        let weights = params.tree_weights(pre)?;
        Ok(UstEvaluator {
            pre,
            params: params.clone(),
            weights,
        })
    }

    pub fn params(&self) -> &UstParams {
        &self.params
    }

    pub fn preprocess(&self) -> &RootedPreprocess {
        self.pre
    }

    pub fn profile(&self, mu: &DiscreteMeasure) -> Result<EdgeMassProfile> {
        edge_cumulative_masses(self.pre, mu)
    }

    pub fn distance(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
        Ok(self.distance_profiles(&self.profile(mu)?, &self.profile(nu)?))
    }

    /// Transport part `b·(Σ ω|Δ|^p)^(1/p)` without the mass-imbalance term.
    pub fn transport_term(&self, a: &EdgeMassProfile, c: &EdgeMassProfile) -> f64 {
        let w = &self.weights;
        let (x, y) = (&a.entries, &c.entries);
        let (mut i, mut j) = (0, 0);
        let mut fold = Fold::new(self.params.p);
        while i < x.len() || j < y.len() {
            let (pos, diff) = match (x.get(i), y.get(j)) {
                (Some(&(pa, ma)), Some(&(pb, mb))) if pa == pb => {
                    i += 1;
                    j += 1;
                    (pa, ma - mb)
                }
                (Some(&(pa, ma)), Some(&(pb, _))) if pa < pb => {
                    i += 1;
                    (pa, ma)
                }
                (Some(&(pa, ma)), None) => {
                    i += 1;
                    (pa, ma)
                }
                (_, Some(&(pb, mb))) => {
                    j += 1;
                    (pb, -mb)
                }
                (None, None) => unreachable!(),
            };
            fold.push(w[pos], diff.abs());
        }
        self.params.b * fold.finish()
    }

    pub fn distance_profiles(&self, a: &EdgeMassProfile, c: &EdgeMassProfile) -> f64 {
        let ma = a.total_mass;
        let mc = c.total_mass;
        self.transport_term(a, c) + self.params.theta(ma, mc) * (ma - mc).abs()
    }
}

/// Accumulator for `(Σ ω |d|^p)^(1/p)` or `max_{ω > 0} |d|`.
struct Fold {
    p: Order,
    acc: f64,
}

impl Fold {
    fn new(p: Order) -> Self {
        Fold { p, acc: 0.0 }
    }

    #[inline]
    fn push(&mut self, omega: f64, d: f64) {
        match self.p {
            Order::Infinity => {
                if omega > 0.0 && d > self.acc {
                    self.acc = d;
                }
            }
            Order::Finite(1.0) => self.acc += omega * d,
            Order::Finite(2.0) => self.acc += omega * d * d,
            Order::Finite(p) => self.acc += omega * d.powf(p),
        }
    }

    fn finish(self) -> f64 {
        match self.p {
            Order::Infinity => self.acc,
            Order::Finite(1.0) => self.acc,
            Order::Finite(2.0) => self.acc.sqrt(),
            Order::Finite(p) => self.acc.powf(1.0 / p),
        }
    }
}

/// One-shot distance between two measures.
pub fn ust_distance(
    pre: &RootedPreprocess,
    params: &UstParams,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<f64> {
    UstEvaluator::new(pre, params)?.distance(mu, nu)
}

/// Symmetric n×n distance matrix, row-major.
pub type DistanceMatrix = Vec<Vec<f64>>;

/// Pairwise distances; each measure's profile is computed once.
pub fn pairwise_matrix(pre: &RootedPreprocess, params: &UstParams, ms: &[DiscreteMeasure]) -> Result<DistanceMatrix> {
    pairwise_matrix_with(pre, params, ms, Execution::default())
}

pub fn pairwise_matrix_with(
    pre: &RootedPreprocess,
    params: &UstParams,
    ms: &[DiscreteMeasure],
    exec: Execution,
) -> Result<DistanceMatrix> {
    if params.w1_root != params.w2_root {
        return Err(UstError::InvalidParams(format!(
            "pairwise matrix needs w1_root == w2_root for symmetry, got {} and {}",
            params.w1_root, params.w2_root
        )));
    }
    let eval = UstEvaluator::new(pre, params)?;
    let profiles = par::try_map_indices(exec, ms.len(), |i| eval.profile(&ms[i]))?;
    Ok(matrix_from_profiles(&eval, &profiles, exec))
}

pub(crate) fn matrix_from_profiles(
    eval: &UstEvaluator<'_>,
    profiles: &[EdgeMassProfile],
    exec: Execution,
) -> DistanceMatrix {
    let n = profiles.len();
    let upper = par::map_indices(exec, n, |i| {
        (i + 1..n)
            .map(|j| eval.distance_profiles(&profiles[i], &profiles[j]))
            .collect::<Vec<f64>>()
    });
    let mut out = vec![vec![0.0; n]; n];
    for (i, row) in upper.into_iter().enumerate() {
        for (k, d) in row.into_iter().enumerate() {
            let j = i + 1 + k;
            out[i][j] = d;
            out[j][i] = d;
        }
    }
    out
}
