//! Exact desk-scale references for the closed-form distance.
//!
//! * Entropy partial transport `ET_λ` with entropy `|s − 1|`, solved as a
//!   balanced transport problem on the graph extended by one auxiliary point ŝ:
//!   `ĉ(x, y) = b(d(x, y) − λ)`, `ĉ(x, ŝ) = w1(x)`, `ĉ(ŝ, y) = w2(y)`,
//!   `ĉ(ŝ, ŝ) = 0`, with `μ̂ = μ + ν(G)δ_ŝ` and `ν̂ = ν + μ(G)δ_ŝ`.
//! * p-Wasserstein with ground cost `d^p` for balanced pairs.
//! * The λ sweep relating `ET_λ` to the mass-constrained problem.
//!
//! Weights are the affine family `w_i(x) = a1·d(z0, x) + w_i(z0)` with
//! `0 <= a1 <= b`, which keeps them b-Lipschitz.

mod transport;

pub use transport::{solve_transportation, Certificate, PointTag, TransportInstance, TransportSolution};

use crate::error::{Result, UstError};
use crate::graph::{NodeId, PhysicalGraph};
use crate::measure::DiscreteMeasure;
use crate::par::{self, Execution};
use crate::ust::UstParams;

/// Parameters of the entropy partial transport problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EptParams {
    pub b: f64,
    /// Any real multiplier; negative values are meaningful for the sweep.
    pub lambda: f64,
    pub w1_root: f64,
    pub w2_root: f64,
    /// Slope `a1` of the affine weights.
    pub weight_slope: f64,
    /// Root `z0` at which the weights take their root values.
    pub root: NodeId,
}

impl EptParams {
    /// The problem whose value bounds the closed form with the same parameters.
    pub fn from_ust(params: &UstParams, root: NodeId, weight_slope: f64) -> Self {
        EptParams {
            b: params.b,
            lambda: params.lambda,
            w1_root: params.w1_root,
            w2_root: params.w2_root,
            weight_slope,
            root,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    fn validate(&self, g: &PhysicalGraph) -> Result<()> {
        if !(self.b >= 0.0) || !(self.w1_root >= 0.0) || !(self.w2_root >= 0.0) || !self.lambda.is_finite() {
            return Err(UstError::InvalidParams(format!(
                "invalid transport parameters {self:?}"
            )));
        }
        if !(self.weight_slope >= 0.0 && self.weight_slope <= self.b) {
            return Err(UstError::InvalidWeightSlope {
                slope: self.weight_slope,
                b: self.b,
            });
        }
        if self.root >= g.node_count() {
            return Err(UstError::RootOutOfRange {
                root: self.root,
                node_count: g.node_count(),
            });
        }
        Ok(())
    }
}

/// Value of an oracle solve together with its optimality certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    /// Mass moved between graph points (ŝ rows and columns excluded).
    pub plan_mass: f64,
    pub dual_gap: f64,
    pub certificate: Certificate,
    pub solution: TransportSolution,
}

/// `d(x, y)` for every `x` in `rows` and `y` in `cols`, one Dijkstra per row.
pub fn support_distances(g: &PhysicalGraph, rows: &[NodeId], cols: &[NodeId], exec: Execution) -> Vec<Vec<f64>> {
    par::map_indices(exec, rows.len(), |i| g.distances_to(rows[i], cols))
}

/// Distances and weights of one `(μ, ν)` pair, reusable across λ.
#[derive(Debug, Clone)]
pub struct EptOracle {
    params: EptParams,
    mu: Vec<(NodeId, f64)>,
    nu: Vec<(NodeId, f64)>,
    mass_mu: f64,
    mass_nu: f64,
    dist: Vec<Vec<f64>>,
    w1: Vec<f64>,
    w2: Vec<f64>,
}

impl EptOracle {
    pub fn new(g: &PhysicalGraph, params: EptParams, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Self> {
        Self::with_execution(g, params, mu, nu, Execution::default())
    }

    pub fn with_execution(
        g: &PhysicalGraph,
        params: EptParams,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        exec: Execution,
    ) -> Result<Self> {
        params.validate(g)?;
        mu.check_support(g.node_count())?;
        nu.check_support(g.node_count())?;
        let rows: Vec<NodeId> = mu.entries().iter().map(|e| e.0).collect();
        let cols: Vec<NodeId> = nu.entries().iter().map(|e| e.0).collect();
        let dist = support_distances(g, &rows, &cols, exec);
        let mut both = rows.clone();
        both.extend_from_slice(&cols);
        let to_root = g.distances_to(params.root, &both);
        let a1 = params.weight_slope;
        let w1 = to_root[..rows.len()].iter().map(|d| a1 * d + params.w1_root).collect();
        let w2 = to_root[rows.len()..].iter().map(|d| a1 * d + params.w2_root).collect();
        Ok(EptOracle {
            params,
            mu: mu.entries().to_vec(),
            nu: nu.entries().to_vec(),
            mass_mu: mu.total_mass(),
            mass_nu: nu.total_mass(),
            dist,
            w1,
            w2,
        })
    }

    pub fn params(&self) -> &EptParams {
        &self.params
    }

    /// Largest pairwise support distance.
    pub fn support_diameter(&self) -> f64 {
        self.dist.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Largest magnitude of the extended cost at λ = 0.
    pub fn cost_scale(&self) -> f64 {
        let w = self.w1.iter().chain(&self.w2).copied().fold(0.0, f64::max);
        (self.params.b * self.support_diameter()).max(w)
    }

    /// `Σ w1 dμ + Σ w2 dν`, the cost of moving nothing.
    pub fn empty_plan_cost(&self) -> f64 {
        self.mu.iter().zip(&self.w1).map(|(e, w)| e.1 * w).sum::<f64>()
            + self.nu.iter().zip(&self.w2).map(|(e, w)| e.1 * w).sum::<f64>()
    }

    /// Extended balanced instance at multiplier `lambda`.
    pub fn instance(&self, lambda: f64) -> TransportInstance {
        let b = self.params.b;
        let mut supplies: Vec<(PointTag, f64)> = self.mu.iter().map(|&(n, m)| (PointTag::Node(n), m)).collect();
        supplies.push((PointTag::Auxiliary, self.mass_nu));
        let mut demands: Vec<(PointTag, f64)> = self.nu.iter().map(|&(n, m)| (PointTag::Node(n), m)).collect();
        demands.push((PointTag::Auxiliary, self.mass_mu));

        let mut cost = Vec::with_capacity(supplies.len());
        for (i, drow) in self.dist.iter().enumerate() {
            let mut row: Vec<f64> = drow.iter().map(|d| b * (d - lambda)).collect();
            row.push(self.w1[i]);
            cost.push(row);
        }
        let mut last = self.w2.clone();
        last.push(0.0);
        cost.push(last);
        TransportInstance {
            supplies,
            demands,
            cost,
        }
    }

    pub fn solve(&self, lambda: f64) -> Result<OracleResult> {
        let inst = self.instance(lambda);
        let solution = solve_transportation(&inst)?;
        let (m, n) = (self.mu.len(), self.nu.len());
        let plan_mass = solution.plan[..m].iter().map(|r| r[..n].iter().sum::<f64>()).sum();
        let certificate = inst.certify(&solution);
        Ok(OracleResult {
            value: solution.value,
            plan_mass,
            dual_gap: certificate.dual_gap,
            certificate,
            solution,
        })
    }

    /// Solves every λ in `lambdas` (must be ascending).
    pub fn sweep(&self, lambdas: &[f64], exec: Execution) -> Result<Vec<SweepPoint>> {
        if lambdas.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(UstError::InvalidParams("lambda grid must be sorted ascending".into()));
        }
        par::try_map_indices(exec, lambdas.len(), |k| {
            let r = self.solve(lambdas[k])?;
            Ok(SweepPoint {
                lambda: lambdas[k],
                plan_mass: r.plan_mass,
                et_value: r.value,
            })
        })
    }

    /// Mass-constrained cost `W_m` from a sweep.
    ///
    /// `ET_λ + λ·b·m` is a lower bound on `W_m` for every λ and equals it when
    /// `b·m` is a subgradient at λ, so the grid maximum is reported together with
    /// the λ pair that brackets the target mass.
    pub fn mass_constrained(&self, sweep: &[SweepPoint], m: f64) -> Result<MassConstrained> {
        let cap = self.mass_mu.min(self.mass_nu);
        if !(m >= 0.0 && m <= cap + 1e-12) {
            return Err(UstError::InvalidParams(format!("target mass {m} outside [0, {cap}]")));
        }
        if sweep.is_empty() {
            return Err(UstError::InvalidParams("empty sweep".into()));
        }
        let b = self.params.b;
        let mut best = f64::NEG_INFINITY;
        let mut exact = false;
        for s in sweep {
            let v = s.et_value + s.lambda * b * m;
            if v > best {
                best = v;
            }
            if (s.plan_mass - m).abs() <= 1e-9 * cap.max(1.0) {
                exact = true;
            }
        }
        let hi = sweep.iter().position(|s| s.plan_mass >= m - 1e-12);
        let (lambda_lo, lambda_hi) = match hi {
            Some(0) => (None, Some(sweep[0].lambda)),
            Some(k) => (Some(sweep[k - 1].lambda), Some(sweep[k].lambda)),
            None => (sweep.last().map(|s| s.lambda), None),
        };
        Ok(MassConstrained {
            lambda_lo,
            lambda_hi,
            value: best,
            exact,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub lambda: f64,
    pub plan_mass: f64,
    pub et_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassConstrained {
    /// Largest grid λ whose plan moves less than the target mass.
    pub lambda_lo: Option<f64>,
    /// Smallest grid λ whose plan moves at least the target mass.
    pub lambda_hi: Option<f64>,
    /// `max_λ ET_λ + λ·b·m` over the grid.
    pub value: f64,
    /// Some grid plan moves exactly the target mass, so `value` is `W_m`.
    pub exact: bool,
}

/// Extended balanced instance for `(μ, ν)`.
pub fn extend_problem(
    g: &PhysicalGraph,
    params: EptParams,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<TransportInstance> {
    Ok(EptOracle::new(g, params, mu, nu)?.instance(params.lambda))
}

/// `ET_λ(μ, ν)` via the extended transport problem.
pub fn et_lambda(
    g: &PhysicalGraph,
    params: EptParams,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<OracleResult> {
    EptOracle::new(g, params, mu, nu)?.solve(params.lambda)
}

/// Plan mass and `ET_λ` over an ascending λ grid.
pub fn mass_sweep(
    g: &PhysicalGraph,
    params: EptParams,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    lambdas: &[f64],
) -> Result<Vec<SweepPoint>> {
    EptOracle::new(g, params, mu, nu)?.sweep(lambdas, Execution::default())
}

/// p-Wasserstein distance with ground cost `d^p` between equal-mass measures.
pub fn wasserstein(g: &PhysicalGraph, p: f64, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<OracleResult> {
    wasserstein_with(g, p, mu, nu, Execution::default())
}

pub fn wasserstein_with(
    g: &PhysicalGraph,
    p: f64,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    exec: Execution,
) -> Result<OracleResult> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(UstError::InvalidParams(format!(
            "Wasserstein order must be finite and >= 1, got {p}"
        )));
    }
    let (a, b) = (mu.total_mass(), nu.total_mass());
    if (a - b).abs() > 1e-9 * a.max(b).max(f64::MIN_POSITIVE) {
        return Err(UstError::UnbalancedMasses(a, b));
    }
    mu.check_support(g.node_count())?;
    nu.check_support(g.node_count())?;
    let rows: Vec<NodeId> = mu.entries().iter().map(|e| e.0).collect();
    let cols: Vec<NodeId> = nu.entries().iter().map(|e| e.0).collect();
    let dist = support_distances(g, &rows, &cols, exec);
    let cost: Vec<Vec<f64>> = dist
        .iter()
        .map(|r| r.iter().map(|d| if p == 1.0 { *d } else { d.powf(p) }).collect())
        .collect();
    let mut demands: Vec<(PointTag, f64)> = nu.entries().iter().map(|&(n, m)| (PointTag::Node(n), m)).collect();
    // absorb the rounding difference so the instance is exactly balanced
    if let Some(last) = demands.last_mut() {
        last.1 = (last.1 + a - b).max(0.0);
    }
    let inst = TransportInstance {
        supplies: mu.entries().iter().map(|&(n, m)| (PointTag::Node(n), m)).collect(),
        demands,
        cost,
    };
    let solution = solve_transportation(&inst)?;
    let certificate = inst.certify(&solution);
    let value = if p == 1.0 {
        solution.value.max(0.0)
    } else {
        solution.value.max(0.0).powf(1.0 / p)
    };
    Ok(OracleResult {
        value,
        plan_mass: a,
        dual_gap: certificate.dual_gap,
        certificate,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_edge() -> PhysicalGraph {
        PhysicalGraph::new(2, &[(0, 1, 1.0)]).unwrap()
    }

    fn p3() -> PhysicalGraph {
        PhysicalGraph::new(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap()
    }

    fn default_ept(root: NodeId) -> EptParams {
        EptParams::from_ust(&UstParams::default(), root, 1.0)
    }

    #[test]
    fn extended_instance_layout() {
        let g = unit_edge();
        let d1 = DiscreteMeasure::dirac(1);
        let inst = extend_problem(&g, default_ept(0), &d1, &d1).unwrap();
        assert_eq!(inst.cost, vec![vec![-1.0, 2.0], vec![2.0, 0.0]]);
        assert_eq!(
            inst.supplies,
            vec![(PointTag::Node(1), 1.0), (PointTag::Auxiliary, 1.0)]
        );
        assert_eq!(inst.demands, vec![(PointTag::Node(1), 1.0), (PointTag::Auxiliary, 1.0)]);
        assert_eq!(inst.total_supply(), inst.total_demand());

        let r = et_lambda(&g, default_ept(0), &d1, &d1).unwrap();
        assert_eq!(r.value, -1.0);
        assert_eq!(r.plan_mass, 1.0);

        let neg = et_lambda(&g, default_ept(0).with_lambda(-10.0), &d1, &d1).unwrap();
        assert_eq!(neg.value, 4.0);
        assert_eq!(neg.plan_mass, 0.0);
    }

    #[test]
    fn empty_measures() {
        let g = unit_edge();
        let z = DiscreteMeasure::zero();
        let inst = extend_problem(&g, default_ept(0), &z, &z).unwrap();
        assert_eq!(inst.cost, vec![vec![0.0]]);
        assert_eq!(et_lambda(&g, default_ept(0), &z, &z).unwrap().value, 0.0);
    }

    #[test]
    fn slope_range_enforced() {
        let g = unit_edge();
        let d1 = DiscreteMeasure::dirac(1);
        let p = EptParams {
            weight_slope: 1.5,
            ..default_ept(0)
        };
        assert!(matches!(
            et_lambda(&g, p, &d1, &d1),
            Err(UstError::InvalidWeightSlope { .. })
        ));
    }

    #[test]
    fn wasserstein_values() {
        let g = p3();
        let (d0, d1, d2) = (
            DiscreteMeasure::dirac(0),
            DiscreteMeasure::dirac(1),
            DiscreteMeasure::dirac(2),
        );
        assert_eq!(wasserstein(&g, 1.0, &d1, &d2).unwrap().value, 2.0);
        assert_eq!(wasserstein(&g, 2.0, &d1, &d1).unwrap().value, 0.0);
        let mu = d0.scale(0.5).unwrap().add(&d2.scale(0.5).unwrap());
        assert_eq!(wasserstein(&g, 1.0, &mu, &d1).unwrap().value, 1.5);
        assert!(matches!(
            wasserstein(&g, 1.0, &d0.scale(2.0).unwrap(), &d1),
            Err(UstError::UnbalancedMasses(..))
        ));
    }

    #[test]
    fn sweep_endpoints_and_monotonicity() {
        let g = p3();
        let mu = DiscreteMeasure::new([(0, 1.0), (2, 0.5)]).unwrap();
        let nu = DiscreteMeasure::new([(1, 2.0)]).unwrap();
        let oracle = EptOracle::new(&g, default_ept(0), &mu, &nu).unwrap();
        let lo = -10.0 * oracle.cost_scale();
        let hi = 2.0 * oracle.support_diameter();
        let lambdas: Vec<f64> = (0..20).map(|k| lo + (hi - lo) * k as f64 / 19.0).collect();
        let sweep = oracle.sweep(&lambdas, Execution::Sequential).unwrap();
        assert_eq!(sweep[0].plan_mass, 0.0);
        assert!((sweep[0].et_value - oracle.empty_plan_cost()).abs() < 1e-12);
        assert!((sweep[19].plan_mass - 1.5).abs() < 1e-12);
        assert!(sweep.windows(2).all(|w| w[0].plan_mass <= w[1].plan_mass + 1e-12));

        let full = oracle.mass_constrained(&sweep, 1.5).unwrap();
        assert!(full.exact);
        assert!(full.lambda_hi.is_some());
        let none = oracle.mass_constrained(&sweep, 0.0).unwrap();
        assert!(none.exact);
        // empty plan: W_0 = Σ w1 μ + Σ w2 ν
        assert!((none.value - oracle.empty_plan_cost()).abs() < 1e-9);
        assert!(oracle.mass_constrained(&sweep, 5.0).is_err());
        assert!(oracle.sweep(&[1.0, 0.0], Execution::Sequential).is_err());
    }
}
