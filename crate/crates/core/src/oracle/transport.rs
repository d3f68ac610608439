//! Exact dense transportation LP by successive shortest augmenting paths.
//!
//! Node potentials keep every residual arc at nonnegative reduced cost, so each
//! augmentation runs a plain Dijkstra and negative costs are allowed. At
//! termination the potentials are optimal duals: they are feasible for every
//! cell and tight on every cell that carries flow.

use crate::error::{Result, UstError};
use crate::graph::NodeId;

/// Point of the extended space: a graph node or the auxiliary point ŝ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointTag {
    Node(NodeId),
    Auxiliary,
}

/// Balanced bipartite transport problem with a dense cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportInstance {
    pub supplies: Vec<(PointTag, f64)>,
    pub demands: Vec<(PointTag, f64)>,
    /// `cost[i][j]` for supply `i` and demand `j`; may be negative.
    pub cost: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub value: f64,
    pub plan: Vec<Vec<f64>>,
    pub dual_u: Vec<f64>,
    pub dual_v: Vec<f64>,
}

/// Optimality certificate of a solution against its instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    /// max |row sum − supply| and |column sum − demand|.
    pub marginal_error: f64,
    /// max(0, u_i + v_j − c_ij) over all cells.
    pub dual_infeasibility: f64,
    /// max |u_i + v_j − c_ij| over cells with positive flow.
    pub slackness_violation: f64,
    /// |primal value − dual value|.
    pub dual_gap: f64,
    /// |value − Σ plan ∘ cost|.
    pub value_error: f64,
}

impl TransportInstance {
    pub fn total_supply(&self) -> f64 {
        self.supplies.iter().map(|s| s.1).sum()
    }

    pub fn total_demand(&self) -> f64 {
        self.demands.iter().map(|d| d.1).sum()
    }

    fn check(&self) -> Result<()> {
        let (m, n) = (self.supplies.len(), self.demands.len());
        if self.cost.len() != m || self.cost.iter().any(|r| r.len() != n) {
            return Err(UstError::CostShape {
                rows: self.cost.len(),
                cols: self.cost.first().map_or(0, |r| r.len()),
                supplies: m,
                demands: n,
            });
        }
        let (s, d) = (self.total_supply(), self.total_demand());
        if (s - d).abs() > 1e-12 * s.max(d).max(1.0) {
            return Err(UstError::Unbalanced { supply: s, demand: d });
        }
        if let Some(&(tag, mass)) = self
            .supplies
            .iter()
            .chain(&self.demands)
            .find(|(_, x)| !(*x >= 0.0) || !x.is_finite())
        {
            let node = match tag {
                PointTag::Node(n) => n,
                PointTag::Auxiliary => usize::MAX,
            };
            return Err(UstError::NegativeMass { node, mass });
        }
        Ok(())
    }

    pub fn certify(&self, sol: &TransportSolution) -> Certificate {
        let (m, n) = (self.supplies.len(), self.demands.len());
        let mut marginal_error: f64 = 0.0;
        for i in 0..m {
            let row: f64 = sol.plan[i].iter().sum();
            marginal_error = marginal_error.max((row - self.supplies[i].1).abs());
        }
        for j in 0..n {
            let col: f64 = (0..m).map(|i| sol.plan[i][j]).sum();
            marginal_error = marginal_error.max((col - self.demands[j].1).abs());
        }
        let mut dual_infeasibility: f64 = 0.0;
        let mut slackness_violation: f64 = 0.0;
        let mut primal = 0.0;
        for i in 0..m {
            for j in 0..n {
                let slack = sol.dual_u[i] + sol.dual_v[j] - self.cost[i][j];
                dual_infeasibility = dual_infeasibility.max(slack);
                if sol.plan[i][j] > 0.0 {
                    slackness_violation = slackness_violation.max(slack.abs());
                }
                primal += sol.plan[i][j] * self.cost[i][j];
            }
        }
        let dual: f64 = (0..m).map(|i| sol.dual_u[i] * self.supplies[i].1).sum::<f64>()
            + (0..n).map(|j| sol.dual_v[j] * self.demands[j].1).sum::<f64>();
        Certificate {
            marginal_error,
            dual_infeasibility,
            slackness_violation,
            dual_gap: (sol.value - dual).abs(),
            value_error: (sol.value - primal).abs(),
        }
    }
}

impl Certificate {
    /// All optimality conditions hold within `tol`, the gap relative to the value scale.
    pub fn passes(&self, tol: f64, scale: f64) -> bool {
        self.marginal_error <= tol
            && self.dual_infeasibility <= tol
            && self.slackness_violation <= tol
            && self.dual_gap <= tol * scale.max(1.0)
            && self.value_error <= tol * scale.max(1.0)
    }
}

/// Solves the transportation LP exactly.
pub fn solve_transportation(inst: &TransportInstance) -> Result<TransportSolution> {
    inst.check()?;
    let m = inst.supplies.len();
    let n = inst.demands.len();
    let cost = &inst.cost;
    let total = inst.total_supply();
    let eps = 1e-14 * total.max(f64::MIN_POSITIVE);

    let mut supply_left: Vec<f64> = inst.supplies.iter().map(|s| s.1).collect();
    let mut demand_left: Vec<f64> = inst.demands.iter().map(|d| d.1).collect();
    let mut plan = vec![vec![0.0; n]; m];

    // node layout: 0 = source, 1..=m rows, m+1..=m+n columns, m+n+1 = sink
    let nodes = m + n + 2;
    let sink = nodes - 1;
    let row = |i: usize| 1 + i;
    let col = |j: usize| 1 + m + j;
    let mut pot = vec![0.0; nodes];
    for j in 0..n {
        pot[col(j)] = (0..m).map(|i| cost[i][j]).fold(f64::INFINITY, f64::min);
        if !pot[col(j)].is_finite() {
            pot[col(j)] = 0.0;
        }
    }
    pot[sink] = (0..n).map(|j| pot[col(j)]).fold(f64::INFINITY, f64::min);
    if !pot[sink].is_finite() {
        pot[sink] = 0.0;
    }

    let max_rounds = 50 * (m + n) + 1000;
    let mut dist = vec![f64::INFINITY; nodes];
    let mut done = vec![false; nodes];
    let mut pred = vec![usize::MAX; nodes];
    let mut rounds = 0;

    loop {
        let remaining: f64 = supply_left.iter().sum();
        if remaining <= eps * (m + 1) as f64 {
            break;
        }
        rounds += 1;
        if rounds > max_rounds {
            return Err(UstError::DegenerateCycling(max_rounds));
        }

        dist.fill(f64::INFINITY);
        done.fill(false);
        pred.fill(usize::MAX);
        dist[0] = 0.0;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (v, &d) in dist.iter().enumerate() {
                if !done[v] && d < best {
                    best = d;
                    u = v;
                }
            }
            if u == usize::MAX || u == sink {
                break;
            }
            done[u] = true;
            let du = dist[u];
            let relax = |v: usize, c: f64, dist: &mut [f64], pred: &mut [usize]| {
                let nd = du + (c + pot[u] - pot[v]).max(0.0);
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = u;
                }
            };
            if u == 0 {
                for (i, &left) in supply_left.iter().enumerate() {
                    if left > eps {
                        relax(row(i), 0.0, &mut dist, &mut pred);
                    }
                }
            } else if u <= m {
                let i = u - 1;
                for j in 0..n {
                    if !done[col(j)] {
                        relax(col(j), cost[i][j], &mut dist, &mut pred);
                    }
                }
            } else {
                let j = u - 1 - m;
                for i in 0..m {
                    if plan[i][j] > eps && !done[row(i)] {
                        relax(row(i), -cost[i][j], &mut dist, &mut pred);
                    }
                }
                if demand_left[j] > eps {
                    relax(sink, 0.0, &mut dist, &mut pred);
                }
            }
        }
        if !dist[sink].is_finite() {
            // demand exhausted up to rounding ahead of supply
            break;
        }
        let dt = dist[sink];
        for v in 0..nodes {
            pot[v] += dist[v].min(dt);
        }

        // walk back from the sink to find the bottleneck
        let mut path = Vec::new();
        let mut v = sink;
        while v != 0 {
            path.push(v);
            v = pred[v];
        }
        path.push(0);
        path.reverse();
        let first_row = path[1] - 1;
        let last_col = path[path.len() - 2] - 1 - m;
        let mut delta = supply_left[first_row].min(demand_left[last_col]);
        for w in path[1..path.len() - 1].windows(2) {
            let (a, b) = (w[0], w[1]);
            if a > m {
                // column -> row: cancels flow
                delta = delta.min(plan[b - 1][a - 1 - m]);
            }
        }
        for w in path[1..path.len() - 1].windows(2) {
            let (a, b) = (w[0], w[1]);
            if a <= m {
                plan[a - 1][b - 1 - m] += delta;
            } else {
                let cell = &mut plan[b - 1][a - 1 - m];
                *cell -= delta;
                if *cell <= eps {
                    *cell = 0.0;
                }
            }
        }
        supply_left[first_row] -= delta;
        if supply_left[first_row] <= eps {
            supply_left[first_row] = 0.0;
        }
        demand_left[last_col] -= delta;
        if demand_left[last_col] <= eps {
            demand_left[last_col] = 0.0;
        }
    }

    let dual_u: Vec<f64> = (0..m).map(|i| -pot[row(i)]).collect();
    let dual_v: Vec<f64> = (0..n).map(|j| pot[col(j)]).collect();
    let value = plan
        .iter()
        .zip(cost)
        .map(|(p, c)| p.iter().zip(c).map(|(x, y)| x * y).sum::<f64>())
        .sum();
    Ok(TransportSolution {
        value,
        plan,
        dual_u,
        dual_v,
    })
}
