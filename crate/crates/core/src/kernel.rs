//! Kernels `exp(−t·d)` on distance matrices and numerical definiteness checks.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, UstError};
use crate::par::{self, Execution};

/// Eigenvalues above this are treated as nonnegative.
pub const PSD_TOL: f64 = -1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub values: Vec<Vec<f64>>,
    pub t: f64,
}

fn check_distance_matrix(d: &[Vec<f64>]) -> Result<()> {
    let n = d.len();
    for (i, row) in d.iter().enumerate() {
        if row.len() != n {
            return Err(UstError::NonSymmetricInput(i, row.len()));
        }
        if row[i] != 0.0 {
            return Err(UstError::NonSymmetricInput(i, i));
        }
        for j in 0..i {
            let scale = row[j].abs().max(d[j][i].abs()).max(1.0);
            if (row[j] - d[j][i]).abs() > 1e-12 * scale || !(row[j] >= 0.0) {
                return Err(UstError::NonSymmetricInput(i, j));
            }
        }
    }
    Ok(())
}

/// Elementwise `exp(−t·d)`.
pub fn gram(dists: &[Vec<f64>], t: f64) -> Result<GramMatrix> {
    gram_with(dists, t, Execution::default())
}

pub fn gram_with(dists: &[Vec<f64>], t: f64, exec: Execution) -> Result<GramMatrix> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(UstError::NonPositiveT(t));
    }
    check_distance_matrix(dists)?;
    let values = par::map_indices(exec, dists.len(), |i| dists[i].iter().map(|d| (-t * d).exp()).collect());
    Ok(GramMatrix { values, t })
}

impl GramMatrix {
    /// Elementwise integer power; `gram(d, t/k).powi(k) == gram(d, t)`.
    pub fn powi(&self, k: i32) -> GramMatrix {
        GramMatrix {
            values: self
                .values
                .iter()
                .map(|r| r.iter().map(|x| x.powi(k)).collect())
                .collect(),
            t: self.t * k as f64,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.values)
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return f64::INFINITY;
    }
    let mat = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[i][j] + m[j][i]));
    SymmetricEigen::new(mat)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `Σ_ij c_i c_j d_ij`.
pub fn quadratic_form(d: &[Vec<f64>], c: &[f64]) -> f64 {
    d.iter()
        .zip(c)
        .map(|(row, ci)| ci * row.iter().zip(c).map(|(x, cj)| x * cj).sum::<f64>())
        .sum()
}

/// Largest `Σ c_i c_j d_ij` over `trials` random zero-sum vectors with entries
/// of order one; nonpositive for a negative definite kernel.
pub fn neg_def_violation(d: &[Vec<f64>], trials: usize, seed: u64) -> f64 {
    let n = d.len();
    if n < 2 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let mut c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mean = c.iter().sum::<f64>() / n as f64;
        c.iter_mut().for_each(|x| *x -= mean);
        worst = worst.max(quadratic_form(d, &c));
    }
    worst
}

/// Bandwidth candidates `t = 1/(k·q_s)` for `k ∈ {1, 2, 5}` and `q_s` the
/// s-th percentile (s = 10, 20, …, 90) of up to `sample` off-diagonal distances.
pub fn bandwidth_grid(d: &[Vec<f64>], sample: usize, seed: u64) -> Vec<f64> {
    let n = d.len();
    let mut pool: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| d[i][j])
        .collect();
    if pool.len() > sample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        pool = index::sample(&mut rng, pool.len(), sample)
            .into_iter()
            .map(|k| pool[k])
            .collect();
    }
    pool.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    if pool.is_empty() {
        return out;
    }
    for s in (10..=90).step_by(10) {
        let q = quantile(&pool, s as f64 / 100.0);
        if q > 0.0 {
            for k in [1.0, 2.0, 5.0] {
                out.push(1.0 / (k * q));
            }
        }
    }
    out
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
