//! Classical PageRank: power iteration in discrete time, continuous-time
//! diffusion, and the dense stationary solve that the quantum walk is
//! checked against.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Solve};

use crate::error::{Error, Result};
use crate::graph::GoogleMatrix;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_DT: f64 = 0.01;

/// Scores closer than this are ranked as ties, ordered by node id.
pub const RANK_TIE_TOL: f64 = 1e-12;

/// Entries may dip this far below zero before a vector is rejected.
pub const NEGATIVITY_TOL: f64 = 1e-14;

/// The stationary vector must satisfy `max |G p - p|` below this bound.
pub const STATIONARY_RESIDUAL_TOL: f64 = 1e-10;

/// Eigenvalues of `G` within this distance of 1 count toward the kernel
/// dimension of `G - I` when diagnosing non-uniqueness.
const UNIT_EIGENVALUE_TOL: f64 = 1e-9;

/// A probability vector over nodes: nonnegative entries summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    values: Array1<f64>,
}

impl RankVector {
    pub fn new(values: Array1<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("rank vector must be non-empty".into()));
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite entry {bad}")));
        }
        if let Some((i, &v)) = values.indexed_iter().find(|&(_, &v)| v < -NEGATIVITY_TOL) {
            return Err(Error::Validation(format!("entry {i} = {v} is negative")));
        }
        let sum: f64 = values.sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("entries sum to {sum}, expected 1")));
        }
        Ok(Self { values })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            values: Array1::from_elem(n, 1.0 / n as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    /// Deterministic ranking: scores descending; scores within
    /// [`RANK_TIE_TOL`] form a tie group ordered by node id ascending.
    pub fn ranking(&self) -> Vec<RankEntry> {
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            self.values[b]
                .partial_cmp(&self.values[a])
                .expect("rank scores are finite")
                .then(a.cmp(&b))
        });
        let mut start = 0;
        while start < n {
            let leader = self.values[order[start]];
            let mut end = start + 1;
            while end < n && (leader - self.values[order[end]]).abs() <= RANK_TIE_TOL {
                end += 1;
            }
            order[start..end].sort_unstable();
            start = end;
        }
        order
            .into_iter()
            .enumerate()
            .map(|(pos, node)| RankEntry {
                node,
                score: self.values[node],
                rank: pos + 1,
            })
            .collect()
    }
}

/// One row of a ranking table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankEntry {
    pub node: usize,
    pub score: f64,
    pub rank: usize,
}

/// Iteration history of a solver run. `iterates` pairs a step index (or a
/// time, for continuous evolution) with the L1 residual of that step.
#[derive(Debug, Clone)]
pub struct ConvergenceTrace {
    pub iterates: Vec<(f64, f64)>,
    pub converged: bool,
    pub final_vector: RankVector,
    /// `|sum(p) - 1|` of the final vector, reported rather than repaired.
    pub sum_drift: f64,
}

fn check_dims(g: &GoogleMatrix, p0: &RankVector) -> Result<()> {
    if g.dim() != p0.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            actual: p0.dim(),
        });
    }
    Ok(())
}

/// Discrete-time PageRank: iterates `p <- G p` until the L1 step change
/// drops below `tol` or `max_iter` is reached (the latter is reported via
/// `converged = false`, not an error).
pub fn power_iterate(
    g: &GoogleMatrix,
    p0: &RankVector,
    tol: f64,
    max_iter: usize,
) -> Result<ConvergenceTrace> {
    check_dims(g, p0)?;
    if tol <= 0.0 {
        return Err(Error::Validation(format!("tol = {tol} must be positive")));
    }
    let gm = g.entries();
    let mut p = p0.values().clone();
    let mut iterates = Vec::new();
    let mut converged = false;
    for step in 1..=max_iter {
        let next = gm.dot(&p);
        let residual: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        iterates.push((step as f64, residual));
        p = next;
        if residual < tol {
            converged = true;
            break;
        }
    }
    let sum_drift = (p.sum() - 1.0).abs();
    Ok(ConvergenceTrace {
        iterates,
        converged,
        final_vector: RankVector::new(p)?,
        sum_drift,
    })
}

/// Continuous-time diffusion `dp/dt = (G - I) p`, integrated by fixed-step
/// classical RK4; the last step is shortened to land on `t` exactly. The
/// flow conserves probability, so the final sum drift must stay below 1e-9.
pub fn continuous_evolve(
    g: &GoogleMatrix,
    p0: &RankVector,
    t: f64,
    dt: f64,
) -> Result<ConvergenceTrace> {
    check_dims(g, p0)?;
    if t < 0.0 {
        return Err(Error::Validation(format!("t = {t} must be nonnegative")));
    }
    if dt <= 0.0 {
        return Err(Error::Validation(format!("dt = {dt} must be positive")));
    }
    let n = g.dim();
    let a = g.entries() - &Array2::<f64>::eye(n);
    let rhs = |p: &Array1<f64>| a.dot(p);

    let mut p = p0.values().clone();
    let mut iterates = Vec::new();
    let mut time = 0.0;
    while time < t {
        let step = dt.min(t - time);
        let k1 = rhs(&p);
        let k2 = rhs(&(&p + &(&k1 * (step / 2.0))));
        let k3 = rhs(&(&p + &(&k2 * (step / 2.0))));
        let k4 = rhs(&(&p + &(&k3 * step)));
        let next = &p + &((k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0));
        let residual: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        time += step;
        iterates.push((time, residual));
        p = next;
    }
    let sum_drift = (p.sum() - 1.0).abs();
    if sum_drift > 1e-9 {
        return Err(Error::NumericalInstability(format!(
            "probability sum drifted by {sum_drift:.3e} over t = {t}; reduce dt"
        )));
    }
    Ok(ConvergenceTrace {
        iterates,
        converged: true,
        final_vector: RankVector::new(p)?,
        sum_drift,
    })
}

/// The stationary distribution, by dense linear solve: `(G - I) p = 0` with
/// the last row replaced by the normalization `sum p_i = 1`.
pub fn stationary(g: &GoogleMatrix) -> Result<RankVector> {
    let n = g.dim();
    let mut a = g.entries() - &Array2::<f64>::eye(n);
    a.row_mut(n - 1).fill(1.0);
    let mut b = Array1::zeros(n);
    b[n - 1] = 1.0;

    let p = match a.solve(&b) {
        Ok(p) => p,
        Err(err) => {
            return Err(match unit_kernel_dimension(g)? {
                dim if dim > 1 => Error::NonUniqueStationary { kernel_dim: dim },
                _ => Error::LinAlg(err),
            })
        }
    };

    let residual = g
        .entries()
        .dot(&p)
        .iter()
        .zip(&p)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if residual > STATIONARY_RESIDUAL_TOL {
        let kernel_dim = unit_kernel_dimension(g)?;
        if kernel_dim > 1 {
            return Err(Error::NonUniqueStationary { kernel_dim });
        }
        return Err(Error::NumericalInstability(format!(
            "stationary solve residual {residual:.3e} exceeds {STATIONARY_RESIDUAL_TOL:.0e}"
        )));
    }
    RankVector::new(p)
}

/// Multiplicity of the eigenvalue 1 of `G`, i.e. the kernel dimension of
/// `G - I`.
fn unit_kernel_dimension(g: &GoogleMatrix) -> Result<usize> {
    let (eigenvalues, _) = g.entries().eig()?;
    Ok(eigenvalues
        .iter()
        .filter(|l| (*l - 1.0).norm() < UNIT_EIGENVALUE_TOL)
        .count())
}
