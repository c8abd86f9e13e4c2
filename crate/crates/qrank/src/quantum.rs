//! Quantum stochastic walk engine: density matrices, the
//! Lindblad-Kossakowski generator with PageRank jump rates, fixed-step RK4
//! integration, and quantum-rank extraction from the stationary diagonal.
//!
//! The generator is
//!
//! ```text
//! d(rho)/dt = -i (1 - eps) [H, rho]
//!             + eps * sum_ij gamma_ij (L_ij rho L_ij' - 1/2 {L_ij' L_ij, rho})
//! ```
//!
//! with jump operators `L_ij = |i><j|` and rates `gamma_ij = G_ij`, so
//! population flows `j -> i` at rate `G_ij`, matching the column-stochastic
//! hopping orientation. For that choice the dissipator collapses to
//! `diag(gamma . d) - 1/2 {diag(s), rho}` with `d = diag(rho)` and `s` the
//! column sums of `gamma`; the sum over `N^2` jump operators is never formed.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::classical::RankVector;
use crate::error::{Error, Result};
use crate::graph::GoogleMatrix;
use crate::lattice::LatticeHamiltonian;

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues may dip this far below zero in a valid state.
pub const PSD_TOL: f64 = 1e-10;

/// Looser bounds applied to states produced by time integration; violating
/// them is a numerical-instability error, not a modelling error.
pub const INTEGRATION_TRACE_TOL: f64 = 1e-8;
pub const INTEGRATION_PSD_TOL: f64 = 1e-6;

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_STEADY_TOL: f64 = 1e-9;
pub const DEFAULT_T_MAX: f64 = 1000.0;

/// How often (in steps) the steady-state driver re-evaluates the residual.
const RESIDUAL_CHECK_STRIDE: usize = 5;

pub(crate) fn conj_transpose(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|v| v.conj())
}

/// Entrywise max-modulus norm, the norm used for residuals and defects.
pub fn max_abs(m: &Array2<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// An N x N complex matrix validated as Hermitian, unit-trace, and positive
/// semidefinite (within tolerances). Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Array2<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: Array2<Complex64>) -> Result<Self> {
        Self::with_tolerances(entries, TRACE_TOL, PSD_TOL)
    }

    pub(crate) fn with_tolerances(
        entries: Array2<Complex64>,
        trace_tol: f64,
        psd_tol: f64,
    ) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols || rows == 0 {
            return Err(Error::Validation(format!(
                "density matrix must be square and non-empty, got {rows}x{cols}"
            )));
        }
        let herm = max_abs(&(&entries - &conj_transpose(&entries)));
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "Hermiticity defect {herm:.3e} exceeds {HERMITICITY_TOL:.0e}"
            )));
        }
        let trace: Complex64 = entries.diag().sum();
        if (trace - 1.0).norm() > trace_tol {
            return Err(Error::InvalidState(format!(
                "trace {trace} differs from 1 by more than {trace_tol:.0e}"
            )));
        }
        let state = Self { entries };
        let min_eig = state.min_eigenvalue()?;
        if min_eig < -psd_tol {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min_eig:.3e} below -{psd_tol:.0e}"
            )));
        }
        Ok(state)
    }

    /// The maximally mixed state `I/N`: diagonal `1/N`, zero off-diagonals.
    pub fn maximally_mixed(n: usize) -> Self {
        let mut entries = Array2::zeros((n, n));
        for i in 0..n {
            entries[[i, i]] = Complex64::new(1.0 / n as f64, 0.0);
        }
        Self { entries }
    }

    /// The pure basis state `|k><k|`.
    pub fn basis_state(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::Validation(format!("site {k} outside [0, {n})")));
        }
        let mut entries = Array2::zeros((n, n));
        entries[[k, k]] = Complex64::ONE;
        Ok(Self { entries })
    }

    /// The classical mixture `diag(p)`.
    pub fn from_rank_vector(p: &RankVector) -> Self {
        let n = p.dim();
        let mut entries = Array2::zeros((n, n));
        for (i, &v) in p.values().indexed_iter() {
            entries[[i, i]] = Complex64::new(v, 0.0);
        }
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.diag().sum()
    }

    pub fn diagonal_real(&self) -> Array1<f64> {
        self.entries.diag().mapv(|v| v.re)
    }

    /// `Tr(rho^2)`; 1 for pure states, `1/N` for the maximally mixed state.
    pub fn purity(&self) -> f64 {
        self.entries.dot(&self.entries).diag().sum().re
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Result<Array1<f64>> {
        let herm = (&self.entries + &conj_transpose(&self.entries)).mapv(|v| 0.5 * v);
        Ok(herm.eigh(UPLO::Lower)?.0)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eigs = self.eigenvalues()?;
        Ok(eigs[0])
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.entries - &conj_transpose(&self.entries)))
    }
}

/// Returns the initial walker state: maximally mixed, `I/N`.
pub fn initial_state(n: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::Validation("node count must be positive".into()));
    }
    Ok(DensityMatrix::maximally_mixed(n))
}

/// Where the coherent part of the generator comes from.
#[derive(Debug, Clone)]
pub enum HamiltonianSource {
    /// `H = ((G - I) + (G - I)^T) / 2`; the Hermitian repair of the directed
    /// walk generator.
    SymmetrizedGoogle,
    /// A tight-binding waveguide-lattice Hamiltonian over the same sites.
    Lattice(LatticeHamiltonian),
    /// A user-supplied Hermitian matrix.
    Custom(Array2<Complex64>),
}

/// The Lindblad-Kossakowski generator: Hamiltonian, jump-rate matrix, and
/// the coherent/dissipative mixing parameter epsilon.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    hamiltonian: Array2<Complex64>,
    rates: Array2<f64>,
    rate_col_sums: Array1<f64>,
    epsilon: f64,
}

impl Liouvillian {
    pub fn new(hamiltonian: Array2<Complex64>, rates: Array2<f64>, epsilon: f64) -> Result<Self> {
        let n = hamiltonian.nrows();
        if hamiltonian.ncols() != n {
            return Err(Error::Validation(format!(
                "hamiltonian must be square, got {}x{}",
                n,
                hamiltonian.ncols()
            )));
        }
        if rates.dim() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: rates.nrows(),
            });
        }
        let herm = max_abs(&(&hamiltonian - &conj_transpose(&hamiltonian)));
        if herm > HERMITICITY_TOL {
            return Err(Error::Validation(format!(
                "hamiltonian Hermiticity defect {herm:.3e} exceeds {HERMITICITY_TOL:.0e}"
            )));
        }
        if let Some((idx, &v)) = rates.indexed_iter().find(|&(_, &v)| !v.is_finite() || v < 0.0) {
            return Err(Error::Validation(format!(
                "rate {idx:?} = {v} must be nonnegative"
            )));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Validation(format!(
                "epsilon = {epsilon} outside [0, 1]"
            )));
        }
        let rate_col_sums = (0..n).map(|j| rates.column(j).sum()).collect();
        Ok(Self {
            hamiltonian,
            rates,
            rate_col_sums,
            epsilon,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn hamiltonian(&self) -> &Array2<Complex64> {
        &self.hamiltonian
    }

    pub fn rates(&self) -> &Array2<f64> {
        &self.rates
    }

    pub(crate) fn rate_col_sums(&self) -> &Array1<f64> {
        &self.rate_col_sums
    }

    /// Applies the generator to a (Hermitian) matrix, returning `d(rho)/dt`.
    pub fn apply(&self, rho: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        if rho.dim() != (self.dim(), self.dim()) {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: rho.nrows(),
            });
        }
        Ok(self.apply_raw(rho))
    }

    /// Generator application without the dimension check, for inner loops.
    ///
    /// The commutator is assembled as `C - C'` with `C = H rho`, and the
    /// dissipator from real scalings, so a bitwise-Hermitian input produces a
    /// bitwise-Hermitian output.
    pub(crate) fn apply_raw(&self, rho: &Array2<Complex64>) -> Array2<Complex64> {
        let n = self.dim();
        let eps = self.epsilon;
        let mut out = Array2::<Complex64>::zeros((n, n));
        if eps < 1.0 {
            let c = self.hamiltonian.dot(rho);
            let scale = Complex64::new(0.0, -(1.0 - eps));
            for i in 0..n {
                for j in 0..n {
                    out[[i, j]] = scale * (c[[i, j]] - c[[j, i]].conj());
                }
            }
        }
        if eps > 0.0 {
            for i in 0..n {
                let mut gain = Complex64::ZERO;
                for j in 0..n {
                    gain += self.rates[[i, j]] * rho[[j, j]];
                }
                out[[i, i]] += eps * gain;
            }
            for i in 0..n {
                for j in 0..n {
                    let loss = eps * 0.5 * (self.rate_col_sums[i] + self.rate_col_sums[j]);
                    out[[i, j]] -= loss * rho[[i, j]];
                }
            }
        }
        out
    }

    /// `max |entry|` of the generator applied to `rho`; zero at stationarity.
    pub fn residual(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(max_abs(&self.apply(rho.entries())?))
    }
}

/// Builds the PageRank generator: rates are the Google-matrix entries
/// (`gamma_ij = G_ij`), the Hamiltonian comes from `source`.
pub fn build_liouvillian(
    source: &HamiltonianSource,
    g: &GoogleMatrix,
    epsilon: f64,
) -> Result<Liouvillian> {
    let n = g.dim();
    let hamiltonian = match source {
        HamiltonianSource::SymmetrizedGoogle => {
            let a = g.entries() - &Array2::<f64>::eye(n);
            let sym = (&a + &a.t()).mapv(|v| Complex64::new(0.5 * v, 0.0));
            sym
        }
        HamiltonianSource::Lattice(lh) => {
            if lh.site_count() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: lh.site_count(),
                });
            }
            lh.matrix_complex()
        }
        HamiltonianSource::Custom(m) => {
            if m.dim() != (n, n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: m.nrows(),
                });
            }
            m.clone()
        }
    };
    Liouvillian::new(hamiltonian, g.entries().clone(), epsilon)
}

pub(crate) fn rk4_step(l: &Liouvillian, rho: &Array2<Complex64>, dt: f64) -> Array2<Complex64> {
    let half = Complex64::new(dt / 2.0, 0.0);
    let full = Complex64::new(dt, 0.0);
    let k1 = l.apply_raw(rho);
    let k2 = l.apply_raw(&(rho + &(&k1 * half)));
    let k3 = l.apply_raw(&(rho + &(&k2 * half)));
    let k4 = l.apply_raw(&(rho + &(&k3 * full)));
    let two = Complex64::new(2.0, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    rho + &((k1 + &k2 * two + &k3 * two + k4) * sixth)
}

fn validate_snapshot(entries: Array2<Complex64>, time: f64) -> Result<DensityMatrix> {
    DensityMatrix::with_tolerances(entries, INTEGRATION_TRACE_TOL, INTEGRATION_PSD_TOL).map_err(
        |err| {
            Error::NumericalInstability(format!(
                "integration left the physical manifold at t = {time}: {err}; reduce dt"
            ))
        },
    )
}

/// Fixed-step RK4 on the matrix master equation. Snapshots are stored every
/// `snapshot_stride` steps (plus the initial state and the exact final time;
/// the last step is shortened to land on `t_final`), and every stored state
/// is re-validated.
pub fn integrate(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
    snapshot_stride: usize,
) -> Result<Vec<(f64, DensityMatrix)>> {
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            actual: rho0.dim(),
        });
    }
    if t_final < 0.0 {
        return Err(Error::Validation(format!(
            "t_final = {t_final} must be nonnegative"
        )));
    }
    if dt <= 0.0 {
        return Err(Error::Validation(format!("dt = {dt} must be positive")));
    }
    if snapshot_stride == 0 {
        return Err(Error::Validation("snapshot stride must be >= 1".into()));
    }

    let mut snapshots = vec![(0.0, rho0.clone())];
    if t_final == 0.0 {
        return Ok(snapshots);
    }

    let full_steps = (t_final / dt).floor() as usize;
    let remainder = t_final - full_steps as f64 * dt;
    let mut rho = rho0.entries().clone();
    for step in 1..=full_steps {
        rho = rk4_step(l, &rho, dt);
        let time = step as f64 * dt;
        let last = step == full_steps && remainder <= dt * 1e-12;
        if step % snapshot_stride == 0 || last {
            let time = if last { t_final } else { time };
            snapshots.push((time, validate_snapshot(rho.clone(), time)?));
        }
    }
    if remainder > dt * 1e-12 {
        rho = rk4_step(l, &rho, remainder);
        snapshots.push((t_final, validate_snapshot(rho, t_final)?));
    }
    Ok(snapshots)
}

/// Result of driving the master equation toward stationarity.
#[derive(Debug, Clone)]
pub struct SteadyStateOutcome {
    pub state: DensityMatrix,
    /// `max |L rho|` at the returned state.
    pub residual: f64,
    /// Whether the residual tolerance was met before `t_max`.
    pub stationary: bool,
    /// Evolution time at which integration stopped.
    pub time: f64,
}

/// Integrates until `max |L rho| < tol` or `t_max` is reached; hitting
/// `t_max` first is reported via `stationary = false`, not an error.
pub fn steady_state_by_integration(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    tol: f64,
    t_max: f64,
    dt: f64,
) -> Result<SteadyStateOutcome> {
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            actual: rho0.dim(),
        });
    }
    if tol <= 0.0 {
        return Err(Error::Validation(format!("tol = {tol} must be positive")));
    }
    if dt <= 0.0 {
        return Err(Error::Validation(format!("dt = {dt} must be positive")));
    }

    let mut rho = rho0.entries().clone();
    let mut time = 0.0;
    let mut residual = max_abs(&l.apply_raw(&rho));
    let mut step = 0usize;
    while residual >= tol && time < t_max {
        let dt_step = dt.min(t_max - time);
        rho = rk4_step(l, &rho, dt_step);
        time += dt_step;
        step += 1;
        if step.is_multiple_of(RESIDUAL_CHECK_STRIDE) || time >= t_max {
            residual = max_abs(&l.apply_raw(&rho));
            let trace: Complex64 = rho.diag().sum();
            if (trace - 1.0).norm() > INTEGRATION_TRACE_TOL {
                return Err(Error::NumericalInstability(format!(
                    "trace drifted to {trace} at t = {time}; reduce dt"
                )));
            }
        }
    }
    let state = validate_snapshot(rho, time)?;
    Ok(SteadyStateOutcome {
        residual,
        stationary: residual < tol,
        time,
        state,
    })
}

/// Quantum PageRank: real diagonal of the stationary state, clamped at zero
/// and renormalized. Errors if the clamped diagonal sum drifted from 1 by
/// more than 1e-8.
pub fn quantum_pagerank(rho_star: &DensityMatrix) -> Result<RankVector> {
    let clamped = rho_star.diagonal_real().mapv(|v| v.max(0.0));
    let sum = clamped.sum();
    let drift = (sum - 1.0).abs();
    if drift > 1e-8 {
        return Err(Error::InvalidState(format!(
            "clamped diagonal sums to {sum}; drift {drift:.3e} exceeds 1e-8"
        )));
    }
    RankVector::new(clamped.mapv(|v| v / sum))
}
