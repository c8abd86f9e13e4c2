//! Superoperator spectral analysis: vectorize the Liouvillian into an
//! N^2 x N^2 matrix, read steady states off its kernel, and exponentiate
//! matrices by Pade approximation with scaling and squaring.
//!
//! Vectorization uses the column-stacking convention throughout:
//! `vec(rho)[j*N + i] = rho[i, j]`, so `vec(A rho B) = (B^T (x) A) vec(rho)`.
//! A convention mix-up silently transposes the Hamiltonian, which is why one
//! test pins the convention with a complex (non-symmetric) Hermitian H.

use ndarray::{Array1, Array2, ArrayView1};
use ndarray_linalg::{Eig, Inverse};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::{conj_transpose, max_abs, DensityMatrix, Liouvillian};

/// Largest node count for which the dense N^2 x N^2 superoperator is built.
pub const DEFAULT_SIZE_CAP: usize = 64;

/// Eigenvalues with modulus below this count as kernel members.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-9;

/// Bound on `max |vec(I)' M|`, the trace-preservation defect.
pub const TRACE_PRESERVATION_TOL: f64 = 1e-10;

/// A kernel steady state must satisfy `max |L rho|` below this bound.
pub const KERNEL_RESIDUAL_TOL: f64 = 1e-8;

/// Column-stacks a matrix: `out[j*n + i] = m[i, j]`.
pub fn vec_matrix(m: &Array2<Complex64>) -> Array1<Complex64> {
    let n = m.nrows();
    Array1::from_shape_fn(n * n, |k| m[[k % n, k / n]])
}

/// Inverse of [`vec_matrix`].
pub fn unvec_matrix(v: &ArrayView1<Complex64>, n: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((n, n), |(i, j)| v[j * n + i])
}

/// The generator as a dense matrix acting on column-stacked states.
#[derive(Debug, Clone)]
pub struct SuperoperatorMatrix {
    matrix: Array2<Complex64>,
    source_dim: usize,
}

impl SuperoperatorMatrix {
    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// N, the node count of the underlying walk.
    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    /// N^2, the dimension this matrix acts on.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |vec(I)' M|`; zero for a trace-preserving generator.
    pub fn trace_preservation_defect(&self) -> f64 {
        let n = self.source_dim;
        let mut worst = 0.0f64;
        for col in 0..self.dim() {
            let mut acc = Complex64::ZERO;
            for i in 0..n {
                acc += self.matrix[[i * n + i, col]];
            }
            worst = worst.max(acc.norm());
        }
        worst
    }

    /// `unvec(exp(M t) vec(rho))`: the state propagated for time `t`.
    pub fn propagate(&self, rho: &Array2<Complex64>, t: f64) -> Result<Array2<Complex64>> {
        let n = self.source_dim;
        if rho.dim() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: rho.nrows(),
            });
        }
        let propagator = matrix_exponential(&self.matrix, t)?;
        let v = propagator.dot(&vec_matrix(rho));
        Ok(unvec_matrix(&v.view(), n))
    }

    #[cfg(test)]
    pub(crate) fn from_raw(matrix: Array2<Complex64>, source_dim: usize) -> Self {
        Self { matrix, source_dim }
    }
}

/// Builds the superoperator with the default size cap.
pub fn vectorize(l: &Liouvillian) -> Result<SuperoperatorMatrix> {
    vectorize_with_cap(l, DEFAULT_SIZE_CAP)
}

/// Builds the dense column-stacked superoperator
///
/// ```text
/// M = -i (1 - eps) (I (x) H  -  H^T (x) I)
///     + eps [ jump transfers - 1/2 I (x) diag(s) - 1/2 diag(s) (x) I ]
/// ```
///
/// where the jump part moves weight from `vec` slot `(j, j)` to `(i, i)` at
/// rate `gamma_ij` and `s` holds the column sums of `gamma`. Nonzero blocks
/// are written directly; no N^2 x N^2 Kronecker temporaries are formed.
pub fn vectorize_with_cap(l: &Liouvillian, cap: usize) -> Result<SuperoperatorMatrix> {
    let n = l.dim();
    if n > cap {
        return Err(Error::SizeCapExceeded { dim: n, cap });
    }
    let nn = n * n;
    let mut m = Array2::<Complex64>::zeros((nn, nn));
    let eps = l.epsilon();

    if eps < 1.0 {
        let h = l.hamiltonian();
        let scale = Complex64::new(0.0, -(1.0 - eps));
        // I (x) H: row (j*n + i), column (j*n + k) carries H[i, k].
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    m[[j * n + i, j * n + k]] += scale * h[[i, k]];
                }
            }
        }
        // H^T (x) I: row (j*n + i), column (l*n + i) carries H[l, j].
        for i in 0..n {
            for j in 0..n {
                for lcol in 0..n {
                    m[[j * n + i, lcol * n + i]] -= scale * h[[lcol, j]];
                }
            }
        }
    }
    if eps > 0.0 {
        let rates = l.rates();
        let sums = l.rate_col_sums();
        for i in 0..n {
            for j in 0..n {
                m[[i * n + i, j * n + j]] += Complex64::new(eps * rates[[i, j]], 0.0);
            }
        }
        for i in 0..n {
            for j in 0..n {
                m[[j * n + i, j * n + i]] -=
                    Complex64::new(eps * 0.5 * (sums[i] + sums[j]), 0.0);
            }
        }
    }

    let superop = SuperoperatorMatrix {
        matrix: m,
        source_dim: n,
    };
    let defect = superop.trace_preservation_defect();
    if defect > TRACE_PRESERVATION_TOL {
        return Err(Error::Structural(format!(
            "vec(I)' is not a left null vector: defect {defect:.3e}"
        )));
    }
    Ok(superop)
}

/// Spectral diagnostics of a vectorized generator.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    pub max_real_part: f64,
    /// Number of eigenvalues inside the zero threshold, i.e. the dimension
    /// of the stationary subspace.
    pub kernel_dimension: usize,
    /// Negated largest real part over the nonzero spectrum; `None` when the
    /// whole spectrum sits in the kernel.
    pub spectral_gap: Option<f64>,
    /// Kernel vectors that validate as density matrices after Hermitization
    /// and trace normalization.
    pub steady_states: Vec<DensityMatrix>,
}

/// Dense eigendecomposition of the superoperator with the default zero
/// threshold.
pub fn spectrum(m: &SuperoperatorMatrix) -> Result<SpectrumReport> {
    spectrum_with_tol(m, ZERO_EIGENVALUE_TOL)
}

pub fn spectrum_with_tol(m: &SuperoperatorMatrix, zero_tol: f64) -> Result<SpectrumReport> {
    let n = m.source_dim();
    let (eigenvalues, eigenvectors) = m.matrix().eig()?;

    let mut kernel_dimension = 0;
    let mut steady_states = Vec::new();
    let mut max_real_part = f64::NEG_INFINITY;
    let mut gap_candidate = f64::NEG_INFINITY;
    for (k, lambda) in eigenvalues.iter().enumerate() {
        max_real_part = max_real_part.max(lambda.re);
        if lambda.norm() < zero_tol {
            kernel_dimension += 1;
            let raw = unvec_matrix(&eigenvectors.column(k), n);
            if let Some(state) = normalize_kernel_state(&raw) {
                steady_states.push(state);
            }
        } else {
            gap_candidate = gap_candidate.max(lambda.re);
        }
    }
    if kernel_dimension == 0 {
        return Err(Error::Structural(format!(
            "no eigenvalue within {zero_tol:.0e} of zero; a Lindblad generator always has a steady state"
        )));
    }
    Ok(SpectrumReport {
        eigenvalues: eigenvalues.to_vec(),
        max_real_part,
        kernel_dimension,
        spectral_gap: (gap_candidate > f64::NEG_INFINITY).then_some(-gap_candidate),
        steady_states,
    })
}

/// Hermitizes and trace-normalizes a raw kernel vector; `None` when it is
/// traceless or fails density-matrix validation (possible in degenerate
/// kernels, e.g. coherence-only stationary directions at eps = 0).
fn normalize_kernel_state(raw: &Array2<Complex64>) -> Option<DensityMatrix> {
    let herm = (raw + &conj_transpose(raw)).mapv(|v| 0.5 * v);
    let trace: Complex64 = herm.diag().sum();
    if trace.norm() < 1e-8 * max_abs(&herm).max(f64::MIN_POSITIVE) {
        return None;
    }
    let normalized = herm.mapv(|v| v / trace);
    DensityMatrix::new(normalized).ok()
}

/// The unique steady state, from the superoperator kernel. Errors when the
/// kernel dimension differs from 1, attaching every kernel state that
/// validates (integration from `I/N` can still pick one of them).
pub fn steady_state_by_kernel(l: &Liouvillian) -> Result<DensityMatrix> {
    steady_state_by_kernel_with_cap(l, DEFAULT_SIZE_CAP)
}

pub fn steady_state_by_kernel_with_cap(l: &Liouvillian, cap: usize) -> Result<DensityMatrix> {
    let report = spectrum(&vectorize_with_cap(l, cap)?)?;
    steady_state_from_report(l, &report)
}

/// Extracts the unique steady state out of an already-computed spectrum,
/// checking its generator residual.
pub fn steady_state_from_report(l: &Liouvillian, report: &SpectrumReport) -> Result<DensityMatrix> {
    if report.kernel_dimension != 1 {
        return Err(Error::NonUniqueSteadyState {
            kernel_dim: report.kernel_dimension,
            states: report.steady_states.clone(),
        });
    }
    let state = report.steady_states.first().cloned().ok_or_else(|| {
        Error::Structural("unique kernel vector did not normalize to a density matrix".into())
    })?;
    let residual = l.residual(&state)?;
    if residual > KERNEL_RESIDUAL_TOL {
        return Err(Error::NumericalInstability(format!(
            "kernel state residual {residual:.3e} exceeds {KERNEL_RESIDUAL_TOL:.0e}"
        )));
    }
    Ok(state)
}

// Pade approximant orders and the 1-norm thresholds above which the next
// order (or scaling) is needed, after Higham, "The Scaling and Squaring
// Method for the Matrix Exponential Revisited".
const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.53939833006323e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(m: &Array2<Complex64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.norm()).sum())
        .fold(0.0, f64::max)
}

/// Evaluates the order-m Pade numerator/denominator pair given the even
/// powers of `a`: `U = a * sum b[2k+1] a^(2k)`, `V = sum b[2k] a^(2k)`.
fn pade_uv(a: &Array2<Complex64>, powers: &[Array2<Complex64>], b: &[f64]) -> (Array2<Complex64>, Array2<Complex64>) {
    let n = a.nrows();
    let mut odd = Array2::<Complex64>::zeros((n, n));
    let mut even = Array2::<Complex64>::zeros((n, n));
    for (k, pow) in powers.iter().enumerate() {
        odd = odd + pow.mapv(|v| v * b[2 * k + 1]);
        even = even + pow.mapv(|v| v * b[2 * k]);
    }
    (a.dot(&odd), even)
}

fn pade_13_uv(
    a: &Array2<Complex64>,
    a2: &Array2<Complex64>,
    a4: &Array2<Complex64>,
    a6: &Array2<Complex64>,
) -> (Array2<Complex64>, Array2<Complex64>) {
    let b = &PADE_13;
    let n = a.nrows();
    let eye = Array2::<Complex64>::eye(n);
    let u_high = a6.dot(&(a6.mapv(|v| v * b[13]) + a4.mapv(|v| v * b[11]) + a2.mapv(|v| v * b[9])));
    let u_low = a6.mapv(|v| v * b[7])
        + a4.mapv(|v| v * b[5])
        + a2.mapv(|v| v * b[3])
        + eye.mapv(|v| v * b[1]);
    let u = a.dot(&(u_high + u_low));
    let v_high = a6.dot(&(a6.mapv(|v| v * b[12]) + a4.mapv(|v| v * b[10]) + a2.mapv(|v| v * b[8])));
    let v = v_high
        + a6.mapv(|v| v * b[6])
        + a4.mapv(|v| v * b[4])
        + a2.mapv(|v| v * b[2])
        + eye.mapv(|v| v * b[0]);
    (u, v)
}

/// `exp(m t)` by Pade approximation with scaling and squaring.
pub fn matrix_exponential(m: &Array2<Complex64>, t: f64) -> Result<Array2<Complex64>> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::Validation(format!(
            "matrix exponential needs a square matrix, got {rows}x{cols}"
        )));
    }
    if !t.is_finite() || m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("non-finite input to matrix exponential".into()));
    }
    let n = rows;
    let a = m.mapv(|v| v * t);
    let eye = Array2::<Complex64>::eye(n);
    let norm = one_norm(&a);

    let (u, v, squarings) = if norm <= THETA_3 {
        let a2 = a.dot(&a);
        let (u, v) = pade_uv(&a, &[eye.clone(), a2], &PADE_3);
        (u, v, 0)
    } else if norm <= THETA_5 {
        let a2 = a.dot(&a);
        let a4 = a2.dot(&a2);
        let (u, v) = pade_uv(&a, &[eye.clone(), a2, a4], &PADE_5);
        (u, v, 0)
    } else if norm <= THETA_7 {
        let a2 = a.dot(&a);
        let a4 = a2.dot(&a2);
        let a6 = a4.dot(&a2);
        let (u, v) = pade_uv(&a, &[eye.clone(), a2, a4, a6], &PADE_7);
        (u, v, 0)
    } else if norm <= THETA_9 {
        let a2 = a.dot(&a);
        let a4 = a2.dot(&a2);
        let a6 = a4.dot(&a2);
        let a8 = a6.dot(&a2);
        let (u, v) = pade_uv(&a, &[eye.clone(), a2, a4, a6, a8], &PADE_9);
        (u, v, 0)
    } else {
        let squarings = ((norm / THETA_13).log2().ceil() as i32).max(0);
        let scaled = a.mapv(|v| v / 2f64.powi(squarings));
        let a2 = scaled.dot(&scaled);
        let a4 = a2.dot(&a2);
        let a6 = a4.dot(&a2);
        let (u, v) = pade_13_uv(&scaled, &a2, &a4, &a6);
        (u, v, squarings)
    };

    let numerator = &v + &u;
    let denominator = &v - &u;
    let mut result = denominator.inv()?.dot(&numerator);
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    if result.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalInstability(
            "overflow in matrix exponential".into(),
        ));
    }
    Ok(result)
}
