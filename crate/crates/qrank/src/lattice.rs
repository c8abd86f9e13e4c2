//! Photonic waveguide lattice: tight-binding Hamiltonians, unitary
//! propagation over length z (z and t interchangeable), photon counting
//! statistics, and the ballistic-vs-diffusive spread diagnostic.
//!
//! The bosonic mode operators reduce to the N x N single-particle coupling
//! matrix for one- and two-photon inputs; no Fock-space machinery is built.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::classical::RankVector;
use crate::error::{Error, Result};
use crate::quantum::{self, conj_transpose, max_abs, DensityMatrix, Liouvillian};

pub const UNITARITY_TOL: f64 = 1e-10;

/// A spread measurement is contaminated once an edge site holds more than
/// this much probability at the largest requested time.
pub const EDGE_OCCUPATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

/// Nearest-neighbor waveguide array: propagation constants `beta_j` on the
/// diagonal and couplings `C_{j,j+1}` off it (plus the wrap-around coupling
/// when periodic). The realized matrix is real symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeHamiltonian {
    beta: Array1<f64>,
    coupling: Array1<f64>,
    boundary: Boundary,
}

impl LatticeHamiltonian {
    pub fn new(beta: Array1<f64>, coupling: Array1<f64>, boundary: Boundary) -> Result<Self> {
        let n = beta.len();
        if n == 0 {
            return Err(Error::Validation("lattice must have at least one site".into()));
        }
        let expected = match boundary {
            Boundary::Open => n - 1,
            Boundary::Periodic => {
                if n < 3 {
                    return Err(Error::Validation(
                        "periodic boundary needs at least 3 sites".into(),
                    ));
                }
                n
            }
        };
        if coupling.len() != expected {
            return Err(Error::Validation(format!(
                "expected {expected} couplings for {n} sites, got {}",
                coupling.len()
            )));
        }
        Ok(Self {
            beta,
            coupling,
            boundary,
        })
    }

    /// Uniform open line with `beta = 0` and `C = 1` (units absorbed into z).
    pub fn uniform_line(n: usize) -> Result<Self> {
        Self::new(
            Array1::zeros(n),
            Array1::from_elem(n.saturating_sub(1), 1.0),
            Boundary::Open,
        )
    }

    pub fn site_count(&self) -> usize {
        self.beta.len()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// The realized mode-coupling matrix; exactly symmetric since both
    /// triangles are written from the same coupling value.
    pub fn matrix(&self) -> Array2<f64> {
        let n = self.site_count();
        let mut m = Array2::zeros((n, n));
        for (j, &b) in self.beta.indexed_iter() {
            m[[j, j]] = b;
        }
        for j in 0..n.saturating_sub(1) {
            m[[j, j + 1]] = self.coupling[j];
            m[[j + 1, j]] = self.coupling[j];
        }
        if self.boundary == Boundary::Periodic {
            m[[0, n - 1]] = self.coupling[n - 1];
            m[[n - 1, 0]] = self.coupling[n - 1];
        }
        m
    }

    pub fn matrix_complex(&self) -> Array2<Complex64> {
        self.matrix().mapv(|v| Complex64::new(v, 0.0))
    }
}

/// The unitary `U = exp(-i H z)` mapping input mode amplitudes to output
/// amplitudes after propagation length z.
#[derive(Debug, Clone)]
pub struct Propagator {
    matrix: Array2<Complex64>,
    z: f64,
}

impl Propagator {
    /// Builds the propagator by eigendecomposition of the symmetric lattice
    /// matrix: `U = V exp(-i diag(w) z) V^T`.
    pub fn new(h: &LatticeHamiltonian, z: f64) -> Result<Self> {
        if !z.is_finite() {
            return Err(Error::Validation(format!("z = {z} must be finite")));
        }
        let (w, v) = h.matrix().eigh(UPLO::Lower)?;
        let vc = v.mapv(|x| Complex64::new(x, 0.0));
        let mut scaled = vc.clone();
        for (k, mut col) in scaled.columns_mut().into_iter().enumerate() {
            let phase = Complex64::new(0.0, -w[k] * z).exp();
            col.mapv_inplace(|x| x * phase);
        }
        let matrix = scaled.dot(&vc.t());
        let propagator = Self { matrix, z };
        let defect = propagator.unitarity_defect();
        if defect > UNITARITY_TOL {
            return Err(Error::NumericalInstability(format!(
                "propagator unitarity defect {defect:.3e} exceeds {UNITARITY_TOL:.0e}"
            )));
        }
        Ok(propagator)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// `max |U'U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let gram = conj_transpose(&self.matrix).dot(&self.matrix);
        max_abs(&(&gram - &Array2::<Complex64>::eye(n)))
    }
}

/// Output probabilities for a single photon injected at `input_site`:
/// `p_q = |U_{q,input}|^2`. Unitarity guarantees normalization.
pub fn single_photon_distribution(u: &Propagator, input_site: usize) -> Result<RankVector> {
    let n = u.dim();
    if input_site >= n {
        return Err(Error::Validation(format!(
            "input site {input_site} outside [0, {n})"
        )));
    }
    let p = u.matrix().column(input_site).mapv(|v| v.norm_sqr());
    RankVector::new(p)
}

/// Coincidence matrix for two indistinguishable photons injected at
/// `site_a` and `site_b`:
///
/// ```text
/// Gamma_{q,r} = |U_{q,a} U_{r,b} + U_{q,b} U_{r,a}|^2 / (1 + delta_ab)
/// ```
///
/// Supplied as the standard bosonic observable; weighting unordered pairs by
/// `(2 - delta_qr)/2` sums the matrix to 1.
pub fn two_photon_correlation(
    u: &Propagator,
    site_a: usize,
    site_b: usize,
) -> Result<Array2<f64>> {
    let n = u.dim();
    for site in [site_a, site_b] {
        if site >= n {
            return Err(Error::Validation(format!(
                "input site {site} outside [0, {n})"
            )));
        }
    }
    let m = u.matrix();
    let norm = if site_a == site_b { 2.0 } else { 1.0 };
    let mut gamma = Array2::zeros((n, n));
    for q in 0..n {
        for r in 0..n {
            let amp = m[[q, site_a]] * m[[r, site_b]] + m[[q, site_b]] * m[[r, site_a]];
            gamma[[q, r]] = amp.norm_sqr() / norm;
        }
    }
    Ok(gamma)
}

/// What evolves during a spread measurement: the coherent single-photon walk
/// or a dissipative Lindblad walk over the same sites.
#[derive(Debug, Clone, Copy)]
pub enum SpreadGenerator<'a> {
    Unitary(&'a LatticeHamiltonian),
    Dissipative(&'a Liouvillian),
}

/// Variance table plus the fitted growth exponent of a spread measurement.
#[derive(Debug, Clone)]
pub struct SpreadFit {
    /// Least-squares slope of `log variance` against `log t`; 2 for
    /// ballistic spreading, 1 for diffusive.
    pub exponent: f64,
    pub variances: Vec<(f64, f64)>,
}

/// Evolves a walker released at `site0`, measures the position variance at
/// each requested time, and fits `log variance` vs `log t`. Errors when
/// probability reaches the lattice edge at the largest time. `dt` is the
/// integrator step for the dissipative branch.
pub fn spread_exponent(
    generator: &SpreadGenerator,
    site0: usize,
    times: &[f64],
    dt: f64,
) -> Result<SpreadFit> {
    if times.len() < 4 {
        return Err(Error::Validation(format!(
            "need at least 4 time points, got {}",
            times.len()
        )));
    }
    if let Some(&t) = times.iter().find(|&&t| !t.is_finite() || t <= 0.0) {
        return Err(Error::Validation(format!("time {t} must be positive")));
    }
    if dt <= 0.0 {
        return Err(Error::Validation(format!("dt = {dt} must be positive")));
    }
    let n = match generator {
        SpreadGenerator::Unitary(h) => h.site_count(),
        SpreadGenerator::Dissipative(l) => l.dim(),
    };
    if site0 >= n {
        return Err(Error::Validation(format!(
            "release site {site0} outside [0, {n})"
        )));
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let distributions: Vec<Array1<f64>> = match generator {
        SpreadGenerator::Unitary(h) => sorted
            .iter()
            .map(|&t| {
                let u = Propagator::new(h, t)?;
                Ok(single_photon_distribution(&u, site0)?.values().clone())
            })
            .collect::<Result<_>>()?,
        SpreadGenerator::Dissipative(l) => {
            let mut rho = DensityMatrix::basis_state(n, site0)?.entries().clone();
            let mut t_prev = 0.0;
            let mut out = Vec::with_capacity(sorted.len());
            for &t in &sorted {
                let span = t - t_prev;
                let full_steps = (span / dt).floor() as usize;
                for _ in 0..full_steps {
                    rho = quantum::rk4_step(l, &rho, dt);
                }
                let remainder = span - full_steps as f64 * dt;
                if remainder > dt * 1e-12 {
                    rho = quantum::rk4_step(l, &rho, remainder);
                }
                t_prev = t;
                out.push(rho.diag().mapv(|v| v.re.max(0.0)));
            }
            out
        }
    };

    let t_last = *sorted.last().unwrap();
    let p_last = distributions.last().unwrap();
    let edge = p_last[0].max(p_last[n - 1]);
    if edge > EDGE_OCCUPATION_TOL {
        return Err(Error::BoundaryContamination {
            edge_probability: edge,
            time: t_last,
        });
    }

    let mut variances = Vec::with_capacity(sorted.len());
    for (&t, p) in sorted.iter().zip(&distributions) {
        let mean: f64 = p.indexed_iter().map(|(q, &w)| q as f64 * w).sum();
        let var: f64 = p
            .indexed_iter()
            .map(|(q, &w)| (q as f64 - mean).powi(2) * w)
            .sum();
        if var <= 0.0 {
            return Err(Error::Validation(format!(
                "no spread measured at t = {t}; variance {var}"
            )));
        }
        variances.push((t, var));
    }

    let xs: Vec<f64> = variances.iter().map(|&(t, _)| t.ln()).collect();
    let ys: Vec<f64> = variances.iter().map(|&(_, v)| v.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let y_mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - x_mean) * (y - y_mean);
        den += (x - x_mean) * (x - x_mean);
    }
    if den == 0.0 {
        return Err(Error::Validation(
            "time points must not be all identical".into(),
        ));
    }
    Ok(SpreadFit {
        exponent: num / den,
        variances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GoogleMatrix, WebGraph};
    use crate::quantum::{build_liouvillian, HamiltonianSource};
    use crate::spectral;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn coupler() -> LatticeHamiltonian {
        LatticeHamiltonian::uniform_line(2).unwrap()
    }

    #[test]
    fn two_site_matrix() {
        assert_eq!(coupler().matrix(), array![[0.0, 1.0], [1.0, 0.0]]);
    }

    #[test]
    fn three_site_open_tridiagonal() {
        let h = LatticeHamiltonian::new(
            Array1::from_elem(3, 2.0),
            Array1::from_elem(2, 0.5),
            Boundary::Open,
        )
        .unwrap();
        assert_eq!(
            h.matrix(),
            array![[2.0, 0.5, 0.0], [0.5, 2.0, 0.5], [0.0, 0.5, 2.0]]
        );
    }

    #[test]
    fn three_site_periodic_adds_corners() {
        let h = LatticeHamiltonian::new(
            Array1::zeros(3),
            Array1::from_elem(3, 0.5),
            Boundary::Periodic,
        )
        .unwrap();
        let m = h.matrix();
        assert_eq!(m[[0, 2]], 0.5);
        assert_eq!(m[[2, 0]], 0.5);
    }

    #[test]
    fn realized_matrix_is_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 9;
        let beta: Array1<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let coupling: Array1<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = LatticeHamiltonian::new(beta, coupling, Boundary::Open)
            .unwrap()
            .matrix();
        assert_eq!(m, m.t().to_owned());
    }

    #[test]
    fn coupling_length_mismatch_is_rejected() {
        assert!(LatticeHamiltonian::new(Array1::zeros(3), Array1::zeros(3), Boundary::Open).is_err());
        assert!(
            LatticeHamiltonian::new(Array1::zeros(3), Array1::zeros(2), Boundary::Periodic)
                .is_err()
        );
    }

    #[test]
    fn zero_length_propagator_is_identity() {
        let u = Propagator::new(&coupler(), 0.0).unwrap();
        assert!(max_abs(&(u.matrix() - &Array2::<Complex64>::eye(2))) < 1e-14);
    }

    #[test]
    fn coupler_fully_crosses_over_at_half_pi() {
        let u = Propagator::new(&coupler(), FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(u.matrix()[[0, 1]].norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn forward_backward_propagation_is_identity() {
        let h = LatticeHamiltonian::new(
            array![0.3, -0.1, 0.7],
            array![1.2, 0.4],
            Boundary::Open,
        )
        .unwrap();
        let fwd = Propagator::new(&h, 1.7).unwrap();
        let bwd = Propagator::new(&h, -1.7).unwrap();
        let prod = fwd.matrix().dot(bwd.matrix());
        assert!(max_abs(&(&prod - &Array2::<Complex64>::eye(3))) < 1e-10);
    }

    #[test]
    fn propagator_matches_matrix_exponential() {
        let h = LatticeHamiltonian::new(array![0.2, -0.4, 0.9], array![0.8, 1.1], Boundary::Open)
            .unwrap();
        let z = 2.3;
        let u = Propagator::new(&h, z).unwrap();
        let generator = h.matrix_complex().mapv(|v| Complex64::new(0.0, -1.0) * v);
        let via_expm = spectral::matrix_exponential(&generator, z).unwrap();
        assert!(max_abs(&(u.matrix() - &via_expm)) < 1e-10);
    }

    #[test]
    fn random_propagators_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let n = rng.random_range(2..=12);
            let beta: Array1<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let coupling: Array1<f64> = (0..n - 1).map(|_| rng.random_range(-2.0..2.0)).collect();
            let h = LatticeHamiltonian::new(beta, coupling, Boundary::Open).unwrap();
            let u = Propagator::new(&h, rng.random_range(-5.0..5.0)).unwrap();
            assert!(u.unitarity_defect() < UNITARITY_TOL);
        }
    }

    #[test]
    fn zero_length_distribution_is_a_point_mass() {
        let u = Propagator::new(&LatticeHamiltonian::uniform_line(5).unwrap(), 0.0).unwrap();
        let p = single_photon_distribution(&u, 2).unwrap();
        assert_abs_diff_eq!(p.values()[2], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn coupler_splits_evenly_at_quarter_pi() {
        let u = Propagator::new(&coupler(), FRAC_PI_4).unwrap();
        let p = single_photon_distribution(&u, 0).unwrap();
        assert_abs_diff_eq!(p.values()[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.values()[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn distribution_rejects_out_of_range_site() {
        let u = Propagator::new(&coupler(), 0.4).unwrap();
        assert!(single_photon_distribution(&u, 2).is_err());
    }

    #[test]
    fn unevolved_pair_stays_put() {
        let u = Propagator::new(&LatticeHamiltonian::uniform_line(4).unwrap(), 0.0).unwrap();
        let gamma = two_photon_correlation(&u, 1, 3).unwrap();
        for ((q, r), &v) in gamma.indexed_iter() {
            let expected = if (q, r) == (1, 3) || (q, r) == (3, 1) { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v, expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn hong_ou_mandel_dip_at_quarter_pi() {
        let u = Propagator::new(&coupler(), FRAC_PI_4).unwrap();
        let gamma = two_photon_correlation(&u, 0, 1).unwrap();
        assert!(gamma[[0, 1]] < 1e-10);
        assert!(gamma[[1, 0]] < 1e-10);
        // The photons bunch: the diagonal carries all the weight.
        assert_abs_diff_eq!(gamma[[0, 0]] + gamma[[1, 1]], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn correlation_is_symmetric_and_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let n = rng.random_range(2..=8);
            let beta: Array1<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let coupling: Array1<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
            let h = LatticeHamiltonian::new(beta, coupling, Boundary::Open).unwrap();
            let u = Propagator::new(&h, rng.random_range(0.1..3.0)).unwrap();
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            let gamma = two_photon_correlation(&u, a, b).unwrap();
            for q in 0..n {
                for r in 0..n {
                    assert!(gamma[[q, r]] >= -1e-12);
                    assert_abs_diff_eq!(gamma[[q, r]], gamma[[r, q]], epsilon = 1e-12);
                }
            }
            // Unordered-pair accounting: diagonal terms weighted 1/2.
            let mut weighted = 0.0;
            for q in 0..n {
                for r in q..n {
                    weighted += gamma[[q, r]] * if q == r { 0.5 } else { 1.0 };
                }
            }
            assert_abs_diff_eq!(weighted, 1.0, epsilon = 1e-12);
        }
    }

    fn line_liouvillian(n: usize) -> Liouvillian {
        let graph = WebGraph::line(n).unwrap();
        let g = GoogleMatrix::from_graph(&graph, 1.0).unwrap();
        build_liouvillian(&HamiltonianSource::SymmetrizedGoogle, &g, 1.0).unwrap()
    }

    #[test]
    fn uniform_line_spreads_ballistically() {
        let h = LatticeHamiltonian::uniform_line(41).unwrap();
        let times: Vec<f64> = (2..=6).map(f64::from).collect();
        let fit = spread_exponent(&SpreadGenerator::Unitary(&h), 20, &times, 0.01).unwrap();
        assert!(
            (1.9..=2.1).contains(&fit.exponent),
            "unitary exponent {} outside [1.9, 2.1]",
            fit.exponent
        );
    }

    #[test]
    fn classical_walk_spreads_diffusively() {
        let l = line_liouvillian(41);
        let times: Vec<f64> = (2..=6).map(f64::from).collect();
        let fit = spread_exponent(&SpreadGenerator::Dissipative(&l), 20, &times, 0.01).unwrap();
        assert!(
            (0.9..=1.1).contains(&fit.exponent),
            "dissipative exponent {} outside [0.9, 1.1]",
            fit.exponent
        );
    }

    #[test]
    fn too_few_time_points_are_rejected() {
        let h = LatticeHamiltonian::uniform_line(11).unwrap();
        let err = spread_exponent(&SpreadGenerator::Unitary(&h), 5, &[3.0], 0.01).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn long_times_on_a_small_lattice_contaminate() {
        let h = LatticeHamiltonian::uniform_line(5).unwrap();
        let times = [2.0, 4.0, 6.0, 8.0];
        let err = spread_exponent(&SpreadGenerator::Unitary(&h), 2, &times, 0.01).unwrap_err();
        assert!(matches!(err, Error::BoundaryContamination { .. }));
    }
}
