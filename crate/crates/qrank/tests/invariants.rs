//! Cross-module invariants: the classical-reduction oracle, positivity and
//! isospectrality along integration, epsilon continuity, and property tests
//! over randomly generated graphs and generators.

use approx::assert_abs_diff_eq;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qrank::classical::{self, RankVector};
use qrank::graph::{GoogleMatrix, StochasticMatrix, WebGraph};
use qrank::quantum::{
    build_liouvillian, initial_state, integrate, max_abs, quantum_pagerank,
    steady_state_by_integration, DensityMatrix, HamiltonianSource, Liouvillian,
};
use qrank::spectral::steady_state_by_kernel;

fn fixture_google(alpha: f64) -> GoogleMatrix {
    let g = WebGraph::new(4, [(0, 1), (1, 2), (2, 0), (3, 0)]).unwrap();
    GoogleMatrix::from_graph(&g, alpha).unwrap()
}

fn random_hermitian_state(n: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    let mut m = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[[i, j]] = v;
            m[[j, i]] = v.conj();
        }
    }
    let trace: Complex64 = m.diag().sum();
    let shift = (Complex64::ONE - trace) / n as f64;
    for i in 0..n {
        m[[i, i]] += shift;
    }
    m
}

/// The decisive correctness oracle: at eps = 1 with a diagonal initial
/// state, the diagonal of the quantum evolution reproduces the classical
/// continuous-time walk at every sampled time.
#[test]
fn classical_reduction_along_the_whole_trajectory() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..3 {
        let n = rng.random_range(2..=8);
        let graph = WebGraph::random(n, rng.random_range(1..=n * n / 2 + 1), &mut rng).unwrap();
        let g = GoogleMatrix::from_graph(&graph, 0.85).unwrap();
        let l = build_liouvillian(&HamiltonianSource::SymmetrizedGoogle, &g, 1.0).unwrap();
        let rho0 = initial_state(n).unwrap();
        let snapshots = integrate(&l, &rho0, 20.0, 0.01, 200).unwrap();
        for (t, rho) in snapshots {
            let classical = classical::continuous_evolve(&g, &RankVector::uniform(n), t, 0.01)
                .unwrap()
                .final_vector;
            for (a, b) in rho.diagonal_real().iter().zip(classical.values()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-8);
            }
        }
    }
}

#[test]
fn integration_keeps_states_positive() {
    // Rates are Google-matrix entries, so they are bounded by 1.
    let g = fixture_google(0.85);
    for eps in [0.2, 0.5, 1.0] {
        let l = build_liouvillian(&HamiltonianSource::SymmetrizedGoogle, &g, eps).unwrap();
        let rho0 = DensityMatrix::basis_state(4, 0).unwrap();
        let snapshots = integrate(&l, &rho0, 10.0, 0.01, 50).unwrap();
        for (t, rho) in snapshots {
            let min_eig = rho.min_eigenvalue().unwrap();
            assert!(
                min_eig >= -1e-8,
                "min eigenvalue {min_eig:.3e} at t = {t} below -1e-8"
            );
        }
    }
}

#[test]
fn unitary_flow_is_isospectral() {
    let g = fixture_google(0.85);
    let l = build_liouvillian(&HamiltonianSource::SymmetrizedGoogle, &g, 0.0).unwrap();
    let mut raw = Array2::<Complex64>::zeros((4, 4));
    // A pure superposition state |psi><psi| with psi uniform.
    for i in 0..4 {
        for j in 0..4 {
            raw[[i, j]] = Complex64::new(0.25, 0.0);
        }
    }
    let rho0 = DensityMatrix::new(raw).unwrap();
    let reference = rho0.eigenvalues().unwrap();
    let snapshots = integrate(&l, &rho0, 50.0, 0.005, 2000).unwrap();
    assert!(snapshots.last().unwrap().0 == 50.0);
    for (t, rho) in snapshots {
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-9);
        let eigs = rho.eigenvalues().unwrap();
        for (a, b) in eigs.iter().zip(&reference) {
            assert!(
                (a - b).abs() < 1e-8,
                "eigenvalue drifted from {b} to {a} at t = {t}"
            );
        }
    }
}

#[test]
fn quantum_rank_is_continuous_in_epsilon() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let graph = WebGraph::random(8, 20, &mut rng).unwrap();
    for g in [fixture_google(0.85), GoogleMatrix::from_graph(&graph, 0.85).unwrap()] {
        for eps in [0.2, 0.5, 0.8] {
            let rank_at = |eps: f64| {
                let l =
                    build_liouvillian(&HamiltonianSource::SymmetrizedGoogle, &g, eps).unwrap();
                quantum_pagerank(&steady_state_by_kernel(&l).unwrap()).unwrap()
            };
            let a = rank_at(eps);
            let b = rank_at(eps + 1e-3);
            let l1: f64 = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| (x - y).abs())
                .sum();
            assert!(l1 < 1e-1, "L1 jump {l1} at eps = {eps}");
        }
    }
}

#[test]
fn kernel_and_integration_agree_on_random_generators() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..5 {
        let n = rng.random_range(2..=6);
        let graph = WebGraph::random(n, rng.random_range(1..=n * n / 2 + 1), &mut rng).unwrap();
        let g = GoogleMatrix::from_graph(&graph, 0.85).unwrap();
        let eps = rng.random_range(0.3..=1.0);
        let l = build_liouvillian(&HamiltonianSource::SymmetrizedGoogle, &g, eps).unwrap();
        let by_kernel = steady_state_by_kernel(&l).unwrap();
        let by_time =
            steady_state_by_integration(&l, &initial_state(n).unwrap(), 1e-11, 3000.0, 0.05)
                .unwrap();
        assert!(by_time.stationary, "integration missed tolerance");
        assert!(
            max_abs(&(by_kernel.entries() - by_time.state.entries())) < 1e-6,
            "solvers disagree beyond 1e-6"
        );
    }
}

fn arb_graph(max_nodes: usize) -> impl Strategy<Value = WebGraph> {
    (1usize..=max_nodes).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..=(n * n).min(48))
            .prop_map(move |edges| WebGraph::new(n, edges).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn patched_matrix_is_column_stochastic(graph in arb_graph(16)) {
        let e = StochasticMatrix::patch_dangling(&graph.hyperlink_matrix()).unwrap();
        for j in 0..e.dim() {
            let sum: f64 = e.entries().column(j).sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn google_matrix_preserves_column_sums_and_positivity(
        graph in arb_graph(16),
        alpha in 0.0f64..=1.0,
    ) {
        let g = GoogleMatrix::from_graph(&graph, alpha).unwrap();
        let n = g.dim();
        for j in 0..n {
            let sum: f64 = g.entries().column(j).sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
        let floor = (1.0 - alpha) / n as f64 - 1e-15;
        prop_assert!(g.entries().iter().all(|&v| v >= floor));
    }

    #[test]
    fn edge_list_roundtrips(graph in arb_graph(16)) {
        let text = graph.to_edge_list();
        prop_assert_eq!(WebGraph::parse_edge_list(&text).unwrap(), graph);
    }

    #[test]
    fn generator_conserves_trace_and_hermiticity(
        graph in arb_graph(10),
        alpha in 0.3f64..0.99,
        eps in 0.0f64..=1.0,
        seed in 0u64..1000,
    ) {
        let n = graph.node_count();
        let g = GoogleMatrix::from_graph(&graph, alpha).unwrap();
        let l: Liouvillian =
            build_liouvillian(&HamiltonianSource::SymmetrizedGoogle, &g, eps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_hermitian_state(n, &mut rng);
        let out = l.apply(&rho).unwrap();
        let trace: Complex64 = out.diag().sum();
        prop_assert!(trace.norm() < 1e-12);
        let herm_defect = {
            let adj = out.t().mapv(|v| v.conj());
            max_abs(&(&out - &adj))
        };
        prop_assert!(herm_defect < 1e-12);
    }

    #[test]
    fn power_iterates_stay_on_the_simplex(
        graph in arb_graph(12),
        alpha in 0.0f64..=1.0,
    ) {
        let g = GoogleMatrix::from_graph(&graph, alpha).unwrap();
        let n = g.dim();
        let mut p: Array1<f64> = Array1::zeros(n);
        p[0] = 1.0;
        for _ in 0..30 {
            p = g.entries().dot(&p);
            prop_assert!(RankVector::new(p.clone()).is_ok());
            prop_assert!((p.sum() - 1.0).abs() < 1e-12);
        }
    }
}
