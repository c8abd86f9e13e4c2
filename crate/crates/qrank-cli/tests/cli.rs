//! Exit-code contract and file-format tests, driving the built binary.

use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

const FIXTURE: &str = "0 1\n1 2\n2 0\n3 0\n";

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("fixture.el"), FIXTURE).unwrap();
    dir
}

fn qrank(dir: &Path, args: &[&str]) -> (i32, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_qrank"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    (
        output.status.code().unwrap(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

fn scores(path: &Path) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("node"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn missing_graph_file_exits_2() {
    let dir = workspace();
    let (code, stderr) = qrank(dir.path(), &["rank-classical", "nope.el", "--out", "o"]);
    assert_eq!(code, 2, "stderr: {stderr}");
}

#[test]
fn malformed_graph_exits_2() {
    let dir = workspace();
    std::fs::write(dir.path().join("bad.el"), "0 1 junk\n").unwrap();
    let (code, stderr) = qrank(dir.path(), &["rank-classical", "bad.el", "--out", "o"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("line 1"), "stderr: {stderr}");
}

#[test]
fn classical_three_cycle_scores_are_uniform() {
    let dir = workspace();
    std::fs::write(dir.path().join("cycle.el"), "0 1\n1 2\n2 0\n").unwrap();
    let (code, _) = qrank(dir.path(), &["rank-classical", "cycle.el", "--out", "o"]);
    assert_eq!(code, 0);
    for s in scores(&dir.path().join("o/rank.csv")) {
        assert!((s - 1.0 / 3.0).abs() < 1e-10);
    }
    assert!(dir.path().join("o/trace.csv").exists());
}

#[test]
fn non_convergence_exits_3() {
    let dir = workspace();
    let (code, _) = qrank(
        dir.path(),
        &[
            "rank-classical",
            "fixture.el",
            "--tol",
            "1e-15",
            "--max-iter",
            "2",
            "--out",
            "o",
        ],
    );
    assert_eq!(code, 3);
    // Outputs are still written for inspection.
    assert!(dir.path().join("o/rank.csv").exists());
}

#[test]
fn solver_disagreement_exits_4() {
    let dir = workspace();
    // t_max = 1 leaves the integration far from stationary, so the two
    // solvers disagree beyond 1e-5.
    let (code, _) = qrank(
        dir.path(),
        &[
            "rank-quantum",
            "fixture.el",
            "--epsilon",
            "0.5",
            "--solver",
            "both",
            "--t-max",
            "1",
            "--out",
            "o",
        ],
    );
    assert_eq!(code, 4);
    let summary = std::fs::read_to_string(dir.path().join("o/summary.json")).unwrap();
    assert!(summary.contains("disagreement"));
}

#[test]
fn degenerate_kernel_exits_5() {
    let dir = workspace();
    let (code, stderr) = qrank(
        dir.path(),
        &[
            "rank-quantum",
            "fixture.el",
            "--epsilon",
            "0",
            "--solver",
            "kernel",
            "--out",
            "o",
        ],
    );
    assert_eq!(code, 5);
    assert!(stderr.contains("kernel dimension"), "stderr: {stderr}");
}

#[test]
fn size_cap_exits_6() {
    let dir = workspace();
    let big: String = (0..99).map(|i| format!("{i} {}\n", i + 1)).collect();
    std::fs::write(dir.path().join("big.el"), big).unwrap();
    let (code, _) = qrank(dir.path(), &["spectrum", "big.el", "--out", "o"]);
    assert_eq!(code, 6);
}

#[test]
fn size_cap_env_override_is_honored() {
    let dir = workspace();
    let output = Command::new(env!("CARGO_BIN_EXE_qrank"))
        .current_dir(dir.path())
        .env("QRANK_SIZE_CAP", "3")
        .args(["spectrum", "fixture.el", "--out", "o"])
        .output()
        .unwrap();
    assert_eq!(output.status.code().unwrap(), 6);
}

#[test]
fn boundary_contamination_exits_7() {
    let dir = workspace();
    let (code, _) = qrank(
        dir.path(),
        &[
            "lattice",
            "spread",
            "--sites",
            "5",
            "--times",
            "2,4,6,8",
            "--site0",
            "2",
            "--out",
            "o",
        ],
    );
    assert_eq!(code, 7);
}

#[test]
fn epsilon_sweep_writes_manifest_and_subdirectories() {
    let dir = workspace();
    let (code, _) = qrank(
        dir.path(),
        &[
            "rank-quantum",
            "fixture.el",
            "--epsilon",
            "0.1",
            "--epsilon",
            "0.5",
            "--epsilon",
            "0.9",
            "--out",
            "o",
        ],
    );
    assert_eq!(code, 0);
    for eps in ["0.1", "0.5", "0.9"] {
        assert!(dir.path().join(format!("o/eps-{eps}/rank.csv")).exists());
        assert!(dir.path().join(format!("o/eps-{eps}/summary.json")).exists());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/sweep.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["entries"].as_array().unwrap().len(), 3);
}

#[test]
fn spectrum_reports_left_half_plane() {
    let dir = workspace();
    std::fs::write(dir.path().join("cycle.el"), "0 1\n1 2\n2 0\n").unwrap();
    let (code, _) = qrank(
        dir.path(),
        &["spectrum", "cycle.el", "--epsilon", "1.0", "--out", "o"],
    );
    assert_eq!(code, 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/spectrum.json")).unwrap())
            .unwrap();
    assert!(report["max_real_part"].as_f64().unwrap() <= 1e-10);
    assert!(report["spectral_gap"].as_f64().unwrap() > 0.0);
    assert_eq!(report["kernel_dimension"].as_u64().unwrap(), 1);
    assert!(dir.path().join("o/eigenvalues.csv").exists());
}

#[test]
fn coupler_distribution_splits_evenly() {
    let dir = workspace();
    let (code, _) = qrank(
        dir.path(),
        &[
            "lattice",
            "dist",
            "--sites",
            "2",
            "--z",
            "0.7853981633974483",
            "--out",
            "o",
        ],
    );
    assert_eq!(code, 0);
    let body = std::fs::read_to_string(dir.path().join("o/distribution.csv")).unwrap();
    let probs: Vec<f64> = body
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("site"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(probs.len(), 2);
    for p in probs {
        assert!((p - 0.5).abs() < 1e-12);
    }
}

#[test]
fn config_file_is_used_and_flags_win() {
    let dir = workspace();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# settings\nalpha = 0.5\ntol = 1e-13\n",
    )
    .unwrap();
    // Config alone: alpha 0.5 shows up in the header.
    let (code, _) = qrank(
        dir.path(),
        &[
            "rank-classical",
            "fixture.el",
            "--config",
            "run.cfg",
            "--out",
            "a",
        ],
    );
    assert_eq!(code, 0);
    let header = std::fs::read_to_string(dir.path().join("a/rank.csv")).unwrap();
    assert!(header.contains("alpha = 5.0000000000000000e-1"), "{header}");
    // Flag overrides config.
    let (code, _) = qrank(
        dir.path(),
        &[
            "rank-classical",
            "fixture.el",
            "--config",
            "run.cfg",
            "--alpha",
            "0.85",
            "--out",
            "b",
        ],
    );
    assert_eq!(code, 0);
    let header = std::fs::read_to_string(dir.path().join("b/rank.csv")).unwrap();
    assert!(header.contains("alpha = 8.4999999999999998e-1"), "{header}");
}

#[test]
fn malformed_config_file_exits_2() {
    let dir = workspace();
    std::fs::write(dir.path().join("bad.cfg"), "alpha 0.5\n").unwrap();
    let (code, stderr) = qrank(
        dir.path(),
        &["rank-classical", "fixture.el", "--config", "bad.cfg", "--out", "o"],
    );
    assert_eq!(code, 2);
    assert!(stderr.contains("key = value"), "stderr: {stderr}");
}

#[test]
fn custom_hamiltonian_file_is_accepted_and_validated() {
    let dir = workspace();
    // sigma_x-like couplings on 4 nodes: Hermitian, so the run succeeds.
    let mut entries = vec![[0.0, 0.0]; 16];
    entries[1] = [0.0, 1.0];
    entries[4] = [0.0, -1.0];
    std::fs::write(
        dir.path().join("h.json"),
        serde_json::json!({ "dim": 4, "entries": entries }).to_string(),
    )
    .unwrap();
    let (code, stderr) = qrank(
        dir.path(),
        &[
            "rank-quantum",
            "fixture.el",
            "--epsilon",
            "0.5",
            "--hamiltonian",
            "custom:h.json",
            "--out",
            "o",
        ],
    );
    assert_eq!(code, 0, "stderr: {stderr}");
    let header = std::fs::read_to_string(dir.path().join("o/rank.csv")).unwrap();
    assert!(header.contains("hamiltonian = custom:h.json"));

    // A non-Hermitian matrix must be rejected with a validation error.
    entries[4] = [0.0, 1.0];
    std::fs::write(
        dir.path().join("bad_h.json"),
        serde_json::json!({ "dim": 4, "entries": entries }).to_string(),
    )
    .unwrap();
    let (code, stderr) = qrank(
        dir.path(),
        &[
            "rank-quantum",
            "fixture.el",
            "--hamiltonian",
            "custom:bad_h.json",
            "--out",
            "o2",
        ],
    );
    assert_eq!(code, 2);
    assert!(stderr.contains("Hermiticity"), "stderr: {stderr}");

    // An unknown source name is a flag error.
    let (code, _) = qrank(
        dir.path(),
        &[
            "rank-quantum",
            "fixture.el",
            "--hamiltonian",
            "bananas",
            "--out",
            "o3",
        ],
    );
    assert_eq!(code, 2);
}

#[test]
fn fixtures_are_seed_deterministic_and_parseable() {
    let dir = workspace();
    let (code, _) = qrank(
        dir.path(),
        &[
            "fixtures", "generate", "--nodes", "6", "--edges", "9", "--seed", "42", "--out", "fa",
        ],
    );
    assert_eq!(code, 0);
    let (code, _) = qrank(
        dir.path(),
        &[
            "fixtures", "generate", "--nodes", "6", "--edges", "9", "--seed", "42", "--out", "fb",
        ],
    );
    assert_eq!(code, 0);
    let a = std::fs::read(dir.path().join("fa/fixture.el")).unwrap();
    let b = std::fs::read(dir.path().join("fb/fixture.el")).unwrap();
    assert_eq!(a, b);

    let (code, _) = qrank(
        dir.path(),
        &["rank-classical", "fa/fixture.el", "--out", "o"],
    );
    assert_eq!(code, 0);
}

#[test]
fn json_format_embeds_config() {
    let dir = workspace();
    let (code, _) = qrank(
        dir.path(),
        &[
            "rank-quantum",
            "fixture.el",
            "--epsilon",
            "1.0",
            "--format",
            "json",
            "--out",
            "o",
        ],
    );
    assert_eq!(code, 0);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/rank.json")).unwrap())
            .unwrap();
    assert_eq!(doc["config"]["command"], "rank-quantum");
    assert_eq!(doc["ranks"].as_array().unwrap().len(), 4);
}

#[test]
fn quantum_integrate_solver_works_beyond_the_cap_path() {
    let dir = workspace();
    // A 10-node graph with the cap forced below it: kernel must fail with 6,
    // integrate must succeed.
    let big: String = (0..9).map(|i| format!("{i} {}\n", i + 1)).collect();
    std::fs::write(dir.path().join("ten.el"), big).unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_qrank"))
        .current_dir(dir.path())
        .env("QRANK_SIZE_CAP", "4")
        .args([
            "rank-quantum",
            "ten.el",
            "--epsilon",
            "1.0",
            "--solver",
            "kernel",
            "--out",
            "k",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code().unwrap(), 6);

    let output = Command::new(env!("CARGO_BIN_EXE_qrank"))
        .current_dir(dir.path())
        .env("QRANK_SIZE_CAP", "4")
        .args([
            "rank-quantum",
            "ten.el",
            "--epsilon",
            "1.0",
            "--solver",
            "integrate",
            "--out",
            "i",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code().unwrap(), 0);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("i/summary.json")).unwrap())
            .unwrap();
    assert!(summary["summary"]["kernel_dimension"].is_null());
    assert_eq!(summary["summary"]["stationary"], true);
}
