//! Machine-readable output: CSV and JSON renderings of ranks, convergence
//! traces, density-matrix snapshots, spectra, and lattice observables.
//!
//! CSV floats are printed with 17 significant digits and every file starts
//! with `#`-prefixed header lines carrying the effective configuration, so
//! identical runs produce identical bytes.

use std::fmt::Write as _;

use ndarray::{Array2, ArrayView2};
use serde_json::{json, Value};

use crate::classical::{ConvergenceTrace, RankEntry, RankVector};
use crate::lattice::SpreadFit;
use crate::quantum::DensityMatrix;
use crate::spectral::SpectrumReport;

/// Snapshot entries at or below this magnitude are not written.
pub const SNAPSHOT_MAGNITUDE_FLOOR: f64 = 1e-14;

/// 17 significant digits; enough to reproduce any f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn header_block(header: &[String]) -> String {
    let mut out = String::new();
    for line in header {
        let _ = writeln!(out, "# {line}");
    }
    out
}

pub fn rank_csv(entries: &[RankEntry], header: &[String]) -> String {
    let mut out = header_block(header);
    out.push_str("node,score,rank\n");
    for e in entries {
        let _ = writeln!(out, "{},{},{}", e.node, fmt_float(e.score), e.rank);
    }
    out
}

pub fn rank_json(entries: &[RankEntry], config: &Value) -> String {
    let ranks: Vec<Value> = entries
        .iter()
        .map(|e| json!({ "node": e.node, "score": e.score, "rank": e.rank }))
        .collect();
    pretty(&json!({ "config": config, "ranks": ranks }))
}

pub fn trace_csv(trace: &ConvergenceTrace, header: &[String]) -> String {
    let mut out = header_block(header);
    out.push_str("step,residual\n");
    for &(step, residual) in &trace.iterates {
        let _ = writeln!(out, "{},{}", fmt_float(step), fmt_float(residual));
    }
    out
}

/// Row-major full-precision dump, one matrix row per line.
pub fn matrix_csv(m: &ArrayView2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

/// Sparse snapshot dump: one `t,i,j,re,im` line per entry with magnitude
/// above [`SNAPSHOT_MAGNITUDE_FLOOR`].
pub fn snapshots_csv(snapshots: &[(f64, DensityMatrix)], header: &[String]) -> String {
    let mut out = header_block(header);
    out.push_str("t,i,j,re,im\n");
    for (t, rho) in snapshots {
        for ((i, j), v) in rho.entries().indexed_iter() {
            if v.norm() > SNAPSHOT_MAGNITUDE_FLOOR {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    fmt_float(*t),
                    i,
                    j,
                    fmt_float(v.re),
                    fmt_float(v.im)
                );
            }
        }
    }
    out
}

pub fn snapshots_json(snapshots: &[(f64, DensityMatrix)], config: &Value) -> String {
    let snaps: Vec<Value> = snapshots
        .iter()
        .map(|(t, rho)| {
            let entries: Vec<Value> = rho
                .entries()
                .indexed_iter()
                .filter(|(_, v)| v.norm() > SNAPSHOT_MAGNITUDE_FLOOR)
                .map(|((i, j), v)| json!({ "i": i, "j": j, "re": v.re, "im": v.im }))
                .collect();
            json!({ "t": t, "entries": entries })
        })
        .collect();
    pretty(&json!({ "config": config, "snapshots": snaps }))
}

pub fn spectrum_json(report: &SpectrumReport, config: &Value) -> String {
    let eigenvalues: Vec<Value> = report
        .eigenvalues
        .iter()
        .map(|l| json!([l.re, l.im]))
        .collect();
    pretty(&json!({
        "config": config,
        "eigenvalues": eigenvalues,
        "max_real_part": report.max_real_part,
        "left_half_plane": report.max_real_part <= 1e-10,
        "kernel_dimension": report.kernel_dimension,
        "spectral_gap": report.spectral_gap,
        "steady_state_count": report.steady_states.len(),
    }))
}

pub fn eigenvalues_csv(report: &SpectrumReport, header: &[String]) -> String {
    let mut out = header_block(header);
    out.push_str("re,im\n");
    for l in &report.eigenvalues {
        let _ = writeln!(out, "{},{}", fmt_float(l.re), fmt_float(l.im));
    }
    out
}

pub fn distribution_csv(p: &RankVector, header: &[String]) -> String {
    let mut out = header_block(header);
    out.push_str("site,p\n");
    for (site, &v) in p.values().indexed_iter() {
        let _ = writeln!(out, "{},{}", site, fmt_float(v));
    }
    out
}

pub fn distribution_json(p: &RankVector, config: &Value) -> String {
    let values: Vec<Value> = p.values().iter().map(|&v| json!(v)).collect();
    pretty(&json!({ "config": config, "p": values }))
}

pub fn correlation_csv(gamma: &Array2<f64>, header: &[String]) -> String {
    let mut out = header_block(header);
    out.push_str("q,r,gamma\n");
    for ((q, r), &v) in gamma.indexed_iter() {
        let _ = writeln!(out, "{},{},{}", q, r, fmt_float(v));
    }
    out
}

pub fn correlation_json(gamma: &Array2<f64>, config: &Value) -> String {
    let rows: Vec<Value> = gamma
        .rows()
        .into_iter()
        .map(|row| Value::Array(row.iter().map(|&v| json!(v)).collect()))
        .collect();
    pretty(&json!({ "config": config, "gamma": rows }))
}

pub fn spread_csv(fit: &SpreadFit, header: &[String]) -> String {
    let mut out = header_block(header);
    out.push_str("t,variance\n");
    for &(t, var) in &fit.variances {
        let _ = writeln!(out, "{},{}", fmt_float(t), fmt_float(var));
    }
    out
}

pub fn spread_json(fit: &SpreadFit, config: &Value) -> String {
    let variances: Vec<Value> = fit.variances.iter().map(|&(t, v)| json!([t, v])).collect();
    pretty(&json!({
        "config": config,
        "exponent": fit.exponent,
        "variances": variances,
    }))
}

fn pretty(value: &Value) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("JSON serialization cannot fail");
    out.push('\n');
    out
}
