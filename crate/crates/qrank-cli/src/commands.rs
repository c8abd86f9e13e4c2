//! Command implementations. Each returns the process exit code on the
//! "soft failure" paths (non-convergence, solver disagreement) and a
//! [`CliError`] on hard ones.

use std::path::{Path, PathBuf};

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use qrank::classical::{self, RankVector};
use qrank::export;
use qrank::graph::{GoogleMatrix, WebGraph, DEFAULT_ALPHA};
use qrank::lattice::{
    single_photon_distribution, spread_exponent, two_photon_correlation, Boundary,
    LatticeHamiltonian, Propagator, SpreadGenerator,
};
use qrank::quantum::{
    self, build_liouvillian, initial_state, integrate, max_abs, quantum_pagerank,
    steady_state_by_integration,
};
use qrank::spectral;

use crate::config::{size_cap, ConfigFile, EffectiveConfig, HamiltonianChoice};
use crate::{
    BoundaryArg, CliError, CorrArgs, DistArgs, FixturesArgs, FixturesCommand, Format,
    GenerateArgs, LatticeArgs, LatticeCommand, OutputArgs, RankClassicalArgs, RankQuantumArgs,
    Solver, SpectrumArgs, SpreadArgs, Walker,
};

/// Kernel and integration steady states may differ by at most this much
/// (max-modulus) before `--solver both` fails with exit code 4.
const SOLVER_AGREEMENT_TOL: f64 = 1e-5;

const DEFAULT_EPSILON: f64 = 0.5;
const DEFAULT_OUT: &str = "qrank-out";

fn read_graph(path: &Path) -> Result<WebGraph, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    WebGraph::parse_edge_list(&text).map_err(CliError::Lib)
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn require<T>(value: Option<T>, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing required setting `{what}`")))
}

fn resolve_out(args: &OutputArgs, cfg: &ConfigFile) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.path("out"))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn resolve_format(args: &OutputArgs, cfg: &ConfigFile) -> Result<Format, CliError> {
    if let Some(format) = args.format {
        return Ok(format);
    }
    match cfg.string("format").as_deref() {
        None => Ok(Format::Csv),
        Some("csv") => Ok(Format::Csv),
        Some("json") => Ok(Format::Json),
        Some(other) => Err(CliError::Config(format!(
            "format `{other}` is not csv | json"
        ))),
    }
}

fn resolve_solver(flag: Option<Solver>, cfg: &ConfigFile) -> Result<Solver, CliError> {
    if let Some(solver) = flag {
        return Ok(solver);
    }
    match cfg.string("solver").as_deref() {
        None => Ok(Solver::Kernel),
        Some("integrate") => Ok(Solver::Integrate),
        Some("kernel") => Ok(Solver::Kernel),
        Some("both") => Ok(Solver::Both),
        Some(other) => Err(CliError::Config(format!(
            "solver `{other}` is not integrate | kernel | both"
        ))),
    }
}

fn resolve_walker(flag: Option<Walker>, cfg: &ConfigFile) -> Result<Walker, CliError> {
    if let Some(walker) = flag {
        return Ok(walker);
    }
    match cfg.string("walker").as_deref() {
        None => Ok(Walker::Unitary),
        Some("unitary") => Ok(Walker::Unitary),
        Some("classical") => Ok(Walker::Classical),
        Some(other) => Err(CliError::Config(format!(
            "walker `{other}` is not unitary | classical"
        ))),
    }
}

fn resolve_boundary(flag: Option<BoundaryArg>, cfg: &ConfigFile) -> Result<BoundaryArg, CliError> {
    if let Some(boundary) = flag {
        return Ok(boundary);
    }
    match cfg.string("boundary").as_deref() {
        None => Ok(BoundaryArg::Open),
        Some("open") => Ok(BoundaryArg::Open),
        Some("periodic") => Ok(BoundaryArg::Periodic),
        Some(other) => Err(CliError::Config(format!(
            "boundary `{other}` is not open | periodic"
        ))),
    }
}

impl From<BoundaryArg> for Boundary {
    fn from(arg: BoundaryArg) -> Self {
        match arg {
            BoundaryArg::Open => Boundary::Open,
            BoundaryArg::Periodic => Boundary::Periodic,
        }
    }
}

pub fn rank_classical(args: RankClassicalArgs) -> Result<u8, CliError> {
    let cfg = ConfigFile::load(args.output.config.as_deref())?;
    let alpha = args.alpha.or(cfg.f64("alpha")?).unwrap_or(DEFAULT_ALPHA);
    let tol = args.tol.or(cfg.f64("tol")?).unwrap_or(classical::DEFAULT_TOL);
    let max_iter = args
        .max_iter
        .or(cfg.usize("max_iter")?)
        .unwrap_or(classical::DEFAULT_MAX_ITER);
    let out = resolve_out(&args.output, &cfg);
    let format = resolve_format(&args.output, &cfg)?;

    let graph = read_graph(&args.graph)?;
    let g = GoogleMatrix::from_graph(&graph, alpha)?;
    let p0 = RankVector::uniform(graph.node_count());
    let trace = classical::power_iterate(&g, &p0, tol, max_iter)?;

    let mut eff = EffectiveConfig::new("rank-classical");
    eff.add_str("graph", args.graph.display());
    eff.add_f64("alpha", alpha);
    eff.add_f64("tol", tol);
    eff.add_usize("max_iter", max_iter);
    eff.add_str("format", format.as_str());

    ensure_dir(&out)?;
    let ranking = trace.final_vector.ranking();
    match format {
        Format::Csv => write_file(&out.join("rank.csv"), &export::rank_csv(&ranking, eff.lines()))?,
        Format::Json => write_file(
            &out.join("rank.json"),
            &export::rank_json(&ranking, &eff.json()),
        )?,
    }
    write_file(&out.join("trace.csv"), &export::trace_csv(&trace, eff.lines()))?;
    Ok(if trace.converged { 0 } else { 3 })
}

pub fn rank_quantum(args: RankQuantumArgs) -> Result<u8, CliError> {
    let cfg = ConfigFile::load(args.output.config.as_deref())?;
    let alpha = args.alpha.or(cfg.f64("alpha")?).unwrap_or(DEFAULT_ALPHA);
    let epsilons: Vec<f64> = if !args.epsilon.is_empty() {
        args.epsilon.clone()
    } else {
        cfg.f64_list("epsilon")?.unwrap_or_else(|| vec![DEFAULT_EPSILON])
    };
    let hamiltonian = HamiltonianChoice::parse(
        &args
            .hamiltonian
            .clone()
            .or_else(|| cfg.string("hamiltonian"))
            .unwrap_or_else(|| "symmetrized".into()),
    )?;
    let solver = resolve_solver(args.solver, &cfg)?;
    let dt = args.dt.or(cfg.f64("dt")?).unwrap_or(quantum::DEFAULT_DT);
    let tol = args
        .tol
        .or(cfg.f64("tol")?)
        .unwrap_or(quantum::DEFAULT_STEADY_TOL);
    let t_max = args
        .t_max
        .or(cfg.f64("t_max")?)
        .unwrap_or(quantum::DEFAULT_T_MAX);
    let snapshot_stride = args.snapshot_stride.or(cfg.usize("snapshot_stride")?);
    let out = resolve_out(&args.output, &cfg);
    let format = resolve_format(&args.output, &cfg)?;
    let cap = size_cap()?;

    let graph = read_graph(&args.graph)?;
    let n = graph.node_count();
    let g = GoogleMatrix::from_graph(&graph, alpha)?;
    let rho0 = initial_state(n)?;
    ensure_dir(&out)?;

    let sweep = epsilons.len() > 1;
    let mut manifest = Vec::new();
    let mut exit: u8 = 0;

    for &eps in &epsilons {
        let dir_name = format!("eps-{eps}");
        let dir = if sweep { out.join(&dir_name) } else { out.clone() };
        ensure_dir(&dir)?;

        let l = build_liouvillian(&hamiltonian.source(n)?, &g, eps)?;
        // Spectral diagnostics are available whenever the graph fits the
        // dense cap, independent of the chosen solver.
        let report = if n <= cap {
            Some(spectral::spectrum(&spectral::vectorize_with_cap(&l, cap)?)?)
        } else {
            None
        };

        let mut eff = EffectiveConfig::new("rank-quantum");
        eff.add_str("graph", args.graph.display());
        eff.add_f64("alpha", alpha);
        eff.add_f64("epsilon", eps);
        eff.add_str("hamiltonian", hamiltonian.describe());
        eff.add_str("solver", solver.as_str());
        eff.add_f64("dt", dt);
        eff.add_f64("tol", tol);
        eff.add_f64("t_max", t_max);
        eff.add_usize("size_cap", cap);
        eff.add_str("format", format.as_str());
        if let Some(stride) = snapshot_stride {
            eff.add_usize("snapshot_stride", stride);
        }

        let mut summary = Map::new();
        summary.insert("epsilon".into(), json!(eps));
        summary.insert("solver".into(), json!(solver.as_str()));

        let over_cap = || CliError::Lib(qrank::Error::SizeCapExceeded { dim: n, cap });
        let (state, entry_code) = match solver {
            Solver::Kernel => {
                let report = report.as_ref().ok_or_else(over_cap)?;
                let state = spectral::steady_state_from_report(&l, report)?;
                (state, 0u8)
            }
            Solver::Integrate => {
                let outcome = steady_state_by_integration(&l, &rho0, tol, t_max, dt)?;
                summary.insert("stationary".into(), json!(outcome.stationary));
                summary.insert("time".into(), json!(outcome.time));
                let code = if outcome.stationary { 0 } else { 3 };
                (outcome.state, code)
            }
            Solver::Both => {
                let report = report.as_ref().ok_or_else(over_cap)?;
                let kernel_state = spectral::steady_state_from_report(&l, report)?;
                let outcome = steady_state_by_integration(&l, &rho0, tol, t_max, dt)?;
                let disagreement =
                    max_abs(&(kernel_state.entries() - outcome.state.entries()));
                summary.insert("stationary".into(), json!(outcome.stationary));
                summary.insert("disagreement".into(), json!(disagreement));
                let mut code = if outcome.stationary { 0 } else { 3 };
                if disagreement > SOLVER_AGREEMENT_TOL {
                    code = 4;
                }
                (kernel_state, code)
            }
        };

        summary.insert("residual".into(), json!(l.residual(&state)?));
        if let Some(report) = &report {
            summary.insert("kernel_dimension".into(), json!(report.kernel_dimension));
            summary.insert("spectral_gap".into(), json!(report.spectral_gap));
            summary.insert("max_real_part".into(), json!(report.max_real_part));
        } else {
            summary.insert("kernel_dimension".into(), Value::Null);
            summary.insert("spectral_gap".into(), Value::Null);
            summary.insert("max_real_part".into(), Value::Null);
        }

        let ranking = quantum_pagerank(&state)?.ranking();
        let rank_file = match format {
            Format::Csv => {
                write_file(&dir.join("rank.csv"), &export::rank_csv(&ranking, eff.lines()))?;
                "rank.csv"
            }
            Format::Json => {
                write_file(
                    &dir.join("rank.json"),
                    &export::rank_json(&ranking, &eff.json()),
                )?;
                "rank.json"
            }
        };
        if let Some(stride) = snapshot_stride {
            let snapshots = integrate(&l, &rho0, t_max, dt, stride)?;
            match format {
                Format::Csv => write_file(
                    &dir.join("snapshots.csv"),
                    &export::snapshots_csv(&snapshots, eff.lines()),
                )?,
                Format::Json => write_file(
                    &dir.join("snapshots.json"),
                    &export::snapshots_json(&snapshots, &eff.json()),
                )?,
            }
        }
        summary.insert("rank_file".into(), json!(rank_file));
        let summary_doc = json!({ "config": eff.json(), "summary": Value::Object(summary) });
        write_file(
            &dir.join("summary.json"),
            &format!("{}\n", serde_json::to_string_pretty(&summary_doc).expect("valid JSON")),
        )?;

        if sweep {
            manifest.push(json!({
                "epsilon": eps,
                "dir": dir_name,
                "rank_file": rank_file,
                "summary_file": "summary.json",
            }));
        }
        if entry_code != 0 {
            exit = entry_code;
            break;
        }
    }

    if sweep {
        let mut eff = EffectiveConfig::new("rank-quantum");
        eff.add_str("graph", args.graph.display());
        eff.add_f64("alpha", alpha);
        eff.add_f64_list("epsilon", &epsilons);
        eff.add_str("hamiltonian", hamiltonian.describe());
        eff.add_str("solver", solver.as_str());
        eff.add_f64("dt", dt);
        eff.add_f64("tol", tol);
        eff.add_f64("t_max", t_max);
        eff.add_usize("size_cap", cap);
        eff.add_str("format", format.as_str());
        let manifest_doc = json!({
            "config": eff.json(),
            "entries": manifest,
        });
        write_file(
            &out.join("sweep.json"),
            &format!("{}\n", serde_json::to_string_pretty(&manifest_doc).expect("valid JSON")),
        )?;
    }
    Ok(exit)
}

pub fn spectrum(args: SpectrumArgs) -> Result<u8, CliError> {
    let cfg = ConfigFile::load(args.output.config.as_deref())?;
    let alpha = args.alpha.or(cfg.f64("alpha")?).unwrap_or(DEFAULT_ALPHA);
    let epsilon = args
        .epsilon
        .or(cfg.f64("epsilon")?)
        .unwrap_or(DEFAULT_EPSILON);
    let hamiltonian = HamiltonianChoice::parse(
        &args
            .hamiltonian
            .clone()
            .or_else(|| cfg.string("hamiltonian"))
            .unwrap_or_else(|| "symmetrized".into()),
    )?;
    let out = resolve_out(&args.output, &cfg);
    let format = resolve_format(&args.output, &cfg)?;
    let cap = size_cap()?;

    let graph = read_graph(&args.graph)?;
    let n = graph.node_count();
    let g = GoogleMatrix::from_graph(&graph, alpha)?;
    let l = build_liouvillian(&hamiltonian.source(n)?, &g, epsilon)?;
    let m = spectral::vectorize_with_cap(&l, cap)?;
    let report = spectral::spectrum(&m)?;

    let mut eff = EffectiveConfig::new("spectrum");
    eff.add_str("graph", args.graph.display());
    eff.add_f64("alpha", alpha);
    eff.add_f64("epsilon", epsilon);
    eff.add_str("hamiltonian", hamiltonian.describe());
    eff.add_usize("size_cap", cap);
    eff.add_str("format", format.as_str());

    ensure_dir(&out)?;
    write_file(
        &out.join("spectrum.json"),
        &export::spectrum_json(&report, &eff.json()),
    )?;
    if format == Format::Csv {
        write_file(
            &out.join("eigenvalues.csv"),
            &export::eigenvalues_csv(&report, eff.lines()),
        )?;
    }
    Ok(0)
}

pub fn lattice(args: LatticeArgs) -> Result<u8, CliError> {
    match args.command {
        LatticeCommand::Dist(args) => lattice_dist(args),
        LatticeCommand::Corr(args) => lattice_corr(args),
        LatticeCommand::Spread(args) => lattice_spread(args),
    }
}

struct ResolvedShape {
    sites: usize,
    beta: f64,
    coupling: f64,
    boundary: BoundaryArg,
}

impl ResolvedShape {
    fn resolve(
        shape: &crate::LatticeShape,
        cfg: &ConfigFile,
        default_sites: Option<usize>,
    ) -> Result<Self, CliError> {
        let sites = require(
            shape.sites.or(cfg.usize("sites")?).or(default_sites),
            "sites",
        )?;
        Ok(Self {
            sites,
            beta: shape.beta.or(cfg.f64("beta")?).unwrap_or(0.0),
            coupling: shape.coupling.or(cfg.f64("coupling")?).unwrap_or(1.0),
            boundary: resolve_boundary(shape.boundary, cfg)?,
        })
    }

    fn build(&self) -> Result<LatticeHamiltonian, CliError> {
        let coupling_count = match self.boundary {
            BoundaryArg::Open => self.sites.saturating_sub(1),
            BoundaryArg::Periodic => self.sites,
        };
        LatticeHamiltonian::new(
            Array1::from_elem(self.sites, self.beta),
            Array1::from_elem(coupling_count, self.coupling),
            self.boundary.into(),
        )
        .map_err(CliError::Lib)
    }

    fn describe(&self, eff: &mut EffectiveConfig) {
        eff.add_usize("sites", self.sites);
        eff.add_f64("beta", self.beta);
        eff.add_f64("coupling", self.coupling);
        eff.add_str("boundary", self.boundary.as_str());
    }
}

fn lattice_dist(args: DistArgs) -> Result<u8, CliError> {
    let cfg = ConfigFile::load(args.output.config.as_deref())?;
    let shape = ResolvedShape::resolve(&args.shape, &cfg, None)?;
    let z = require(args.z.or(cfg.f64("z")?), "z")?;
    let input_site = args.input_site.or(cfg.usize("input_site")?).unwrap_or(0);
    let out = resolve_out(&args.output, &cfg);
    let format = resolve_format(&args.output, &cfg)?;

    let h = shape.build()?;
    let u = Propagator::new(&h, z)?;
    let p = single_photon_distribution(&u, input_site)?;

    let mut eff = EffectiveConfig::new("lattice-dist");
    shape.describe(&mut eff);
    eff.add_f64("z", z);
    eff.add_usize("input_site", input_site);
    eff.add_str("format", format.as_str());

    ensure_dir(&out)?;
    match format {
        Format::Csv => write_file(
            &out.join("distribution.csv"),
            &export::distribution_csv(&p, eff.lines()),
        )?,
        Format::Json => write_file(
            &out.join("distribution.json"),
            &export::distribution_json(&p, &eff.json()),
        )?,
    }
    Ok(0)
}

fn lattice_corr(args: CorrArgs) -> Result<u8, CliError> {
    let cfg = ConfigFile::load(args.output.config.as_deref())?;
    let shape = ResolvedShape::resolve(&args.shape, &cfg, None)?;
    let z = require(args.z.or(cfg.f64("z")?), "z")?;
    let site_a = args.site_a.or(cfg.usize("site_a")?).unwrap_or(0);
    let site_b = args.site_b.or(cfg.usize("site_b")?).unwrap_or(1);
    let out = resolve_out(&args.output, &cfg);
    let format = resolve_format(&args.output, &cfg)?;

    let h = shape.build()?;
    let u = Propagator::new(&h, z)?;
    let gamma = two_photon_correlation(&u, site_a, site_b)?;

    let mut eff = EffectiveConfig::new("lattice-corr");
    shape.describe(&mut eff);
    eff.add_f64("z", z);
    eff.add_usize("site_a", site_a);
    eff.add_usize("site_b", site_b);
    eff.add_str("format", format.as_str());

    ensure_dir(&out)?;
    match format {
        Format::Csv => write_file(
            &out.join("correlation.csv"),
            &export::correlation_csv(&gamma, eff.lines()),
        )?,
        Format::Json => write_file(
            &out.join("correlation.json"),
            &export::correlation_json(&gamma, &eff.json()),
        )?,
    }
    Ok(0)
}

fn lattice_spread(args: SpreadArgs) -> Result<u8, CliError> {
    let cfg = ConfigFile::load(args.output.config.as_deref())?;
    let shape = ResolvedShape::resolve(&args.shape, &cfg, Some(41))?;
    let times: Vec<f64> = if !args.times.is_empty() {
        args.times.clone()
    } else {
        cfg.f64_list("times")?
            .unwrap_or_else(|| vec![2.0, 3.0, 4.0, 5.0, 6.0])
    };
    let site0 = args
        .site0
        .or(cfg.usize("site0")?)
        .unwrap_or(shape.sites / 2);
    let walker = resolve_walker(args.walker, &cfg)?;
    let dt = args.dt.or(cfg.f64("dt")?).unwrap_or(quantum::DEFAULT_DT);
    let out = resolve_out(&args.output, &cfg);

    let mut eff = EffectiveConfig::new("lattice-spread");
    shape.describe(&mut eff);
    eff.add_f64_list("times", &times);
    eff.add_usize("site0", site0);
    eff.add_str("walker", walker.as_str());
    eff.add_f64("dt", dt);

    let fit = match walker {
        Walker::Unitary => {
            let h = shape.build()?;
            spread_exponent(&SpreadGenerator::Unitary(&h), site0, &times, dt)?
        }
        Walker::Classical => {
            // The classical walk follows the same adjacency at alpha = 1
            // (no teleportation, which would break locality) and eps = 1.
            let graph = match shape.boundary {
                BoundaryArg::Open => WebGraph::line(shape.sites)?,
                BoundaryArg::Periodic => {
                    let mut edges: Vec<(usize, usize)> = Vec::new();
                    for i in 0..shape.sites {
                        let j = (i + 1) % shape.sites;
                        edges.push((i, j));
                        edges.push((j, i));
                    }
                    WebGraph::new(shape.sites, edges)?
                }
            };
            let g = GoogleMatrix::from_graph(&graph, 1.0)?;
            let l = build_liouvillian(
                &qrank::quantum::HamiltonianSource::SymmetrizedGoogle,
                &g,
                1.0,
            )?;
            spread_exponent(&SpreadGenerator::Dissipative(&l), site0, &times, dt)?
        }
    };

    ensure_dir(&out)?;
    write_file(&out.join("spread.csv"), &export::spread_csv(&fit, eff.lines()))?;
    write_file(
        &out.join("spread.json"),
        &export::spread_json(&fit, &eff.json()),
    )?;
    Ok(0)
}

pub fn fixtures(args: FixturesArgs) -> Result<u8, CliError> {
    match args.command {
        FixturesCommand::Generate(args) => fixtures_generate(args),
    }
}

fn fixtures_generate(args: GenerateArgs) -> Result<u8, CliError> {
    let cfg = ConfigFile::load(args.output.config.as_deref())?;
    let nodes = args.nodes.or(cfg.usize("nodes")?).unwrap_or(8);
    let edges = args.edges.or(cfg.usize("edges")?).unwrap_or(nodes * 2);
    let seed = args.seed.or(cfg.u64("seed")?).unwrap_or(0);
    let out = resolve_out(&args.output, &cfg);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = WebGraph::random(nodes, edges, &mut rng)?;

    let mut eff = EffectiveConfig::new("fixtures-generate");
    eff.add_usize("nodes", nodes);
    eff.add_usize("edges", edges);
    eff.add_usize("seed", seed as usize);

    let mut contents = String::new();
    for line in eff.lines() {
        contents.push_str(&format!("# {line}\n"));
    }
    contents.push_str(&graph.to_edge_list());

    ensure_dir(&out)?;
    write_file(&out.join("fixture.el"), &contents)?;
    Ok(0)
}
