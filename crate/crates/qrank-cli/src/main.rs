//! `qrank`: classical and quantum PageRank runs from the command line.
//!
//! Exit codes form a stable contract:
//!   0  success
//!   1  internal numerical failure
//!   2  parse or validation error (inputs, flags, config files)
//!   3  non-convergence (power iteration or steady-state integration)
//!   4  kernel and integration solvers disagree beyond 1e-5
//!   5  steady state is not unique (kernel solver)
//!   6  graph exceeds the dense-superoperator size cap
//!   7  boundary contamination during a spread measurement

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

#[derive(Debug)]
pub enum CliError {
    Lib(qrank::Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Config(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Lib(err) => err.fmt(f),
            Self::Io { path, source } => write!(f, "{}: {source}", path.display()),
            Self::Config(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<qrank::Error> for CliError {
    fn from(err: qrank::Error) -> Self {
        Self::Lib(err)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use qrank::Error as E;
        match self {
            Self::Io { .. } | Self::Config(_) => 2,
            Self::Lib(err) => match err {
                E::Parse { .. }
                | E::Validation(_)
                | E::DimensionMismatch { .. }
                | E::InvalidState(_) => 2,
                E::NonUniqueStationary { .. } | E::NonUniqueSteadyState { .. } => 5,
                E::SizeCapExceeded { .. } => 6,
                E::BoundaryContamination { .. } => 7,
                E::NumericalInstability(_) | E::Structural(_) | E::LinAlg(_) => 1,
            },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qrank",
    version,
    about = "Classical and quantum PageRank on directed graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classical PageRank by power iteration, with a convergence trace
    RankClassical(RankClassicalArgs),
    /// Quantum PageRank: the stationary diagonal of the Lindblad walk
    RankQuantum(RankQuantumArgs),
    /// Liouvillian spectrum: eigenvalues, kernel dimension, spectral gap
    Spectrum(SpectrumArgs),
    /// Waveguide-lattice observables
    Lattice(LatticeArgs),
    /// Reproducible input fixtures
    Fixtures(FixturesArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Flat key=value config file; command-line flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for rank/distribution files
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct RankClassicalArgs {
    /// Edge-list graph file
    graph: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
    /// Damping parameter in [0, 1]
    #[arg(long)]
    alpha: Option<f64>,
    /// L1 convergence tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args)]
struct RankQuantumArgs {
    /// Edge-list graph file
    graph: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
    /// Damping parameter in [0, 1]
    #[arg(long)]
    alpha: Option<f64>,
    /// Coherent/dissipative mixing parameter; repeat for a sweep
    #[arg(long)]
    epsilon: Vec<f64>,
    /// Hamiltonian source: `symmetrized | lattice | custom:<file>`
    #[arg(long)]
    hamiltonian: Option<String>,
    /// Steady-state solver
    #[arg(long, value_enum)]
    solver: Option<Solver>,
    /// Integrator step
    #[arg(long)]
    dt: Option<f64>,
    /// Stationarity tolerance on max |L rho|
    #[arg(long)]
    tol: Option<f64>,
    /// Integration time cap
    #[arg(long)]
    t_max: Option<f64>,
    /// Also write density-matrix snapshots every this many steps
    #[arg(long)]
    snapshot_stride: Option<usize>,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Edge-list graph file
    graph: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
    /// Damping parameter in [0, 1]
    #[arg(long)]
    alpha: Option<f64>,
    /// Coherent/dissipative mixing parameter
    #[arg(long)]
    epsilon: Option<f64>,
    /// Hamiltonian source: `symmetrized | lattice | custom:<file>`
    #[arg(long)]
    hamiltonian: Option<String>,
}

#[derive(Args)]
struct LatticeArgs {
    #[command(subcommand)]
    command: LatticeCommand,
}

#[derive(Subcommand)]
enum LatticeCommand {
    /// Single-photon output distribution
    Dist(DistArgs),
    /// Two-photon coincidence matrix
    Corr(CorrArgs),
    /// Variance growth exponent (ballistic vs diffusive)
    Spread(SpreadArgs),
}

#[derive(Args)]
struct LatticeShape {
    /// Number of waveguides
    #[arg(long)]
    sites: Option<usize>,
    /// Uniform propagation constant
    #[arg(long)]
    beta: Option<f64>,
    /// Uniform nearest-neighbor coupling
    #[arg(long)]
    coupling: Option<f64>,
    #[arg(long, value_enum)]
    boundary: Option<BoundaryArg>,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    shape: LatticeShape,
    /// Propagation length (interchangeable with time)
    #[arg(long)]
    z: Option<f64>,
    /// Injection waveguide
    #[arg(long)]
    input_site: Option<usize>,
}

#[derive(Args)]
struct CorrArgs {
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    shape: LatticeShape,
    /// Propagation length (interchangeable with time)
    #[arg(long)]
    z: Option<f64>,
    /// First injection waveguide
    #[arg(long)]
    site_a: Option<usize>,
    /// Second injection waveguide
    #[arg(long)]
    site_b: Option<usize>,
}

#[derive(Args)]
struct SpreadArgs {
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    shape: LatticeShape,
    /// Measurement times (comma-separated or repeated)
    #[arg(long, value_delimiter = ',')]
    times: Vec<f64>,
    /// Release site (defaults to the center)
    #[arg(long)]
    site0: Option<usize>,
    /// Coherent photon walk or the classical (eps = 1) Lindblad walk
    #[arg(long, value_enum)]
    walker: Option<Walker>,
    /// Integrator step for the classical walker
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct FixturesArgs {
    #[command(subcommand)]
    command: FixturesCommand,
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Write a seeded random edge list
    Generate(GenerateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    edges: Option<usize>,
    /// RNG seed; identical seeds give identical fixtures
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Solver {
    Integrate,
    Kernel,
    Both,
}

impl Solver {
    fn as_str(self) -> &'static str {
        match self {
            Self::Integrate => "integrate",
            Self::Kernel => "kernel",
            Self::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Walker {
    Unitary,
    Classical,
}

impl Walker {
    fn as_str(self) -> &'static str {
        match self {
            Self::Unitary => "unitary",
            Self::Classical => "classical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundaryArg {
    Open,
    Periodic,
}

impl BoundaryArg {
    fn as_str(self) -> &'static str {
        match self {
            Self::Open => "open",
            Self::Periodic => "periodic",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::RankClassical(args) => commands::rank_classical(args),
        Command::RankQuantum(args) => commands::rank_quantum(args),
        Command::Spectrum(args) => commands::spectrum(args),
        Command::Lattice(args) => commands::lattice(args),
        Command::Fixtures(args) => commands::fixtures(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("qrank: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
