//! `ringcat`: scans, distributions, witness reports and ramp traces for the
//! twisted Bose-Hubbard ring.

mod commands;
mod config;
mod expr;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "ringcat", version, about = "Cat states of atoms on a rotating ring lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lowest levels against the Peierls phase (energies in units of J).
    SpectrumScan(SpectrumArgs),
    /// Flow-state occupation probabilities of an eigenstate (three sites).
    FlowDist(FlowArgs),
    /// Ground-state cat fidelity against J/U (gap in units of U).
    CatScan(CatArgs),
    /// Trace of the three-stage preparation protocol (times in hbar/U).
    Ramp(RampArgs),
    /// Exact ground energy against the best product-condensate energy (JSON).
    Witness(WitnessArgs),
    /// Phase and size of the minimum gap between the two lowest levels.
    Anticrossing(AnticrossingArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML file whose keys mirror the long flags; flags win.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, value_name = "N")]
    pub workers: Option<String>,
    /// Largest Hilbert-space dimension accepted.
    #[arg(long, value_name = "N")]
    pub dimension_cap: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RingArgs {
    /// Lattice sites M [default: 3].
    #[arg(long, value_name = "M")]
    pub sites: Option<String>,
    /// Atoms N.
    #[arg(long, value_name = "N")]
    pub atoms: Option<String>,
    /// Per-bond tunneling factors, comma separated, bond i joins sites i and i+1.
    #[arg(long, value_name = "LIST")]
    pub bond_factors: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub ring: RingArgs,
    /// Interaction in units of the base tunneling.
    #[arg(long, value_name = "X")]
    pub u_over_j: Option<String>,
    /// Number of levels [default: 4].
    #[arg(long, value_name = "K")]
    pub levels: Option<String>,
    /// start:stop:count, inclusive [default: 0:2pi/3:241].
    #[arg(long, value_name = "GRID")]
    pub phi_grid: Option<String>,
    /// Largest dimension solved densely [default: 5000].
    #[arg(long, value_name = "N")]
    pub dense_limit: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct FlowArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub ring: RingArgs,
    #[arg(long, value_name = "X")]
    pub u_over_j: Option<String>,
    /// Peierls phase, e.g. pi/3 [default: 0].
    #[arg(long, value_name = "PHASE")]
    pub phi: Option<String>,
    /// Eigenstate index, 0 = ground state [default: 0].
    #[arg(long, value_name = "I")]
    pub level: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct CatArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub ring: RingArgs,
    /// [default: pi/3]
    #[arg(long, value_name = "PHASE")]
    pub phi: Option<String>,
    /// J/U values, [log:]start:stop:count [default: log:0.01:100:41].
    #[arg(long, value_name = "GRID")]
    pub j_over_u_grid: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct RampArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub ring: RingArgs,
    /// J/U before stage 1 and after stage 3.
    #[arg(long, value_name = "X")]
    pub target_j_over_u: Option<String>,
    /// J/U held during stage 2 [default: 0].
    #[arg(long, value_name = "X")]
    pub floor_j_over_u: Option<String>,
    /// Phase applied in stages 2 and 3 [default: pi/3].
    #[arg(long, value_name = "PHASE")]
    pub rotation_phi: Option<String>,
    /// Three stage durations in hbar/U [default: 50,50,50].
    #[arg(long, value_name = "LIST")]
    pub durations: Option<String>,
    /// smooth, linear or exponential [default: smooth].
    #[arg(long, value_name = "SHAPE")]
    pub shape: Option<String>,
    /// [default: 0.01]
    #[arg(long, value_name = "DT")]
    pub time_step: Option<String>,
    /// Write every n-th step [default: 1].
    #[arg(long, value_name = "N")]
    pub sample_every: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct WitnessArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub ring: RingArgs,
    #[arg(long, value_name = "X")]
    pub u_over_j: Option<String>,
    /// [default: 0]
    #[arg(long, value_name = "PHASE")]
    pub phi: Option<String>,
    /// Random starting points [default: 32].
    #[arg(long, value_name = "N")]
    pub restarts: Option<String>,
    /// [default: 0]
    #[arg(long, value_name = "SEED")]
    pub seed: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct AnticrossingArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub ring: RingArgs,
    #[arg(long, value_name = "X")]
    pub u_over_j: Option<String>,
    /// lo:hi [default: pi/3-0.3:pi/3+0.3].
    #[arg(long, value_name = "RANGE")]
    pub bracket: Option<String>,
    /// Bracket width at which the search stops [default: 1e-6].
    #[arg(long, value_name = "TOL")]
    pub tol: Option<String>,
}

/// Why a run failed; each maps to its own exit code.
#[derive(Debug)]
pub enum Failure {
    Config(Vec<String>),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn report(&self) -> Vec<String> {
        match self {
            Failure::Config(msgs) => msgs.iter().map(|m| format!("error[config]: {m}")).collect(),
            Failure::Numerical(m) => vec![format!("error[numerical]: {m}")],
            Failure::Io(m) => vec![format!("error[io]: {m}")],
        }
    }
}

impl From<ringcat_core::Error> for Failure {
    fn from(e: ringcat_core::Error) -> Self {
        match e.kind() {
            ringcat_core::ErrorKind::Input => Failure::Config(vec![e.to_string()]),
            ringcat_core::ErrorKind::Numerical => Failure::Numerical(e.to_string()),
        }
    }
}

fn emit(text: &str, path: Option<&PathBuf>) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, output) = match &cli.command {
        Command::SpectrumScan(a) => (commands::spectrum_scan(a), &a.common.output),
        Command::FlowDist(a) => (commands::flow_dist(a), &a.common.output),
        Command::CatScan(a) => (commands::cat_scan(a), &a.common.output),
        Command::Ramp(a) => (commands::ramp(a), &a.common.output),
        Command::Witness(a) => (commands::witness(a), &a.common.output),
        Command::Anticrossing(a) => (commands::anticrossing(a), &a.common.output),
    };
    match result.and_then(|text| emit(&text, output.as_ref())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            for line in f.report() {
                eprintln!("ringcat: {line}");
            }
            ExitCode::from(f.code())
        }
    }
}
