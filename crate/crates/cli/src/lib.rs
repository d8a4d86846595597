//! Command-line front end for the beamhom workbench.

pub mod config;
pub mod plot;
pub mod run;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use beamhom::{LatticeFamily, ModelKind};

use config::{CommandKind, ConfigLayer, ConvergenceLoad, Format, ModeLoad, RunConfig};
pub use run::{run, RunOutcome};

#[derive(Debug, Parser)]
#[command(name = "beamhom", version, about = "Discrete vs continuum analysis of periodic beam lattices")]
pub struct Cli {
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, env = "BEAMHOM_THREADS", global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one lattice under mode loads and write the nodal fields.
    Solve(CommonArgs),
    /// Largest discrete-vs-continuum inverse-symbol gap per grid size.
    DiffSweep(CommonArgs),
    /// Err0/Err1/Err2 maps over the frequency grid.
    ErrMaps(CommonArgs),
    /// Convergence order of the displacement and rotation errors.
    Convergence(CommonArgs),
    /// Identity, coercivity and bound checks.
    Verify(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Named preset, e.g. paper-fig2 or paper-fig4.
    #[arg(long)]
    pub preset: Option<String>,
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// triangular or rectangular.
    #[arg(long)]
    pub lattice: Option<LatticeFamily>,
    /// Grid sizes, comma separated.
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Axial-to-bending stiffness ratios, comma separated.
    #[arg(long = "rho-star", value_delimiter = ',', allow_negative_numbers = true)]
    pub rho_star: Option<Vec<f64>>,
    /// discrete, continuum or km.
    #[arg(long)]
    pub model: Option<ModelKind>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output formats, comma separated: csv, json, svg.
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
    /// Low-frequency cutoff M on |i'| + |j'|.
    #[arg(long)]
    pub cutoff: Option<i64>,
    /// Seed for randomised checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Mode load `ip,jp,fx,fy,tau` (solve); repeatable.
    #[arg(long = "load")]
    pub load: Vec<ModeLoad>,
    /// Convergence load family: force, torque, mixed or scaled-force.
    #[arg(long)]
    pub load_family: Option<ConvergenceLoad>,
    /// Random trials per identity check (verify).
    #[arg(long)]
    pub trials: Option<usize>,
}

impl CommonArgs {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            command: None,
            lattice: self.lattice,
            n_list: self.n.clone(),
            rho_star_list: self.rho_star.clone(),
            model: self.model,
            cutoff: self.cutoff,
            seed: self.seed,
            formats: self.format.clone(),
            out: self.out.clone(),
            loads: if self.load.is_empty() { None } else { Some(self.load.clone()) },
            load_family: self.load_family,
            identity_trials: self.trials,
        }
    }
}

impl Command {
    pub fn parts(&self) -> (CommandKind, &CommonArgs) {
        match self {
            Command::Solve(a) => (CommandKind::Solve, a),
            Command::DiffSweep(a) => (CommandKind::DiffSweep, a),
            Command::ErrMaps(a) => (CommandKind::ErrMaps, a),
            Command::Convergence(a) => (CommandKind::Convergence, a),
            Command::Verify(a) => (CommandKind::Verify, a),
        }
    }
}

/// Resolve the run configuration of a parsed command line.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let (kind, args) = cli.command.parts();
    let file = args.config.as_deref().map(ConfigLayer::from_file).transpose()?;
    RunConfig::resolve(kind, args.preset.as_deref(), file, args.layer())
}

/// Parse, resolve and run; returns the outcome for the caller to report.
pub fn run_cli<I, T>(args: I) -> Result<RunOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let cfg = resolve(&cli)?;
    run(&cfg)
}
