//! Run configuration: presets, TOML files and flag overrides, validated before any work starts.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use beamhom::analysis::ModelPair;
use beamhom::{FreqIndex, LatticeFamily, ModelKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Solve,
    DiffSweep,
    ErrMaps,
    Convergence,
    Verify,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Solve => "solve",
            CommandKind::DiffSweep => "diff-sweep",
            CommandKind::ErrMaps => "err-maps",
            CommandKind::Convergence => "convergence",
            CommandKind::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => bail!("invalid `format`: expected csv, json or svg, got `{other}`"),
        }
    }
}

/// Real load `amp * cos(2 pi (i' a + j' b))` on one mode pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeLoad {
    pub ip: i64,
    pub jp: i64,
    #[serde(default)]
    pub fx: f64,
    #[serde(default)]
    pub fy: f64,
    #[serde(default)]
    pub tau: f64,
}

impl std::str::FromStr for ModeLoad {
    type Err = anyhow::Error;

    /// `ip,jp,fx,fy,tau`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            bail!("invalid `load`: expected `ip,jp,fx,fy,tau`, got `{s}`");
        }
        let int = |k: usize| parts[k].parse::<i64>().with_context(|| format!("invalid `load`: bad index `{}`", parts[k]));
        let real = |k: usize| parts[k].parse::<f64>().with_context(|| format!("invalid `load`: bad amplitude `{}`", parts[k]));
        Ok(ModeLoad {
            ip: int(0)?,
            jp: int(1)?,
            fx: real(2)?,
            fy: real(3)?,
            tau: real(4)?,
        })
    }
}

/// Load family of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceLoad {
    /// Unit force along x at mode (1, 0); displacement error in L2.
    Force,
    /// Unit torque at mode (1, 0); displacement error in L2.
    Torque,
    /// Force (1, 0.5) and unit torque at mode (1, 0); rotation error in L2.
    Mixed,
    /// Unit force at mode (N/4, 0); displacement error in H1.
    ScaledForce,
}

impl std::str::FromStr for ConvergenceLoad {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "force" => Ok(ConvergenceLoad::Force),
            "torque" => Ok(ConvergenceLoad::Torque),
            "mixed" => Ok(ConvergenceLoad::Mixed),
            "scaled-force" => Ok(ConvergenceLoad::ScaledForce),
            other => bail!("invalid `load_family`: expected force, torque, mixed or scaled-force, got `{other}`"),
        }
    }
}

/// Partial configuration as read from a TOML file or assembled from flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub command: Option<CommandKind>,
    pub lattice: Option<LatticeFamily>,
    pub n_list: Option<Vec<usize>>,
    pub rho_star_list: Option<Vec<f64>>,
    pub model: Option<ModelKind>,
    pub cutoff: Option<i64>,
    pub seed: Option<u64>,
    pub formats: Option<Vec<Format>>,
    pub out: Option<PathBuf>,
    pub loads: Option<Vec<ModeLoad>>,
    pub load_family: Option<ConvergenceLoad>,
    pub identity_trials: Option<usize>,
}

impl ConfigLayer {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid config file")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config `{}`", path.display()))?;
        Self::from_toml_str(&text)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: ConfigLayer) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(command, lattice, n_list, rho_star_list, model, cutoff, seed, formats, out, loads, load_family, identity_trials);
        self
    }
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub preset: Option<String>,
    pub lattice: LatticeFamily,
    pub n_list: Vec<usize>,
    pub rho_star_list: Vec<f64>,
    pub model: ModelKind,
    pub cutoff: i64,
    pub seed: u64,
    pub formats: Vec<Format>,
    pub out: PathBuf,
    pub loads: Vec<ModeLoad>,
    pub load_family: ConvergenceLoad,
    pub identity_trials: usize,
}

pub const DEFAULT_RHO_STARS: [f64; 3] = [0.01, 1.0, 100.0];
pub const PRESETS: [&str; 11] = [
    "paper-fig2",
    "paper-fig3",
    "paper-fig4",
    "paper-fig5",
    "paper-fig6",
    "convergence-force",
    "convergence-torque",
    "convergence-mixed",
    "convergence-h1",
    "verify",
    "solve-demo",
];

fn powers_of_two(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

/// Defaults for each command when no preset is given.
pub fn command_defaults(command: CommandKind) -> ConfigLayer {
    let base = ConfigLayer {
        command: Some(command),
        lattice: Some(LatticeFamily::Triangular),
        rho_star_list: Some(DEFAULT_RHO_STARS.to_vec()),
        model: Some(ModelKind::Continuum),
        cutoff: Some(10),
        seed: Some(2024),
        formats: Some(vec![Format::Csv, Format::Json]),
        out: Some(PathBuf::from("out")),
        loads: Some(Vec::new()),
        load_family: Some(ConvergenceLoad::Force),
        identity_trials: Some(200),
        n_list: None,
    };
    let n_list = match command {
        CommandKind::Solve => vec![8],
        CommandKind::DiffSweep => powers_of_two(2, 7),
        CommandKind::ErrMaps => vec![17, 33, 65, 129],
        CommandKind::Convergence => powers_of_two(3, 7),
        CommandKind::Verify => powers_of_two(4, 7),
    };
    let rho = match command {
        CommandKind::Solve | CommandKind::Convergence => vec![1.0],
        _ => DEFAULT_RHO_STARS.to_vec(),
    };
    let model = match command {
        CommandKind::Solve => ModelKind::Discrete,
        _ => ModelKind::Continuum,
    };
    ConfigLayer {
        n_list: Some(n_list),
        rho_star_list: Some(rho),
        model: Some(model),
        ..base
    }
}

/// Named preset; the command it belongs to is part of the preset.
pub fn preset(name: &str) -> Result<ConfigLayer> {
    let with = |command: CommandKind, layer: ConfigLayer| command_defaults(command).overlay(layer);
    let layer = match name {
        "paper-fig2" => with(CommandKind::DiffSweep, ConfigLayer::default()),
        "paper-fig3" => with(
            CommandKind::DiffSweep,
            ConfigLayer {
                model: Some(ModelKind::KumarMcDowell),
                ..Default::default()
            },
        ),
        "paper-fig4" | "paper-fig5" | "paper-fig6" => with(CommandKind::ErrMaps, ConfigLayer::default()),
        "convergence-force" => with(CommandKind::Convergence, ConfigLayer::default()),
        "convergence-torque" => with(
            CommandKind::Convergence,
            ConfigLayer {
                load_family: Some(ConvergenceLoad::Torque),
                ..Default::default()
            },
        ),
        "convergence-mixed" => with(
            CommandKind::Convergence,
            ConfigLayer {
                load_family: Some(ConvergenceLoad::Mixed),
                ..Default::default()
            },
        ),
        "convergence-h1" => with(
            CommandKind::Convergence,
            ConfigLayer {
                load_family: Some(ConvergenceLoad::ScaledForce),
                ..Default::default()
            },
        ),
        "verify" => with(CommandKind::Verify, ConfigLayer::default()),
        "solve-demo" => with(
            CommandKind::Solve,
            ConfigLayer {
                loads: Some(vec![
                    ModeLoad { ip: 1, jp: 0, fx: 1.0, fy: 0.0, tau: 0.0 },
                    ModeLoad { ip: 0, jp: 1, fx: 0.0, fy: 0.5, tau: 0.2 },
                    ModeLoad { ip: 0, jp: 0, fx: 0.0, fy: 0.0, tau: 1.0 },
                ]),
                ..Default::default()
            },
        ),
        other => bail!("invalid `preset`: unknown preset `{other}` (known: {})", PRESETS.join(", ")),
    };
    Ok(layer)
}

/// Which Err index a figure preset draws.
pub fn preset_err_index(preset: Option<&str>) -> Option<usize> {
    match preset? {
        "paper-fig4" => Some(0),
        "paper-fig5" => Some(1),
        "paper-fig6" => Some(2),
        _ => None,
    }
}

impl RunConfig {
    /// Resolve `preset < file < flags` for `command` and validate.
    pub fn resolve(command: CommandKind, preset_name: Option<&str>, file: Option<ConfigLayer>, flags: ConfigLayer) -> Result<Self> {
        let mut layer = match preset_name {
            Some(p) => {
                let l = preset(p)?;
                if l.command != Some(command) {
                    bail!(
                        "invalid `preset`: `{p}` belongs to `{}`, not `{}`",
                        l.command.map(|c| c.name()).unwrap_or("?"),
                        command.name()
                    );
                }
                l
            }
            None => command_defaults(command),
        };
        if let Some(f) = file {
            if let Some(c) = f.command {
                if c != command {
                    bail!("invalid `command`: config file is for `{}`, invoked `{}`", c.name(), command.name());
                }
            }
            layer = layer.overlay(f);
        }
        layer = layer.overlay(flags);
        let cfg = RunConfig {
            command,
            preset: preset_name.map(str::to_string),
            lattice: layer.lattice.expect("defaults set lattice"),
            n_list: layer.n_list.expect("defaults set n_list"),
            rho_star_list: layer.rho_star_list.expect("defaults set rho_star_list"),
            model: layer.model.expect("defaults set model"),
            cutoff: layer.cutoff.expect("defaults set cutoff"),
            seed: layer.seed.expect("defaults set seed"),
            formats: layer.formats.expect("defaults set formats"),
            out: layer.out.expect("defaults set out"),
            loads: layer.loads.expect("defaults set loads"),
            load_family: layer.load_family.expect("defaults set load_family"),
            identity_trials: layer.identity_trials.expect("defaults set identity_trials"),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            bail!("invalid `n_list`: must not be empty");
        }
        if self.n_list.iter().any(|&n| n < 2) {
            bail!("invalid `n_list`: every N must be at least 2");
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            bail!("invalid `n_list`: must be strictly ascending");
        }
        if self.rho_star_list.is_empty() || self.rho_star_list.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            bail!("invalid `rho_star_list`: must be non-empty with positive finite entries");
        }
        if self.cutoff < 1 {
            bail!("invalid `cutoff`: must be at least 1");
        }
        if self.formats.is_empty() {
            bail!("invalid `formats`: need at least one output format");
        }
        if self.model == ModelKind::KumarMcDowell && self.lattice != LatticeFamily::Triangular {
            bail!("invalid `model`: km is only defined for the triangular lattice");
        }
        match self.command {
            CommandKind::Solve => {
                if self.n_list.len() != 1 || self.rho_star_list.len() != 1 {
                    bail!("invalid `n_list`: solve takes exactly one N and one rho*");
                }
                let n = self.n_list[0];
                for l in &self.loads {
                    if !FreqIndex::new(l.ip, l.jp).in_set(n) {
                        bail!("invalid `loads`: mode ({}, {}) is outside the frequency set for N = {n}", l.ip, l.jp);
                    }
                    if l.ip == 0 && l.jp == 0 && (l.fx != 0.0 || l.fy != 0.0) {
                        bail!("invalid `loads`: a net force at mode (0, 0) is incompatible with periodic equilibrium");
                    }
                    if ![l.fx, l.fy, l.tau].iter().all(|v| v.is_finite()) {
                        bail!("invalid `loads`: amplitudes must be finite");
                    }
                }
            }
            CommandKind::DiffSweep => {
                if self.model == ModelKind::Discrete {
                    bail!("invalid `model`: diff-sweep compares against `continuum` or `km`");
                }
            }
            CommandKind::ErrMaps => {
                if self.n_list.iter().any(|&n| n < 3) {
                    bail!("invalid `n_list`: err-maps needs N >= 3");
                }
            }
            CommandKind::Convergence => {
                if self.n_list.len() < beamhom::analysis::MIN_FIT_POINTS {
                    bail!(
                        "invalid `n_list`: a slope fit needs at least {} grid sizes",
                        beamhom::analysis::MIN_FIT_POINTS
                    );
                }
                if self.lattice != LatticeFamily::Triangular {
                    bail!("invalid `lattice`: convergence studies run on the triangular lattice");
                }
                if self.model == ModelKind::Discrete {
                    bail!("invalid `model`: convergence compares against `continuum` or `km`");
                }
                if self.load_family == ConvergenceLoad::ScaledForce && self.n_list.iter().any(|&n| n < 4) {
                    bail!("invalid `n_list`: the scaled-force load needs N >= 4");
                }
            }
            CommandKind::Verify => {
                if self.n_list.len() < 2 {
                    bail!("invalid `n_list`: verify needs at least two grid sizes");
                }
                if self.identity_trials == 0 {
                    bail!("invalid `identity_trials`: must be positive");
                }
            }
        }
        Ok(())
    }

    pub fn pair(&self) -> ModelPair {
        match self.model {
            ModelKind::KumarMcDowell => ModelPair::DiscreteKm,
            _ => ModelPair::DiscreteContinuum,
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}
