//! Command execution. Everything is computed first; files are written at the end by one writer.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;

use beamhom::analysis::{
    convergence_study, err_maps, max_diff_sweep, theory_suite, ConvergenceReport, ErrMapReport, ErrorMetric,
    LoadFamily, MinMax, SweepConfig, SweepReport, TheoryConfig, TheoryReport, SCHEMA_VERSION,
};
use beamhom::fourier::REAL_TOLERANCE;
use beamhom::solver::{solve_field, LoadSpec};
use beamhom::{Complex64, FreqIndex, LatticeSpec};

use crate::config::{preset_err_index, CommandKind, ConvergenceLoad, Format, RunConfig};
use crate::plot::{heatmap, line_plot, HeatPanel, Series};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Result of a run: written files, and whether every check passed (only `verify` can fail).
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub artifacts: Vec<PathBuf>,
    pub passed: bool,
    pub summary: String,
}

#[derive(Debug, Serialize)]
struct ArtifactEntry {
    file: String,
    bytes: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    library_version: &'static str,
    schema_version: u32,
    config: &'a RunConfig,
    artifacts: Vec<ArtifactEntry>,
}

struct Outputs {
    files: Vec<(String, String)>,
    passed: bool,
    summary: String,
}

impl Outputs {
    fn new() -> Self {
        Outputs {
            files: Vec::new(),
            passed: true,
            summary: String::new(),
        }
    }

    fn add(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let out = match cfg.command {
        CommandKind::Solve => run_solve(cfg)?,
        CommandKind::DiffSweep => run_diff_sweep(cfg)?,
        CommandKind::ErrMaps => run_err_maps(cfg)?,
        CommandKind::Convergence => run_convergence(cfg)?,
        CommandKind::Verify => run_verify(cfg)?,
    };
    write_outputs(cfg, out)
}

fn write_outputs(cfg: &RunConfig, out: Outputs) -> Result<RunOutcome> {
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("cannot create output directory `{}`", cfg.out.display()))?;
    let mut artifacts = Vec::new();
    let mut entries = Vec::new();
    for (name, body) in &out.files {
        let path = cfg.out.join(name);
        std::fs::write(&path, body).with_context(|| format!("cannot write `{}`", path.display()))?;
        entries.push(ArtifactEntry {
            file: name.clone(),
            bytes: body.len(),
        });
        artifacts.push(path);
    }
    let manifest = Manifest {
        tool: "beamhom",
        version: env!("CARGO_PKG_VERSION"),
        library_version: beamhom::VERSION,
        schema_version: SCHEMA_VERSION,
        config: cfg,
        artifacts: entries,
    };
    let path = cfg.out.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("cannot write `{}`", path.display()))?;
    artifacts.push(path);
    Ok(RunOutcome {
        artifacts,
        passed: out.passed,
        summary: out.summary,
    })
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Loads `amp cos(2 pi (i' a + j' b))`: half the amplitude on `m` and on `-m`,
/// or all of it when `m` is its own partner.
pub fn build_loads(n: usize, loads: &[crate::config::ModeLoad]) -> Result<LoadSpec> {
    let mut spec = LoadSpec::zeros(n)?;
    for l in loads {
        let m = FreqIndex::new(l.ip, l.jp).checked(n)?;
        let partner = FreqIndex::new(-l.ip, -l.jp);
        let self_paired = partner.slot(n) == m.slot(n);
        let share = if self_paired { 1.0 } else { 0.5 };
        for target in if self_paired { vec![m] } else { vec![m, partner] } {
            let cur = spec.rhs(target);
            spec.f_hat.set_mode(target, 0, cur[0] + c(share * l.fx));
            spec.f_hat.set_mode(target, 1, cur[1] + c(share * l.fy));
            spec.tau_hat.set_mode(target, 0, cur[2] + c(share * l.tau));
        }
    }
    Ok(spec)
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    schema_version: u32,
    n: usize,
    rho_star: f64,
    model: String,
    max_abs_u: f64,
    max_abs_theta: f64,
    mean_theta: f64,
}

fn run_solve(cfg: &RunConfig) -> Result<Outputs> {
    let n = cfg.n_list[0];
    let rho = cfg.rho_star_list[0];
    let spec = LatticeSpec::of_family(cfg.lattice, rho)?;
    let loads = build_loads(n, &cfg.loads)?;
    let sol = solve_field(&spec, n, &loads, cfg.model)?;
    let (u, theta) = sol.to_spatial()?.to_real(REAL_TOLERANCE)?;
    let mut out = Outputs::new();
    if cfg.wants(Format::Csv) {
        let mut csv = String::from("i,j,u_x,u_y,theta\n");
        for i in 0..n {
            for j in 0..n {
                csv.push_str(&format!("{i},{j},{},{},{}\n", u[[i, j, 0]], u[[i, j, 1]], theta[[i, j]]));
            }
        }
        out.add("solution.csv", csv);
    }
    let summary = SolveSummary {
        schema_version: SCHEMA_VERSION,
        n,
        rho_star: rho,
        model: cfg.model.to_string(),
        max_abs_u: u.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        max_abs_theta: theta.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        mean_theta: theta.iter().sum::<f64>() / (n * n) as f64,
    };
    if cfg.wants(Format::Json) {
        out.add("solution.json", json(&summary)?);
    }
    if cfg.wants(Format::Svg) {
        let field = |k: usize, title: &str| {
            let cells: Vec<f64> = (0..n * n)
                .map(|idx| if k < 2 { u[[idx / n, idx % n, k]] } else { theta[[idx / n, idx % n]] })
                .collect();
            let (min, max) = cells.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
            HeatPanel { title: title.to_string(), side: n, cells, min, max }
        };
        let panels = [field(0, "u_x"), field(1, "u_y"), field(2, "theta")];
        out.add("solution.svg", heatmap(&format!("{} solution, N = {n}, rho* = {rho}", cfg.model), &panels, 3));
    }
    out.summary = format!(
        "solved N = {n}, rho* = {rho}, model {}: max |u| = {:.6e}, max |theta| = {:.6e}",
        cfg.model, summary.max_abs_u, summary.max_abs_theta
    );
    Ok(out)
}

fn sweep_config(cfg: &RunConfig) -> SweepConfig {
    SweepConfig {
        lattice: cfg.lattice,
        n_list: cfg.n_list.clone(),
        rho_star_list: cfg.rho_star_list.clone(),
        low_freq_cutoff: cfg.cutoff,
        pair: cfg.pair(),
    }
}

pub fn sweep_svg(report: &SweepReport) -> String {
    let mut series = Vec::new();
    for &rho in &report.config.rho_star_list {
        let rows = report.series(rho);
        series.push(Series {
            label: format!("rho* = {rho}, all"),
            points: rows.iter().map(|r| (r.n as f64, r.full_max)).collect(),
            dashed: false,
        });
        series.push(Series {
            label: format!("rho* = {rho}, |i'|+|j'| <= {}", report.config.low_freq_cutoff),
            points: rows.iter().map(|r| (r.n as f64, r.low_max)).collect(),
            dashed: true,
        });
    }
    line_plot(&format!("max diff, {}", report.config.pair.label()), "N", "max diff", &series)
}

fn run_diff_sweep(cfg: &RunConfig) -> Result<Outputs> {
    let report = max_diff_sweep(&sweep_config(cfg))?;
    let mut out = Outputs::new();
    if cfg.wants(Format::Csv) {
        out.add("diff_sweep.csv", report.to_csv());
    }
    if cfg.wants(Format::Json) {
        out.add("diff_sweep.json", report.to_json()? + "\n");
    }
    if cfg.wants(Format::Svg) {
        out.add("diff_sweep.svg", sweep_svg(&report));
    }
    out.summary = format!("diff sweep ({}) over {} settings", report.config.pair.label(), report.rows.len());
    Ok(out)
}

#[derive(Debug, Serialize)]
struct ErrPanelSummary {
    n: usize,
    eps: f64,
    rho_star: f64,
    err0: MinMax,
    err1: MinMax,
    err2: MinMax,
}

#[derive(Debug, Serialize)]
struct ErrMapSummary {
    schema_version: u32,
    lattice: String,
    parity: String,
    zero_mode_fill: String,
    panels: Vec<ErrPanelSummary>,
}

pub fn err_map_svg(report: &ErrMapReport, index: usize, rho_list: &[f64]) -> String {
    let panels: Vec<HeatPanel> = report
        .panels
        .iter()
        .map(|p| HeatPanel {
            title: format!("eps = 1/{}, rho* = {}", p.n, p.rho_star),
            side: p.n,
            cells: p.values(index).to_vec(),
            min: p.summary[index].min,
            max: p.summary[index].max,
        })
        .collect();
    // report panels are rho-major; lay them out with one row per eps and one column per rho*
    let n_eps = panels.len() / rho_list.len().max(1);
    let mut ordered = Vec::with_capacity(panels.len());
    for e in 0..n_eps {
        for r in 0..rho_list.len() {
            ordered.push(panels[r * n_eps + e].clone());
        }
    }
    heatmap(&format!("Err{index}"), &ordered, rho_list.len())
}

fn run_err_maps(cfg: &RunConfig) -> Result<Outputs> {
    let report = err_maps(cfg.lattice, &cfg.n_list, &cfg.rho_star_list)?;
    let mut out = Outputs::new();
    if cfg.wants(Format::Csv) {
        out.add("err_maps.csv", report.to_csv());
        out.add("err_maps_summary.csv", report.summary_csv());
    }
    if cfg.wants(Format::Json) {
        let summary = ErrMapSummary {
            schema_version: SCHEMA_VERSION,
            lattice: report.lattice.to_string(),
            parity: report.parity.clone(),
            zero_mode_fill: report.zero_mode_fill.clone(),
            panels: report
                .panels
                .iter()
                .map(|p| ErrPanelSummary {
                    n: p.n,
                    eps: p.eps,
                    rho_star: p.rho_star,
                    err0: p.summary[0],
                    err1: p.summary[1],
                    err2: p.summary[2],
                })
                .collect(),
        };
        out.add("err_maps.json", json(&summary)?);
    }
    if cfg.wants(Format::Svg) {
        let indexes: Vec<usize> = match preset_err_index(cfg.preset.as_deref()) {
            Some(k) => vec![k],
            None => vec![0, 1, 2],
        };
        for k in indexes {
            out.add(format!("err{k}.svg"), err_map_svg(&report, k, &cfg.rho_star_list));
        }
    }
    out.summary = format!("err maps over {} panels", report.panels.len());
    Ok(out)
}

/// Load family and error measure of each convergence setting.
pub fn convergence_setting(load: ConvergenceLoad) -> (LoadFamily, ErrorMetric) {
    let m = FreqIndex::new(1, 0);
    match load {
        ConvergenceLoad::Force => (LoadFamily::Force { mode: m, amplitude: [1.0, 0.0] }, ErrorMetric::DisplacementL2),
        ConvergenceLoad::Torque => (LoadFamily::Torque { mode: m, amplitude: 1.0 }, ErrorMetric::DisplacementL2),
        ConvergenceLoad::Mixed => (
            LoadFamily::Mixed { mode: m, force: [1.0, 0.5], torque: 1.0 },
            ErrorMetric::RotationL2,
        ),
        ConvergenceLoad::ScaledForce => (LoadFamily::ScaledForce { fraction: 0.25 }, ErrorMetric::DisplacementH1),
    }
}

fn run_convergence(cfg: &RunConfig) -> Result<Outputs> {
    let (load, metric) = convergence_setting(cfg.load_family);
    let mut reports: Vec<ConvergenceReport> = Vec::new();
    for &rho in &cfg.rho_star_list {
        reports.push(convergence_study(load, cfg.pair(), &cfg.n_list, rho, metric)?);
    }
    let mut out = Outputs::new();
    if cfg.wants(Format::Csv) {
        let mut csv = String::from("n,eps,rho_star,u_l2,theta_l2,u_h1\n");
        for r in &reports {
            csv.push_str(r.to_csv().split_once('\n').map(|p| p.1).unwrap_or(""));
        }
        out.add("convergence.csv", csv);
    }
    if cfg.wants(Format::Json) {
        out.add("convergence.json", json(&reports)?);
    }
    if cfg.wants(Format::Svg) {
        let series: Vec<Series> = reports
            .iter()
            .map(|r| Series {
                label: format!("rho* = {}, slope {}", r.rho_star, r.slope.map(|s| format!("{s:.3}")).unwrap_or("-".into())),
                points: r.rows.iter().map(|row| (row.eps, row.metric(metric))).collect(),
                dashed: false,
            })
            .collect();
        out.add("convergence.svg", line_plot(&load.describe(), "eps", &format!("{metric:?}"), &series));
    }
    out.summary = reports
        .iter()
        .map(|r| match r.slope {
            Some(s) => format!("rho* = {}: slope {s:.4} (residual {:.3e})", r.rho_star, r.residual.unwrap_or(0.0)),
            None => format!("rho* = {}: exact", r.rho_star),
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(out)
}

fn run_verify(cfg: &RunConfig) -> Result<Outputs> {
    let tc = TheoryConfig {
        n_list: cfg.n_list.clone(),
        rho_star_list: cfg.rho_star_list.clone(),
        identity_trials: cfg.identity_trials,
        seed: cfg.seed,
    };
    let report: TheoryReport = theory_suite(&tc)?;
    let mut out = Outputs::new();
    if cfg.wants(Format::Csv) {
        let mut csv = String::from("name,measured,threshold,passed\n");
        for c in &report.checks {
            csv.push_str(&format!("{},{},{},{}\n", c.name, c.measured, c.threshold, c.passed));
        }
        out.add("verify.csv", csv);
    }
    if cfg.wants(Format::Json) {
        out.add("verify.json", report.to_json()? + "\n");
    }
    out.passed = report.all_passed();
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    out.summary = if failed.is_empty() {
        format!("all {} theory checks passed", report.checks.len())
    } else {
        format!("{} of {} theory checks failed: {}", failed.len(), report.checks.len(), failed.join(", "))
    };
    Ok(out)
}
