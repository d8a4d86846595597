//! Sweeps and reports comparing the discrete frame with its continuum limits.
//!
//! All sweeps parallelise over modes and then reduce sequentially in the
//! fixed order of [`freq_set`], so every report is reproducible bit for bit.

use std::fmt::Write as _;

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::{energy_identities_check, BeamParams};
use crate::error::{Error, Result};
use crate::fourier::{freq_set, nonzero_freq_set, FreqIndex, SeminormOrder};
use crate::lattice::{LatticeFamily, LatticeSpec};
use crate::linalg::{inverse3_adjugate, inverse3_lu, spectral_norm, sym2_norm};
use crate::solver::{field_errors, solve_field, LoadSpec};
use crate::symbols::{
    b_reduction_gap, schur, sincos_bound_check, symbol_continuum, symbol_discrete, symbol_km_unchecked,
    verify_strange_identity, MicropolarSystem, ModeSymbol, ModelKind, SinCosExponents,
};

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

/// Header of every per-mode or summary CSV.
pub const CSV_HEADER: &str = "eps,rho_star,ip,jp,value,index_kind";

/// Which continuum model the discrete symbol is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelPair {
    DiscreteContinuum,
    DiscreteKm,
}

impl ModelPair {
    pub fn reference_kind(self) -> ModelKind {
        match self {
            ModelPair::DiscreteContinuum => ModelKind::Continuum,
            ModelPair::DiscreteKm => ModelKind::KumarMcDowell,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelPair::DiscreteContinuum => "discrete-continuum",
            ModelPair::DiscreteKm => "discrete-km",
        }
    }
}

impl std::str::FromStr for ModelPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete-continuum" | "continuum" => Ok(ModelPair::DiscreteContinuum),
            "discrete-km" | "km" => Ok(ModelPair::DiscreteKm),
            other => Err(Error::invalid(
                "pair",
                format!("expected `discrete-continuum` or `discrete-km`, got `{other}`"),
            )),
        }
    }
}

/// Even/odd grid-size convention of a run.
pub fn parity_label(n_list: &[usize]) -> &'static str {
    let even = n_list.iter().filter(|n| *n % 2 == 0).count();
    match (even, n_list.len() - even) {
        (_, 0) => "even",
        (0, _) => "odd",
        _ => "mixed",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InverseRoute {
    Lu,
    Adjugate,
}

fn invert(m: &Matrix3<Complex64>, route: InverseRoute, mode: FreqIndex) -> Result<Matrix3<Complex64>> {
    let inv = match route {
        InverseRoute::Lu => inverse3_lu(m),
        InverseRoute::Adjugate => inverse3_adjugate(m),
    };
    inv.ok_or(Error::SingularSymbol { mode })
}

/// Reference symbol of a pair. The Kumar-McDowell symbol is taken without the
/// positivity check on `c_KM`: the 3x3 inverse only needs it to be invertible.
fn reference_symbol(spec: &LatticeSpec, mode: FreqIndex, eps: f64, pair: ModelPair) -> Result<ModeSymbol> {
    match pair {
        ModelPair::DiscreteContinuum => Ok(symbol_continuum(spec, mode)),
        ModelPair::DiscreteKm => symbol_km_unchecked(spec, mode, eps),
    }
}

/// `|| S_D^{-1} - S_X^{-1} ||` in the spectral norm, `X` the pair's reference model.
pub fn diff_index(spec: &LatticeSpec, mode: FreqIndex, eps: f64, pair: ModelPair) -> Result<f64> {
    diff_index_with(spec, mode, eps, pair, InverseRoute::Lu)
}

pub fn diff_index_with(
    spec: &LatticeSpec,
    mode: FreqIndex,
    eps: f64,
    pair: ModelPair,
    route: InverseRoute,
) -> Result<f64> {
    if mode.is_zero() {
        return Err(Error::ZeroMode);
    }
    let d = symbol_discrete(spec, mode, eps)?;
    let r = reference_symbol(spec, mode, eps, pair)?;
    let gap = invert(&d.matrix(), route, mode)? - invert(&r.matrix(), route, mode)?;
    spectral_norm(&DMatrix::from_iterator(3, 3, gap.iter().copied()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lattice: LatticeFamily,
    pub n_list: Vec<usize>,
    pub rho_star_list: Vec<f64>,
    pub low_freq_cutoff: i64,
    pub pair: ModelPair,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::invalid("n_list", "must not be empty"));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) || self.n_list[0] < 2 {
            return Err(Error::invalid("n_list", "must be strictly ascending with every N >= 2"));
        }
        if self.rho_star_list.is_empty() || self.rho_star_list.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::invalid("rho_star_list", "must be non-empty with positive entries"));
        }
        if self.low_freq_cutoff < 1 {
            return Err(Error::invalid("low_freq_cutoff", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub eps: f64,
    pub rho_star: f64,
    pub full_max: f64,
    pub full_argmax: FreqIndex,
    pub low_max: f64,
    pub low_argmax: FreqIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub config: SweepConfig,
    pub parity: String,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Rows for one `rho*`, in ascending `N`.
    pub fn series(&self, rho_star: f64) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.rho_star == rho_star).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},diff_full_max",
                r.eps, r.rho_star, r.full_argmax.ip, r.full_argmax.jp, r.full_max
            );
            let _ = writeln!(
                out,
                "{},{},{},{},{},diff_low_max",
                r.eps, r.rho_star, r.low_argmax.ip, r.low_argmax.jp, r.low_max
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid("report", e.to_string()))
    }
}

fn argmax(values: &[(FreqIndex, f64)]) -> (FreqIndex, f64) {
    values
        .iter()
        .fold((FreqIndex::ZERO, f64::NEG_INFINITY), |acc, &(m, v)| if v > acc.1 { (m, v) } else { acc })
}

/// Largest `diff` over all of `F_N°` and over `|i'| + |j'| <= M`, per `(N, rho*)`.
pub fn max_diff_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &rho in &cfg.rho_star_list {
        let spec = LatticeSpec::of_family(cfg.lattice, rho)?;
        for &n in &cfg.n_list {
            let eps = 1.0 / n as f64;
            let values: Vec<(FreqIndex, f64)> = nonzero_freq_set(n)
                .par_iter()
                .map(|&m| diff_index(&spec, m, eps, cfg.pair).map(|v| (m, v)))
                .collect::<Result<_>>()?;
            let (full_argmax, full_max) = argmax(&values);
            let low: Vec<(FreqIndex, f64)> =
                values.iter().copied().filter(|(m, _)| m.l1() <= cfg.low_freq_cutoff).collect();
            let (low_argmax, low_max) = argmax(&low);
            rows.push(SweepRow {
                n,
                eps,
                rho_star: rho,
                full_max,
                full_argmax,
                low_max,
                low_argmax,
            });
        }
    }
    Ok(SweepReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        parity: parity_label(&cfg.n_list).to_string(),
        rows,
    })
}

/// The three optimality indexes at one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrIndexes {
    pub err0: f64,
    pub err1: f64,
    pub err2: f64,
}

/// `Err_0 = eps^-2 ||B_D^-1 - B_C^-1||`,
/// `Err_1 = eps^-2 |B_D^-1 b_D / c_D - B_C^-1 b_C / c_C| / (|i'| + |j'|)`,
/// `Err_2 = eps^-2 |1/c_D - 1/c_C - b_D.B_D^-1 b_D / c_D^2 + b_C.B_C^-1 b_C / c_C^2| / (i'^2 + j'^2)`,
/// evaluated through the Schur blocks.
pub fn err_indexes(spec: &LatticeSpec, mode: FreqIndex, eps: f64) -> Result<ErrIndexes> {
    if mode.is_zero() {
        return Err(Error::ZeroMode);
    }
    let sd = symbol_discrete(spec, mode, eps)?;
    let sc = symbol_continuum(spec, mode);
    let (bd, bc) = (schur(&sd)?, schur(&sc)?);
    let (id, ic) = (bd.inverse()?, bc.inverse()?);
    let e2inv = 1.0 / (eps * eps);
    let err0 = e2inv * sym2_norm(&(id - ic));
    // b = i b_im, so B^-1 b / c has modulus |B^-1 b_im| / c and b.B^-1 b = -b_im.B^-1 b_im
    let ud = id * sd.b_im / sd.c;
    let uc = ic * sc.b_im / sc.c;
    let err1 = e2inv * (ud - uc).norm() / mode.l1() as f64;
    let td = 1.0 / sd.c + sd.b_im.dot(&(id * sd.b_im)) / (sd.c * sd.c);
    let tc = 1.0 / sc.c + sc.b_im.dot(&(ic * sc.b_im)) / (sc.c * sc.c);
    let err2 = e2inv * (td - tc).abs() / mode.sq_norm();
    Ok(ErrIndexes { err0, err1, err2 })
}

/// The same indexes read off the blocks of `S_D^-1 - S_C^-1` from a full 3x3 inverse.
pub fn err_indexes_via_inverse(spec: &LatticeSpec, mode: FreqIndex, eps: f64, route: InverseRoute) -> Result<ErrIndexes> {
    if mode.is_zero() {
        return Err(Error::ZeroMode);
    }
    let d = invert(&symbol_discrete(spec, mode, eps)?.matrix(), route, mode)?;
    let c = invert(&symbol_continuum(spec, mode).matrix(), route, mode)?;
    let g = d - c;
    let e2inv = 1.0 / (eps * eps);
    let uu = Matrix2::new(g[(0, 0)].re, g[(0, 1)].re, g[(1, 0)].re, g[(1, 1)].re);
    let ut = Vector2::new(g[(0, 2)].norm(), g[(1, 2)].norm());
    Ok(ErrIndexes {
        err0: e2inv * sym2_norm(&(0.5 * (uu + uu.transpose()))),
        err1: e2inv * ut.norm() / mode.l1() as f64,
        err2: e2inv * g[(2, 2)].norm() / mode.sq_norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
    pub argmin: FreqIndex,
    pub argmax: FreqIndex,
}

fn min_max(values: impl Iterator<Item = (FreqIndex, f64)>) -> MinMax {
    let mut mm = MinMax {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        argmin: FreqIndex::ZERO,
        argmax: FreqIndex::ZERO,
    };
    for (m, v) in values {
        if v < mm.min {
            mm.min = v;
            mm.argmin = m;
        }
        if v > mm.max {
            mm.max = v;
            mm.argmax = m;
        }
    }
    mm
}

/// Err maps for one `(N, rho*)`, indexed like [`freq_set`] (`i'` major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrPanel {
    pub n: usize,
    pub eps: f64,
    pub rho_star: f64,
    pub modes: Vec<FreqIndex>,
    pub err0: Vec<f64>,
    pub err1: Vec<f64>,
    pub err2: Vec<f64>,
    /// Summaries over `F_N°`, i.e. excluding the filled zero mode.
    pub summary: [MinMax; 3],
}

impl ErrPanel {
    pub fn values(&self, index: usize) -> &[f64] {
        match index {
            0 => &self.err0,
            1 => &self.err1,
            _ => &self.err2,
        }
    }

    pub fn at(&self, index: usize, mode: FreqIndex) -> Option<f64> {
        let k = self.modes.iter().position(|m| *m == mode)?;
        Some(self.values(index)[k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrMapReport {
    pub schema_version: u32,
    pub lattice: LatticeFamily,
    pub parity: String,
    pub zero_mode_fill: String,
    pub panels: Vec<ErrPanel>,
}

impl ErrMapReport {
    pub fn panel(&self, n: usize, rho_star: f64) -> Option<&ErrPanel> {
        self.panels.iter().find(|p| p.n == n && p.rho_star == rho_star)
    }

    /// One row per `(eps, rho*, mode, index)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.panels {
            for (idx, name) in ["err0", "err1", "err2"].iter().enumerate() {
                for (m, v) in p.modes.iter().zip(p.values(idx)) {
                    let _ = writeln!(out, "{},{},{},{},{},{}", p.eps, p.rho_star, m.ip, m.jp, v, name);
                }
            }
        }
        out
    }

    /// Min/max per panel and index.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.panels {
            for (idx, name) in ["err0", "err1", "err2"].iter().enumerate() {
                let s = p.summary[idx];
                let _ = writeln!(out, "{},{},{},{},{},{}_min", p.eps, p.rho_star, s.argmin.ip, s.argmin.jp, s.min, name);
                let _ = writeln!(out, "{},{},{},{},{},{}_max", p.eps, p.rho_star, s.argmax.ip, s.argmax.jp, s.max, name);
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid("report", e.to_string()))
    }
}

/// Err maps over `F_N` for every `(N, rho*)`; the zero mode is filled with the
/// average of its four neighbours `(+-1, 0)`, `(0, +-1)`.
pub fn err_maps(lattice: LatticeFamily, n_list: &[usize], rho_star_list: &[f64]) -> Result<ErrMapReport> {
    if n_list.is_empty() || rho_star_list.is_empty() {
        return Err(Error::invalid("n_list", "need at least one grid size and one rho*"));
    }
    if n_list.iter().any(|&n| n < 3) {
        return Err(Error::invalid("n_list", "the zero-mode fill needs N >= 3"));
    }
    let mut panels = Vec::new();
    for &rho in rho_star_list {
        let spec = LatticeSpec::of_family(lattice, rho)?;
        for &n in n_list {
            let eps = 1.0 / n as f64;
            let modes = freq_set(n);
            let vals: Vec<ErrIndexes> = modes
                .par_iter()
                .map(|&m| {
                    if m.is_zero() {
                        Ok(ErrIndexes { err0: 0.0, err1: 0.0, err2: 0.0 })
                    } else {
                        err_indexes(&spec, m, eps)
                    }
                })
                .collect::<Result<_>>()?;
            let mut err0: Vec<f64> = vals.iter().map(|v| v.err0).collect();
            let mut err1: Vec<f64> = vals.iter().map(|v| v.err1).collect();
            let mut err2: Vec<f64> = vals.iter().map(|v| v.err2).collect();
            let pos = |m: FreqIndex| modes.iter().position(|x| *x == m).expect("neighbour of zero mode in F_N");
            let zero = pos(FreqIndex::ZERO);
            let neighbours: Vec<usize> = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .map(|&(a, b)| pos(FreqIndex::new(a, b)))
                .collect();
            for arr in [&mut err0, &mut err1, &mut err2] {
                arr[zero] = neighbours.iter().map(|&k| arr[k]).sum::<f64>() / 4.0;
            }
            let summarise = |arr: &[f64]| {
                min_max(modes.iter().zip(arr).filter(|(m, _)| !m.is_zero()).map(|(m, v)| (*m, *v)))
            };
            let summary = [summarise(&err0), summarise(&err1), summarise(&err2)];
            panels.push(ErrPanel {
                n,
                eps,
                rho_star: rho,
                modes,
                err0,
                err1,
                err2,
                summary,
            });
        }
    }
    Ok(ErrMapReport {
        schema_version: SCHEMA_VERSION,
        lattice,
        parity: parity_label(n_list).to_string(),
        zero_mode_fill: "four-neighbour-average".to_string(),
        panels,
    })
}

/// `min over F_N° of lambda_min(B) / ((i')^2 + (j')^2)` and where it is attained.
pub fn coercivity_scan(spec: &LatticeSpec, n: usize, kind: ModelKind) -> Result<(f64, FreqIndex)> {
    let eps = 1.0 / n as f64;
    let vals: Vec<(FreqIndex, f64)> = nonzero_freq_set(n)
        .par_iter()
        .map(|&m| {
            let sym = match kind {
                ModelKind::Discrete => symbol_discrete(spec, m, eps)?,
                ModelKind::Continuum => symbol_continuum(spec, m),
                ModelKind::KumarMcDowell => crate::symbols::symbol_km(spec, m, eps)?,
            };
            Ok((m, schur(&sym)?.lambda_min() / m.sq_norm()))
        })
        .collect::<Result<_>>()?;
    let mm = min_max(vals.into_iter());
    Ok((mm.min, mm.argmin))
}

/// `max over F_N° of eps^-2 ||B_D^-1 - B_C^-1||`.
pub fn inverse_difference_scan(spec: &LatticeSpec, n: usize) -> Result<(f64, FreqIndex)> {
    let eps = 1.0 / n as f64;
    let vals: Vec<(FreqIndex, f64)> = nonzero_freq_set(n)
        .par_iter()
        .map(|&m| {
            let bd = schur(&symbol_discrete(spec, m, eps)?)?.inverse()?;
            let bc = schur(&symbol_continuum(spec, m))?.inverse()?;
            Ok((m, sym2_norm(&(bd - bc)) / (eps * eps)))
        })
        .collect::<Result<_>>()?;
    let mm = min_max(vals.into_iter());
    Ok((mm.max, mm.argmax))
}

/// `max over F_N° of |b_D/c_D - b_C/c_C| / (eps^2 (|i'|^3 + |j'|^3))`.
pub fn b_reduction_scan(spec: &LatticeSpec, n: usize) -> Result<f64> {
    let eps = 1.0 / n as f64;
    let vals: Vec<f64> = nonzero_freq_set(n)
        .par_iter()
        .map(|&m| {
            let w = (m.ip.abs().pow(3) + m.jp.abs().pow(3)) as f64;
            Ok(b_reduction_gap(spec, m, eps)? / (eps * eps * w))
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `max over F_N° of ||S_D - S_C|| / (eps^2 ((i')^2 + (j')^2)^2)`.
pub fn symbol_limit_scan(spec: &LatticeSpec, n: usize) -> Result<f64> {
    let eps = 1.0 / n as f64;
    let vals: Vec<f64> = nonzero_freq_set(n)
        .par_iter()
        .map(|&m| {
            let g = symbol_discrete(spec, m, eps)?.matrix() - symbol_continuum(spec, m).matrix();
            let norm = spectral_norm(&DMatrix::from_iterator(3, 3, g.iter().copied()))?;
            Ok(norm / (eps * eps * m.sq_norm().powi(2)))
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `||S_D(eps) - S_PDE||` at a fixed mode of the rectangular lattice, where
/// `S_PDE` is the symbol of the micropolar balance equations.
pub fn rectangular_symbol_gap(rho_star: f64, mode: FreqIndex, n: usize) -> Result<f64> {
    let spec = LatticeSpec::rectangular(rho_star)?;
    let pde = MicropolarSystem::rectangular(rho_star)?.operator().symbol(mode);
    let g = symbol_discrete(&spec, mode, 1.0 / n as f64)?.matrix() - pde;
    spectral_norm(&DMatrix::from_iterator(3, 3, g.iter().copied()))
}

/// Load used in a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum LoadFamily {
    /// Force at a fixed mode, no torque.
    Force { mode: FreqIndex, amplitude: [f64; 2] },
    /// Torque at a fixed mode, no force.
    Torque { mode: FreqIndex, amplitude: f64 },
    /// Force and torque at a fixed mode.
    Mixed { mode: FreqIndex, force: [f64; 2], torque: f64 },
    /// Unit force along x at mode `(round(fraction * N), 0)`: fixed `L^2` norm while the
    /// frequency moves with the grid.
    ScaledForce { fraction: f64 },
    Zero,
}

impl LoadFamily {
    pub fn describe(&self) -> String {
        match self {
            LoadFamily::Force { mode, amplitude } => {
                format!("f = ({}, {}) at mode {mode}, tau = 0", amplitude[0], amplitude[1])
            }
            LoadFamily::Torque { mode, amplitude } => format!("f = 0, tau = {amplitude} at mode {mode}"),
            LoadFamily::Mixed { mode, force, torque } => {
                format!("f = ({}, {}), tau = {torque} at mode {mode}", force[0], force[1])
            }
            LoadFamily::ScaledForce { fraction } => {
                format!("f = (1, 0) at mode (round({fraction} N), 0), tau = 0")
            }
            LoadFamily::Zero => "f = 0, tau = 0".to_string(),
        }
    }

    pub fn loads(&self, n: usize) -> Result<LoadSpec> {
        let mut loads = LoadSpec::zeros(n)?;
        let c = |v: f64| Complex64::new(v, 0.0);
        match *self {
            LoadFamily::Force { mode, amplitude } => {
                loads.set_mode(mode, Vector2::new(c(amplitude[0]), c(amplitude[1])), c(0.0))?
            }
            LoadFamily::Torque { mode, amplitude } => loads.set_mode(mode, Vector2::zeros(), c(amplitude))?,
            LoadFamily::Mixed { mode, force, torque } => {
                loads.set_mode(mode, Vector2::new(c(force[0]), c(force[1])), c(torque))?
            }
            LoadFamily::ScaledForce { fraction } => {
                if !(fraction > 0.0 && fraction < 0.5) {
                    return Err(Error::invalid("fraction", "must lie in (0, 1/2)"));
                }
                let ip = (fraction * n as f64).round() as i64;
                loads.set_mode(FreqIndex::new(ip.max(1), 0), Vector2::new(c(1.0), c(0.0)), c(0.0))?
            }
            LoadFamily::Zero => {}
        }
        Ok(loads)
    }
}

/// Error measure whose decay is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMetric {
    /// `||u_D - u_X||_0`
    DisplacementL2,
    /// `||theta_D - theta_X||_0`
    RotationL2,
    /// `|u_D - u_X|_1`
    DisplacementH1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub eps: f64,
    pub u_l2: f64,
    pub theta_l2: f64,
    pub u_h1: f64,
}

impl ConvergenceRow {
    pub fn metric(&self, m: ErrorMetric) -> f64 {
        match m {
            ErrorMetric::DisplacementL2 => self.u_l2,
            ErrorMetric::RotationL2 => self.theta_l2,
            ErrorMetric::DisplacementH1 => self.u_h1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub load: LoadFamily,
    pub load_description: String,
    pub pair: ModelPair,
    pub rho_star: f64,
    pub metric: ErrorMetric,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log(error)` against `log(eps)`; `None` when every error is zero.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Root-mean-square residual of the fit in natural-log units.
    pub residual: Option<f64>,
    /// Every error is exactly zero.
    pub exact: bool,
}

/// Least-squares line through `(x, y)`: `(slope, intercept, rms residual)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: x.len().min(y.len()) });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("x", "needs at least two distinct abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    Ok((slope, intercept, (rss / n).sqrt()))
}

/// Minimum number of usable grid sizes for a slope fit.
pub const MIN_FIT_POINTS: usize = 4;

/// Solve both models on each grid, measure the error and fit its order in `eps`.
pub fn convergence_study(
    load: LoadFamily,
    pair: ModelPair,
    n_list: &[usize],
    rho_star: f64,
    metric: ErrorMetric,
) -> Result<ConvergenceReport> {
    if n_list.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_FIT_POINTS, got: n_list.len() });
    }
    let spec = LatticeSpec::triangular(rho_star)?;
    let orders = [SeminormOrder::new(1.0)?];
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let loads = load.loads(n)?;
        let d = solve_field(&spec, n, &loads, ModelKind::Discrete)?;
        let r = solve_field(&spec, n, &loads, pair.reference_kind())?;
        let e = field_errors(&d, &r, &orders)?;
        rows.push(ConvergenceRow {
            n,
            eps: 1.0 / n as f64,
            u_l2: e.u_l2,
            theta_l2: e.theta_l2,
            u_h1: e.u_semi[0].1,
        });
    }
    let mut report = ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        load,
        load_description: load.describe(),
        pair,
        rho_star,
        metric,
        rows,
        slope: None,
        intercept: None,
        residual: None,
        exact: false,
    };
    if report.rows.iter().all(|r| r.metric(metric) == 0.0) {
        report.exact = true;
        return Ok(report);
    }
    let usable: Vec<&ConvergenceRow> = report.rows.iter().filter(|r| r.metric(metric) > 0.0).collect();
    if usable.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_FIT_POINTS, got: usable.len() });
    }
    let x: Vec<f64> = usable.iter().map(|r| r.eps.ln()).collect();
    let y: Vec<f64> = usable.iter().map(|r| r.metric(metric).ln()).collect();
    let (slope, intercept, residual) = fit_line(&x, &y)?;
    report.slope = Some(slope);
    report.intercept = Some(intercept);
    report.residual = Some(residual);
    Ok(report)
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,eps,rho_star,u_l2,theta_l2,u_h1\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{},{}", r.n, r.eps, self.rho_star, r.u_l2, r.theta_l2, r.u_h1);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid("report", e.to_string()))
    }
}

/// One named check with its measured value and pass threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryCheck {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub schema_version: u32,
    pub checks: Vec<TheoryCheck>,
}

impl TheoryReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid("report", e.to_string()))
    }
}

/// Grid sizes and stiffness ratios the theory checks run over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryConfig {
    pub n_list: Vec<usize>,
    pub rho_star_list: Vec<f64>,
    pub identity_trials: usize,
    pub seed: u64,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        TheoryConfig {
            n_list: vec![16, 32, 64, 128],
            rho_star_list: vec![0.01, 1.0, 100.0],
            identity_trials: 200,
            seed: 2024,
        }
    }
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

/// Identity, coercivity, trigonometric-bound and inverse-difference checks.
pub fn theory_suite(cfg: &TheoryConfig) -> Result<TheoryReport> {
    if cfg.n_list.len() < 2 || cfg.rho_star_list.is_empty() || cfg.identity_trials == 0 {
        return Err(Error::invalid("theory", "need two grid sizes, one rho* and one identity trial"));
    }
    let mut checks = Vec::new();
    let mut push = |name: &str, measured: f64, threshold: f64, passed: bool, detail: String| {
        checks.push(TheoryCheck {
            name: name.to_string(),
            measured,
            threshold,
            passed,
            detail,
        })
    };

    let mut gap = 0.0f64;
    for n in 1..=5 {
        gap = gap.max(verify_strange_identity(n, cfg.identity_trials, cfg.seed + n as u64)?);
    }
    push("strange_identity", gap, 1e-12, gap <= 1e-12, format!("n = 1..5, {} trials each", cfg.identity_trials));

    let mut beam_gap = 0.0f64;
    for &n in &cfg.n_list {
        beam_gap = beam_gap.max(energy_identities_check(&BeamParams::new(1.0, 1.0 / n as f64)?, 200, cfg.seed));
    }
    push("bending_energy_rewriting", beam_gap, 1e-12, beam_gap <= 1e-12, "random dof vectors".into());

    for &rho in &cfg.rho_star_list {
        let spec = LatticeSpec::triangular(rho)?;
        for kind in [ModelKind::Discrete, ModelKind::Continuum] {
            let mins: Vec<f64> = cfg
                .n_list
                .iter()
                .map(|&n| coercivity_scan(&spec, n, kind).map(|p| p.0))
                .collect::<Result<_>>()?;
            let lo = mins.iter().cloned().fold(f64::INFINITY, f64::min);
            let s = spread(&mins);
            push(
                &format!("coercivity_{kind}_rho{rho}"),
                s,
                1.2,
                lo > 0.0 && s <= 1.2,
                format!("min ratios {mins:?}"),
            );
        }

        let inv: Vec<f64> = cfg
            .n_list
            .iter()
            .map(|&n| inverse_difference_scan(&spec, n).map(|p| p.0))
            .collect::<Result<_>>()?;
        let s = spread(&inv);
        push(&format!("inverse_difference_rho{rho}"), s, 1.5, s <= 1.5, format!("maxima {inv:?}"));

        let br: Vec<f64> = cfg.n_list.iter().map(|&n| b_reduction_scan(&spec, n)).collect::<Result<_>>()?;
        let s = spread(&br);
        push(&format!("b_reduction_rho{rho}"), s, 1.5, br.iter().all(|v| v.is_finite()) && s <= 1.5, format!("constants {br:?}"));

        let sl: Vec<f64> = cfg.n_list.iter().map(|&n| symbol_limit_scan(&spec, n)).collect::<Result<_>>()?;
        let s = spread(&sl);
        push(&format!("symbol_limit_rho{rho}"), s, 1.5, sl.iter().all(|v| v.is_finite()) && s <= 1.5, format!("constants {sl:?}"));
    }

    let exponent_sets = [(1, 0, 0, 0), (0, 1, 0, 0), (2, 0, 1, 0), (1, 1, 0, 0), (2, 2, 1, 1), (1, 2, 2, 0), (0, 0, 2, 2)];
    for (m, n, mc, nc) in exponent_sets {
        let e = SinCosExponents { m, n, m_cos: mc, n_cos: nc };
        let r = sincos_bound_check(e, &cfg.n_list)?;
        let cs: Vec<f64> = r.per_n.iter().map(|p| p.1).collect();
        let s = spread(&cs);
        push(
            &format!("sincos_{m}{n}{mc}{nc}"),
            r.constant,
            f64::INFINITY,
            r.constant.is_finite() && s <= 2.0,
            format!("constants per N {cs:?}"),
        );
    }

    Ok(TheoryReport {
        schema_version: SCHEMA_VERSION,
        checks,
    })
}
