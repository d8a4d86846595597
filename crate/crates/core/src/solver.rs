//! Equilibrium solves in Fourier space, one 3x3 system per mode.

use nalgebra::{Vector2, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldGrid;
use crate::fourier::{dft, freq_set, hs_seminorm, l2_norm, Domain, FreqIndex, GridFunction, SeminormOrder};
use crate::lattice::LatticeSpec;
use crate::symbols::{schur, symbol, ModeSymbol, ModelKind};

/// Relative size below which a zero-mode net force counts as zero.
pub const COMPAT_TOLERANCE: f64 = 1e-12;

/// Force and torque Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSpec {
    pub f_hat: GridFunction,
    pub tau_hat: GridFunction,
}

impl LoadSpec {
    pub fn new(f_hat: GridFunction, tau_hat: GridFunction) -> Result<Self> {
        let field = FieldGrid::new(f_hat, tau_hat)?;
        field.u.expect_domain(Domain::Frequency)?;
        Ok(LoadSpec {
            f_hat: field.u,
            tau_hat: field.theta,
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(
            GridFunction::zeros(n, 2, Domain::Frequency)?,
            GridFunction::zeros(n, 1, Domain::Frequency)?,
        )
    }

    /// Transform nodal force and torque fields.
    pub fn from_spatial(force: &GridFunction, torque: &GridFunction) -> Result<Self> {
        Self::new(dft(force)?, dft(torque)?)
    }

    pub fn n(&self) -> usize {
        self.f_hat.n()
    }

    pub fn set_mode(&mut self, mode: FreqIndex, f: Vector2<Complex64>, tau: Complex64) -> Result<()> {
        let mode = mode.checked(self.n())?;
        self.f_hat.set_mode(mode, 0, f[0]);
        self.f_hat.set_mode(mode, 1, f[1]);
        self.tau_hat.set_mode(mode, 0, tau);
        Ok(())
    }

    pub fn rhs(&self, mode: FreqIndex) -> Vector3<Complex64> {
        Vector3::new(
            self.f_hat.at_mode(mode, 0),
            self.f_hat.at_mode(mode, 1),
            self.tau_hat.at_mode(mode, 0),
        )
    }

    /// The zero-mode force must vanish relative to the force magnitude.
    pub fn check_compatible(&self) -> Result<()> {
        let f0 = Vector2::new(self.f_hat.at_mode(FreqIndex::ZERO, 0), self.f_hat.at_mode(FreqIndex::ZERO, 1));
        let scale = self.f_hat.max_abs();
        if f0.norm() > COMPAT_TOLERANCE * scale {
            return Err(Error::IncompatibleLoad {
                fx: f0[0].re,
                fy: f0[1].re,
            });
        }
        Ok(())
    }
}

/// Displacement and rotation Fourier coefficients of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub u_hat: GridFunction,
    pub theta_hat: GridFunction,
    pub kind: ModelKind,
}

impl SolutionField {
    pub fn n(&self) -> usize {
        self.u_hat.n()
    }

    pub fn at_mode(&self, mode: FreqIndex) -> Vector3<Complex64> {
        Vector3::new(
            self.u_hat.at_mode(mode, 0),
            self.u_hat.at_mode(mode, 1),
            self.theta_hat.at_mode(mode, 0),
        )
    }

    pub fn to_spatial(&self) -> Result<FieldGrid> {
        FieldGrid::new(self.u_hat.clone(), self.theta_hat.clone())?.to_spatial()
    }
}

fn zero_mode_solution(sym: &ModeSymbol, rhs: &Vector3<Complex64>) -> Result<Vector3<Complex64>> {
    let f = Vector2::new(rhs[0], rhs[1]);
    if f.norm() > COMPAT_TOLERANCE * rhs[2].norm().max(1.0) {
        return Err(Error::IncompatibleLoad {
            fx: rhs[0].re,
            fy: rhs[1].re,
        });
    }
    if sym.c.is_nan() || sym.c <= 0.0 {
        return Err(Error::NonPositiveRotationBlock { c: sym.c, mode: sym.mode });
    }
    let zero = Complex64::new(0.0, 0.0);
    Ok(Vector3::new(zero, zero, rhs[2] / sym.c))
}

/// Solve `S [u; theta] = rhs` by eliminating the rotation:
/// `B u = f - b tau / c`, then `theta = tau / c + b . u / c`.
///
/// At the zero mode the force part must vanish; the result is `(0, 0, tau / c)`.
pub fn solve_mode(sym: &ModeSymbol, rhs: &Vector3<Complex64>) -> Result<Vector3<Complex64>> {
    if sym.mode.is_zero() {
        return zero_mode_solution(sym, rhs);
    }
    let s = schur(sym)?;
    let f = Vector2::new(rhs[0], rhs[1]);
    let u = s.solve(&s.reduce_rhs(&f, rhs[2]))?;
    let theta = s.recover_theta(rhs[2], &u);
    Ok(Vector3::new(u[0], u[1], theta))
}

/// Same contract as [`solve_mode`] through a pivoted LU solve of the full 3x3 system.
pub fn solve_mode_direct(sym: &ModeSymbol, rhs: &Vector3<Complex64>) -> Result<Vector3<Complex64>> {
    if sym.mode.is_zero() {
        return zero_mode_solution(sym, rhs);
    }
    sym.matrix().lu().solve(rhs).ok_or(Error::SingularSymbol { mode: sym.mode })
}

/// `|S x - rhs|`
pub fn mode_residual(sym: &ModeSymbol, x: &Vector3<Complex64>, rhs: &Vector3<Complex64>) -> f64 {
    (sym.apply(x) - rhs).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolvePath {
    #[default]
    Schur,
    Direct,
}

/// Solve every mode of `F_N` with the Schur path.
pub fn solve_field(spec: &LatticeSpec, n: usize, loads: &LoadSpec, kind: ModelKind) -> Result<SolutionField> {
    solve_field_with(spec, n, loads, kind, SolvePath::Schur)
}

/// Solve every mode of `F_N`. Modes with a zero right-hand side are left at zero
/// without evaluating the symbol there.
pub fn solve_field_with(
    spec: &LatticeSpec,
    n: usize,
    loads: &LoadSpec,
    kind: ModelKind,
    path: SolvePath,
) -> Result<SolutionField> {
    if loads.n() != n {
        return Err(Error::SizeMismatch {
            left: format!("N = {n}"),
            right: format!("load grid N = {}", loads.n()),
        });
    }
    loads.check_compatible()?;
    let eps = 1.0 / n as f64;
    let modes = freq_set(n);
    let solved: Vec<Result<(FreqIndex, Vector3<Complex64>)>> = modes
        .par_iter()
        .map(|&m| {
            let mut rhs = loads.rhs(m);
            if m.is_zero() {
                rhs[0] = Complex64::new(0.0, 0.0);
                rhs[1] = Complex64::new(0.0, 0.0);
            }
            if rhs.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                return Ok((m, Vector3::zeros()));
            }
            let sym = symbol(spec, m, eps, kind)?;
            let x = match path {
                SolvePath::Schur => solve_mode(&sym, &rhs)?,
                SolvePath::Direct => solve_mode_direct(&sym, &rhs)?,
            };
            Ok((m, x))
        })
        .collect();

    let mut u_hat = GridFunction::zeros(n, 2, Domain::Frequency)?;
    let mut theta_hat = GridFunction::zeros(n, 1, Domain::Frequency)?;
    for r in solved {
        let (m, x) = r?;
        u_hat.set_mode(m, 0, x[0]);
        u_hat.set_mode(m, 1, x[1]);
        theta_hat.set_mode(m, 0, x[2]);
    }
    Ok(SolutionField { u_hat, theta_hat, kind })
}

/// Differences between two solutions in `L^2` and in the requested semi-norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldErrors {
    pub u_l2: f64,
    pub theta_l2: f64,
    /// `(s, |u_a - u_b|_s)`
    pub u_semi: Vec<(f64, f64)>,
    /// `(s, |theta_a - theta_b|_s)`
    pub theta_semi: Vec<(f64, f64)>,
}

impl FieldErrors {
    pub fn u_semi_at(&self, s: f64) -> Option<f64> {
        self.u_semi.iter().find(|(k, _)| *k == s).map(|p| p.1)
    }

    pub fn theta_semi_at(&self, s: f64) -> Option<f64> {
        self.theta_semi.iter().find(|(k, _)| *k == s).map(|p| p.1)
    }
}

/// Error norms of `a - b`, computed on the Fourier coefficients.
pub fn field_errors(a: &SolutionField, b: &SolutionField, orders: &[SeminormOrder]) -> Result<FieldErrors> {
    let du = a.u_hat.sub(&b.u_hat)?;
    let dt = a.theta_hat.sub(&b.theta_hat)?;
    let mut u_semi = Vec::with_capacity(orders.len());
    let mut theta_semi = Vec::with_capacity(orders.len());
    for &s in orders {
        u_semi.push((s.value(), hs_seminorm(&du, s)?));
        theta_semi.push((s.value(), hs_seminorm(&dt, s)?));
    }
    Ok(FieldErrors {
        u_l2: l2_norm(&du)?,
        theta_l2: l2_norm(&dt)?,
        u_semi,
        theta_semi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{symbol_continuum, symbol_discrete};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tri() -> LatticeSpec {
        LatticeSpec::triangular(1.0).unwrap()
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let sym = symbol_discrete(&tri(), FreqIndex::new(1, 2), 0.2).unwrap();
        assert_eq!(solve_mode(&sym, &Vector3::zeros()).unwrap(), Vector3::zeros());
    }

    #[test]
    fn zero_mode_block() {
        let sym = symbol_discrete(&tri(), FreqIndex::ZERO, 0.25).unwrap();
        let x = solve_mode(&sym, &Vector3::new(c(0.0, 0.0), c(0.0, 0.0), c(36.0, 0.0))).unwrap();
        assert_eq!(x, Vector3::new(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)));
        assert!(matches!(
            solve_mode(&sym, &Vector3::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))),
            Err(Error::IncompatibleLoad { .. })
        ));
    }

    #[test]
    fn schur_and_direct_paths_agree_with_small_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let n = rng.gen_range(2..50usize);
            let modes = crate::fourier::nonzero_freq_set(n);
            let m = modes[rng.gen_range(0..modes.len())];
            let spec = LatticeSpec::triangular([0.01, 1.0, 100.0][rng.gen_range(0..3)]).unwrap();
            let sym = if rng.gen_bool(0.5) {
                symbol_discrete(&spec, m, 1.0 / n as f64).unwrap()
            } else {
                symbol_continuum(&spec, m)
            };
            let rhs = Vector3::from_fn(|_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let a = solve_mode(&sym, &rhs).unwrap();
            let b = solve_mode_direct(&sym, &rhs).unwrap();
            assert!((a - b).norm() <= 1e-12 * b.norm() * 10.0, "{m}: {a} vs {b}");
            assert!(mode_residual(&sym, &a, &rhs) <= 1e-11 * rhs.norm());
        }
    }

    #[test]
    fn constant_torque_gives_uniform_rotation() {
        let n = 6;
        let mut loads = LoadSpec::zeros(n).unwrap();
        loads.set_mode(FreqIndex::ZERO, Vector2::zeros(), c(1.8, 0.0)).unwrap();
        for kind in [ModelKind::Discrete, ModelKind::Continuum, ModelKind::KumarMcDowell] {
            let sol = solve_field(&tri(), n, &loads, kind).unwrap();
            let sp = sol.to_spatial().unwrap();
            assert!(sp.u.max_abs() < 1e-15);
            for v in sp.theta.values() {
                assert_relative_eq!(v.re, 0.05, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn incompatible_and_mismatched_loads_are_rejected() {
        let mut loads = LoadSpec::zeros(4).unwrap();
        loads.set_mode(FreqIndex::ZERO, Vector2::new(c(1.0, 0.0), c(0.0, 0.0)), c(0.0, 0.0)).unwrap();
        assert!(matches!(
            solve_field(&tri(), 4, &loads, ModelKind::Discrete),
            Err(Error::IncompatibleLoad { .. })
        ));
        assert!(matches!(
            solve_field(&tri(), 5, &LoadSpec::zeros(4).unwrap(), ModelKind::Discrete),
            Err(Error::SizeMismatch { .. })
        ));
        assert!(loads.set_mode(FreqIndex::new(2, 0), Vector2::zeros(), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn single_mode_difference_is_order_eps_squared() {
        let spec = tri();
        let m = FreqIndex::new(1, 0);
        let mut ratios = Vec::new();
        for n in [8usize, 16, 32, 64] {
            let mut loads = LoadSpec::zeros(n).unwrap();
            loads.set_mode(m, Vector2::new(c(1.0, 0.0), c(0.0, 0.0)), c(0.0, 0.0)).unwrap();
            let d = solve_field(&spec, n, &loads, ModelKind::Discrete).unwrap();
            let k = solve_field(&spec, n, &loads, ModelKind::Continuum).unwrap();
            let gap = (d.at_mode(m) - k.at_mode(m)).norm();
            ratios.push(gap * (n * n) as f64);
        }
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(hi / lo < 1.2, "{ratios:?}");
    }

    #[test]
    fn field_error_examples() {
        let n = 5;
        let mut loads = LoadSpec::zeros(n).unwrap();
        loads.set_mode(FreqIndex::new(1, 1), Vector2::new(c(0.3, 0.1), c(0.0, 0.0)), c(0.2, 0.0)).unwrap();
        let a = solve_field(&tri(), n, &loads, ModelKind::Discrete).unwrap();
        let orders = [SeminormOrder::new(1.0).unwrap(), SeminormOrder::new(2.0).unwrap()];
        let e = field_errors(&a, &a, &orders).unwrap();
        assert_eq!(e.u_l2, 0.0);
        assert_eq!(e.u_semi_at(2.0), Some(0.0));

        let mut b = a.clone();
        let d = 0.7;
        let m = FreqIndex::new(1, 0);
        b.u_hat.set_mode(m, 0, a.u_hat.at_mode(m, 0) + d);
        let e = field_errors(&a, &b, &orders).unwrap();
        assert_relative_eq!(e.u_semi_at(1.0).unwrap(), d, max_relative = 1e-14);
        assert_relative_eq!(e.u_l2, d, max_relative = 1e-14);
        assert_eq!(e.theta_l2, 0.0);
    }
}
