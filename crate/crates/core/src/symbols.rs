//! Per-mode Fourier symbols of the discrete frame and its continuum limits.
//!
//! Every symbol has the block form `[[A, b], [-b^T, c]]` with `A` real
//! symmetric, `b` purely imaginary and `c` real, so the 3x3 matrix is
//! Hermitian. `b` is stored through its imaginary part.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FreqIndex;
use crate::lattice::{BeamFamily, LatticeFamily, LatticeSpec};
use crate::linalg::{sym2_eigenvalues, sym2_inverse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Discrete,
    Continuum,
    #[serde(rename = "km")]
    KumarMcDowell,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(ModelKind::Discrete),
            "continuum" => Ok(ModelKind::Continuum),
            "km" | "kumar-mcdowell" => Ok(ModelKind::KumarMcDowell),
            other => Err(Error::invalid(
                "model",
                format!("expected `discrete`, `continuum` or `km`, got `{other}`"),
            )),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Discrete => "discrete",
            ModelKind::Continuum => "continuum",
            ModelKind::KumarMcDowell => "km",
        })
    }
}

/// Contribution of one beam family to a symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolPart {
    pub a: Matrix2<f64>,
    pub b_im: Vector2<f64>,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSymbol {
    pub a: Matrix2<f64>,
    /// `b = i * b_im`
    pub b_im: Vector2<f64>,
    pub c: f64,
    pub kind: ModelKind,
    pub mode: FreqIndex,
    /// Lattice spacing; `None` for the continuum symbol.
    pub eps: Option<f64>,
    /// Per-beam parts in the order of the lattice's beam list.
    pub parts: Vec<SymbolPart>,
}

impl ModeSymbol {
    fn from_parts(parts: Vec<SymbolPart>, kind: ModelKind, mode: FreqIndex, eps: Option<f64>) -> Self {
        let mut a = Matrix2::zeros();
        let mut b_im = Vector2::zeros();
        let mut c = 0.0;
        for p in &parts {
            a += p.a;
            b_im += p.b_im;
            c += p.c;
        }
        ModeSymbol {
            a,
            b_im,
            c,
            kind,
            mode,
            eps,
            parts,
        }
    }

    pub fn b(&self) -> Vector2<Complex64> {
        self.b_im.map(|v| Complex64::new(0.0, v))
    }

    /// The assembled 3x3 block matrix `[[A, b], [-b^T, c]]`.
    pub fn matrix(&self) -> Matrix3<Complex64> {
        let r = |v: f64| Complex64::new(v, 0.0);
        let b = self.b();
        Matrix3::new(
            r(self.a[(0, 0)]), r(self.a[(0, 1)]), b[0],
            r(self.a[(1, 0)]), r(self.a[(1, 1)]), b[1],
            -b[0], -b[1], r(self.c),
        )
    }

    /// `max |S - S^H|` entrywise.
    pub fn hermitian_gap(&self) -> f64 {
        let m = self.matrix();
        (m - m.adjoint()).iter().fold(0.0f64, |acc, v| acc.max(v.norm()))
    }

    /// Apply the symbol to a complex 3-vector `(u_x, u_y, theta)`.
    pub fn apply(&self, v: &Vector3<Complex64>) -> Vector3<Complex64> {
        self.matrix() * v
    }
}

/// Recover `N` from `eps = 1/N`.
pub fn grid_size_from_eps(eps: f64) -> Result<usize> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid("eps", format!("must be positive, got {eps}")));
    }
    let n = (1.0 / eps).round();
    if n < 1.0 || (n * eps - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("eps", format!("must be 1/N for an integer N, got {eps}")));
    }
    Ok(n as usize)
}

fn beam_tensor(rho_star: f64, beam: &BeamFamily) -> Matrix2<f64> {
    let l = beam.direction;
    let n = beam.normal();
    l * l.transpose() * rho_star + n * n.transpose() * 12.0
}

fn discrete_part(rho_star: f64, beam: &BeamFamily, mode: FreqIndex, eps: f64) -> SymbolPart {
    let phi = beam.phase(mode);
    let s = (PI * phi * eps).sin();
    SymbolPart {
        a: beam_tensor(rho_star, beam) * (4.0 * s * s / (eps * eps)),
        b_im: beam.normal() * (12.0 * (2.0 * PI * phi * eps).sin() / eps),
        c: 12.0 - 8.0 * s * s,
    }
}

fn continuum_part(rho_star: f64, beam: &BeamFamily, mode: FreqIndex) -> SymbolPart {
    let phi = beam.phase(mode);
    SymbolPart {
        a: beam_tensor(rho_star, beam) * (4.0 * PI * PI * phi * phi),
        b_im: beam.normal() * (24.0 * PI * phi),
        c: 12.0,
    }
}

/// Discrete symbol `S_D` at `mode` for the lattice with spacing `eps = 1/N`.
pub fn symbol_discrete(spec: &LatticeSpec, mode: FreqIndex, eps: f64) -> Result<ModeSymbol> {
    let n = grid_size_from_eps(eps)?;
    let mode = mode.checked(n)?;
    Ok(symbol_discrete_unchecked(spec, mode, eps))
}

/// Discrete symbol without the `mode in F_N` and `eps = 1/N` checks; it is
/// periodic in the mode with period `N`.
pub fn symbol_discrete_unchecked(spec: &LatticeSpec, mode: FreqIndex, eps: f64) -> ModeSymbol {
    let parts = spec
        .beams
        .iter()
        .map(|b| discrete_part(spec.rho_star, b, mode, eps))
        .collect();
    ModeSymbol::from_parts(parts, ModelKind::Discrete, mode, Some(eps))
}

/// Continuum limit symbol `S_C`.
pub fn symbol_continuum(spec: &LatticeSpec, mode: FreqIndex) -> ModeSymbol {
    let parts = spec
        .beams
        .iter()
        .map(|b| continuum_part(spec.rho_star, b, mode))
        .collect();
    ModeSymbol::from_parts(parts, ModelKind::Continuum, mode, None)
}

/// Kumar-McDowell symbol without the positivity check on `c_KM`.
///
/// Equal to the continuum symbol except `c_KM = sum (12 - 8 eps^2 pi^2 phi^2)`,
/// which turns negative at high modes.
pub fn symbol_km_unchecked(spec: &LatticeSpec, mode: FreqIndex, eps: f64) -> Result<ModeSymbol> {
    if spec.family != LatticeFamily::Triangular {
        return Err(Error::UnsupportedLattice("the Kumar-McDowell model"));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid("eps", format!("must be positive, got {eps}")));
    }
    let parts = spec
        .beams
        .iter()
        .map(|b| {
            let phi = b.phase(mode);
            SymbolPart {
                c: 12.0 - 8.0 * eps * eps * PI * PI * phi * phi,
                ..continuum_part(spec.rho_star, b, mode)
            }
        })
        .collect();
    Ok(ModeSymbol::from_parts(parts, ModelKind::KumarMcDowell, mode, Some(eps)))
}

/// Kumar-McDowell symbol; fails when `c_KM <= 0` at `mode`.
pub fn symbol_km(spec: &LatticeSpec, mode: FreqIndex, eps: f64) -> Result<ModeSymbol> {
    let sym = symbol_km_unchecked(spec, mode, eps)?;
    if sym.c <= 0.0 {
        return Err(Error::NonPositiveRotationBlock { c: sym.c, mode });
    }
    Ok(sym)
}

/// Dispatch on the model kind. `eps` is ignored for the continuum symbol.
pub fn symbol(spec: &LatticeSpec, mode: FreqIndex, eps: f64, kind: ModelKind) -> Result<ModeSymbol> {
    match kind {
        ModelKind::Discrete => symbol_discrete(spec, mode, eps),
        ModelKind::Continuum => Ok(symbol_continuum(spec, mode)),
        ModelKind::KumarMcDowell => symbol_km(spec, mode, eps),
    }
}

/// Schur complement of the rotation block, `B = A + b b^T / c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurBlock {
    pub b_mat: Matrix2<f64>,
    pub b_im: Vector2<f64>,
    pub c: f64,
    pub mode: FreqIndex,
}

impl SchurBlock {
    fn b(&self) -> Vector2<Complex64> {
        self.b_im.map(|v| Complex64::new(0.0, v))
    }

    /// `f - b tau / c`
    pub fn reduce_rhs(&self, f: &Vector2<Complex64>, tau: Complex64) -> Vector2<Complex64> {
        f - self.b() * (tau / self.c)
    }

    /// `tau / c + b . u / c` (bilinear, no conjugation).
    pub fn recover_theta(&self, tau: Complex64, u: &Vector2<Complex64>) -> Complex64 {
        (tau + self.b().dot(u)) / self.c
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        sym2_eigenvalues(&self.b_mat)
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues().0
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues().1
    }

    pub fn inverse(&self) -> Result<Matrix2<f64>> {
        sym2_inverse(&self.b_mat).ok_or(Error::SingularSymbol { mode: self.mode })
    }

    /// Solve `B u = r` for complex `r`; `B` is real so real and imaginary parts decouple.
    pub fn solve(&self, r: &Vector2<Complex64>) -> Result<Vector2<Complex64>> {
        let inv = self.inverse()?;
        let re = inv * r.map(|z| z.re);
        let im = inv * r.map(|z| z.im);
        Ok(Vector2::new(Complex64::new(re[0], im[0]), Complex64::new(re[1], im[1])))
    }
}

/// Schur complement of `sym`; requires `c > 0`.
pub fn schur(sym: &ModeSymbol) -> Result<SchurBlock> {
    if sym.c.is_nan() || sym.c <= 0.0 {
        return Err(Error::NonPositiveRotationBlock { c: sym.c, mode: sym.mode });
    }
    // b b^T = -(Im b)(Im b)^T keeps B exactly real
    let b_mat = sym.a - sym.b_im * sym.b_im.transpose() / sym.c;
    let b_mat = 0.5 * (b_mat + b_mat.transpose());
    Ok(SchurBlock {
        b_mat,
        b_im: sym.b_im,
        c: sym.c,
        mode: sym.mode,
    })
}

/// `v . B v` written out as tension + bending - coupling, evaluated term by term
/// from the beam phases rather than from the assembled blocks.
pub fn schur_quadratic_expanded(
    spec: &LatticeSpec,
    mode: FreqIndex,
    eps: f64,
    kind: ModelKind,
    v: &Vector2<f64>,
) -> Result<f64> {
    let mut tension = 0.0;
    let mut bending = 0.0;
    let mut coupling = 0.0;
    let mut c = 0.0;
    for beam in &spec.beams {
        let phi = beam.phase(mode);
        let (s, cs) = match kind {
            ModelKind::Discrete => ((PI * phi * eps).sin() / eps, (PI * phi * eps).cos()),
            _ => (PI * phi, 1.0),
        };
        let ax = beam.direction.dot(v);
        let tr = beam.normal().dot(v);
        tension += (s * ax).powi(2);
        bending += (s * tr).powi(2);
        coupling += cs * s * tr;
        c += match kind {
            ModelKind::Discrete => 12.0 - 8.0 * (PI * phi * eps).sin().powi(2),
            ModelKind::Continuum => 12.0,
            ModelKind::KumarMcDowell => 12.0 - 8.0 * (eps * PI * phi).powi(2),
        };
    }
    if c.is_nan() || c <= 0.0 {
        return Err(Error::NonPositiveRotationBlock { c, mode });
    }
    Ok(4.0 * spec.rho_star * tension + 48.0 * bending - 24.0 * 24.0 / c * coupling * coupling)
}

/// Both sides of the algebraic identity
/// `sum |w.v|^2 - (12/c) |sum cos(t) w.v|^2
///  = (4/c) (sum sin^2) sum |w.v|^2 + (6/c) sum_{t != t'} |(cos(t') w_t - cos(t) w_t').v|^2`
/// with `c = sum (4 + 8 cos^2)`.
pub fn strange_identity_sides(w: &[Vector2<f64>], angles: &[f64], v: &Vector2<f64>) -> Result<(f64, f64)> {
    if w.is_empty() || w.len() != angles.len() {
        return Err(Error::invalid("w", "need one angle per vector and at least one vector"));
    }
    let c: f64 = angles.iter().map(|t| 4.0 + 8.0 * t.cos().powi(2)).sum();
    let wv: Vec<f64> = w.iter().map(|wt| wt.dot(v)).collect();
    let sum_sq: f64 = wv.iter().map(|x| x * x).sum();
    let coupled: f64 = angles.iter().zip(&wv).map(|(t, x)| t.cos() * x).sum();
    let lhs = sum_sq - 12.0 / c * coupled * coupled;

    let sin_sq: f64 = angles.iter().map(|t| t.sin().powi(2)).sum();
    let mut cross = 0.0;
    for t in 0..w.len() {
        for tp in 0..w.len() {
            if t != tp {
                let d = (w[t] * angles[tp].cos() - w[tp] * angles[t].cos()).dot(v);
                cross += d * d;
            }
        }
    }
    let rhs = 4.0 / c * sin_sq * sum_sq + 6.0 / c * cross;
    Ok((lhs, rhs))
}

/// Largest relative gap `|lhs - rhs| / sum |w_t . v|^2` of the identity over
/// random `w_t in [-1, 1]^2`, angles in `[0, 2 pi)` and `v in [-1, 1]^2`.
///
/// The gap is measured against the size of the individual terms: near
/// `sin(theta) = 0` both sides are a small difference of large terms, and
/// measuring against the sides themselves would only report that cancellation.
pub fn verify_strange_identity(n_vectors: usize, trials: usize, seed: u64) -> Result<f64> {
    if n_vectors == 0 || trials == 0 {
        return Err(Error::invalid("trials", "need at least one vector and one trial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let w: Vec<Vector2<f64>> = (0..n_vectors)
            .map(|_| Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let angles: Vec<f64> = (0..n_vectors).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let v = Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (lhs, rhs) = strange_identity_sides(&w, &angles, &v)?;
        let scale: f64 = w.iter().map(|wt| wt.dot(&v).powi(2)).sum();
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    Ok(worst)
}

/// `lambda_min(B) / ((i')^2 + (j')^2)` for the Schur block of the chosen model.
pub fn lambda_min_ratio(spec: &LatticeSpec, mode: FreqIndex, eps: f64, kind: ModelKind) -> Result<f64> {
    if mode.is_zero() {
        return Err(Error::ZeroMode);
    }
    let sym = symbol(spec, mode, eps, kind)?;
    Ok(schur(&sym)?.lambda_min() / mode.sq_norm())
}

/// `|b_D / c_D - b_C / c_C|`
pub fn b_reduction_gap(spec: &LatticeSpec, mode: FreqIndex, eps: f64) -> Result<f64> {
    let d = symbol_discrete(spec, mode, eps)?;
    let c = symbol_continuum(spec, mode);
    Ok((d.b_im / d.c - c.b_im / c.c).norm())
}

/// Exponents `(m, n, m°, n°)` of the trigonometric product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SinCosExponents {
    pub m: u32,
    pub n: u32,
    pub m_cos: u32,
    pub n_cos: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinCosReport {
    pub exponents: SinCosExponents,
    /// Smallest admissible constant per grid size.
    pub per_n: Vec<(usize, f64)>,
    /// Smallest constant admissible for every grid size.
    pub constant: f64,
}

/// Right-hand side of the bound, without the constant.
fn sincos_rhs(e: SinCosExponents, i: f64, j: f64, eps: f64) -> f64 {
    let e2 = eps * eps;
    if e.m == 0 && e.m_cos == 0 && e.n >= 1 {
        e2 * j.powi(e.n as i32 + 2)
    } else if e.m >= 1 && e.n == 0 && e.n_cos == 0 {
        e2 * i.powi(e.m as i32 + 2)
    } else {
        e2 * (i.powi(e.m as i32 + 2) * j.powi(e.n as i32) + i.powi(e.m as i32) * j.powi(e.n as i32 + 2))
    }
}

/// Sweep `0 <= i', j' <= N/2`, `i' + j' >= 1` and report the smallest `C` with
/// `|sin^m(pi i' eps) sin^n(pi j' eps) / eps^(m+n) cos^m°(pi i' eps) cos^n°(pi j' eps) - (pi i')^m (pi j')^n| <= C * rhs`.
///
/// A point with zero right-hand side but nonzero gap makes `C` infinite.
pub fn sincos_bound_check(e: SinCosExponents, n_list: &[usize]) -> Result<SinCosReport> {
    if [e.m, e.n, e.m_cos, e.n_cos].iter().any(|&k| k > 4) {
        return Err(Error::invalid("exponents", "each exponent must be at most 4"));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::invalid("n_list", "need at least one positive grid size"));
    }
    let mut per_n = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let eps = 1.0 / n as f64;
        let mut worst = 0.0f64;
        for ip in 0..=n / 2 {
            for jp in 0..=n / 2 {
                if ip + jp == 0 {
                    continue;
                }
                let (i, j) = (ip as f64, jp as f64);
                let (xi, xj) = (PI * i * eps, PI * j * eps);
                let lhs = (xi.sin() / eps).powi(e.m as i32)
                    * (xj.sin() / eps).powi(e.n as i32)
                    * xi.cos().powi(e.m_cos as i32)
                    * xj.cos().powi(e.n_cos as i32);
                let target = (PI * i).powi(e.m as i32) * (PI * j).powi(e.n as i32);
                let gap = (lhs - target).abs();
                let rhs = sincos_rhs(e, i, j, eps);
                let scale = target.abs().max(lhs.abs()).max(1.0);
                if rhs > 0.0 {
                    worst = worst.max(gap / rhs);
                } else if gap > 1e-12 * scale {
                    worst = f64::INFINITY;
                }
            }
        }
        per_n.push((n, worst));
    }
    let constant = per_n.iter().fold(0.0f64, |a, &(_, c)| a.max(c));
    Ok(SinCosReport {
        exponents: e,
        per_n,
        constant,
    })
}

/// Constant-coefficient differential monomial `coeff * d_1^p d_2^q`, where
/// `(d_1, d_2)` are the derivatives along the two lattice translations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffTerm {
    pub coeff: f64,
    pub order: (u32, u32),
}

impl DiffTerm {
    pub fn new(coeff: f64, p: u32, q: u32) -> Self {
        DiffTerm { coeff, order: (p, q) }
    }

    /// Symbol on `exp(2 pi i (i' a + j' b))`: each derivative becomes `2 pi i k`.
    pub fn symbol(&self, mode: FreqIndex) -> Complex64 {
        let di = Complex64::new(0.0, 2.0 * PI * mode.ip as f64);
        let dj = Complex64::new(0.0, 2.0 * PI * mode.jp as f64);
        di.powu(self.order.0) * dj.powu(self.order.1) * self.coeff
    }

    fn derive(&self, axis: usize) -> Self {
        let mut t = *self;
        if axis == 0 {
            t.order.0 += 1;
        } else {
            t.order.1 += 1;
        }
        t
    }
}

/// A 3x3 constant-coefficient differential operator acting on `(u_x, u_y, theta)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PdeOperator {
    pub entries: [[Vec<DiffTerm>; 3]; 3],
}

impl PdeOperator {
    /// Homogenized operator of a beam lattice:
    /// `A = -sum (rho* l l^T + 12 l^perp l^perp^T) d_k^2`, `b = sum 12 l^perp d_k`, `c = 12` per beam,
    /// with `d_k = s_1 d_1 + s_2 d_2` the derivative along the beam stencil.
    pub fn homogenized(spec: &LatticeSpec) -> Self {
        let mut op = PdeOperator::default();
        for beam in &spec.beams {
            let (s1, s2) = (beam.shift.0 as f64, beam.shift.1 as f64);
            let second = [
                DiffTerm::new(s1 * s1, 2, 0),
                DiffTerm::new(2.0 * s1 * s2, 1, 1),
                DiffTerm::new(s2 * s2, 0, 2),
            ];
            let first = [DiffTerm::new(s1, 1, 0), DiffTerm::new(s2, 0, 1)];
            let m = beam_tensor(spec.rho_star, beam);
            let p = beam.normal();
            for r in 0..2 {
                for c in 0..2 {
                    for t in &second {
                        op.entries[r][c].push(DiffTerm::new(-m[(r, c)] * t.coeff, t.order.0, t.order.1));
                    }
                }
                for t in &first {
                    op.entries[r][2].push(DiffTerm::new(12.0 * p[r] * t.coeff, t.order.0, t.order.1));
                    op.entries[2][r].push(DiffTerm::new(-12.0 * p[r] * t.coeff, t.order.0, t.order.1));
                }
            }
            op.entries[2][2].push(DiffTerm::new(12.0, 0, 0));
        }
        op
    }

    pub fn symbol(&self, mode: FreqIndex) -> Matrix3<Complex64> {
        Matrix3::from_fn(|r, c| self.entries[r][c].iter().map(|t| t.symbol(mode)).sum())
    }
}

/// Linear differential expression in `(u_x, u_y, theta)`: one term list per field.
pub type LinExpr = [Vec<DiffTerm>; 3];

/// Micropolar continuum on the rectangular lattice, given by its stress and
/// couple expressions; the balance operator is derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct MicropolarSystem {
    pub rho_star: f64,
    /// `stress[i][j] = sigma_ij`
    pub stress: [[LinExpr; 2]; 2],
    /// Expression `m` with angular balance `-m = tau`.
    pub couple: LinExpr,
}

impl MicropolarSystem {
    /// `sigma = [[rho* d_x u_x, 12 d_x u_y - 12 theta], [12 d_y u_x + 12 theta, rho* d_y u_y]]`,
    /// angular balance `-(12 d_x u_y - 12 d_y u_x - 24 theta) = tau`.
    pub fn rectangular(rho_star: f64) -> Result<Self> {
        if !(rho_star.is_finite() && rho_star > 0.0) {
            return Err(Error::invalid("rho_star", format!("must be positive, got {rho_star}")));
        }
        let t = DiffTerm::new;
        let stress = [
            [
                [vec![t(rho_star, 1, 0)], vec![], vec![]],
                [vec![], vec![t(12.0, 1, 0)], vec![t(-12.0, 0, 0)]],
            ],
            [
                [vec![t(12.0, 0, 1)], vec![], vec![t(12.0, 0, 0)]],
                [vec![], vec![t(rho_star, 0, 1)], vec![]],
            ],
        ];
        let couple = [vec![t(-12.0, 0, 1)], vec![t(12.0, 1, 0)], vec![t(-24.0, 0, 0)]];
        Ok(MicropolarSystem {
            rho_star,
            stress,
            couple,
        })
    }

    /// Balance operator: rows `-(sum_i d_i sigma_ij)` for `j = x, y`, then `-m`.
    pub fn operator(&self) -> PdeOperator {
        let mut op = PdeOperator::default();
        for j in 0..2 {
            for i in 0..2 {
                for (field, terms) in self.stress[i][j].iter().enumerate() {
                    for term in terms {
                        let d = term.derive(i);
                        op.entries[j][field].push(DiffTerm::new(-d.coeff, d.order.0, d.order.1));
                    }
                }
            }
        }
        for (field, terms) in self.couple.iter().enumerate() {
            for term in terms {
                op.entries[2][field].push(DiffTerm::new(-term.coeff, term.order.0, term.order.1));
            }
        }
        op
    }

    /// Stress symbol: `sigma_ij` as a linear functional on the mode amplitudes `(u_x, u_y, theta)`.
    pub fn stress_symbol(&self, mode: FreqIndex) -> [[Vector3<Complex64>; 2]; 2] {
        let eval = |e: &LinExpr| Vector3::from_fn(|f, _| e[f].iter().map(|t| t.symbol(mode)).sum());
        [
            [eval(&self.stress[0][0]), eval(&self.stress[0][1])],
            [eval(&self.stress[1][0]), eval(&self.stress[1][1])],
        ]
    }

    /// `sigma_xy - sigma_yx` for the field with mode amplitudes `amp`.
    pub fn stress_asymmetry(&self, mode: FreqIndex, amp: &Vector3<Complex64>) -> Complex64 {
        let s = self.stress_symbol(mode);
        s[0][1].dot(amp) - s[1][0].dot(amp)
    }
}
