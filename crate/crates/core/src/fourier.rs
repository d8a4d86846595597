//! Discrete Fourier transforms on the periodic `N x N` index grid.
//!
//! The forward transform carries the weight `1/N^2` and the inverse carries
//! weight `1`, so that Fourier coefficients of a grid function coincide with
//! the Fourier-series coefficients of its trigonometric interpolant:
//!
//! ```text
//! fh[i',j'] = 1/N^2 * sum_{i,j} f[i,j] exp(-2 pi i (i i' + j j') / N)
//! f[i,j]    =         sum_{(i',j') in F_N} fh[i',j'] exp(2 pi i (i i' + j j') / N)
//! ```
//!
//! Frequency-domain grids are stored by residue class: mode `(i', j')` lives at
//! storage slot `(i' mod N, j' mod N)`. The representative set `F_N` is
//! `{-(N-1)/2, ..., (N-1)/2}` for odd `N` and `{-N/2, ..., N/2 - 1}` for even `N`.

use std::f64::consts::PI;
use std::fmt;

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest grid size transformed by direct summation; larger grids use the FFT.
pub const DIRECT_MAX_N: usize = 16;

/// Imaginary residue tolerated when a physically real field is brought back to
/// the spatial domain.
pub const REAL_TOLERANCE: f64 = 1e-10;

/// A frequency index `(i', j')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FreqIndex {
    pub ip: i64,
    pub jp: i64,
}

impl FreqIndex {
    pub const ZERO: FreqIndex = FreqIndex { ip: 0, jp: 0 };

    pub const fn new(ip: i64, jp: i64) -> Self {
        FreqIndex { ip, jp }
    }

    pub fn is_zero(&self) -> bool {
        self.ip == 0 && self.jp == 0
    }

    /// `|i'| + |j'|`
    pub fn l1(&self) -> i64 {
        self.ip.abs() + self.jp.abs()
    }

    /// `(i')^2 + (j')^2`
    pub fn sq_norm(&self) -> f64 {
        (self.ip * self.ip + self.jp * self.jp) as f64
    }

    pub fn neg(&self) -> Self {
        FreqIndex::new(-self.ip, -self.jp)
    }

    /// Storage slot of this mode on an `n x n` grid.
    pub fn slot(&self, n: usize) -> (usize, usize) {
        let n = n as i64;
        (self.ip.rem_euclid(n) as usize, self.jp.rem_euclid(n) as usize)
    }

    pub fn in_set(&self, n: usize) -> bool {
        let (lo, hi) = freq_bounds(n);
        (lo..=hi).contains(&self.ip) && (lo..=hi).contains(&self.jp)
    }

    /// Returns the mode if it lies in `F_N`.
    pub fn checked(self, n: usize) -> Result<Self> {
        if self.in_set(n) {
            Ok(self)
        } else {
            Err(Error::ModeOutOfRange { mode: self, n })
        }
    }
}

impl fmt::Display for FreqIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.ip, self.jp)
    }
}

/// Inclusive bounds `(lo, hi)` of the one-dimensional frequency range.
pub fn freq_bounds(n: usize) -> (i64, i64) {
    let n = n as i64;
    if n % 2 == 1 {
        (-(n - 1) / 2, (n - 1) / 2)
    } else {
        (-n / 2, n / 2 - 1)
    }
}

/// Representative in `F_N` of storage slot `k`.
pub fn freq_from_slot(n: usize, k: usize) -> i64 {
    let (_, hi) = freq_bounds(n);
    let k = k as i64;
    if k <= hi {
        k
    } else {
        k - n as i64
    }
}

/// All of `F_N`, ordered by `i'` then `j'`.
pub fn freq_set(n: usize) -> Vec<FreqIndex> {
    let (lo, hi) = freq_bounds(n);
    (lo..=hi)
        .flat_map(|ip| (lo..=hi).map(move |jp| FreqIndex::new(ip, jp)))
        .collect()
}

/// `F_N` without the zero mode.
pub fn nonzero_freq_set(n: usize) -> Vec<FreqIndex> {
    freq_set(n).into_iter().filter(|m| !m.is_zero()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Spatial,
    Frequency,
}

impl Domain {
    fn name(self) -> &'static str {
        match self {
            Domain::Spatial => "spatial",
            Domain::Frequency => "frequency",
        }
    }
}

/// Non-negative Sobolev order `s` of a discrete semi-norm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SeminormOrder(f64);

impl SeminormOrder {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s >= 0.0 {
            Ok(SeminormOrder(s))
        } else {
            Err(Error::invalid("s", format!("semi-norm order must be >= 0, got {s}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// An `N x N` periodic grid of complex `d`-vectors, tagged with its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Array3<Complex64>,
    domain: Domain,
}

impl GridFunction {
    pub fn zeros(n: usize, dim: usize, domain: Domain) -> Result<Self> {
        Self::from_values(Array3::zeros((n, n, dim)), domain)
    }

    pub fn from_values(values: Array3<Complex64>, domain: Domain) -> Result<Self> {
        let (n0, n1, dim) = values.dim();
        if n0 == 0 || dim == 0 {
            return Err(Error::EmptyGrid);
        }
        if n0 != n1 {
            return Err(Error::SizeMismatch {
                left: format!("{n0} rows"),
                right: format!("{n1} columns"),
            });
        }
        if dim > 3 {
            return Err(Error::invalid("dim", format!("vector dimension must be 1..=3, got {dim}")));
        }
        Ok(GridFunction { values, domain })
    }

    /// Real spatial field of shape `(n, n, dim)`.
    pub fn from_real(values: &Array3<f64>) -> Result<Self> {
        Self::from_values(values.mapv(|v| Complex64::new(v, 0.0)), Domain::Spatial)
    }

    /// Real spatial scalar field of shape `(n, n)`.
    pub fn from_real_scalar(values: &Array2<f64>) -> Result<Self> {
        Self::from_real(&values.clone().insert_axis(Axis(2)))
    }

    pub fn n(&self) -> usize {
        self.values.dim().0
    }

    pub fn dim(&self) -> usize {
        self.values.dim().2
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &Array3<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.values
    }

    /// Cyclic spatial access `f[i mod N, j mod N][c]`.
    pub fn at_node(&self, i: i64, j: i64, c: usize) -> Complex64 {
        let n = self.n() as i64;
        self.values[[i.rem_euclid(n) as usize, j.rem_euclid(n) as usize, c]]
    }

    pub fn at_mode(&self, mode: FreqIndex, c: usize) -> Complex64 {
        let (a, b) = mode.slot(self.n());
        self.values[[a, b, c]]
    }

    pub fn set_mode(&mut self, mode: FreqIndex, c: usize, value: Complex64) {
        let (a, b) = mode.slot(self.n());
        self.values[[a, b, c]] = value;
    }

    pub fn expect_domain(&self, domain: Domain) -> Result<()> {
        if self.domain == domain {
            Ok(())
        } else {
            Err(Error::WrongDomain {
                expected: domain.name(),
                found: self.domain.name(),
            })
        }
    }

    pub fn check_same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.values.dim() != other.values.dim() || self.domain != other.domain {
            return Err(Error::SizeMismatch {
                left: format!("{:?} {}", self.values.dim(), self.domain.name()),
                right: format!("{:?} {}", other.values.dim(), other.domain.name()),
            });
        }
        Ok(())
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_shape(other)?;
        Ok(GridFunction {
            values: &self.values - &other.values,
            domain: self.domain,
        })
    }

    /// Spatial shift `(i, j) -> f[i + di, j + dj]`.
    pub fn shifted(&self, di: i64, dj: i64) -> Result<GridFunction> {
        self.expect_domain(Domain::Spatial)?;
        let n = self.n();
        let mut out = self.values.clone();
        for i in 0..n {
            for j in 0..n {
                for c in 0..self.dim() {
                    out[[i, j, c]] = self.at_node(i as i64 + di, j as i64 + dj, c);
                }
            }
        }
        Ok(GridFunction {
            values: out,
            domain: Domain::Spatial,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Largest imaginary part over all entries.
    pub fn imag_residue(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// Real part of a spatial field whose imaginary residue is below `tol`.
    pub fn to_real(&self, tol: f64) -> Result<Array3<f64>> {
        self.expect_domain(Domain::Spatial)?;
        let residue = self.imag_residue();
        let scale = self.max_abs().max(1.0);
        if residue > tol * scale {
            return Err(Error::NotReal { residue });
        }
        Ok(self.values.mapv(|v| v.re))
    }
}

fn twiddle(sign: f64, n: usize, k: usize) -> Complex64 {
    Complex64::from_polar(1.0, sign * 2.0 * PI * (k % n) as f64 / n as f64)
}

fn direct_transform(values: &Array3<Complex64>, sign: f64, weight: f64) -> Array3<Complex64> {
    let (n, _, dim) = values.dim();
    let mut out = Array3::zeros((n, n, dim));
    for a in 0..n {
        for b in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let w = twiddle(sign, n, i * a + j * b);
                    for c in 0..dim {
                        out[[a, b, c]] += values[[i, j, c]] * w;
                    }
                }
            }
        }
    }
    out.mapv_inplace(|v| v * weight);
    out
}

fn fft_transform(values: &Array3<Complex64>, inverse: bool, weight: f64) -> Array3<Complex64> {
    let (n, _, dim) = values.dim();
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut out = values.clone();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..dim {
        for i in 0..n {
            for j in 0..n {
                buf[j] = out[[i, j, c]];
            }
            fft.process(&mut buf);
            for j in 0..n {
                out[[i, j, c]] = buf[j];
            }
        }
        for j in 0..n {
            for i in 0..n {
                buf[i] = out[[i, j, c]];
            }
            fft.process(&mut buf);
            for i in 0..n {
                out[[i, j, c]] = buf[i];
            }
        }
    }
    out.mapv_inplace(|v| v * weight);
    out
}

/// Forward transform by direct summation, regardless of size.
pub fn dft_direct(f: &GridFunction) -> Result<GridFunction> {
    f.expect_domain(Domain::Spatial)?;
    let n = f.n() as f64;
    GridFunction::from_values(direct_transform(&f.values, -1.0, 1.0 / (n * n)), Domain::Frequency)
}

/// Inverse transform by direct summation, regardless of size.
pub fn idft_direct(fh: &GridFunction) -> Result<GridFunction> {
    fh.expect_domain(Domain::Frequency)?;
    GridFunction::from_values(direct_transform(&fh.values, 1.0, 1.0), Domain::Spatial)
}

/// Forward transform with weight `1/N^2`.
pub fn dft(f: &GridFunction) -> Result<GridFunction> {
    f.expect_domain(Domain::Spatial)?;
    if f.n() <= DIRECT_MAX_N {
        return dft_direct(f);
    }
    let n = f.n() as f64;
    GridFunction::from_values(fft_transform(&f.values, false, 1.0 / (n * n)), Domain::Frequency)
}

/// Inverse transform with weight `1`.
pub fn idft(fh: &GridFunction) -> Result<GridFunction> {
    fh.expect_domain(Domain::Frequency)?;
    if fh.n() <= DIRECT_MAX_N {
        return idft_direct(fh);
    }
    GridFunction::from_values(fft_transform(&fh.values, true, 1.0), Domain::Spatial)
}

fn both_domains(f: &GridFunction) -> Result<(GridFunction, GridFunction)> {
    match f.domain() {
        Domain::Spatial => Ok((f.clone(), dft(f)?)),
        Domain::Frequency => Ok((idft(f)?, f.clone())),
    }
}

/// `| sum_F conj(gh) fh - 1/N^2 sum_I conj(g) f |`, accepting inputs in either domain.
pub fn parseval_gap(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    if f.n() != g.n() || f.dim() != g.dim() {
        return Err(Error::SizeMismatch {
            left: format!("{:?}", f.values.dim()),
            right: format!("{:?}", g.values.dim()),
        });
    }
    let (fs, fh) = both_domains(f)?;
    let (gs, gh) = both_domains(g)?;
    let n = f.n() as f64;
    let freq: Complex64 = gh.values.iter().zip(fh.values.iter()).map(|(g, f)| g.conj() * f).sum();
    let space: Complex64 = gs.values.iter().zip(fs.values.iter()).map(|(g, f)| g.conj() * f).sum();
    Ok((freq - space / (n * n)).norm())
}

/// `( sum_{F_N} |fh|^2 )^{1/2}`
pub fn l2_norm(fh: &GridFunction) -> Result<f64> {
    fh.expect_domain(Domain::Frequency)?;
    Ok(fh.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
}

/// `( sum_{F_N} (|i'|^{2s} + |j'|^{2s}) |fh[i',j']|^2 )^{1/2}`
///
/// At `s = 0` every mode carries weight 2, so this is not [`l2_norm`].
pub fn hs_seminorm(fh: &GridFunction, s: SeminormOrder) -> Result<f64> {
    fh.expect_domain(Domain::Frequency)?;
    let n = fh.n();
    let two_s = 2.0 * s.value();
    let mut acc = 0.0;
    for a in 0..n {
        let ip = freq_from_slot(n, a).abs() as f64;
        for b in 0..n {
            let jp = freq_from_slot(n, b).abs() as f64;
            let w = ip.powf(two_s) + jp.powf(two_s);
            for c in 0..fh.dim() {
                acc += w * fh.values[[a, b, c]].norm_sqr();
            }
        }
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(n: usize, dim: usize, domain: Domain, complex: bool, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = Array3::from_shape_fn((n, n, dim), |_| {
            let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
            Complex64::new(rng.gen_range(-1.0..1.0), im)
        });
        GridFunction::from_values(values, domain).unwrap()
    }

    fn rel_diff(a: &GridFunction, b: &GridFunction) -> f64 {
        let d = a.sub(b).unwrap();
        let num: f64 = d.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = b.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        num / den
    }

    #[test]
    fn frequency_sets_odd_and_even() {
        assert_eq!(freq_bounds(5), (-2, 2));
        assert_eq!(freq_bounds(4), (-2, 1));
        assert_eq!(freq_set(3).len(), 9);
        assert_eq!(nonzero_freq_set(4).len(), 15);
        for n in [3, 4, 5, 8] {
            for k in 0..n {
                let m = FreqIndex::new(freq_from_slot(n, k), 0);
                assert!(m.in_set(n));
                assert_eq!(m.slot(n).0, k);
            }
        }
        assert!(FreqIndex::new(2, 0).checked(4).is_err());
    }

    #[test]
    fn constant_field_is_pure_zero_mode() {
        let c = Complex64::new(2.5, -1.0);
        let f = GridFunction::from_values(Array3::from_elem((4, 4, 2), c), Domain::Spatial).unwrap();
        let fh = dft(&f).unwrap();
        for m in freq_set(4) {
            for k in 0..2 {
                let expect = if m.is_zero() { c } else { Complex64::new(0.0, 0.0) };
                assert!((fh.at_mode(m, k) - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn single_exponential_hits_one_mode() {
        let n = 6;
        let mut f = GridFunction::zeros(n, 1, Domain::Spatial).unwrap();
        for i in 0..n {
            for j in 0..n {
                f.values_mut()[[i, j, 0]] = twiddle(1.0, n, i);
            }
        }
        let fh = dft(&f).unwrap();
        for m in freq_set(n) {
            let expect = if m == FreqIndex::new(1, 0) { 1.0 } else { 0.0 };
            assert!((fh.at_mode(m, 0) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn idft_of_zero_and_unit_zero_mode() {
        let zero = GridFunction::zeros(5, 1, Domain::Frequency).unwrap();
        assert_eq!(idft(&zero).unwrap().max_abs(), 0.0);
        let mut unit = zero.clone();
        unit.set_mode(FreqIndex::ZERO, 0, Complex64::new(1.0, 0.0));
        let f = idft(&unit).unwrap();
        assert!(f.values().iter().all(|v| (v - 1.0).norm() < 1e-15));
    }

    #[test]
    fn round_trip_random_real_4x4() {
        let f = random_grid(4, 1, Domain::Spatial, false, 1);
        let back = idft(&dft(&f).unwrap()).unwrap();
        assert!(rel_diff(&back, &f) < 1e-13);
    }

    #[test]
    fn round_trip_random_coefficients_8() {
        let gh = random_grid(8, 3, Domain::Frequency, true, 2);
        let back = dft(&idft(&gh).unwrap()).unwrap();
        assert!(rel_diff(&back, &gh) < 1e-13);
    }

    #[test]
    fn fft_path_matches_direct_sum() {
        for n in [17, 20] {
            let f = random_grid(n, 2, Domain::Spatial, true, n as u64);
            let fast = GridFunction::from_values(
                fft_transform(&f.values, false, 1.0 / (n * n) as f64),
                Domain::Frequency,
            )
            .unwrap();
            let slow = dft_direct(&f).unwrap();
            assert!(rel_diff(&fast, &slow) < 1e-13);
            let fast_inv = idft(&slow).unwrap();
            assert!(rel_diff(&fast_inv, &idft_direct(&slow).unwrap()) < 1e-13);
        }
    }

    #[test]
    fn transforms_reject_wrong_domain_and_empty() {
        let f = GridFunction::zeros(3, 1, Domain::Frequency).unwrap();
        assert!(matches!(dft(&f), Err(Error::WrongDomain { .. })));
        let s = GridFunction::zeros(3, 1, Domain::Spatial).unwrap();
        assert!(matches!(idft(&s), Err(Error::WrongDomain { .. })));
        assert!(matches!(GridFunction::zeros(0, 1, Domain::Spatial), Err(Error::EmptyGrid)));
    }

    #[test]
    fn parseval_examples() {
        let one = GridFunction::from_values(
            Array3::from_elem((4, 4, 1), Complex64::new(1.0, 0.0)),
            Domain::Spatial,
        )
        .unwrap();
        assert!(parseval_gap(&one, &one).unwrap() < 1e-15);

        let f = random_grid(8, 2, Domain::Spatial, true, 7);
        let g = random_grid(8, 2, Domain::Spatial, true, 8);
        assert!(parseval_gap(&f, &g).unwrap() < 1e-12);

        let mut single = GridFunction::zeros(6, 1, Domain::Frequency).unwrap();
        let a = Complex64::new(0.3, -1.2);
        single.set_mode(FreqIndex::new(2, -1), 0, a);
        let sp = idft(&single).unwrap();
        let space: f64 = sp.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / 36.0;
        assert_relative_eq!(space, a.norm_sqr(), max_relative = 1e-13);
        assert!(parseval_gap(&single, &single).unwrap() < 1e-13);

        let h = random_grid(6, 2, Domain::Spatial, false, 1);
        assert!(matches!(parseval_gap(&f, &h), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn seminorm_examples() {
        let mut fh = GridFunction::zeros(9, 1, Domain::Frequency).unwrap();
        let s1 = SeminormOrder::new(1.0).unwrap();
        assert_eq!(hs_seminorm(&fh, s1).unwrap(), 0.0);

        fh.set_mode(FreqIndex::new(1, 0), 0, Complex64::new(1.0, 0.0));
        assert_relative_eq!(hs_seminorm(&fh, s1).unwrap(), 1.0, max_relative = 1e-15);

        let mut g = GridFunction::zeros(9, 1, Domain::Frequency).unwrap();
        g.set_mode(FreqIndex::new(3, 4), 0, Complex64::new(2.0, 0.0));
        // (3^4 + 4^4) * 4 = 4 * 337
        let expected = 2.0 * 337f64.sqrt();
        let got = hs_seminorm(&g, SeminormOrder::new(2.0).unwrap()).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-14);

        // order zero weights every mode by 2
        let s0 = SeminormOrder::new(0.0).unwrap();
        assert_relative_eq!(
            hs_seminorm(&g, s0).unwrap(),
            2f64.sqrt() * l2_norm(&g).unwrap(),
            max_relative = 1e-15
        );
        assert!(SeminormOrder::new(-0.5).is_err());
        let sp = GridFunction::zeros(3, 1, Domain::Spatial).unwrap();
        assert!(hs_seminorm(&sp, s1).is_err());
    }

    #[test]
    fn real_field_reconstruction() {
        let f = random_grid(5, 1, Domain::Spatial, false, 3);
        let back = idft(&dft(&f).unwrap()).unwrap();
        assert!(back.to_real(REAL_TOLERANCE).is_ok());

        let mut fh = GridFunction::zeros(5, 1, Domain::Frequency).unwrap();
        fh.set_mode(FreqIndex::new(1, 0), 0, Complex64::new(1.0, 0.0));
        let broken = idft(&fh).unwrap();
        assert!(matches!(broken.to_real(REAL_TOLERANCE), Err(Error::NotReal { .. })));
    }
}
