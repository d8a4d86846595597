//! Euler-Bernoulli beam elements and real-space assembly of periodic frames.
//!
//! The dense assembly is the ground truth that the per-mode symbols are
//! checked against. Node `(i, j)` owns dofs `3 (i N + j) + {0, 1, 2}` for
//! `(u_x, u_y, theta)`; neighbour indices wrap cyclically.

use nalgebra::{Cholesky, DMatrix, DVector, Matrix2, Matrix6, Vector2, Vector6};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::FieldGrid;
use crate::fourier::{Domain, GridFunction};
use crate::lattice::{perp, LatticeSpec};

/// Stiffness scaling of one beam: `S = gamma rho* l` (axial), `H = gamma l^3` (bending).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams {
    pub rho_star: f64,
    pub gamma: f64,
    pub length: f64,
}

impl BeamParams {
    pub fn new(rho_star: f64, length: f64) -> Result<Self> {
        Self::with_gamma(rho_star, 1.0, length)
    }

    pub fn with_gamma(rho_star: f64, gamma: f64, length: f64) -> Result<Self> {
        for (name, v) in [("rho_star", rho_star), ("gamma", gamma), ("length", length)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(BeamParams {
            rho_star,
            gamma,
            length,
        })
    }

    pub fn axial_stiffness(&self) -> f64 {
        self.gamma * self.rho_star * self.length
    }

    pub fn bending_stiffness(&self) -> f64 {
        self.gamma * self.length.powi(3)
    }
}

/// Axial stiffness pattern `[[1, -1], [-1, 1]]`.
pub fn k_tau() -> Matrix2<f64> {
    Matrix2::new(1.0, -1.0, -1.0, 1.0)
}

/// Bending stiffness pattern over `(v_y-, theta-, v_y+, theta+)` for a beam of length `l`.
pub fn k_nu(l: f64) -> nalgebra::Matrix4<f64> {
    let l2 = l * l;
    nalgebra::Matrix4::new(
        12.0, 6.0 * l, -12.0, 6.0 * l,
        6.0 * l, 4.0 * l2, -6.0 * l, 2.0 * l2,
        -12.0, -6.0 * l, 12.0, -6.0 * l,
        6.0 * l, 2.0 * l2, -6.0 * l, 4.0 * l2,
    )
}

/// 6x6 element stiffness over `(v_x-, v_y-, theta-, v_x+, v_y+, theta+)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementStiffness {
    pub params: BeamParams,
    pub direction: Vector2<f64>,
    /// Stiffness in the beam frame (axial along `direction`, transverse along its normal).
    pub local: Matrix6<f64>,
    /// Stiffness in global Cartesian dofs.
    pub global: Matrix6<f64>,
}

impl ElementStiffness {
    pub fn local_energy(&self, v: &Vector6<f64>) -> f64 {
        0.5 * v.dot(&(self.local * v))
    }

    pub fn global_energy(&self, v: &Vector6<f64>) -> f64 {
        0.5 * v.dot(&(self.global * v))
    }
}

/// Element stiffness of one beam with unit axis `direction`.
pub fn element_stiffness(p: &BeamParams, direction: &Vector2<f64>) -> Result<ElementStiffness> {
    if (direction.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("direction", format!("must be unit, |l| = {}", direction.norm())));
    }
    let l = p.length;
    let axial = k_tau() * (p.axial_stiffness() / l);
    let bend = k_nu(l) * (p.bending_stiffness() / l.powi(3));

    let mut local = Matrix6::zeros();
    let ax = [0, 3];
    for (a, &r) in ax.iter().enumerate() {
        for (b, &c) in ax.iter().enumerate() {
            local[(r, c)] += axial[(a, b)];
        }
    }
    let bd = [1, 2, 4, 5];
    for (a, &r) in bd.iter().enumerate() {
        for (b, &c) in bd.iter().enumerate() {
            local[(r, c)] += bend[(a, b)];
        }
    }

    // local (axial, transverse) = R * global (x, y)
    let n = perp(direction);
    let mut t = Matrix6::zeros();
    for base in [0, 3] {
        t[(base, base)] = direction.x;
        t[(base, base + 1)] = direction.y;
        t[(base + 1, base)] = n.x;
        t[(base + 1, base + 1)] = n.y;
        t[(base + 2, base + 2)] = 1.0;
    }
    let global = t.transpose() * local * t;
    Ok(ElementStiffness {
        params: *p,
        direction: *direction,
        local,
        global,
    })
}

/// Bending quadratic form through the two-square rewriting
/// `L^2 (theta- - theta+)^2 + 3 L^2 (2 v_y-/L - 2 v_y+/L + theta- + theta+)^2`.
pub fn bending_form_rewritten(l: f64, vy0: f64, th0: f64, vy1: f64, th1: f64) -> f64 {
    let a = th0 - th1;
    let b = 2.0 * vy0 / l - 2.0 * vy1 / l + th0 + th1;
    l * l * a * a + 3.0 * l * l * b * b
}

/// Largest relative gap between the bending quadratic form and its two-square
/// rewriting over `trials` random dof vectors.
pub fn energy_identities_check(p: &BeamParams, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = k_nu(p.length);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v = nalgebra::Vector4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let quad = v.dot(&(k * v));
        let rewritten = bending_form_rewritten(p.length, v[0], v[1], v[2], v[3]);
        let scale = quad.abs().max(rewritten.abs());
        if scale > 0.0 {
            worst = worst.max((quad - rewritten).abs() / scale);
        }
    }
    worst
}

/// Dense stiffness of a periodic lattice, the Hessian of the total beam energy.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub n: usize,
    pub lattice: LatticeSpec,
    pub params: BeamParams,
    pub stiffness: DMatrix<f64>,
}

impl AssembledSystem {
    pub fn dof_count(&self) -> usize {
        3 * self.n * self.n
    }

    pub fn eps(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Factor `eps^2 gamma` applied to nodal loads.
    pub fn rhs_scale(&self) -> f64 {
        self.eps() * self.eps() * self.params.gamma
    }

    pub fn dof(&self, i: i64, j: i64, c: usize) -> usize {
        node_dof(self.n, i, j, c)
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.stiffness * v
    }

    pub fn apply_complex(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let re = self.apply(&v.map(|z| z.re));
        let im = self.apply(&v.map(|z| z.im));
        DVector::from_fn(v.len(), |k, _| Complex64::new(re[k], im[k]))
    }

    pub fn energy(&self, v: &DVector<f64>) -> f64 {
        0.5 * v.dot(&self.apply(v))
    }

    /// Energy summed beam by beam from element matrices, independent of the assembled matrix.
    pub fn energy_by_beams(&self, v: &DVector<f64>) -> Result<f64> {
        let mut total = 0.0;
        for beam in &self.lattice.beams {
            let el = element_stiffness(&self.params, &beam.direction)?;
            for i in 0..self.n as i64 {
                for j in 0..self.n as i64 {
                    let dofs = beam_dofs(self.n, i, j, beam.shift);
                    let local = Vector6::from_fn(|r, _| v[dofs[r]]);
                    total += el.global_energy(&local);
                }
            }
        }
        Ok(total)
    }

    /// Unit-norm uniform translations along x and y, the kernel of the stiffness.
    pub fn translation_basis(&self) -> [DVector<f64>; 2] {
        let nn = (self.n * self.n) as f64;
        let mut tx = DVector::zeros(self.dof_count());
        let mut ty = DVector::zeros(self.dof_count());
        for node in 0..self.n * self.n {
            tx[3 * node] = 1.0 / nn.sqrt();
            ty[3 * node + 1] = 1.0 / nn.sqrt();
        }
        [tx, ty]
    }

    /// Number of eigenvalues below `rel_tol * max |eigenvalue|`.
    pub fn kernel_dimension(&self, rel_tol: f64) -> usize {
        let ev = self.stiffness.clone().symmetric_eigenvalues();
        let scale = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        ev.iter().filter(|v| v.abs() <= rel_tol * scale).count()
    }
}

fn node_dof(n: usize, i: i64, j: i64, c: usize) -> usize {
    let n = n as i64;
    3 * (i.rem_euclid(n) * n + j.rem_euclid(n)) as usize + c
}

fn beam_dofs(n: usize, i: i64, j: i64, shift: (i64, i64)) -> [usize; 6] {
    let (a, b) = ((i, j), (i + shift.0, j + shift.1));
    [
        node_dof(n, a.0, a.1, 0),
        node_dof(n, a.0, a.1, 1),
        node_dof(n, a.0, a.1, 2),
        node_dof(n, b.0, b.1, 0),
        node_dof(n, b.0, b.1, 1),
        node_dof(n, b.0, b.1, 2),
    ]
}

/// Assemble the periodic frame on an `n x n` cell grid with beam length `1/n`.
/// Every stencil beam of every node is counted exactly once.
pub fn assemble(lattice: &LatticeSpec, n: usize, gamma: f64) -> Result<AssembledSystem> {
    if n < 2 {
        return Err(Error::invalid("n", format!("need n >= 2, got {n}")));
    }
    let params = BeamParams::with_gamma(lattice.rho_star, gamma, 1.0 / n as f64)?;
    let dof = 3 * n * n;
    let mut k = DMatrix::zeros(dof, dof);
    for beam in &lattice.beams {
        let el = element_stiffness(&params, &beam.direction)?;
        for i in 0..n as i64 {
            for j in 0..n as i64 {
                let dofs = beam_dofs(n, i, j, beam.shift);
                for r in 0..6 {
                    for c in 0..6 {
                        k[(dofs[r], dofs[c])] += el.global[(r, c)];
                    }
                }
            }
        }
    }
    Ok(AssembledSystem {
        n,
        lattice: lattice.clone(),
        params,
        stiffness: k,
    })
}

/// Triangular-lattice assembly; `p.length` must equal `1/n`.
pub fn assemble_triangular(n: usize, p: &BeamParams) -> Result<AssembledSystem> {
    if n < 2 {
        return Err(Error::invalid("n", format!("need n >= 2, got {n}")));
    }
    if (p.length * n as f64 - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("length", format!("beam length must be 1/n, got {}", p.length)));
    }
    let lattice = LatticeSpec::triangular(p.rho_star)?;
    assemble(&lattice, n, p.gamma)
}

/// Equilibrium of the assembled frame under nodal loads `eps^2 gamma (f, tau)`.
///
/// The net force must vanish. The returned displacement has zero mean, i.e. it
/// is the representative orthogonal to the translation kernel.
pub fn dense_solve(sys: &AssembledSystem, force: &GridFunction, torque: &GridFunction) -> Result<FieldGrid> {
    force.expect_domain(Domain::Spatial)?;
    torque.expect_domain(Domain::Spatial)?;
    let n = sys.n;
    if force.n() != n || torque.n() != n || force.dim() != 2 || torque.dim() != 1 {
        return Err(Error::SizeMismatch {
            left: format!("system n = {n}"),
            right: format!("force {}x{}x{}, torque {}x{}", force.n(), force.n(), force.dim(), torque.n(), torque.n()),
        });
    }
    let f = force.to_real(crate::fourier::REAL_TOLERANCE)?;
    let tau = torque.to_real(crate::fourier::REAL_TOLERANCE)?;

    let (mut fx, mut fy, mut scale) = (0.0, 0.0, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            fx += f[[i, j, 0]];
            fy += f[[i, j, 1]];
            scale += f[[i, j, 0]].abs() + f[[i, j, 1]].abs();
        }
    }
    if fx.abs().max(fy.abs()) > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::IncompatibleLoad { fx, fy });
    }

    let s = sys.rhs_scale();
    let mut rhs = DVector::zeros(sys.dof_count());
    for i in 0..n {
        for j in 0..n {
            let d = sys.dof(i as i64, j as i64, 0);
            rhs[d] = s * f[[i, j, 0]];
            rhs[d + 1] = s * f[[i, j, 1]];
            rhs[d + 2] = s * tau[[i, j, 0]];
        }
    }

    // Pin the translation kernel with a rank-2 penalty; for rhs orthogonal to the
    // kernel the penalised solution is the zero-mean equilibrium.
    let penalty = sys.stiffness.diagonal().mean();
    let mut m = sys.stiffness.clone();
    for t in sys.translation_basis() {
        m += &t * t.transpose() * penalty;
    }
    let chol = Cholesky::new(m).ok_or_else(|| Error::SingularSystem {
        kernel_dim: sys.kernel_dimension(1e-10),
    })?;
    let v = chol.solve(&rhs);

    let residual = (&sys.stiffness * &v - &rhs).norm();
    if residual > 1e-10 * rhs.norm().max(f64::MIN_POSITIVE) && rhs.norm() > 0.0 {
        return Err(Error::SingularSystem {
            kernel_dim: sys.kernel_dimension(1e-10),
        });
    }

    let mut u = ndarray::Array3::zeros((n, n, 2));
    let mut theta = ndarray::Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let d = sys.dof(i as i64, j as i64, 0);
            u[[i, j, 0]] = v[d];
            u[[i, j, 1]] = v[d + 1];
            theta[[i, j]] = v[d + 2];
        }
    }
    FieldGrid::from_real(&u, &theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::{Array2, Array3};

    fn unit_x() -> Vector2<f64> {
        Vector2::new(1.0, 0.0)
    }

    #[test]
    fn element_rigid_motions_have_zero_energy() {
        let p = BeamParams::new(2.0, 0.3).unwrap();
        let el = element_stiffness(&p, &unit_x()).unwrap();
        let translate = Vector6::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        assert!(el.local_energy(&translate).abs() < 1e-14);
        let th = 0.7;
        let l = p.length;
        let rotate = Vector6::new(0.0, -l / 2.0 * th, th, 0.0, l / 2.0 * th, th);
        assert!(el.local_energy(&rotate).abs() < 1e-14);
    }

    #[test]
    fn pure_axial_stretch_energy() {
        let p = BeamParams::new(3.0, 0.25).unwrap();
        let el = element_stiffness(&p, &unit_x()).unwrap();
        let stretch = Vector6::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        assert_relative_eq!(
            el.local_energy(&stretch),
            p.axial_stiffness() / (2.0 * p.length),
            max_relative = 1e-14
        );
    }

    #[test]
    fn element_is_psd_with_three_rigid_modes() {
        let p = BeamParams::new(1.0, 0.5).unwrap();
        let dir = Vector2::new(0.5, 3f64.sqrt() / 2.0);
        let el = element_stiffness(&p, &dir).unwrap();
        assert!((el.global - el.global.transpose()).norm() < 1e-14);
        let ev = el.global.symmetric_eigenvalues();
        let scale = ev.max();
        assert!(ev.iter().all(|v| *v > -1e-12 * scale));
        assert_eq!(ev.iter().filter(|v| v.abs() < 1e-10 * scale).count(), 3);
        // global translation along the axis is still rigid
        let t = Vector6::new(dir.x, dir.y, 0.0, dir.x, dir.y, 0.0);
        assert!(el.global_energy(&t).abs() < 1e-14);
    }

    #[test]
    fn element_rejects_non_unit_direction() {
        let p = BeamParams::new(1.0, 0.5).unwrap();
        assert!(element_stiffness(&p, &Vector2::new(1.0, 1.0)).is_err());
        assert!(BeamParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn energy_identity_examples() {
        assert_eq!(bending_form_rewritten(1.0, 0.0, 0.0, 0.0, 0.0), 0.0);
        // theta- = 1, theta+ = -1, v_y = 0, L = 1: K_nu form is 4 + 4 + 2*2*(-1) ... = 4
        let v = nalgebra::Vector4::new(0.0, 1.0, 0.0, -1.0);
        let quad = v.dot(&(k_nu(1.0) * v));
        assert_relative_eq!(quad, 4.0, max_relative = 1e-15);
        assert_relative_eq!(bending_form_rewritten(1.0, 0.0, 1.0, 0.0, -1.0), 4.0, max_relative = 1e-15);
        for l in [0.1, 1.0] {
            let p = BeamParams::new(1.0, l).unwrap();
            assert!(energy_identities_check(&p, 1000, 9) <= 1e-12);
        }
    }

    #[test]
    fn assembly_is_symmetric_psd_with_translation_kernel() {
        for n in 2..=8 {
            for rho in [0.01, 1.0, 100.0] {
                let sys = assemble(&LatticeSpec::triangular(rho).unwrap(), n, 1.0).unwrap();
                let k = &sys.stiffness;
                assert!((k - k.transpose()).abs().max() <= 1e-14 * k.abs().max());
                let ev = k.clone().symmetric_eigenvalues();
                assert!(ev.min() > -1e-10 * ev.max());
                assert_eq!(sys.kernel_dimension(1e-10), 2, "n = {n}, rho = {rho}");
            }
        }
    }

    #[test]
    fn uniform_translation_and_rotation_actions() {
        let n = 5;
        let sys = assemble_triangular(n, &BeamParams::new(1.0, 0.2).unwrap()).unwrap();
        for t in sys.translation_basis() {
            assert!(sys.apply(&t).norm() < 1e-12);
        }
        let mut rot = DVector::zeros(sys.dof_count());
        for node in 0..n * n {
            rot[3 * node + 2] = 1.0;
        }
        let kv = sys.apply(&rot);
        let eps2 = sys.rhs_scale();
        for node in 0..n * n {
            assert!(kv[3 * node].abs() < 1e-14);
            assert!(kv[3 * node + 1].abs() < 1e-14);
            assert_relative_eq!(kv[3 * node + 2] / eps2, 36.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn assembled_energy_matches_beam_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for lattice in [LatticeSpec::triangular(0.5).unwrap(), LatticeSpec::rectangular(2.0).unwrap()] {
            let sys = assemble(&lattice, 4, 1.0).unwrap();
            let v = DVector::from_fn(sys.dof_count(), |_, _| rng.gen_range(-1.0..1.0));
            let e = sys.energy(&v);
            assert_relative_eq!(e, sys.energy_by_beams(&v).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn assembly_rejects_bad_sizes() {
        let p = BeamParams::new(1.0, 0.25).unwrap();
        assert!(assemble_triangular(1, &p).is_err());
        assert!(assemble_triangular(3, &p).is_err());
    }

    #[test]
    fn dense_solve_zero_and_constant_torque() {
        let n = 4;
        let sys = assemble_triangular(n, &BeamParams::new(1.0, 0.25).unwrap()).unwrap();
        let zf = GridFunction::from_real(&Array3::zeros((n, n, 2))).unwrap();
        let zt = GridFunction::from_real_scalar(&Array2::zeros((n, n))).unwrap();
        let sol = dense_solve(&sys, &zf, &zt).unwrap();
        assert_eq!(sol.u.max_abs(), 0.0);
        assert_eq!(sol.theta.max_abs(), 0.0);

        let c = 1.7;
        let tau = GridFunction::from_real_scalar(&Array2::from_elem((n, n), c)).unwrap();
        let sol = dense_solve(&sys, &zf, &tau).unwrap();
        assert!(sol.u.max_abs() < 1e-12);
        for v in sol.theta.values() {
            assert_relative_eq!(v.re, c / 36.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn dense_solve_rejects_net_force() {
        let n = 3;
        let sys = assemble_triangular(n, &BeamParams::new(1.0, 1.0 / 3.0).unwrap()).unwrap();
        let mut f = Array3::zeros((n, n, 2));
        f[[0, 0, 0]] = 1.0;
        let f = GridFunction::from_real(&f).unwrap();
        let t = GridFunction::from_real_scalar(&Array2::zeros((n, n))).unwrap();
        assert!(matches!(dense_solve(&sys, &f, &t), Err(Error::IncompatibleLoad { .. })));
    }

    #[test]
    fn single_mode_probe_matches_discrete_symbol() {
        use crate::fourier::freq_set;
        use crate::symbols::symbol_discrete;
        for lattice in [LatticeSpec::triangular(1.0).unwrap(), LatticeSpec::rectangular(0.3).unwrap()] {
            for n in [3usize, 4, 5] {
                let sys = assemble(&lattice, n, 1.0).unwrap();
                let eps = 1.0 / n as f64;
                for m in freq_set(n) {
                    let sym = symbol_discrete(&lattice, m, eps).unwrap().matrix();
                    for c in 0..3 {
                        let mut v = DVector::zeros(sys.dof_count());
                        for i in 0..n as i64 {
                            for j in 0..n as i64 {
                                let arg = 2.0 * std::f64::consts::PI * ((i * m.ip + j * m.jp) as f64) * eps;
                                v[sys.dof(i, j, c)] = Complex64::from_polar(1.0, arg);
                            }
                        }
                        let kv = sys.apply_complex(&v);
                        for i in 0..n as i64 {
                            for j in 0..n as i64 {
                                let arg = 2.0 * std::f64::consts::PI * ((i * m.ip + j * m.jp) as f64) * eps;
                                let phase = Complex64::from_polar(1.0, arg);
                                for r in 0..3 {
                                    let want = sym[(r, c)] * phase * (eps * eps);
                                    let got = kv[sys.dof(i, j, r)];
                                    assert!((got - want).norm() < 1e-12, "{m} {r}{c}: {got} vs {want}");
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
