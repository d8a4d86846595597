//! Independent oracles: the dense assembled frame against the Fourier solver,
//! direct DFT sums against the FFT path, and the PDE symbol against the
//! continuum symbol.

use beamhom::beam::{assemble, dense_solve};
use beamhom::fourier::{dft, dft_direct, freq_set, idft, idft_direct};
use beamhom::solver::{solve_field, LoadSpec};
use beamhom::symbols::{symbol_continuum, PdeOperator};
use beamhom::{Domain, FreqIndex, GridFunction, LatticeSpec, ModelKind};
use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_compatible(n: usize, rng: &mut ChaCha8Rng) -> (GridFunction, GridFunction) {
    let mut f = Array3::from_shape_fn((n, n, 2), |_| rng.gen_range(-1.0..1.0));
    for c in 0..2 {
        let mean = f.slice(ndarray::s![.., .., c]).sum() / (n * n) as f64;
        f.slice_mut(ndarray::s![.., .., c]).mapv_inplace(|v| v - mean);
    }
    let tau = Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0..1.0));
    (GridFunction::from_real(&f).unwrap(), GridFunction::from_real_scalar(&tau).unwrap())
}

fn max_gap(family: fn(f64) -> beamhom::Result<LatticeSpec>, n_list: &[usize], trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for &n in n_list {
        for rho in [0.01, 1.0, 100.0] {
            let spec = family(rho).unwrap();
            let sys = assemble(&spec, n, 1.0).unwrap();
            for _ in 0..trials {
                let (f, tau) = random_compatible(n, &mut rng);
                let dense = dense_solve(&sys, &f, &tau).unwrap();
                let loads = LoadSpec::from_spatial(&f, &tau).unwrap();
                let spectral = solve_field(&spec, n, &loads, ModelKind::Discrete).unwrap().to_spatial().unwrap();
                worst = worst
                    .max(dense.u.sub(&spectral.u).unwrap().max_abs())
                    .max(dense.theta.sub(&spectral.theta).unwrap().max_abs());
            }
        }
    }
    worst
}

#[test]
fn dense_frame_matches_fourier_solver_triangular() {
    let gap = max_gap(LatticeSpec::triangular, &[3, 4, 6, 8], 3);
    assert!(gap < 1e-9, "gap {gap:e}");
}

#[test]
fn dense_frame_matches_fourier_solver_rectangular() {
    let gap = max_gap(LatticeSpec::rectangular, &[3, 4, 5], 2);
    assert!(gap < 1e-9, "gap {gap:e}");
}

#[test]
fn fft_path_matches_direct_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [17usize, 20, 33] {
        let v = Array3::from_shape_fn((n, n, 2), |_| rng.gen_range(-1.0..1.0));
        let f = GridFunction::from_real(&v).unwrap();
        let a = dft(&f).unwrap();
        let b = dft_direct(&f).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-13, "n = {n}");
        let back = idft(&a).unwrap();
        let back_direct = idft_direct(&a).unwrap();
        assert!(back.sub(&back_direct).unwrap().max_abs() < 1e-11);
        assert!(back.sub(&f).unwrap().max_abs() < 1e-12);
        assert_eq!(back.domain(), Domain::Spatial);
    }
}

#[test]
fn homogenized_operator_reproduces_continuum_symbol() {
    for spec in [LatticeSpec::triangular(0.7).unwrap(), LatticeSpec::rectangular(3.0).unwrap()] {
        let op = PdeOperator::homogenized(&spec);
        for m in freq_set(7) {
            let gap = (op.symbol(m) - symbol_continuum(&spec, m).matrix()).norm();
            assert!(gap < 1e-9 * (1.0 + m.sq_norm()), "{m}: {gap:e}");
        }
    }
    let op = PdeOperator::homogenized(&LatticeSpec::triangular(1.0).unwrap());
    assert!(op.symbol(FreqIndex::ZERO)[(2, 2)].re > 0.0);
}
