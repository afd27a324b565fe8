use std::f64::consts::PI;

use landau_spectra::eigensolve::{count_below, count_in, eigs_window, EigenOptions, Method};
use landau_spectra::geometry::{Potential, Profile, TorusConfig};
use landau_spectra::lattice::LatticeOperator;
use landau_spectra::linalg::{dot, norm2, C64};
use landau_spectra::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_PI: f64 = 2.0 * PI;

fn modulated(eps: f64) -> TorusConfig {
    TorusConfig::new(1, eps, Profile::CosX, Potential::Zero).unwrap()
}

#[test]
fn lowest_landau_level_degeneracy() {
    let op = LatticeOperator::assemble(&TorusConfig::constant(1), 8, 64).unwrap();
    let ew = eigs_window(&op, -1.0, 3.0 * TWO_PI * 0.8, &EigenOptions::default()).unwrap();
    assert_eq!(ew.len(), 8, "{:?}", ew.values);
    for v in &ew.values {
        assert!((v - TWO_PI).abs() < 0.05 * TWO_PI, "{v}");
    }
    assert_eq!(count_below(&op, 3.0 * TWO_PI * 0.8).unwrap(), 8);
}

#[test]
fn count_matches_window_length() {
    let op = LatticeOperator::assemble(&TorusConfig::constant(1), 8, 64).unwrap();
    assert_eq!(count_in(&op, PI, 4.0 * PI).unwrap(), 8);
    let ew = eigs_window(&op, PI, 4.0 * PI, &EigenOptions::default()).unwrap();
    assert_eq!(ew.len(), 8);
    assert!(ew.max_residual() <= ew.tol);
    assert!(ew.orthonormality_defect() <= 1e-8);
    assert!(ew.values.iter().all(|&v| v > PI && v < 4.0 * PI));
}

#[test]
fn nothing_below_minimum_potential() {
    let cfg = TorusConfig::new(1, 0.1, Profile::CosX, Potential::Renormalized).unwrap();
    let op = LatticeOperator::assemble(&cfg, 4, 32).unwrap();
    let min_v = op.potential().iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(count_below(&op, min_v - 1e-6).unwrap(), 0);
    let ew = eigs_window(&op, min_v - 1.0, min_v - 1e-6, &EigenOptions::default()).unwrap();
    assert!(ew.is_empty());
}

#[test]
fn variational_sanity() {
    let op = LatticeOperator::assemble(&modulated(0.1), 4, 48).unwrap();
    let opts = EigenOptions {
        method: Method::Lanczos,
        ..EigenOptions::default()
    };
    let ew = eigs_window(&op, -1.0, 11.0, &opts).unwrap();
    assert!(!ew.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = op.matrix();
    let rq_min = (0..100)
        .map(|_| {
            let v: Vec<C64> = (0..op.dim()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            dot(&v, &h.matvec(&v)).re / norm2(&v).powi(2)
        })
        .fold(f64::INFINITY, f64::min);
    assert!(ew.values[0] <= rq_min + ew.tol);
}

fn lowest(p: u32, n: usize, cfg: &TorusConfig) -> f64 {
    let op = LatticeOperator::assemble(cfg, p, n).unwrap();
    eigs_window(&op, -1.0, 2.0 * TWO_PI, &EigenOptions::default()).unwrap().values[0]
}

#[test]
fn second_order_consistency_in_n() {
    for cfg in [TorusConfig::constant(1), modulated(0.1)] {
        let l: Vec<f64> = [16, 32, 64].iter().map(|&n| lowest(2, n, &cfg)).collect();
        let ratio = (l[0] - l[1]) / (l[1] - l[2]);
        assert!((2.5..=6.0).contains(&ratio), "{l:?} ratio {ratio}");
    }
}

#[test]
fn zero_field_lowest_mode_is_constant() {
    let op = LatticeOperator::zero_field(3, 16).unwrap();
    let ew = eigs_window(&op, -1.0, 1.0, &EigenOptions::default()).unwrap();
    assert_eq!(ew.len(), 1);
    assert!(ew.values[0].abs() < 1e-9);
    let v = &ew.vectors[0];
    let expected = 1.0 / 16.0;
    assert!(v.iter().all(|x| (x - C64::new(expected, 0.0)).norm() < 1e-9));
}

#[test]
fn boundary_hit_reported() {
    let op = LatticeOperator::zero_field(1, 8).unwrap();
    assert!(matches!(
        eigs_window(&op, 0.0, 1.0, &EigenOptions::default()),
        Err(Error::WindowBoundaryHit { .. })
    ));
}

#[test]
fn fixed_seed_is_bit_stable() {
    let op = LatticeOperator::assemble(&modulated(0.1), 4, 48).unwrap();
    let opts = EigenOptions {
        method: Method::Lanczos,
        seed: 5,
        ..EigenOptions::default()
    };
    let a = eigs_window(&op, 0.0, 11.0, &opts).unwrap();
    let b = eigs_window(&op, 0.0, 11.0, &opts).unwrap();
    assert_eq!(a.values, b.values);
}

fn sorted_dense(op: &LatticeOperator) -> Vec<f64> {
    let ew = eigs_window(
        op,
        op.matrix().gershgorin_interval().0 - 1.0,
        op.matrix().gershgorin_interval().1 + 1.0,
        &EigenOptions {
            method: Method::Dense,
            ..EigenOptions::default()
        },
    )
    .unwrap();
    ew.values
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn gauge_transform_preserves_spectrum(seed in any::<u64>(), p in 1u32..6, eps in 0.0f64..0.3) {
        let op = LatticeOperator::assemble(&modulated(eps), p, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phases: Vec<C64> = (0..op.dim()).map(|_| C64::from_polar(1.0, rng.gen_range(0.0..TWO_PI))).collect();
        let g = op.gauge_transform(&phases).unwrap();
        let (a, b) = (sorted_dense(&op), sorted_dense(&g));
        let scale = a.iter().map(|v| v.abs()).fold(1.0, f64::max);
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn assembly_is_hermitian_and_sparse(p in 1u32..8, n in 8usize..20, eps in 0.0f64..0.5, m in 1u32..3) {
        let cfg = TorusConfig::new(m, eps, Profile::CosXCosY, Potential::Zero).unwrap();
        if let Ok(op) = LatticeOperator::assemble(&cfg, p, n) {
            prop_assert_eq!(op.matrix().hermitian_defect(), 0.0);
            prop_assert!(op.matrix().max_row_nnz() <= 5);
            prop_assert!((op.links().max_modulus_defect()) <= 1e-14);
        }
    }

    #[test]
    fn counts_are_additive(cut in 0.5f64..0.95) {
        let op = LatticeOperator::assemble(&modulated(0.2), 3, 16).unwrap();
        let (lo, hi) = (-0.5, 30.0);
        let mid = lo + cut * (hi - lo);
        if let (Ok(a), Ok(b), Ok(t)) = (count_in(&op, lo, mid), count_in(&op, mid, hi), count_in(&op, lo, hi)) {
            prop_assert_eq!(a + b, t);
        }
    }
}
