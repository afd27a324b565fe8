use std::f64::consts::PI;

use landau_spectra::analysis::rate_fit;
use landau_spectra::geometry::{liouville_measure, quantization_check, Potential, Profile, TorusConfig};
use landau_spectra::model_spectrum::{landau_level_kernel, Band, SigmaSet};
use proptest::prelude::*;

proptest! {
    #[test]
    fn rate_fit_recovers_power_laws(c in 0.1f64..10.0, e in -2.0f64..-0.05) {
        let pts: Vec<(f64, f64)> = [4.0, 8.0, 16.0, 32.0].iter().map(|&p: &f64| (p, c * p.powf(e))).collect();
        let fit = rate_fit(&pts).unwrap();
        prop_assert!((fit.slope - e).abs() < 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-9);
    }

    #[test]
    fn distance_to_sigma_is_consistent(
        starts in prop::collection::vec(0.0f64..50.0, 1..6),
        widths in prop::collection::vec(0.0f64..3.0, 6),
        lambda in -5.0f64..60.0,
    ) {
        let bands: Vec<Band> = starts
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(k, (&a, &w))| Band { k: vec![k], mu: 0, alpha: a, beta: a + w })
            .collect();
        let sigma = SigmaSet::from_bands(bands.clone(), 100.0).unwrap();
        let d = sigma.distance(lambda);
        prop_assert!(d >= 0.0);
        let direct = bands
            .iter()
            .map(|b| if lambda < b.alpha { b.alpha - lambda } else if lambda > b.beta { lambda - b.beta } else { 0.0 })
            .fold(f64::INFINITY, f64::min);
        prop_assert!((d - direct).abs() < 1e-12);
        prop_assert_eq!(sigma.avoids(lambda), direct > 0.0);
    }

    #[test]
    fn quantized_fields_recover_flux(m in 1u32..6, eps in 0.0f64..0.9) {
        let cfg = TorusConfig::new(m, eps, Profile::CosXCosY, Potential::Zero).unwrap();
        prop_assert_eq!(quantization_check(&cfg.field_values(64), 64).unwrap(), m);
    }

    #[test]
    fn liouville_measure_is_additive(cut in 0.05f64..0.95, eps in 0.0f64..0.5) {
        let cfg = TorusConfig::new(1, eps, Profile::CosX, Potential::Zero).unwrap();
        let field = cfg.field_grid(64).unwrap();
        let left = liouville_measure(&field, |pt| pt.coords[0] < cut);
        let right = liouville_measure(&field, |pt| pt.coords[0] >= cut);
        prop_assert!((left + right - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn landau_kernels_are_hermitian(k in 0usize..5, a in 0.5f64..10.0, z in prop::array::uniform4(-1.0f64..1.0)) {
        let (zz, zp) = ([z[0], z[1]], [z[2], z[3]]);
        let x = landau_level_kernel(&[a], &[k], &zz, &zp);
        let y = landau_level_kernel(&[a], &[k], &zp, &zz);
        prop_assert!((x - y.conj()).norm() < 1e-12 * (1.0 + x.norm()));
        let diag = landau_level_kernel(&[a], &[k], &zz, &zz);
        prop_assert!((diag.re - a / (2.0 * PI)).abs() < 1e-12 && diag.im.abs() < 1e-12);
    }

    #[test]
    fn kernel_modulus_depends_on_separation_only(k in 0usize..4, shift in prop::array::uniform2(-2.0f64..2.0), d in prop::array::uniform2(-1.0f64..1.0)) {
        let a = 2.0 * PI;
        let base = landau_level_kernel(&[a], &[k], &[0.0, 0.0], &d).norm();
        let moved = landau_level_kernel(&[a], &[k], &shift, &[shift[0] + d[0], shift[1] + d[1]]).norm();
        prop_assert!((base - moved).abs() < 1e-12);
    }
}
