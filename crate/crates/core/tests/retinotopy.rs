use proptest::prelude::*;
use rand::Rng;
use saccade_core::cortmagnif::RadialTransform;
use saccade_core::retinotopy::{
    ecc_nondimensional, fit_radial_model, fit_report, nondimensionalize, r_squared, InitGrid, RetinotopyPoint,
};
use saccade_core::rng::seeded_rng;

fn model_points(t: &RadialTransform, radii: &[f64]) -> Vec<RetinotopyPoint> {
    radii.iter().map(|&r| RetinotopyPoint { r, e: t.ecc(r) }).collect()
}

#[test]
fn refit_is_unit_free() {
    let truth = RadialTransform::new(1.4, -6.0, 12.0).unwrap();
    let radii: Vec<f64> = (1..=25).map(|i| i as f64 * 1.6).collect();
    let base = model_points(&truth, &radii);
    for (sr, se) in [(1.0, 1.0), (3.7, 0.4), (0.05, 12.0)] {
        let pts: Vec<_> = base.iter().map(|p| RetinotopyPoint { r: p.r * sr, e: p.e * se }).collect();
        let fit = fit_radial_model(&pts, &InitGrid::for_points(&pts)).unwrap();
        assert!((fit.k_tilde + 0.5).abs() < 1e-3, "scale ({sr}, {se}): {fit:?}");
        assert!((fit.r_fov / (12.0 * sr) - 1.0).abs() < 1e-3);
        assert!((fit.c / (1.4 * sr / se) - 1.0).abs() < 1e-3);
    }
}

#[test]
fn report_serializes_with_metadata() {
    let truth = RadialTransform::new(2.0, 4.0, 10.0).unwrap();
    let radii: Vec<f64> = (1..=16).map(|i| i as f64 * 1.5).collect();
    let rep = fit_report(&model_points(&truth, &radii), 20, 9).unwrap();
    let json = serde_json::to_value(&rep).unwrap();
    assert!(json["metadata"]["ci_method"].as_str().unwrap().contains("bootstrap"));
    assert!(json["metadata"]["exponential_form"].as_str().unwrap().contains("exp"));
    assert_eq!(json["radial"]["residuals"].as_array().unwrap().len(), 16);
    assert!(json["bootstrap"]["k_tilde"].is_array());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nondimensional_form_matches(r in 0.0f64..200.0, c in 0.05f64..10.0, r_fov in 0.5f64..60.0, kt in -0.99f64..5.0) {
        let k = kt * r_fov;
        let t = RadialTransform::new(c, k, r_fov).unwrap();
        let (ct, kt2) = nondimensionalize(c, k, r_fov).unwrap();
        let direct = t.ecc(r);
        let re = ecc_nondimensional(r / r_fov, ct, kt2);
        prop_assert!((direct - re).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn radial_beats_line_through_origin(seed in 0u64..200) {
        let mut rng = seeded_rng(seed);
        let pts: Vec<_> = (0..12)
            .map(|i| RetinotopyPoint { r: 1.0 + i as f64 + rng.random::<f64>(), e: rng.random::<f64>() * 10.0 + i as f64 })
            .collect();
        let fit = fit_radial_model(&pts, &InitGrid::for_points(&pts)).unwrap();
        let slope = pts.iter().map(|p| p.r * p.e).sum::<f64>() / pts.iter().map(|p| p.r * p.r).sum::<f64>();
        let line: Vec<f64> = pts.iter().map(|p| slope * p.r).collect();
        let obs: Vec<f64> = pts.iter().map(|p| p.e).collect();
        prop_assert!(fit.r_squared >= r_squared(&line, &obs).unwrap() - 1e-12);
        prop_assert!(fit.r_squared <= 1.0);
        prop_assert_eq!(fit.k_tilde, fit.k / fit.r_fov);
    }
}
