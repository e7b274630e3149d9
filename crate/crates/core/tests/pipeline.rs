use proptest::prelude::*;
use rand::Rng;
use saccade_core::imagecore::{resize, ImageBuffer, ScalarField};
use saccade_core::pipeline::{
    bench, generate_views, preset, replay_view, run_batch, BenchImage, PipelineConfig, Stage, StageSpec,
    ThroughputReport,
};
use saccade_core::rng::seeded_rng;
use saccade_core::Error;
use std::time::Duration;

fn noise_image(seed: u64, h: usize, w: usize) -> ImageBuffer {
    let mut rng = seeded_rng(seed);
    ImageBuffer::from_fn(h, w, 3, |x, y, c| {
        (0.5 + 0.4 * ((x as f32 * 0.3 + c as f32).sin() * (y as f32 * 0.2).cos())) * 0.8 + 0.2 * rng.random::<f32>()
    })
    .unwrap()
}

fn blob_saliency(h: usize, w: usize) -> ScalarField {
    ScalarField::from_fn(h, w, |x, y| -(((x as f64 - 0.7 * w as f64).powi(2) + (y as f64 - 0.3 * h as f64).powi(2)) / 40.0)).unwrap()
}

#[test]
fn never_firing_flip_gives_resized_input() {
    let img = noise_image(1, 60, 80);
    let mut cfg = PipelineConfig::new(vec![StageSpec::with_probability(Stage::Hflip, 0.0)]);
    cfg.views_per_image = 3;
    let expected = resize(&img, 96, 96);
    for (view, _) in generate_views(&img, None, &cfg, "a").unwrap() {
        assert_eq!(view, expected);
    }
}

#[test]
fn missing_saliency_is_reported() {
    let img = noise_image(2, 40, 40);
    let cfg = preset("exp4_magnif_T1").unwrap();
    assert!(matches!(generate_views(&img, None, &cfg, "a"), Err(Error::MissingSaliency { .. })));
    let cfg = preset("exp1_crop_flat_blur").unwrap();
    assert!(generate_views(&img, None, &cfg, "a").is_ok());
}

#[test]
fn config_rules() {
    let mut cfg = PipelineConfig::new(vec![
        StageSpec::always(Stage::Hflip),
        StageSpec::always(Stage::RandomResizedCrop(Default::default())),
        StageSpec::always(Stage::Magnify(Default::default())),
    ]);
    assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    cfg.allow_multiple_spatial = true;
    cfg.validate().unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&cfg.to_json().unwrap()).unwrap();
    json["surprise"] = serde_json::json!(1);
    assert!(PipelineConfig::from_json(&json.to_string()).is_err());
    let mut json: serde_json::Value = serde_json::from_str(&cfg.to_json().unwrap()).unwrap();
    json["stages"][2]["stage"]["params"]["bogus"] = serde_json::json!(1);
    assert!(PipelineConfig::from_json(&json.to_string()).is_err());
    cfg.stages[0].probability = 1.5;
    assert!(cfg.validate().is_err());
}

#[test]
fn thread_count_does_not_change_outputs() {
    let images: Vec<ImageBuffer> = (0..6).map(|i| noise_image(i, 50 + i as usize, 70)).collect();
    let sal = blob_saliency(50, 70);
    let cfg = preset("exp4_magnif_T0.3").unwrap();
    let job = |i: usize| generate_views(&images[i], Some(&sal), &cfg, &format!("img{i}"));
    let one = run_batch(images.len(), 1, job).unwrap();
    let many = run_batch(images.len(), 4, job).unwrap();
    assert_eq!(one, many);
}

#[test]
fn bench_contract() {
    let imgs = vec![BenchImage { id: "x".into(), image: noise_image(3, 96, 96), saliency: None }];
    let magnif = preset("exp2_magnif_[0.05,0.35]").unwrap();
    let empty = bench(&magnif, &imgs, Duration::ZERO).unwrap();
    assert_eq!(empty.to_csv(), format!("{}\n", ThroughputReport::CSV_HEADER));
    assert!(bench(&magnif, &[], Duration::from_millis(10)).is_err());
    let identity = PipelineConfig::new(vec![]);
    let a = bench(&identity, &imgs, Duration::from_millis(300)).unwrap();
    let b = bench(&magnif, &imgs, Duration::from_millis(300)).unwrap();
    assert!(a.views_per_second >= b.views_per_second, "{a:?} vs {b:?}");
    assert!(b.to_csv().lines().any(|l| l.starts_with("stage_mean_ms,magnify,")));
    assert!(b.peak_working_set_bytes > 0);
}

const REPLAY_PRESETS: [&str; 6] = [
    "exp1_crop_fov_[0.01,0.5]",
    "exp1_fov_[0.1,0.5]",
    "exp1_blur_only",
    "exp2_crop_blur",
    "exp3_crop_T0.1",
    "sweep_fov45_K-15_[0.01,1.5]",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn replay_is_bit_exact(seed in any::<u64>(), which in 0usize..REPLAY_PRESETS.len()) {
        let img = noise_image(seed % 97, 72, 88);
        let sal = blob_saliency(36, 44);
        let mut cfg = preset(REPLAY_PRESETS[which]).unwrap();
        cfg.master_seed = seed;
        for (view, rec) in generate_views(&img, Some(&sal), &cfg, "img").unwrap() {
            prop_assert_eq!(view.shape(), (96, 96));
            prop_assert!(view.data().iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert_eq!(&replay_view(&img, &cfg, &rec).unwrap(), &view);
            let back: saccade_core::ViewRecord = serde_json::from_str(&serde_json::to_string(&rec).unwrap()).unwrap();
            prop_assert_eq!(back, rec);
        }
    }
}
