//! Named configurations for the blur, magnification, saliency-temperature and
//! magnification-shape experiments.

use super::config::{CropParams, PipelineConfig, PresetMeta, SaliencyCropParams, Stage, StageSpec};
use crate::cortmagnif::{MagnifParams, RadialTransform, DEFAULT_K, DEFAULT_R_FOV};
use crate::error::{Error, Result};
use crate::fixation::SamplerMode;
use crate::fovblur::FovBlurParams;

/// Foveal-area ranges of the blur experiment.
pub const FOV_AREA_RANGES: [[f64; 2]; 3] = [[0.01, 0.1], [0.01, 0.5], [0.1, 0.5]];
/// Cover-ratio ranges of the magnification experiments.
pub const COVER_RANGES: [[f64; 2]; 4] = [[0.01, 0.35], [0.05, 0.35], [0.05, 0.7], [0.01, 1.5]];
/// The best-performing cover range, used where only one is needed.
pub const DEFAULT_COVER_RANGE: [f64; 2] = [0.05, 0.35];
pub const SWEEP_FOV: [f64; 3] = [15.0, 30.0, 45.0];
pub const SWEEP_K: [f64; 6] = [-15.0, -7.5, 5.0, 20.0, 35.0, 50.0];
pub const TEMPERATURE_GRID: [f64; 6] = [0.01, 0.1, 0.3, 1.0, 1.5, 4.5];
pub const CROP_SWEET_SPOT: [f64; 2] = [0.3, 4.5];
pub const MAGNIF_SWEET_SPOT: [f64; 2] = [0.3, 1.5];
/// Saliency temperature for the saliency-guided crops of the blur experiment,
/// where none was reported.
pub const BLUR_EXPERIMENT_TEMPERATURE: f64 = 1.0;

const JITTER_STRENGTH: f32 = 0.5;
const JITTER_P: f64 = 0.8;
const GRAY_P: f64 = 0.2;
const BLUR_P: f64 = 0.5;
const BLUR_SIGMA: [f64; 2] = [0.1, 2.0];
const FLIP_P: f64 = 0.5;

fn range_tag(r: [f64; 2]) -> String {
    format!("[{},{}]", r[0], r[1])
}

/// `spatial` stages followed by jitter → grayscale → (blur) → flip.
fn compose(spatial: Vec<Stage>, with_blur: bool) -> Vec<StageSpec> {
    let mut stages: Vec<StageSpec> = spatial.into_iter().map(StageSpec::always).collect();
    stages.push(StageSpec::with_probability(
        Stage::ColorJitter { strength: JITTER_STRENGTH },
        JITTER_P,
    ));
    stages.push(StageSpec::with_probability(Stage::Grayscale, GRAY_P));
    if with_blur {
        stages.push(StageSpec::with_probability(Stage::UniformBlur { sigma_range: BLUR_SIGMA }, BLUR_P));
    }
    stages.push(StageSpec::with_probability(Stage::Hflip, FLIP_P));
    stages
}

fn inherited(with_blur: bool, with_crop: bool) -> Vec<String> {
    let mut v: Vec<String> = ["color_jitter.strength", "color_jitter.probability", "grayscale.probability", "hflip.probability"]
        .into_iter()
        .map(String::from)
        .collect();
    if with_blur {
        v.extend(["uniform_blur.probability".into(), "uniform_blur.sigma_range".into()]);
    }
    if with_crop {
        v.extend(["crop.scale_range".into(), "crop.ratio_range".into()]);
    }
    v
}

fn config(stages: Vec<StageSpec>, meta: PresetMeta) -> PipelineConfig {
    let spatial = stages.iter().filter(|s| s.stage.is_spatial()).count();
    PipelineConfig {
        allow_multiple_spatial: spatial > 1,
        metadata: Some(meta),
        ..PipelineConfig::new(stages)
    }
}

fn meta(family: &str, inherited: Vec<String>, unreported: &[&str]) -> PresetMeta {
    PresetMeta {
        family: family.into(),
        inherited,
        unreported: unreported.iter().map(|s| s.to_string()).collect(),
        ..PresetMeta::default()
    }
}

fn saliency_crop(temperature: f64, flat: bool) -> Stage {
    Stage::SaliencyCrop(SaliencyCropParams::new(CropParams::default(), temperature, flat))
}

fn fovblur(range: [f64; 2]) -> Stage {
    Stage::Fovblur(FovBlurParams {
        fov_area_range: range,
        ..FovBlurParams::default()
    })
}

fn magnify(r_fov: f64, k: f64, cover: [f64; 2]) -> Stage {
    Stage::Magnify(MagnifParams {
        r_fov,
        k,
        cover_range: cover,
        out_shape: None,
    })
}

const FOVBLUR_UNREPORTED: [&str; 3] = ["fovblur.n_belts", "fovblur.k_blur", "fovblur.e_r"];

/// Every registered preset name, in a stable order.
pub fn preset_names() -> Vec<String> {
    let mut names: Vec<String> = vec![
        "exp1_crop_original_blur".into(),
        "exp1_crop_flat_blur".into(),
        "exp1_crop_saliency_blur".into(),
    ];
    for r in FOV_AREA_RANGES {
        names.push(format!("exp1_crop_fov_{}", range_tag(r)));
    }
    for r in FOV_AREA_RANGES {
        names.push(format!("exp1_fov_{}", range_tag(r)));
    }
    names.push("exp1_blur_only".into());
    names.push("exp2_crop_blur".into());
    for r in COVER_RANGES {
        names.push(format!("exp2_magnif_{}", range_tag(r)));
    }
    for t in TEMPERATURE_GRID {
        names.push(format!("exp3_crop_T{t}"));
    }
    for t in TEMPERATURE_GRID {
        names.push(format!("exp4_magnif_T{t}"));
    }
    for fov in SWEEP_FOV {
        for k in SWEEP_K {
            for r in COVER_RANGES {
                names.push(format!("sweep_fov{fov}_K{k}_{}", range_tag(r)));
            }
            names.push(format!("sweep_fov{fov}_K{k}"));
        }
    }
    names
}

fn parse_range(tag: &str, choices: &[[f64; 2]]) -> Option<[f64; 2]> {
    choices.iter().copied().find(|r| range_tag(*r) == tag)
}

fn parse_value(tag: &str, choices: &[f64]) -> Option<f64> {
    choices.iter().copied().find(|v| format!("{v}") == tag)
}

/// Resolves a preset name. Shape-sweep names whose `(fov, K)` pair has
/// `K <= -fov` are recognised but fail with `DegenerateWarp`.
pub fn preset(name: &str) -> Result<PipelineConfig> {
    let unknown = || Error::UnknownPreset(name.to_string());
    let std_crop = Stage::RandomResizedCrop(CropParams::default());
    let cfg = match name {
        "exp1_crop_original_blur" | "exp2_crop_blur" => config(
            compose(vec![std_crop], true),
            meta(if name.starts_with("exp1") { "blur" } else { "magnification" }, inherited(true, true), &[]),
        ),
        "exp1_crop_flat_blur" => config(
            compose(vec![saliency_crop(BLUR_EXPERIMENT_TEMPERATURE, true)], true),
            meta("blur", inherited(true, true), &[]),
        ),
        "exp1_crop_saliency_blur" => config(
            compose(vec![saliency_crop(BLUR_EXPERIMENT_TEMPERATURE, false)], true),
            meta("blur", inherited(true, true), &["saliency_crop.temperature"]),
        ),
        "exp1_blur_only" => config(compose(vec![], true), meta("blur", inherited(true, false), &[])),
        _ => {
            if let Some(tag) = name.strip_prefix("exp1_crop_fov_") {
                let r = parse_range(tag, &FOV_AREA_RANGES).ok_or_else(unknown)?;
                let mut unrep = FOVBLUR_UNREPORTED.to_vec();
                unrep.push("saliency_crop.temperature");
                config(
                    compose(vec![saliency_crop(BLUR_EXPERIMENT_TEMPERATURE, false), fovblur(r)], false),
                    meta("blur", inherited(false, true), &unrep),
                )
            } else if let Some(tag) = name.strip_prefix("exp1_fov_") {
                let r = parse_range(tag, &FOV_AREA_RANGES).ok_or_else(unknown)?;
                config(
                    compose(vec![fovblur(r)], false),
                    meta("blur", inherited(false, false), &FOVBLUR_UNREPORTED),
                )
            } else if let Some(tag) = name.strip_prefix("exp2_magnif_") {
                let r = parse_range(tag, &COVER_RANGES).ok_or_else(unknown)?;
                config(
                    compose(vec![magnify(DEFAULT_R_FOV, DEFAULT_K, r)], false),
                    meta("magnification", inherited(false, false), &[]),
                )
            } else if let Some(tag) = name.strip_prefix("exp3_crop_T") {
                let t = parse_value(tag, &TEMPERATURE_GRID).ok_or_else(unknown)?;
                let mut c = config(
                    compose(vec![saliency_crop(t, false)], true),
                    meta("saliency_crop", inherited(true, true), &[]),
                );
                let m = c.metadata.as_mut().expect("set by config()");
                m.temperature_grid = TEMPERATURE_GRID.to_vec();
                m.temperature_sweet_spot = Some(CROP_SWEET_SPOT);
                c
            } else if let Some(tag) = name.strip_prefix("exp4_magnif_T") {
                let t = parse_value(tag, &TEMPERATURE_GRID).ok_or_else(unknown)?;
                let mut c = config(
                    compose(vec![magnify(DEFAULT_R_FOV, DEFAULT_K, DEFAULT_COVER_RANGE)], false),
                    meta("saliency_magnification", inherited(false, false), &["magnify.cover_range"]),
                );
                c.fixation = SamplerMode::Saliency { temperature: t };
                let m = c.metadata.as_mut().expect("set by config()");
                m.temperature_grid = TEMPERATURE_GRID.to_vec();
                m.temperature_sweet_spot = Some(MAGNIF_SWEET_SPOT);
                c
            } else if let Some(rest) = name.strip_prefix("sweep_fov") {
                let (fov_tag, rest) = rest.split_once("_K").ok_or_else(unknown)?;
                let (k_tag, cover_tag) = match rest.split_once('_') {
                    Some((k, c)) => (k, Some(c)),
                    None => (rest, None),
                };
                let fov = parse_value(fov_tag, &SWEEP_FOV).ok_or_else(unknown)?;
                let k = parse_value(k_tag, &SWEEP_K).ok_or_else(unknown)?;
                let cover = match cover_tag {
                    Some(tag) => parse_range(tag, &COVER_RANGES).ok_or_else(unknown)?,
                    None => DEFAULT_COVER_RANGE,
                };
                // Reject degenerate shapes up front.
                RadialTransform::new(1.0, k, fov)?;
                config(
                    compose(vec![magnify(fov, k, cover)], false),
                    meta("magnification_sweep", inherited(false, false), &[]),
                )
            } else {
                return Err(unknown());
            }
        }
    };
    cfg.validate()?;
    Ok(cfg)
}
