use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{PipelineConfig, Stage};
use super::crop::{sample_crop_box, CenterSampler};
use crate::cortmagnif::{build_grid, magnify_with_cover, solve_scale_for_cover, MagnifParams, RadialTransform};
use crate::error::{Error, Result};
use crate::fixation::{density_for_image, uniform_central_point, FixationPoint, GazeDensity, SamplerMode};
use crate::fovblur::foveate_blur_with_area;
use crate::imagecore::{
    apply_jitter, crop_resize, crop_resize_field, gaussian_blur, hflip, remap_field, resize, resize_field,
    to_grayscale, CropBox, ImageBuffer, JitterFactors, ScalarField,
};
use crate::rng::{view_rng, ViewRng, RNG_ALGORITHM};

/// What one stage did to one view.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case", deny_unknown_fields)]
pub enum AppliedStage {
    Skipped { kind: String },
    Fovblur { fixation: FixationPoint, fov_area: f64 },
    Magnify { fixation: FixationPoint, cover: f64 },
    Crop { crop_box: CropBox },
    Hflip,
    Grayscale,
    ColorJitter { factors: JitterFactors },
    UniformBlur { sigma: f64 },
}

/// Everything needed to regenerate a view without its rng stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewRecord {
    pub image_id: String,
    pub view_index: u64,
    pub master_seed: u64,
    pub rng: String,
    pub stages: Vec<AppliedStage>,
}

/// Accumulated wall time per stage kind.
#[derive(Clone, Debug, Default)]
pub struct StageTimes {
    pub entries: Vec<(&'static str, f64, usize)>,
}

impl StageTimes {
    fn add(&mut self, name: &'static str, secs: f64) {
        match self.entries.iter_mut().find(|e| e.0 == name) {
            Some(e) => {
                e.1 += secs;
                e.2 += 1;
            }
            None => self.entries.push((name, secs, 1)),
        }
    }
}

fn magnify_params(p: &MagnifParams, out: usize) -> MagnifParams {
    MagnifParams {
        out_shape: Some(p.out_shape.unwrap_or((out, out))),
        ..p.clone()
    }
}

/// Brings the working image (and the tracked saliency) to the output frame.
fn to_output_frame(img: &mut ImageBuffer, sal: &mut Option<ScalarField>, out: usize) {
    if img.shape() != (out, out) {
        *img = resize(img, out, out);
        if let Some(s) = sal.as_mut() {
            *s = resize_field(s, out, out);
        }
    }
}

fn draw_fixation<R: Rng + ?Sized>(
    mode: &SamplerMode,
    shape: (usize, usize),
    sal: Option<&ScalarField>,
    stage: &str,
    rng: &mut R,
) -> Result<FixationPoint> {
    let (h, w) = shape;
    match *mode {
        SamplerMode::UniformCentral { margin_fraction } => Ok(uniform_central_point(w, h, margin_fraction, rng)),
        SamplerMode::Saliency { temperature } => {
            let sal = sal.ok_or_else(|| Error::MissingSaliency { stage: stage.into() })?;
            Ok(density_for_image(sal, h, w, temperature)?.sample_point(rng))
        }
    }
}

enum Source<'a> {
    Sample(&'a mut ViewRng),
    Replay(std::slice::Iter<'a, AppliedStage>),
}

/// Shared driver for generation and replay: both paths run the same
/// deterministic stage functions on the same parameters.
fn run_view(
    image: &ImageBuffer,
    saliency: Option<&ScalarField>,
    config: &PipelineConfig,
    mut source: Source<'_>,
    mut times: Option<&mut StageTimes>,
) -> Result<(ImageBuffer, Vec<AppliedStage>)> {
    let out = config.output_size;
    let mut img = image.clone();
    let mut sal = saliency.map(|s| resize_field(s, img.height(), img.width()));
    let mut trail = Vec::with_capacity(config.stages.len());

    for (idx, spec) in config.stages.iter().enumerate() {
        let start = Instant::now();
        let stage = &spec.stage;
        let keep_saliency = sal.is_some()
            && config.stages[idx + 1..].iter().any(|s| match &s.stage {
                Stage::SaliencyCrop(p) => !p.flat,
                Stage::Fovblur(_) | Stage::Magnify(_) => config.fixation.needs_saliency(),
                _ => false,
            });
        if !stage.resamples() {
            to_output_frame(&mut img, &mut sal, out);
        }
        let applied = match &mut source {
            Source::Sample(rng) => {
                let u: f64 = rng.random();
                if u >= spec.probability {
                    AppliedStage::Skipped { kind: stage.name().into() }
                } else {
                    sample_stage(stage, &img, sal.as_ref(), config, rng)?
                }
            }
            Source::Replay(it) => it
                .next()
                .cloned()
                .ok_or_else(|| Error::Data("view record has fewer stages than the config".into()))?,
        };
        img = match (&applied, stage) {
            (AppliedStage::Skipped { kind }, _) if kind == stage.name() => img,
            (AppliedStage::Fovblur { fixation, fov_area }, Stage::Fovblur(p)) => {
                foveate_blur_with_area(&img, *fixation, p, *fov_area)?.0
            }
            (AppliedStage::Magnify { fixation, cover }, Stage::Magnify(p)) => {
                let p = magnify_params(p, out);
                let (view, sample) = magnify_with_cover(&img, *fixation, &p, *cover)?;
                if keep_saliency {
                    if let Some(s) = sal.as_mut() {
                        let t = RadialTransform::new(sample.c, p.k, p.r_fov)?;
                        *s = remap_field(s, &build_grid(*fixation, &t, view.shape())?);
                    }
                }
                view
            }
            (AppliedStage::Crop { crop_box }, Stage::RandomResizedCrop(_) | Stage::SaliencyCrop(_)) => {
                if keep_saliency {
                    if let Some(s) = sal.as_mut() {
                        *s = crop_resize_field(s, *crop_box, out, out);
                    }
                }
                crop_resize(&img, *crop_box, out, out)
            }
            (AppliedStage::Hflip, Stage::Hflip) => hflip(&img),
            (AppliedStage::Grayscale, Stage::Grayscale) => to_grayscale(&img),
            (AppliedStage::ColorJitter { factors }, Stage::ColorJitter { .. }) => apply_jitter(&img, factors),
            (AppliedStage::UniformBlur { sigma }, Stage::UniformBlur { .. }) => gaussian_blur(&img, *sigma)?,
            _ => {
                return Err(Error::Data(format!(
                    "view record entry {applied:?} does not match stage `{}`",
                    stage.name()
                )))
            }
        };
        if !keep_saliency {
            sal = None;
        }
        if let Some(t) = times.as_deref_mut() {
            t.add(stage.name(), start.elapsed().as_secs_f64());
        }
        trail.push(applied);
    }
    to_output_frame(&mut img, &mut sal, out);
    Ok((img, trail))
}

fn sample_stage(
    stage: &Stage,
    img: &ImageBuffer,
    sal: Option<&ScalarField>,
    config: &PipelineConfig,
    rng: &mut ViewRng,
) -> Result<AppliedStage> {
    let shape = img.shape();
    Ok(match stage {
        Stage::Fovblur(p) => {
            let fixation = draw_fixation(&config.fixation, shape, sal, stage.name(), rng)?;
            let u: f64 = rng.random();
            let [lo, hi] = p.fov_area_range;
            AppliedStage::Fovblur {
                fixation,
                fov_area: lo + u * (hi - lo),
            }
        }
        Stage::Magnify(p) => {
            let fixation = draw_fixation(&config.fixation, shape, sal, stage.name(), rng)?;
            let u: f64 = rng.random();
            let [lo, hi] = p.cover_range;
            let cover = lo + u * (hi - lo);
            // Fail at sampling time rather than at apply time for unsolvable covers.
            let p = magnify_params(p, config.output_size);
            solve_scale_for_cover(cover, shape, p.out_shape.expect("set above"), p.k, p.r_fov)?;
            AppliedStage::Magnify { fixation, cover }
        }
        Stage::RandomResizedCrop(p) => AppliedStage::Crop {
            crop_box: sample_crop_box(shape.0, shape.1, p, CenterSampler::Uniform, rng)?,
        },
        Stage::SaliencyCrop(p) => {
            let density = if p.flat {
                GazeDensity::uniform(shape.0, shape.1)?
            } else {
                let sal = sal.ok_or_else(|| Error::MissingSaliency { stage: stage.name().into() })?;
                density_for_image(sal, shape.0, shape.1, p.temperature)?
            };
            AppliedStage::Crop {
                crop_box: sample_crop_box(shape.0, shape.1, &p.crop(), CenterSampler::Gaze(&density), rng)?,
            }
        }
        Stage::Hflip => AppliedStage::Hflip,
        Stage::Grayscale => AppliedStage::Grayscale,
        Stage::ColorJitter { strength } => AppliedStage::ColorJitter {
            factors: JitterFactors::sample(rng, *strength)?,
        },
        Stage::UniformBlur { sigma_range: [lo, hi] } => {
            let u: f64 = rng.random();
            AppliedStage::UniformBlur { sigma: lo + u * (hi - lo) }
        }
    })
}

fn check_inputs(saliency: Option<&ScalarField>, config: &PipelineConfig) -> Result<()> {
    config.validate()?;
    if saliency.is_none() && config.needs_saliency() {
        let stage = config
            .stages
            .iter()
            .find(|s| match &s.stage {
                Stage::SaliencyCrop(p) => !p.flat,
                Stage::Fovblur(_) | Stage::Magnify(_) => true,
                _ => false,
            })
            .map_or("pipeline", |s| s.stage.name());
        return Err(Error::MissingSaliency { stage: stage.into() });
    }
    Ok(())
}

/// One view from its own rng stream, `hash(master_seed, image_id, view_index)`.
pub fn generate_view(
    image: &ImageBuffer,
    saliency: Option<&ScalarField>,
    config: &PipelineConfig,
    image_id: &str,
    view_index: u64,
) -> Result<(ImageBuffer, ViewRecord)> {
    check_inputs(saliency, config)?;
    generate_view_timed(image, saliency, config, image_id, view_index, None)
}

pub(crate) fn generate_view_timed(
    image: &ImageBuffer,
    saliency: Option<&ScalarField>,
    config: &PipelineConfig,
    image_id: &str,
    view_index: u64,
    times: Option<&mut StageTimes>,
) -> Result<(ImageBuffer, ViewRecord)> {
    let mut rng = view_rng(config.master_seed, image_id, view_index);
    let (view, stages) = run_view(image, saliency, config, Source::Sample(&mut rng), times)?;
    Ok((
        view,
        ViewRecord {
            image_id: image_id.into(),
            view_index,
            master_seed: config.master_seed,
            rng: RNG_ALGORITHM.into(),
            stages,
        },
    ))
}

/// `views_per_image` views of one image.
pub fn generate_views(
    image: &ImageBuffer,
    saliency: Option<&ScalarField>,
    config: &PipelineConfig,
    image_id: &str,
) -> Result<Vec<(ImageBuffer, ViewRecord)>> {
    check_inputs(saliency, config)?;
    (0..config.views_per_image as u64)
        .map(|v| generate_view_timed(image, saliency, config, image_id, v, None))
        .collect()
}

/// Re-applies the parameters stored in `record`; no randomness is drawn.
pub fn replay_view(image: &ImageBuffer, config: &PipelineConfig, record: &ViewRecord) -> Result<ImageBuffer> {
    config.validate()?;
    if record.stages.len() != config.stages.len() {
        return Err(Error::Data(format!(
            "view record has {} stages, config has {}",
            record.stages.len(),
            config.stages.len()
        )));
    }
    Ok(run_view(image, None, config, Source::Replay(record.stages.iter()), None)?.0)
}

/// Runs `job(i)` for `i in 0..n` on a pool of `threads` workers and returns
/// the results in index order. `threads == 0` uses rayon's default.
pub fn run_batch<T, F>(n: usize, threads: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&job).collect())
}

/// Side-by-side strip of equally sized views separated by `gap` white pixels.
pub fn tile_horizontal(views: &[ImageBuffer], gap: usize) -> Result<ImageBuffer> {
    let first = views.first().ok_or_else(|| Error::invalid("no views to tile"))?;
    let (h, w, ch) = (first.height(), first.width(), first.channels());
    if views.iter().any(|v| v.height() != h || v.width() != w || v.channels() != ch) {
        return Err(Error::invalid("views to tile differ in shape"));
    }
    let total_w = views.len() * w + (views.len() - 1) * gap;
    ImageBuffer::from_fn(h, total_w, ch, |x, y, c| {
        let (k, off) = (x / (w + gap), x % (w + gap));
        if off < w {
            views[k].get(off, y, c)
        } else {
            1.0
        }
    })
}
