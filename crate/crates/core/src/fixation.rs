//! Saccade model: saliency maps become temperature-controlled gaze densities
//! from which i.i.d. fixation points are drawn.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{resize_field, ScalarField};
use crate::rng::seeded_rng;

/// Margin used by the uniform central sampler when none is given.
pub const DEFAULT_MARGIN_FRACTION: f64 = 0.25;

/// Continuous pixel-centre coordinate inside the image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixationPoint {
    pub x: f64,
    pub y: f64,
}

impl FixationPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Geometric centre of a `height × width` image.
    pub fn center(height: usize, width: usize) -> Self {
        Self::new((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0)
    }

    pub fn clamped(self, height: usize, width: usize) -> Self {
        Self::new(
            self.x.clamp(0.0, width as f64 - 1.0),
            self.y.clamp(0.0, height as f64 - 1.0),
        )
    }

    pub fn is_inside(&self, height: usize, width: usize) -> bool {
        (0.0..=width as f64 - 1.0).contains(&self.x) && (0.0..=height as f64 - 1.0).contains(&self.y)
    }
}

/// Normalized gaze probabilities with a precomputed cumulative table for
/// inverse-CDF sampling.
#[derive(Clone, Debug)]
pub struct GazeDensity {
    probabilities: ScalarField,
    temperature: f64,
    cdf: Vec<f64>,
}

impl GazeDensity {
    /// Wraps an arbitrary nonnegative weight map (normalized here).
    pub fn from_weights(weights: ScalarField, temperature: f64) -> Result<Self> {
        if weights.data().iter().any(|&w| w < 0.0) {
            return Err(Error::invalid("gaze weights must be nonnegative"));
        }
        let total: f64 = weights.data().iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("gaze weights sum to zero"));
        }
        let (h, w) = weights.shape();
        let probs: Vec<f64> = weights.data().iter().map(|&v| v / total).collect();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cdf.push(acc);
        }
        Ok(Self {
            probabilities: ScalarField::from_raw(h, w, probs),
            temperature,
            cdf,
        })
    }

    /// Uniform density over all pixels.
    pub fn uniform(height: usize, width: usize) -> Result<Self> {
        Self::from_weights(ScalarField::filled(height, width, 1.0)?, f64::INFINITY)
    }

    pub fn probabilities(&self) -> &ScalarField {
        &self.probabilities
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn shape(&self) -> (usize, usize) {
        self.probabilities.shape()
    }

    /// Draws a pixel index by inverse CDF; zero-probability pixels are never chosen.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().expect("density is nonempty");
        let u = rng.random::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.cdf.len() - 1)
    }

    /// One fixation: a categorical pixel draw jittered uniformly inside the pixel.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> FixationPoint {
        let (h, w) = self.shape();
        let idx = self.sample_index(rng);
        let (row, col) = (idx / w, idx % w);
        let jx: f64 = rng.random();
        let jy: f64 = rng.random();
        FixationPoint::new(col as f64 + jx, row as f64 + jy).clamped(h, w)
    }
}

/// `P[x,y] = exp((S[x,y] - max S) / T) / Z`.
pub fn saliency_to_density(saliency: &ScalarField, temperature: f64) -> Result<GazeDensity> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::invalid(format!(
            "temperature must be positive and finite, got {temperature}"
        )));
    }
    if saliency.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("saliency contains non-finite values"));
    }
    let max = saliency.max();
    let (h, w) = saliency.shape();
    let weights: Vec<f64> = saliency
        .data()
        .iter()
        .map(|&s| ((s - max) / temperature).exp())
        .collect();
    // The argmax contributes exp(0) = 1, so the sum is at least 1.
    GazeDensity::from_weights(ScalarField::from_raw(h, w, weights), temperature)
}

/// Saliency density at image resolution; maps of a different size are
/// bilinearly resized first.
pub fn density_for_image(
    saliency: &ScalarField,
    height: usize,
    width: usize,
    temperature: f64,
) -> Result<GazeDensity> {
    let resized = resize_field(saliency, height, width);
    saliency_to_density(&resized, temperature)
}

pub fn sample_fixations<R: Rng + ?Sized>(density: &GazeDensity, n: usize, rng: &mut R) -> Vec<FixationPoint> {
    (0..n).map(|_| density.sample_point(rng)).collect()
}

/// Uniform points on `[mW, (1-m)W) × [mH, (1-m)H)`, clamped to pixel-centre bounds.
pub fn uniform_central_sampler<R: Rng + ?Sized>(
    width: usize,
    height: usize,
    margin_fraction: f64,
    n: usize,
    rng: &mut R,
) -> Result<Vec<FixationPoint>> {
    check_margin(margin_fraction)?;
    Ok((0..n)
        .map(|_| uniform_central_point(width, height, margin_fraction, rng))
        .collect())
}

pub(crate) fn uniform_central_point<R: Rng + ?Sized>(
    width: usize,
    height: usize,
    margin: f64,
    rng: &mut R,
) -> FixationPoint {
    let (w, h) = (width as f64, height as f64);
    let ux: f64 = rng.random();
    let uy: f64 = rng.random();
    let x = margin * w + ux * (1.0 - 2.0 * margin) * w;
    let y = margin * h + uy * (1.0 - 2.0 * margin) * h;
    FixationPoint::new(x, y).clamped(height, width)
}

fn check_margin(m: f64) -> Result<()> {
    if !(0.0..0.5).contains(&m) {
        return Err(Error::invalid(format!(
            "margin_fraction must be in [0, 0.5), got {m}"
        )));
    }
    Ok(())
}

/// How fixation points are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplerMode {
    UniformCentral { margin_fraction: f64 },
    Saliency { temperature: f64 },
}

impl Default for SamplerMode {
    fn default() -> Self {
        SamplerMode::UniformCentral {
            margin_fraction: DEFAULT_MARGIN_FRACTION,
        }
    }
}

impl SamplerMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SamplerMode::UniformCentral { margin_fraction } => check_margin(margin_fraction),
            SamplerMode::Saliency { temperature } if temperature > 0.0 && temperature.is_finite() => Ok(()),
            SamplerMode::Saliency { temperature } => Err(Error::invalid(format!(
                "temperature must be positive, got {temperature}"
            ))),
        }
    }

    pub fn needs_saliency(&self) -> bool {
        matches!(self, SamplerMode::Saliency { .. })
    }
}

/// Sampler mode plus the seed of its own stream.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub mode: SamplerMode,
    pub seed: u64,
}

impl SamplerSpec {
    /// Draws `n` points for a `height × width` image. `saliency` is required in saliency mode.
    pub fn sample(
        &self,
        height: usize,
        width: usize,
        saliency: Option<&ScalarField>,
        n: usize,
    ) -> Result<Vec<FixationPoint>> {
        self.mode.validate()?;
        let mut rng = seeded_rng(self.seed);
        match self.mode {
            SamplerMode::UniformCentral { margin_fraction } => {
                uniform_central_sampler(width, height, margin_fraction, n, &mut rng)
            }
            SamplerMode::Saliency { temperature } => {
                let sal = saliency.ok_or_else(|| Error::MissingSaliency {
                    stage: "saliency fixation sampler".into(),
                })?;
                let density = density_for_image(sal, height, width, temperature)?;
                Ok(sample_fixations(&density, n, &mut rng))
            }
        }
    }
}
