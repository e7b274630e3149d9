//! Foveation as spatially varying blur.
//!
//! Pixels are split into belts of similar log-eccentricity around the
//! fixation. Each belt weights a Gaussian-blurred copy of the image whose
//! width grows linearly with the belt's eccentricity; the residual weight is
//! the unblurred foveal layer, so all weights sum to one at every pixel.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixation::FixationPoint;
use crate::imagecore::{clamp_unit, gaussian_blur, ImageBuffer, ScalarField};

pub const DEFAULT_BELTS: usize = 5;
pub const DEFAULT_K_BLUR: f64 = 0.06;

/// Raised-cosine crossfade: 1 on `[-1/4, 1/4]`, falling to 0 at `±3/4`.
/// Adjacent shifts satisfy `f(x) + f(x - 1) = 1` on their overlap.
pub fn crossfade(x: f64) -> f64 {
    if (-0.25..=0.25).contains(&x) {
        1.0
    } else if (-0.75..-0.25).contains(&x) {
        (PI * (x + 0.25)).cos().powi(2)
    } else if x > 0.25 && x <= 0.75 {
        1.0 - (PI * (x - 0.75)).cos().powi(2)
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FovBlurParams {
    /// Range of the unblurred-area ratio, drawn uniformly per view.
    pub fov_area_range: [f64; 2],
    /// Blur σ (pixels) per pixel of eccentricity.
    pub k_blur: f64,
    pub n_belts: usize,
    /// Outer eccentricity in pixels; `None` means the farthest image corner.
    #[serde(default)]
    pub e_r: Option<f64>,
}

impl Default for FovBlurParams {
    fn default() -> Self {
        Self {
            fov_area_range: [0.01, 0.5],
            k_blur: DEFAULT_K_BLUR,
            n_belts: DEFAULT_BELTS,
            e_r: None,
        }
    }
}

impl FovBlurParams {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.fov_area_range;
        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
            return Err(Error::invalid(format!(
                "fov_area_range must satisfy 0 < lo <= hi < 1, got [{lo}, {hi}]"
            )));
        }
        if !(self.k_blur >= 0.0) || !self.k_blur.is_finite() {
            return Err(Error::invalid(format!("k_blur must be >= 0, got {}", self.k_blur)));
        }
        if self.n_belts == 0 {
            return Err(Error::invalid("n_belts must be >= 1"));
        }
        if let Some(e_r) = self.e_r {
            if !(e_r > 0.0) || !e_r.is_finite() {
                return Err(Error::invalid(format!("e_r must be positive, got {e_r}")));
            }
        }
        Ok(())
    }
}

/// Foveal radius whose disc covers `fov_area` of a `width × height` frame.
pub fn foveal_radius(fov_area: f64, height: usize, width: usize) -> f64 {
    (fov_area * width as f64 * height as f64 / PI).sqrt()
}

/// Distance from `fixation` to the farthest pixel-centre corner.
pub fn farthest_corner_distance(fixation: FixationPoint, height: usize, width: usize) -> f64 {
    let (w1, h1) = (width as f64 - 1.0, height as f64 - 1.0);
    [(0.0, 0.0), (w1, 0.0), (0.0, h1), (w1, h1)]
        .iter()
        .map(|&(cx, cy)| (cx - fixation.x).hypot(cy - fixation.y))
        .fold(0.0, f64::max)
}

/// Blend masks: `masks[0]` is the foveal (identity) layer, `masks[n + 1]` belt `n`.
#[derive(Clone, Debug)]
pub struct BeltMaskStack {
    pub masks: Vec<ScalarField>,
    pub sigmas: Vec<f64>,
}

impl BeltMaskStack {
    pub fn layers(&self) -> usize {
        self.masks.len()
    }

    /// Largest |Σ masks − 1| over all pixels.
    pub fn max_partition_error(&self) -> f64 {
        let n = self.masks[0].data().len();
        (0..n)
            .map(|i| (self.masks.iter().map(|m| m.data()[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Builds the `n_belts + 1` mask stack for a `(height, width)` frame.
///
/// Belt `n` is centred at log-eccentricity `ln e_0 + w (n + 1)` with
/// `w = (ln e_r − ln e_0) / n_belts`; eccentricities beyond `e_r` are held at
/// the outermost belt. `sigmas[n + 1] = k_blur · e_0 · exp(w (n + 1))`.
pub fn belt_masks(
    shape: (usize, usize),
    fixation: FixationPoint,
    e_0: f64,
    e_r: f64,
    n_belts: usize,
    k_blur: f64,
) -> Result<BeltMaskStack> {
    if !(e_0 > 0.0) || !e_0.is_finite() {
        return Err(Error::invalid(format!("e_0 must be positive, got {e_0}")));
    }
    if !(e_r > e_0) || !e_r.is_finite() {
        return Err(Error::invalid(format!("e_r ({e_r}) must exceed e_0 ({e_0})")));
    }
    if n_belts == 0 {
        return Err(Error::invalid("n_belts must be >= 1"));
    }
    let (height, width) = shape;
    let log_e0 = e_0.ln();
    let w_e = (e_r.ln() - log_e0) / n_belts as f64;
    let npix = height * width;

    let mut belts = vec![vec![0.0f64; npix]; n_belts];
    let mut fovea = vec![0.0f64; npix];
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            let e = (x as f64 - fixation.x).hypot(y as f64 - fixation.y).min(e_r);
            let mut total = 0.0;
            if e > 0.0 {
                // Position in belt units relative to the first belt's centre.
                let t = (e.ln() - log_e0) / w_e - 1.0;
                for (n, belt) in belts.iter_mut().enumerate() {
                    let g = crossfade(t - n as f64);
                    if g > 0.0 {
                        belt[i] = g;
                        total += g;
                    }
                }
            }
            fovea[i] = (1.0 - total).clamp(0.0, 1.0);
        }
    }

    let mut masks = Vec::with_capacity(n_belts + 1);
    masks.push(ScalarField::from_raw(height, width, fovea));
    masks.extend(belts.into_iter().map(|b| ScalarField::from_raw(height, width, b)));
    let mut sigmas = vec![0.0];
    sigmas.extend((1..=n_belts).map(|n| k_blur * e_0 * (w_e * n as f64).exp()));
    Ok(BeltMaskStack { masks, sigmas })
}

/// What a foveated-blur view drew.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FovBlurSample {
    pub fixation: FixationPoint,
    pub fov_area: f64,
    pub e_0: f64,
    pub e_r: f64,
}

/// Mask-weighted blend of the identity image and the blurred belt layers.
pub fn blend(image: &ImageBuffer, stack: &BeltMaskStack) -> Result<ImageBuffer> {
    let ch = image.channels();
    let (h, w) = image.shape();
    let mut acc = vec![0.0f32; image.data().len()];
    for (mask, &sigma) in stack.masks.iter().zip(&stack.sigmas) {
        if mask.data().iter().all(|&m| m == 0.0) {
            continue;
        }
        let layer = gaussian_blur(image, sigma)?;
        for ((px, &m), src) in acc
            .chunks_exact_mut(ch)
            .zip(mask.data())
            .zip(layer.data().chunks_exact(ch))
        {
            if m == 0.0 {
                continue;
            }
            let m = m as f32;
            for (a, &s) in px.iter_mut().zip(src) {
                *a += m * s;
            }
        }
    }
    for v in &mut acc {
        *v = clamp_unit(*v);
    }
    Ok(ImageBuffer::from_raw_clamped(h, w, ch, acc))
}

/// Deterministic core of [`foveate_blur`] with the foveal area fixed.
pub fn foveate_blur_with_area(
    image: &ImageBuffer,
    fixation: FixationPoint,
    params: &FovBlurParams,
    fov_area: f64,
) -> Result<(ImageBuffer, FovBlurSample)> {
    params.validate()?;
    let (h, w) = image.shape();
    if !fixation.is_inside(h, w) {
        return Err(Error::invalid(format!("fixation {fixation:?} outside {w}x{h} image")));
    }
    let e_0 = foveal_radius(fov_area, h, w);
    let e_r = params
        .e_r
        .unwrap_or_else(|| farthest_corner_distance(fixation, h, w));
    let stack = belt_masks((h, w), fixation, e_0, e_r, params.n_belts, params.k_blur)?;
    let out = blend(image, &stack)?;
    Ok((
        out,
        FovBlurSample {
            fixation,
            fov_area,
            e_0,
            e_r,
        },
    ))
}

/// Draws the foveal area uniformly from `params.fov_area_range` and foveates.
pub fn foveate_blur<R: Rng + ?Sized>(
    image: &ImageBuffer,
    fixation: FixationPoint,
    params: &FovBlurParams,
    rng: &mut R,
) -> Result<(ImageBuffer, FovBlurSample)> {
    params.validate()?;
    let [lo, hi] = params.fov_area_range;
    let u: f64 = rng.random();
    foveate_blur_with_area(image, fixation, params, lo + u * (hi - lo))
}
