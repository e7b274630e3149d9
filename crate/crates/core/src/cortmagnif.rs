//! Foveation as cortical magnification.
//!
//! The output view is a cortical image: an output pixel at cortical radius
//! `r` from the view centre reads the retinal image at eccentricity `e(r)`
//! along the same direction from the fixation. The radial map is linear
//! inside the fovea and quadratic outside:
//!
//! ```text
//! e(r) = r / C                                           r <  r_fov
//! e(r) = [(r + K)^2 / (2 (r_fov + K)) + (r_fov - K) / 2] / C   r >= r_fov
//! ```
//!
//! `e` is C¹ at `r_fov` and strictly increasing iff `K > -r_fov`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixation::FixationPoint;
use crate::imagecore::{bilinear_sample_into, remap, GridMap, ImageBuffer};

pub const DEFAULT_R_FOV: f64 = 30.0;
pub const DEFAULT_K: f64 = 20.0;

/// Footprint convention used to turn a cover ratio into the scale `C`.
pub const COVER_CONVENTION: &str = "square footprint of area cover*W*H; e_max = sqrt(cover*W*H)/2 reached at r_edge = min(H_out, W_out)/2";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialTransform {
    c: f64,
    k: f64,
    r_fov: f64,
}

impl RadialTransform {
    pub fn new(c: f64, k: f64, r_fov: f64) -> Result<Self> {
        check_shape_params(k, r_fov)?;
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::invalid(format!("scale C must be positive, got {c}")));
        }
        Ok(Self { c, k, r_fov })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn r_fov(&self) -> f64 {
        self.r_fov
    }

    /// `C · e(r)`: the scale-free part of the radial map.
    #[inline]
    pub fn bracket(&self, r: f64) -> f64 {
        bracket(r, self.k, self.r_fov)
    }

    /// Retinal eccentricity at cortical radius `r >= 0`.
    #[inline]
    pub fn ecc(&self, r: f64) -> f64 {
        self.bracket(r) / self.c
    }

    /// Cortical magnification `1 / e'(r)`.
    pub fn cmf(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::invalid(format!("radius must be >= 0, got {r}")));
        }
        Ok(if r < self.r_fov {
            self.c
        } else {
            self.c * (self.r_fov + self.k) / (r + self.k)
        })
    }

    /// Offset from the fixation for a cortical offset `(u, v)` from the view centre.
    #[inline]
    pub fn source_offset(&self, u: f64, v: f64) -> [f64; 2] {
        let r = (u * u + v * v).sqrt();
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let s = self.ecc(r) / r;
        [s * u, s * v]
    }
}

#[inline]
fn bracket(r: f64, k: f64, r_fov: f64) -> f64 {
    if r < r_fov {
        r
    } else {
        (r + k) * (r + k) / (2.0 * (r_fov + k)) + (r_fov - k) / 2.0
    }
}

fn check_shape_params(k: f64, r_fov: f64) -> Result<()> {
    if !(r_fov > 0.0) || !r_fov.is_finite() {
        return Err(Error::invalid(format!("r_fov must be positive, got {r_fov}")));
    }
    if !k.is_finite() {
        return Err(Error::invalid(format!("K must be finite, got {k}")));
    }
    if k <= -r_fov {
        return Err(Error::DegenerateWarp { k, neg_r_fov: -r_fov });
    }
    Ok(())
}

/// Free-function form of [`RadialTransform::cmf`].
pub fn cmf(r: f64, transform: &RadialTransform) -> Result<f64> {
    transform.cmf(r)
}

/// Free-function form of [`RadialTransform::ecc`] with the radius checked.
pub fn ecc_of_radius(r: f64, transform: &RadialTransform) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::invalid(format!("radius must be >= 0, got {r}")));
    }
    Ok(transform.ecc(r))
}

/// Scale `C` such that the warp's outermost sampled eccentricity spans a
/// square footprint of area `cover · W · H`.
pub fn solve_scale_for_cover(
    cover: f64,
    img_shape: (usize, usize),
    out_shape: (usize, usize),
    k: f64,
    r_fov: f64,
) -> Result<f64> {
    check_shape_params(k, r_fov)?;
    if !(cover > 0.0) || !cover.is_finite() {
        return Err(Error::invalid(format!("cover must be positive, got {cover}")));
    }
    let (h, w) = img_shape;
    let r_edge = out_shape.0.min(out_shape.1) as f64 / 2.0;
    let e_max = (cover * w as f64 * h as f64).sqrt() / 2.0;
    Ok(bracket(r_edge, k, r_fov) / e_max)
}

/// Source coordinates for every output pixel; the output centre maps to the fixation.
pub fn build_grid(fixation: FixationPoint, transform: &RadialTransform, out_shape: (usize, usize)) -> Result<GridMap> {
    let (oh, ow) = out_shape;
    let cx = (ow as f64 - 1.0) / 2.0;
    let cy = (oh as f64 - 1.0) / 2.0;
    let mut entries = Vec::with_capacity(oh * ow);
    for i in 0..oh {
        let v = i as f64 - cy;
        for j in 0..ow {
            let [dx, dy] = transform.source_offset(j as f64 - cx, v);
            entries.push([fixation.x + dx, fixation.y + dy]);
        }
    }
    GridMap::new(oh, ow, entries)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnifParams {
    pub r_fov: f64,
    pub k: f64,
    pub cover_range: [f64; 2],
    /// `(height, width)` of the view; `None` keeps the input shape.
    #[serde(default)]
    pub out_shape: Option<(usize, usize)>,
}

impl Default for MagnifParams {
    fn default() -> Self {
        Self {
            r_fov: DEFAULT_R_FOV,
            k: DEFAULT_K,
            cover_range: [0.05, 0.35],
            out_shape: None,
        }
    }
}

impl MagnifParams {
    pub fn validate(&self) -> Result<()> {
        check_shape_params(self.k, self.r_fov)?;
        let [lo, hi] = self.cover_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::invalid(format!(
                "cover_range must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
            )));
        }
        if let Some((h, w)) = self.out_shape {
            if h == 0 || w == 0 {
                return Err(Error::invalid("out_shape must be at least 1x1"));
            }
        }
        Ok(())
    }
}

/// What a magnified view drew.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagnifSample {
    pub fixation: FixationPoint,
    pub cover: f64,
    pub c: f64,
}

/// Warps `image` through `transform` around `fixation` into an `out_shape` view.
pub fn magnify_with_transform(
    image: &ImageBuffer,
    fixation: FixationPoint,
    transform: &RadialTransform,
    out_shape: (usize, usize),
) -> Result<ImageBuffer> {
    let grid = build_grid(fixation, transform, out_shape)?;
    Ok(remap(image, &grid))
}

/// Deterministic core of [`magnify`] with the cover ratio fixed.
pub fn magnify_with_cover(
    image: &ImageBuffer,
    fixation: FixationPoint,
    params: &MagnifParams,
    cover: f64,
) -> Result<(ImageBuffer, MagnifSample)> {
    params.validate()?;
    let (h, w) = image.shape();
    if !fixation.is_inside(h, w) {
        return Err(Error::invalid(format!("fixation {fixation:?} outside {w}x{h} image")));
    }
    let out_shape = params.out_shape.unwrap_or((h, w));
    let c = solve_scale_for_cover(cover, (h, w), out_shape, params.k, params.r_fov)?;
    let transform = RadialTransform::new(c, params.k, params.r_fov)?;
    let out = magnify_with_transform(image, fixation, &transform, out_shape)?;
    Ok((out, MagnifSample { fixation, cover, c }))
}

/// Draws the cover ratio uniformly from `params.cover_range` and magnifies.
pub fn magnify<R: Rng + ?Sized>(
    image: &ImageBuffer,
    fixation: FixationPoint,
    params: &MagnifParams,
    rng: &mut R,
) -> Result<(ImageBuffer, MagnifSample)> {
    params.validate()?;
    let [lo, hi] = params.cover_range;
    let u: f64 = rng.random();
    magnify_with_cover(image, fixation, params, lo + u * (hi - lo))
}

/// Per-pixel evaluation without materializing a grid. Used to cross-check
/// [`magnify_with_transform`].
pub fn magnify_direct(
    image: &ImageBuffer,
    fixation: FixationPoint,
    transform: &RadialTransform,
    out_shape: (usize, usize),
) -> Vec<f32> {
    let (oh, ow) = out_shape;
    let ch = image.channels();
    let mut out = vec![0.0f32; oh * ow * ch];
    let cx = (ow as f64 - 1.0) / 2.0;
    let cy = (oh as f64 - 1.0) / 2.0;
    let mut px = vec![0.0f32; ch];
    for i in 0..oh {
        for j in 0..ow {
            let [dx, dy] = transform.source_offset(j as f64 - cx, i as f64 - cy);
            bilinear_sample_into(image, fixation.x + dx, fixation.y + dy, &mut px);
            out[(i * ow + j) * ch..(i * ow + j + 1) * ch].copy_from_slice(&px);
        }
    }
    out
}
