use rand::Rng;

use super::config::CropParams;
use crate::error::{Error, Result};
use crate::fixation::GazeDensity;
use crate::imagecore::{crop_resize, CropBox, ImageBuffer};

/// Where crop centres come from.
#[derive(Clone, Copy, Debug)]
pub enum CenterSampler<'a> {
    /// Uniform over the whole image.
    Uniform,
    /// Drawn from a gaze density at image resolution.
    Gaze(&'a GazeDensity),
}

impl CenterSampler<'_> {
    /// A centre in edge coordinates.
    fn draw<R: Rng + ?Sized>(&self, height: usize, width: usize, rng: &mut R) -> (f64, f64) {
        match self {
            CenterSampler::Uniform => {
                let ux: f64 = rng.random();
                let uy: f64 = rng.random();
                (ux * width as f64, uy * height as f64)
            }
            CenterSampler::Gaze(d) => {
                let p = d.sample_point(rng);
                (p.x + 0.5, p.y + 0.5)
            }
        }
    }
}

fn place(cx: f64, cy: f64, bw: f64, bh: f64, width: f64, height: f64) -> CropBox {
    CropBox {
        x: (cx - bw / 2.0).clamp(0.0, width - bw),
        y: (cy - bh / 2.0).clamp(0.0, height - bh),
        width: bw,
        height: bh,
    }
}

/// Draws a crop box: area fraction uniform in `scale_range`, aspect ratio
/// log-uniform in `ratio_range`, up to ten attempts before falling back to the
/// largest box with an admissible ratio. The centre comes from `center` and the
/// box is shifted to lie inside the image.
pub fn sample_crop_box<R: Rng + ?Sized>(
    height: usize,
    width: usize,
    params: &CropParams,
    center: CenterSampler<'_>,
    rng: &mut R,
) -> Result<CropBox> {
    params.validate()?;
    if let CenterSampler::Gaze(d) = center {
        if d.shape() != (height, width) {
            return Err(Error::invalid(format!(
                "gaze density is {:?} but the image is {:?}",
                d.shape(),
                (height, width)
            )));
        }
    }
    let (w, h) = (width as f64, height as f64);
    let [s0, s1] = params.scale_range;
    let (l0, l1) = (params.ratio_range[0].ln(), params.ratio_range[1].ln());
    for _ in 0..10 {
        let us: f64 = rng.random();
        let ur: f64 = rng.random();
        let target = w * h * (s0 + us * (s1 - s0));
        let ratio = (l0 + ur * (l1 - l0)).exp();
        let bw = (target * ratio).sqrt();
        let bh = (target / ratio).sqrt();
        if bw <= w && bh <= h {
            let (cx, cy) = center.draw(height, width, rng);
            return Ok(place(cx, cy, bw, bh, w, h));
        }
    }
    let in_ratio = w / h;
    let (bw, bh) = if in_ratio < params.ratio_range[0] {
        (w, w / params.ratio_range[0])
    } else if in_ratio > params.ratio_range[1] {
        (h * params.ratio_range[1], h)
    } else {
        (w, h)
    };
    let (cx, cy) = center.draw(height, width, rng);
    Ok(place(cx, cy, bw, bh, w, h))
}

/// Samples a box with [`sample_crop_box`] and resizes it bilinearly to `out_shape`.
pub fn random_resized_crop<R: Rng + ?Sized>(
    image: &ImageBuffer,
    rng: &mut R,
    params: &CropParams,
    out_shape: (usize, usize),
    center: CenterSampler<'_>,
) -> Result<(ImageBuffer, CropBox)> {
    let (h, w) = image.shape();
    let b = sample_crop_box(h, w, params, center, rng)?;
    Ok((crop_resize(image, b, out_shape.0, out_shape.1), b))
}
