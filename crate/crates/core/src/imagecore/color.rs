use rand::Rng;
use serde::{Deserialize, Serialize};

use super::buffer::{clamp_unit, ImageBuffer};
use crate::error::{Error, Result};

const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

pub fn hflip(image: &ImageBuffer) -> ImageBuffer {
    let (h, w, ch) = (image.height(), image.width(), image.channels());
    let mut data = Vec::with_capacity(image.data().len());
    for row in image.data().chunks_exact(w * ch) {
        for px in row.chunks_exact(ch).rev() {
            data.extend_from_slice(px);
        }
    }
    ImageBuffer::from_raw_clamped(h, w, ch, data)
}

#[inline]
fn luma(px: &[f32]) -> f32 {
    (LUMA[0] * px[0] as f64 + LUMA[1] * px[1] as f64 + LUMA[2] * px[2] as f64) as f32
}

/// Luma-weighted gray replicated into every channel; single-channel input is returned as is.
pub fn to_grayscale(image: &ImageBuffer) -> ImageBuffer {
    if image.channels() == 1 {
        return image.clone();
    }
    let mut data = image.data().to_vec();
    for px in data.chunks_exact_mut(3) {
        let g = luma(px);
        px.fill(g);
    }
    ImageBuffer::from_raw_clamped(image.height(), image.width(), 3, data)
}

/// Multiplicative brightness/contrast/saturation factors and a hue rotation in turns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JitterFactors {
    pub brightness: f32,
    pub contrast: f32,
    pub saturation: f32,
    pub hue: f32,
}

impl JitterFactors {
    pub const IDENTITY: JitterFactors = JitterFactors {
        brightness: 1.0,
        contrast: 1.0,
        saturation: 1.0,
        hue: 0.0,
    };

    /// Factors uniform in `[1 - 0.8s, 1 + 0.8s]`, hue uniform in `[-0.2s, 0.2s]`.
    /// Always consumes four draws so the stream position does not depend on `s`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, strength: f32) -> Result<Self> {
        if !(0.0..=1.0).contains(&strength) {
            return Err(Error::invalid(format!(
                "jitter strength must be in [0, 1], got {strength}"
            )));
        }
        let mut factor = |span: f32| {
            let u: f32 = rng.random();
            span * (2.0 * u - 1.0)
        };
        Ok(Self {
            brightness: 1.0 + factor(0.8 * strength),
            contrast: 1.0 + factor(0.8 * strength),
            saturation: 1.0 + factor(0.8 * strength),
            hue: factor(0.2 * strength),
        })
    }
}

pub fn color_jitter<R: Rng + ?Sized>(image: &ImageBuffer, rng: &mut R, strength: f32) -> Result<ImageBuffer> {
    let f = JitterFactors::sample(rng, strength)?;
    Ok(apply_jitter(image, &f))
}

/// Brightness, contrast, saturation then hue; each step clamps. Steps whose
/// factor is neutral are skipped so the identity is exact.
pub fn apply_jitter(image: &ImageBuffer, f: &JitterFactors) -> ImageBuffer {
    let ch = image.channels();
    let mut data = image.data().to_vec();
    if f.brightness != 1.0 {
        for v in &mut data {
            *v = clamp_unit(*v * f.brightness);
        }
    }
    if f.contrast != 1.0 {
        let mean = if ch == 3 {
            data.chunks_exact(3).map(|p| luma(p) as f64).sum::<f64>() / (data.len() / 3) as f64
        } else {
            data.iter().map(|&v| v as f64).sum::<f64>() / data.len() as f64
        } as f32;
        for v in &mut data {
            *v = clamp_unit((*v - mean) * f.contrast + mean);
        }
    }
    if ch == 3 && f.saturation != 1.0 {
        for px in data.chunks_exact_mut(3) {
            let g = luma(px);
            for v in px.iter_mut() {
                *v = clamp_unit(g + (*v - g) * f.saturation);
            }
        }
    }
    if ch == 3 && f.hue != 0.0 {
        for px in data.chunks_exact_mut(3) {
            let (h, s, v) = rgb_to_hsv(px[0], px[1], px[2]);
            let h = (h + f.hue).rem_euclid(1.0);
            let (r, g, b) = hsv_to_rgb(h, s, v);
            px[0] = clamp_unit(r);
            px[1] = clamp_unit(g);
            px[2] = clamp_unit(b);
        }
    }
    ImageBuffer::from_raw_clamped(image.height(), image.width(), ch, data)
}

fn rgb_to_hsv(r: f32, g: f32, b: f32) -> (f32, f32, f32) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let h = if d == 0.0 {
        0.0
    } else if max == r {
        ((g - b) / d).rem_euclid(6.0) / 6.0
    } else if max == g {
        ((b - r) / d + 2.0) / 6.0
    } else {
        ((r - g) / d + 4.0) / 6.0
    };
    let s = if max == 0.0 { 0.0 } else { d / max };
    (h, s, max)
}

fn hsv_to_rgb(h: f32, s: f32, v: f32) -> (f32, f32, f32) {
    let h6 = h * 6.0;
    let sector = h6.floor();
    let f = h6 - sector;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match sector as i32 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn img(seed: u64) -> ImageBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImageBuffer::from_fn(5, 7, 3, |_, _, _| rng.random::<f32>()).unwrap()
    }

    #[test]
    fn hflip_is_an_involution() {
        let a = img(1);
        let f = hflip(&a);
        assert_eq!(f.pixel(0, 2), a.pixel(6, 2));
        assert_eq!(hflip(&f), a);
    }

    #[test]
    fn gray_pixels_are_fixed_points() {
        let a = ImageBuffer::from_fn(3, 3, 3, |x, y, _| (x * 3 + y) as f32 / 9.0).unwrap();
        assert_eq!(to_grayscale(&a), a);
        let g = to_grayscale(&img(2));
        assert!(g.data().chunks(3).all(|p| p[0] == p[1] && p[1] == p[2]));
    }

    #[test]
    fn zero_strength_is_identity() {
        let a = img(3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(color_jitter(&a, &mut rng, 0.0).unwrap(), a);
    }

    #[test]
    fn strength_out_of_range_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(color_jitter(&img(0), &mut rng, 1.5).is_err());
        assert!(color_jitter(&img(0), &mut rng, f32::NAN).is_err());
    }

    #[test]
    fn factors_stay_in_range_and_output_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let f = JitterFactors::sample(&mut rng, 1.0).unwrap();
            assert!((0.2..=1.8).contains(&f.brightness));
            assert!((0.2..=1.8).contains(&f.saturation));
            assert!((-0.2..=0.2).contains(&f.hue));
            let out = apply_jitter(&img(6), &f);
            assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn hsv_roundtrip() {
        for &(r, g, b) in &[(0.2f32, 0.5, 0.9), (1.0, 0.0, 0.0), (0.3, 0.3, 0.3), (0.9, 0.8, 0.1)] {
            let (h, s, v) = rgb_to_hsv(r, g, b);
            let (r2, g2, b2) = hsv_to_rgb(h, s, v);
            assert!((r - r2).abs() < 1e-6 && (g - g2).abs() < 1e-6 && (b - b2).abs() < 1e-6);
        }
    }

    #[test]
    fn full_turn_hue_is_identity_up_to_rounding() {
        let a = img(7);
        let f = JitterFactors { hue: 1.0, ..JitterFactors::IDENTITY };
        let out = apply_jitter(&a, &f);
        for (x, y) in a.data().iter().zip(out.data()) {
            assert!((x - y).abs() < 1e-5);
        }
    }
}
