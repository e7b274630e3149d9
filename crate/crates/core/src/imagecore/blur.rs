//! Separable Gaussian blur with replicate padding.

use super::buffer::ImageBuffer;
use crate::error::{Error, Result};

/// Widths below this are treated as the identity.
pub const MIN_SIGMA: f64 = 0.25;

/// Discrete Gaussian taps for offsets `-R..=R`, `R = ceil(3σ)`, normalized to sum 1.
pub fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    let radius = (3.0 * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / denom).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter().map(|&t| (t / sum) as f32).collect()
}

/// Blurs every channel with a separable Gaussian of width `sigma` pixels.
///
/// `sigma < MIN_SIGMA` returns the input unchanged.
pub fn gaussian_blur(image: &ImageBuffer, sigma: f64) -> Result<ImageBuffer> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("blur sigma must be >= 0, got {sigma}")));
    }
    if sigma < MIN_SIGMA {
        return Ok(image.clone());
    }
    let kernel = gaussian_kernel(sigma);
    let (h, w, ch) = (image.height(), image.width(), image.channels());
    let mut tmp = vec![0.0f32; image.data().len()];
    convolve_rows(image.data(), &mut tmp, w, h, ch, &kernel);
    let mut out = vec![0.0f32; tmp.len()];
    convolve_cols(&tmp, &mut out, w, h, ch, &kernel);
    Ok(ImageBuffer::from_raw_clamped(h, w, ch, out))
}

/// Same as [`gaussian_blur`] on a raw interleaved buffer without clamping.
/// Exposed for linearity checks on signed data.
pub fn gaussian_blur_raw(data: &[f32], height: usize, width: usize, channels: usize, sigma: f64) -> Vec<f32> {
    if sigma < MIN_SIGMA {
        return data.to_vec();
    }
    let kernel = gaussian_kernel(sigma);
    let mut tmp = vec![0.0f32; data.len()];
    convolve_rows(data, &mut tmp, width, height, channels, &kernel);
    let mut out = vec![0.0f32; data.len()];
    convolve_cols(&tmp, &mut out, width, height, channels, &kernel);
    out
}

fn convolve_rows(src: &[f32], dst: &mut [f32], w: usize, h: usize, ch: usize, kernel: &[f32]) {
    let r = (kernel.len() / 2) as isize;
    let stride = w * ch;
    for y in 0..h {
        let row = &src[y * stride..(y + 1) * stride];
        let out = &mut dst[y * stride..(y + 1) * stride];
        for x in 0..w {
            let interior = x as isize - r >= 0 && x as isize + r < w as isize;
            for c in 0..ch {
                let mut acc = 0.0f32;
                if interior {
                    let base = (x - r as usize) * ch + c;
                    for (k, &wt) in kernel.iter().enumerate() {
                        acc += wt * row[base + k * ch];
                    }
                } else {
                    for (k, &wt) in kernel.iter().enumerate() {
                        let xx = (x as isize + k as isize - r).clamp(0, w as isize - 1) as usize;
                        acc += wt * row[xx * ch + c];
                    }
                }
                out[x * ch + c] = acc;
            }
        }
    }
}

fn convolve_cols(src: &[f32], dst: &mut [f32], w: usize, h: usize, ch: usize, kernel: &[f32]) {
    let r = kernel.len() as isize / 2;
    let stride = w * ch;
    for y in 0..h {
        let out = &mut dst[y * stride..(y + 1) * stride];
        for (k, &wt) in kernel.iter().enumerate() {
            let yy = (y as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
            let row = &src[yy * stride..(yy + 1) * stride];
            for (o, &s) in out.iter_mut().zip(row) {
                *o += wt * s;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense 2-D convolution with the outer-product kernel and clamped indices.
    fn dense_oracle(data: &[f32], h: usize, w: usize, ch: usize, sigma: f64) -> Vec<f64> {
        let r = (3.0 * sigma).ceil() as i64;
        let taps: Vec<f64> = (-r..=r).map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp()).collect();
        let s: f64 = taps.iter().sum();
        let taps: Vec<f64> = taps.iter().map(|t| t / s).collect();
        let mut out = vec![0.0; data.len()];
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                for c in 0..ch {
                    let mut acc = 0.0;
                    for dy in -r..=r {
                        for dx in -r..=r {
                            let yy = (y + dy).clamp(0, h as i64 - 1) as usize;
                            let xx = (x + dx).clamp(0, w as i64 - 1) as usize;
                            acc += taps[(dy + r) as usize] * taps[(dx + r) as usize]
                                * data[(yy * w + xx) * ch + c] as f64;
                        }
                    }
                    out[(y as usize * w + x as usize) * ch + c] = acc;
                }
            }
        }
        out
    }

    fn random_image(seed: u64, h: usize, w: usize, ch: usize) -> ImageBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImageBuffer::from_fn(h, w, ch, |_, _, _| rng.random::<f32>()).unwrap()
    }

    #[test]
    fn zero_sigma_is_identity() {
        let img = random_image(1, 8, 8, 3);
        assert_eq!(gaussian_blur(&img, 0.0).unwrap(), img);
        assert_eq!(gaussian_blur(&img, 0.2).unwrap(), img);
    }

    #[test]
    fn rejects_negative_and_nan() {
        let img = random_image(1, 4, 4, 1);
        assert!(gaussian_blur(&img, -1.0).is_err());
        assert!(gaussian_blur(&img, f64::NAN).is_err());
    }

    #[test]
    fn constant_image_is_preserved() {
        let img = ImageBuffer::filled(10, 13, 3, 0.37).unwrap();
        for sigma in [0.5, 1.0, 2.7, 6.0] {
            let out = gaussian_blur(&img, sigma).unwrap();
            assert!(out.data().iter().all(|&v| (v - 0.37).abs() < 1e-6));
        }
    }

    #[test]
    fn impulse_centre_is_squared_centre_tap() {
        let mut data = vec![0.0f32; 81];
        data[40] = 1.0;
        let img = ImageBuffer::new(9, 9, 1, data.clone()).unwrap();
        let out = gaussian_blur(&img, 1.0).unwrap();
        let k = gaussian_kernel(1.0);
        let centre = k[k.len() / 2];
        let oracle = dense_oracle(&data, 9, 9, 1, 1.0);
        assert!((out.get(4, 4, 0) as f64 - oracle[40]).abs() < 1e-7);
        assert!((out.get(4, 4, 0) - centre * centre).abs() < 1e-7);
        // σ=1, R=3: centre tap 1/(1 + 2e^-1/2 + 2e^-2 + 2e^-9/2).
        let expect = 1.0 / (1.0 + 2.0 * (-0.5f64).exp() + 2.0 * (-2.0f64).exp() + 2.0 * (-4.5f64).exp());
        assert!((oracle[40] - expect * expect).abs() < 1e-12);
    }

    #[test]
    fn separable_matches_dense_oracle() {
        for seed in 0..5 {
            let img = random_image(seed, 16, 16, 3);
            for sigma in [0.6, 1.0, 2.3] {
                let out = gaussian_blur(&img, sigma).unwrap();
                let oracle = dense_oracle(img.data(), 16, 16, 3, sigma);
                for (a, b) in out.data().iter().zip(&oracle) {
                    assert!((*a as f64 - b).abs() < 1e-5, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn blur_is_linear() {
        let x = random_image(3, 12, 15, 3);
        let y = random_image(4, 12, 15, 3);
        let (a, b) = (1.7f32, -0.6f32);
        let combo: Vec<f32> = x.data().iter().zip(y.data()).map(|(p, q)| a * p + b * q).collect();
        let lhs = gaussian_blur_raw(&combo, 12, 15, 3, 1.4);
        let bx = gaussian_blur_raw(x.data(), 12, 15, 3, 1.4);
        let by = gaussian_blur_raw(y.data(), 12, 15, 3, 1.4);
        for i in 0..lhs.len() {
            assert!((lhs[i] - (a * bx[i] + b * by[i])).abs() < 1e-5);
        }
    }

    #[test]
    fn mean_preserved_on_constant_extended_image() {
        // Interior texture surrounded by a wide constant border: replicate
        // padding then equals constant extension, so the total is conserved.
        let sigma = 1.5;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let img = ImageBuffer::from_fn(32, 32, 1, |x, y, _| {
            if (8..24).contains(&x) && (8..24).contains(&y) { rng.random::<f32>() } else { 0.5 }
        })
        .unwrap();
        let out = gaussian_blur(&img, sigma).unwrap();
        let mean = |d: &[f32]| d.iter().map(|&v| v as f64).sum::<f64>() / d.len() as f64;
        assert!((mean(img.data()) - mean(out.data())).abs() < 1e-4);
    }
}
