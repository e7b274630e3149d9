use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// H×W×C raster with channel-interleaved, row-major `f32` samples in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageBuffer {
    /// Builds an image, validating shape and that every sample is finite and in `[0, 1]`.
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        check_shape(height, width)?;
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::invalid(format!(
                "data length {} does not match {height}x{width}x{channels}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("sample {v} outside [0, 1]")));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f32) -> Result<Self> {
        Self::new(height, width, channels, vec![value; height * width * channels])
    }

    /// Builds an image from a per-pixel closure `f(x, y, c)`; values are clamped to `[0, 1]`.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(clamp_unit(f(x, y, c)));
                }
            }
        }
        Self::new(height, width, channels, data)
    }

    /// Internal constructor for buffers produced by our own kernels; clamps and
    /// sanitizes instead of failing.
    pub(crate) fn from_raw_clamped(
        height: usize,
        width: usize,
        channels: usize,
        mut data: Vec<f32>,
    ) -> Self {
        debug_assert_eq!(data.len(), height * width * channels);
        for v in &mut data {
            *v = clamp_unit(*v);
        }
        Self {
            height,
            width,
            channels,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Size of the sample storage in bytes.
    pub fn byte_size(&self) -> usize {
        self.data.len() * std::mem::size_of::<f32>()
    }
}

/// Row-major scalar field of finite `f64` values (masks, saliency, densities).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(height, width)?;
        if data.len() != height * width {
            return Err(Error::invalid(format!(
                "data length {} does not match {height}x{width}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("scalar field contains non-finite values"));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(height, width, data)
    }

    /// Skips validation; callers guarantee finiteness.
    pub(crate) fn from_raw(height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        Self {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Single-channel view of the field as an image (values clamped to `[0, 1]`).
    pub fn to_image(&self) -> ImageBuffer {
        let data = self.data.iter().map(|&v| v as f32).collect();
        ImageBuffer::from_raw_clamped(self.height, self.width, 1, data)
    }
}

/// Per-output-pixel continuous source coordinates `(x_src, y_src)`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMap {
    out_height: usize,
    out_width: usize,
    entries: Vec<[f64; 2]>,
}

impl GridMap {
    pub fn new(out_height: usize, out_width: usize, entries: Vec<[f64; 2]>) -> Result<Self> {
        check_shape(out_height, out_width)?;
        if entries.len() != out_height * out_width {
            return Err(Error::invalid(format!(
                "grid has {} entries, expected {}",
                entries.len(),
                out_height * out_width
            )));
        }
        if entries.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid contains non-finite coordinates"));
        }
        Ok(Self {
            out_height,
            out_width,
            entries,
        })
    }

    #[inline]
    pub fn out_height(&self) -> usize {
        self.out_height
    }

    #[inline]
    pub fn out_width(&self) -> usize {
        self.out_width
    }

    #[inline]
    pub fn entries(&self) -> &[[f64; 2]] {
        &self.entries
    }

    /// Source coordinate for output pixel `(row, col)`.
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> [f64; 2] {
        self.entries[row * self.out_width + col]
    }
}

fn check_shape(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::invalid(format!(
            "shape must be at least 1x1, got {height}x{width}"
        )));
    }
    Ok(())
}

/// Clamp to `[0, 1]`, mapping NaN to 0.
#[inline]
pub(crate) fn clamp_unit(v: f32) -> f32 {
    if v >= 1.0 {
        1.0
    } else if v > 0.0 {
        v
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_and_bad_shapes() {
        assert!(ImageBuffer::new(1, 1, 1, vec![1.5]).is_err());
        assert!(ImageBuffer::new(1, 1, 1, vec![f32::NAN]).is_err());
        assert!(ImageBuffer::new(0, 4, 1, vec![]).is_err());
        assert!(ImageBuffer::new(2, 2, 2, vec![0.0; 8]).is_err());
        assert!(ImageBuffer::new(2, 2, 3, vec![0.0; 11]).is_err());
        assert!(ScalarField::new(1, 2, vec![0.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn interleaved_layout() {
        let img = ImageBuffer::from_fn(2, 3, 3, |x, y, c| (x + 3 * y + c) as f32 / 10.0).unwrap();
        assert_eq!(img.pixel(2, 1), &[0.5, 0.6, 0.7]);
        assert_eq!(img.get(1, 0, 2), 0.3);
    }

    #[test]
    fn clamp_maps_nan_to_zero() {
        assert_eq!(clamp_unit(f32::NAN), 0.0);
        assert_eq!(clamp_unit(-0.5), 0.0);
        assert_eq!(clamp_unit(2.0), 1.0);
        assert_eq!(clamp_unit(0.25), 0.25);
    }
}
