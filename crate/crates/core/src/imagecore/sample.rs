use super::buffer::{GridMap, ImageBuffer, ScalarField};

/// Bilinear interpolation at continuous pixel-centre coordinates `(x, y)`,
/// clamping to the image boundary (replicate padding). Writes one value per
/// channel into `out`.
#[inline]
pub fn bilinear_sample_into(image: &ImageBuffer, x: f64, y: f64, out: &mut [f32]) {
    let (w, h, ch) = (image.width(), image.height(), image.channels());
    let (x0, x1, ax) = axis_taps(x, w);
    let (y0, y1, ay) = axis_taps(y, h);
    let data = image.data();
    let r0 = y0 * w;
    let r1 = y1 * w;
    let (i00, i10, i01, i11) = ((r0 + x0) * ch, (r0 + x1) * ch, (r1 + x0) * ch, (r1 + x1) * ch);
    for c in 0..ch {
        let top = data[i00 + c] * (1.0 - ax) + data[i10 + c] * ax;
        let bot = data[i01 + c] * (1.0 - ax) + data[i11 + c] * ax;
        out[c] = top * (1.0 - ay) + bot * ay;
    }
}

/// Allocating convenience wrapper around [`bilinear_sample_into`].
pub fn bilinear_sample(image: &ImageBuffer, x: f64, y: f64) -> Vec<f32> {
    let mut out = vec![0.0; image.channels()];
    bilinear_sample_into(image, x, y, &mut out);
    out
}

/// Scalar-field variant used for resizing saliency maps.
pub fn bilinear_sample_field(field: &ScalarField, x: f64, y: f64) -> f64 {
    let w = field.width();
    let (x0, x1, ax) = axis_taps(x, w);
    let (y0, y1, ay) = axis_taps(y, field.height());
    let d = field.data();
    let ax = ax as f64;
    let ay = ay as f64;
    let top = d[y0 * w + x0] * (1.0 - ax) + d[y0 * w + x1] * ax;
    let bot = d[y1 * w + x0] * (1.0 - ax) + d[y1 * w + x1] * ax;
    top * (1.0 - ay) + bot * ay
}

#[inline]
fn axis_taps(v: f64, len: usize) -> (usize, usize, f32) {
    let max = (len - 1) as f64;
    let v = if v > 0.0 { v.min(max) } else { 0.0 };
    let i0 = v.floor();
    let frac = (v - i0) as f32;
    let i0 = i0 as usize;
    (i0, (i0 + 1).min(len - 1), frac)
}

/// Samples `image` at every grid entry.
pub fn remap(image: &ImageBuffer, grid: &GridMap) -> ImageBuffer {
    let ch = image.channels();
    let mut data = vec![0.0f32; grid.out_height() * grid.out_width() * ch];
    for (px, src) in data.chunks_exact_mut(ch).zip(grid.entries()) {
        bilinear_sample_into(image, src[0], src[1], px);
    }
    ImageBuffer::from_raw_clamped(grid.out_height(), grid.out_width(), ch, data)
}

/// Axis-aligned box in edge coordinates: the image occupies `[0, W] × [0, H]`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CropBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

/// Bilinearly resamples the box to `out_height × out_width`, aligning pixel centres.
pub fn crop_resize(image: &ImageBuffer, b: CropBox, out_height: usize, out_width: usize) -> ImageBuffer {
    let ch = image.channels();
    let sx = b.width / out_width as f64;
    let sy = b.height / out_height as f64;
    let mut data = vec![0.0f32; out_height * out_width * ch];
    for (i, row) in data.chunks_exact_mut(out_width * ch).enumerate() {
        let y = b.y + (i as f64 + 0.5) * sy - 0.5;
        for (j, px) in row.chunks_exact_mut(ch).enumerate() {
            let x = b.x + (j as f64 + 0.5) * sx - 0.5;
            bilinear_sample_into(image, x, y, px);
        }
    }
    ImageBuffer::from_raw_clamped(out_height, out_width, ch, data)
}

/// Whole-image bilinear resize. Returns a clone when the shape already matches.
pub fn resize(image: &ImageBuffer, out_height: usize, out_width: usize) -> ImageBuffer {
    if image.shape() == (out_height, out_width) {
        return image.clone();
    }
    let full = CropBox {
        x: 0.0,
        y: 0.0,
        width: image.width() as f64,
        height: image.height() as f64,
    };
    crop_resize(image, full, out_height, out_width)
}

/// Bilinear resize of a scalar field with the same pixel-centre alignment as [`resize`].
pub fn resize_field(field: &ScalarField, out_height: usize, out_width: usize) -> ScalarField {
    if field.shape() == (out_height, out_width) {
        return field.clone();
    }
    let full = CropBox {
        x: 0.0,
        y: 0.0,
        width: field.width() as f64,
        height: field.height() as f64,
    };
    crop_resize_field(field, full, out_height, out_width)
}

/// Scalar-field counterpart of [`crop_resize`].
pub fn crop_resize_field(field: &ScalarField, b: CropBox, out_height: usize, out_width: usize) -> ScalarField {
    let sx = b.width / out_width as f64;
    let sy = b.height / out_height as f64;
    let mut data = Vec::with_capacity(out_height * out_width);
    for i in 0..out_height {
        let y = b.y + (i as f64 + 0.5) * sy - 0.5;
        for j in 0..out_width {
            let x = b.x + (j as f64 + 0.5) * sx - 0.5;
            data.push(bilinear_sample_field(field, x, y));
        }
    }
    ScalarField::from_raw(out_height, out_width, data)
}

/// Scalar-field counterpart of [`remap`].
pub fn remap_field(field: &ScalarField, grid: &GridMap) -> ScalarField {
    let data = grid
        .entries()
        .iter()
        .map(|src| bilinear_sample_field(field, src[0], src[1]))
        .collect();
    ScalarField::from_raw(grid.out_height(), grid.out_width(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp() -> ImageBuffer {
        ImageBuffer::from_fn(4, 5, 3, |x, y, c| ((x * 7 + y * 3 + c * 5) % 11) as f32 / 10.0).unwrap()
    }

    #[test]
    fn knots_are_exact() {
        let img = ramp();
        for y in 0..4 {
            for x in 0..5 {
                assert_eq!(bilinear_sample(&img, x as f64, y as f64), img.pixel(x, y));
            }
        }
    }

    #[test]
    fn horizontal_midpoint_is_average() {
        let img = ramp();
        let s = bilinear_sample(&img, 1.5, 2.0);
        for c in 0..3 {
            assert_eq!(s[c], (img.get(1, 2, c) + img.get(2, 2, c)) / 2.0);
        }
    }

    #[test]
    fn outside_coordinates_clamp() {
        let img = ramp();
        assert_eq!(bilinear_sample(&img, -5.0, -5.0), img.pixel(0, 0));
        assert_eq!(bilinear_sample(&img, 100.0, 1.0), img.pixel(4, 1));
        assert_eq!(bilinear_sample(&img, 2.0, 1e9), img.pixel(2, 3));
    }

    #[test]
    fn resize_identity_and_full_crop() {
        let img = ramp();
        assert_eq!(resize(&img, 4, 5), img);
        let full = CropBox { x: 0.0, y: 0.0, width: 5.0, height: 4.0 };
        assert_eq!(crop_resize(&img, full, 4, 5), img);
    }

    #[test]
    fn constant_field_resizes_to_constant() {
        let f = ScalarField::filled(7, 9, 0.3).unwrap();
        let r = resize_field(&f, 16, 4);
        assert!(r.data().iter().all(|&v| (v - 0.3).abs() < 1e-15));
    }

    proptest! {
        // Lipschitz bound: moving by delta changes the sample by at most
        // delta * (largest adjacent difference) per axis.
        #[test]
        fn sampling_is_lipschitz(x in -2.0f64..7.0, y in -2.0f64..6.0, dx in 0.0f64..0.5, dy in 0.0f64..0.5) {
            let img = ramp();
            let mut lmax = 0.0f32;
            for yy in 0..4 {
                for xx in 0..5 {
                    for c in 0..3 {
                        if xx + 1 < 5 { lmax = lmax.max((img.get(xx + 1, yy, c) - img.get(xx, yy, c)).abs()); }
                        if yy + 1 < 4 { lmax = lmax.max((img.get(xx, yy + 1, c) - img.get(xx, yy, c)).abs()); }
                    }
                }
            }
            let a = bilinear_sample(&img, x, y);
            let b = bilinear_sample(&img, x + dx, y + dy);
            for c in 0..3 {
                prop_assert!((a[c] - b[c]).abs() as f64 <= lmax as f64 * (dx + dy) + 1e-6);
            }
        }
    }
}
