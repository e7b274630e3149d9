//! Image and scalar-field containers, PNG/CSV I/O, bilinear sampling and
//! Gaussian convolution.
//!
//! Conventions shared by every transform in the crate:
//! - samples are `f32` in `[0, 1]`, and every public operation clamps its output;
//! - pixel centres sit at integer coordinates, so the geometric centre of a
//!   `W × H` image is `((W - 1) / 2, (H - 1) / 2)`;
//! - out-of-image reads replicate the border (convolution and warps alike).

mod blur;
mod buffer;
mod color;
mod io;
mod sample;

pub use blur::{gaussian_blur, gaussian_blur_raw, gaussian_kernel, MIN_SIGMA};
pub use buffer::{GridMap, ImageBuffer, ScalarField};
pub use color::{apply_jitter, color_jitter, hflip, to_grayscale, JitterFactors};
pub use io::{
    decode_png, encode_png, load_png, load_saliency_png, parse_field_csv, png_bytes, read_field_csv,
    save_png, write_field, write_field_csv,
};
pub use sample::{
    bilinear_sample, bilinear_sample_field, bilinear_sample_into, crop_resize, crop_resize_field, remap,
    remap_field, resize, resize_field, CropBox,
};

pub(crate) use buffer::clamp_unit;
