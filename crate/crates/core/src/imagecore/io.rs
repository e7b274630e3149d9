use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use log::warn;

use super::buffer::{ImageBuffer, ScalarField};
use crate::error::{Error, Result};

/// Loads an 8- or 16-bit grayscale/RGB PNG, scaling samples linearly to `[0, 1]`.
///
/// Alpha channels are dropped with a warning; palette and sub-byte images are rejected.
pub fn load_png(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    decode_png(BufReader::new(file)).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn decode_png<R: std::io::BufRead + std::io::Seek>(reader: R) -> Result<ImageBuffer> {
    let mut decoder = png::Decoder::new(reader);
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Data(format!("corrupt png: {e}")))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Data("png too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Data(format!("corrupt png: {e}")))?;

    let (src_channels, keep) = match info.color_type {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (2, 1),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (4, 3),
        png::ColorType::Indexed => {
            return Err(Error::UnsupportedFormat("palette png".into()));
        }
    };
    if src_channels != keep {
        warn!("dropping alpha channel from png");
    }
    let (width, height) = (info.width as usize, info.height as usize);
    let mut data = Vec::with_capacity(width * height * keep);
    match info.bit_depth {
        png::BitDepth::Eight => {
            for row in buf.chunks_exact(info.line_size).take(height) {
                for px in row[..width * src_channels].chunks_exact(src_channels) {
                    data.extend(px[..keep].iter().map(|&b| b as f32 / 255.0));
                }
            }
        }
        png::BitDepth::Sixteen => {
            for row in buf.chunks_exact(info.line_size).take(height) {
                for px in row[..width * src_channels * 2].chunks_exact(src_channels * 2) {
                    data.extend(
                        px[..keep * 2]
                            .chunks_exact(2)
                            .map(|b| u16::from_be_bytes([b[0], b[1]]) as f32 / 65535.0),
                    );
                }
            }
        }
        depth => {
            return Err(Error::UnsupportedFormat(format!(
                "bit depth {depth:?} (only 8 and 16 are supported)"
            )));
        }
    }
    ImageBuffer::new(height, width, keep, data)
}

/// Writes an 8-bit PNG; each sample `v` becomes `round(v * 255)` (half away from zero).
pub fn save_png(image: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    encode_png(image, &mut w).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn encode_png<W: Write>(image: &ImageBuffer, w: W) -> Result<()> {
    let mut encoder = png::Encoder::new(w, image.width() as u32, image.height() as u32);
    encoder.set_color(if image.channels() == 1 {
        png::ColorType::Grayscale
    } else {
        png::ColorType::Rgb
    });
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder
        .write_header()
        .map_err(|e| Error::Data(format!("png encode: {e}")))?;
    let bytes: Vec<u8> = image.data().iter().map(|&v| to_byte(v)).collect();
    writer
        .write_image_data(&bytes)
        .map_err(|e| Error::Data(format!("png encode: {e}")))?;
    writer
        .finish()
        .map_err(|e| Error::Data(format!("png encode: {e}")))
}

/// Encodes to an in-memory PNG byte vector.
pub fn png_bytes(image: &ImageBuffer) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    encode_png(image, &mut out)?;
    Ok(out)
}

#[inline]
pub(crate) fn to_byte(v: f32) -> u8 {
    // f32::round rounds half away from zero.
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Saliency from an 8-bit grayscale PNG: `S = pixel / 255`. RGB inputs are
/// reduced to their first channel.
pub fn load_saliency_png(path: impl AsRef<Path>) -> Result<ScalarField> {
    let img = load_png(path)?;
    let c = img.channels();
    let data = img.data().iter().step_by(c).map(|&v| v as f64).collect();
    ScalarField::new(img.height(), img.width(), data)
}

/// Reads a scalar field CSV: first record `height,width`, then row-major values
/// (any number per line).
pub fn read_field_csv(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_field_csv(&text)
}

pub fn parse_field_csv(text: &str) -> Result<ScalarField> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Data("empty field csv".into()))?
        .map_err(|e| Error::Data(e.to_string()))?;
    let dims: Vec<usize> = header
        .iter()
        .map(|s| s.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::Data(format!("bad field header: {e}")))?;
    let [height, width] = dims[..] else {
        return Err(Error::Data("field header must be `height,width`".into()));
    };
    let mut data = Vec::with_capacity(height * width);
    for rec in records {
        let rec = rec.map_err(|e| Error::Data(e.to_string()))?;
        for s in rec.iter().filter(|s| !s.is_empty()) {
            data.push(
                s.parse::<f64>()
                    .map_err(|e| Error::Data(format!("bad value `{s}`: {e}")))?,
            );
        }
    }
    if data.len() != height * width {
        return Err(Error::Data(format!(
            "field csv has {} values, header says {height}x{width}",
            data.len()
        )));
    }
    ScalarField::new(height, width, data).map_err(|e| Error::Data(e.to_string()))
}

/// Writes a scalar field CSV with one image row per line.
pub fn write_field_csv(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_field(field, &mut w).map_err(|e| Error::io(path, e))
}

pub fn write_field<W: Write>(field: &ScalarField, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{},{}", field.height(), field.width())?;
    for row in field.data().chunks(field.width()) {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
