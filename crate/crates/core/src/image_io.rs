//! PNG encoding for RGB views and 1-bit masks.

use std::fs::File;
use std::io::{BufReader, Cursor};
use std::path::{Path, PathBuf};

use image::RgbImage;
use thiserror::Error;

use crate::mask::BinaryMask;

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("png encoding failed: {0}")]
    Encode(String),
}

fn io_err(path: &Path, source: std::io::Error) -> ImageIoError {
    ImageIoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn load_rgb(path: &Path) -> Result<RgbImage, ImageIoError> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(source) => io_err(path, source),
        other => ImageIoError::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })?;
    Ok(img.to_rgb8())
}

pub fn encode_rgb_png(img: &RgbImage) -> Result<Vec<u8>, ImageIoError> {
    let mut out = Vec::new();
    img.write_to(&mut Cursor::new(&mut out), image::ImageFormat::Png)
        .map_err(|e| ImageIoError::Encode(e.to_string()))?;
    Ok(out)
}

pub fn save_rgb(img: &RgbImage, path: &Path) -> Result<(), ImageIoError> {
    write_file(path, &encode_rgb_png(img)?)
}

/// 1-bit grayscale PNG, set pixels white.
pub fn encode_mask_png(mask: &BinaryMask) -> Result<Vec<u8>, ImageIoError> {
    let (w, h) = mask.dimensions();
    let stride = (w as usize).div_ceil(8);
    let mut packed = vec![0u8; stride * h as usize];
    for p in mask.iter_set() {
        packed[p.y as usize * stride + p.x as usize / 8] |= 0x80 >> (p.x % 8);
    }
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, w, h);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::One);
        let mut writer = enc.write_header().map_err(|e| ImageIoError::Encode(e.to_string()))?;
        writer
            .write_image_data(&packed)
            .map_err(|e| ImageIoError::Encode(e.to_string()))?;
    }
    Ok(out)
}

pub fn save_mask(mask: &BinaryMask, path: &Path) -> Result<(), ImageIoError> {
    write_file(path, &encode_mask_png(mask)?)
}

/// Loads a mask PNG of any bit depth or color type; a pixel is set when its
/// first channel is at least half intensity.
pub fn load_mask(path: &Path) -> Result<BinaryMask, ImageIoError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let decode_err = |message: String| ImageIoError::Decode {
        path: path.to_path_buf(),
        message,
    };
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| decode_err(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| decode_err("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(|e| decode_err(e.to_string()))?;
    let (w, h) = (info.width, info.height);
    let channels = info.color_type.samples();
    let bytes_per_sample = match info.bit_depth {
        png::BitDepth::Sixteen => 2,
        _ => 1,
    };
    // EXPAND widens sub-byte grayscale to 8 bits, scaled to full range.
    let threshold = match info.bit_depth {
        png::BitDepth::Sixteen | png::BitDepth::Eight => 0x80u8,
        _ => 1,
    };
    let pixel_stride = channels * bytes_per_sample;
    let bits = (0..(w as usize * h as usize))
        .map(|i| {
            let row = i / w as usize;
            let col = i % w as usize;
            let idx = row * info.line_size + col * pixel_stride;
            buf[idx] >= threshold
        })
        .collect();
    BinaryMask::from_bits(w, h, bits).map_err(|e| decode_err(e.to_string()))
}

/// Writes `bytes`, creating missing parent directories.
fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ImageIoError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| io_err(path, e))
}
