//! Backward-mapping warps: every target pixel looks up its source location
//! through the inverse homography.

use image::RgbImage;
use rayon::prelude::*;

use super::{GeometryError, Homography, PROJECTIVE_EPS};
use crate::mask::BinaryMask;
use crate::scalar::Real;

/// Slack, in pixels, for source coordinates that land a rounding error
/// outside the image.
const EDGE_EPS: f64 = 1e-6;

struct InverseMap {
    m: [f64; 9],
}

impl InverseMap {
    fn new<T: Real>(h: &Homography<T>) -> Result<Self, GeometryError> {
        Ok(Self {
            m: h.inverse()?.as_row_major().map(|v| v.as_f64()),
        })
    }

    #[inline]
    fn source(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let m = &self.m;
        let w = m[6] * x + m[7] * y + m[8];
        if w.abs() <= PROJECTIVE_EPS {
            return None;
        }
        Some(((m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w))
    }
}

/// Nearest-neighbor warp of a mask into a `target_size` frame; lookups that
/// leave the source frame read as unset.
pub fn warp_mask<T: Real>(
    mask: &BinaryMask,
    h: &Homography<T>,
    target_size: (u32, u32),
) -> Result<BinaryMask, GeometryError> {
    let inv = InverseMap::new(h)?;
    let (tw, th) = target_size;
    let mut bits = vec![false; tw as usize * th as usize];
    if tw == 0 {
        return Ok(BinaryMask::from_bits(tw, th, bits).expect("sized buffer"));
    }
    bits.par_chunks_mut(tw as usize).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            if let Some((sx, sy)) = inv.source(x as f64, y as f64) {
                let (nx, ny) = (sx.round(), sy.round());
                if nx.is_finite() && ny.is_finite() && nx.abs() < 1e9 && ny.abs() < 1e9 {
                    *out = mask.get_or_false(nx as i64, ny as i64);
                }
            }
        }
    });
    Ok(BinaryMask::from_bits(tw, th, bits).expect("sized buffer"))
}

/// Snaps a coordinate into `[0, extent - 1]` when it is within `EDGE_EPS` of
/// that range; `None` when it is genuinely outside.
#[inline]
fn in_range(v: f64, extent: u32) -> Option<f64> {
    let hi = f64::from(extent) - 1.0;
    if v >= -EDGE_EPS && v <= hi + EDGE_EPS {
        Some(v.clamp(0.0, hi))
    } else {
        None
    }
}

/// Bilinear backward warp of an RGB image.
///
/// Returns the warped image and a validity mask marking target pixels whose
/// full bilinear footprint lies inside the source image. Invalid pixels are
/// black.
pub fn warp_image<T: Real>(
    image: &RgbImage,
    h: &Homography<T>,
    target_size: (u32, u32),
) -> Result<(RgbImage, BinaryMask), GeometryError> {
    let inv = InverseMap::new(h)?;
    let (tw, th) = target_size;
    let (sw, sh) = image.dimensions();
    let mut pixels = vec![0u8; tw as usize * th as usize * 3];
    let mut valid = vec![false; tw as usize * th as usize];
    if tw == 0 || sw == 0 || sh == 0 {
        let img = RgbImage::from_raw(tw, th, pixels).expect("sized buffer");
        return Ok((img, BinaryMask::from_bits(tw, th, valid).expect("sized buffer")));
    }

    pixels
        .par_chunks_mut(tw as usize * 3)
        .zip(valid.par_chunks_mut(tw as usize))
        .enumerate()
        .for_each(|(y, (prow, vrow))| {
            for x in 0..tw as usize {
                let Some((sx, sy)) = inv.source(x as f64, y as f64) else {
                    continue;
                };
                let (Some(sx), Some(sy)) = (in_range(sx, sw), in_range(sy, sh)) else {
                    continue;
                };
                let x0 = (sx.floor() as u32).min(sw.saturating_sub(2));
                let y0 = (sy.floor() as u32).min(sh.saturating_sub(2));
                let x1 = (x0 + 1).min(sw - 1);
                let y1 = (y0 + 1).min(sh - 1);
                let (fx, fy) = (sx - f64::from(x0), sy - f64::from(y0));
                let weights = [(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy];
                let taps = [
                    image.get_pixel(x0, y0),
                    image.get_pixel(x1, y0),
                    image.get_pixel(x0, y1),
                    image.get_pixel(x1, y1),
                ];
                for c in 0..3 {
                    let v: f64 = taps.iter().zip(weights).map(|(p, w)| f64::from(p[c]) * w).sum();
                    prow[x * 3 + c] = v.round().clamp(0.0, 255.0) as u8;
                }
                vrow[x] = true;
            }
        });

    let img = RgbImage::from_raw(tw, th, pixels).expect("sized buffer");
    Ok((img, BinaryMask::from_bits(tw, th, valid).expect("sized buffer")))
}

/// Single bilinear lookup with the same footprint rule as `warp_image`.
#[cfg(test)]
pub(crate) fn sample_bilinear(image: &RgbImage, sx: f64, sy: f64) -> Option<image::Rgb<u8>> {
    let (w, h) = image.dimensions();
    let (sx, sy) = (in_range(sx, w)?, in_range(sy, h)?);
    let x0 = (sx.floor() as u32).min(w.saturating_sub(2));
    let y0 = (sy.floor() as u32).min(h.saturating_sub(2));
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let (fx, fy) = (sx - f64::from(x0), sy - f64::from(y0));
    let mut out = [0u8; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let v = f64::from(image.get_pixel(x0, y0)[c]) * (1.0 - fx) * (1.0 - fy)
            + f64::from(image.get_pixel(x1, y0)[c]) * fx * (1.0 - fy)
            + f64::from(image.get_pixel(x0, y1)[c]) * (1.0 - fx) * fy
            + f64::from(image.get_pixel(x1, y1)[c]) * fx * fy;
        *o = v.round().clamp(0.0, 255.0) as u8;
    }
    Some(image::Rgb(out))
}
