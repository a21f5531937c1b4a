use super::{Inpainter, OracleError};
use crate::{BinaryMask, RgbImage};

/// Sweeps stop early once no channel moves by more than this (0-255 scale).
const CONVERGED: f32 = 1e-3;

/// Harmonic fill by Jacobi iteration; see [`builtin_inpaint_diffusion`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionInpainter {
    pub iters: usize,
}

impl Default for DiffusionInpainter {
    fn default() -> Self {
        Self { iters: 2000 }
    }
}

impl Inpainter for DiffusionInpainter {
    fn inpaint(&self, image: &RgbImage, mask: &BinaryMask) -> Result<RgbImage, OracleError> {
        builtin_inpaint_diffusion(image, mask, self.iters)
    }
}

/// Fills the masked pixels with the discrete harmonic interpolation of the
/// surrounding colors.
///
/// Masked pixels start at the mean color of the unmasked pixels bordering the
/// mask, then each sweep replaces every masked pixel by the mean of its
/// in-frame 4-neighbors. At most `iters` sweeps run.
pub fn builtin_inpaint_diffusion(image: &RgbImage, mask: &BinaryMask, iters: usize) -> Result<RgbImage, OracleError> {
    if image.dimensions() != mask.dimensions() {
        return Err(OracleError::DimensionMismatch {
            image: image.dimensions(),
            mask: mask.dimensions(),
        });
    }
    if iters == 0 {
        return Err(OracleError::InvalidParameter("iters must be at least 1".into()));
    }
    if mask.is_empty() {
        return Ok(image.clone());
    }
    let (w, h) = (image.width() as usize, image.height() as usize);
    let bits = mask.bits();
    if bits.iter().all(|b| *b) {
        return Err(OracleError::FullFrameMask);
    }
    let raw = image.as_raw();

    // Dense index for masked pixels and, per masked pixel, its in-frame
    // neighbors as either another unknown or a fixed color.
    let mut slot = vec![u32::MAX; w * h];
    let unknown: Vec<usize> = (0..w * h).filter(|&i| bits[i]).collect();
    for (k, &i) in unknown.iter().enumerate() {
        slot[i] = k as u32;
    }
    let mut neighbors: Vec<[u32; 4]> = Vec::with_capacity(unknown.len());
    let mut fixed_sum: Vec<[f32; 3]> = Vec::with_capacity(unknown.len());
    let mut degree: Vec<f32> = Vec::with_capacity(unknown.len());
    let (mut ring_sum, mut ring_n) = ([0f64; 3], 0usize);
    let mut ring_seen = vec![false; w * h];
    for &i in &unknown {
        let (x, y) = (i % w, i / w);
        let mut nb = [u32::MAX; 4];
        let mut fs = [0f32; 3];
        let mut deg = 0f32;
        let cands = [
            (x > 0).then(|| i - 1),
            (x + 1 < w).then(|| i + 1),
            (y > 0).then(|| i - w),
            (y + 1 < h).then(|| i + w),
        ];
        for (slot_k, j) in cands.into_iter().enumerate() {
            let Some(j) = j else { continue };
            deg += 1.0;
            if bits[j] {
                nb[slot_k] = slot[j];
            } else {
                for c in 0..3 {
                    fs[c] += f32::from(raw[3 * j + c]);
                }
                if !ring_seen[j] {
                    ring_seen[j] = true;
                    for (c, s) in ring_sum.iter_mut().enumerate() {
                        *s += f64::from(raw[3 * j + c]);
                    }
                    ring_n += 1;
                }
            }
        }
        neighbors.push(nb);
        fixed_sum.push(fs);
        degree.push(deg);
    }
    if ring_n == 0 {
        return Err(OracleError::FullFrameMask);
    }
    let init = ring_sum.map(|s| (s / ring_n as f64) as f32);

    let mut cur: Vec<[f32; 3]> = vec![init; unknown.len()];
    let mut next = cur.clone();
    for _ in 0..iters {
        let mut delta = 0f32;
        for k in 0..unknown.len() {
            let mut acc = fixed_sum[k];
            for &nb in &neighbors[k] {
                if nb != u32::MAX {
                    let v = cur[nb as usize];
                    for c in 0..3 {
                        acc[c] += v[c];
                    }
                }
            }
            let inv = 1.0 / degree[k];
            let v = acc.map(|a| a * inv);
            for c in 0..3 {
                delta = delta.max((v[c] - cur[k][c]).abs());
            }
            next[k] = v;
        }
        std::mem::swap(&mut cur, &mut next);
        if delta <= CONVERGED {
            break;
        }
    }

    let mut out = image.clone();
    let buf: &mut [u8] = &mut out;
    for (k, &i) in unknown.iter().enumerate() {
        for c in 0..3 {
            buf[3 * i + c] = cur[k][c].round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn empty_mask_is_a_no_op() {
        let img = RgbImage::from_fn(10, 10, |x, y| Rgb([x as u8, y as u8, 3]));
        assert_eq!(builtin_inpaint_diffusion(&img, &BinaryMask::new(10, 10), 50).unwrap(), img);
    }

    #[test]
    fn constant_image_is_reproduced() {
        let img = RgbImage::from_pixel(30, 20, Rgb([40, 90, 200]));
        let mask = BinaryMask::disk(30, 20, 10.0, 10.0, 7.0);
        assert_eq!(builtin_inpaint_diffusion(&img, &mask, 2000).unwrap(), img);
    }

    #[test]
    fn linear_gradient_is_its_own_harmonic_fill() {
        let f = |x: u32| 20.0 + 3.0 * f64::from(x);
        let img = RgbImage::from_fn(64, 40, |x, _| {
            let v = f(x).round() as u8;
            Rgb([v, 255 - v, 128])
        });
        let mask = BinaryMask::rect(64, 40, 20, 10, 40, 30);
        let out = builtin_inpaint_diffusion(&img, &mask, 500).unwrap();
        for p in mask.iter_set() {
            let got = f64::from(out.get_pixel(p.x, p.y)[0]);
            assert!((got - f(p.x)).abs() <= 2.0, "({}, {}): {got} vs {}", p.x, p.y, f(p.x));
        }
    }

    #[test]
    fn unmasked_pixels_untouched() {
        let img = RgbImage::from_fn(32, 32, |x, y| Rgb([(x * 7) as u8, (y * 5) as u8, ((x + y) * 3) as u8]));
        let mask = BinaryMask::disk(32, 32, 0.0, 16.0, 9.0);
        let out = builtin_inpaint_diffusion(&img, &mask, 100).unwrap();
        for (i, (a, b)) in img.pixels().zip(out.pixels()).enumerate() {
            if !mask.bits()[i] {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn idempotent_at_convergence() {
        let img = RgbImage::from_fn(40, 40, |x, y| Rgb([(x * 6) as u8, (y * 6) as u8, ((x * y) % 251) as u8]));
        let mask = BinaryMask::disk(40, 40, 20.0, 20.0, 8.0);
        let once = builtin_inpaint_diffusion(&img, &mask, 2000).unwrap();
        let twice = builtin_inpaint_diffusion(&once, &mask, 2000).unwrap();
        for (a, b) in once.pixels().zip(twice.pixels()) {
            for c in 0..3 {
                assert!((i16::from(a[c]) - i16::from(b[c])).abs() <= 1);
            }
        }
    }

    #[test]
    fn full_frame_and_size_errors() {
        let img = RgbImage::new(8, 8);
        assert_eq!(
            builtin_inpaint_diffusion(&img, &BinaryMask::full(8, 8), 10).unwrap_err(),
            OracleError::FullFrameMask
        );
        assert!(matches!(
            builtin_inpaint_diffusion(&img, &BinaryMask::new(8, 9), 10),
            Err(OracleError::DimensionMismatch { .. })
        ));
    }
}
