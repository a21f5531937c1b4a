use std::collections::VecDeque;

use super::{validate_prompts, OracleError, Segmenter};
use crate::geometry::PixelPoint;
use crate::{BinaryMask, RgbImage};

const UNSEEN: u32 = u32::MAX;

/// Color-similarity region growing; see [`builtin_segment_region_grow`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrowSegmenter {
    /// Maximum RGB Euclidean distance to the running region mean.
    pub tol: f64,
}

impl Default for RegionGrowSegmenter {
    fn default() -> Self {
        Self { tol: 12.0 }
    }
}

impl Segmenter for RegionGrowSegmenter {
    fn segment(&self, image: &RgbImage, foreground: &[PixelPoint], background: &[PixelPoint]) -> Result<BinaryMask, OracleError> {
        builtin_segment_region_grow(image, foreground, background, self.tol)
    }
}

/// Grows a region breadth-first from each foreground seed, admitting
/// 4-neighbors within `tol` of the running mean color. A region that reaches
/// a background point is cut back to the growth order just before the first
/// background point it covered. Seeds already inside an earlier region are
/// skipped; the union of all regions is returned.
pub fn builtin_segment_region_grow(
    image: &RgbImage,
    foreground: &[PixelPoint],
    background: &[PixelPoint],
    tol: f64,
) -> Result<BinaryMask, OracleError> {
    if !(tol > 0.0) {
        return Err(OracleError::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    validate_prompts(image, foreground, background)?;
    let (w, h) = image.dimensions();
    let (wu, n) = (w as usize, w as usize * h as usize);
    let raw = image.as_raw();
    let color = |i: usize| [f64::from(raw[3 * i]), f64::from(raw[3 * i + 1]), f64::from(raw[3 * i + 2])];
    let tol_sq = tol * tol;

    let mut out = vec![false; n];
    // Growth position of each pixel in the current region, or UNSEEN.
    let mut order = vec![UNSEEN; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut region: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    let bg_idx: Vec<usize> = background.iter().map(|p| p.y as usize * wu + p.x as usize).collect();

    for seed in foreground {
        let s = seed.y as usize * wu + seed.x as usize;
        if out[s] {
            continue;
        }
        for &t in &touched {
            order[t] = UNSEEN;
        }
        touched.clear();
        region.clear();
        queue.clear();

        let mut sum = color(s);
        order[s] = 0;
        touched.push(s);
        region.push(s);
        queue.push_back(s);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % wu, i / wu);
            let neighbors = [
                (x > 0).then(|| i - 1),
                (x + 1 < wu).then(|| i + 1),
                (y > 0).then(|| i - wu),
                (y + 1 < h as usize).then(|| i + wu),
            ];
            for j in neighbors.into_iter().flatten() {
                if order[j] != UNSEEN {
                    continue;
                }
                let c = color(j);
                let k = region.len() as f64;
                let d = (0..3).map(|ch| (c[ch] - sum[ch] / k).powi(2)).sum::<f64>();
                touched.push(j);
                if d <= tol_sq {
                    order[j] = region.len() as u32;
                    region.push(j);
                    queue.push_back(j);
                    for ch in 0..3 {
                        sum[ch] += c[ch];
                    }
                } else {
                    // Rejected pixels are tested once per region.
                    order[j] = UNSEEN - 1;
                }
            }
        }

        let cut = bg_idx
            .iter()
            .map(|&b| order[b])
            .filter(|&o| o < UNSEEN - 1)
            .min()
            .map_or(region.len(), |o| o as usize);
        for &i in &region[..cut] {
            out[i] = true;
        }
    }
    Ok(BinaryMask::from_bits(w, h, out).expect("sized buffer"))
}
