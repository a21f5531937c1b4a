use rayon::prelude::*;

use super::{MatchResult, Matcher, OracleError, ViewRef};
use crate::{Correspondence, Point, RgbImage};

const MIN_CORNERS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct HarrisNccConfig {
    pub max_points: usize,
    pub harris_k: f64,
    /// Corners closer than this to a stronger corner are suppressed.
    pub nms_radius: f64,
    /// Odd side length of the correlation patch.
    pub patch: usize,
    pub min_ncc: f64,
    /// Largest allowed displacement between matched corners, in pixels.
    pub max_displacement: Option<f64>,
}

impl Default for HarrisNccConfig {
    fn default() -> Self {
        Self {
            max_points: 500,
            harris_k: 0.04,
            nms_radius: 8.0,
            patch: 11,
            min_ncc: 0.8,
            max_displacement: Some(96.0),
        }
    }
}

/// Harris corners matched by normalized cross-correlation; see
/// [`builtin_match_harris_ncc`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HarrisNccMatcher {
    pub config: HarrisNccConfig,
}

impl Matcher for HarrisNccMatcher {
    fn match_views(&self, a: ViewRef<'_>, b: ViewRef<'_>) -> Result<MatchResult, OracleError> {
        match_with(a.image, b.image, &self.config)
    }
}

/// Matches the strongest `max_points` Harris corners of two images by
/// normalized cross-correlation, keeping mutual best matches.
pub fn builtin_match_harris_ncc(image_a: &RgbImage, image_b: &RgbImage, max_points: usize) -> Result<MatchResult, OracleError> {
    let cfg = HarrisNccConfig {
        max_points,
        ..Default::default()
    };
    match_with(image_a, image_b, &cfg)
}

struct Gray {
    w: usize,
    h: usize,
    v: Vec<f32>,
}

impl Gray {
    fn from_rgb(img: &RgbImage) -> Self {
        let v = img
            .pixels()
            .map(|p| 0.299 * f32::from(p[0]) + 0.587 * f32::from(p[1]) + 0.114 * f32::from(p[2]))
            .collect();
        Self {
            w: img.width() as usize,
            h: img.height() as usize,
            v,
        }
    }

    fn at(&self, x: usize, y: usize) -> f32 {
        self.v[y * self.w + x]
    }
}

struct Corner {
    x: usize,
    y: usize,
    /// Zero-mean, unit-norm patch.
    descriptor: Vec<f32>,
}

/// Separable [1 4 6 4 1]/16 blur with clamped borders.
fn blur(src: &[f32], w: usize, h: usize) -> Vec<f32> {
    const K: [f32; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0f32; w * h];
    tmp.par_chunks_mut(w).zip(src.par_chunks(w)).for_each(|(row, s)| {
        for (x, o) in row.iter_mut().enumerate() {
            *o = if x >= 2 && x + 2 < w {
                K[0] * (s[x - 2] + s[x + 2]) + K[1] * (s[x - 1] + s[x + 1]) + K[2] * s[x]
            } else {
                (0..5).map(|k| K[k] * s[clamp(x as isize + k as isize - 2, w)]).sum()
            };
        }
    });
    let mut out = vec![0f32; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let r = |k: isize| &tmp[clamp(y as isize + k, h) * w..][..w];
        let (a, b, c, d, e) = (r(-2), r(-1), r(0), r(1), r(2));
        for (x, o) in row.iter_mut().enumerate() {
            *o = K[0] * (a[x] + e[x]) + K[1] * (b[x] + d[x]) + K[2] * c[x];
        }
    });
    out
}

fn harris_response(g: &Gray, k: f32) -> Vec<f32> {
    let (w, h) = (g.w, g.h);
    let mut ixx = vec![0f32; w * h];
    let mut iyy = vec![0f32; w * h];
    let mut ixy = vec![0f32; w * h];
    ixx.par_chunks_mut(w)
        .zip(iyy.par_chunks_mut(w))
        .zip(ixy.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, ((rxx, ryy), rxy))| {
            if y == 0 || y + 1 >= h {
                return;
            }
            let (up, mid, down) = (&g.v[(y - 1) * w..y * w], &g.v[y * w..(y + 1) * w], &g.v[(y + 1) * w..(y + 2) * w]);
            for x in 1..w.saturating_sub(1) {
                let gx = (up[x + 1] + 2.0 * mid[x + 1] + down[x + 1]) - (up[x - 1] + 2.0 * mid[x - 1] + down[x - 1]);
                let gy = (down[x - 1] + 2.0 * down[x] + down[x + 1]) - (up[x - 1] + 2.0 * up[x] + up[x + 1]);
                let (gx, gy) = (gx / 8.0, gy / 8.0);
                rxx[x] = gx * gx;
                ryy[x] = gy * gy;
                rxy[x] = gx * gy;
            }
        });
    let (sxx, syy, sxy) = (blur(&ixx, w, h), blur(&iyy, w, h), blur(&ixy, w, h));
    sxx.par_iter()
        .zip(&syy)
        .zip(&sxy)
        .map(|((a, b), c)| a * b - c * c - k * (a + b) * (a + b))
        .collect()
}

fn descriptor(g: &Gray, x: usize, y: usize, half: usize) -> Option<Vec<f32>> {
    let mut d = Vec::with_capacity((2 * half + 1).pow(2));
    for yy in y - half..=y + half {
        for xx in x - half..=x + half {
            d.push(g.at(xx, yy));
        }
    }
    let mean = d.iter().sum::<f32>() / d.len() as f32;
    for v in d.iter_mut() {
        *v -= mean;
    }
    let norm = d.iter().map(|v| v * v).sum::<f32>().sqrt();
    if norm < 1e-3 {
        return None;
    }
    for v in d.iter_mut() {
        *v /= norm;
    }
    Some(d)
}

fn detect(img: &RgbImage, cfg: &HarrisNccConfig) -> Vec<Corner> {
    let g = Gray::from_rgb(img);
    let (w, h) = (g.w, g.h);
    let half = cfg.patch / 2;
    let margin = half.max(2);
    if w <= 2 * margin || h <= 2 * margin {
        return Vec::new();
    }
    let r = harris_response(&g, cfg.harris_k as f32);
    let max_r = r.iter().copied().fold(0f32, f32::max);
    if max_r <= 0.0 {
        return Vec::new();
    }
    // The absolute floor ignores responses from 8-bit quantization in smooth areas.
    let floor = (1e-6 * max_r).max(0.25);

    let mut cands: Vec<(f32, usize, usize)> = (margin..h - margin)
        .into_par_iter()
        .flat_map_iter(|y| {
            let r = &r;
            (margin..w - margin).filter_map(move |x| {
                let v = r[y * w + x];
                if v <= floor {
                    return None;
                }
                let local_max = [y - 1, y, y + 1]
                    .iter()
                    .all(|&yy| r[yy * w + x - 1..=yy * w + x + 1].iter().all(|&n| n <= v));
                local_max.then_some((v, x, y))
            })
        })
        .collect();
    cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));

    // Greedy suppression on a grid of nms-sized cells.
    let cell = cfg.nms_radius.max(1.0);
    let (gw, gh) = ((w as f64 / cell).ceil() as usize + 1, (h as f64 / cell).ceil() as usize + 1);
    let mut grid: Vec<Vec<(usize, usize)>> = vec![Vec::new(); gw * gh];
    let r2 = cfg.nms_radius * cfg.nms_radius;
    let mut kept = Vec::new();
    for (_, x, y) in cands {
        if kept.len() >= cfg.max_points {
            break;
        }
        let (cx, cy) = ((x as f64 / cell) as usize, (y as f64 / cell) as usize);
        let near = (cy.saturating_sub(1)..=(cy + 1).min(gh - 1)).any(|gy| {
            (cx.saturating_sub(1)..=(cx + 1).min(gw - 1)).any(|gx| {
                grid[gy * gw + gx].iter().any(|&(px, py)| {
                    let (dx, dy) = (px as f64 - x as f64, py as f64 - y as f64);
                    dx * dx + dy * dy < r2
                })
            })
        });
        if near {
            continue;
        }
        let Some(descriptor) = descriptor(&g, x, y, half) else { continue };
        grid[cy * gw + cx].push((x, y));
        kept.push(Corner { x, y, descriptor });
    }
    kept
}

fn best_match(c: &Corner, others: &[Corner], max_d2: f64) -> Option<(usize, f32)> {
    let mut best: Option<(usize, f32)> = None;
    for (j, o) in others.iter().enumerate() {
        let (dx, dy) = (o.x as f64 - c.x as f64, o.y as f64 - c.y as f64);
        if dx * dx + dy * dy > max_d2 {
            continue;
        }
        let s: f32 = c.descriptor.iter().zip(&o.descriptor).map(|(a, b)| a * b).sum();
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((j, s));
        }
    }
    best
}

fn match_with(a: &RgbImage, b: &RgbImage, cfg: &HarrisNccConfig) -> Result<MatchResult, OracleError> {
    if cfg.patch.is_multiple_of(2) || cfg.patch < 3 {
        return Err(OracleError::InvalidParameter(format!("patch size {} must be odd and >= 3", cfg.patch)));
    }
    if cfg.max_points == 0 {
        return Err(OracleError::InvalidParameter("max_points must be positive".into()));
    }
    let (ca, cb) = rayon::join(|| detect(a, cfg), || detect(b, cfg));
    let found = ca.len().min(cb.len());
    if found < MIN_CORNERS {
        return Err(OracleError::InsufficientTexture { found });
    }
    let max_d2 = cfg.max_displacement.map_or(f64::INFINITY, |d| d * d);
    let forward: Vec<Option<(usize, f32)>> = ca.par_iter().map(|c| best_match(c, &cb, max_d2)).collect();
    let backward: Vec<Option<usize>> = cb
        .par_iter()
        .map(|c| best_match(c, &ca, max_d2).map(|(i, _)| i))
        .collect();

    let correspondences: Vec<Correspondence> = forward
        .iter()
        .enumerate()
        .filter_map(|(i, m)| {
            let (j, score) = (*m)?;
            (backward[j] == Some(i) && f64::from(score) >= cfg.min_ncc).then(|| {
                let mut c = Correspondence::new(
                    Point::new(ca[i].x as f64, ca[i].y as f64),
                    Point::new(cb[j].x as f64, cb[j].y as f64),
                );
                c.confidence = f64::from(score).clamp(0.0, 1.0);
                c
            })
        })
        .collect();
    let similarity = correspondences.len() as f64 / found as f64;
    Ok(MatchResult {
        correspondences,
        similarity,
    })
}
