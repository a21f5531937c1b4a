//! Shape context distance between two masks.
//!
//! Each mask contributes a sample of its boundary pixels. Every sampled point
//! gets a log-polar histogram of where the rest of the boundary lies, with
//! radii divided by the mean pairwise boundary distance so the descriptor is
//! scale-normalized. Angles are measured in the image frame, so the distance
//! is translation- and scale-invariant but not rotation-invariant.

use serde::{Deserialize, Serialize};

use super::{boundary_points, BinaryMask, MaskError};
use crate::geometry::PixelPoint;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapeContextConfig {
    pub boundary_samples: usize,
    pub radial_bins: usize,
    pub angular_bins: usize,
    /// Inner and outer radius of the log-polar grid, as fractions of the mean
    /// pairwise boundary distance.
    pub r_inner: f64,
    pub r_outer: f64,
    pub rng_seed: u64,
}

impl Default for ShapeContextConfig {
    fn default() -> Self {
        Self {
            boundary_samples: 100,
            radial_bins: 5,
            angular_bins: 12,
            r_inner: 0.125,
            r_outer: 2.0,
            rng_seed: 0,
        }
    }
}

impl ShapeContextConfig {
    pub fn validate(&self) -> Result<(), MaskError> {
        if self.boundary_samples == 0 || self.radial_bins == 0 || self.angular_bins == 0 {
            return Err(MaskError::InvalidConfig("sample and bin counts must be positive"));
        }
        if !(self.r_inner > 0.0 && self.r_inner < self.r_outer) {
            return Err(MaskError::InvalidConfig("need 0 < r_inner < r_outer"));
        }
        if self.boundary_samples < self.angular_bins {
            return Err(MaskError::InvalidConfig("boundary_samples must be at least angular_bins"));
        }
        Ok(())
    }

    fn bins(&self) -> usize {
        self.radial_bins * self.angular_bins
    }
}

/// Log-polar histograms (normalized to unit mass) at each point of `samples`,
/// counting every point of `context` other than the sample itself.
fn descriptors<T: Real>(samples: &[(T, T)], context: &[(T, T)], cfg: &ShapeContextConfig) -> Vec<Vec<T>> {
    let bins = cfg.bins();
    let mut out = vec![vec![T::zero(); bins]; samples.len()];
    let n = context.len();
    if n < 2 {
        return out;
    }

    let mut dist_sum = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            dist_sum = dist_sum + (context[i].0 - context[j].0).hypot(context[i].1 - context[j].1);
        }
    }
    let mean_dist = dist_sum / T::from_count(n * (n - 1) / 2);
    if mean_dist == T::zero() {
        return out;
    }

    // Radial bins are log-spaced over [r_inner, r_outer]; distances below
    // r_inner count toward the first bin.
    let r_inner = T::lit(cfg.r_inner);
    let r_outer = T::lit(cfg.r_outer);
    let log_inner = r_inner.ln();
    let log_step = (r_outer.ln() - log_inner) / T::from_count(cfg.radial_bins);
    let half = T::lit(0.5);
    let two_pi = T::TAU();
    let angular = T::from_count(cfg.angular_bins);

    for (s, hist) in samples.iter().zip(out.iter_mut()) {
        let mut mass = T::zero();
        for q in context {
            let (dx, dy) = (q.0 - s.0, q.1 - s.1);
            if dx == T::zero() && dy == T::zero() {
                continue;
            }
            let r = dx.hypot(dy) / mean_dist;
            if r >= r_outer {
                continue;
            }
            // Soft assignment: each point splits its unit mass linearly
            // between the two nearest bin centers in log-radius and in angle.
            let lr = ((r.max(r_inner).ln() - log_inner) / log_step - half).max(T::zero());
            let r0 = lr.floor().to_usize().unwrap_or(0).min(cfg.radial_bins - 1);
            let r1 = (r0 + 1).min(cfg.radial_bins - 1);
            let fr = (lr - T::from_count(r0)).min(T::one());
            let mut theta = dy.atan2(dx);
            if theta < T::zero() {
                theta = theta + two_pi;
            }
            let la = theta / two_pi * angular - half;
            let la = if la < T::zero() { la + angular } else { la };
            let a0 = la.floor().to_usize().unwrap_or(0) % cfg.angular_bins;
            let a1 = (a0 + 1) % cfg.angular_bins;
            let fa = la - la.floor();
            for (rb, wr) in [(r0, T::one() - fr), (r1, fr)] {
                for (ab, wa) in [(a0, T::one() - fa), (a1, fa)] {
                    let k = rb * cfg.angular_bins + ab;
                    hist[k] = hist[k] + wr * wa;
                }
            }
            mass = mass + T::one();
        }
        if mass > T::zero() {
            for h in hist.iter_mut() {
                *h = *h / mass;
            }
        }
    }
    out
}

fn chi_squared<T: Real>(g: &[T], h: &[T]) -> T {
    let half = T::lit(0.5);
    g.iter()
        .zip(h)
        .filter(|(a, b)| **a + **b > T::zero())
        .map(|(a, b)| {
            let d = *a - *b;
            d * d / (*a + *b)
        })
        .sum::<T>()
        * half
}

/// Mean chi-squared cost of a greedy minimum-cost assignment between the two
/// masks' boundary descriptors. Zero for identical masks sampled with the
/// same seed.
pub fn shape_context_distance<T: Real>(
    a: &BinaryMask,
    b: &BinaryMask,
    cfg: &ShapeContextConfig,
) -> Result<T, MaskError> {
    cfg.validate()?;
    let xy = |pts: Vec<PixelPoint>| -> Vec<(T, T)> {
        pts.into_iter()
            .map(|p| (T::lit(f64::from(p.x)), T::lit(f64::from(p.y))))
            .collect()
    };
    let describe = |m: &BinaryMask| -> Result<Vec<Vec<T>>, MaskError> {
        let samples = xy(boundary_points(m, cfg.boundary_samples, cfg.rng_seed)?);
        Ok(descriptors(&samples, &xy(m.boundary_pixels()), cfg))
    };
    let da = describe(a)?;
    let db = describe(b)?;

    let mut costs = Vec::with_capacity(da.len() * db.len());
    for (i, ha) in da.iter().enumerate() {
        for (j, hb) in db.iter().enumerate() {
            costs.push((chi_squared(ha, hb), i, j));
        }
    }
    costs.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });

    let target = da.len().min(db.len());
    let mut used_a = vec![false; da.len()];
    let mut used_b = vec![false; db.len()];
    let (mut total, mut matched) = (T::zero(), 0usize);
    for (c, i, j) in costs {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        total = total + c;
        matched += 1;
        if matched == target {
            break;
        }
    }
    Ok(total / T::from_count(matched.max(1)))
}
