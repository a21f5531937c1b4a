use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{estimate_dlt, Correspondence, GeometryError, Homography};
use crate::scalar::Real;

const MAX_REFITS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacConfig {
    pub inlier_threshold_px: f64,
    pub max_iterations: usize,
    pub min_inlier_ratio: f64,
    pub rng_seed: u64,
    /// Probability of having drawn at least one all-inlier sample at which the
    /// loop may stop before `max_iterations`. Set to 1 to always run the cap.
    pub confidence: f64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            inlier_threshold_px: 3.0,
            max_iterations: 2000,
            min_inlier_ratio: 0.15,
            rng_seed: 0,
            confidence: 0.999,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.inlier_threshold_px > 0.0) {
            return Err(GeometryError::InvalidConfig("inlier_threshold_px must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(GeometryError::InvalidConfig("max_iterations must be positive"));
        }
        if !(self.min_inlier_ratio > 0.0 && self.min_inlier_ratio <= 1.0) {
            return Err(GeometryError::InvalidConfig("min_inlier_ratio must lie in (0, 1]"));
        }
        if !(self.confidence > 0.0 && self.confidence <= 1.0) {
            return Err(GeometryError::InvalidConfig("confidence must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RansacResult<T> {
    pub homography: Homography<T>,
    pub inlier_indices: Vec<usize>,
    pub mean_inlier_error_px: T,
    pub iterations_used: usize,
}

impl<T: Real> RansacResult<T> {
    pub fn inlier_ratio(&self, total: usize) -> f64 {
        if total == 0 {
            0.0
        } else {
            self.inlier_indices.len() as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone)]
struct Consensus<T> {
    homography: Homography<T>,
    inliers: Vec<usize>,
    mean_error: T,
    /// Sum of squared reprojection errors over every correspondence.
    epsilon: T,
}

impl<T: Real> Consensus<T> {
    fn score(h: Homography<T>, data: &[Correspondence<T>], threshold: T) -> Self {
        let mut inliers = Vec::new();
        let mut err_sum = T::zero();
        let mut epsilon = T::zero();
        for (i, c) in data.iter().enumerate() {
            let e = c.reprojection_error(&h);
            epsilon = epsilon + e * e;
            if e <= threshold {
                inliers.push(i);
                err_sum = err_sum + e;
            }
        }
        let mean_error = if inliers.is_empty() {
            T::infinity()
        } else {
            err_sum / T::from_count(inliers.len())
        };
        Self {
            homography: h,
            inliers,
            mean_error,
            epsilon,
        }
    }

    fn beats(&self, other: &Self) -> bool {
        self.inliers.len() > other.inliers.len()
            || (self.inliers.len() == other.inliers.len() && self.mean_error < other.mean_error)
    }
}

fn required_iterations(inlier_ratio: f64, confidence: f64, cap: usize) -> usize {
    if confidence >= 1.0 {
        return cap;
    }
    let all_inlier = inlier_ratio.powi(4);
    if all_inlier >= 1.0 {
        return 1;
    }
    if all_inlier <= 0.0 {
        return cap;
    }
    let k = (1.0 - confidence).ln() / (1.0 - all_inlier).ln();
    if k.is_finite() {
        (k.ceil() as usize).clamp(1, cap)
    } else {
        cap
    }
}

/// Robust homography from correspondences contaminated with outliers.
///
/// Each iteration fits a minimal four-point sample, scores it over all pairs
/// and keeps the candidate with the most inliers (ties go to the smaller
/// mean inlier error). The winner is re-fit on its inlier set until the set
/// stops changing.
pub fn ransac_estimate<T: Real>(
    correspondences: &[Correspondence<T>],
    cfg: &RansacConfig,
) -> Result<RansacResult<T>, GeometryError> {
    cfg.validate()?;
    let n = correspondences.len();
    if n < 4 {
        return Err(GeometryError::TooFewCorrespondences(n));
    }
    let threshold = T::lit(cfg.inlier_threshold_px);

    let (mut best, iterations_used) = if n == 4 {
        let h = estimate_dlt(correspondences)?;
        (Consensus::score(h, correspondences, threshold), 1)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        let mut best: Option<Consensus<T>> = None;
        let mut last_err = None;
        let mut budget = cfg.max_iterations;
        let mut it = 0;
        let mut minimal = Vec::with_capacity(4);
        while it < budget {
            it += 1;
            minimal.clear();
            minimal.extend(sample(&mut rng, n, 4).iter().map(|i| correspondences[i]));
            let h = match estimate_dlt(&minimal) {
                Ok(h) => h,
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            let candidate = Consensus::score(h, correspondences, threshold);
            if best.as_ref().is_none_or(|b| candidate.beats(b)) {
                let ratio = candidate.inliers.len() as f64 / n as f64;
                budget = budget.min(required_iterations(ratio, cfg.confidence, cfg.max_iterations).max(it));
                best = Some(candidate);
            }
        }
        match best {
            Some(b) => (b, it),
            None => {
                return Err(last_err.unwrap_or(GeometryError::DegenerateConfiguration("no valid minimal sample")));
            }
        }
    };

    let required = cfg.min_inlier_ratio;
    let ratio = best.inliers.len() as f64 / n as f64;
    if ratio < required || best.inliers.len() < 4 {
        return Err(GeometryError::NoConsensus { best_ratio: ratio, required });
    }

    if n > 4 {
        for _ in 0..MAX_REFITS {
            let subset: Vec<_> = best.inliers.iter().map(|&i| correspondences[i]).collect();
            let Ok(h) = estimate_dlt(&subset) else { break };
            let refit = Consensus::score(h, correspondences, threshold);
            if refit.inliers.len() < best.inliers.len() {
                break;
            }
            let stable = refit.inliers == best.inliers;
            best = refit;
            if stable {
                break;
            }
        }
    }
    log::trace!(
        "ransac: {} / {} inliers, eps={:.3}, {} iterations",
        best.inliers.len(),
        n,
        best.epsilon.as_f64(),
        iterations_used
    );

    Ok(RansacResult {
        homography: best.homography,
        inlier_indices: best.inliers,
        mean_inlier_error_px: best.mean_error,
        iterations_used,
    })
}
