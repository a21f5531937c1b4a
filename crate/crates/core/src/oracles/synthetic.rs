use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{MatchResult, Matcher, OracleError, ViewRef};
use crate::scenegen::{SceneGeometry, SyntheticScene};
use crate::seeds::derive;
use crate::{Correspondence, Homography, Point};

const MAX_DRAWS_PER_POINT: usize = 1000;

/// Correspondences drawn from a known homography `h` between two frames of
/// `size`. Exactly `round(outlier_ratio * n)` of them get uniform random
/// targets; the rest are mapped through `h` and jittered by Gaussian noise.
/// Source points whose noisy target would leave the frame are redrawn.
pub(crate) fn matches_from_homography(
    h: &Homography,
    size: (u32, u32),
    n_points: usize,
    outlier_ratio: f64,
    noise_px: f64,
    seed: u64,
) -> Result<MatchResult, OracleError> {
    if !(0.0..=1.0).contains(&outlier_ratio) {
        return Err(OracleError::InvalidParameter(format!("outlier_ratio {outlier_ratio} outside [0, 1]")));
    }
    if !(noise_px >= 0.0 && noise_px.is_finite()) {
        return Err(OracleError::InvalidParameter(format!("noise_px {noise_px} must be non-negative")));
    }
    let (w, hgt) = (f64::from(size.0) - 1.0, f64::from(size.1) - 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_px).map_err(|e| OracleError::InvalidParameter(e.to_string()))?;
    let inside = |q: &Point| q.x >= 0.0 && q.y >= 0.0 && q.x <= w && q.y <= hgt;

    let mut correspondences = Vec::with_capacity(n_points);
    let mut draws = 0;
    while correspondences.len() < n_points && draws < MAX_DRAWS_PER_POINT * n_points.max(1) {
        draws += 1;
        let p = Point::new(rng.random_range(0.0..=w), rng.random_range(0.0..=hgt));
        let Ok(mut q) = h.apply(p) else { continue };
        if noise_px > 0.0 {
            q.x += noise.sample(&mut rng);
            q.y += noise.sample(&mut rng);
        }
        if inside(&q) {
            correspondences.push(Correspondence::new(p, q));
        }
    }
    let n = correspondences.len();
    let n_out = ((outlier_ratio * n as f64).round() as usize).min(n);
    for i in sample(&mut rng, n, n_out).into_vec() {
        correspondences[i].p_prime = Point::new(rng.random_range(0.0..=w), rng.random_range(0.0..=hgt));
    }
    let similarity = if n == 0 {
        0.0
    } else {
        ((n - n_out) as f64 / n as f64).max(f64::MIN_POSITIVE)
    };
    Ok(MatchResult {
        correspondences,
        similarity,
    })
}

/// Ground-truth matches between views `i` and `j` of a synthetic scene.
pub fn synthetic_exact_matcher(
    scene: &SyntheticScene,
    i: usize,
    j: usize,
    n_points: usize,
    outlier_ratio: f64,
    noise_px: f64,
    seed: u64,
) -> Result<MatchResult, OracleError> {
    let n = scene.n_views();
    if i >= n || j >= n {
        return Err(OracleError::InvalidParameter(format!("view pair ({i}, {j}) out of range for {n} views")));
    }
    let h = scene
        .gt_between(i, j)
        .map_err(|e| OracleError::InvalidParameter(e.to_string()))?;
    matches_from_homography(&h, scene.size(), n_points, outlier_ratio, noise_px, pair_seed(seed, i, j))
}

fn pair_seed(seed: u64, i: usize, j: usize) -> u64 {
    derive(seed, &[i as u64, j as u64])
}

/// [`Matcher`] backed by a scene's ground-truth geometry. Pairs listed in
/// `corrupt_pairs` (either orientation) get only random targets.
#[derive(Debug, Clone)]
pub struct SyntheticMatcher {
    pub geometry: SceneGeometry,
    pub n_points: usize,
    pub outlier_ratio: f64,
    pub noise_px: f64,
    pub seed: u64,
    pub corrupt_pairs: Vec<(usize, usize)>,
}

impl SyntheticMatcher {
    pub fn new(geometry: SceneGeometry) -> Self {
        Self {
            geometry,
            n_points: 200,
            outlier_ratio: 0.3,
            noise_px: 0.5,
            seed: 0,
            corrupt_pairs: Vec::new(),
        }
    }
}

impl Matcher for SyntheticMatcher {
    fn match_views(&self, a: ViewRef<'_>, b: ViewRef<'_>) -> Result<MatchResult, OracleError> {
        let (i, j) = (a.index, b.index);
        let n = self.geometry.n_views();
        if i >= n || j >= n {
            return Err(OracleError::InvalidParameter(format!("view pair ({i}, {j}) out of range for {n} views")));
        }
        let size = (self.geometry.width, self.geometry.height);
        let h = self
            .geometry
            .between(i, j)
            .map_err(|e| OracleError::InvalidParameter(e.to_string()))?;
        let corrupt = self.corrupt_pairs.iter().any(|&(x, y)| (x, y) == (i, j) || (y, x) == (i, j));
        let seed = pair_seed(self.seed, i, j);
        if corrupt {
            let mut r = matches_from_homography(&h, size, self.n_points, 1.0, 0.0, seed)?;
            // A matcher fooled by the pair still reports a plausible score.
            r.similarity = if r.correspondences.is_empty() { 0.0 } else { 0.5 };
            return Ok(r);
        }
        matches_from_homography(&h, size, self.n_points, self.outlier_ratio, self.noise_px, seed)
    }
}
