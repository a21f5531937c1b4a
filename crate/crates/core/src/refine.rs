//! Anchor-circle refinement of warped masks.
//!
//! A warped (coarse) mask is turned into a segmenter mask by prompting the
//! segmenter with points on a circle around the coarse mask's centroid. The
//! circle radius is chosen to minimize
//! `alpha * (1 - IoU(refined, coarse)) + beta * SC(refined, coarse)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::{centroid, iou, shape_context_distance, MaskError, ShapeContextConfig};
use crate::oracles::{CheckedSegmenter, OracleError};
use crate::{BinaryMask, PixelPoint, Point, RgbImage};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RefineError {
    #[error("invalid anchor configuration: {0}")]
    InvalidConfig(String),
    #[error("coarse mask is {mask:?}, image is {image:?}")]
    DimensionMismatch { mask: (u32, u32), image: (u32, u32) },
    #[error("segmenter failed for all {attempts} candidate radii: {last}")]
    SegmenterFailed {
        attempts: usize,
        #[source]
        last: OracleError,
    },
    #[error(transparent)]
    Mask(#[from] MaskError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnchorConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Points on the circle; the center is always added.
    pub prompt_count: usize,
    pub r_min_px: f64,
    /// `None` uses 1.5 times the radius of a disk with the coarse mask's area.
    pub r_max_px: Option<f64>,
    pub search_steps: usize,
    pub sc: ShapeContextConfig,
    /// Best losses above this keep the coarse mask and flag the view.
    pub reject_loss: f64,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.5,
            prompt_count: 8,
            r_min_px: 2.0,
            r_max_px: None,
            search_steps: 12,
            sc: ShapeContextConfig::default(),
            reject_loss: 0.8,
        }
    }
}

impl AnchorConfig {
    pub fn validate(&self) -> Result<(), RefineError> {
        let bad = |m: &str| Err(RefineError::InvalidConfig(m.into()));
        if !(self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha + self.beta > 0.0) {
            return bad("alpha and beta must be non-negative with a positive sum");
        }
        if self.prompt_count == 0 {
            return bad("prompt_count must be at least 1");
        }
        if self.search_steps == 0 {
            return bad("search_steps must be at least 1");
        }
        if !(self.r_min_px >= 0.0 && self.r_min_px.is_finite()) {
            return bad("r_min_px must be a non-negative number");
        }
        if let Some(r_max) = self.r_max_px {
            if !(r_max > self.r_min_px && r_max.is_finite()) {
                return bad("r_max_px must exceed r_min_px");
            }
        }
        if !(self.reject_loss >= 0.0) {
            return bad("reject_loss must be non-negative");
        }
        self.sc.validate()?;
        Ok(())
    }

    /// Search interval for a coarse mask of `area` pixels. Tiny masks whose
    /// default upper bound falls below `r_min_px` collapse to a single radius.
    pub fn radius_bounds(&self, area: usize) -> (f64, f64) {
        let r_max = self
            .r_max_px
            .unwrap_or_else(|| 1.5 * (area as f64 / std::f64::consts::PI).sqrt());
        (self.r_min_px, r_max.max(self.r_min_px))
    }

    /// Loss of `refined` against `coarse`.
    pub fn loss(&self, refined: &BinaryMask, coarse: &BinaryMask) -> Result<f64, MaskError> {
        let overlap = iou(refined, coarse)?;
        let sc = if self.beta == 0.0 {
            0.0
        } else {
            shape_context_distance::<f64>(refined, coarse, &self.sc)?
        };
        Ok(self.alpha * (1.0 - overlap) + self.beta * sc)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOutcome {
    pub refined_mask: BinaryMask,
    pub radius: f64,
    /// Loss of `refined_mask` against the coarse mask.
    pub loss: f64,
    /// Lowest loss any candidate reached; differs from `loss` only when the
    /// view is degraded.
    pub best_candidate_loss: f64,
    pub candidates_evaluated: usize,
    pub degraded: bool,
}

/// Center plus `count` points at angles `2*pi*j/count` on the radius-`r`
/// circle, rounded to pixels, clamped into the image and deduplicated in
/// order.
pub fn circle_prompts(center: Point, r: f64, count: usize, size: (u32, u32)) -> Vec<PixelPoint> {
    let (w, h) = size;
    let clamp = |x: f64, y: f64| {
        let cx = x.round().clamp(0.0, f64::from(w.saturating_sub(1)));
        let cy = y.round().clamp(0.0, f64::from(h.saturating_sub(1)));
        PixelPoint::new(cx as u32, cy as u32)
    };
    let mut out = vec![clamp(center.x, center.y)];
    if r > 0.0 {
        for j in 0..count {
            let t = std::f64::consts::TAU * j as f64 / count as f64;
            let p = clamp(center.x + r * t.cos(), center.y + r * t.sin());
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

struct Candidate {
    radius: f64,
    loss: f64,
    mask: BinaryMask,
}

/// Golden-section search of the anchor radius. Every evaluated candidate is
/// kept; the one with the smallest loss wins, ties going to the smaller
/// radius.
pub fn refine_mask(
    view_image: &RgbImage,
    coarse: &BinaryMask,
    bg_points: &[PixelPoint],
    seg: &CheckedSegmenter,
    cfg: &AnchorConfig,
) -> Result<RefineOutcome, RefineError> {
    cfg.validate()?;
    if coarse.dimensions() != view_image.dimensions() {
        return Err(RefineError::DimensionMismatch {
            mask: coarse.dimensions(),
            image: view_image.dimensions(),
        });
    }
    if coarse.is_empty() {
        return Ok(RefineOutcome {
            refined_mask: coarse.clone(),
            radius: 0.0,
            loss: 0.0,
            best_candidate_loss: 0.0,
            candidates_evaluated: 0,
            degraded: false,
        });
    }

    let center = centroid::<f64>(coarse)?;
    let (lo, hi) = cfg.radius_bounds(coarse.area());
    let size = view_image.dimensions();

    // Radii that round to the same prompts share one segmenter call.
    let mut by_prompts: HashMap<Vec<PixelPoint>, Result<(f64, BinaryMask), OracleError>> = HashMap::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut last_err = None;
    let mut evaluate = |r: f64| -> f64 {
        let prompts = circle_prompts(center, r, cfg.prompt_count, size);
        let entry = by_prompts.entry(prompts).or_insert_with_key(|fg| {
            seg.segment(view_image, fg, bg_points).and_then(|m| {
                let loss = cfg
                    .loss(&m, coarse)
                    .map_err(|e| OracleError::ContractViolation(e.to_string()))?;
                Ok((loss, m))
            })
        });
        match entry {
            Ok((loss, mask)) => {
                candidates.push(Candidate {
                    radius: r,
                    loss: *loss,
                    mask: mask.clone(),
                });
                *loss
            }
            Err(e) => {
                last_err = Some(e.clone());
                f64::INFINITY
            }
        }
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut evaluated = 0usize;
    if hi - lo <= f64::EPSILON * hi.max(1.0) {
        evaluate(lo);
        evaluated = 1;
    } else {
        let (mut a, mut b) = (lo, hi);
        let mut x1 = b - inv_phi * (b - a);
        let mut f1 = evaluate(x1);
        evaluated += 1;
        if cfg.search_steps > 1 {
            let mut x2 = a + inv_phi * (b - a);
            let mut f2 = evaluate(x2);
            evaluated += 1;
            while evaluated < cfg.search_steps {
                if f1 <= f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - inv_phi * (b - a);
                    f1 = evaluate(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + inv_phi * (b - a);
                    f2 = evaluate(x2);
                }
                evaluated += 1;
            }
        }
    }

    let best = candidates
        .into_iter()
        .min_by(|p, q| p.loss.total_cmp(&q.loss).then(p.radius.total_cmp(&q.radius)));
    let Some(best) = best else {
        return Err(RefineError::SegmenterFailed {
            attempts: evaluated,
            last: last_err.expect("every failed candidate records its error"),
        });
    };

    if best.loss > cfg.reject_loss {
        return Ok(RefineOutcome {
            refined_mask: coarse.clone(),
            radius: best.radius,
            loss: cfg.loss(coarse, coarse)?,
            best_candidate_loss: best.loss,
            candidates_evaluated: evaluated,
            degraded: true,
        });
    }
    Ok(RefineOutcome {
        refined_mask: best.mask,
        radius: best.radius,
        loss: best.loss,
        best_candidate_loss: best.loss,
        candidates_evaluated: evaluated,
        degraded: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{RegionGrowSegmenter, Segmenter};
    use image::Rgb;
    use proptest::prelude::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    struct Echo(BinaryMask);

    impl Segmenter for Echo {
        fn segment(&self, _: &RgbImage, _: &[PixelPoint], _: &[PixelPoint]) -> Result<BinaryMask, OracleError> {
            Ok(self.0.clone())
        }
    }

    /// Returns a disk whose radius follows the outermost prompt distance.
    struct ByRadius {
        w: u32,
        h: u32,
        pick: fn(f64) -> f64,
        calls: AtomicUsize,
    }

    impl Segmenter for ByRadius {
        fn segment(&self, _: &RgbImage, fg: &[PixelPoint], _: &[PixelPoint]) -> Result<BinaryMask, OracleError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            let c = fg[0];
            let r = fg
                .iter()
                .map(|p| (f64::from(p.x) - f64::from(c.x)).hypot(f64::from(p.y) - f64::from(c.y)))
                .fold(0.0, f64::max);
            let rad = (self.pick)(r);
            let mut m = BinaryMask::disk(self.w, self.h, f64::from(c.x), f64::from(c.y), rad);
            for p in fg {
                m.set(p.x, p.y, true);
            }
            Ok(m)
        }
    }

    struct Failing;

    impl Segmenter for Failing {
        fn segment(&self, _: &RgbImage, _: &[PixelPoint], _: &[PixelPoint]) -> Result<BinaryMask, OracleError> {
            Err(OracleError::OracleFailure { reply: "down".into() })
        }
    }

    fn checked(s: impl Segmenter + 'static) -> CheckedSegmenter {
        CheckedSegmenter::new(Arc::new(s))
    }

    #[test]
    fn zero_radius_is_center_only() {
        let p = circle_prompts(Point::new(12.4, 7.6), 0.0, 8, (40, 40));
        assert_eq!(p, vec![PixelPoint::new(12, 8)]);
    }

    #[test]
    fn axis_aligned_four_point_circle() {
        let p = circle_prompts(Point::new(50.0, 50.0), 10.0, 4, (200, 200));
        assert_eq!(
            p,
            vec![
                PixelPoint::new(50, 50),
                PixelPoint::new(60, 50),
                PixelPoint::new(50, 60),
                PixelPoint::new(40, 50),
                PixelPoint::new(50, 40),
            ]
        );
    }

    proptest! {
        #[test]
        fn circle_points_stay_in_bounds(
            cx in -10.0f64..110.0, cy in -10.0f64..90.0, r in 0.0f64..60.0, count in 1usize..20,
        ) {
            let pts = circle_prompts(Point::new(cx, cy), r, count, (100, 80));
            prop_assert!(pts.len() <= count + 1);
            for (i, p) in pts.iter().enumerate() {
                prop_assert!(p.x < 100 && p.y < 80);
                prop_assert!(!pts[..i].contains(p));
            }
        }
    }

    #[test]
    fn echo_segmenter_gives_zero_loss() {
        let coarse = BinaryMask::disk(64, 64, 30.0, 30.0, 12.0);
        let img = RgbImage::new(64, 64);
        let out = refine_mask(&img, &coarse, &[], &checked(Echo(coarse.clone())), &AnchorConfig::default()).unwrap();
        assert_eq!(out.refined_mask, coarse);
        assert_eq!(out.loss, 0.0);
        assert!(!out.degraded);
    }

    #[test]
    fn empty_coarse_short_circuits() {
        let img = RgbImage::new(32, 32);
        let out = refine_mask(&img, &BinaryMask::new(32, 32), &[], &checked(Failing), &AnchorConfig::default()).unwrap();
        assert!(out.refined_mask.is_empty());
        assert_eq!(out.candidates_evaluated, 0);
    }

    #[test]
    fn all_failures_surface() {
        let img = RgbImage::new(32, 32);
        let coarse = BinaryMask::disk(32, 32, 16.0, 16.0, 6.0);
        let err = refine_mask(&img, &coarse, &[], &checked(Failing), &AnchorConfig::default()).unwrap_err();
        assert!(matches!(err, RefineError::SegmenterFailed { attempts: 12, .. }));
    }

    #[test]
    fn alpha_only_picks_higher_iou() {
        // Radius below 6 yields the exact coarse disk (IoU 1); larger prompts
        // yield a disk of radius 13 against the coarse 12 (IoU about 0.85).
        let coarse = BinaryMask::disk(64, 64, 32.0, 32.0, 12.0);
        let seg = ByRadius {
            w: 64,
            h: 64,
            pick: |r| if r < 6.0 { 12.0 } else { 13.0 },
            calls: AtomicUsize::new(0),
        };
        let cfg = AnchorConfig {
            beta: 0.0,
            ..AnchorConfig::default()
        };
        let img = RgbImage::new(64, 64);
        let out = refine_mask(&img, &coarse, &[], &checked(seg), &cfg).unwrap();
        assert_eq!(out.loss, 0.0);
        assert!(out.radius < 6.0);
        assert_eq!(out.refined_mask, coarse);
    }

    #[test]
    fn more_steps_never_raise_the_loss() {
        let coarse = BinaryMask::disk(96, 96, 48.0, 48.0, 20.0);
        let img = RgbImage::new(96, 96);
        let mut prev = f64::INFINITY;
        for steps in 1..=14 {
            let seg = ByRadius {
                w: 96,
                h: 96,
                pick: |r| 8.0 + 0.9 * r,
                calls: AtomicUsize::new(0),
            };
            let cfg = AnchorConfig {
                search_steps: steps,
                ..AnchorConfig::default()
            };
            let out = refine_mask(&img, &coarse, &[], &checked(seg), &cfg).unwrap();
            assert!(out.loss <= prev, "steps {steps}: {} > {prev}", out.loss);
            assert_eq!(out.candidates_evaluated, steps);
            prev = out.loss;
        }
    }

    #[test]
    fn reported_loss_recomputes() {
        let coarse = BinaryMask::disk(96, 96, 40.0, 50.0, 18.0);
        let seg = ByRadius {
            w: 96,
            h: 96,
            pick: |r| 10.0 + 0.5 * r,
            calls: AtomicUsize::new(0),
        };
        let cfg = AnchorConfig::default();
        let out = refine_mask(&RgbImage::new(96, 96), &coarse, &[], &checked(seg), &cfg).unwrap();
        assert!((cfg.loss(&out.refined_mask, &coarse).unwrap() - out.loss).abs() <= 1e-9);
    }

    #[test]
    fn hopeless_candidates_keep_coarse() {
        let coarse = BinaryMask::disk(64, 64, 32.0, 32.0, 10.0);
        let seg = ByRadius {
            w: 64,
            h: 64,
            pick: |_| 40.0,
            calls: AtomicUsize::new(0),
        };
        let cfg = AnchorConfig {
            reject_loss: 0.3,
            ..AnchorConfig::default()
        };
        let out = refine_mask(&RgbImage::new(64, 64), &coarse, &[], &checked(seg), &cfg).unwrap();
        assert!(out.degraded);
        assert_eq!(out.refined_mask, coarse);
        assert!(out.best_candidate_loss > 0.3);
        assert!((cfg.loss(&coarse, &coarse).unwrap() - out.loss).abs() <= 1e-9);
    }

    #[test]
    fn duplicate_prompt_sets_share_a_call() {
        let coarse = BinaryMask::disk(32, 32, 16.0, 16.0, 1.5);
        let seg = Arc::new(ByRadius {
            w: 32,
            h: 32,
            pick: |r| r,
            calls: AtomicUsize::new(0),
        });
        let cfg = AnchorConfig {
            r_max_px: Some(2.4),
            ..AnchorConfig::default()
        };
        let out = refine_mask(&RgbImage::new(32, 32), &coarse, &[], &CheckedSegmenter::new(seg.clone()), &cfg).unwrap();
        assert_eq!(out.candidates_evaluated, 12);
        assert!(seg.calls.load(Ordering::SeqCst) < 12);
    }

    #[test]
    fn refinement_tightens_dilated_disk() {
        let gt = BinaryMask::disk(128, 128, 60.0, 64.0, 22.0);
        let img = RgbImage::from_fn(128, 128, |x, y| {
            if gt.get(x, y) {
                Rgb([200, 40, 40])
            } else {
                Rgb([(60 + (x * 7 + y * 3) % 40) as u8, 110, (90 + (x + y) % 30) as u8])
            }
        });
        let coarse = gt.dilate(3);
        let seg = checked(RegionGrowSegmenter::default());
        let out = refine_mask(&img, &coarse, &[], &seg, &AnchorConfig::default()).unwrap();
        let before = iou(&coarse, &gt).unwrap();
        let after = iou(&out.refined_mask, &gt).unwrap();
        assert!(after >= before, "{after} < {before}");
        assert!(!out.degraded);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = AnchorConfig {
            alpha: 0.0,
            beta: 0.0,
            ..AnchorConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg = AnchorConfig {
            r_max_px: Some(1.0),
            ..AnchorConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg = AnchorConfig {
            search_steps: 0,
            ..AnchorConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn deterministic_across_calls() {
        let coarse = BinaryMask::disk(80, 80, 40.0, 40.0, 15.0);
        let run = || {
            let seg = ByRadius {
                w: 80,
                h: 80,
                pick: |r| 12.0 + 0.3 * r,
                calls: AtomicUsize::new(0),
            };
            refine_mask(&RgbImage::new(80, 80), &coarse, &[], &checked(seg), &AnchorConfig::default()).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
    }
}
