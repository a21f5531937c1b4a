//! Planar projective geometry: homographies, their robust estimation from
//! point correspondences, and backward-mapping warps of masks and images.

mod dlt;
mod homography;
mod ransac;
mod svd;
mod warp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

pub use dlt::estimate_dlt;
pub use homography::{chain, Homography};
pub use ransac::{ransac_estimate, RansacConfig, RansacResult};
pub use warp::{warp_image, warp_mask};

/// Below this magnitude a projective depth or determinant is treated as zero.
pub const PROJECTIVE_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point maps to infinity (projective depth {depth:e})")]
    DegeneratePoint { depth: f64 },
    #[error("matrix is singular (|det| = {det:e} after normalization)")]
    Singular { det: f64 },
    #[error("need at least 4 correspondences, got {0}")]
    TooFewCorrespondences(usize),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(&'static str),
    #[error("no consensus: best inlier ratio {best_ratio:.3} below required {required:.3}")]
    NoConsensus { best_ratio: f64, required: f64 },
    #[error("invalid RANSAC configuration: {0}")]
    InvalidConfig(&'static str),
}

/// A sub-pixel location. Pixel `(x, y)` has its center at integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sq(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn cast<U: Real>(&self) -> Point2<U> {
        Point2::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()))
    }
}

/// An integer pixel location, as produced by user clicks and mask scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelPoint {
    pub x: u32,
    pub y: u32,
}

impl PixelPoint {
    pub fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    pub fn to_point<T: Real>(self) -> Point2<T> {
        Point2::new(T::lit(f64::from(self.x)), T::lit(f64::from(self.y)))
    }
}

/// A matched point pair between a source view and a target view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Correspondence<T> {
    pub p: Point2<T>,
    pub p_prime: Point2<T>,
    #[serde(default = "default_confidence::<T>")]
    pub confidence: T,
}

fn default_confidence<T: Real>() -> T {
    T::one()
}

impl<T: Real> Correspondence<T> {
    /// A correspondence with confidence 1.
    pub fn new(p: Point2<T>, p_prime: Point2<T>) -> Self {
        Self {
            p,
            p_prime,
            confidence: T::one(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.p_prime.is_finite()
    }

    /// Euclidean distance between `h(p)` and `p_prime`; infinite when `p` is
    /// mapped to infinity.
    pub fn reprojection_error(&self, h: &Homography<T>) -> T {
        match h.apply(self.p) {
            Ok(q) => q.distance(&self.p_prime),
            Err(_) => T::infinity(),
        }
    }
}
