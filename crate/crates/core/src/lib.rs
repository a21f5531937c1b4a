//! Multi-view object removal.
//!
//! Masks drawn on one source view are carried to every other view of a
//! sequence through homographies estimated between adjacent views, refined
//! per view with segmentation prompts sampled on an anchor circle, and the
//! inpainted content is propagated by warping with periodic direct
//! re-inpainting on key views.
//!
//! Geometry and shape measures are generic over [`Real`] (`f32`/`f64`); the
//! aliases below fix the scalar to `f64`, which is what the pipeline uses.

pub mod geometry;
pub mod image_io;
pub mod manifest;
pub mod mask;
pub mod metrics;
pub mod oracles;
pub mod pipeline;
pub mod prompts;
pub mod refine;
pub mod scalar;
pub mod scenegen;
mod seeds;

pub use scalar::Real;

pub use geometry::PixelPoint;
pub use image::{Rgb, RgbImage};
pub use mask::BinaryMask;

pub type Point = geometry::Point2<f64>;
pub type Homography = geometry::Homography<f64>;
pub type Correspondence = geometry::Correspondence<f64>;
pub type RansacResult = geometry::RansacResult<f64>;

pub type PointF32 = geometry::Point2<f32>;
pub type HomographyF32 = geometry::Homography<f32>;
pub type CorrespondenceF32 = geometry::Correspondence<f32>;
pub type RansacResultF32 = geometry::RansacResult<f32>;
