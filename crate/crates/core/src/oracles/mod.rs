//! Pluggable model interfaces for matching, segmentation and inpainting.
//!
//! The pipeline talks to these three traits only. Built-in classical
//! implementations are provided, together with a ground-truth matcher for
//! synthetic scenes and an adapter that forwards calls to an external
//! process. Every oracle the pipeline uses goes through a `Checked*` wrapper
//! that enforces the interface contract and serializes calls to oracles that
//! declare themselves serial-only.

mod diffusion;
mod harris;
mod region_grow;
mod subprocess;
mod synthetic;

use std::sync::{Arc, Mutex};

use image::RgbImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::PixelPoint;
use crate::mask::BinaryMask;
use crate::Correspondence;

pub use diffusion::{builtin_inpaint_diffusion, DiffusionInpainter};
pub use harris::{builtin_match_harris_ncc, HarrisNccConfig, HarrisNccMatcher};
pub use region_grow::{builtin_segment_region_grow, RegionGrowSegmenter};
pub use subprocess::{OracleReply, OracleRequest, SubprocessOracle};
pub use synthetic::{synthetic_exact_matcher, SyntheticMatcher};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("foreground point ({x}, {y}) conflicts with the prompt set")]
    PromptConflict { x: u32, y: u32 },
    #[error("prompt point ({x}, {y}) outside {width}x{height} image")]
    PromptOutOfBounds { x: u32, y: u32, width: u32, height: u32 },
    #[error("no foreground points given")]
    NoForeground,
    #[error("insufficient texture: {found} corners, need 8")]
    InsufficientTexture { found: usize },
    #[error("image and mask dimensions differ: {image:?} vs {mask:?}")]
    DimensionMismatch { image: (u32, u32), mask: (u32, u32) },
    #[error("mask covers the whole frame; nothing to diffuse from")]
    FullFrameMask,
    #[error("oracle violated its contract: {0}")]
    ContractViolation(String),
    #[error("oracle process failed: {reply}")]
    OracleFailure { reply: String },
    #[error("oracle adapter error: {0}")]
    Adapter(String),
    #[error("invalid oracle parameter: {0}")]
    InvalidParameter(String),
}

/// Correspondences between two views plus a similarity score in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MatchResult {
    pub correspondences: Vec<Correspondence>,
    pub similarity: f64,
}

/// A view handed to a matcher: its position in the sequence and its pixels.
#[derive(Debug, Clone, Copy)]
pub struct ViewRef<'a> {
    pub index: usize,
    pub image: &'a RgbImage,
}

pub trait Matcher: Send + Sync {
    fn match_views(&self, a: ViewRef<'_>, b: ViewRef<'_>) -> Result<MatchResult, OracleError>;

    /// `false` when calls must not overlap.
    fn concurrent(&self) -> bool {
        true
    }
}

pub trait Segmenter: Send + Sync {
    /// Mask of the object indicated by `foreground`, avoiding `background`.
    fn segment(&self, image: &RgbImage, foreground: &[PixelPoint], background: &[PixelPoint]) -> Result<BinaryMask, OracleError>;

    fn concurrent(&self) -> bool {
        true
    }
}

pub trait Inpainter: Send + Sync {
    /// Fills the set pixels of `mask`; every other pixel must come back unchanged.
    fn inpaint(&self, image: &RgbImage, mask: &BinaryMask) -> Result<RgbImage, OracleError>;

    fn concurrent(&self) -> bool {
        true
    }
}

fn serial_lock(concurrent: bool) -> Option<Mutex<()>> {
    (!concurrent).then(|| Mutex::new(()))
}

macro_rules! with_lock {
    ($lock:expr, $body:expr) => {{
        let _guard = $lock.as_ref().map(|l| l.lock().unwrap_or_else(|e| e.into_inner()));
        $body
    }};
}

fn in_bounds(p: &crate::Point, w: u32, h: u32) -> bool {
    p.is_finite() && p.x >= 0.0 && p.y >= 0.0 && p.x <= f64::from(w) - 1.0 && p.y <= f64::from(h) - 1.0
}

/// Matcher wrapper that rejects correspondences outside either frame and
/// keeps `similarity` consistent with the correspondence list.
pub struct CheckedMatcher {
    inner: Arc<dyn Matcher>,
    lock: Option<Mutex<()>>,
}

impl CheckedMatcher {
    pub fn new(inner: Arc<dyn Matcher>) -> Self {
        let lock = serial_lock(inner.concurrent());
        Self { inner, lock }
    }

    pub fn match_views(&self, a: ViewRef<'_>, b: ViewRef<'_>) -> Result<MatchResult, OracleError> {
        let mut r = with_lock!(self.lock, self.inner.match_views(a, b))?;
        let (wa, ha) = a.image.dimensions();
        let (wb, hb) = b.image.dimensions();
        if let Some(c) = r
            .correspondences
            .iter()
            .find(|c| !in_bounds(&c.p, wa, ha) || !in_bounds(&c.p_prime, wb, hb))
        {
            return Err(OracleError::ContractViolation(format!(
                "correspondence {:?} -> {:?} outside image bounds",
                c.p, c.p_prime
            )));
        }
        if !(0.0..=1.0).contains(&r.similarity) {
            return Err(OracleError::ContractViolation(format!("similarity {} outside [0, 1]", r.similarity)));
        }
        if r.correspondences.is_empty() {
            r.similarity = 0.0;
        } else if r.similarity == 0.0 {
            r.similarity = f64::MIN_POSITIVE;
        }
        Ok(r)
    }
}

/// Segmenter wrapper: validates prompts before the call, and after it checks
/// dimensions and that every foreground point is covered.
pub struct CheckedSegmenter {
    inner: Arc<dyn Segmenter>,
    lock: Option<Mutex<()>>,
}

impl CheckedSegmenter {
    pub fn new(inner: Arc<dyn Segmenter>) -> Self {
        let lock = serial_lock(inner.concurrent());
        Self { inner, lock }
    }

    pub fn concurrent(&self) -> bool {
        self.lock.is_none()
    }

    pub fn segment(&self, image: &RgbImage, fg: &[PixelPoint], bg: &[PixelPoint]) -> Result<BinaryMask, OracleError> {
        validate_prompts(image, fg, bg)?;
        let m = with_lock!(self.lock, self.inner.segment(image, fg, bg))?;
        if m.dimensions() != image.dimensions() {
            return Err(OracleError::DimensionMismatch {
                image: image.dimensions(),
                mask: m.dimensions(),
            });
        }
        if let Some(p) = fg.iter().find(|p| !m.get(p.x, p.y)) {
            return Err(OracleError::PromptConflict { x: p.x, y: p.y });
        }
        Ok(m)
    }
}

pub(crate) fn validate_prompts(image: &RgbImage, fg: &[PixelPoint], bg: &[PixelPoint]) -> Result<(), OracleError> {
    let (w, h) = image.dimensions();
    if fg.is_empty() {
        return Err(OracleError::NoForeground);
    }
    if let Some(p) = fg.iter().chain(bg).find(|p| p.x >= w || p.y >= h) {
        return Err(OracleError::PromptOutOfBounds {
            x: p.x,
            y: p.y,
            width: w,
            height: h,
        });
    }
    if let Some(p) = fg.iter().find(|p| bg.contains(p)) {
        return Err(OracleError::PromptConflict { x: p.x, y: p.y });
    }
    Ok(())
}

/// Inpainter wrapper enforcing that pixels outside the mask are returned
/// bit-identical. Empty masks short-circuit without calling the oracle.
pub struct CheckedInpainter {
    inner: Arc<dyn Inpainter>,
    lock: Option<Mutex<()>>,
}

impl CheckedInpainter {
    pub fn new(inner: Arc<dyn Inpainter>) -> Self {
        let lock = serial_lock(inner.concurrent());
        Self { inner, lock }
    }

    pub fn concurrent(&self) -> bool {
        self.lock.is_none()
    }

    pub fn inpaint(&self, image: &RgbImage, mask: &BinaryMask) -> Result<RgbImage, OracleError> {
        if image.dimensions() != mask.dimensions() {
            return Err(OracleError::DimensionMismatch {
                image: image.dimensions(),
                mask: mask.dimensions(),
            });
        }
        if mask.is_empty() {
            return Ok(image.clone());
        }
        let out = with_lock!(self.lock, self.inner.inpaint(image, mask))?;
        if out.dimensions() != image.dimensions() {
            return Err(OracleError::ContractViolation(format!(
                "inpainted image is {:?}, expected {:?}",
                out.dimensions(),
                image.dimensions()
            )));
        }
        let changed = image
            .pixels()
            .zip(out.pixels())
            .zip(mask.bits())
            .position(|((a, b), m)| !*m && a != b);
        if let Some(i) = changed {
            let w = image.width() as usize;
            return Err(OracleError::ContractViolation(format!(
                "inpainter modified unmasked pixel ({}, {})",
                i % w,
                i / w
            )));
        }
        Ok(out)
    }
}

/// The three oracles a pipeline run consumes.
#[derive(Clone)]
pub struct Oracles {
    pub matcher: Arc<dyn Matcher>,
    pub segmenter: Arc<dyn Segmenter>,
    pub inpainter: Arc<dyn Inpainter>,
}

impl Oracles {
    /// Harris/NCC matching, region growing and diffusion inpainting.
    pub fn builtin() -> Self {
        Self {
            matcher: Arc::new(HarrisNccMatcher::default()),
            segmenter: Arc::new(RegionGrowSegmenter::default()),
            inpainter: Arc::new(DiffusionInpainter::default()),
        }
    }
}
