//! User prompts on the source view: per-object masks and the inpainted
//! source image.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracles::{CheckedInpainter, CheckedSegmenter, OracleError};
use crate::{BinaryMask, PixelPoint, RgbImage};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PromptError {
    #[error("no foreground points")]
    NoForeground,
    #[error("point ({x}, {y}) outside {width}x{height} view")]
    OutOfBounds { x: u32, y: u32, width: u32, height: u32 },
    #[error("object ids must be 1..K without gaps, got {0:?}")]
    NonContiguousIds(Vec<u32>),
    #[error("view index {index} out of range for {views} views")]
    ViewOutOfRange { index: usize, views: usize },
    #[error("segmenting object {object_id}: {source}")]
    Segmenter {
        object_id: u32,
        #[source]
        source: OracleError,
    },
    #[error("inpainting step {step}: {source}")]
    Inpainter {
        step: usize,
        #[source]
        source: OracleError,
    },
    #[error("mask {index} is {mask:?}, image is {image:?}")]
    DimensionMismatch { index: usize, mask: (u32, u32), image: (u32, u32) },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForegroundPoint {
    pub x: u32,
    pub y: u32,
    pub object_id: u32,
}

/// Reserved for region prompts; carried through but not consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRegion {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSet {
    #[serde(default)]
    pub view_index: usize,
    pub foreground: Vec<ForegroundPoint>,
    #[serde(default)]
    pub background: Vec<PixelPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<PromptRegion>,
}

impl PromptSet {
    /// Checks bounds and object numbering; returns the object count K.
    pub fn validate(&self, width: u32, height: u32) -> Result<usize, PromptError> {
        if self.foreground.is_empty() {
            return Err(PromptError::NoForeground);
        }
        let pts = self
            .foreground
            .iter()
            .map(|p| (p.x, p.y))
            .chain(self.background.iter().map(|p| (p.x, p.y)));
        for (x, y) in pts {
            if x >= width || y >= height {
                return Err(PromptError::OutOfBounds { x, y, width, height });
            }
        }
        let mut ids: Vec<u32> = self.foreground.iter().map(|p| p.object_id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.iter().enumerate().any(|(i, &id)| id as usize != i + 1) {
            return Err(PromptError::NonContiguousIds(ids));
        }
        Ok(ids.len())
    }

    pub fn object_count(&self) -> usize {
        self.foreground.iter().map(|p| p.object_id as usize).max().unwrap_or(0)
    }

    pub fn points_for(&self, object_id: u32) -> Vec<PixelPoint> {
        self.foreground
            .iter()
            .filter(|p| p.object_id == object_id)
            .map(|p| PixelPoint::new(p.x, p.y))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InpaintMode {
    Sequential,
    Merged,
}

/// Inpainting mode as configured; `Auto` picks per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InpaintModeChoice {
    #[default]
    Auto,
    Sequential,
    Merged,
}

impl InpaintModeChoice {
    /// `Auto` merges when there are four or more objects or any two masks
    /// overlap.
    pub fn resolve(self, masks: &[BinaryMask]) -> InpaintMode {
        match self {
            InpaintModeChoice::Sequential => InpaintMode::Sequential,
            InpaintModeChoice::Merged => InpaintMode::Merged,
            InpaintModeChoice::Auto => {
                let overlap = masks
                    .iter()
                    .enumerate()
                    .any(|(i, a)| masks[i + 1..].iter().any(|b| a.overlaps(b).unwrap_or(false)));
                if masks.len() >= 4 || overlap {
                    InpaintMode::Merged
                } else {
                    InpaintMode::Sequential
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionResult {
    /// One mask per object, in object id order.
    pub masks: Vec<BinaryMask>,
    pub inpainted_source: RgbImage,
    pub mode: InpaintMode,
}

/// One segmenter call per object with that object's foreground points and
/// the shared background points.
pub fn segment_objects(image: &RgbImage, prompts: &PromptSet, seg: &CheckedSegmenter) -> Result<Vec<BinaryMask>, PromptError> {
    let k = prompts.validate(image.width(), image.height())?;
    let run = |id: u32| {
        seg.segment(image, &prompts.points_for(id), &prompts.background)
            .map_err(|source| PromptError::Segmenter { object_id: id, source })
    };
    if seg.concurrent() {
        (1..=k as u32).into_par_iter().map(run).collect()
    } else {
        (1..=k as u32).map(run).collect()
    }
}

fn check_dims(image: &RgbImage, masks: &[BinaryMask]) -> Result<(), PromptError> {
    for (index, m) in masks.iter().enumerate() {
        if m.dimensions() != image.dimensions() {
            return Err(PromptError::DimensionMismatch {
                index,
                mask: m.dimensions(),
                image: image.dimensions(),
            });
        }
    }
    Ok(())
}

/// Inpaints the masks one after another, each step working on the previous
/// step's output. Steps are numbered from 1.
pub fn inpaint_sequential(image: &RgbImage, masks: &[BinaryMask], inp: &CheckedInpainter) -> Result<RgbImage, PromptError> {
    check_dims(image, masks)?;
    let mut cur = image.clone();
    for (i, m) in masks.iter().enumerate() {
        cur = inp
            .inpaint(&cur, m)
            .map_err(|source| PromptError::Inpainter { step: i + 1, source })?;
    }
    Ok(cur)
}

/// Inpaints the union of all masks in one call.
pub fn inpaint_merged(image: &RgbImage, masks: &[BinaryMask], inp: &CheckedInpainter) -> Result<RgbImage, PromptError> {
    check_dims(image, masks)?;
    let union = BinaryMask::union_all(image.width(), image.height(), masks).expect("dimensions checked");
    inp.inpaint(image, &union)
        .map_err(|source| PromptError::Inpainter { step: 1, source })
}

/// Segments every prompted object and removes all of them from the image.
pub fn interact(
    image: &RgbImage,
    prompts: &PromptSet,
    seg: &CheckedSegmenter,
    inp: &CheckedInpainter,
    mode: InpaintModeChoice,
) -> Result<InteractionResult, PromptError> {
    let masks = segment_objects(image, prompts, seg)?;
    let mode = mode.resolve(&masks);
    let inpainted_source = match mode {
        InpaintMode::Sequential => inpaint_sequential(image, &masks, inp)?,
        InpaintMode::Merged => inpaint_merged(image, &masks, inp)?,
    };
    Ok(InteractionResult {
        masks,
        inpainted_source,
        mode,
    })
}
