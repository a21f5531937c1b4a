//! End-to-end propagation: prompts on the source view, adjacent-pair
//! homographies, mask warping and refinement, and warp-based inpainting with
//! key-view resets.

mod estimate;
mod propagate;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, RansacConfig};
use crate::image_io::{save_mask, save_rgb, ImageIoError};
use crate::manifest::{write_json, ManifestError, ManifestView, SceneManifest, ViewSet};
use crate::metrics::RunView;
use crate::oracles::{CheckedInpainter, CheckedMatcher, CheckedSegmenter, Oracles};
use crate::prompts::{interact, InpaintMode, InpaintModeChoice, InteractionResult, PromptError, PromptSet};
use crate::refine::{AnchorConfig, RefineError};
use crate::{BinaryMask, RgbImage};

pub use estimate::{composite_homographies, estimate_all, plan_pairs, PairEstimate};
pub use propagate::{propagate_inpaint, propagate_masks, ObjectReport, ViewInpaint, ViewMasks};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid pipeline configuration: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Prompts(#[from] PromptError),
    #[error("source view {view} has no reliable neighbor: {reasons}")]
    SourceIsolated { view: usize, reasons: String },
    #[error("no estimate for pair ({from}, {to})")]
    MissingPair { from: usize, to: usize },
    #[error("no objects to propagate")]
    NoObjects,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Views(#[from] ManifestError),
    #[error(transparent)]
    Image(#[from] ImageIoError),
}

impl From<RefineError> for PipelineError {
    fn from(e: RefineError) -> Self {
        PipelineError::InvalidConfig(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Key views every `n` hops from the source; `None` disables key views.
    pub key_view_interval: Option<usize>,
    pub ransac: RansacConfig,
    pub anchor: AnchorConfig,
    /// Set to `false` to keep warped masks unrefined.
    pub refine: bool,
    pub inpaint_mode: InpaintModeChoice,
    pub min_pair_similarity: f64,
    pub empty_fill_threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            key_view_interval: Some(10),
            ransac: RansacConfig::default(),
            anchor: AnchorConfig::default(),
            refine: true,
            inpaint_mode: InpaintModeChoice::Auto,
            min_pair_similarity: 0.05,
            empty_fill_threshold: 0.6,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.key_view_interval == Some(0) {
            return Err(PipelineError::InvalidConfig("key_view_interval must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_pair_similarity) {
            return Err(PipelineError::InvalidConfig("min_pair_similarity must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.empty_fill_threshold) {
            return Err(PipelineError::InvalidConfig("empty_fill_threshold must lie in [0, 1]".into()));
        }
        self.ransac
            .validate()
            .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        self.anchor.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Source,
    Warped,
    KeyView,
    Degraded,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Source => "source",
            Provenance::Warped => "warped",
            Provenance::KeyView => "key_view",
            Provenance::Degraded => "degraded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Interaction,
    Matching,
    Masks,
    Inpainting,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub stage: Stage,
    pub views_done: usize,
    pub views_total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewReport {
    pub index: usize,
    pub provenance: Provenance,
    pub chain_distance: usize,
    pub objects: Vec<ObjectReport>,
    pub inpaint_calls: usize,
    pub empty_fraction: Option<f64>,
    pub direct_fill: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Everything about a run except wall-clock timings, so that reruns with the
/// same inputs produce identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub n_views: usize,
    pub source_index: usize,
    pub n_objects: usize,
    pub width: u32,
    pub height: u32,
    pub inpaint_mode: InpaintMode,
    pub views: Vec<ViewReport>,
    pub pairs: Vec<PairEstimate>,
    pub degraded_views: Vec<usize>,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub interaction_ms: f64,
    pub matching_ms: f64,
    pub masks_ms: f64,
    pub inpainting_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewOutput {
    pub provenance: Provenance,
    /// Warped masks before refinement; equal to `masks` on the source view.
    pub coarse_masks: Vec<BinaryMask>,
    pub masks: Vec<BinaryMask>,
    pub inpainted: RgbImage,
}

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub views: Vec<ViewOutput>,
    pub pairs: Vec<PairEstimate>,
    pub report: PipelineReport,
    pub timings: Timings,
}

impl PropagationResult {
    pub fn is_degraded(&self) -> bool {
        !self.report.degraded_views.is_empty()
    }

    pub fn run_views(&self) -> Vec<RunView> {
        self.views
            .iter()
            .map(|v| RunView {
                provenance: v.provenance,
                masks: v.masks.clone(),
                inpainted: v.inpainted.clone(),
            })
            .collect()
    }

    /// Writes `masks/view_{j}_obj_{k}.png`, `inpainted/view_{j}.png`,
    /// `report.json`, `timings.json` and `export/manifest.json`, which lists
    /// the inpainted views with their poses.
    pub fn write(&self, vs: &ViewSet, out_dir: &Path) -> Result<PathBuf, PipelineError> {
        use rayon::prelude::*;
        self.views
            .par_iter()
            .enumerate()
            .try_for_each(|(j, v)| -> Result<(), ImageIoError> {
                save_rgb(&v.inpainted, &out_dir.join(format!("inpainted/view_{j}.png")))?;
                for (k, m) in v.masks.iter().enumerate() {
                    save_mask(m, &out_dir.join(format!("masks/view_{j}_obj_{}.png", k + 1)))?;
                }
                Ok(())
            })?;
        write_json(&out_dir.join("report.json"), &self.report)?;
        write_json(&out_dir.join("timings.json"), &self.timings)?;
        let export = SceneManifest {
            views: (0..self.views.len())
                .map(|j| ManifestView {
                    image_path: PathBuf::from(format!("../inpainted/view_{j}.png")),
                    pose: vs.poses()[j].clone(),
                })
                .collect(),
            source_index: self.report.source_index,
        };
        let path = out_dir.join("export/manifest.json");
        export.save(&path)?;
        Ok(path)
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs the whole pipeline. The source view is the one the prompts were
/// placed on.
pub fn run(vs: &ViewSet, prompts: &PromptSet, oracles: &Oracles, cfg: &PipelineConfig) -> Result<PropagationResult, PipelineError> {
    run_with_progress(vs, prompts, oracles, cfg, &|_| {})
}

/// As [`run`], reporting progress after each stage and each processed view.
pub fn run_with_progress(
    vs: &ViewSet,
    prompts: &PromptSet,
    oracles: &Oracles,
    cfg: &PipelineConfig,
    progress: &(dyn Fn(Progress) + Sync),
) -> Result<PropagationResult, PipelineError> {
    let start = Instant::now();
    cfg.validate()?;
    let n = vs.len();
    if prompts.view_index >= n {
        return Err(PromptError::ViewOutOfRange {
            index: prompts.view_index,
            views: n,
        }
        .into());
    }
    let vs = vs.clone().with_source(prompts.view_index)?;
    let report = |stage, views_done| {
        progress(Progress {
            stage,
            views_done,
            views_total: n,
        })
    };
    let matcher = CheckedMatcher::new(oracles.matcher.clone());
    let seg = CheckedSegmenter::new(oracles.segmenter.clone());
    let inp = CheckedInpainter::new(oracles.inpainter.clone());

    report(Stage::Interaction, 0);
    let t = Instant::now();
    let interaction = interact(vs.view(vs.source_index()), prompts, &seg, &inp, cfg.inpaint_mode)?;
    let interaction_ms = ms(t);

    report(Stage::Matching, 0);
    let t = Instant::now();
    let pairs = estimate_all(&vs, &matcher, cfg)?;
    let matching_ms = ms(t);

    let t = Instant::now();
    let done = AtomicUsize::new(0);
    report(Stage::Masks, 0);
    let masks = propagate::propagate_masks_with(&vs, &interaction, &pairs, &seg, cfg, &|| {
        report(Stage::Masks, done.fetch_add(1, Ordering::SeqCst) + 1)
    })?;
    let masks_ms = ms(t);

    let t = Instant::now();
    let done = AtomicUsize::new(0);
    report(Stage::Inpainting, 0);
    let images = propagate::propagate_inpaint_with(&vs, &interaction, &masks, &pairs, &inp, cfg, &|| {
        report(Stage::Inpainting, done.fetch_add(1, Ordering::SeqCst) + 1)
    })?;
    let inpainting_ms = ms(t);

    let result = assemble(&vs, &interaction, masks, images, pairs, cfg);
    report(Stage::Done, n);
    Ok(PropagationResult {
        timings: Timings {
            interaction_ms,
            matching_ms,
            masks_ms,
            inpainting_ms,
            total_ms: ms(start),
        },
        ..result
    })
}

fn assemble(
    vs: &ViewSet,
    interaction: &InteractionResult,
    masks: Vec<ViewMasks>,
    images: Vec<ViewInpaint>,
    pairs: Vec<PairEstimate>,
    cfg: &PipelineConfig,
) -> PropagationResult {
    let (width, height) = vs.dimensions();
    let mut views = Vec::with_capacity(vs.len());
    let mut view_reports = Vec::with_capacity(vs.len());
    for (j, (m, img)) in masks.into_iter().zip(images).enumerate() {
        let mut warnings = m.warnings;
        warnings.extend(img.warnings);
        view_reports.push(ViewReport {
            index: j,
            provenance: img.provenance,
            chain_distance: img.chain_distance,
            objects: m.objects,
            inpaint_calls: img.inpaint_calls,
            empty_fraction: img.empty_fraction,
            direct_fill: img.direct_fill,
            warnings,
        });
        views.push(ViewOutput {
            provenance: img.provenance,
            coarse_masks: m.coarse,
            masks: m.refined,
            inpainted: img.image,
        });
    }
    let degraded_views = view_reports
        .iter()
        .filter(|v| v.provenance == Provenance::Degraded)
        .map(|v| v.index)
        .collect();
    let report = PipelineReport {
        n_views: vs.len(),
        source_index: vs.source_index(),
        n_objects: interaction.masks.len(),
        width,
        height,
        inpaint_mode: interaction.mode,
        views: view_reports,
        pairs: pairs.clone(),
        degraded_views,
        config: serde_json::to_value(cfg).expect("config serializes"),
    };
    PropagationResult {
        views,
        pairs,
        report,
        timings: Timings::default(),
    }
}
