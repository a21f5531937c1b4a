use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimate::{chain_degraded, chains, index_pairs, PairEstimate};
use super::{PipelineConfig, PipelineError, Provenance};
use crate::geometry::{warp_image, warp_mask};
use crate::manifest::ViewSet;
use crate::oracles::{CheckedInpainter, CheckedSegmenter};
use crate::prompts::{inpaint_merged, inpaint_sequential, InpaintMode, InteractionResult, PromptError};
use crate::refine::refine_mask;
use crate::{BinaryMask, RgbImage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectReport {
    pub object_id: usize,
    pub coarse_area: usize,
    pub area: usize,
    /// Refinement loss of the kept mask; `None` when refinement did not run.
    pub loss: Option<f64>,
    pub best_candidate_loss: Option<f64>,
    pub radius: Option<f64>,
    pub candidates_evaluated: usize,
    pub degraded: bool,
}

/// Masks of one view after propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewMasks {
    pub coarse: Vec<BinaryMask>,
    pub refined: Vec<BinaryMask>,
    pub objects: Vec<ObjectReport>,
    /// An unreliable pair upstream or a refinement that fell back to the
    /// coarse mask.
    pub degraded: bool,
    pub warnings: Vec<String>,
}

fn source_masks(interaction: &InteractionResult) -> ViewMasks {
    ViewMasks {
        coarse: interaction.masks.clone(),
        refined: interaction.masks.clone(),
        objects: interaction
            .masks
            .iter()
            .enumerate()
            .map(|(k, m)| ObjectReport {
                object_id: k + 1,
                coarse_area: m.area(),
                area: m.area(),
                loss: None,
                best_candidate_loss: None,
                radius: None,
                candidates_evaluated: 0,
                degraded: false,
            })
            .collect(),
        degraded: false,
        warnings: Vec::new(),
    }
}

fn refine_view(
    image: &RgbImage,
    prev: &[BinaryMask],
    pair: &PairEstimate,
    upstream_degraded: bool,
    seg: &CheckedSegmenter,
    cfg: &PipelineConfig,
) -> Result<ViewMasks, PipelineError> {
    let hop = pair.hop();
    let size = image.dimensions();
    let per_object: Vec<(BinaryMask, BinaryMask, ObjectReport, Option<String>)> = prev
        .par_iter()
        .enumerate()
        .map(|(k, m)| -> Result<_, PipelineError> {
            let coarse = warp_mask(m, &hop, size)?;
            let mut report = ObjectReport {
                object_id: k + 1,
                coarse_area: coarse.area(),
                area: coarse.area(),
                loss: None,
                best_candidate_loss: None,
                radius: None,
                candidates_evaluated: 0,
                degraded: false,
            };
            if !cfg.refine {
                return Ok((coarse.clone(), coarse, report, None));
            }
            match refine_mask(image, &coarse, &[], seg, &cfg.anchor) {
                Ok(out) => {
                    report.area = out.refined_mask.area();
                    report.loss = Some(out.loss);
                    report.best_candidate_loss = Some(out.best_candidate_loss);
                    report.radius = Some(out.radius);
                    report.candidates_evaluated = out.candidates_evaluated;
                    report.degraded = out.degraded;
                    let warn = out.degraded.then(|| {
                        format!(
                            "object {}: best refinement loss {:.4} above {:.4}, kept coarse mask",
                            k + 1,
                            out.best_candidate_loss,
                            cfg.anchor.reject_loss
                        )
                    });
                    Ok((coarse, out.refined_mask, report, warn))
                }
                Err(e) => {
                    report.degraded = true;
                    let warn = format!("object {}: refinement failed ({e}), kept coarse mask", k + 1);
                    Ok((coarse.clone(), coarse, report, Some(warn)))
                }
            }
        })
        .collect::<Result<_, _>>()?;

    let mut out = ViewMasks {
        coarse: Vec::with_capacity(prev.len()),
        refined: Vec::with_capacity(prev.len()),
        objects: Vec::with_capacity(prev.len()),
        degraded: upstream_degraded,
        warnings: Vec::new(),
    };
    if upstream_degraded {
        out.warnings
            .push("unreliable pair between this view and the source".into());
    }
    for (coarse, refined, report, warn) in per_object {
        out.degraded |= report.degraded;
        out.coarse.push(coarse);
        out.refined.push(refined);
        out.objects.push(report);
        out.warnings.extend(warn);
    }
    Ok(out)
}

/// Carries the source masks outward along both chains. Each hop warps the
/// previous view's refined masks and refines them against the new view.
pub fn propagate_masks(
    vs: &ViewSet,
    interaction: &InteractionResult,
    pairs: &[PairEstimate],
    seg: &CheckedSegmenter,
    cfg: &PipelineConfig,
) -> Result<Vec<ViewMasks>, PipelineError> {
    propagate_masks_with(vs, interaction, pairs, seg, cfg, &|| {})
}

pub(crate) fn propagate_masks_with(
    vs: &ViewSet,
    interaction: &InteractionResult,
    pairs: &[PairEstimate],
    seg: &CheckedSegmenter,
    cfg: &PipelineConfig,
    on_view: &(dyn Fn() + Sync),
) -> Result<Vec<ViewMasks>, PipelineError> {
    let (n, s) = (vs.len(), vs.source_index());
    if interaction.masks.is_empty() {
        return Err(PipelineError::NoObjects);
    }
    let by = index_pairs(pairs);
    let upstream = chain_degraded(pairs, n, s);
    let walk = |chain: &Vec<usize>| -> Result<Vec<(usize, ViewMasks)>, PipelineError> {
        let mut out: Vec<(usize, ViewMasks)> = Vec::with_capacity(chain.len());
        let mut prev = interaction.masks.clone();
        for w in chain.windows(2) {
            let pair = by
                .get(&(w[0], w[1]))
                .ok_or(PipelineError::MissingPair { from: w[0], to: w[1] })?;
            let view = refine_view(vs.view(w[1]), &prev, pair, upstream[w[1]], seg, cfg)?;
            prev = view.refined.clone();
            out.push((w[1], view));
            on_view();
        }
        Ok(out)
    };
    let [forward, backward] = chains(n, s);
    let (f, b) = rayon::join(|| walk(&forward), || walk(&backward));
    let mut slots: Vec<Option<ViewMasks>> = vec![None; n];
    slots[s] = Some(source_masks(interaction));
    for (j, v) in f?.into_iter().chain(b?) {
        slots[j] = Some(v);
    }
    on_view();
    Ok(slots.into_iter().map(|v| v.expect("chains cover every view")).collect())
}

/// How a view's output image was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewInpaint {
    pub image: RgbImage,
    pub provenance: Provenance,
    pub chain_distance: usize,
    pub inpaint_calls: usize,
    /// Share of the mask union the warp could not fill; `None` on views that
    /// were not filled by warping.
    pub empty_fraction: Option<f64>,
    /// Whole mask region re-inpainted directly on a non-key view.
    pub direct_fill: bool,
    pub warnings: Vec<String>,
}

fn inpaint_objects(
    image: &RgbImage,
    masks: &[BinaryMask],
    mode: InpaintMode,
    inp: &CheckedInpainter,
) -> Result<(RgbImage, usize), PromptError> {
    let nonempty: Vec<BinaryMask> = masks.iter().filter(|m| !m.is_empty()).cloned().collect();
    match mode {
        InpaintMode::Sequential => Ok((inpaint_sequential(image, &nonempty, inp)?, nonempty.len())),
        InpaintMode::Merged => Ok((inpaint_merged(image, &nonempty, inp)?, usize::from(!nonempty.is_empty()))),
    }
}

pub(crate) fn is_key_view(distance: usize, interval: Option<usize>) -> bool {
    interval.is_some_and(|n| distance > 0 && distance.is_multiple_of(n))
}

struct Hop<'a> {
    index: usize,
    distance: usize,
    masks: &'a ViewMasks,
}

fn inpaint_hop(
    vs: &ViewSet,
    hop: &Hop<'_>,
    prev: &RgbImage,
    pair: &PairEstimate,
    mode: InpaintMode,
    inp: &CheckedInpainter,
    cfg: &PipelineConfig,
) -> ViewInpaint {
    let view = vs.view(hop.index);
    let (w, h) = view.dimensions();
    let key = is_key_view(hop.distance, cfg.key_view_interval);
    let mut out = ViewInpaint {
        image: view.clone(),
        provenance: if key { Provenance::KeyView } else { Provenance::Warped },
        chain_distance: hop.distance,
        inpaint_calls: 0,
        empty_fraction: None,
        direct_fill: false,
        warnings: Vec::new(),
    };
    if hop.masks.degraded {
        out.provenance = Provenance::Degraded;
    }
    let union = BinaryMask::union_all(w, h, &hop.masks.refined).expect("masks match the view");

    let direct = |out: &mut ViewInpaint| match inpaint_objects(view, &hop.masks.refined, mode, inp) {
        Ok((img, calls)) => {
            out.image = img;
            out.inpaint_calls += calls;
        }
        Err(e) => {
            out.warnings.push(format!("direct inpainting failed ({e}), kept original view"));
            out.image = view.clone();
            out.provenance = Provenance::Degraded;
        }
    };

    if union.is_empty() {
        return out;
    }
    if key || hop.masks.degraded {
        direct(&mut out);
        return out;
    }

    let (warped, valid) = match warp_image(prev, &pair.hop(), (w, h)) {
        Ok(r) => r,
        Err(e) => {
            out.warnings.push(format!("warp failed ({e}), inpainting directly"));
            out.direct_fill = true;
            direct(&mut out);
            return out;
        }
    };
    let mut fill = view.clone();
    let mut empty = BinaryMask::new(w, h);
    for (i, (&m, &v)) in union.bits().iter().zip(valid.bits()).enumerate() {
        if !m {
            continue;
        }
        let (x, y) = ((i % w as usize) as u32, (i / w as usize) as u32);
        if v {
            fill.put_pixel(x, y, *warped.get_pixel(x, y));
        } else {
            empty.set(x, y, true);
        }
    }
    let fraction = empty.area() as f64 / union.area() as f64;
    out.empty_fraction = Some(fraction);
    if fraction > cfg.empty_fill_threshold {
        out.direct_fill = true;
        direct(&mut out);
        return out;
    }
    out.image = fill;
    if !empty.is_empty() {
        match inp.inpaint(&out.image, &empty) {
            Ok(img) => {
                out.image = img;
                out.inpaint_calls += 1;
            }
            Err(e) => {
                out.warnings.push(format!("filling unwarped pixels failed ({e}), inpainting directly"));
                out.direct_fill = true;
                direct(&mut out);
            }
        }
    }
    out
}

/// Fills each view's masked region outward from the source: warped content
/// from the previous view where the warp reaches, the inpainter for the
/// rest, and direct inpainting on key views.
pub fn propagate_inpaint(
    vs: &ViewSet,
    interaction: &InteractionResult,
    masks: &[ViewMasks],
    pairs: &[PairEstimate],
    inp: &CheckedInpainter,
    cfg: &PipelineConfig,
) -> Result<Vec<ViewInpaint>, PipelineError> {
    propagate_inpaint_with(vs, interaction, masks, pairs, inp, cfg, &|| {})
}

pub(crate) fn propagate_inpaint_with(
    vs: &ViewSet,
    interaction: &InteractionResult,
    masks: &[ViewMasks],
    pairs: &[PairEstimate],
    inp: &CheckedInpainter,
    cfg: &PipelineConfig,
    on_view: &(dyn Fn() + Sync),
) -> Result<Vec<ViewInpaint>, PipelineError> {
    let (n, s) = (vs.len(), vs.source_index());
    if masks.len() != n {
        return Err(PipelineError::Invalid(format!("{} mask sets for {n} views", masks.len())));
    }
    let by = index_pairs(pairs);
    let walk = |chain: &Vec<usize>| -> Result<Vec<(usize, ViewInpaint)>, PipelineError> {
        let mut out: Vec<(usize, ViewInpaint)> = Vec::with_capacity(chain.len());
        let mut prev = interaction.inpainted_source.clone();
        for (d, w) in chain.windows(2).enumerate() {
            let pair = by
                .get(&(w[0], w[1]))
                .ok_or(PipelineError::MissingPair { from: w[0], to: w[1] })?;
            let hop = Hop {
                index: w[1],
                distance: d + 1,
                masks: &masks[w[1]],
            };
            let v = inpaint_hop(vs, &hop, &prev, pair, interaction.mode, inp, cfg);
            prev = v.image.clone();
            out.push((w[1], v));
            on_view();
        }
        Ok(out)
    };
    let [forward, backward] = chains(n, s);
    let (f, b) = rayon::join(|| walk(&forward), || walk(&backward));
    let mut slots: Vec<Option<ViewInpaint>> = vec![None; n];
    slots[s] = Some(ViewInpaint {
        image: interaction.inpainted_source.clone(),
        provenance: Provenance::Source,
        chain_distance: 0,
        inpaint_calls: 0,
        empty_fraction: None,
        direct_fill: false,
        warnings: Vec::new(),
    });
    for (j, v) in f?.into_iter().chain(b?) {
        slots[j] = Some(v);
    }
    on_view();
    Ok(slots.into_iter().map(|v| v.expect("chains cover every view")).collect())
}
