//! Image and mask quality measures against ground truth.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image_io::{load_mask, load_rgb, ImageIoError};
use crate::manifest::{read_json, write_json, ManifestError};
use crate::mask::iou;
use crate::pipeline::{PipelineReport, Provenance};
use crate::{BinaryMask, RgbImage};

/// Reported for identical images instead of infinity.
pub const PSNR_CAP_DB: f64 = 99.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("image dimensions differ: {a:?} vs {b:?}")]
    DimensionMismatch { a: (u32, u32), b: (u32, u32) },
    #[error("evaluation region is empty")]
    EmptyRegion,
    #[error("images must be at least 11 pixels on each side, got {0:?}")]
    TooSmall((u32, u32)),
    #[error("run has {run} views, ground truth has {gt}")]
    ViewCountMismatch { run: usize, gt: usize },
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Image(#[from] ImageIoError),
}

fn same_size(a: (u32, u32), b: (u32, u32)) -> Result<(), MetricsError> {
    if a == b {
        Ok(())
    } else {
        Err(MetricsError::DimensionMismatch { a, b })
    }
}

/// Peak signal-to-noise ratio over all three channels, restricted to
/// `region` when given.
pub fn psnr(a: &RgbImage, b: &RgbImage, region: Option<&BinaryMask>) -> Result<f64, MetricsError> {
    same_size(a.dimensions(), b.dimensions())?;
    let (mut sse, mut count) = (0.0f64, 0usize);
    let mut add = |i: usize| {
        for c in 0..3 {
            let d = f64::from(a.as_raw()[i * 3 + c]) - f64::from(b.as_raw()[i * 3 + c]);
            sse += d * d;
        }
        count += 3;
    };
    match region {
        Some(m) => {
            same_size(a.dimensions(), m.dimensions())?;
            m.bits().iter().enumerate().filter(|(_, &s)| s).for_each(|(i, _)| add(i));
        }
        None => (0..a.width() as usize * a.height() as usize).for_each(&mut add),
    }
    if count == 0 {
        return Err(MetricsError::EmptyRegion);
    }
    let mse = sse / count as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (255.0 * 255.0 / mse).log10()).min(PSNR_CAP_DB))
}

fn luma(img: &RgbImage) -> Vec<f64> {
    img.pixels()
        .map(|p| 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]))
        .collect()
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.map(|v| v / s)
}

/// Separable filtering keeping only windows fully inside the image.
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let (ow, oh) = (w + 1 - SSIM_WINDOW, h + 1 - SSIM_WINDOW);
    let mut rows = vec![0.0; ow * h];
    rows.par_chunks_mut(ow).enumerate().for_each(|(y, out)| {
        let line = &src[y * w..(y + 1) * w];
        for (x, o) in out.iter_mut().enumerate() {
            *o = k.iter().zip(&line[x..x + SSIM_WINDOW]).map(|(a, b)| a * b).sum();
        }
    });
    let mut out = vec![0.0; ow * oh];
    out.par_chunks_mut(ow).enumerate().for_each(|(y, row)| {
        for (x, o) in row.iter_mut().enumerate() {
            *o = (0..SSIM_WINDOW).map(|i| k[i] * rows[(y + i) * ow + x]).sum();
        }
    });
    out
}

/// Local SSIM values for every full 11x11 window, row-major over window
/// positions.
fn ssim_map(a: &RgbImage, b: &RgbImage) -> Result<(Vec<f64>, usize), MetricsError> {
    same_size(a.dimensions(), b.dimensions())?;
    let (w, h) = a.dimensions();
    if (w as usize) < SSIM_WINDOW || (h as usize) < SSIM_WINDOW {
        return Err(MetricsError::TooSmall((w, h)));
    }
    let (w, h) = (w as usize, h as usize);
    let (ya, yb) = (luma(a), luma(b));
    let k = gaussian_kernel();
    let prod = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| x * y).collect::<Vec<_>>();
    let mu_a = filter_valid(&ya, w, h, &k);
    let mu_b = filter_valid(&yb, w, h, &k);
    let aa = filter_valid(&prod(&ya, &ya), w, h, &k);
    let bb = filter_valid(&prod(&yb, &yb), w, h, &k);
    let ab = filter_valid(&prod(&ya, &yb), w, h, &k);
    let map = (0..mu_a.len())
        .into_par_iter()
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = aa[i] - ma * ma;
            let vb = bb[i] - mb * mb;
            let cov = ab[i] - ma * mb;
            ((2.0 * ma * mb + C1) * (2.0 * cov + C2)) / ((ma * ma + mb * mb + C1) * (va + vb + C2))
        })
        .collect();
    Ok((map, w + 1 - SSIM_WINDOW))
}

/// Mean structural similarity on luma.
pub fn ssim(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricsError> {
    let (map, _) = ssim_map(a, b)?;
    Ok(map.iter().sum::<f64>() / map.len() as f64)
}

/// Mean local SSIM over windows centered on a set pixel of `region`.
pub fn ssim_in_region(a: &RgbImage, b: &RgbImage, region: &BinaryMask) -> Result<f64, MetricsError> {
    same_size(a.dimensions(), region.dimensions())?;
    let (map, ow) = ssim_map(a, b)?;
    let half = (SSIM_WINDOW / 2) as u32;
    let (mut sum, mut n) = (0.0, 0usize);
    for (i, v) in map.iter().enumerate() {
        let (x, y) = ((i % ow) as u32 + half, (i / ow) as u32 + half);
        if region.get(x, y) {
            sum += v;
            n += 1;
        }
    }
    if n == 0 {
        return Err(MetricsError::EmptyRegion);
    }
    Ok(sum / n as f64)
}

/// Ground truth for one scene: per-view object masks and clean plates.
/// Missing entries are recorded per view rather than failing the load.
#[derive(Debug, Clone, Default)]
pub struct GroundTruth {
    pub masks: Vec<Option<Vec<BinaryMask>>>,
    pub clean: Vec<Option<RgbImage>>,
}

impl GroundTruth {
    /// Reads `clean/view_{j}.png` and `masks/view_{j}_obj_{k}.png` for
    /// `n_views` views and `n_objects` objects.
    pub fn load(gt_dir: &Path, n_views: usize, n_objects: usize) -> Self {
        let clean = (0..n_views)
            .map(|j| load_rgb(&gt_dir.join(format!("clean/view_{j}.png"))).ok())
            .collect();
        let masks = (0..n_views)
            .map(|j| {
                (1..=n_objects)
                    .map(|k| load_mask(&gt_dir.join(format!("masks/view_{j}_obj_{k}.png"))).ok())
                    .collect::<Option<Vec<_>>>()
            })
            .collect();
        Self { masks, clean }
    }

    pub fn n_views(&self) -> usize {
        self.clean.len()
    }
}

/// Outputs of one run, as needed for evaluation.
#[derive(Debug, Clone)]
pub struct RunView {
    pub provenance: Provenance,
    pub masks: Vec<BinaryMask>,
    pub inpainted: RgbImage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewEval {
    pub index: usize,
    pub provenance: Provenance,
    pub mask_iou: Vec<f64>,
    pub psnr_db: Option<f64>,
    /// PSNR over the ground-truth object union; `None` when no object is
    /// visible.
    pub psnr_masked_db: Option<f64>,
    pub ssim: Option<f64>,
    pub ssim_masked: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub min: f64,
    pub count: usize,
}

impl Aggregate {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let (mut sum, mut min, mut count) = (0.0, f64::INFINITY, 0usize);
        for v in values {
            sum += v;
            min = min.min(v);
            count += 1;
        }
        (count > 0).then(|| Self {
            mean: sum / count as f64,
            min,
            count,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregates {
    pub mask_iou: Option<Aggregate>,
    pub psnr_db: Option<Aggregate>,
    pub psnr_masked_db: Option<Aggregate>,
    pub ssim: Option<Aggregate>,
    pub ssim_masked: Option<Aggregate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub views: Vec<ViewEval>,
    pub aggregates: Aggregates,
    /// Run configuration, copied from the run report when available.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl EvalReport {
    pub fn recompute_aggregates(views: &[ViewEval]) -> Aggregates {
        Aggregates {
            mask_iou: Aggregate::of(views.iter().flat_map(|v| v.mask_iou.iter().copied())),
            psnr_db: Aggregate::of(views.iter().filter_map(|v| v.psnr_db)),
            psnr_masked_db: Aggregate::of(views.iter().filter_map(|v| v.psnr_masked_db)),
            ssim: Aggregate::of(views.iter().filter_map(|v| v.ssim)),
            ssim_masked: Aggregate::of(views.iter().filter_map(|v| v.ssim_masked)),
        }
    }

    /// One row per view: index, provenance, one IoU column per object,
    /// PSNR and SSIM.
    pub fn to_csv(&self) -> String {
        let k = self.views.iter().map(|v| v.mask_iou.len()).max().unwrap_or(0);
        let mut out = String::from("index,provenance");
        for obj in 1..=k {
            out.push_str(&format!(",iou_{obj}"));
        }
        out.push_str(",psnr_db,psnr_masked_db,ssim,ssim_masked\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for v in &self.views {
            out.push_str(&format!("{},{}", v.index, v.provenance.as_str()));
            for obj in 0..k {
                out.push(',');
                out.push_str(&opt(v.mask_iou.get(obj).copied()));
            }
            out.push_str(&format!(
                ",{},{},{},{}\n",
                opt(v.psnr_db),
                opt(v.psnr_masked_db),
                opt(v.ssim),
                opt(v.ssim_masked)
            ));
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf), MetricsError> {
        let json = dir.join("report.json");
        let csv = dir.join("report.csv");
        write_json(&json, self)?;
        std::fs::write(&csv, self.to_csv()).map_err(|source| ManifestError::Io {
            path: csv.clone(),
            source,
        })?;
        Ok((json, csv))
    }
}

fn eval_view(index: usize, run: &RunView, gt_masks: Option<&Vec<BinaryMask>>, clean: Option<&RgbImage>) -> ViewEval {
    let mut errors = Vec::new();
    let mut mask_iou = Vec::new();
    let mut region = None;
    match gt_masks {
        Some(gt) if gt.len() == run.masks.len() => {
            for (k, (m, g)) in run.masks.iter().zip(gt).enumerate() {
                // Two empty masks agree perfectly.
                match iou(m, g) {
                    Ok(_) if m.is_empty() && g.is_empty() => mask_iou.push(1.0),
                    Ok(v) => mask_iou.push(v),
                    Err(e) => errors.push(format!("object {}: {e}", k + 1)),
                }
            }
            let (w, h) = run.inpainted.dimensions();
            region = BinaryMask::union_all(w, h, gt).ok().filter(|u| !u.is_empty());
        }
        Some(gt) => errors.push(format!("{} ground-truth masks for {} objects", gt.len(), run.masks.len())),
        None => errors.push(format!("missing ground-truth masks for view {index}")),
    }
    let (mut psnr_db, mut psnr_masked_db, mut ssim_v, mut ssim_masked) = (None, None, None, None);
    match clean {
        Some(c) => {
            let mut record = |r: Result<f64, MetricsError>, slot: &mut Option<f64>| match r {
                Ok(v) => *slot = Some(v),
                Err(e) => errors.push(e.to_string()),
            };
            record(psnr(&run.inpainted, c, None), &mut psnr_db);
            record(ssim(&run.inpainted, c), &mut ssim_v);
            if let Some(r) = &region {
                record(psnr(&run.inpainted, c, Some(r)), &mut psnr_masked_db);
                record(ssim_in_region(&run.inpainted, c, r), &mut ssim_masked);
            }
        }
        None => errors.push(format!("missing clean plate for view {index}")),
    }
    ViewEval {
        index,
        provenance: run.provenance,
        mask_iou,
        psnr_db,
        psnr_masked_db,
        ssim: ssim_v,
        ssim_masked,
        errors,
    }
}

/// Scores every view of a run; missing ground truth is recorded per view.
pub fn evaluate(run: &[RunView], gt: &GroundTruth) -> Result<EvalReport, MetricsError> {
    if run.len() != gt.n_views() {
        return Err(MetricsError::ViewCountMismatch {
            run: run.len(),
            gt: gt.n_views(),
        });
    }
    let views: Vec<ViewEval> = run
        .par_iter()
        .enumerate()
        .map(|(j, r)| eval_view(j, r, gt.masks.get(j).and_then(Option::as_ref), gt.clean[j].as_ref()))
        .collect();
    Ok(EvalReport {
        aggregates: EvalReport::recompute_aggregates(&views),
        views,
        config: None,
    })
}

/// Loads a run directory written by the pipeline and scores it against a
/// scene's `gt/` directory.
pub fn evaluate_run(run_dir: &Path, gt_dir: &Path) -> Result<EvalReport, MetricsError> {
    let report: PipelineReport = read_json(&run_dir.join("report.json"))?;
    let run = report
        .views
        .iter()
        .map(|v| {
            let masks = (1..=report.n_objects)
                .map(|k| load_mask(&run_dir.join(format!("masks/view_{}_obj_{k}.png", v.index))))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(RunView {
                provenance: v.provenance,
                masks,
                inpainted: load_rgb(&run_dir.join(format!("inpainted/view_{}.png", v.index)))?,
            })
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;
    let gt = GroundTruth::load(gt_dir, run.len(), report.n_objects);
    let mut out = evaluate(&run, &gt)?;
    out.config = Some(report.config.clone());
    Ok(out)
}
