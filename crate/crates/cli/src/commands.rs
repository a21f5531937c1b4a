use std::path::{Path, PathBuf};

use log::{info, warn};
use objremove_core::manifest::SceneManifest;
use objremove_core::metrics::{evaluate_run, Aggregate, EvalReport};
use objremove_core::pipeline::{self, Progress};
use objremove_core::prompts::PromptSet;
use objremove_core::scenegen::{self, SceneSpec, SyntheticScene};
use serde_json::json;

use crate::{exit, load_config, read_json, CliError, OracleCommands};

/// Parameters of the standard scene used when no spec file is given.
#[derive(Debug, Clone, Copy)]
pub struct StandardScene {
    pub n_views: usize,
    pub width: u32,
    pub height: u32,
    pub n_objects: usize,
}

impl Default for StandardScene {
    fn default() -> Self {
        Self {
            n_views: 20,
            width: 512,
            height: 512,
            n_objects: 3,
        }
    }
}

/// Renders a scene directory and returns its manifest path.
pub fn generate_scene(spec_path: Option<&Path>, standard: StandardScene, seed: Option<u64>, out: &Path) -> Result<PathBuf, CliError> {
    let mut spec: SceneSpec = match spec_path {
        Some(p) => read_json(p)?,
        None => SceneSpec::standard(
            seed.unwrap_or(0),
            standard.n_views,
            standard.width,
            standard.height,
            standard.n_objects,
        ),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    let scene = SyntheticScene::new(spec).map_err(|e| CliError::Invalid(format!("invalid scene spec: {e}")))?;
    let manifest = scenegen::generate(&scene, out).map_err(|e| CliError::Abort(e.to_string()))?;
    info!("wrote {} views to {}", scene.n_views(), out.display());
    Ok(manifest)
}

pub struct RunArgs<'a> {
    pub manifest: &'a Path,
    pub prompts: &'a Path,
    pub config: Option<&'a Path>,
    pub seed: Option<u64>,
    pub oracles: &'a OracleCommands,
    pub out: &'a Path,
}

/// Runs the pipeline and writes its outputs. Returns the exit code for a
/// completed run; aborts leave an error report in the output directory.
pub fn run(args: &RunArgs<'_>) -> Result<i32, CliError> {
    let manifest = SceneManifest::load(args.manifest).map_err(|e| CliError::Input {
        path: args.manifest.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = args.manifest.parent().unwrap_or(Path::new("."));
    let vs = manifest.load_views(base).map_err(|e| CliError::Input {
        path: args.manifest.to_path_buf(),
        message: e.to_string(),
    })?;
    let prompts: PromptSet = read_json(args.prompts)?;
    let cfg = load_config(args.config, args.seed)?;
    let oracles = args.oracles.build()?;

    let progress = |p: Progress| info!("{:?}: {}/{}", p.stage, p.views_done, p.views_total);
    let result = match pipeline::run_with_progress(&vs, &prompts, &oracles, &cfg, &progress) {
        Ok(r) => r,
        Err(e) => {
            std::fs::create_dir_all(args.out)?;
            let report = json!({ "status": "aborted", "error": e.to_string() });
            std::fs::write(args.out.join("report.json"), serde_json::to_vec_pretty(&report).unwrap_or_default())?;
            return Err(CliError::Abort(e.to_string()));
        }
    };
    let exported = result.write(&vs, args.out).map_err(|e| CliError::Abort(e.to_string()))?;
    println!("{}", exported.display());
    if result.is_degraded() {
        warn!("degraded views: {:?}", result.report.degraded_views);
        eprintln!("degraded views: {:?}", result.report.degraded_views);
        Ok(exit::DEGRADED)
    } else {
        Ok(exit::OK)
    }
}

/// Scores a run directory against a ground-truth directory and writes
/// `eval/report.json` and `eval/report.csv` inside the run directory.
pub fn eval(run_dir: &Path, gt_dir: &Path) -> Result<EvalReport, CliError> {
    if !gt_dir.is_dir() {
        return Err(CliError::Input {
            path: gt_dir.to_path_buf(),
            message: "ground-truth directory not found".into(),
        });
    }
    let report = evaluate_run(run_dir, gt_dir).map_err(|e| CliError::Input {
        path: run_dir.to_path_buf(),
        message: e.to_string(),
    })?;
    report
        .write(&run_dir.join("eval"))
        .map_err(|e| CliError::Abort(e.to_string()))?;
    Ok(report)
}

/// One-line summary of an evaluation's aggregates.
pub fn aggregate_line(report: &EvalReport) -> String {
    let a = &report.aggregates;
    let f = |name: &str, v: &Option<Aggregate>| match v {
        Some(v) => format!("{name}={:.4}", v.mean),
        None => format!("{name}=n/a"),
    };
    [
        format!("views={}", report.views.len()),
        f("mask_iou", &a.mask_iou),
        f("psnr_db", &a.psnr_db),
        f("psnr_masked_db", &a.psnr_masked_db),
        f("ssim", &a.ssim),
        f("ssim_masked", &a.ssim_masked),
    ]
    .join(" ")
}
