#![allow(dead_code)]

use objremove_core::manifest::ViewSet;
use objremove_core::metrics::GroundTruth;
use objremove_core::pipeline::PropagationResult;
use objremove_core::prompts::{ForegroundPoint, PromptSet};
use objremove_core::scenegen::{RenderedView, SceneSpec, SyntheticScene};
use objremove_core::{BinaryMask, Point};
use rayon::prelude::*;

pub fn standard_scene(seed: u64, n_views: usize, width: u32, height: u32, n_objects: usize) -> SyntheticScene {
    SyntheticScene::new(SceneSpec::standard(seed, n_views, width, height, n_objects)).expect("valid standard scene")
}

pub fn render_all(scene: &SyntheticScene) -> Vec<RenderedView> {
    (0..scene.n_views()).into_par_iter().map(|j| scene.render(j)).collect()
}

pub fn view_set(rendered: &[RenderedView], source: usize) -> ViewSet {
    ViewSet::from_images(rendered.iter().map(|r| r.image.clone()).collect(), source).expect("valid view set")
}

pub fn ground_truth(rendered: &[RenderedView]) -> GroundTruth {
    GroundTruth {
        masks: rendered.iter().map(|r| Some(r.masks.clone())).collect(),
        clean: rendered.iter().map(|r| Some(r.clean.clone())).collect(),
    }
}

/// One foreground click at each object's center as seen in `view`.
pub fn center_prompts(scene: &SyntheticScene, view: usize) -> PromptSet {
    let foreground = scene
        .spec()
        .objects
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let c = scene
                .plane_to_view(view)
                .apply(Point::new(o.center[0], o.center[1]))
                .expect("object center maps into the view");
            ForegroundPoint {
                x: c.x.round() as u32,
                y: c.y.round() as u32,
                object_id: k as u32 + 1,
            }
        })
        .collect();
    PromptSet {
        view_index: view,
        foreground,
        background: vec![],
        region: None,
    }
}

/// Views whose output differs from the input outside the mask union.
pub fn conservation_violations(vs: &ViewSet, result: &PropagationResult) -> Vec<usize> {
    result
        .views
        .iter()
        .enumerate()
        .filter(|(j, v)| {
            let (w, h) = vs.dimensions();
            let union = BinaryMask::union_all(w, h, &v.masks).expect("matching masks");
            vs.view(*j)
                .pixels()
                .zip(v.inpainted.pixels())
                .zip(union.bits())
                .any(|((a, b), m)| !*m && a != b)
        })
        .map(|(j, _)| j)
        .collect()
}
