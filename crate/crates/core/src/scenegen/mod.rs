//! Synthetic planar scenes with full ground truth.
//!
//! A textured plane carrying solid-colored objects is imaged by a camera
//! whose plane-to-image homography moves smoothly between two random
//! projective poses. Every view comes with its clean plate (the same view
//! without objects), one ground-truth mask per object, and the exact
//! homographies between adjacent views.

mod texture;

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Point2};
use crate::image_io::{save_mask, save_rgb, ImageIoError};
use crate::manifest::{read_json, write_json, ManifestError, ManifestView, SceneManifest};
use crate::oracles::{synthetic_exact_matcher, MatchResult};
use crate::seeds::derive;
use crate::{BinaryMask, Homography, RgbImage};

pub use texture::Background;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("invalid scene spec: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Image(#[from] ImageIoError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disk { radius: f64 },
    Rectangle { width: f64, height: f64 },
    /// Vertices relative to the object center, in plane pixels.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Shape {
    /// Membership of a point given relative to the object center.
    pub fn contains(&self, dx: f64, dy: f64) -> bool {
        match self {
            Shape::Disk { radius } => dx * dx + dy * dy <= radius * radius,
            Shape::Rectangle { width, height } => dx.abs() <= width / 2.0 && dy.abs() <= height / 2.0,
            Shape::Polygon { vertices } => {
                let mut inside = false;
                let n = vertices.len();
                for i in 0..n {
                    let [xi, yi] = vertices[i];
                    let [xj, yj] = vertices[(i + n - 1) % n];
                    if (yi > dy) != (yj > dy) && dx < (xj - xi) * (dy - yi) / (yj - yi) + xi {
                        inside = !inside;
                    }
                }
                inside
            }
        }
    }

    fn extent(&self) -> f64 {
        match self {
            Shape::Disk { radius } => *radius,
            Shape::Rectangle { width, height } => width.hypot(*height) / 2.0,
            Shape::Polygon { vertices } => vertices.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max),
        }
    }

    fn validate(&self) -> Result<(), String> {
        let ok = match self {
            Shape::Disk { radius } => *radius > 0.0,
            Shape::Rectangle { width, height } => *width > 0.0 && *height > 0.0,
            Shape::Polygon { vertices } => vertices.len() >= 3 && vertices.iter().flatten().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("degenerate shape {self:?}"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub shape: Shape,
    pub color: [u8; 3],
    /// Position on the plane, whose coordinates coincide with the pixel grid
    /// of an unperturbed camera.
    pub center: [f64; 2],
}

/// One camera pose relative to the fronto-parallel view of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub tx: f64,
    pub ty: f64,
    pub rotation_deg: f64,
    pub px: f64,
    pub py: f64,
}

impl Pose {
    fn lerp(&self, other: &Pose, t: f64) -> Pose {
        let l = |a: f64, b: f64| a + (b - a) * t;
        Pose {
            tx: l(self.tx, other.tx),
            ty: l(self.ty, other.ty),
            rotation_deg: l(self.rotation_deg, other.rotation_deg),
            px: l(self.px, other.px),
            py: l(self.py, other.py),
        }
    }

    /// Plane-to-image homography; rotation and perspective act about the
    /// frame center.
    pub fn homography(&self, width: u32, height: u32) -> Result<Homography, GeometryError> {
        let (cx, cy) = (f64::from(width) / 2.0, f64::from(height) / 2.0);
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        let to_center = Homography::translation(-cx, -cy);
        let core = Homography::from_row_major([c, -s, 0.0, s, c, 0.0, self.px, self.py, 1.0])?;
        let back = Homography::translation(cx + self.tx, cy + self.ty);
        to_center.then(&core)?.then(&back)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraPath {
    pub max_translation_frac: f64,
    pub max_rotation_deg: f64,
    pub max_perspective: f64,
    /// Explicit end poses; drawn at random within the bounds when absent.
    pub start: Option<Pose>,
    pub end: Option<Pose>,
}

impl Default for CameraPath {
    fn default() -> Self {
        Self {
            max_translation_frac: 0.15,
            max_rotation_deg: 20.0,
            max_perspective: 1e-4,
            start: None,
            end: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub n_views: usize,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub background: Background,
    pub objects: Vec<SceneObject>,
    #[serde(default)]
    pub camera: CameraPath,
    #[serde(default)]
    pub seed: u64,
}

const PALETTE: [[u8; 3]; 6] = [
    [230, 30, 30],
    [30, 200, 40],
    [30, 60, 230],
    [240, 220, 20],
    [220, 30, 220],
    [20, 220, 220],
];

impl SceneSpec {
    /// A scene with `n_objects` non-overlapping objects (cycling through
    /// disk, rectangle and polygon) placed where every view sees them whole.
    pub fn standard(seed: u64, n_views: usize, width: u32, height: u32, n_objects: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, &[0x0b1ec7]));
        let unit = f64::from(width.min(height)) / 512.0;
        let camera = CameraPath::default();
        let mut objects: Vec<SceneObject> = Vec::new();
        let mut attempts = 0;
        while objects.len() < n_objects && attempts < 10_000 {
            attempts += 1;
            let size = rng.random_range(30.0..42.0) * unit;
            let shape = match objects.len() % 3 {
                0 => Shape::Disk { radius: size },
                1 => Shape::Rectangle {
                    width: 1.8 * size,
                    height: rng.random_range(1.2..1.8) * size,
                },
                _ => {
                    let n = rng.random_range(5..8);
                    let phase = rng.random_range(0.0..std::f64::consts::TAU);
                    let vertices = (0..n)
                        .map(|i| {
                            let a = phase + std::f64::consts::TAU * f64::from(i) / f64::from(n);
                            let r = size * rng.random_range(0.85..1.1);
                            [r * a.cos(), r * a.sin()]
                        })
                        .collect();
                    Shape::Polygon { vertices }
                }
            };
            let extent = shape.extent();
            // Keep the object inside every view for the bounded camera motion.
            let reach = |dim: u32| {
                let d = f64::from(dim);
                (d / 2.0 - camera.max_translation_frac * f64::from(width) - extent - 0.1 * d).max(0.0)
            };
            let (rx, ry) = (reach(width).min(reach(height)), reach(height).min(reach(width)));
            let center = [
                f64::from(width) / 2.0 + rng.random_range(-rx..=rx),
                f64::from(height) / 2.0 + rng.random_range(-ry..=ry),
            ];
            let clear = objects.iter().all(|o| {
                let gap = 8.0 * unit;
                (o.center[0] - center[0]).hypot(o.center[1] - center[1]) > o.shape.extent() + extent + gap
            });
            if clear {
                let color = PALETTE[objects.len() % PALETTE.len()];
                objects.push(SceneObject { shape, color, center });
            }
        }
        Self {
            n_views,
            width,
            height,
            background: Background::default(),
            objects,
            camera,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: String| Err(SceneError::Invalid(m));
        if self.n_views < 2 {
            return bad(format!("n_views must be at least 2, got {}", self.n_views));
        }
        if self.width < 16 || self.height < 16 {
            return bad(format!("frame {}x{} too small", self.width, self.height));
        }
        self.background.validate().map_err(SceneError::Invalid)?;
        for (k, o) in self.objects.iter().enumerate() {
            o.shape
                .validate()
                .map_err(|m| SceneError::Invalid(format!("object {}: {m}", k + 1)))?;
        }
        let c = &self.camera;
        if !(c.max_translation_frac >= 0.0 && c.max_rotation_deg >= 0.0 && c.max_perspective >= 0.0) {
            return bad("camera bounds must be non-negative".into());
        }
        Ok(())
    }
}

/// Ground-truth geometry of a scene: frame size and the homographies between
/// adjacent views (`i -> i + 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGeometry {
    pub width: u32,
    pub height: u32,
    pub adjacent: Vec<Homography>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PairRecord {
    from: usize,
    to: usize,
    h: Homography,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct HomographyFile {
    width: u32,
    height: u32,
    pairs: Vec<PairRecord>,
}

impl SceneGeometry {
    pub fn n_views(&self) -> usize {
        self.adjacent.len() + 1
    }

    /// Mapping from pixels of view `i` to pixels of view `j`, composed from
    /// the adjacent ground truths.
    pub fn between(&self, i: usize, j: usize) -> Result<Homography, GeometryError> {
        let mut h = Homography::identity();
        if i <= j {
            for a in &self.adjacent[i..j] {
                h = h.then(a)?;
            }
        } else {
            for a in self.adjacent[j..i].iter().rev() {
                h = h.then(&a.inverse()?)?;
            }
        }
        Ok(h)
    }

    /// Reads `homographies.json` from a scene's `gt/` directory.
    pub fn load(gt_dir: &Path) -> Result<Self, SceneError> {
        let file: HomographyFile = read_json(&gt_dir.join("homographies.json"))?;
        let mut adjacent = Vec::with_capacity(file.pairs.len());
        for (i, p) in file.pairs.into_iter().enumerate() {
            if p.from != i || p.to != i + 1 {
                return Err(SceneError::Invalid(format!(
                    "homography pair {i} is ({}, {}), expected ({i}, {})",
                    p.from,
                    p.to,
                    i + 1
                )));
            }
            adjacent.push(p.h);
        }
        Ok(Self {
            width: file.width,
            height: file.height,
            adjacent,
        })
    }

    fn save(&self, gt_dir: &Path) -> Result<(), SceneError> {
        let file = HomographyFile {
            width: self.width,
            height: self.height,
            pairs: self
                .adjacent
                .iter()
                .enumerate()
                .map(|(i, h)| PairRecord {
                    from: i,
                    to: i + 1,
                    h: *h,
                })
                .collect(),
        };
        write_json(&gt_dir.join("homographies.json"), &file)?;
        Ok(())
    }
}

/// One rendered view with its ground truth.
#[derive(Debug, Clone)]
pub struct RenderedView {
    pub image: RgbImage,
    pub clean: RgbImage,
    /// One mask per object, in object order.
    pub masks: Vec<BinaryMask>,
}

/// A validated scene with its camera path resolved.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    spec: SceneSpec,
    plane_to_view: Vec<Homography>,
    view_to_plane: Vec<Homography>,
}

impl SyntheticScene {
    pub fn new(spec: SceneSpec) -> Result<Self, SceneError> {
        spec.validate()?;
        let cam = &spec.camera;
        let mut rng = ChaCha8Rng::seed_from_u64(derive(spec.seed, &[0xca3e7a]));
        let max_t = cam.max_translation_frac * f64::from(spec.width);
        let mut draw = || {
            let mut u = |m: f64| if m > 0.0 { rng.random_range(-m..=m) } else { 0.0 };
            Pose {
                tx: u(max_t),
                ty: u(max_t),
                rotation_deg: u(cam.max_rotation_deg),
                px: u(cam.max_perspective),
                py: u(cam.max_perspective),
            }
        };
        let (a, b) = (draw(), draw());
        let start = cam.start.unwrap_or(a);
        let end = cam.end.unwrap_or(b);

        let n = spec.n_views;
        let mut plane_to_view = Vec::with_capacity(n);
        let mut view_to_plane = Vec::with_capacity(n);
        for j in 0..n {
            let t = j as f64 / (n - 1) as f64;
            let smooth = t * t * (3.0 - 2.0 * t);
            let g = start.lerp(&end, smooth).homography(spec.width, spec.height)?;
            view_to_plane.push(g.inverse()?);
            plane_to_view.push(g);
        }
        Ok(Self {
            spec,
            plane_to_view,
            view_to_plane,
        })
    }

    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    pub fn n_views(&self) -> usize {
        self.spec.n_views
    }

    pub fn size(&self) -> (u32, u32) {
        (self.spec.width, self.spec.height)
    }

    pub fn plane_to_view(&self, j: usize) -> &Homography {
        &self.plane_to_view[j]
    }

    /// Direct mapping from view `i` pixels to view `j` pixels.
    pub fn gt_between(&self, i: usize, j: usize) -> Result<Homography, GeometryError> {
        self.view_to_plane[i].then(&self.plane_to_view[j])
    }

    pub fn gt_homographies(&self) -> Result<Vec<Homography>, GeometryError> {
        (0..self.n_views() - 1).map(|i| self.gt_between(i, i + 1)).collect()
    }

    pub fn geometry(&self) -> Result<SceneGeometry, GeometryError> {
        Ok(SceneGeometry {
            width: self.spec.width,
            height: self.spec.height,
            adjacent: self.gt_homographies()?,
        })
    }

    pub fn render(&self, j: usize) -> RenderedView {
        let (w, h) = self.size();
        let inv = &self.view_to_plane[j];
        let n_obj = self.spec.objects.len();
        let rows: Vec<(Vec<u8>, Vec<u8>, Vec<Vec<bool>>)> = (0..h)
            .into_par_iter()
            .map(|y| {
                let mut img = Vec::with_capacity(w as usize * 3);
                let mut clean = Vec::with_capacity(w as usize * 3);
                let mut masks = vec![vec![false; w as usize]; n_obj];
                for x in 0..w {
                    let q = inv
                        .apply(Point2::new(f64::from(x), f64::from(y)))
                        .unwrap_or(Point2::new(f64::INFINITY, f64::INFINITY));
                    let bg = if q.is_finite() {
                        self.spec.background.sample(q.x, q.y, self.spec.seed)
                    } else {
                        [0.0; 3]
                    };
                    let bg = bg.map(|v| v.round().clamp(0.0, 255.0) as u8);
                    clean.extend_from_slice(&bg);
                    let mut px = bg;
                    for (k, o) in self.spec.objects.iter().enumerate() {
                        if q.is_finite() && o.shape.contains(q.x - o.center[0], q.y - o.center[1]) {
                            masks[k][x as usize] = true;
                            px = o.color;
                        }
                    }
                    img.extend_from_slice(&px);
                }
                (img, clean, masks)
            })
            .collect();

        let mut img = Vec::with_capacity(w as usize * h as usize * 3);
        let mut clean = Vec::with_capacity(w as usize * h as usize * 3);
        let mut bits = vec![Vec::with_capacity(w as usize * h as usize); n_obj];
        for (ri, rc, rm) in rows {
            img.extend(ri);
            clean.extend(rc);
            for (b, r) in bits.iter_mut().zip(rm) {
                b.extend(r);
            }
        }
        RenderedView {
            image: RgbImage::from_raw(w, h, img).expect("sized buffer"),
            clean: RgbImage::from_raw(w, h, clean).expect("sized buffer"),
            masks: bits
                .into_iter()
                .map(|b| BinaryMask::from_bits(w, h, b).expect("sized buffer"))
                .collect(),
        }
    }
}

/// Writes a scene directory and returns the path of its `manifest.json`.
///
/// Layout: `views/view_{j}.png`, `manifest.json`, `scene.json` and
/// `gt/{clean/view_{j}.png, masks/view_{j}_obj_{k}.png, homographies.json}`,
/// with objects numbered from 1.
pub fn generate(scene: &SyntheticScene, out_dir: &Path) -> Result<PathBuf, SceneError> {
    let gt = out_dir.join("gt");
    (0..scene.n_views()).into_par_iter().try_for_each(|j| -> Result<(), SceneError> {
        let v = scene.render(j);
        save_rgb(&v.image, &out_dir.join("views").join(format!("view_{j}.png")))?;
        save_rgb(&v.clean, &gt.join("clean").join(format!("view_{j}.png")))?;
        for (k, m) in v.masks.iter().enumerate() {
            save_mask(m, &gt.join("masks").join(format!("view_{j}_obj_{}.png", k + 1)))?;
        }
        Ok(())
    })?;
    scene.geometry()?.save(&gt)?;
    write_json(&out_dir.join("scene.json"), scene.spec())?;

    let manifest = SceneManifest {
        views: (0..scene.n_views())
            .map(|j| ManifestView {
                image_path: PathBuf::from("views").join(format!("view_{j}.png")),
                pose: Some(serde_json::json!({ "plane_to_view": scene.plane_to_view(j) })),
            })
            .collect(),
        source_index: 0,
    };
    let path = out_dir.join("manifest.json");
    manifest.save(&path)?;
    Ok(path)
}

/// Synthetic matches for every adjacent pair `(i, i + 1)`.
pub fn perturb(
    scene: &SyntheticScene,
    n_points: usize,
    noise_px: f64,
    outlier_ratio: f64,
    seed: u64,
) -> Result<Vec<((usize, usize), MatchResult)>, SceneError> {
    (0..scene.n_views() - 1)
        .map(|i| {
            let r = synthetic_exact_matcher(scene, i, i + 1, n_points, outlier_ratio, noise_px, seed)
                .map_err(|e| SceneError::Invalid(e.to_string()))?;
            Ok(((i, i + 1), r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::warp_mask;
    use crate::mask::iou;

    fn small(seed: u64) -> SceneSpec {
        SceneSpec::standard(seed, 4, 160, 128, 3)
    }

    #[test]
    fn standard_scene_places_all_objects() {
        let spec = SceneSpec::standard(3, 20, 512, 512, 3);
        assert_eq!(spec.objects.len(), 3);
        let scene = SyntheticScene::new(spec).unwrap();
        for j in [0, 10, 19] {
            let v = scene.render(j);
            for m in &v.masks {
                assert!(m.area() > 1000);
                // Fully inside the frame: no mask pixel on the border.
                assert!(m.iter_set().all(|p| p.x > 0 && p.y > 0 && p.x < 511 && p.y < 511));
            }
        }
    }

    #[test]
    fn static_camera_gives_identity_and_identical_views() {
        let mut spec = small(1);
        spec.n_views = 2;
        spec.camera.start = Some(Pose::default());
        spec.camera.end = Some(Pose::default());
        let scene = SyntheticScene::new(spec).unwrap();
        let h = scene.gt_homographies().unwrap();
        assert!(h[0].max_abs_diff(&Homography::identity()) < 1e-12);
        assert_eq!(scene.render(0).image, scene.render(1).image);
    }

    #[test]
    fn clean_plate_differs_only_inside_masks() {
        let scene = SyntheticScene::new(small(2)).unwrap();
        let v = scene.render(2);
        let (w, h) = scene.size();
        let union = BinaryMask::union_all(w, h, &v.masks).unwrap();
        for (i, (a, b)) in v.image.pixels().zip(v.clean.pixels()).enumerate() {
            if !union.bits()[i] {
                assert_eq!(a, b);
            }
        }
        assert_ne!(v.image, v.clean);
    }

    #[test]
    fn adjacent_composition_matches_direct_mapping() {
        let scene = SyntheticScene::new(SceneSpec::standard(5, 12, 256, 256, 2)).unwrap();
        let geo = scene.geometry().unwrap();
        for (i, j) in [(0, 11), (11, 0), (3, 7), (7, 2)] {
            let composed = geo.between(i, j).unwrap();
            let direct = scene.gt_between(i, j).unwrap();
            assert!(composed.max_abs_diff(&direct) < 1e-9, "{i}->{j}");
        }
    }

    #[test]
    fn disk_area_matches_projected_area() {
        // Under the affine approximation at the disk center, area scales by
        // the Jacobian determinant of the plane-to-view map there.
        let spec = SceneSpec {
            n_views: 5,
            width: 256,
            height: 256,
            background: Background::default(),
            objects: vec![SceneObject {
                shape: Shape::Disk { radius: 30.0 },
                color: [230, 30, 30],
                center: [128.0, 128.0],
            }],
            camera: CameraPath::default(),
            seed: 8,
        };
        let scene = SyntheticScene::new(spec).unwrap();
        for j in 0..5 {
            let g = scene.plane_to_view(j);
            let c = Point2::new(128.0, 128.0);
            let e = 1e-3;
            let p0 = g.apply(c).unwrap();
            let px = g.apply(Point2::new(c.x + e, c.y)).unwrap();
            let py = g.apply(Point2::new(c.x, c.y + e)).unwrap();
            let jac = ((px.x - p0.x) * (py.y - p0.y) - (px.y - p0.y) * (py.x - p0.x)).abs() / (e * e);
            let expect = std::f64::consts::PI * 900.0 * jac;
            let area = scene.render(j).masks[0].area() as f64;
            assert!((area - expect).abs() <= 0.1 * expect, "view {j}: {area} vs {expect}");
        }
    }

    #[test]
    fn gt_masks_warp_onto_each_other() {
        let scene = SyntheticScene::new(SceneSpec::standard(6, 6, 512, 512, 3)).unwrap();
        let views: Vec<_> = (0..6).map(|j| scene.render(j)).collect();
        for (i, j) in [(0, 1), (2, 5), (5, 0)] {
            let h = scene.gt_between(i, j).unwrap();
            for (a, b) in views[i].masks.iter().zip(&views[j].masks) {
                let warped = warp_mask(a, &h, scene.size()).unwrap();
                assert!(iou(&warped, b).unwrap() >= 0.98);
            }
        }
    }

    #[test]
    fn generate_is_deterministic_and_complete() {
        let scene = SyntheticScene::new(small(7)).unwrap();
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ma = generate(&scene, a.path()).unwrap();
        generate(&scene, b.path()).unwrap();
        assert!(ma.ends_with("manifest.json"));
        for rel in [
            "manifest.json",
            "scene.json",
            "views/view_3.png",
            "gt/clean/view_0.png",
            "gt/masks/view_3_obj_3.png",
            "gt/homographies.json",
        ] {
            let x = std::fs::read(a.path().join(rel)).unwrap();
            let y = std::fs::read(b.path().join(rel)).unwrap();
            assert_eq!(x, y, "{rel}");
        }
        let geo = SceneGeometry::load(&a.path().join("gt")).unwrap();
        assert_eq!(geo, scene.geometry().unwrap());
        let manifest = SceneManifest::load(&ma).unwrap();
        let vs = manifest.load_views(a.path()).unwrap();
        assert_eq!(vs.len(), 4);
        assert_eq!(vs.view(1), &scene.render(1).image);
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = small(1);
        spec.n_views = 1;
        assert!(matches!(SyntheticScene::new(spec), Err(SceneError::Invalid(_))));
        let mut spec = small(1);
        spec.objects.push(SceneObject {
            shape: Shape::Polygon { vertices: vec![[0.0, 0.0], [1.0, 1.0]] },
            color: [0, 0, 0],
            center: [10.0, 10.0],
        });
        assert!(SyntheticScene::new(spec).is_err());
    }

    #[test]
    fn polygon_membership() {
        let tri = Shape::Polygon {
            vertices: vec![[0.0, -10.0], [10.0, 10.0], [-10.0, 10.0]],
        };
        assert!(tri.contains(0.0, 0.0));
        assert!(!tri.contains(9.0, -9.0));
    }
}
