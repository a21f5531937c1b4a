//! On-disk description of a view sequence.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image_io::{load_rgb, ImageIoError};
use crate::RgbImage;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Image(#[from] ImageIoError),
    #[error("invalid view set: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestView {
    /// Relative paths resolve against the manifest's directory.
    pub image_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub views: Vec<ManifestView>,
    #[serde(default)]
    pub source_index: usize,
}

impl SceneManifest {
    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        read_json(path)
    }

    pub fn save(&self, path: &Path) -> Result<(), ManifestError> {
        write_json(path, self)
    }

    /// Loads every view image, resolving paths against `base_dir`.
    pub fn load_views(&self, base_dir: &Path) -> Result<ViewSet, ManifestError> {
        let views = self
            .views
            .iter()
            .map(|v| load_rgb(&resolve(base_dir, &v.image_path)))
            .collect::<Result<Vec<_>, _>>()?;
        let poses = self.views.iter().map(|v| v.pose.clone()).collect();
        ViewSet::new(views, poses, self.source_index)
    }
}

pub(crate) fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| ManifestError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ManifestError> {
    let io = |source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| ManifestError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(io)
}

/// An ordered sequence of equally sized views with one source view.
#[derive(Debug, Clone)]
pub struct ViewSet {
    views: Vec<RgbImage>,
    poses: Vec<Option<serde_json::Value>>,
    source_index: usize,
}

impl ViewSet {
    pub fn new(views: Vec<RgbImage>, poses: Vec<Option<serde_json::Value>>, source_index: usize) -> Result<Self, ManifestError> {
        if views.len() < 2 {
            return Err(ManifestError::Invalid(format!("need at least 2 views, got {}", views.len())));
        }
        if source_index >= views.len() {
            return Err(ManifestError::Invalid(format!(
                "source_index {source_index} out of range for {} views",
                views.len()
            )));
        }
        if poses.len() != views.len() {
            return Err(ManifestError::Invalid("one pose entry per view required".into()));
        }
        let dims = views[0].dimensions();
        if dims.0 == 0 || dims.1 == 0 {
            return Err(ManifestError::Invalid("views must be non-empty".into()));
        }
        if let Some(j) = views.iter().position(|v| v.dimensions() != dims) {
            return Err(ManifestError::Invalid(format!(
                "view {j} is {:?}, expected {dims:?}",
                views[j].dimensions()
            )));
        }
        Ok(Self {
            views,
            poses,
            source_index,
        })
    }

    /// Views without poses.
    pub fn from_images(views: Vec<RgbImage>, source_index: usize) -> Result<Self, ManifestError> {
        let poses = vec![None; views.len()];
        Self::new(views, poses, source_index)
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    pub fn source_index(&self) -> usize {
        self.source_index
    }

    pub fn view(&self, j: usize) -> &RgbImage {
        &self.views[j]
    }

    pub fn views(&self) -> &[RgbImage] {
        &self.views
    }

    pub fn poses(&self) -> &[Option<serde_json::Value>] {
        &self.poses
    }

    pub fn dimensions(&self) -> (u32, u32) {
        self.views[0].dimensions()
    }

    pub fn with_source(mut self, source_index: usize) -> Result<Self, ManifestError> {
        if source_index >= self.views.len() {
            return Err(ManifestError::Invalid(format!("source_index {source_index} out of range")));
        }
        self.source_index = source_index;
        Ok(self)
    }
}
