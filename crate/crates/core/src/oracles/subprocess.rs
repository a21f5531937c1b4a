use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use super::{Inpainter, MatchResult, Matcher, OracleError, Segmenter, ViewRef};
use crate::geometry::PixelPoint;
use crate::image_io::{load_mask, load_rgb, save_mask, save_rgb};
use crate::{BinaryMask, Correspondence, RgbImage};

/// One request line written to the oracle's standard input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub op: String,
    pub image_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_image_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fg_points: Option<Vec<PixelPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bg_points: Option<Vec<PixelPoint>>,
}

/// The oracle's reply on standard output. Relative paths resolve against the
/// directory holding the request's input files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReply {
    pub status: String,
    #[serde(default)]
    pub mask_path: Option<PathBuf>,
    #[serde(default)]
    pub image_path: Option<PathBuf>,
    #[serde(default)]
    pub correspondences: Option<Vec<Correspondence>>,
    #[serde(default)]
    pub similarity: Option<f64>,
}

/// Oracle served by an external program, one process per call.
#[derive(Debug, Clone, PartialEq)]
pub struct SubprocessOracle {
    pub program: String,
    pub args: Vec<String>,
    /// Calls are serialized unless this is cleared.
    pub serial: bool,
}

impl SubprocessOracle {
    /// Splits a command line on whitespace into program and arguments.
    pub fn from_command_line(line: &str) -> Result<Self, OracleError> {
        let mut parts = line.split_whitespace().map(str::to_owned);
        let program = parts
            .next()
            .ok_or_else(|| OracleError::InvalidParameter("empty oracle command".into()))?;
        Ok(Self {
            program,
            args: parts.collect(),
            serial: true,
        })
    }

    fn call(&self, request: &OracleRequest, dir: &Path) -> Result<OracleReply, OracleError> {
        let adapter = |e: std::io::Error| OracleError::Adapter(format!("{}: {e}", self.program));
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .current_dir(dir)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(adapter)?;
        let mut line = serde_json::to_string(request).map_err(|e| OracleError::Adapter(e.to_string()))?;
        line.push('\n');
        if let Some(mut stdin) = child.stdin.take() {
            // A process that exits without reading is judged by its reply.
            let _ = stdin.write_all(line.as_bytes());
        }
        let output = child.wait_with_output().map_err(adapter)?;
        let stdout = String::from_utf8_lossy(&output.stdout).trim().to_string();
        if !output.status.success() && stdout.is_empty() {
            return Err(OracleError::OracleFailure {
                reply: format!("{}: {}", output.status, String::from_utf8_lossy(&output.stderr).trim()),
            });
        }
        let reply: OracleReply = serde_json::from_str(&stdout).map_err(|e| OracleError::OracleFailure {
            reply: format!("unparseable reply ({e}): {stdout}"),
        })?;
        if reply.status != "ok" {
            return Err(OracleError::OracleFailure { reply: stdout });
        }
        Ok(reply)
    }
}

fn workdir() -> Result<tempfile::TempDir, OracleError> {
    tempfile::Builder::new()
        .prefix("oracle-")
        .tempdir()
        .map_err(|e| OracleError::Adapter(e.to_string()))
}

fn io(e: impl std::fmt::Display) -> OracleError {
    OracleError::Adapter(e.to_string())
}

fn missing(field: &str) -> OracleError {
    OracleError::ContractViolation(format!("reply lacks `{field}`"))
}

impl Matcher for SubprocessOracle {
    fn match_views(&self, a: ViewRef<'_>, b: ViewRef<'_>) -> Result<MatchResult, OracleError> {
        let dir = workdir()?;
        let (pa, pb) = (dir.path().join("image.png"), dir.path().join("aux_image.png"));
        save_rgb(a.image, &pa).map_err(io)?;
        save_rgb(b.image, &pb).map_err(io)?;
        let reply = self.call(
            &OracleRequest {
                op: "match".into(),
                image_path: pa,
                aux_image_path: Some(pb),
                mask_path: None,
                fg_points: None,
                bg_points: None,
            },
            dir.path(),
        )?;
        let correspondences = reply.correspondences.ok_or_else(|| missing("correspondences"))?;
        let similarity = reply
            .similarity
            .unwrap_or(if correspondences.is_empty() { 0.0 } else { 1.0 });
        Ok(MatchResult {
            correspondences,
            similarity,
        })
    }

    fn concurrent(&self) -> bool {
        !self.serial
    }
}

impl Segmenter for SubprocessOracle {
    fn segment(&self, image: &RgbImage, foreground: &[PixelPoint], background: &[PixelPoint]) -> Result<BinaryMask, OracleError> {
        let dir = workdir()?;
        let pi = dir.path().join("image.png");
        save_rgb(image, &pi).map_err(io)?;
        let reply = self.call(
            &OracleRequest {
                op: "segment".into(),
                image_path: pi,
                aux_image_path: None,
                mask_path: None,
                fg_points: Some(foreground.to_vec()),
                bg_points: Some(background.to_vec()),
            },
            dir.path(),
        )?;
        let path = reply.mask_path.ok_or_else(|| missing("mask_path"))?;
        load_mask(&crate::manifest::resolve(dir.path(), &path)).map_err(io)
    }

    fn concurrent(&self) -> bool {
        !self.serial
    }
}

impl Inpainter for SubprocessOracle {
    fn inpaint(&self, image: &RgbImage, mask: &BinaryMask) -> Result<RgbImage, OracleError> {
        let dir = workdir()?;
        let (pi, pm) = (dir.path().join("image.png"), dir.path().join("mask.png"));
        save_rgb(image, &pi).map_err(io)?;
        save_mask(mask, &pm).map_err(io)?;
        let reply = self.call(
            &OracleRequest {
                op: "inpaint".into(),
                image_path: pi,
                aux_image_path: None,
                mask_path: Some(pm),
                fg_points: None,
                bg_points: None,
            },
            dir.path(),
        )?;
        let path = reply.image_path.ok_or_else(|| missing("image_path"))?;
        load_rgb(&crate::manifest::resolve(dir.path(), &path)).map_err(io)
    }

    fn concurrent(&self) -> bool {
        !self.serial
    }
}
