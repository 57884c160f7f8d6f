//! Line-oriented JSON dataset manifests.
//!
//! The first non-blank line is the header record; every following non-blank
//! line is one sample. Relative paths resolve against the manifest's directory.
//!
//! ```text
//! {"dataset_name":"NYU","metric_kind":"BadPixDelta1","depth_cap":10.0,"png_scale":1000.0}
//! {"prediction":"pred/0001.pfm","ground_truth":"gt/0001.png"}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io_err, DepthIoError, Result};
use crate::metrics::MetricKind;

/// What the ground-truth rasters of a dataset contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundTruthKind {
    Depth,
    Disparity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestHeader {
    pub dataset_name: String,
    pub metric_kind: MetricKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_cap: Option<f64>,
    /// Divisor for 16-bit PNG rasters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub png_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_kind: Option<GroundTruthKind>,
    /// `[width, height]` shared by every sample unless overridden per sample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub native_resolution: Option<[u32; 2]>,
    /// Ordinal threshold for WHDR; required when pairs contain `E` relations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub whdr_tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub prediction: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinal_pairs: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub native_resolution: Option<[u32; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleManifest {
    pub header: ManifestHeader,
    pub samples: Vec<SampleRecord>,
    /// Directory that relative sample paths are resolved against.
    pub base_dir: PathBuf,
}

impl SampleManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(path, &text, base_dir)
    }

    pub fn parse(path: &Path, text: &str, base_dir: PathBuf) -> Result<Self> {
        let err = |line: usize, reason: String| DepthIoError::Manifest {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, htext) = lines.next().ok_or_else(|| err(1, "empty manifest".into()))?;
        let header: ManifestHeader =
            serde_json::from_str(htext).map_err(|e| err(hline, format!("bad header: {e}")))?;
        let mut samples = Vec::new();
        for (line, l) in lines {
            let s: SampleRecord = serde_json::from_str(l).map_err(|e| err(line, format!("bad sample: {e}")))?;
            samples.push((line, s));
        }

        if let Some(cap) = header.depth_cap {
            if !(cap > 0.0 && cap.is_finite()) {
                return Err(err(hline, format!("depth_cap must be positive, got {cap}")));
            }
        }
        if let Some(scale) = header.png_scale {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(err(hline, format!("png_scale must be positive, got {scale}")));
            }
        }
        for (line, s) in &samples {
            if header.metric_kind == MetricKind::Whdr && s.ordinal_pairs.is_none() {
                return Err(err(*line, "WHDR datasets need an ordinal_pairs path per sample".into()));
            }
            if header.metric_kind != MetricKind::Whdr && s.ground_truth.is_none() {
                return Err(err(*line, "sample lacks a ground_truth path".into()));
            }
        }

        Ok(SampleManifest {
            header,
            samples: samples.into_iter().map(|(_, s)| s).collect(),
            base_dir,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for s in &self.samples {
            out.push_str(&serde_json::to_string(s).expect("sample serializes"));
            out.push('\n');
        }
        out
    }

    pub fn png_scale(&self) -> f64 {
        self.header.png_scale.unwrap_or(1.0)
    }

    /// Ground-truth semantics; disparity for RMSE datasets, depth otherwise.
    pub fn gt_kind(&self) -> GroundTruthKind {
        self.header.gt_kind.unwrap_or(match self.header.metric_kind {
            MetricKind::Rmse => GroundTruthKind::Disparity,
            _ => GroundTruthKind::Depth,
        })
    }
}
