use std::fmt;

use serde::{Deserialize, Serialize};

use super::ZooError;

/// The six zero-shot benchmark datasets, in table column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dataset {
    #[serde(rename = "DIW")]
    Diw,
    #[serde(rename = "ETH3D")]
    Eth3d,
    #[serde(rename = "Sintel")]
    Sintel,
    #[serde(rename = "KITTI")]
    Kitti,
    #[serde(rename = "NYU")]
    Nyu,
    #[serde(rename = "TUM")]
    Tum,
}

impl Dataset {
    pub const ALL: [Dataset; 6] = [
        Dataset::Diw,
        Dataset::Eth3d,
        Dataset::Sintel,
        Dataset::Kitti,
        Dataset::Nyu,
        Dataset::Tum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dataset::Diw => "DIW",
            Dataset::Eth3d => "ETH3D",
            Dataset::Sintel => "Sintel",
            Dataset::Kitti => "KITTI",
            Dataset::Nyu => "NYU",
            Dataset::Tum => "TUM",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Case-insensitive match on the short name.
    pub fn from_name(s: &str) -> Option<Dataset> {
        Dataset::ALL.into_iter().find(|d| d.name().eq_ignore_ascii_case(s.trim()))
    }

    pub fn metric(self) -> crate::metrics::MetricKind {
        use crate::metrics::MetricKind;
        match self {
            Dataset::Diw => MetricKind::Whdr,
            Dataset::Eth3d | Dataset::Sintel => MetricKind::Rel,
            Dataset::Kitti | Dataset::Nyu | Dataset::Tum => MetricKind::BadPixDelta1,
        }
    }

    /// Default depth cap in meters for depth-scored datasets.
    pub fn default_depth_cap(self) -> Option<f64> {
        match self {
            Dataset::Kitti => Some(80.0),
            Dataset::Nyu | Dataset::Tum => Some(10.0),
            Dataset::Eth3d | Dataset::Sintel => Some(72.0),
            Dataset::Diw => None,
        }
    }
}

/// Training data mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DataMix {
    #[serde(rename = "3+10")]
    Mix3p10,
    #[serde(rename = "5+12")]
    Mix5p12,
    /// Both stages train KITTI at its native resolution.
    #[serde(rename = "5K+12K")]
    Mix5k12k,
    /// Extra third stage on the 12 datasets with native-resolution KITTI.
    #[serde(rename = "5+12+12K")]
    Mix5p12p12k,
    /// Every dataset trained near its native resolution.
    #[serde(rename = "5A+12A")]
    Mix5a12a,
}

impl DataMix {
    pub fn tag(self) -> &'static str {
        match self {
            DataMix::Mix3p10 => "3+10",
            DataMix::Mix5p12 => "5+12",
            DataMix::Mix5k12k => "5K+12K",
            DataMix::Mix5p12p12k => "5+12+12K",
            DataMix::Mix5a12a => "5A+12A",
        }
    }

    pub fn from_tag(s: &str) -> Option<DataMix> {
        [
            DataMix::Mix3p10,
            DataMix::Mix5p12,
            DataMix::Mix5k12k,
            DataMix::Mix5p12p12k,
            DataMix::Mix5a12a,
        ]
        .into_iter()
        .find(|m| m.tag() == s.trim())
    }

    /// Whether KITTI and NYU were part of training.
    pub fn trains_on_kitti_nyu(self) -> bool {
        self != DataMix::Mix3p10
    }
}

/// One printed table cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Cell {
    Value {
        value: f64,
        /// Printed with a trailing `*`.
        non_zero_shot: bool,
        /// Digits after the decimal point as printed.
        decimals: u8,
    },
    /// `--`: the model does not support this resolution mode.
    Unsupported,
    /// `-`: not evaluated.
    NotEvaluated,
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Cell::Value { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn is_non_zero_shot(&self) -> bool {
        matches!(self, Cell::Value { non_zero_shot: true, .. })
    }

    pub fn parse(s: &str) -> Result<Cell, String> {
        let s = s.trim();
        match s {
            "--" => return Ok(Cell::Unsupported),
            "-" => return Ok(Cell::NotEvaluated),
            _ => {}
        }
        let (num, non_zero_shot) = match s.strip_suffix('*') {
            Some(n) => (n, true),
            None => (s, false),
        };
        let value: f64 = num.parse().map_err(|_| format!("bad table cell {s:?}"))?;
        if !value.is_finite() {
            return Err(format!("non-finite table cell {s:?}"));
        }
        let decimals = num.split_once('.').map_or(0, |(_, frac)| frac.len() as u8);
        Ok(Cell::Value {
            value,
            non_zero_shot,
            decimals,
        })
    }
}

impl TryFrom<String> for Cell {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        Cell::parse(&s)
    }
}

impl From<Cell> for String {
    fn from(c: Cell) -> String {
        c.to_string()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Cell::Unsupported => f.write_str("--"),
            Cell::NotEvaluated => f.write_str("-"),
            Cell::Value {
                value,
                non_zero_shot,
                decimals,
            } => {
                write!(f, "{value:.*}", decimals as usize)?;
                if non_zero_shot {
                    f.write_str("*")?;
                }
                Ok(())
            }
        }
    }
}

/// Six dataset errors for one resolution mode.
pub type ErrorRow = [Cell; 6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionMode {
    Unconstrained,
    Square,
}

/// One table row: a model's published errors and resources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEvalRecord {
    pub model: String,
    /// Backbone descriptor this model is built on.
    pub descriptor: String,
    /// Source table, 1 = released models, 2 = unpublished models.
    pub table: u8,
    pub data_mix: DataMix,
    pub params_millions: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<f64>,
    pub unconstrained: ErrorRow,
    pub square: ErrorRow,
    /// Printed relative improvement, `[unconstrained, square]`.
    pub improvement: [Cell; 2],
}

impl ModelEvalRecord {
    pub fn errors(&self, mode: ResolutionMode) -> &ErrorRow {
        match mode {
            ResolutionMode::Unconstrained => &self.unconstrained,
            ResolutionMode::Square => &self.square,
        }
    }

    pub fn printed_improvement(&self, mode: ResolutionMode) -> Cell {
        match mode {
            ResolutionMode::Unconstrained => self.improvement[0],
            ResolutionMode::Square => self.improvement[1],
        }
    }

    /// All six values, or `None` if any cell is missing.
    pub fn complete_errors(&self, mode: ResolutionMode) -> Option<[f64; 6]> {
        let row = self.errors(mode);
        let mut out = [0.0; 6];
        for (o, c) in out.iter_mut().zip(row) {
            *o = c.value()?;
        }
        Some(out)
    }

    /// Zero-shot flag per dataset column for one mode (true = zero-shot).
    pub fn zero_shot_flags(&self, mode: ResolutionMode) -> [bool; 6] {
        let row = self.errors(mode);
        std::array::from_fn(|i| !row[i].is_non_zero_shot())
    }

    pub fn key(&self) -> String {
        format!("{} ({})", self.model, self.data_mix.tag())
    }

    pub fn validate(&self) -> Result<(), ZooError> {
        let bad = |reason: String| {
            Err(ZooError::InvalidRecord {
                model: self.key(),
                reason,
            })
        };
        if self.params_millions.is_nan() || self.params_millions <= 0.0 {
            return bad("params must be positive".into());
        }
        if let Some(fps) = self.fps {
            if fps.is_nan() || fps <= 0.0 {
                return bad("fps must be positive".into());
            }
        }
        for mode in [ResolutionMode::Unconstrained, ResolutionMode::Square] {
            let row = self.errors(mode);
            if row.iter().filter_map(Cell::value).any(|v| v < 0.0) {
                return bad(format!("negative error in {mode:?} row"));
            }
            // mixes containing KITTI and NYU lose zero-shot status on exactly those two columns
            for d in Dataset::ALL {
                let cell = row[d.index()];
                if cell.value().is_none() {
                    continue;
                }
                let expect_nzs = self.data_mix.trains_on_kitti_nyu() && matches!(d, Dataset::Kitti | Dataset::Nyu);
                if cell.is_non_zero_shot() != expect_nzs {
                    return bad(format!(
                        "{mode:?} {} cell zero-shot marker inconsistent with data mix {}",
                        d.name(),
                        self.data_mix.tag()
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_parsing() {
        assert_eq!(Cell::parse("--").unwrap(), Cell::Unsupported);
        assert_eq!(Cell::parse("-").unwrap(), Cell::NotEvaluated);
        assert_eq!(
            Cell::parse("11.57*").unwrap(),
            Cell::Value {
                value: 11.57,
                non_zero_shot: true,
                decimals: 2
            }
        );
        assert_eq!(Cell::parse("-31").unwrap().value(), Some(-31.0));
        assert!(Cell::parse("abc").is_err());
        assert!(Cell::parse("inf").is_err());
        for s in ["0.110", "33.0", "-6", "5.005*", "--", "-"] {
            assert_eq!(Cell::parse(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn dataset_lookup() {
        assert_eq!(Dataset::from_name("nyu"), Some(Dataset::Nyu));
        assert_eq!(Dataset::from_name("Eth3d"), Some(Dataset::Eth3d));
        assert_eq!(Dataset::from_name("HRWSI"), None);
        assert_eq!(DataMix::from_tag("5K+12K"), Some(DataMix::Mix5k12k));
    }
}
