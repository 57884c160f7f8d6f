//! Per-dataset error measures: REL, bad-pixel δ1, disparity RMSE and WHDR.
//!
//! All sums run in double precision through [`pairwise_sum`] over jointly
//! valid pixels in row-major order, so results do not depend on how the
//! caller schedules samples.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{check_same_size, joint_pairs, AlignError};
use crate::depthio::{DepthMap, DisparityMap};

pub const DELTA1_THRESHOLD: f64 = 1.25;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("no jointly valid pixels")]
    EmptyOverlap,
    #[error("ordinal pair set is empty")]
    EmptyPairs,
    #[error("pair {index} endpoint ({x}, {y}) lies outside the {width}x{height} map")]
    OutOfBounds {
        index: usize,
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("pair {index} endpoint ({x}, {y}) is a masked-out pixel")]
    InvalidEndpoint { index: usize, x: usize, y: usize },
    #[error("pair set has Equal relations; an explicit WHDR threshold is required")]
    MissingTau,
    #[error("invalid ordinal pair set: {0}")]
    InvalidPairs(String),
    #[error("maps differ in size: {0}x{1} vs {2}x{3}")]
    SizeMismatch(usize, usize, usize, usize),
}

impl From<AlignError> for MetricError {
    fn from(e: AlignError) -> Self {
        match e {
            AlignError::SizeMismatch(a, b, c, d) => MetricError::SizeMismatch(a, b, c, d),
            _ => unreachable!("only size checks are shared"),
        }
    }
}

/// Which error measure a dataset is scored with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricKind {
    #[serde(rename = "WHDR")]
    Whdr,
    #[serde(rename = "REL")]
    Rel,
    #[serde(rename = "BadPixDelta1")]
    BadPixDelta1,
    #[serde(rename = "RMSE")]
    Rmse,
}

impl MetricKind {
    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Whdr => "WHDR",
            MetricKind::Rel => "REL",
            MetricKind::BadPixDelta1 => "delta1",
            MetricKind::Rmse => "RMSE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricResult {
    pub value: f64,
    /// Jointly valid pixels, or ordinal pairs for WHDR.
    pub count: usize,
}

/// Recursive pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if xs.len() <= BLOCK {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `(1/M) sum |d - d*| / d*` over jointly valid pixels.
pub fn rel(pred: &DepthMap, gt: &DepthMap) -> Result<MetricResult, MetricError> {
    check_same_size(pred.grid(), gt.grid())?;
    let terms: Vec<f64> = joint_pairs(pred.grid(), gt.grid()).map(|(d, g)| (d - g).abs() / g).collect();
    if terms.is_empty() {
        return Err(MetricError::EmptyOverlap);
    }
    Ok(MetricResult {
        value: pairwise_sum(&terms) / terms.len() as f64,
        count: terms.len(),
    })
}

/// Percentage of pixels with `max(d/d*, d*/d) > threshold`; lower is better.
pub fn bad_pix_delta1(pred: &DepthMap, gt: &DepthMap, threshold: f64) -> Result<MetricResult, MetricError> {
    check_same_size(pred.grid(), gt.grid())?;
    let mut m = 0usize;
    let mut bad = 0usize;
    for (d, g) in joint_pairs(pred.grid(), gt.grid()) {
        m += 1;
        // same as max(d/g, g/d) > threshold for positive values, without the
        // rounding of the quotient at the boundary
        if d > threshold * g || g > threshold * d {
            bad += 1;
        }
    }
    if m == 0 {
        return Err(MetricError::EmptyOverlap);
    }
    Ok(MetricResult {
        value: 100.0 * bad as f64 / m as f64,
        count: m,
    })
}

/// `sqrt((1/M) sum |D - D*|^2)` on disparities.
pub fn rmse_disparity(pred: &DisparityMap, gt: &DisparityMap) -> Result<MetricResult, MetricError> {
    check_same_size(pred.grid(), gt.grid())?;
    let sq: Vec<f64> = joint_pairs(pred.grid(), gt.grid())
        .map(|(d, g)| {
            let e = d - g;
            e * e
        })
        .collect();
    if sq.is_empty() {
        return Err(MetricError::EmptyOverlap);
    }
    Ok(MetricResult {
        value: (pairwise_sum(&sq) / sq.len() as f64).sqrt(),
        count: sq.len(),
    })
}

/// Annotated ordinal relation between points A and B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// A is closer (larger disparity).
    #[serde(rename = "A")]
    ACloser,
    #[serde(rename = "B")]
    BCloser,
    #[serde(rename = "E")]
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrdinalPair {
    pub ax: usize,
    pub ay: usize,
    pub bx: usize,
    pub by: usize,
    pub relation: Relation,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrdinalPairSet {
    pairs: Vec<OrdinalPair>,
}

impl OrdinalPairSet {
    pub fn new(pairs: Vec<OrdinalPair>) -> Result<Self, MetricError> {
        if pairs.is_empty() {
            return Err(MetricError::EmptyPairs);
        }
        if let Some(i) = pairs.iter().position(|p| !(p.weight >= 0.0 && p.weight.is_finite())) {
            return Err(MetricError::InvalidPairs(format!("pair {i} has weight {}", pairs[i].weight)));
        }
        let total: Vec<f64> = pairs.iter().map(|p| p.weight).collect();
        if pairwise_sum(&total) <= 0.0 {
            return Err(MetricError::InvalidPairs("weights sum to zero".into()));
        }
        Ok(OrdinalPairSet { pairs })
    }

    /// Reads `ax,ay,bx,by,relation,weight` CSV with a header row.
    pub fn load_csv(path: &Path) -> Result<Self, MetricError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| MetricError::InvalidPairs(format!("{}: {e}", path.display())))?;
        let pairs = rdr
            .deserialize()
            .collect::<Result<Vec<OrdinalPair>, _>>()
            .map_err(|e| MetricError::InvalidPairs(format!("{}: {e}", path.display())))?;
        OrdinalPairSet::new(pairs)
    }

    pub fn pairs(&self) -> &[OrdinalPair] {
        &self.pairs
    }

    pub fn has_equal(&self) -> bool {
        self.pairs.iter().any(|p| p.relation == Relation::Equal)
    }
}

/// Predicted relation under threshold `tau`; larger disparity means closer.
pub fn predicted_relation(a: f64, b: f64, tau: f64) -> Relation {
    let diff = a - b;
    if diff > tau {
        Relation::ACloser
    } else if diff < -tau {
        Relation::BCloser
    } else {
        Relation::Equal
    }
}

/// Weighted human disagreement rate, in percent.
///
/// `tau` may be omitted only when no pair is annotated `Equal`; it then
/// defaults to zero.
pub fn whdr(pred: &DisparityMap, pairs: &OrdinalPairSet, tau: Option<f64>) -> Result<MetricResult, MetricError> {
    let tau = match tau {
        Some(t) => t,
        None if pairs.has_equal() => return Err(MetricError::MissingTau),
        None => 0.0,
    };
    let g = pred.grid();
    let sample = |index: usize, x: usize, y: usize| -> Result<f64, MetricError> {
        if x >= g.width() || y >= g.height() {
            return Err(MetricError::OutOfBounds {
                index,
                x,
                y,
                width: g.width(),
                height: g.height(),
            });
        }
        g.get(x, y).ok_or(MetricError::InvalidEndpoint { index, x, y })
    };

    let mut all = Vec::with_capacity(pairs.pairs.len());
    let mut wrong = Vec::new();
    for (i, p) in pairs.pairs.iter().enumerate() {
        let a = sample(i, p.ax, p.ay)?;
        let b = sample(i, p.bx, p.by)?;
        all.push(p.weight);
        if predicted_relation(a, b, tau) != p.relation {
            wrong.push(p.weight);
        }
    }
    Ok(MetricResult {
        value: 100.0 * pairwise_sum(&wrong) / pairwise_sum(&all),
        count: all.len(),
    })
}
