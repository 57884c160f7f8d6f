//! Raster and manifest ingestion.
//!
//! Dense maps are stored row-major in double precision together with a
//! validity mask of the same dimensions. Masked-out pixels always carry the
//! value `0.0`, so two grids with the same valid content compare equal
//! regardless of what the source file stored at invalid positions.

mod manifest;
mod pfm;
mod png16;
mod resample;
mod resolution;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use manifest::{GroundTruthKind, ManifestHeader, SampleManifest, SampleRecord};
pub use pfm::{read_pfm, write_pfm};
pub use png16::{read_png16, write_png16};
pub use resample::resample;
pub use resolution::{compute_inference_resolution, ResolutionPolicy};

/// Largest accepted raster side, in pixels.
pub const MAX_DIMENSION: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum DepthIoError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },
    #[error("dimensions {width}x{height} overflow the supported raster size")]
    DimensionOverflow { width: usize, height: usize },
    #[error("{path}: expected {expected} bytes of pixel data, found {found}")]
    TruncatedData {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("unsupported raster: {0}")]
    Unsupported(String),
    #[error("value {value} at pixel {index} does not fit a 16-bit PNG at scale {scale}")]
    ValueOutOfRange { index: usize, value: f64, scale: f64 },
    #[error("grid has {values} values and {mask} mask entries for {width}x{height}")]
    ShapeMismatch {
        width: usize,
        height: usize,
        values: usize,
        mask: usize,
    },
    #[error("pixel {index} is marked valid but holds {value}")]
    InvalidValue { index: usize, value: f64 },
    #[error("manifest {path} line {line}: {reason}")]
    Manifest {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("invalid resolution policy: {0}")]
    Policy(String),
}

pub type Result<T, E = DepthIoError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DepthIoError + '_ {
    move |source| DepthIoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Single-channel float raster with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    width: usize,
    height: usize,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl Grid {
    pub fn new(width: usize, height: usize, mut values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if values.len() != width * height || mask.len() != width * height {
            return Err(DepthIoError::ShapeMismatch {
                width,
                height,
                values: values.len(),
                mask: mask.len(),
            });
        }
        for (v, &m) in values.iter_mut().zip(&mask) {
            if !m {
                *v = 0.0;
            }
        }
        Ok(Grid {
            width,
            height,
            values,
            mask,
        })
    }

    /// Builds a grid from raw values, masking out every non-finite entry.
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let mask = values.iter().map(|v| v.is_finite()).collect();
        Grid::new(width, height, values, mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let i = y * self.width + x;
        (x < self.width && y < self.height && self.mask[i]).then(|| self.values[i])
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Applies `f` to every valid value; pixels where `f` returns `None` become invalid.
    pub fn map_valid(&self, mut f: impl FnMut(f64) -> Option<f64>) -> Grid {
        let mut values = self.values.clone();
        let mut mask = self.mask.clone();
        for (v, m) in values.iter_mut().zip(mask.iter_mut()) {
            if *m {
                match f(*v) {
                    Some(out) => *v = out,
                    None => {
                        *v = 0.0;
                        *m = false;
                    }
                }
            }
        }
        Grid {
            width: self.width,
            height: self.height,
            values,
            mask,
        }
    }

    pub fn into_parts(self) -> (usize, usize, Vec<f64>, Vec<bool>) {
        (self.width, self.height, self.values, self.mask)
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 || width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(DepthIoError::DimensionOverflow { width, height });
    }
    Ok(())
}

fn first_invalid(grid: &Grid, ok: impl Fn(f64) -> bool) -> Option<(usize, f64)> {
    grid.values
        .iter()
        .zip(&grid.mask)
        .enumerate()
        .find(|(_, (&v, &m))| m && !ok(v))
        .map(|(i, (&v, _))| (i, v))
}

/// Inverse relative depth, known only up to scale and shift. Larger is closer.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap(Grid);

impl DisparityMap {
    pub fn new(grid: Grid) -> Result<Self> {
        if let Some((index, value)) = first_invalid(&grid, f64::is_finite) {
            return Err(DepthIoError::InvalidValue { index, value });
        }
        Ok(DisparityMap(grid))
    }

    /// Every value valid; non-finite entries are masked out.
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        Ok(DisparityMap(Grid::from_values(width, height, values)?))
    }

    pub fn grid(&self) -> &Grid {
        &self.0
    }

    pub fn into_grid(self) -> Grid {
        self.0
    }
}

/// Depth map; valid pixels are strictly positive and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap(Grid);

impl DepthMap {
    pub fn new(grid: Grid) -> Result<Self> {
        if let Some((index, value)) = first_invalid(&grid, |v| v.is_finite() && v > 0.0) {
            return Err(DepthIoError::InvalidValue { index, value });
        }
        Ok(DepthMap(grid))
    }

    /// Masks out non-positive and non-finite entries instead of rejecting them.
    pub fn from_grid_lenient(grid: Grid) -> Self {
        DepthMap(grid.map_valid(|v| (v.is_finite() && v > 0.0).then_some(v)))
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        Ok(DepthMap::from_grid_lenient(Grid::from_values(width, height, values)?))
    }

    pub fn grid(&self) -> &Grid {
        &self.0
    }

    pub fn into_grid(self) -> Grid {
        self.0
    }
}

/// On-disk raster encodings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RasterFormat {
    Pfm,
    /// 16-bit grayscale PNG; stored integers are divided by `scale`.
    Png16 { scale: f64 },
}

impl RasterFormat {
    /// Picks the format from the file extension.
    pub fn from_path(path: &Path, png_scale: f64) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("pfm") => Ok(RasterFormat::Pfm),
            Some("png") => Ok(RasterFormat::Png16 { scale: png_scale }),
            _ => Err(DepthIoError::Unsupported(format!(
                "cannot infer raster format of {}",
                path.display()
            ))),
        }
    }
}

pub fn load_raster(path: &Path, format: RasterFormat) -> Result<Grid> {
    match format {
        RasterFormat::Pfm => read_pfm(path),
        RasterFormat::Png16 { scale } => read_png16(path, scale),
    }
}

pub fn write_raster(path: &Path, grid: &Grid, format: RasterFormat) -> Result<()> {
    match format {
        RasterFormat::Pfm => write_pfm(path, grid),
        RasterFormat::Png16 { scale } => write_png16(path, grid, scale),
    }
}

pub fn load_disparity(path: &Path, format: RasterFormat) -> Result<DisparityMap> {
    DisparityMap::new(load_raster(path, format)?)
}

pub fn load_depth(path: &Path, format: RasterFormat) -> Result<DepthMap> {
    Ok(DepthMap::from_grid_lenient(load_raster(path, format)?))
}
