//! Zero-shot relative depth evaluation and backbone wiring checks.
//!
//! The crate has two halves:
//!
//! * an evaluation path: raster and manifest ingestion ([`depthio`]),
//!   least-squares scale/shift alignment in disparity space ([`align`]),
//!   the four per-dataset error measures ([`metrics`]), the aggregated
//!   relative improvement and comparison tables ([`report`]), and the
//!   end-to-end dataset runner ([`evaluate`]);
//! * a model-zoo path: a declarative backbone catalog plus the published
//!   evaluation records ([`zoo`]) and a symbolic shape propagator that checks
//!   hook, adapter and decoder wiring without executing a network
//!   ([`shapecheck`]).

pub mod align;
pub mod depthio;
pub mod evaluate;
pub mod metrics;
pub mod report;
pub mod shapecheck;
pub mod zoo;

pub use align::{apply_alignment, disparity_to_depth, solve_alignment, AlignError, AlignmentParams};
pub use depthio::{DepthMap, DisparityMap, Grid, ResolutionPolicy, SampleManifest};
pub use metrics::{MetricError, MetricKind, MetricResult, OrdinalPairSet};
pub use shapecheck::{propagate, validate_resolution, ResolutionCache, ShapeError, ShapeReport};
pub use zoo::{BackboneDescriptor, Dataset, ModelEvalRecord, Registry};
