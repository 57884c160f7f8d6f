//! End-to-end dataset scoring: load, resample, align, convert, score, aggregate.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{apply_alignment, disparity_to_depth, masked_gt_mean, solve_alignment, AlignError, AlignmentParams, DEFAULT_EPS};
use crate::depthio::{
    compute_inference_resolution, load_raster, resample, DepthIoError, DepthMap, DisparityMap, GroundTruthKind, Grid,
    RasterFormat, ResolutionPolicy, SampleManifest, SampleRecord,
};
use crate::metrics::{self, pairwise_sum, MetricKind, OrdinalPairSet, DELTA1_THRESHOLD};
use crate::report::{relative_improvement, ErrorSet, ImprovementResult, ReferenceSpec};
use crate::zoo::{builtin_eval_records, DataMix, Dataset, ResolutionMode};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {reason}")]
    Config { path: PathBuf, reason: String },
    #[error(transparent)]
    Data(#[from] DepthIoError),
    #[error("dataset {dataset}: {count} unusable sample(s) in strict mode; first: {first}")]
    Strict { dataset: String, count: usize, first: String },
    #[error("dataset {0}: no sample could be scored")]
    NothingScored(String),
    #[error("reference: {0}")]
    Reference(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl EvalError {
    /// Failures caused by the file system rather than by content.
    pub fn is_io(&self) -> bool {
        matches!(self, EvalError::Io { .. } | EvalError::Data(DepthIoError::Io { .. }))
    }
}

/// What to do when the prediction is constant over the valid pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneratePolicy {
    /// Score with scale 0 and shift = mean ground truth.
    #[default]
    Fallback,
    /// Leave the sample out of the dataset mean.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub manifest: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clamp_scale: Option<bool>,
}

fn default_workers() -> usize {
    1
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

fn default_reference() -> String {
    crate::report::DEFAULT_REFERENCE.to_string()
}

fn default_reference_mix() -> Option<String> {
    Some(crate::report::DEFAULT_REFERENCE_MIX.tag().to_string())
}

/// Evaluation run settings, read from TOML.
///
/// ```toml
/// output_dir = "out"
/// workers = 4
/// [resolution]
/// mode = "square"
/// side = 384
/// [datasets.NYU]
/// manifest = "nyu/manifest.jsonl"
/// depth_cap = 10.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<ResolutionPolicy>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub degenerate: DegeneratePolicy,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_reference")]
    pub reference: String,
    #[serde(default = "default_reference_mix")]
    pub reference_mix: Option<String>,
    pub datasets: BTreeMap<String, DatasetConfig>,
}

impl RunConfig {
    /// Reads a config; relative paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| EvalError::Config {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.output_dir);
        for d in cfg.datasets.values_mut() {
            rebase(&mut d.manifest);
        }
        cfg.validate(path)?;
        Ok(cfg)
    }

    pub fn validate(&self, origin: &Path) -> Result<(), EvalError> {
        let bad = |reason: String| {
            Err(EvalError::Config {
                path: origin.to_path_buf(),
                reason,
            })
        };
        if self.datasets.is_empty() {
            return bad("no datasets configured".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if let Some(p) = &self.resolution {
            if let Err(e) = p.validate() {
                return bad(e.to_string());
            }
        }
        for (name, d) in &self.datasets {
            if let Some(cap) = d.depth_cap {
                if !(cap > 0.0 && cap.is_finite()) {
                    return bad(format!("dataset {name}: depth_cap must be positive"));
                }
            }
        }
        if let Some(m) = &self.reference_mix {
            if DataMix::from_tag(m).is_none() {
                return bad(format!("unknown reference_mix {m:?}"));
            }
        }
        Ok(())
    }

    pub fn reference_spec(&self) -> ReferenceSpec {
        ReferenceSpec {
            model: self.reference.clone(),
            mix: self.reference_mix.as_deref().and_then(DataMix::from_tag),
        }
    }
}

/// Resolved per-dataset scoring settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSettings {
    pub metric: MetricKind,
    pub depth_cap: Option<f64>,
    pub clamp_scale: bool,
    pub eps: f64,
    pub degenerate: DegeneratePolicy,
    pub resolution: Option<ResolutionPolicy>,
}

impl DatasetSettings {
    /// Config beats manifest beats the dataset default.
    pub fn resolve(name: &str, cfg: &RunConfig, dc: &DatasetConfig, manifest: &SampleManifest) -> Result<Self, EvalError> {
        let metric = manifest.header.metric_kind;
        let canonical = Dataset::from_name(name).or_else(|| Dataset::from_name(&manifest.header.dataset_name));
        let depth_cap = dc
            .depth_cap
            .or(manifest.header.depth_cap)
            .or_else(|| canonical.and_then(Dataset::default_depth_cap));
        if matches!(metric, MetricKind::Rel | MetricKind::BadPixDelta1) && depth_cap.is_none() {
            return Err(EvalError::Config {
                path: dc.manifest.clone(),
                reason: format!("dataset {name} needs a depth_cap"),
            });
        }
        Ok(DatasetSettings {
            metric,
            depth_cap,
            clamp_scale: dc.clamp_scale.unwrap_or(metric == MetricKind::BadPixDelta1),
            eps: cfg.eps,
            degenerate: cfg.degenerate,
            resolution: cfg.resolution,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleError {
    pub index: usize,
    pub prediction: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SampleOutcome {
    Scored { value: f64, fallback: bool },
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetReport {
    pub name: String,
    pub metric: MetricKind,
    /// Unweighted mean of per-sample values in metric units.
    pub mean: f64,
    /// `mean` in the units used by comparison tables (WHDR as a fraction).
    pub table_value: f64,
    pub samples_total: usize,
    pub samples_scored: usize,
    pub degenerate_fallbacks: usize,
    pub degenerate_skipped: usize,
    pub failures: Vec<SampleError>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub datasets: Vec<DatasetReport>,
    pub improvement: Option<ImprovementResult>,
}

fn sample_err(index: usize, s: &SampleRecord, message: impl ToString) -> SampleError {
    SampleError {
        index,
        prediction: s.prediction.clone(),
        message: message.to_string(),
    }
}

fn load_grid(manifest: &SampleManifest, p: &Path) -> Result<Grid, DepthIoError> {
    let path = manifest.resolve(p);
    let fmt = RasterFormat::from_path(&path, manifest.png_scale())?;
    load_raster(&path, fmt)
}

/// Ground truth as (disparity, depth) with depths above `cap` masked out.
fn ground_truth(grid: Grid, kind: GroundTruthKind, cap: Option<f64>) -> (DisparityMap, DepthMap) {
    let cap = cap.unwrap_or(f64::INFINITY);
    let depth = match kind {
        GroundTruthKind::Depth => grid.map_valid(|d| (d > 0.0 && d.is_finite() && d <= cap).then_some(d)),
        GroundTruthKind::Disparity => grid.map_valid(|v| {
            let d = 1.0 / v;
            (v > 0.0 && d.is_finite() && d <= cap).then_some(d)
        }),
    };
    let disparity = depth.map_valid(|d| Some(1.0 / d));
    (
        DisparityMap::new(disparity).expect("reciprocal of positive finite depth"),
        DepthMap::from_grid_lenient(depth),
    )
}

fn check_inference_resolution(
    pred: &Grid,
    native: Option<[u32; 2]>,
    policy: Option<ResolutionPolicy>,
) -> Result<(), String> {
    let (Some([nw, nh]), Some(policy)) = (native, policy) else {
        return Ok(());
    };
    let (ew, eh) = compute_inference_resolution(nw, nh, policy);
    if (pred.width(), pred.height()) != (ew as usize, eh as usize) {
        return Err(format!(
            "prediction is {}x{}, expected {ew}x{eh} for native {nw}x{nh}",
            pred.width(),
            pred.height()
        ));
    }
    Ok(())
}

fn eval_sample(manifest: &SampleManifest, st: &DatasetSettings, s: &SampleRecord) -> Result<SampleOutcome, String> {
    let pred_grid = load_grid(manifest, &s.prediction).map_err(|e| e.to_string())?;
    let native = s.native_resolution.or(manifest.header.native_resolution);

    if st.metric == MetricKind::Whdr {
        check_inference_resolution(&pred_grid, native, st.resolution)?;
        let pred = DisparityMap::new(pred_grid).map_err(|e| e.to_string())?;
        let pred = match native {
            Some([w, h]) => resample(&pred, w as usize, h as usize),
            None => pred,
        };
        let pairs_path = manifest.resolve(s.ordinal_pairs.as_deref().expect("checked at manifest load"));
        let pairs = OrdinalPairSet::load_csv(&pairs_path).map_err(|e| format!("{}: {e}", pairs_path.display()))?;
        let r = metrics::whdr(&pred, &pairs, manifest.header.whdr_tau).map_err(|e| e.to_string())?;
        return Ok(SampleOutcome::Scored {
            value: r.value,
            fallback: false,
        });
    }

    let gt_grid = load_grid(manifest, s.ground_truth.as_deref().expect("checked at manifest load")).map_err(|e| e.to_string())?;
    let native = native.or(Some([gt_grid.width() as u32, gt_grid.height() as u32]));
    check_inference_resolution(&pred_grid, native, st.resolution)?;
    let (gt_disp, gt_depth) = ground_truth(gt_grid, manifest.gt_kind(), st.depth_cap);
    let pred = DisparityMap::new(pred_grid).map_err(|e| e.to_string())?;
    let pred = resample(&pred, gt_disp.grid().width(), gt_disp.grid().height());

    let (params, fallback) = match solve_alignment(&pred, &gt_disp, st.clamp_scale) {
        Ok(p) => (p, false),
        Err(AlignError::DegenerateSystem) => match st.degenerate {
            DegeneratePolicy::Skip => return Ok(SampleOutcome::Skipped),
            DegeneratePolicy::Fallback => {
                let shift = masked_gt_mean(&pred, &gt_disp).ok_or("no jointly valid pixels")?;
                (AlignmentParams { scale: 0.0, shift }, true)
            }
        },
        Err(e) => return Err(e.to_string()),
    };
    let aligned = apply_alignment(&pred, params);

    let r = match st.metric {
        MetricKind::Rmse => metrics::rmse_disparity(&aligned, &gt_disp),
        MetricKind::Rel | MetricKind::BadPixDelta1 => {
            let cap = st.depth_cap.expect("cap resolved for depth metrics");
            let depth = disparity_to_depth(&aligned, cap, st.eps);
            if st.metric == MetricKind::Rel {
                metrics::rel(&depth, &gt_depth)
            } else {
                metrics::bad_pix_delta1(&depth, &gt_depth, DELTA1_THRESHOLD)
            }
        }
        MetricKind::Whdr => unreachable!(),
    }
    .map_err(|e| e.to_string())?;
    Ok(SampleOutcome::Scored { value: r.value, fallback })
}

/// Scores one dataset on `pool`. Per-sample results come back in manifest
/// order and are reduced sequentially, so the result is independent of the
/// number of workers.
pub fn evaluate_dataset(
    name: &str,
    manifest: &SampleManifest,
    settings: &DatasetSettings,
    pool: &rayon::ThreadPool,
) -> DatasetReport {
    use rayon::prelude::*;
    let outcomes: Vec<Result<SampleOutcome, String>> =
        pool.install(|| manifest.samples.par_iter().map(|s| eval_sample(manifest, settings, s)).collect());

    let mut values = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    let (mut fallbacks, mut skipped) = (0, 0);
    for (i, (o, s)) in outcomes.into_iter().zip(&manifest.samples).enumerate() {
        match o {
            Ok(SampleOutcome::Scored { value, fallback }) => {
                values.push(value);
                fallbacks += usize::from(fallback);
            }
            Ok(SampleOutcome::Skipped) => skipped += 1,
            Err(msg) => failures.push(sample_err(i, s, msg)),
        }
    }
    let mean = if values.is_empty() {
        f64::NAN
    } else {
        pairwise_sum(&values) / values.len() as f64
    };
    let table_value = if settings.metric == MetricKind::Whdr { mean / 100.0 } else { mean };
    DatasetReport {
        name: name.to_string(),
        metric: settings.metric,
        mean,
        table_value,
        samples_total: manifest.samples.len(),
        samples_scored: values.len(),
        degenerate_fallbacks: fallbacks,
        degenerate_skipped: skipped,
        failures,
    }
}

/// Runs every configured dataset with `workers` threads.
pub fn run(cfg: &RunConfig) -> Result<EvaluationReport, EvalError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| EvalError::Pool(e.to_string()))?;

    let mut datasets = Vec::with_capacity(cfg.datasets.len());
    for (name, dc) in &cfg.datasets {
        let manifest = SampleManifest::load(&dc.manifest)?;
        let settings = DatasetSettings::resolve(name, cfg, dc, &manifest)?;
        log::info!("{name}: {} samples, {:?}", manifest.samples.len(), settings.metric);
        let rep = evaluate_dataset(name, &manifest, &settings, &pool);
        for f in &rep.failures {
            log::warn!("{name} sample {}: {}", f.index, f.message);
        }
        if cfg.strict {
            let unusable = rep.failures.len() + rep.degenerate_fallbacks + rep.degenerate_skipped;
            if unusable > 0 {
                let first = rep
                    .failures
                    .first()
                    .map_or_else(|| "degenerate alignment".to_string(), |f| f.message.clone());
                return Err(EvalError::Strict {
                    dataset: name.clone(),
                    count: unusable,
                    first,
                });
            }
        }
        if rep.samples_scored == 0 {
            return Err(EvalError::NothingScored(name.clone()));
        }
        datasets.push(rep);
    }

    let improvement = improvement_against_builtin(&datasets, cfg)?;
    Ok(EvaluationReport { datasets, improvement })
}

/// Relative improvement against the builtin reference row when all six
/// benchmark datasets were scored and a resolution policy fixes the mode.
fn improvement_against_builtin(datasets: &[DatasetReport], cfg: &RunConfig) -> Result<Option<ImprovementResult>, EvalError> {
    let Some(policy) = cfg.resolution else {
        return Ok(None);
    };
    let mode = match policy {
        ResolutionPolicy::Square { .. } => ResolutionMode::Square,
        ResolutionPolicy::Unconstrained { .. } => ResolutionMode::Unconstrained,
    };
    let mut values = [None; 6];
    for rep in datasets {
        if let Some(d) = Dataset::from_name(&rep.name) {
            if rep.metric == d.metric() {
                values[d.index()] = Some(rep.table_value);
            }
        }
    }
    if values.iter().any(Option::is_none) {
        return Ok(None);
    }
    let spec = cfg.reference_spec();
    let records = builtin_eval_records();
    let reference = spec.find(&records).map_err(|e| EvalError::Reference(e.to_string()))?;
    let ref_set = ErrorSet::from_record(reference, mode);
    let own = ErrorSet { mode, values };
    relative_improvement("evaluated model", &own, &spec.label(), &ref_set)
        .map(Some)
        .map_err(|e| EvalError::Reference(e.to_string()))
}

impl EvaluationReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:<12} {:>22} {:>7} {:>7} {:>9} {:>8} {:>7}",
            "dataset", "metric", "value", "scored", "total", "fallback", "skipped", "failed"
        );
        for d in &self.datasets {
            let _ = writeln!(
                out,
                "{:<12} {:<12} {:>22} {:>7} {:>7} {:>9} {:>8} {:>7}",
                d.name,
                d.metric.label(),
                format!("{}", d.table_value),
                d.samples_scored,
                d.samples_total,
                d.degenerate_fallbacks,
                d.degenerate_skipped,
                d.failures.len()
            );
        }
        for d in &self.datasets {
            for f in &d.failures {
                let _ = writeln!(out, "failed: {} #{} {}: {}", d.name, f.index, f.prediction.display(), f.message);
            }
        }
        if let Some(i) = &self.improvement {
            let _ = writeln!(
                out,
                "improvement vs {} ({:?}): {}",
                i.reference_name, i.resolution_mode, i.improvement_percent
            );
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["dataset", "metric", "mean", "table_value", "scored", "total", "fallback", "skipped", "failed"])
            .expect("in-memory write");
        for d in &self.datasets {
            w.write_record([
                d.name.clone(),
                d.metric.label().to_string(),
                d.mean.to_string(),
                d.table_value.to_string(),
                d.samples_scored.to_string(),
                d.samples_total.to_string(),
                d.degenerate_fallbacks.to_string(),
                d.degenerate_skipped.to_string(),
                d.failures.len().to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush to vec")).expect("utf8 csv")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes `report.txt`, `report.csv` and `report.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), EvalError> {
        let io = |path: PathBuf| move |source| EvalError::Io { path, source };
        std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
        for (file, body) in [
            ("report.txt", self.render_text()),
            ("report.csv", self.render_csv()),
            ("report.json", self.to_json()),
        ] {
            let p = dir.join(file);
            std::fs::write(&p, body).map_err(io(p.clone()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depthio::write_pfm;

    fn write_map(dir: &Path, name: &str, w: usize, h: usize, v: Vec<f64>) -> PathBuf {
        let p = dir.join(name);
        write_pfm(&p, &Grid::from_values(w, h, v).unwrap()).unwrap();
        PathBuf::from(name)
    }

    fn one_dataset(dir: &Path, metric: &str, preds: &[Vec<f64>], gts: &[Vec<f64>]) -> SampleManifest {
        let mut text = format!("{{\"dataset_name\":\"X\",\"metric_kind\":\"{metric}\",\"depth_cap\":80.0}}\n");
        for (i, (p, g)) in preds.iter().zip(gts).enumerate() {
            let pp = write_map(dir, &format!("p{i}.pfm"), 4, 2, p.clone());
            let gp = write_map(dir, &format!("g{i}.pfm"), 4, 2, g.clone());
            text.push_str(&format!(
                "{{\"prediction\":\"{}\",\"ground_truth\":\"{}\"}}\n",
                pp.display(),
                gp.display()
            ));
        }
        let mp = dir.join("m.jsonl");
        std::fs::write(&mp, text).unwrap();
        SampleManifest::load(&mp).unwrap()
    }

    fn settings(metric: MetricKind) -> DatasetSettings {
        DatasetSettings {
            metric,
            depth_cap: Some(80.0),
            clamp_scale: false,
            eps: DEFAULT_EPS,
            degenerate: DegeneratePolicy::Fallback,
            resolution: None,
        }
    }

    fn pool(n: usize) -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
    }

    #[test]
    fn perfect_and_affine_predictions() {
        let dir = tempfile::tempdir().unwrap();
        // values are exact in f32 so the PFM round trip is lossless
        let depth = vec![1.0, 2.0, 4.0, 8.0, 0.5, 1.0, 2.0, 4.0];
        let disp: Vec<f64> = depth.iter().map(|d| 1.0 / d).collect();
        let affine: Vec<f64> = disp.iter().map(|d| 2.0 * d + 1.0).collect();
        let m = one_dataset(dir.path(), "REL", &[disp.clone(), affine], &[depth.clone(), depth]);
        let rep = evaluate_dataset("X", &m, &settings(MetricKind::Rel), &pool(2));
        assert_eq!(rep.samples_scored, 2);
        assert!(rep.mean.abs() < 1e-9, "{}", rep.mean);
    }

    #[test]
    fn degenerate_policies() {
        let dir = tempfile::tempdir().unwrap();
        let depth = vec![1.0, 2.0, 4.0, 8.0, 0.5, 1.0, 2.0, 4.0];
        let m = one_dataset(dir.path(), "BadPixDelta1", &[vec![3.0; 8]], &[depth]);
        let mut st = settings(MetricKind::BadPixDelta1);
        let rep = evaluate_dataset("X", &m, &st, &pool(1));
        assert_eq!((rep.samples_scored, rep.degenerate_fallbacks), (1, 1));
        st.degenerate = DegeneratePolicy::Skip;
        let rep = evaluate_dataset("X", &m, &st, &pool(1));
        assert_eq!((rep.samples_scored, rep.degenerate_skipped), (0, 1));
    }

    #[test]
    fn missing_prediction_is_a_sample_failure() {
        let dir = tempfile::tempdir().unwrap();
        let depth = vec![1.0; 8];
        let m = one_dataset(dir.path(), "REL", &[vec![1.0; 8]], &[depth]);
        std::fs::remove_file(dir.path().join("p0.pfm")).unwrap();
        let rep = evaluate_dataset("X", &m, &settings(MetricKind::Rel), &pool(1));
        assert_eq!(rep.failures.len(), 1);
        assert!(rep.mean.is_nan());
    }

    #[test]
    fn gt_beyond_cap_is_masked() {
        let g = Grid::from_values(3, 1, vec![5.0, 50.0, 90.0]).unwrap();
        let (disp, depth) = ground_truth(g, GroundTruthKind::Depth, Some(80.0));
        assert_eq!(depth.grid().mask(), &[true, true, false]);
        assert_eq!(disp.grid().get(0, 0), Some(0.2));
    }

    #[test]
    fn config_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(
            &p,
            "output_dir = \"out\"\nworkers = 3\n[resolution]\nmode = \"square\"\nside = 384\n[datasets.NYU]\nmanifest = \"nyu.jsonl\"\n",
        )
        .unwrap();
        let cfg = RunConfig::load(&p).unwrap();
        assert_eq!(cfg.workers, 3);
        assert_eq!(cfg.datasets["NYU"].manifest, dir.path().join("nyu.jsonl"));
        assert_eq!(cfg.reference_spec(), ReferenceSpec::default());
        std::fs::write(&p, "output_dir = \"o\"\nworkers = 0\n[datasets.A]\nmanifest = \"a\"\n").unwrap();
        assert!(matches!(RunConfig::load(&p), Err(EvalError::Config { .. })));
        assert!(RunConfig::load(&dir.path().join("absent.toml")).unwrap_err().is_io());
    }
}
