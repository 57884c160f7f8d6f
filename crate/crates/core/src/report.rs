//! Relative improvement, comparison tables and speed/quality plot data.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::metrics::pairwise_sum;
use crate::zoo::{Cell, DataMix, Dataset, ModelEvalRecord, ResolutionMode};

pub const DEFAULT_REFERENCE: &str = "ViT-L";
pub const DEFAULT_REFERENCE_MIX: DataMix = DataMix::Mix3p10;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{model}: no {mode:?} error for {dataset}")]
    MissingError {
        model: String,
        mode: ResolutionMode,
        dataset: &'static str,
    },
    #[error("cannot compare {model} ({a:?}) against reference ({b:?}) across resolution modes")]
    MixedResolutionMode {
        model: String,
        a: ResolutionMode,
        b: ResolutionMode,
    },
    #[error("{model}: {dataset} error must be positive and finite, got {value}")]
    NonPositive {
        model: String,
        dataset: &'static str,
        value: f64,
    },
    #[error("reference model {0} not among the records")]
    ReferenceMissing(String),
    #[error("reference model {0} lacks a complete square-resolution error set")]
    ReferenceIncomplete(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin} line {line}: {reason}")]
    Records { origin: String, line: u64, reason: String },
}

/// Six per-dataset errors measured at one resolution mode, in table column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSet {
    pub mode: ResolutionMode,
    pub values: [Option<f64>; 6],
}

impl ErrorSet {
    pub fn complete(mode: ResolutionMode, values: [f64; 6]) -> Self {
        ErrorSet {
            mode,
            values: values.map(Some),
        }
    }

    pub fn from_record(r: &ModelEvalRecord, mode: ResolutionMode) -> Self {
        ErrorSet {
            mode,
            values: r.errors(mode).map(|c| c.value()),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    fn checked(&self, model: &str) -> Result<[f64; 6], ReportError> {
        let mut out = [0.0; 6];
        for (d, (o, v)) in Dataset::ALL.into_iter().zip(out.iter_mut().zip(self.values)) {
            let v = v.ok_or_else(|| ReportError::MissingError {
                model: model.to_string(),
                mode: self.mode,
                dataset: d.name(),
            })?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(ReportError::NonPositive {
                    model: model.to_string(),
                    dataset: d.name(),
                    value: v,
                });
            }
            *o = v;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImprovementResult {
    pub model_name: String,
    pub reference_name: String,
    pub improvement_percent: f64,
    pub per_dataset_ratios: [f64; 6],
    pub resolution_mode: ResolutionMode,
}

/// `100 * (1 - mean_d(err_d / ref_d))` over the six datasets.
pub fn relative_improvement(
    model: &str,
    errors: &ErrorSet,
    reference_name: &str,
    reference: &ErrorSet,
) -> Result<ImprovementResult, ReportError> {
    if errors.mode != reference.mode {
        return Err(ReportError::MixedResolutionMode {
            model: model.to_string(),
            a: errors.mode,
            b: reference.mode,
        });
    }
    let e = errors.checked(model)?;
    let r = reference.checked(reference_name)?;
    let ratios: [f64; 6] = std::array::from_fn(|i| e[i] / r[i]);
    let mean = pairwise_sum(&ratios) / 6.0;
    Ok(ImprovementResult {
        model_name: model.to_string(),
        reference_name: reference_name.to_string(),
        improvement_percent: 100.0 * (1.0 - mean),
        per_dataset_ratios: ratios,
        resolution_mode: errors.mode,
    })
}

/// Which record serves as the zero point of the improvement scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceSpec {
    pub model: String,
    pub mix: Option<DataMix>,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        ReferenceSpec {
            model: DEFAULT_REFERENCE.to_string(),
            mix: Some(DEFAULT_REFERENCE_MIX),
        }
    }
}

impl ReferenceSpec {
    pub fn find<'a>(&self, records: &'a [ModelEvalRecord]) -> Result<&'a ModelEvalRecord, ReportError> {
        crate::zoo::find_record(records, &self.model, self.mix).ok_or_else(|| ReportError::ReferenceMissing(self.label()))
    }

    pub fn label(&self) -> String {
        match self.mix {
            Some(m) => format!("{} ({})", self.model, m.tag()),
            None => self.model.clone(),
        }
    }
}

/// Improvement of `r` against `reference` in `mode`, if both rows are complete.
pub fn record_improvement(r: &ModelEvalRecord, reference: &ModelEvalRecord, mode: ResolutionMode) -> Option<f64> {
    let e = ErrorSet::from_record(r, mode);
    let re = ErrorSet::from_record(reference, mode);
    if !e.is_complete() || !re.is_complete() {
        return None;
    }
    relative_improvement(&r.model, &e, &reference.model, &re)
        .ok()
        .map(|i| i.improvement_percent)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mark {
    #[default]
    None,
    Best,
    Second,
}

/// Columns carrying best/second markers, in display order.
pub const MARKED_COLUMNS: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub record: ModelEvalRecord,
    /// Recomputed improvement, `[unconstrained, square]`.
    pub improvement: [Option<f64>; 2],
    /// Params, FPS, six unconstrained errors, unconstrained I, six square errors, square I.
    pub marks: Vec<Mark>,
}

impl TableRow {
    fn column_value(&self, col: usize) -> Option<f64> {
        let r = &self.record;
        match col {
            0 => Some(r.params_millions),
            1 => r.fps,
            2..=7 => r.unconstrained[col - 2].value(),
            8 => self.improvement[0],
            9..=14 => r.square[col - 9].value(),
            15 => self.improvement[1],
            _ => None,
        }
    }

    fn higher_is_better(col: usize) -> bool {
        matches!(col, 1 | 8 | 15)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    pub reference: String,
    pub rows: Vec<TableRow>,
}

/// Orders rows by descending square improvement and marks per-column best and
/// second best. A row without a square improvement stays directly below the
/// ranked row it followed in the input.
pub fn build_comparison_table(records: &[ModelEvalRecord], reference: &ReferenceSpec) -> Result<ComparisonTable, ReportError> {
    let reference_row = reference.find(records)?;
    if reference_row.complete_errors(ResolutionMode::Square).is_none() {
        return Err(ReportError::ReferenceIncomplete(reference.label()));
    }

    let mut blocks: Vec<(Option<f64>, Vec<TableRow>)> = Vec::new();
    for r in records {
        let improvement = [
            record_improvement(r, reference_row, ResolutionMode::Unconstrained),
            record_improvement(r, reference_row, ResolutionMode::Square),
        ];
        let row = TableRow {
            record: r.clone(),
            improvement,
            marks: vec![Mark::None; MARKED_COLUMNS],
        };
        match (improvement[1], blocks.last_mut()) {
            (None, Some(block)) => block.1.push(row),
            (key, _) => blocks.push((key, vec![row])),
        }
    }
    // unranked leading block sorts last
    blocks.sort_by(|a, b| match (a.0, b.0) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    });
    let mut rows: Vec<TableRow> = blocks.into_iter().flat_map(|b| b.1).collect();
    mark_columns(&mut rows);
    Ok(ComparisonTable {
        reference: reference.label(),
        rows,
    })
}

fn mark_columns(rows: &mut [TableRow]) {
    for col in 0..MARKED_COLUMNS {
        let mut distinct: Vec<f64> = rows.iter().filter_map(|r| r.column_value(col)).collect();
        if TableRow::higher_is_better(col) {
            distinct.sort_by(|a, b| b.total_cmp(a));
        } else {
            distinct.sort_by(f64::total_cmp);
        }
        distinct.dedup();
        for row in rows.iter_mut() {
            let Some(v) = row.column_value(col) else { continue };
            row.marks[col] = match distinct.iter().position(|&d| d == v) {
                Some(0) => Mark::Best,
                Some(1) => Mark::Second,
                _ => Mark::None,
            };
        }
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn improvement_text(computed: Option<f64>, printed: Cell) -> String {
    match (computed, printed) {
        (Some(v), Cell::Value { decimals, .. }) => format!("{v:.*}", decimals as usize),
        (Some(v), _) => format!("{v:.1}"),
        (None, Cell::Unsupported) => "--".into(),
        (None, _) => "-".into(),
    }
}

impl ComparisonTable {
    fn cells(row: &TableRow) -> Vec<String> {
        let r = &row.record;
        let mut v = vec![
            num(r.params_millions),
            r.fps.map_or_else(|| "-".into(), num),
        ];
        v.extend(r.unconstrained.iter().map(Cell::to_string));
        v.push(improvement_text(row.improvement[0], r.improvement[0]));
        v.extend(r.square.iter().map(Cell::to_string));
        v.push(improvement_text(row.improvement[1], r.improvement[1]));
        v
    }

    fn header() -> Vec<String> {
        let mut h = vec!["model".to_string(), "mix".into(), "params".into(), "fps".into()];
        for prefix in ["u", "s"] {
            h.extend(Dataset::ALL.iter().map(|d| format!("{prefix}_{}", d.name())));
            h.push(format!("{prefix}_I"));
        }
        h
    }

    /// Aligned plain text; best values as `**v**`, second best as `_v_`.
    pub fn render_text(&self) -> String {
        let mut grid = vec![Self::header()];
        for row in &self.rows {
            let mut line = vec![row.record.model.clone(), row.record.data_mix.tag().to_string()];
            for (cell, mark) in Self::cells(row).into_iter().zip(&row.marks) {
                line.push(match mark {
                    Mark::Best => format!("**{cell}**"),
                    Mark::Second => format!("_{cell}_"),
                    Mark::None => cell,
                });
            }
            grid.push(line);
        }
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|c| grid.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = format!("reference: {}\n", self.reference);
        for line in grid {
            let mut s = String::new();
            for (c, cell) in line.iter().enumerate() {
                if c > 0 {
                    s.push_str("  ");
                }
                if c < 2 {
                    let _ = write!(s, "{cell:<w$}", w = widths[c]);
                } else {
                    let _ = write!(s, "{cell:>w$}", w = widths[c]);
                }
            }
            out.push_str(s.trim_end());
            out.push('\n');
        }
        out
    }

    /// CSV with recomputed and printed improvement plus one marks column.
    pub fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = Self::header();
        header.extend(["u_I_printed".into(), "s_I_printed".into(), "marks".into()]);
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let r = &row.record;
            let mut line = vec![r.model.clone(), r.data_mix.tag().to_string()];
            line.extend(Self::cells(row));
            // full precision for downstream use
            line[10] = row.improvement[0].map_or_else(|| line[10].clone(), num);
            line[17] = row.improvement[1].map_or_else(|| line[17].clone(), num);
            line.push(r.improvement[0].to_string());
            line.push(r.improvement[1].to_string());
            let marks: String = row
                .marks
                .iter()
                .map(|m| match m {
                    Mark::Best => 'B',
                    Mark::Second => 'S',
                    Mark::None => '.',
                })
                .collect();
            line.push(marks);
            w.write_record(&line).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush to vec")).expect("utf8 csv")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotPoint {
    pub fps: f64,
    pub improvement: f64,
    pub params: f64,
    pub model: String,
}

/// One point per record with fps and an improvement; square improvement is
/// preferred. Sorted by ascending fps, ties in input order.
pub fn plot_data(records: &[ModelEvalRecord], reference: &ModelEvalRecord) -> Vec<PlotPoint> {
    let mut pts: Vec<PlotPoint> = records
        .iter()
        .filter_map(|r| {
            let Some(fps) = r.fps else {
                log::warn!("{} has no fps; left out of plot data", r.key());
                return None;
            };
            let imp = record_improvement(r, reference, ResolutionMode::Square)
                .or_else(|| record_improvement(r, reference, ResolutionMode::Unconstrained));
            let Some(improvement) = imp else {
                log::warn!("{} has no complete error set; left out of plot data", r.key());
                return None;
            };
            Some(PlotPoint {
                fps,
                improvement,
                params: r.params_millions,
                model: r.model.clone(),
            })
        })
        .collect();
    pts.sort_by(|a, b| a.fps.total_cmp(&b.fps));
    pts
}

pub fn plot_csv(points: &[PlotPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["fps", "improvement", "params", "model"]).expect("in-memory write");
    for p in points {
        w.write_record([num(p.fps), num(p.improvement), num(p.params), p.model.clone()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush to vec")).expect("utf8 csv")
}

/// Header of the custom records CSV.
pub fn records_csv_header() -> Vec<String> {
    let mut h = vec!["model".to_string(), "data_mix".into(), "params".into(), "fps".into()];
    for prefix in ["u", "s"] {
        h.extend(Dataset::ALL.iter().map(|d| format!("{prefix}_{}", d.name())));
    }
    h
}

/// Reads model rows from CSV. Cells use the table syntax: `0.112`,
/// `5.005*` (non-zero-shot), `--` (unsupported), `-` (not evaluated).
pub fn parse_records_csv<R: Read>(origin: &str, reader: R) -> Result<Vec<ModelEvalRecord>, ReportError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let err = |line: u64, reason: String| ReportError::Records {
        origin: origin.to_string(),
        line,
        reason,
    };
    let expected = records_csv_header();
    let header = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let got: Vec<String> = header.iter().map(str::to_ascii_lowercase).collect();
    let want: Vec<String> = expected.iter().map(|s| s.to_ascii_lowercase()).collect();
    if got != want {
        return Err(err(1, format!("expected header {}", expected.join(","))));
    }

    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let model = rec[0].to_string();
        if model.is_empty() {
            return Err(err(line, "empty model name".into()));
        }
        let data_mix = DataMix::from_tag(&rec[1]).ok_or_else(|| err(line, format!("unknown data mix {:?}", &rec[1])))?;
        let params: f64 = rec[2].parse().map_err(|_| err(line, format!("bad params {:?}", &rec[2])))?;
        if !(params > 0.0 && params.is_finite()) {
            return Err(err(line, "params must be positive".into()));
        }
        let fps = match &rec[3] {
            "" | "-" => None,
            s => {
                let v: f64 = s.parse().map_err(|_| err(line, format!("bad fps {s:?}")))?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(err(line, "fps must be positive".into()));
                }
                Some(v)
            }
        };
        let mut cells = [Cell::NotEvaluated; 12];
        for (i, c) in cells.iter_mut().enumerate() {
            *c = Cell::parse(&rec[4 + i]).map_err(|e| err(line, e))?;
            if c.value().is_some_and(|v| v <= 0.0) {
                return Err(err(line, format!("error cell {} must be positive", expected[4 + i])));
            }
        }
        out.push(ModelEvalRecord {
            descriptor: model.clone(),
            model,
            table: 0,
            data_mix,
            params_millions: params,
            fps,
            unconstrained: std::array::from_fn(|i| cells[i]),
            square: std::array::from_fn(|i| cells[6 + i]),
            improvement: [Cell::NotEvaluated; 2],
        });
    }
    Ok(out)
}

pub fn load_records_csv(path: &Path) -> Result<Vec<ModelEvalRecord>, ReportError> {
    let f = std::fs::File::open(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_records_csv(&path.display().to_string(), std::io::BufReader::new(f))
}

/// Writes records in the custom CSV layout.
pub fn records_to_csv(records: &[ModelEvalRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(records_csv_header()).expect("in-memory write");
    for r in records {
        let mut line = vec![
            r.model.clone(),
            r.data_mix.tag().to_string(),
            num(r.params_millions),
            r.fps.map_or_else(String::new, num),
        ];
        line.extend(r.unconstrained.iter().chain(&r.square).map(Cell::to_string));
        w.write_record(&line).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush to vec")).expect("utf8 csv")
}
