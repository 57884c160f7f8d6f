use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use depthzoo::evaluate::{EvalError, RunConfig};
use depthzoo::report::{build_comparison_table, load_records_csv, plot_csv, plot_data, ReferenceSpec, ReportError};
use depthzoo::shapecheck::{propagate, ResolutionCache, ShapeError, ShapeReport};
use depthzoo::zoo::{builtin_eval_records, catalog_to_toml, parse_catalog, DataMix, Registry, ZooError};

#[derive(Parser)]
#[command(name = "depthzoo", version, about = "Relative depth evaluation and backbone wiring checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score predictions for every dataset in a run config.
    Evaluate(EvaluateArgs),
    /// Propagate tensor shapes through a backbone and its decoder.
    Shapes(ShapesArgs),
    /// Build a comparison table with relative improvement.
    Compare(CompareArgs),
    /// Inspect the backbone catalog.
    Registry {
        #[command(subcommand)]
        action: RegistryAction,
    },
}

#[derive(Args)]
struct EvaluateArgs {
    /// Run config (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides the configured worker count.
    #[arg(long)]
    workers: Option<usize>,
    /// Abort if any sample cannot be scored normally.
    #[arg(long)]
    strict: bool,
    /// Overrides the configured output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ShapesArgs {
    /// Backbone name.
    name: Option<String>,
    /// Input resolution as WxH; defaults to the training resolution.
    resolution: Option<String>,
    /// Check every descriptor at its training resolution.
    #[arg(long)]
    all: bool,
    /// Extra catalog file layered over the builtin one. With --all, only its entries are checked.
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableSelect {
    Released,
    Unreleased,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
struct CompareArgs {
    /// Use the shipped evaluation records.
    #[arg(long, conflicts_with = "records", required_unless_present = "records")]
    builtin: bool,
    /// Which shipped records to include.
    #[arg(long, value_enum, default_value = "released", requires = "builtin")]
    table: TableSelect,
    /// CSV with custom model rows.
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long, default_value = depthzoo::report::DEFAULT_REFERENCE)]
    reference: String,
    /// Data mix of the reference row; `any` matches the first row with that name.
    #[arg(long, default_value = "3+10")]
    reference_mix: String,
    /// Write fps/improvement plot data to this CSV file.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum RegistryAction {
    /// One line per backbone.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Full descriptor.
    Show {
        name: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Invalid(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Invalid(_) => 2,
        }
    }
}

impl From<ZooError> for Failure {
    fn from(e: ZooError) -> Self {
        match e {
            ZooError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<ShapeError> for Failure {
    fn from(e: ShapeError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), Failure> {
    std::fs::write(path, body).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn parse_resolution(s: &str) -> Result<(u32, u32), Failure> {
    let bad = || Failure::Invalid(format!("resolution must look like 384x384, got {s:?}"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((w.trim().parse().map_err(|_| bad())?, h.trim().parse().map_err(|_| bad())?))
}

fn print_report(r: &ShapeReport, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(r).expect("report serializes"));
    } else {
        println!("{r}");
    }
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), Failure> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(w) = a.workers {
        if w == 0 {
            return Err(Failure::Invalid("--workers must be at least 1".into()));
        }
        cfg.workers = w;
    }
    cfg.strict |= a.strict;
    if let Some(o) = a.output {
        cfg.output_dir = o;
    }
    let report = depthzoo::evaluate::run(&cfg)?;
    report.write(&cfg.output_dir)?;
    print!("{}", report.render_text());
    Ok(())
}

fn cmd_shapes(a: ShapesArgs) -> Result<(), Failure> {
    let mut registry = Registry::from_env()?;
    let mut only: Option<Vec<String>> = None;
    if let Some(path) = &a.catalog {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let descs = parse_catalog(&path.display().to_string(), &text)?;
        only = Some(descs.iter().map(|d| d.name.clone()).collect());
        registry.extend(descs);
    }
    let cache = ResolutionCache::new();

    if a.all {
        if a.name.is_some() {
            return Err(Failure::Invalid("--all takes no backbone name".into()));
        }
        let names: Vec<String> = only.unwrap_or_else(|| registry.list().iter().map(|d| d.name.clone()).collect());
        let mut reports = Vec::new();
        let mut failed = Vec::new();
        for name in &names {
            let d = registry.lookup(name)?;
            let [w, h] = d.training_resolution;
            match propagate(d, w, h, &cache) {
                Ok(r) => reports.push(r),
                Err(e) => failed.push(format!("{name}: {e}")),
            }
        }
        if a.json {
            println!("{}", serde_json::to_string_pretty(&reports).expect("reports serialize"));
        } else {
            for r in &reports {
                let [w, h] = r.input_resolution;
                println!("ok    {:<22} {w}x{h} -> {}x{}x{}", r.descriptor, r.output_resolution[0], r.output_resolution[1], r.output_channels);
            }
            for f in &failed {
                println!("FAIL  {f}");
            }
        }
        if !failed.is_empty() {
            return Err(Failure::Invalid(format!("{} descriptor(s) failed", failed.len())));
        }
        return Ok(());
    }

    let name = a
        .name
        .ok_or_else(|| Failure::Invalid("give a backbone name or --all".into()))?;
    let d = registry.lookup(&name)?;
    let (w, h) = match &a.resolution {
        Some(s) => parse_resolution(s)?,
        None => (d.training_resolution[0], d.training_resolution[1]),
    };
    let r = propagate(d, w, h, &cache)?;
    print_report(&r, a.json);
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<(), Failure> {
    let records = if let Some(path) = &a.records {
        load_records_csv(path)?
    } else {
        let all = builtin_eval_records();
        match a.table {
            TableSelect::Released => all.into_iter().filter(|r| r.table == 1).collect(),
            TableSelect::Unreleased => {
                // the reference row lives with the released models
                let reference = all.iter().find(|r| r.model == a.reference && r.table == 1).cloned();
                reference.into_iter().chain(all.into_iter().filter(|r| r.table == 2)).collect()
            }
            TableSelect::All => all,
        }
    };
    let mix = match a.reference_mix.as_str() {
        "any" => None,
        tag => Some(DataMix::from_tag(tag).ok_or_else(|| Failure::Invalid(format!("unknown data mix {tag:?}")))?),
    };
    let spec = ReferenceSpec {
        model: a.reference.clone(),
        mix,
    };
    let table = build_comparison_table(&records, &spec)?;
    match a.format {
        Format::Text => print!("{}", table.render_text()),
        Format::Csv => print!("{}", table.render_csv()),
        Format::Json => println!("{}", table.to_json()),
    }
    if let Some(path) = &a.plot {
        let reference = spec.find(&records)?;
        write_file(path, &plot_csv(&plot_data(&records, reference)))?;
    }
    Ok(())
}

fn cmd_registry(action: RegistryAction) -> Result<(), Failure> {
    let registry = Registry::from_env()?;
    match action {
        RegistryAction::List { json } => {
            if json {
                println!("{}", serde_json::to_string_pretty(registry.list()).expect("descriptors serialize"));
            } else {
                for d in registry.list() {
                    let [w, h] = d.training_resolution;
                    println!(
                        "{:<22} {:<12} {:<22} {w}x{h}{}",
                        d.name,
                        d.status.label(),
                        d.family.label(),
                        if d.square_only { " square-only" } else { "" }
                    );
                }
            }
        }
        RegistryAction::Show { name, json } => {
            let d = registry.lookup(&name)?;
            if json {
                println!("{}", serde_json::to_string_pretty(d).expect("descriptor serializes"));
            } else {
                print!("{}", catalog_to_toml(std::slice::from_ref(d)));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Shapes(a) => cmd_shapes(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Registry { action } => cmd_registry(action),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = match &f {
                Failure::Io(m) | Failure::Invalid(m) => m,
            };
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
