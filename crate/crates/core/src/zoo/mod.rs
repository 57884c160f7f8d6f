//! Backbone catalog and published evaluation records.

mod descriptor;
mod records;

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use descriptor::{BackboneDescriptor, DecoderSpec, Family, HookAddressing, Status, StemSpec};
pub use records::{Cell, DataMix, Dataset, ErrorRow, ModelEvalRecord, ResolutionMode};

/// Environment variable holding extra catalog files or directories.
pub const CATALOG_ENV: &str = "DEPTHZOO_CATALOG";

const CATALOG_VERSION: u32 = 1;
const BUILTIN_BACKBONES: &str = include_str!("../../catalog/backbones.toml");
const BUILTIN_RECORDS: &str = include_str!("../../catalog/eval_records.toml");

#[derive(Debug, Error)]
pub enum ZooError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("{origin}: unsupported catalog_version {found}")]
    Version { origin: String, found: u32 },
    #[error("descriptor {name}: {reason}")]
    InvalidDescriptor { name: String, reason: String },
    #[error("record {model}: {reason}")]
    InvalidRecord { model: String, reason: String },
    #[error("{origin}: descriptor {name} defined twice")]
    Duplicate { origin: String, name: String },
    #[error("unknown backbone {0}")]
    UnknownBackbone(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BackboneFile {
    catalog_version: u32,
    #[serde(default)]
    backbone: Vec<BackboneDescriptor>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordFile {
    catalog_version: u32,
    #[serde(default)]
    record: Vec<ModelEvalRecord>,
}

fn check_version(origin: &str, v: u32) -> Result<(), ZooError> {
    if v != CATALOG_VERSION {
        return Err(ZooError::Version {
            origin: origin.to_string(),
            found: v,
        });
    }
    Ok(())
}

/// Parses and validates a backbone catalog document.
pub fn parse_catalog(origin: &str, text: &str) -> Result<Vec<BackboneDescriptor>, ZooError> {
    let file: BackboneFile = toml::from_str(text).map_err(|e| ZooError::Parse {
        origin: origin.to_string(),
        message: e.to_string(),
    })?;
    check_version(origin, file.catalog_version)?;
    let mut seen = HashMap::new();
    for d in &file.backbone {
        d.validate()?;
        if seen.insert(d.name.as_str(), ()).is_some() {
            return Err(ZooError::Duplicate {
                origin: origin.to_string(),
                name: d.name.clone(),
            });
        }
    }
    Ok(file.backbone)
}

pub fn catalog_to_toml(descs: &[BackboneDescriptor]) -> String {
    let file = BackboneFile {
        catalog_version: CATALOG_VERSION,
        backbone: descs.to_vec(),
    };
    toml::to_string(&file).expect("descriptors serialize to TOML")
}

/// Parses and validates an evaluation record document.
pub fn parse_records(origin: &str, text: &str) -> Result<Vec<ModelEvalRecord>, ZooError> {
    let file: RecordFile = toml::from_str(text).map_err(|e| ZooError::Parse {
        origin: origin.to_string(),
        message: e.to_string(),
    })?;
    check_version(origin, file.catalog_version)?;
    for r in &file.record {
        r.validate()?;
    }
    Ok(file.record)
}

pub fn records_to_toml(records: &[ModelEvalRecord]) -> String {
    let file = RecordFile {
        catalog_version: CATALOG_VERSION,
        record: records.to_vec(),
    };
    toml::to_string(&file).expect("records serialize to TOML")
}

/// The shipped catalog, in file order.
pub fn builtin_descriptors() -> Vec<BackboneDescriptor> {
    parse_catalog("builtin backbones.toml", BUILTIN_BACKBONES).expect("builtin catalog is valid")
}

/// Hook-placement and reversed-order ablations of released encoders.
pub fn ablation_variants() -> Vec<BackboneDescriptor> {
    builtin_descriptors().into_iter().filter(|d| d.status == Status::Ablation).collect()
}

/// Published evaluation rows, in printed order.
pub fn builtin_eval_records() -> Vec<ModelEvalRecord> {
    parse_records("builtin eval_records.toml", BUILTIN_RECORDS).expect("builtin records are valid")
}

/// First record with the given model name, optionally restricted to one mix.
pub fn find_record<'a>(records: &'a [ModelEvalRecord], model: &str, mix: Option<DataMix>) -> Option<&'a ModelEvalRecord> {
    records
        .iter()
        .find(|r| r.model == model && mix.is_none_or(|m| r.data_mix == m))
}

/// Ordered, name-indexed backbone catalog.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    descriptors: Vec<BackboneDescriptor>,
    index: HashMap<String, usize>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    pub fn builtin() -> Self {
        let mut r = Registry::empty();
        r.extend(builtin_descriptors());
        r
    }

    /// Builtin catalog overlaid with every file on the `DEPTHZOO_CATALOG` path.
    pub fn from_env() -> Result<Self, ZooError> {
        let mut r = Registry::builtin();
        if let Some(paths) = std::env::var_os(CATALOG_ENV) {
            for p in std::env::split_paths(&paths) {
                if !p.as_os_str().is_empty() {
                    r.overlay_path(&p)?;
                }
            }
        }
        Ok(r)
    }

    /// Adds descriptors; a name already present is replaced in place.
    pub fn extend(&mut self, descs: impl IntoIterator<Item = BackboneDescriptor>) {
        for d in descs {
            match self.index.get(&d.name) {
                Some(&i) => {
                    log::debug!("catalog override for {}", d.name);
                    self.descriptors[i] = d;
                }
                None => {
                    self.index.insert(d.name.clone(), self.descriptors.len());
                    self.descriptors.push(d);
                }
            }
        }
    }

    /// Loads a catalog file, or every `*.toml` in a directory in name order.
    pub fn overlay_path(&mut self, path: &Path) -> Result<(), ZooError> {
        let io = |source| ZooError::Io {
            path: path.to_path_buf(),
            source,
        };
        if path.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(io)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "toml") && p.is_file())
                .collect();
            files.sort();
            for f in files {
                self.overlay_path(&f)?;
            }
            return Ok(());
        }
        let text = std::fs::read_to_string(path).map_err(io)?;
        self.extend(parse_catalog(&path.display().to_string(), &text)?);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&BackboneDescriptor> {
        self.index.get(name).map(|&i| &self.descriptors[i])
    }

    pub fn lookup(&self, name: &str) -> Result<&BackboneDescriptor, ZooError> {
        self.get(name).ok_or_else(|| ZooError::UnknownBackbone(name.to_string()))
    }

    pub fn list(&self) -> &[BackboneDescriptor] {
        &self.descriptors
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    /// Every record must name a descriptor in this registry.
    pub fn check_records(&self, records: &[ModelEvalRecord]) -> Result<(), ZooError> {
        for r in records {
            if self.get(&r.descriptor).is_none() {
                return Err(ZooError::InvalidRecord {
                    model: r.key(),
                    reason: format!("descriptor {} not in catalog", r.descriptor),
                });
            }
        }
        Ok(())
    }
}
