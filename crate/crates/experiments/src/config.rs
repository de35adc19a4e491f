//! Experiment configuration, read from TOML.
//!
//! ```toml
//! output_dir = "../results/desk"
//! base_seed = 1
//! folds = 5
//! repeats = 4
//! budget_preset = "table3"      # or "table8"
//! max_evaluations = 10000       # overrides the preset for every dataset
//! selectors = ["CH-MOGP", "NSGA-II", "MOEA/D"]
//!
//! [[datasets]]
//! name = "bcw"
//! path = "../data/bcw.data"
//! schema = "../data/bcw.schema.toml"
//! max_evaluations = 5000        # optional, overrides everything else
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use chmogp_core::engine::DEFAULT_CHECKPOINT_RATIOS;
use chmogp_core::gdt::VariationRates;
use chmogp_core::selection::SelectorKind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presets::BudgetPreset;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Toml {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

fn default_seed() -> u64 {
    1
}
fn default_population() -> usize {
    20
}
fn default_folds() -> usize {
    5
}
fn default_repeats() -> usize {
    20
}
fn default_tournament() -> usize {
    4
}
fn default_ratios() -> Vec<f64> {
    DEFAULT_CHECKPOINT_RATIOS.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
    pub schema: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_evaluations: Option<u64>,
}

/// The config file as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default = "default_population")]
    pub population_size: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_tournament")]
    pub tournament_size: usize,
    #[serde(default)]
    pub rates: VariationRates,
    #[serde(default)]
    pub budget_preset: Option<BudgetPreset>,
    #[serde(default)]
    pub max_evaluations: Option<u64>,
    #[serde(default = "default_ratios")]
    pub checkpoint_ratios: Vec<f64>,
    pub selectors: Vec<String>,
    pub datasets: Vec<DatasetEntry>,
}

mod selector_names {
    use chmogp_core::selection::SelectorKind;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(kinds: &[SelectorKind], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(kinds.iter().map(|k| k.name()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<SelectorKind>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|n| n.parse().map_err(|_| D::Error::custom(format!("unknown selector `{n}`"))))
            .collect()
    }
}

/// A dataset with its budget settled and paths made absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedDataset {
    pub name: String,
    pub path: PathBuf,
    pub schema: PathBuf,
    pub max_evaluations: u64,
}

/// Everything that determines the result tables. Written to the output
/// directory as `config.toml`; a resumed run must match it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub base_seed: u64,
    pub population_size: usize,
    pub folds: usize,
    pub repeats: usize,
    pub tournament_size: usize,
    pub rates: VariationRates,
    pub checkpoint_ratios: Vec<f64>,
    #[serde(with = "selector_names")]
    pub selectors: Vec<SelectorKind>,
    pub datasets: Vec<ResolvedDataset>,
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub workers: usize,
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Toml {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text, path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        // Absolute paths keep the echoed configuration independent of the
        // working directory a run is resumed from.
        let base = std::fs::canonicalize(base).unwrap_or_else(|_| base.to_path_buf());
        cfg.rebase(&base);
        Ok(cfg)
    }

    /// Makes relative paths relative to `base`.
    pub fn rebase(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.output_dir);
        for d in &mut self.datasets {
            join(&mut d.path);
            join(&mut d.schema);
        }
    }

    pub fn resolve(&self) -> Result<ResolvedConfig, ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.datasets.is_empty() {
            return invalid("no datasets configured".into());
        }
        if self.selectors.is_empty() {
            return invalid("no selectors configured".into());
        }
        if self.folds < 2 {
            return invalid(format!("folds = {} (need at least 2)", self.folds));
        }
        if self.repeats == 0 {
            return invalid("repeats must be positive".into());
        }
        let mut selectors = Vec::new();
        for s in &self.selectors {
            let kind: SelectorKind = s
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("unknown selector `{s}`")))?;
            if selectors.contains(&kind) {
                return invalid(format!("selector `{s}` listed twice"));
            }
            selectors.push(kind);
        }
        let mut names = HashSet::new();
        let mut datasets = Vec::new();
        for d in &self.datasets {
            if !names.insert(d.name.as_str()) {
                return invalid(format!("dataset `{}` listed twice", d.name));
            }
            if d.name.is_empty() || d.name.contains(['/', '\\', ',']) {
                return invalid(format!("dataset name `{}` is not a plain name", d.name));
            }
            let budget = d
                .max_evaluations
                .or(self.max_evaluations)
                .or_else(|| self.budget_preset.and_then(|p| p.budget(&d.name)))
                .ok_or_else(|| {
                    ConfigError::Invalid(format!(
                        "no evaluation budget for `{}`: set max_evaluations or a budget_preset that lists it",
                        d.name
                    ))
                })?;
            datasets.push(ResolvedDataset {
                name: d.name.clone(),
                path: d.path.clone(),
                schema: d.schema.clone(),
                max_evaluations: budget,
            });
        }
        Ok(ResolvedConfig {
            base_seed: self.base_seed,
            population_size: self.population_size,
            folds: self.folds,
            repeats: self.repeats,
            tournament_size: self.tournament_size,
            rates: self.rates,
            checkpoint_ratios: self.checkpoint_ratios.clone(),
            selectors,
            datasets,
            output_dir: self.output_dir.clone(),
            workers: self.workers,
        })
    }
}

impl ResolvedConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Jobs per (dataset, selector) pair.
    pub fn runs_per_cell(&self) -> usize {
        self.folds * self.repeats
    }
}
