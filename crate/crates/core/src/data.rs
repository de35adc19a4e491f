//! Dataset loading, preprocessing and stratified repeated k-fold plans.
//!
//! A dataset is a delimited text file described by a small TOML schema:
//!
//! ```toml
//! delimiter = "comma"       # or "whitespace"
//! header = false            # skip the first non-empty line
//! label = 10                # 0-based label column
//! positive = ["4"]          # label tokens mapped to class 1
//! negative = ["2"]          # label tokens mapped to class 0
//! ignore = [0]              # columns dropped entirely (ids)
//! categorical = []          # feature columns coded as categories
//! missing = ["?"]           # tokens treated as missing (default ["?", ""])
//! ```
//!
//! Every other column is a numeric feature. Missing numeric values are
//! replaced by the column median, missing categorical values by the column
//! mode. Categories are coded by their numeric value when every token parses
//! as a number, otherwise by their rank in lexicographic order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema {path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown label token `{token}`")]
    UnknownLabel { line: usize, token: String },
    #[error("dataset has {positives} positive and {negatives} negative rows; both classes are required")]
    SingleClass { positives: usize, negatives: usize },
    #[error("class {class} has {count} members, fewer than {k} folds")]
    ClassTooSmall { class: u8, count: usize, k: usize },
    #[error("split has {positives} positives and {negatives} negatives; both are required")]
    DegenerateSplit { positives: usize, negatives: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    Comma,
    Whitespace,
}

fn default_missing() -> Vec<String> {
    vec!["?".to_string(), String::new()]
}

/// On-disk schema description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaSpec {
    pub delimiter: Delimiter,
    #[serde(default)]
    pub header: bool,
    pub label: usize,
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    #[serde(default)]
    pub ignore: Vec<usize>,
    #[serde(default)]
    pub categorical: Vec<usize>,
    #[serde(default = "default_missing")]
    pub missing: Vec<String>,
}

impl SchemaSpec {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        let text = fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| DataError::Schema {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttributeKind {
    /// Observed `[min, max]` after imputation.
    Numeric { min: f64, max: f64 },
    /// Observed codes in increasing order.
    Categorical { codes: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    /// Source column in the data file.
    pub column: usize,
    pub kind: AttributeKind,
}

impl Attribute {
    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, AttributeKind::Categorical { .. })
    }

    /// Width of the observed range; zero for categorical attributes.
    pub fn span(&self) -> f64 {
        match &self.kind {
            AttributeKind::Numeric { min, max } => max - min,
            AttributeKind::Categorical { .. } => 0.0,
        }
    }
}

/// Feature layout of a loaded dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub attributes: Vec<Attribute>,
    pub label_column: usize,
    pub positive: Vec<String>,
}

impl DatasetSchema {
    pub fn width(&self) -> usize {
        self.attributes.len()
    }

    /// Schema of numeric attributes with the given ranges; handy for tests
    /// and synthetic data.
    pub fn numeric(ranges: &[(f64, f64)]) -> Self {
        DatasetSchema {
            attributes: ranges
                .iter()
                .enumerate()
                .map(|(column, &(min, max))| Attribute {
                    column,
                    kind: AttributeKind::Numeric { min, max },
                })
                .collect(),
            label_column: ranges.len(),
            positive: vec!["1".to_string()],
        }
    }
}

/// Labelled rows stored row-major. Labels are `1` for positive, `0` for
/// negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: DatasetSchema,
    features: Vec<f64>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn from_rows(
        schema: DatasetSchema,
        rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
    ) -> Result<Self, DataError> {
        let width = schema.width();
        let mut features = Vec::with_capacity(rows.len() * width);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(DataError::Parse {
                    line: i + 1,
                    message: format!("expected {width} features, found {}", row.len()),
                });
            }
            features.extend_from_slice(row);
        }
        let positives = labels.iter().filter(|&&y| y == 1).count();
        let negatives = labels.len() - positives;
        if positives == 0 || negatives == 0 {
            return Err(DataError::SingleClass {
                positives,
                negatives,
            });
        }
        Ok(Dataset {
            schema,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.schema.width()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.features[i * w..(i + 1) * w]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let positives = self.labels.iter().filter(|&&y| y == 1).count();
        (positives, self.labels.len() - positives)
    }

    /// Copies the given rows into a standalone split.
    pub fn subset(&self, indices: &[usize]) -> Split {
        let w = self.width();
        let mut features = Vec::with_capacity(indices.len() * w);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Split::new(w, features, labels)
    }

    pub fn as_split(&self) -> Split {
        Split::new(self.width(), self.features.clone(), self.labels.clone())
    }
}

/// A set of labelled rows a classifier is evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    width: usize,
    features: Vec<f64>,
    labels: Vec<u8>,
    positives: usize,
}

impl Split {
    pub fn new(width: usize, features: Vec<f64>, labels: Vec<u8>) -> Self {
        assert_eq!(features.len(), width * labels.len(), "ragged split");
        let positives = labels.iter().filter(|&&y| y == 1).count();
        Split {
            width,
            features,
            labels,
            positives,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.positives
    }

    pub fn negatives(&self) -> usize {
        self.labels.len() - self.positives
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], u8)> + '_ {
        self.features
            .chunks_exact(self.width.max(1))
            .zip(self.labels.iter().copied())
    }

    pub fn check_non_degenerate(&self) -> Result<(), DataError> {
        if self.positives() == 0 || self.negatives() == 0 {
            return Err(DataError::DegenerateSplit {
                positives: self.positives(),
                negatives: self.negatives(),
            });
        }
        Ok(())
    }
}

fn tokenize(line: &str, delimiter: Delimiter) -> Vec<&str> {
    match delimiter {
        Delimiter::Comma => line.split(',').map(str::trim).collect(),
        Delimiter::Whitespace => line.split_whitespace().collect(),
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

/// Parses delimited text according to `spec`.
pub fn parse_dataset(text: &str, spec: &SchemaSpec) -> Result<Dataset, DataError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    if spec.header {
        lines.next();
    }
    let mut raw: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut columns = None;
    for (n, line) in lines {
        let tokens = tokenize(line, spec.delimiter);
        let expected = *columns.get_or_insert(tokens.len());
        if tokens.len() != expected {
            return Err(DataError::Parse {
                line: n + 1,
                message: format!("expected {expected} columns, found {}", tokens.len()),
            });
        }
        raw.push((n + 1, tokens));
    }
    let columns = columns.unwrap_or(0);
    if spec.label >= columns {
        return Err(DataError::Parse {
            line: raw.first().map_or(1, |r| r.0),
            message: format!("label column {} out of range for {columns} columns", spec.label),
        });
    }
    let feature_columns: Vec<usize> = (0..columns)
        .filter(|c| *c != spec.label && !spec.ignore.contains(c))
        .collect();
    if feature_columns.is_empty() {
        return Err(DataError::Parse {
            line: 1,
            message: "no feature columns".to_string(),
        });
    }

    let mut labels = Vec::with_capacity(raw.len());
    for (line, tokens) in &raw {
        let token = tokens[spec.label];
        if spec.positive.iter().any(|p| p == token) {
            labels.push(1u8);
        } else if spec.negative.iter().any(|p| p == token) {
            labels.push(0u8);
        } else {
            return Err(DataError::UnknownLabel {
                line: *line,
                token: token.to_string(),
            });
        }
    }

    let is_missing = |t: &str| spec.missing.iter().any(|m| m == t);
    let mut attributes = Vec::with_capacity(feature_columns.len());
    let mut matrix: Vec<Vec<f64>> = vec![Vec::with_capacity(feature_columns.len()); raw.len()];
    for &c in &feature_columns {
        let values: Vec<Option<f64>> = if spec.categorical.contains(&c) {
            let tokens: Vec<&str> = raw.iter().map(|r| r.1[c]).filter(|t| !is_missing(t)).collect();
            let numeric = tokens.iter().all(|t| t.parse::<f64>().is_ok());
            let mut distinct: Vec<&str> = tokens.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let code_of = |t: &str| -> f64 {
                if numeric {
                    t.parse().expect("checked numeric")
                } else {
                    distinct.binary_search(&t).expect("observed token") as f64
                }
            };
            let coded: Vec<Option<f64>> = raw
                .iter()
                .map(|r| (!is_missing(r.1[c])).then(|| code_of(r.1[c])))
                .collect();
            let mut counts: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
            for v in coded.iter().flatten() {
                counts.entry(v.to_bits()).or_insert((*v, 0)).1 += 1;
            }
            let mut codes: Vec<f64> = counts.values().map(|v| v.0).collect();
            codes.sort_by(f64::total_cmp);
            let mode = counts
                .values()
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.total_cmp(&a.0)))
                .map(|v| v.0)
                .unwrap_or(0.0);
            if codes.is_empty() {
                codes.push(mode);
            }
            attributes.push(Attribute {
                column: c,
                kind: AttributeKind::Categorical { codes },
            });
            coded.into_iter().map(|v| Some(v.unwrap_or(mode))).collect()
        } else {
            let mut parsed = Vec::with_capacity(raw.len());
            for (line, tokens) in &raw {
                let t = tokens[c];
                if is_missing(t) {
                    parsed.push(None);
                } else {
                    let v: f64 = t.parse().map_err(|_| DataError::Parse {
                        line: *line,
                        message: format!("column {c}: `{t}` is not a number"),
                    })?;
                    if !v.is_finite() {
                        return Err(DataError::Parse {
                            line: *line,
                            message: format!("column {c}: non-finite value `{t}`"),
                        });
                    }
                    parsed.push(Some(v));
                }
            }
            let mut present: Vec<f64> = parsed.iter().flatten().copied().collect();
            let fill = median(&mut present).unwrap_or(0.0);
            let filled: Vec<f64> = parsed.iter().map(|v| v.unwrap_or(fill)).collect();
            let min = filled.iter().copied().fold(f64::INFINITY, f64::min);
            let max = filled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            attributes.push(Attribute {
                column: c,
                kind: AttributeKind::Numeric { min, max },
            });
            filled.into_iter().map(Some).collect()
        };
        for (row, v) in matrix.iter_mut().zip(values) {
            row.push(v.expect("imputed"));
        }
    }

    let schema = DatasetSchema {
        attributes,
        label_column: spec.label,
        positive: spec.positive.clone(),
    };
    Dataset::from_rows(schema, matrix, labels)
}

/// Reads and parses a dataset file.
pub fn load_dataset(path: &Path, spec: &SchemaSpec) -> Result<Dataset, DataError> {
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(&text, spec)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// `repeats` independent stratified partitions into `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub repeats: usize,
    /// Indexed `[repeat][fold]`.
    pub folds: Vec<Vec<Fold>>,
}

impl FoldPlan {
    pub fn fold(&self, repeat: usize, fold: usize) -> &Fold {
        &self.folds[repeat][fold]
    }
}

/// Shuffles each class independently and deals its members round-robin into
/// `k` folds. Dealing continues across classes so fold sizes also differ by
/// at most one.
pub fn stratified_kfold<R: Rng + ?Sized>(
    labels: &[u8],
    k: usize,
    repeats: usize,
    rng: &mut R,
) -> Result<FoldPlan, DataError> {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &y) in labels.iter().enumerate() {
        by_class[usize::from(y == 1)].push(i);
    }
    for class in [1u8, 0u8] {
        let count = by_class[class as usize].len();
        if count < k {
            return Err(DataError::ClassTooSmall { class, count, k });
        }
    }
    let mut folds = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let mut assignment = vec![0usize; labels.len()];
        let mut slot = 0usize;
        for class in [1usize, 0usize] {
            let mut members = by_class[class].clone();
            members.shuffle(rng);
            for i in members {
                assignment[i] = slot % k;
                slot += 1;
            }
        }
        let repeat = (0..k)
            .map(|f| {
                let (test, train): (Vec<usize>, Vec<usize>) =
                    (0..labels.len()).partition(|&i| assignment[i] == f);
                Fold { train, test }
            })
            .collect();
        folds.push(repeat);
    }
    Ok(FoldPlan { k, repeats, folds })
}
