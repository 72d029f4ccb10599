//! Columnar dataset model: typed columns, label codes, row views, and the
//! dictionary that pins a trained model to the schema it was fitted on.
//!
//! Missing values use in-band sentinels: `f64::NAN` in continuous columns and
//! [`MISSING_CODE`] in categorical columns and labels. Category and class
//! codes are assigned in first-appearance order during loading, so reloading
//! the same file always yields the same codes.

mod load;
mod manifest;

pub use load::{
    load_arff, load_csv, load_csv_with_dictionary, write_csv, ColumnSelector, LoadOptions,
};
pub use manifest::{load_dataset_from_manifest, load_manifest, DatasetManifest, ManifestDataset};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Sentinel code for a missing categorical value or label.
pub const MISSING_CODE: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv parse error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("column {column:?} row {row}: cannot parse {token:?} as a number")]
    UnparseableNumeric { column: String, row: usize, token: String },
    #[error("file contains no data rows")]
    NoDataRows,
    #[error("class column {0:?} has no observed labels")]
    NoClassLabels(String),
    #[error("unknown class label {token:?} (model knows: {known})")]
    UnknownClassLabel { token: String, known: String },
    #[error("attribute {0:?} required by the model is absent from the input")]
    MissingAttribute(String),
    #[error("input has {found} columns but the model schema describes {expected}")]
    WidthMismatch { found: usize, expected: usize },
    #[error("column {column:?} is entirely missing; cannot impute")]
    ColumnAllMissing { column: String },
    #[error("arff error at line {line}: {message}")]
    Arff { line: usize, message: String },
    #[error("manifest {path}: {message}")]
    Manifest { path: String, message: String },
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

/// How a column's values are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Continuous,
    Categorical,
}

/// Name and kind of one predictor attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

/// Names and kinds for the predictors plus the class attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub attributes: Vec<Attribute>,
    pub class_attribute: String,
    /// Class names in code order: label code `i` means `class_labels[i]`.
    pub class_labels: Vec<String>,
}

/// What to do with rows that contain missing values before training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MissingPolicy {
    /// Drop every row with a missing label or missing predictor value.
    #[serde(rename = "drop")]
    DropRows,
    /// Drop rows with missing labels, then fill continuous gaps with the
    /// column mean and categorical gaps with the column mode.
    #[serde(rename = "impute")]
    ImputeMeanMode,
}

/// One column of values; the variant must agree with the attribute kind.
#[derive(Debug, Clone)]
pub enum Column {
    /// NaN marks a missing slot.
    Continuous(Vec<f64>),
    /// `MISSING_CODE` marks a missing slot; other codes index `categories`.
    Categorical { codes: Vec<u32>, categories: Vec<String> },
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Column::Continuous(v) => v.len(),
            Column::Categorical { codes, .. } => codes.len(),
        }
    }

    fn kind(&self) -> AttributeKind {
        match self {
            Column::Continuous(_) => AttributeKind::Continuous,
            Column::Categorical { .. } => AttributeKind::Categorical,
        }
    }
}

/// A single cell as seen by splitters and tree routing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttrValue {
    Continuous(f64),
    Categorical(u32),
    Missing,
}

/// An immutable table of typed columns plus integer class labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: Schema,
    columns: Vec<Column>,
    labels: Vec<u32>,
    row_count: usize,
}

impl Dataset {
    /// Assembles a dataset, validating that columns, labels, and schema agree.
    pub fn from_parts(schema: Schema, columns: Vec<Column>, labels: Vec<u32>) -> Result<Self, DataError> {
        if schema.attributes.len() != columns.len() {
            return Err(DataError::Invalid(format!(
                "schema describes {} attributes but {} columns given",
                schema.attributes.len(),
                columns.len()
            )));
        }
        let row_count = labels.len();
        if row_count > u32::MAX as usize {
            return Err(DataError::Invalid("row count exceeds u32 range".into()));
        }
        for (i, col) in columns.iter().enumerate() {
            if col.len() != row_count {
                return Err(DataError::Invalid(format!(
                    "column {:?} has {} rows, labels have {}",
                    schema.attributes[i].name,
                    col.len(),
                    row_count
                )));
            }
            if col.kind() != schema.attributes[i].kind {
                return Err(DataError::Invalid(format!(
                    "column {:?} storage does not match its declared kind",
                    schema.attributes[i].name
                )));
            }
            if let Column::Categorical { codes, categories } = col {
                if codes.iter().any(|&c| c != MISSING_CODE && c as usize >= categories.len()) {
                    return Err(DataError::Invalid(format!(
                        "column {:?} contains a code outside its category list",
                        schema.attributes[i].name
                    )));
                }
            }
        }
        let n_classes = schema.class_labels.len() as u32;
        if labels.iter().any(|&l| l != MISSING_CODE && l >= n_classes) {
            return Err(DataError::Invalid("label code outside the class list".into()));
        }
        Ok(Dataset { schema, columns, labels, row_count })
    }

    /// Convenience constructor for all-continuous data, used by generators
    /// and tests.
    pub fn from_continuous(
        attr_names: &[&str],
        columns: Vec<Vec<f64>>,
        labels: Vec<u32>,
        class_labels: &[&str],
    ) -> Result<Self, DataError> {
        let schema = Schema {
            attributes: attr_names
                .iter()
                .map(|n| Attribute { name: (*n).into(), kind: AttributeKind::Continuous })
                .collect(),
            class_attribute: "class".into(),
            class_labels: class_labels.iter().map(|s| (*s).into()).collect(),
        };
        let columns = columns.into_iter().map(Column::Continuous).collect();
        Dataset::from_parts(schema, columns, labels)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn n_attributes(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.schema.class_labels.len()
    }

    pub fn column(&self, attr: usize) -> &Column {
        &self.columns[attr]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, row: usize) -> u32 {
        self.labels[row]
    }

    /// Category names of a categorical attribute; `None` for continuous.
    pub fn categories(&self, attr: usize) -> Option<&[String]> {
        match &self.columns[attr] {
            Column::Continuous(_) => None,
            Column::Categorical { categories, .. } => Some(categories),
        }
    }

    pub fn attr_value(&self, attr: usize, row: usize) -> AttrValue {
        match &self.columns[attr] {
            Column::Continuous(v) => {
                let x = v[row];
                if x.is_nan() {
                    AttrValue::Missing
                } else {
                    AttrValue::Continuous(x)
                }
            }
            Column::Categorical { codes, .. } => {
                let c = codes[row];
                if c == MISSING_CODE {
                    AttrValue::Missing
                } else {
                    AttrValue::Categorical(c)
                }
            }
        }
    }

    pub fn has_missing(&self) -> bool {
        if self.labels.contains(&MISSING_CODE) {
            return true;
        }
        self.columns.iter().any(|col| match col {
            Column::Continuous(v) => v.iter().any(|x| x.is_nan()),
            Column::Categorical { codes, .. } => codes.contains(&MISSING_CODE),
        })
    }

    /// A view covering every row.
    pub fn all_rows(&self) -> RowView<'_> {
        RowView { ds: self, rows: (0..self.row_count as u32).collect() }
    }

    /// A view over the given row indices.
    pub fn select_rows(&self, rows: &[u32]) -> Result<RowView<'_>, DataError> {
        if let Some(&bad) = rows.iter().find(|&&r| r as usize >= self.row_count) {
            return Err(DataError::Invalid(format!(
                "row index {bad} out of range for {} rows",
                self.row_count
            )));
        }
        Ok(RowView { ds: self, rows: rows.to_vec() })
    }

    /// The schema-plus-categories record embedded in serialized models.
    pub fn dictionary(&self) -> DataDictionary {
        let categories = self
            .columns
            .iter()
            .map(|col| match col {
                Column::Continuous(_) => None,
                Column::Categorical { categories, .. } => Some(categories.clone()),
            })
            .collect();
        DataDictionary { schema: self.schema.clone(), categories }
    }

    /// Applies a missing-value policy, returning a dataset with no missing
    /// predictor values or labels. Both policies drop rows whose label is
    /// missing, since such rows cannot contribute to supervised training.
    pub fn apply_missing_policy(&self, policy: MissingPolicy) -> Result<Dataset, DataError> {
        if !self.has_missing() {
            return Ok(self.clone());
        }
        match policy {
            MissingPolicy::DropRows => {
                let keep: Vec<usize> = (0..self.row_count)
                    .filter(|&r| {
                        self.labels[r] != MISSING_CODE
                            && (0..self.columns.len())
                                .all(|a| self.attr_value(a, r) != AttrValue::Missing)
                    })
                    .collect();
                if keep.is_empty() {
                    return Err(DataError::NoDataRows);
                }
                Ok(self.take_rows(&keep))
            }
            MissingPolicy::ImputeMeanMode => {
                let keep: Vec<usize> =
                    (0..self.row_count).filter(|&r| self.labels[r] != MISSING_CODE).collect();
                if keep.is_empty() {
                    return Err(DataError::NoDataRows);
                }
                let mut ds = self.take_rows(&keep);
                for (i, col) in ds.columns.iter_mut().enumerate() {
                    match col {
                        Column::Continuous(v) => {
                            let present: Vec<f64> =
                                v.iter().copied().filter(|x| !x.is_nan()).collect();
                            if present.is_empty() {
                                return Err(DataError::ColumnAllMissing {
                                    column: ds.schema.attributes[i].name.clone(),
                                });
                            }
                            let mean = present.iter().sum::<f64>() / present.len() as f64;
                            for x in v.iter_mut() {
                                if x.is_nan() {
                                    *x = mean;
                                }
                            }
                        }
                        Column::Categorical { codes, categories } => {
                            let mut counts = vec![0usize; categories.len()];
                            for &c in codes.iter() {
                                if c != MISSING_CODE {
                                    counts[c as usize] += 1;
                                }
                            }
                            // Mode; ties go to the lowest code.
                            let Some(mode) = argmax_tie_lowest(&counts) else {
                                return Err(DataError::ColumnAllMissing {
                                    column: ds.schema.attributes[i].name.clone(),
                                });
                            };
                            for c in codes.iter_mut() {
                                if *c == MISSING_CODE {
                                    *c = mode as u32;
                                }
                            }
                        }
                    }
                }
                Ok(ds)
            }
        }
    }

    fn take_rows(&self, keep: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|col| match col {
                Column::Continuous(v) => {
                    Column::Continuous(keep.iter().map(|&r| v[r]).collect())
                }
                Column::Categorical { codes, categories } => Column::Categorical {
                    codes: keep.iter().map(|&r| codes[r]).collect(),
                    categories: categories.clone(),
                },
            })
            .collect();
        let labels = keep.iter().map(|&r| self.labels[r]).collect();
        Dataset {
            schema: self.schema.clone(),
            columns,
            labels,
            row_count: keep.len(),
        }
    }
}

/// Index of the largest count; ties go to the lowest index. `None` when all
/// counts are zero.
pub(crate) fn argmax_tie_lowest(counts: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (i, &c) in counts.iter().enumerate() {
        if c > 0 && best.is_none_or(|(_, bc)| c > bc) {
            best = Some((i, c));
        }
    }
    best.map(|(i, _)| i)
}

/// A borrowed subset of dataset rows; induction works entirely on views.
#[derive(Debug, Clone)]
pub struct RowView<'a> {
    ds: &'a Dataset,
    rows: Vec<u32>,
}

impl<'a> RowView<'a> {
    pub fn dataset(&self) -> &'a Dataset {
        self.ds
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row_ids(&self) -> &[u32] {
        &self.rows
    }

    /// Label of the i-th row in this view.
    pub fn label_at(&self, i: usize) -> u32 {
        self.ds.labels[self.rows[i] as usize]
    }

    /// Value of the i-th row in this view for the given attribute.
    pub fn value_at(&self, attr: usize, i: usize) -> AttrValue {
        self.ds.attr_value(attr, self.rows[i] as usize)
    }

    /// Per-class label counts over this view; labels must not be missing.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.ds.n_classes()];
        for &r in &self.rows {
            let l = self.ds.labels[r as usize];
            debug_assert_ne!(l, MISSING_CODE, "class_counts on rows with missing labels");
            counts[l as usize] += 1;
        }
        counts
    }

    /// Narrows this view to the given subset of its dataset's row indices.
    pub fn narrow(&self, rows: Vec<u32>) -> RowView<'a> {
        debug_assert!(rows.iter().all(|&r| (r as usize) < self.ds.row_count));
        RowView { ds: self.ds, rows }
    }

    /// Non-missing values of a continuous attribute paired with their labels.
    pub(crate) fn gather_continuous(&self, attr: usize) -> (Vec<f64>, Vec<u32>) {
        let Column::Continuous(values) = self.ds.column(attr) else {
            panic!("gather_continuous on a categorical attribute");
        };
        let mut vals = Vec::with_capacity(self.rows.len());
        let mut labs = Vec::with_capacity(self.rows.len());
        for &r in &self.rows {
            let x = values[r as usize];
            if !x.is_nan() {
                vals.push(x);
                labs.push(self.ds.labels[r as usize]);
            }
        }
        (vals, labs)
    }
}

/// Schema plus category lists, embedded in every serialized model so that
/// prediction inputs can be mapped onto the training-time codes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataDictionary {
    pub schema: Schema,
    /// Per attribute: `Some(categories)` for categorical, `None` for
    /// continuous. Parallel to `schema.attributes`.
    pub categories: Vec<Option<Vec<String>>>,
}

impl DataDictionary {
    /// Stable 64-bit FNV-1a digest of the schema and category lists,
    /// rendered as 16 hex digits. Trained models refuse datasets whose
    /// dictionary hashes differently.
    pub fn fingerprint(&self) -> String {
        let mut h = Fnv64::new();
        for (attr, cats) in self.schema.attributes.iter().zip(&self.categories) {
            h.update(attr.name.as_bytes());
            h.update(&[0xff, match attr.kind {
                AttributeKind::Continuous => 1,
                AttributeKind::Categorical => 2,
            }]);
            if let Some(cats) = cats {
                for c in cats {
                    h.update(c.as_bytes());
                    h.update(&[0xfe]);
                }
            }
            h.update(&[0xfd]);
        }
        h.update(self.schema.class_attribute.as_bytes());
        h.update(&[0xfc]);
        for l in &self.schema.class_labels {
            h.update(l.as_bytes());
            h.update(&[0xfb]);
        }
        format!("{:016x}", h.finish())
    }
}

struct Fnv64(u64);

impl Fnv64 {
    fn new() -> Self {
        Fnv64(0xcbf2_9ce4_8422_2325)
    }

    fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeKind::Continuous => write!(f, "continuous"),
            AttributeKind::Categorical => write!(f, "categorical"),
        }
    }
}
