//! TOML manifests that describe how to load and clean one dataset file.

use super::{
    load_arff, load_csv, AttributeKind, ColumnSelector, DataError, Dataset, LoadOptions,
    MissingPolicy,
};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

/// Parsed manifest contents; all fields except `source` are optional.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    /// Display name; defaults to the source file stem.
    pub name: Option<String>,
    /// Data file path, resolved relative to the manifest's directory.
    pub source: String,
    /// "csv" or "arff"; defaults to the source extension, then "csv".
    pub format: Option<String>,
    /// Single-character field delimiter.
    pub delimiter: Option<String>,
    pub has_header: Option<bool>,
    /// Class column name, or a zero-based position for headerless files.
    pub class_column: Option<String>,
    pub missing_tokens: Option<Vec<String>>,
    pub missing_policy: Option<MissingPolicy>,
    pub distinct_threshold: Option<usize>,
    /// Columns to drop before typing, such as record identifiers.
    pub ignore_columns: Option<Vec<String>>,
    /// Explicit kinds for columns whose inference would guess wrong.
    pub kinds: Option<BTreeMap<String, AttributeKind>>,
}

/// A dataset loaded through its manifest, with the cleaning policy the
/// manifest requested (not yet applied).
#[derive(Debug, Clone)]
pub struct ManifestDataset {
    pub name: String,
    pub dataset: Dataset,
    pub policy: MissingPolicy,
}

fn manifest_err(path: &Path, message: impl Into<String>) -> DataError {
    DataError::Manifest { path: path.display().to_string(), message: message.into() }
}

/// Reads and validates a manifest file without touching the data it names.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest, DataError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DataError::Io { path: path.display().to_string(), source: e })?;
    let manifest: DatasetManifest =
        toml::from_str(&text).map_err(|e| manifest_err(path, e.to_string()))?;
    if let Some(d) = &manifest.delimiter {
        if d.len() != 1 {
            return Err(manifest_err(path, format!("delimiter {d:?} must be one byte")));
        }
    }
    if let Some(f) = &manifest.format {
        if f != "csv" && f != "arff" {
            return Err(manifest_err(path, format!("format {f:?} is not \"csv\" or \"arff\"")));
        }
    }
    Ok(manifest)
}

/// Loads the dataset a manifest describes. Missing-value handling is
/// returned alongside the raw dataset so callers can override the policy.
pub fn load_dataset_from_manifest(path: &Path) -> Result<ManifestDataset, DataError> {
    let manifest = load_manifest(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let source = dir.join(&manifest.source);

    let mut opts = LoadOptions::default();
    if let Some(d) = &manifest.delimiter {
        opts.delimiter = d.as_bytes()[0];
    }
    if let Some(h) = manifest.has_header {
        opts.has_header = h;
    }
    if let Some(c) = &manifest.class_column {
        opts.class_column = Some(ColumnSelector::parse(c));
    }
    if let Some(tokens) = &manifest.missing_tokens {
        opts.missing_tokens = tokens.clone();
    }
    if let Some(t) = manifest.distinct_threshold {
        opts.distinct_threshold = t;
    }
    if let Some(cols) = &manifest.ignore_columns {
        opts.ignored_columns = cols.iter().map(|c| ColumnSelector::parse(c)).collect();
    }
    if let Some(kinds) = &manifest.kinds {
        opts.kind_overrides =
            kinds.iter().map(|(k, v)| (ColumnSelector::parse(k), *v)).collect();
    }

    let format = manifest.format.clone().unwrap_or_else(|| {
        match source.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("arff") => "arff".to_string(),
            _ => "csv".to_string(),
        }
    });
    let dataset = match format.as_str() {
        "arff" => load_arff(&source, &opts)?,
        _ => load_csv(&source, &opts)?,
    };

    let name = manifest.name.clone().unwrap_or_else(|| {
        source
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });
    Ok(ManifestDataset {
        name,
        dataset,
        // Imputation is the default so row counts survive lightly damaged
        // files; manifests opt into dropping.
        policy: manifest.missing_policy.unwrap_or(MissingPolicy::ImputeMeanMode),
    })
}
