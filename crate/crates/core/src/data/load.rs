//! File loading: delimited text with kind inference, dictionary-guided
//! loading for prediction inputs, a flat-file ARFF subset, and a writer that
//! round-trips loadable files.

use super::{
    Attribute, AttributeKind, Column, DataDictionary, DataError, Dataset, Schema, MISSING_CODE,
};
use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

/// Picks a column either by header name or by zero-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Name(String),
    Index(usize),
}

impl ColumnSelector {
    /// Parses a selector string: an existing column name wins, otherwise a
    /// pure integer is a position.
    pub fn parse(text: &str) -> ColumnSelector {
        match text.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(text.to_string()),
        }
    }

    fn resolve(&self, names: &[String]) -> Result<usize, DataError> {
        match self {
            ColumnSelector::Name(n) => names
                .iter()
                .position(|c| c == n)
                .ok_or_else(|| DataError::UnknownColumn(n.clone())),
            ColumnSelector::Index(i) => {
                if *i < names.len() {
                    Ok(*i)
                } else {
                    Err(DataError::UnknownColumn(format!("#{i}")))
                }
            }
        }
    }
}

/// Parsing and typing options for delimited files.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Class column; defaults to the last column not being ignored.
    pub class_column: Option<ColumnSelector>,
    /// Tokens (after whitespace trimming) that mean "value absent".
    pub missing_tokens: Vec<String>,
    /// Forces the kind of specific columns, overriding inference.
    pub kind_overrides: Vec<(ColumnSelector, AttributeKind)>,
    /// A numeric column needs more than this many distinct values to be
    /// inferred continuous.
    pub distinct_threshold: usize,
    /// Columns to drop entirely (identifiers and the like).
    pub ignored_columns: Vec<ColumnSelector>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: b',',
            has_header: true,
            class_column: None,
            missing_tokens: vec!["?".into(), "".into()],
            kind_overrides: Vec::new(),
            distinct_threshold: 10,
            ignored_columns: Vec::new(),
        }
    }
}

impl LoadOptions {
    fn is_missing(&self, token: &str) -> bool {
        self.missing_tokens.iter().any(|t| t == token)
    }
}

/// Column names plus row-major tokens, before any typing decisions.
struct RawTable {
    names: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_raw_csv(path: &Path, opts: &LoadOptions) -> Result<RawTable, DataError> {
    let file = File::open(path)
        .map_err(|e| DataError::Io { path: path.display().to_string(), source: e })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .delimiter(opts.delimiter)
        .from_reader(file);

    let mut names: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<String> = record.iter().map(str::to_string).collect();
        match &names {
            None if opts.has_header => names = Some(fields),
            None => {
                names = Some((0..fields.len()).map(|i| format!("c{i}")).collect());
                rows.push(fields);
            }
            Some(n) => {
                if fields.len() != n.len() {
                    return Err(DataError::RaggedRow {
                        row: line,
                        found: fields.len(),
                        expected: n.len(),
                    });
                }
                rows.push(fields);
            }
        }
    }
    let names = names.ok_or(DataError::NoDataRows)?;
    if rows.is_empty() {
        return Err(DataError::NoDataRows);
    }
    Ok(RawTable { names, rows })
}

/// Loads a delimited file, inferring each predictor's kind unless overridden.
///
/// A column is continuous when every non-missing token parses as a number
/// and the distinct parsed values exceed `distinct_threshold`; otherwise it
/// is categorical with codes in first-appearance order. Class labels are
/// coded in first-appearance order as well.
pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<Dataset, DataError> {
    let raw = read_raw_csv(path, opts)?;
    dataset_from_raw(raw, opts, None)
}

/// Shared assembly for delimited text and the ARFF data section. When
/// `declared` is given (ARFF), kinds and category orders come from it
/// instead of inference.
fn dataset_from_raw(
    raw: RawTable,
    opts: &LoadOptions,
    declared: Option<Vec<DeclaredAttribute>>,
) -> Result<Dataset, DataError> {
    let width = raw.names.len();
    let mut ignored = vec![false; width];
    for sel in &opts.ignored_columns {
        ignored[sel.resolve(&raw.names)?] = true;
    }
    let class_idx = match &opts.class_column {
        Some(sel) => sel.resolve(&raw.names)?,
        None => (0..width)
            .rev()
            .find(|&i| !ignored[i])
            .ok_or_else(|| DataError::Invalid("every column is ignored".into()))?,
    };
    ignored[class_idx] = false;

    let predictor_idx: Vec<usize> =
        (0..width).filter(|&i| i != class_idx && !ignored[i]).collect();

    let mut attributes = Vec::with_capacity(predictor_idx.len());
    let mut columns = Vec::with_capacity(predictor_idx.len());
    for &col in &predictor_idx {
        let name = raw.names[col].clone();
        let kind = match &declared {
            Some(decls) => decls[col].kind(),
            None => resolve_kind(&raw, col, opts)?,
        };
        let column = match kind {
            AttributeKind::Continuous => {
                Column::Continuous(parse_continuous(&raw, col, opts)?)
            }
            AttributeKind::Categorical => match &declared {
                Some(decls) => encode_declared(&raw, col, opts, decls)?,
                None => encode_first_appearance(&raw, col, opts),
            },
        };
        attributes.push(Attribute { name, kind });
        columns.push(column);
    }

    let (class_labels, labels) = match &declared {
        Some(decls) => {
            if decls[class_idx].values.is_none() {
                return Err(DataError::Arff {
                    line: 0,
                    message: format!(
                        "class attribute {:?} must be nominal",
                        raw.names[class_idx]
                    ),
                });
            }
            let Column::Categorical { codes, categories } =
                encode_declared(&raw, class_idx, opts, decls)?
            else {
                unreachable!()
            };
            (categories, codes)
        }
        None => {
            let Column::Categorical { codes, categories } =
                encode_first_appearance(&raw, class_idx, opts)
            else {
                unreachable!()
            };
            (categories, codes)
        }
    };
    if class_labels.is_empty() {
        return Err(DataError::NoClassLabels(raw.names[class_idx].clone()));
    }

    let schema = Schema {
        attributes,
        class_attribute: raw.names[class_idx].clone(),
        class_labels,
    };
    Dataset::from_parts(schema, columns, labels)
}

fn resolve_kind(raw: &RawTable, col: usize, opts: &LoadOptions) -> Result<AttributeKind, DataError> {
    for (sel, kind) in &opts.kind_overrides {
        if sel.resolve(&raw.names)? == col {
            return Ok(*kind);
        }
    }
    let mut distinct: HashSet<u64> = HashSet::new();
    for row in &raw.rows {
        let token = row[col].as_str();
        if opts.is_missing(token) {
            continue;
        }
        match token.parse::<f64>() {
            // Normalize -0.0 so it does not count as a second distinct value.
            Ok(v) => {
                distinct.insert((v + 0.0).to_bits());
            }
            Err(_) => return Ok(AttributeKind::Categorical),
        }
    }
    if distinct.len() > opts.distinct_threshold {
        Ok(AttributeKind::Continuous)
    } else {
        Ok(AttributeKind::Categorical)
    }
}

fn parse_continuous(raw: &RawTable, col: usize, opts: &LoadOptions) -> Result<Vec<f64>, DataError> {
    let mut values = Vec::with_capacity(raw.rows.len());
    for (r, row) in raw.rows.iter().enumerate() {
        let token = row[col].as_str();
        if opts.is_missing(token) {
            values.push(f64::NAN);
        } else {
            let v = token.parse::<f64>().map_err(|_| DataError::UnparseableNumeric {
                column: raw.names[col].clone(),
                row: r + 1,
                token: token.to_string(),
            })?;
            values.push(v);
        }
    }
    Ok(values)
}

fn encode_first_appearance(raw: &RawTable, col: usize, opts: &LoadOptions) -> Column {
    let mut categories: Vec<String> = Vec::new();
    let mut codes = Vec::with_capacity(raw.rows.len());
    for row in &raw.rows {
        let token = row[col].as_str();
        if opts.is_missing(token) {
            codes.push(MISSING_CODE);
            continue;
        }
        let code = match categories.iter().position(|c| c == token) {
            Some(i) => i,
            None => {
                categories.push(token.to_string());
                categories.len() - 1
            }
        };
        codes.push(code as u32);
    }
    Column::Categorical { codes, categories }
}

fn encode_declared(
    raw: &RawTable,
    col: usize,
    opts: &LoadOptions,
    decls: &[DeclaredAttribute],
) -> Result<Column, DataError> {
    let categories = decls[col].values.clone().expect("declared nominal attribute");
    let mut codes = Vec::with_capacity(raw.rows.len());
    for (r, row) in raw.rows.iter().enumerate() {
        let token = row[col].as_str();
        if opts.is_missing(token) {
            codes.push(MISSING_CODE);
            continue;
        }
        let code = categories.iter().position(|c| c == token).ok_or_else(|| DataError::Arff {
            line: 0,
            message: format!(
                "data row {} column {:?}: value {:?} not in the declared set",
                r + 1,
                raw.names[col],
                token
            ),
        })?;
        codes.push(code as u32);
    }
    Ok(Column::Categorical { codes, categories })
}

/// Loads a prediction input using a trained model's dictionary: kinds and
/// category codes come from the dictionary, never from inference.
///
/// With a header, columns are matched by name and may appear in any order;
/// extra columns are ignored. Without a header, the file must carry either
/// every dictionary attribute in order (predictions only) or those plus the
/// class column in last position. A category token the model never saw maps
/// to the missing sentinel, which inference routes through fallback children.
/// The class column may be absent entirely; labels then stay missing.
pub fn load_csv_with_dictionary(
    path: &Path,
    opts: &LoadOptions,
    dict: &DataDictionary,
) -> Result<Dataset, DataError> {
    let raw = read_raw_csv(path, opts)?;
    let n_attrs = dict.schema.attributes.len();

    // source[i] = file column holding dictionary attribute i.
    let (source, class_col): (Vec<usize>, Option<usize>) = if opts.has_header {
        let mut source = Vec::with_capacity(n_attrs);
        for attr in &dict.schema.attributes {
            let pos = raw
                .names
                .iter()
                .position(|n| *n == attr.name)
                .ok_or_else(|| DataError::MissingAttribute(attr.name.clone()))?;
            source.push(pos);
        }
        (source, raw.names.iter().position(|n| *n == dict.schema.class_attribute))
    } else if raw.names.len() == n_attrs {
        ((0..n_attrs).collect(), None)
    } else if raw.names.len() == n_attrs + 1 {
        ((0..n_attrs).collect(), Some(n_attrs))
    } else {
        return Err(DataError::WidthMismatch { found: raw.names.len(), expected: n_attrs });
    };

    let mut columns = Vec::with_capacity(n_attrs);
    for (i, attr) in dict.schema.attributes.iter().enumerate() {
        let col = source[i];
        match attr.kind {
            AttributeKind::Continuous => {
                let mut values = Vec::with_capacity(raw.rows.len());
                for (r, row) in raw.rows.iter().enumerate() {
                    let token = row[col].as_str();
                    if opts.is_missing(token) {
                        values.push(f64::NAN);
                    } else {
                        values.push(token.parse::<f64>().map_err(|_| {
                            DataError::UnparseableNumeric {
                                column: attr.name.clone(),
                                row: r + 1,
                                token: token.to_string(),
                            }
                        })?);
                    }
                }
                columns.push(Column::Continuous(values));
            }
            AttributeKind::Categorical => {
                let categories =
                    dict.categories[i].clone().unwrap_or_default();
                let mut codes = Vec::with_capacity(raw.rows.len());
                for row in &raw.rows {
                    let token = row[col].as_str();
                    if opts.is_missing(token) {
                        codes.push(MISSING_CODE);
                        continue;
                    }
                    // Unseen tokens share the missing sentinel: both must
                    // route through the fallback child at inference.
                    match categories.iter().position(|c| c == token) {
                        Some(code) => codes.push(code as u32),
                        None => codes.push(MISSING_CODE),
                    }
                }
                columns.push(Column::Categorical { codes, categories });
            }
        }
    }

    let labels = match class_col {
        Some(col) => {
            let mut labels = Vec::with_capacity(raw.rows.len());
            for row in &raw.rows {
                let token = row[col].as_str();
                if opts.is_missing(token) {
                    labels.push(MISSING_CODE);
                    continue;
                }
                let code = dict
                    .schema
                    .class_labels
                    .iter()
                    .position(|l| l == token)
                    .ok_or_else(|| DataError::UnknownClassLabel {
                        token: token.to_string(),
                        known: dict.schema.class_labels.join(", "),
                    })?;
                labels.push(code as u32);
            }
            labels
        }
        None => vec![MISSING_CODE; raw.rows.len()],
    };

    Dataset::from_parts(dict.schema.clone(), columns, labels)
}

/// One `@attribute` declaration from an ARFF preamble.
struct DeclaredAttribute {
    /// Nominal value list in declared order; `None` means numeric.
    values: Option<Vec<String>>,
}

impl DeclaredAttribute {
    fn kind(&self) -> AttributeKind {
        if self.values.is_some() {
            AttributeKind::Categorical
        } else {
            AttributeKind::Continuous
        }
    }
}

/// Loads the flat-file ARFF subset: `@relation`, `@attribute` with numeric
/// or nominal types, then a dense `@data` section. Nominal codes follow the
/// declared value order, not appearance order. The class column defaults to
/// the last declared attribute and must be nominal.
pub fn load_arff(path: &Path, opts: &LoadOptions) -> Result<Dataset, DataError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DataError::Io { path: path.display().to_string(), source: e })?;

    let mut names: Vec<String> = Vec::new();
    let mut decls: Vec<DeclaredAttribute> = Vec::new();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut in_data = false;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = line.to_ascii_lowercase();
            if lower.starts_with("@relation") {
                continue;
            }
            if lower.starts_with("@attribute") {
                let rest = line["@attribute".len()..].trim_start();
                let (name, spec) = split_arff_name(rest, line_no)?;
                names.push(name);
                decls.push(parse_arff_type(spec.trim(), line_no)?);
                continue;
            }
            if lower.starts_with("@data") {
                in_data = true;
                continue;
            }
            return Err(DataError::Arff {
                line: line_no,
                message: format!("unrecognized declaration {line:?}"),
            });
        }
        if line.starts_with('{') {
            return Err(DataError::Arff {
                line: line_no,
                message: "sparse data rows are not supported".into(),
            });
        }
        let fields = split_quoted(line, ',');
        if fields.len() != names.len() {
            return Err(DataError::RaggedRow {
                row: line_no,
                found: fields.len(),
                expected: names.len(),
            });
        }
        rows.push(fields);
    }

    if names.is_empty() {
        return Err(DataError::Arff { line: 0, message: "no attribute declarations".into() });
    }
    if rows.is_empty() {
        return Err(DataError::NoDataRows);
    }
    dataset_from_raw(RawTable { names, rows }, opts, Some(decls))
}

fn split_arff_name(rest: &str, line: usize) -> Result<(String, &str), DataError> {
    let rest = rest.trim_start();
    let mut chars = rest.char_indices();
    match chars.next() {
        Some((_, q)) if q == '\'' || q == '"' => {
            for (i, c) in chars {
                if c == q {
                    return Ok((rest[1..i].to_string(), &rest[i + 1..]));
                }
            }
            Err(DataError::Arff { line, message: "unterminated attribute name quote".into() })
        }
        Some(_) => match rest.find(|c: char| c.is_whitespace() || c == '{') {
            Some(i) => Ok((rest[..i].to_string(), &rest[i..])),
            None => {
                Err(DataError::Arff { line, message: "attribute declaration has no type".into() })
            }
        },
        None => Err(DataError::Arff { line, message: "empty attribute declaration".into() }),
    }
}

fn parse_arff_type(spec: &str, line: usize) -> Result<DeclaredAttribute, DataError> {
    if spec.starts_with('{') {
        let Some(end) = spec.find('}') else {
            return Err(DataError::Arff { line, message: "unterminated nominal value list".into() });
        };
        let values = split_quoted(&spec[1..end], ',');
        if values.is_empty() || values.iter().any(String::is_empty) {
            return Err(DataError::Arff { line, message: "empty nominal value".into() });
        }
        return Ok(DeclaredAttribute { values: Some(values) });
    }
    match spec.to_ascii_lowercase().as_str() {
        "numeric" | "real" | "integer" => Ok(DeclaredAttribute { values: None }),
        other => Err(DataError::Arff {
            line,
            message: format!("unsupported attribute type {other:?}"),
        }),
    }
}

/// Splits on a delimiter while honoring single or double quotes, trimming
/// whitespace around each field and stripping one layer of quotes.
fn split_quoted(text: &str, delim: char) -> Vec<String> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut quote: Option<char> = None;
    for c in text.chars() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => current.push(c),
            None if c == '\'' || c == '"' => quote = Some(c),
            None if c == delim => {
                fields.push(current.trim().to_string());
                current.clear();
            }
            None => current.push(c),
        }
    }
    fields.push(current.trim().to_string());
    if fields.len() == 1 && fields[0].is_empty() {
        return Vec::new();
    }
    fields
}

/// Writes a dataset as comma-delimited text with a header row; missing
/// values become `?`. Loading the output with default options reproduces
/// the same logical content.
pub fn write_csv<W: Write>(ds: &Dataset, out: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(out);
    let schema = ds.schema();
    let mut header: Vec<&str> = schema.attributes.iter().map(|a| a.name.as_str()).collect();
    header.push(&schema.class_attribute);
    w.write_record(&header)?;

    for r in 0..ds.row_count() {
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for a in 0..ds.n_attributes() {
            record.push(match ds.column(a) {
                Column::Continuous(v) => {
                    if v[r].is_nan() {
                        "?".to_string()
                    } else {
                        format!("{}", v[r])
                    }
                }
                Column::Categorical { codes, categories } => {
                    if codes[r] == MISSING_CODE {
                        "?".to_string()
                    } else {
                        categories[codes[r] as usize].clone()
                    }
                }
            });
        }
        let label = ds.label(r);
        record.push(if label == MISSING_CODE {
            "?".to_string()
        } else {
            schema.class_labels[label as usize].clone()
        });
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| DataError::Io { path: "<writer>".into(), source: e })?;
    Ok(())
}
