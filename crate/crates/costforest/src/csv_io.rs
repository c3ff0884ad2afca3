//! CSV ingestion and output.
//!
//! Files need a header row. The label column holds 0/1, four columns hold
//! the per-example costs and every other column, unless dropped, is a
//! numeric feature. Line numbers in errors count the header as line 1.

use std::path::Path;

use costforest_core::{AugmentedExample, CostMatrixRow, CostedDataset, Reasonableness};

use crate::error::{CliError, CliResult};

pub const DEFAULT_COST_COLS: [&str; 4] = ["c_tp", "c_fp", "c_fn", "c_tn"];

#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub label_col: String,
    /// Columns holding `c_tp`, `c_fp`, `c_fn`, `c_tn`, in that order.
    pub cost_cols: [String; 4],
    pub drop_cols: Vec<String>,
    pub mode: Reasonableness,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            label_col: "label".into(),
            cost_cols: DEFAULT_COST_COLS.map(String::from),
            drop_cols: Vec::new(),
            mode: Reasonableness::Strict,
        }
    }
}

impl Schema {
    pub fn with_cost_cols(mut self, cols: &[String]) -> CliResult<Self> {
        let cols: [String; 4] = cols
            .to_vec()
            .try_into()
            .map_err(|c: Vec<String>| CliError::Usage(format!("expected 4 cost columns (tp,fp,fn,tn), got {}", c.len())))?;
        self.cost_cols = cols;
        Ok(self)
    }
}

pub fn parse_reasonableness(s: &str) -> Option<Reasonableness> {
    match s {
        "strict" => Some(Reasonableness::Strict),
        "non_strict" | "non-strict" => Some(Reasonableness::NonStrict),
        "relaxed" => Some(Reasonableness::Relaxed),
        _ => None,
    }
}

/// A CSV file kept as text, so columns can be appended or rows selected
/// without reformatting values.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub origin: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> CliResult<Self> {
        let origin = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|e| CliError::Data(format!("cannot open {origin}: {e}")))?;
        Self::from_reader(file, &origin)
    }

    pub fn from_reader(reader: impl std::io::Read, origin: &str) -> CliResult<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| CliError::Data(format!("{origin}: cannot read header: {e}")))?
            .iter()
            .map(String::from)
            .collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(CliError::Data(format!("{origin}: missing header row")));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = headers.iter().find(|h| !seen.insert(h.as_str())) {
            return Err(CliError::Data(format!("{origin}: duplicate column `{dup}`")));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| CliError::Data(format!("{origin}:{}: {e}", i + 2)))?;
            rows.push(rec.iter().map(String::from).collect());
        }
        Ok(Self { origin: origin.to_string(), headers, rows })
    }

    pub fn column(&self, name: &str) -> CliResult<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("{}: no column named `{name}`", self.origin)))
    }

    /// Parses column `col` of row `row` as a finite number.
    pub fn number(&self, row: usize, col: usize) -> CliResult<f64> {
        let raw = &self.rows[row][col];
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(CliError::Data(format!(
                "{}:{}: column `{}`: `{raw}` is not a finite number",
                self.origin,
                row + 2,
                self.headers[col]
            ))),
        }
    }

    pub fn numeric_column(&self, name: &str) -> CliResult<Vec<f64>> {
        let c = self.column(name)?;
        (0..self.rows.len()).map(|r| self.number(r, c)).collect()
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_rows(path, &self.headers, self.rows.iter().map(|r| r.iter().map(String::as_str)))
    }
}

/// Writes a header and rows to `path`.
pub fn write_rows<'a, R, I>(path: &Path, headers: &[String], rows: R) -> CliResult<()>
where
    R: IntoIterator<Item = I>,
    I: IntoIterator<Item = &'a str>,
{
    let fail = |e: &dyn std::fmt::Display| CliError::Internal(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(|e| fail(&e))?;
    w.write_record(headers).map_err(|e| fail(&e))?;
    for r in rows {
        w.write_record(r).map_err(|e| fail(&e))?;
    }
    w.flush().map_err(|e| fail(&e))
}

/// Shortest text that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

fn feature_columns(table: &Table, schema: &Schema) -> CliResult<Vec<usize>> {
    for d in &schema.drop_cols {
        table.column(d)?;
    }
    let reserved: Vec<&str> = std::iter::once(schema.label_col.as_str())
        .chain(schema.cost_cols.iter().map(String::as_str))
        .chain(schema.drop_cols.iter().map(String::as_str))
        .collect();
    let cols: Vec<usize> = (0..table.headers.len()).filter(|&c| !reserved.contains(&table.headers[c].as_str())).collect();
    if cols.is_empty() {
        return Err(CliError::Data(format!("{}: schema leaves no feature columns", table.origin)));
    }
    Ok(cols)
}

/// Builds a validated dataset from a table.
pub fn dataset_from_table(table: &Table, schema: &Schema) -> CliResult<CostedDataset> {
    let features = feature_columns(table, schema)?;
    build_dataset(table, schema, &features)
}

/// Like [`dataset_from_table`] but with the features taken from the named
/// columns in that order, as stored in a model file.
pub fn dataset_with_features(table: &Table, schema: &Schema, names: &[String]) -> CliResult<CostedDataset> {
    let features = names.iter().map(|n| table.column(n)).collect::<CliResult<Vec<_>>>()?;
    build_dataset(table, schema, &features)
}

fn build_dataset(table: &Table, schema: &Schema, features: &[usize]) -> CliResult<CostedDataset> {
    let label = table.column(&schema.label_col)?;
    let costs = schema.cost_cols.iter().map(|c| table.column(c)).collect::<CliResult<Vec<_>>>()?;
    if table.rows.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", table.origin)));
    }
    let mut examples = Vec::with_capacity(table.rows.len());
    for r in 0..table.rows.len() {
        let y = match table.rows[r][label].as_str() {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(CliError::Data(format!(
                    "{}:{}: label `{other}` is not 0 or 1",
                    table.origin,
                    r + 2
                )))
            }
        };
        let c: Vec<f64> = costs.iter().map(|&c| table.number(r, c)).collect::<CliResult<_>>()?;
        let x: Vec<f64> = features.iter().map(|&c| table.number(r, c)).collect::<CliResult<_>>()?;
        examples.push(AugmentedExample::new(x, y, CostMatrixRow::new(c[0], c[1], c[2], c[3])));
    }
    let names = features.iter().map(|&c| table.headers[c].clone()).collect();
    let data = CostedDataset::new(examples, schema.mode).map_err(|e| located(e, &table.origin))?;
    Ok(data.with_feature_names(names)?)
}

/// Core row errors are zero-based data rows; report them as file lines.
fn located(e: costforest_core::Error, origin: &str) -> CliError {
    use costforest_core::Error as E;
    match e {
        E::InvalidCost { row, reason } => CliError::Data(format!("{origin}:{}: invalid costs: {reason}", row + 2)),
        E::InvalidExample { row, reason } => CliError::Data(format!("{origin}:{}: {reason}", row + 2)),
        other => CliError::Data(format!("{origin}: {other}")),
    }
}

pub fn load_csv(path: &Path, schema: &Schema) -> CliResult<CostedDataset> {
    dataset_from_table(&Table::read(path)?, schema)
}

/// Feature rows for prediction, taken from the named columns in the given
/// order. Other columns are ignored.
pub fn feature_rows(table: &Table, names: &[String]) -> CliResult<Vec<Vec<f64>>> {
    let cols = names.iter().map(|n| table.column(n)).collect::<CliResult<Vec<_>>>()?;
    (0..table.rows.len())
        .map(|r| cols.iter().map(|&c| table.number(r, c)).collect())
        .collect()
}

/// Writes a dataset back out with its feature names, label and costs.
pub fn write_dataset(path: &Path, data: &CostedDataset, schema: &Schema) -> CliResult<()> {
    let names: Vec<String> = match data.feature_names() {
        Some(n) => n.to_vec(),
        None => (0..data.k()).map(|j| format!("x{j}")).collect(),
    };
    let mut headers = names;
    headers.push(schema.label_col.clone());
    headers.extend(schema.cost_cols.iter().cloned());
    let rows: Vec<Vec<String>> = data
        .examples()
        .iter()
        .map(|e| {
            let c = e.costs;
            e.features
                .iter()
                .map(|&v| format_number(v))
                .chain(std::iter::once(e.label.to_string()))
                .chain([c.c_tp, c.c_fp, c.c_fn, c.c_tn].map(format_number))
                .collect()
        })
        .collect();
    write_rows(path, &headers, rows.iter().map(|r| r.iter().map(String::as_str)))
}
