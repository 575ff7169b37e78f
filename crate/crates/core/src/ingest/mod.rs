//! Tabular input: loading, cleaning, normalization, feature selection,
//! splitting and minority-region oversampling.

mod augment;
mod clean;
mod relieff;
mod split;

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

pub use augment::{bootstrap_oversample, TargetRegion};
pub use clean::{filter_features, knn_impute, minmax_normalize, DEFAULT_MAX_BAD_FRACTION};
pub use relieff::{relieff_select, FeatureWeight, RELIEFF_MAX_INSTANCES};
pub use split::{split, SplitSpec};

/// An `n x p` matrix of feature values with names, sample ids, an optional
/// target and a mask of missing cells. Missing cells hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    values: Array2<f64>,
    feature_names: Vec<String>,
    sample_ids: Vec<String>,
    target: Option<Vec<f64>>,
    missing: Array2<bool>,
}

impl FeatureTable {
    /// Builds a table with no missing cells. Non-finite values are rejected.
    pub fn new(
        values: Array2<f64>,
        feature_names: Vec<String>,
        sample_ids: Vec<String>,
        target: Option<Vec<f64>>,
    ) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Schema(
                "non-finite value in a table without a missing mask".into(),
            ));
        }
        let missing = Array2::from_elem(values.dim(), false);
        Self::with_missing(values, feature_names, sample_ids, target, missing)
    }

    /// Builds a table with an explicit missing mask. Masked cells are reset to `NaN`.
    pub fn with_missing(
        mut values: Array2<f64>,
        feature_names: Vec<String>,
        sample_ids: Vec<String>,
        target: Option<Vec<f64>>,
        missing: Array2<bool>,
    ) -> Result<Self> {
        let (n, p) = values.dim();
        if feature_names.len() != p {
            return Err(Error::Schema(format!(
                "{} feature names for {p} columns",
                feature_names.len()
            )));
        }
        if sample_ids.len() != n {
            return Err(Error::Schema(format!(
                "{} sample ids for {n} rows",
                sample_ids.len()
            )));
        }
        if missing.dim() != (n, p) {
            return Err(Error::Schema("missing mask shape differs from values".into()));
        }
        let mut seen = HashSet::with_capacity(p);
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature name '{name}'")));
            }
        }
        if let Some(y) = &target {
            if y.len() != n {
                return Err(Error::Schema(format!(
                    "target has {} entries for {n} rows",
                    y.len()
                )));
            }
        }
        ndarray::Zip::from(&mut values)
            .and(&missing)
            .for_each(|v, &m| {
                if m {
                    *v = f64::NAN;
                }
            });
        Ok(FeatureTable {
            values,
            feature_names,
            sample_ids,
            target,
            missing,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[[row, col]]
    }

    pub fn column(&self, col: usize) -> ArrayView1<'_, f64> {
        self.values.column(col)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn target(&self) -> Option<&[f64]> {
        self.target.as_deref()
    }

    pub fn missing_mask(&self) -> &Array2<bool> {
        &self.missing
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.missing[[row, col]]
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    pub fn with_target(mut self, target: Option<Vec<f64>>) -> Result<Self> {
        if let Some(y) = &target {
            if y.len() != self.n_samples() {
                return Err(Error::Schema(format!(
                    "target has {} entries for {} rows",
                    y.len(),
                    self.n_samples()
                )));
            }
        }
        self.target = target;
        Ok(self)
    }

    /// Keeps only the named features, in the given order.
    pub fn select_features<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| {
                self.feature_index(n.as_ref()).ok_or_else(|| {
                    Error::Alignment(format!("feature '{}' not in table", n.as_ref()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.select_columns(&idx))
    }

    pub(crate) fn select_columns(&self, idx: &[usize]) -> Self {
        FeatureTable {
            values: self.values.select(Axis(1), idx),
            feature_names: idx.iter().map(|&j| self.feature_names[j].clone()).collect(),
            sample_ids: self.sample_ids.clone(),
            target: self.target.clone(),
            missing: self.missing.select(Axis(1), idx),
        }
    }

    /// Rows in the given order (duplicates allowed).
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        FeatureTable {
            values: self.values.select(Axis(0), idx),
            feature_names: self.feature_names.clone(),
            sample_ids: idx.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            target: self
                .target
                .as_ref()
                .map(|y| idx.iter().map(|&i| y[i]).collect()),
            missing: self.missing.select(Axis(0), idx),
        }
    }
}

/// Reads a CSV file. See [`read_csv`].
pub fn load_csv(path: impl AsRef<Path>, target_column: Option<&str>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, target_column)
}

/// Parses a header-first, comma-separated table. Empty cells are missing.
/// A first column named `id` (any case) supplies sample ids; otherwise ids
/// are the 0-based row indices.
pub fn read_csv<R: Read>(reader: R, target_column: Option<&str>) -> Result<FeatureTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_error(&e))?,
        None => return Err(Error::Parse { line: 1, message: "missing header row".into() }),
    };
    let header: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    let has_id = header
        .first()
        .is_some_and(|h| h.eq_ignore_ascii_case("id"));
    let target_idx = match target_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("target column '{name}' not found")))?,
        ),
        None => None,
    };
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|&c| !(has_id && c == 0) && Some(c) != target_idx)
        .collect();
    let feature_names: Vec<String> = feature_cols.iter().map(|&c| header[c].clone()).collect();

    let mut ids = Vec::new();
    let mut cells = Vec::new();
    let mut mask = Vec::new();
    let mut target = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} cells, found {}", header.len(), record.len()),
            });
        }
        ids.push(if has_id {
            record[0].trim().to_string()
        } else {
            ids.len().to_string()
        });
        for &c in &feature_cols {
            match parse_cell(&record[c], line, &header[c])? {
                Some(v) => {
                    cells.push(v);
                    mask.push(false);
                }
                None => {
                    cells.push(f64::NAN);
                    mask.push(true);
                }
            }
        }
        if let Some(t) = target_idx {
            let v = parse_cell(&record[t], line, &header[t])?.ok_or_else(|| Error::Parse {
                line,
                message: format!("empty target cell in column '{}'", header[t]),
            })?;
            target.push(v);
        }
    }
    let n = ids.len();
    let p = feature_names.len();
    let values = Array2::from_shape_vec((n, p), cells).expect("row lengths checked");
    let missing = Array2::from_shape_vec((n, p), mask).expect("row lengths checked");
    FeatureTable::with_missing(
        values,
        feature_names,
        ids,
        target_idx.map(|_| target),
        missing,
    )
}

fn parse_cell(cell: &str, line: u64, column: &str) -> Result<Option<f64>> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(Error::Parse {
            line,
            message: format!("column '{column}': '{cell}' is not a finite number"),
        }),
    }
}

fn csv_error(e: &csv::Error) -> Error {
    Error::Parse {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

/// Writes the table as CSV: optional `id` column, features, then the target
/// as column `y` when present.
pub fn write_csv<W: Write>(t: &FeatureTable, writer: W, include_ids: bool) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = Vec::with_capacity(t.n_features() + 2);
    if include_ids {
        header.push("id");
    }
    header.extend(t.feature_names().iter().map(String::as_str));
    if t.target().is_some() {
        header.push("y");
    }
    wtr.write_record(&header).map_err(write_error)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..t.n_samples() {
        row.clear();
        if include_ids {
            row.push(t.sample_ids()[i].clone());
        }
        for j in 0..t.n_features() {
            row.push(if t.is_missing(i, j) {
                String::new()
            } else {
                t.value(i, j).to_string()
            });
        }
        if let Some(y) = t.target() {
            row.push(y[i].to_string());
        }
        wtr.write_record(&row).map_err(write_error)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Writes the table to `path`. See [`write_csv`].
pub fn save_csv(t: &FeatureTable, path: impl AsRef<Path>, include_ids: bool) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(t, std::io::BufWriter::new(file), include_ids).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

fn write_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<csv output>", io),
        other => Error::Format(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, target: Option<&str>) -> Result<FeatureTable> {
        read_csv(text.as_bytes(), target)
    }

    #[test]
    fn target_column_is_split_off() {
        let t = parse("id,f1,f2,y\na,1,2,0.5\nb,3,4,0.1\nc,5,6,0.9\n", Some("y")).unwrap();
        assert_eq!(t.n_features(), 2);
        assert_eq!(t.n_samples(), 3);
        assert_eq!(t.target().unwrap().len(), 3);
        assert_eq!(t.sample_ids(), ["a", "b", "c"]);
        assert_eq!(t.feature_names(), ["f1", "f2"]);
        assert_eq!(t.value(2, 1), 6.0);
    }

    #[test]
    fn empty_cell_is_missing() {
        let t = parse("f1,f2\n1,\n3,4\n", None).unwrap();
        assert_eq!(t.missing_count(), 1);
        assert!(t.is_missing(0, 1));
        assert_eq!(t.sample_ids(), ["0", "1"]);
    }

    #[test]
    fn short_row_reports_line() {
        let err = parse("f1,f2,f3\n1,2\n3,4,5\n", None).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("f1,f2,f3\n1,2\n", None)
            .unwrap_err()
            .to_string()
            .contains("line 2"));
    }

    #[test]
    fn duplicate_feature_names_rejected() {
        let err = parse("f1,f1\n1,2\n", None).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn non_numeric_cell_rejected() {
        assert!(matches!(
            parse("f1,f2\n1,abc\n", None).unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
    }

    #[test]
    fn csv_round_trip() {
        let t = parse("id,f1,f2,y\na,0.25,,1\nb,1e-3,4,0\n", Some("y")).unwrap();
        let mut buf = Vec::new();
        write_csv(&t, &mut buf, true).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap(), Some("y")).unwrap();
        assert_eq!(back.sample_ids(), t.sample_ids());
        assert_eq!(back.missing_mask(), t.missing_mask());
        assert_eq!(back.target(), t.target());
        assert_eq!(back.value(1, 0), 1e-3);
    }
}
