//! Labeled datasets for the logistic-regression posterior.
//!
//! The STATLOG-style files are plain numeric tables, one observation per
//! line, comma- or whitespace-separated, label in a caller-chosen column.
//! Parsing is locale-independent (decimal point only).

use crate::error::{Error, Result};
use crate::Matrix;
use std::path::Path;

/// A design matrix with binary labels. The first design column is always the
/// intercept (all ones).
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    design: Matrix,
    labels: Vec<u8>,
    feature_names: Vec<String>,
}

impl LabeledDataset {
    /// Assembles a dataset from parts, enforcing the structural invariants.
    pub fn from_parts(design: Matrix, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        if design.nrows() != labels.len() {
            return Err(Error::Validation(format!(
                "design has {} rows but there are {} labels",
                design.nrows(),
                labels.len()
            )));
        }
        if feature_names.len() != design.ncols() {
            return Err(Error::Validation(format!(
                "design has {} columns but {} feature names",
                design.ncols(),
                feature_names.len()
            )));
        }
        if labels.iter().any(|&y| y > 1) {
            return Err(Error::Validation("labels must lie in {0, 1}".into()));
        }
        if design.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("design contains non-finite entries".into()));
        }
        if design.column(0).iter().any(|&x| x != 1.0) {
            return Err(Error::Validation(
                "first design column must be the all-ones intercept".into(),
            ));
        }
        Ok(LabeledDataset {
            design,
            labels,
            feature_names,
        })
    }

    pub fn design(&self) -> &Matrix {
        &self.design
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of design columns (intercept included).
    pub fn dim(&self) -> usize {
        self.design.ncols()
    }
}

/// Loads a numeric table, prepends an intercept column and optionally
/// standardizes the covariates to sample mean 0 and variance 1.
///
/// `label_column` is the 0-based column index holding the labels. Labels must
/// form the set {0, 1} or {1, 2}; the latter is shifted down by one, matching
/// the STATLOG convention. Constant covariate columns standardize to all
/// zeros (centered, not scaled).
pub fn load_statlog_csv(
    path: impl AsRef<Path>,
    label_column: usize,
    standardize: bool,
) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_statlog(&text, label_column, standardize)
}

/// Text-level parser behind [`load_statlog_csv`]; exposed so untrusted input
/// can be driven through it directly.
pub fn parse_statlog(text: &str, label_column: usize, standardize: bool) -> Result<LabeledDataset> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = if line.contains(',') {
            line.split(',').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        let mut row = Vec::with_capacity(fields.len());
        for (col, field) in fields.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::parse(
                    line_no,
                    format!("column {col}: '{field}' is not a number"),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::parse(line_no, format!("column {col}: non-finite value")));
            }
            row.push(v);
        }
        if rows.is_empty() {
            width = row.len();
            if width < 2 {
                return Err(Error::parse(line_no, "need at least one feature and a label"));
            }
        } else if row.len() != width {
            return Err(Error::parse(
                line_no,
                format!("expected {width} columns, found {}", row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Validation("dataset is empty".into()));
    }
    if label_column >= width {
        return Err(Error::Validation(format!(
            "label column {label_column} out of range for {width}-column table"
        )));
    }

    let raw_labels: Vec<f64> = rows.iter().map(|r| r[label_column]).collect();
    let labels = coerce_labels(&raw_labels)?;

    let n = rows.len();
    let n_feat = width - 1;
    // intercept first, then the covariates in file order
    let mut design = Matrix::zeros(n, n_feat + 1);
    for (i, row) in rows.iter().enumerate() {
        design[(i, 0)] = 1.0;
        let mut j = 1;
        for (col, &v) in row.iter().enumerate() {
            if col == label_column {
                continue;
            }
            design[(i, j)] = v;
            j += 1;
        }
    }

    if standardize {
        for j in 1..design.ncols() {
            let col = design.column(j);
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0).max(1.0);
            let sd = var.sqrt();
            for i in 0..n {
                let centered = design[(i, j)] - mean;
                design[(i, j)] = if sd > 0.0 { centered / sd } else { 0.0 };
            }
        }
    }

    let mut names = Vec::with_capacity(n_feat + 1);
    names.push("intercept".to_string());
    let mut k = 0usize;
    for col in 0..width {
        if col != label_column {
            names.push(format!("x{k}"));
            k += 1;
        }
    }

    LabeledDataset::from_parts(design, labels, names)
}

fn coerce_labels(raw: &[f64]) -> Result<Vec<u8>> {
    let mut distinct: Vec<f64> = Vec::new();
    for &v in raw {
        if v.fract() != 0.0 {
            return Err(Error::Validation(format!("label value {v} is not an integer")));
        }
        if !distinct.contains(&v) {
            distinct.push(v);
        }
    }
    distinct.sort_by(f64::total_cmp);
    let ok_01 = distinct.iter().all(|&v| v == 0.0 || v == 1.0);
    let ok_12 = distinct.iter().all(|&v| v == 1.0 || v == 2.0) && distinct.contains(&2.0);
    if ok_01 {
        Ok(raw.iter().map(|&v| v as u8).collect())
    } else if ok_12 {
        Ok(raw.iter().map(|&v| (v - 1.0) as u8).collect())
    } else {
        Err(Error::Validation(format!(
            "labels must form {{0,1}} or {{1,2}}, found {distinct:?}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_arithmetic_on_small_table() {
        let text = "0.5 1.2 0\n0.1 -0.3 1\n2.0 0.4 1\n";
        let ds = parse_statlog(text, 2, false).unwrap();
        assert_eq!(ds.design().shape(), (3, 3)); // intercept + 2 features
        assert_eq!(ds.labels(), &[0, 1, 1]);
        assert_eq!(ds.feature_names()[0], "intercept");
        assert!(ds.design().column(0).iter().all(|&x| x == 1.0));
    }

    #[test]
    fn comma_and_whitespace_delimiters_agree() {
        let a = parse_statlog("1.5, 2.5, 1\n0.5, 1.0, 0\n", 2, false).unwrap();
        let b = parse_statlog("1.5 2.5 1\n0.5 1.0 0\n", 2, false).unwrap();
        assert_eq!(a.design(), b.design());
        assert_eq!(a.labels(), b.labels());
    }

    #[test]
    fn standardization_centers_and_scales() {
        let text = "2.0 1\n4.0 0\n6.0 1\n8.0 0\n";
        let ds = parse_statlog(text, 1, true).unwrap();
        let col: Vec<f64> = ds.design().column(1).iter().cloned().collect();
        let mean: f64 = col.iter().sum::<f64>() / 4.0;
        let var: f64 = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_column_standardizes_to_zeros() {
        let text = "7.0 0.5 1\n7.0 0.7 0\n7.0 0.1 1\n";
        let ds = parse_statlog(text, 2, true).unwrap();
        assert!(ds.design().column(1).iter().all(|&x| x == 0.0));
        assert!(ds.design().column(2).iter().any(|&x| x != 0.0));
    }

    #[test]
    fn statlog_one_two_labels_shift_down() {
        let ds = parse_statlog("0.5 1\n0.2 2\n0.9 2\n", 1, false).unwrap();
        assert_eq!(ds.labels(), &[0, 1, 1]);
    }

    #[test]
    fn malformed_row_names_line() {
        let err = parse_statlog("1 2 0\n1 oops 1\n", 2, false).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("oops"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ragged_row_names_line() {
        let err = parse_statlog("1 2 0\n1 2\n", 2, false).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_binary_labels_rejected() {
        assert!(parse_statlog("1 0\n1 3\n", 1, false).is_err());
        assert!(parse_statlog("1 0.5\n1 1\n", 1, false).is_err());
    }

    #[test]
    fn label_column_out_of_range() {
        assert!(parse_statlog("1 0\n", 5, false).is_err());
    }
}
