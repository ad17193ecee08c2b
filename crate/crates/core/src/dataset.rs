//! Tabular binary-classification data: loading, splitting, projection and
//! resampling.
//!
//! A [`Dataset`] is immutable once built. Every transformation returns a new
//! value, and every random choice is driven by an explicit seed.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::error::{Error, Result};

/// Feature matrix, binary labels and feature names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_rows: usize,
    n_features: usize,
    // row-major, n_rows * n_features
    values: Vec<f64>,
    labels: Vec<u8>,
    names: Vec<String>,
}

/// Train/test split parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Self {
        SplitSpec { train_fraction, seed }
    }
}

/// Target class balance for [`Dataset::subsample_imbalance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceSpec {
    pub positive_fraction: f64,
    pub seed: u64,
}

impl ImbalanceSpec {
    pub fn new(positive_fraction: f64, seed: u64) -> Self {
        ImbalanceSpec { positive_fraction, seed }
    }
}

fn check_names(names: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(names.len());
    for name in names {
        if name.is_empty() {
            return Err(Error::EmptyFeatureName);
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateFeatureName(name.clone()));
        }
    }
    Ok(())
}

impl Dataset {
    /// Builds a dataset from rows of feature values.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<u8>, names: Vec<String>) -> Result<Self> {
        let n_features = names.len();
        let mut values = Vec::with_capacity(rows.len() * n_features);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} values, expected {n_features}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::from_row_major(rows.len(), values, labels, names)
    }

    /// Builds a dataset from column vectors.
    pub fn from_columns(columns: Vec<Vec<f64>>, labels: Vec<u8>, names: Vec<String>) -> Result<Self> {
        if columns.len() != names.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} columns but {} names",
                columns.len(),
                names.len()
            )));
        }
        let n_rows = labels.len();
        if let Some(bad) = columns.iter().position(|c| c.len() != n_rows) {
            return Err(Error::ShapeMismatch(format!(
                "column `{}` has {} values, expected {n_rows}",
                names[bad],
                columns[bad].len()
            )));
        }
        let mut values = Vec::with_capacity(n_rows * columns.len());
        for i in 0..n_rows {
            values.extend(columns.iter().map(|c| c[i]));
        }
        Self::from_row_major(n_rows, values, labels, names)
    }

    fn from_row_major(n_rows: usize, values: Vec<f64>, labels: Vec<u8>, names: Vec<String>) -> Result<Self> {
        if n_rows == 0 {
            return Err(Error::EmptyDataset);
        }
        if labels.len() != n_rows {
            return Err(Error::ShapeMismatch(format!(
                "{n_rows} rows but {} labels",
                labels.len()
            )));
        }
        if let Some(row) = labels.iter().position(|&y| y > 1) {
            return Err(Error::NonBinaryLabel {
                row: row + 1,
                value: labels[row].to_string(),
            });
        }
        check_names(&names)?;
        let n_features = names.len();
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                row: k / n_features + 1,
                column: names[k % n_features].clone(),
            });
        }
        let d = Dataset { n_rows, n_features, values, labels, names };
        if d.positive_count() == 0 || d.positive_count() == n_rows {
            return Err(Error::SingleClassDataset);
        }
        Ok(d)
    }

    /// Loads a headered CSV file; `label_column` holds 0/1 labels and every
    /// other column becomes a feature, in file order.
    pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_csv(file, label_column)
    }

    pub fn read_csv<R: Read>(reader: R, label_column: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let label_idx = header
            .iter()
            .position(|h| h == label_column)
            .ok_or_else(|| Error::MissingColumn(label_column.to_owned()))?;
        let names: Vec<String> = header
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != label_idx)
            .map(|(_, h)| h.clone())
            .collect();
        check_names(&names)?;

        let mut values = Vec::new();
        let mut labels = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let row = i + 1;
            for (j, cell) in record.iter().enumerate() {
                if j == label_idx {
                    labels.push(parse_label(cell).ok_or_else(|| Error::NonBinaryLabel {
                        row,
                        value: cell.to_owned(),
                    })?);
                    continue;
                }
                let v: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                    row,
                    column: header[j].clone(),
                    value: cell.to_owned(),
                })?;
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue { row, column: header[j].clone() });
                }
                values.push(v);
            }
        }
        Self::from_row_major(labels.len(), values, labels, names)
    }

    /// Writes the dataset as CSV with the label column last.
    pub fn write_csv<W: Write>(&self, writer: W, label_column: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.names.iter().map(String::as_str).collect();
        header.push(label_column);
        w.write_record(&header)?;
        for i in 0..self.n_rows {
            let mut record: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            record.push(self.labels[i].to_string());
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.values[row * self.n_features + feature]
    }

    pub fn column(&self, feature: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_rows).map(move |i| self.value(i, feature))
    }

    pub fn positive_count(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    pub fn positive_fraction(&self) -> f64 {
        self.positive_count() as f64 / self.n_rows as f64
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_owned()))
    }

    /// Coalition over the named features.
    pub fn coalition_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Coalition> {
        names
            .iter()
            .try_fold(Coalition::EMPTY, |c, n| Ok(c.with(self.feature_index(n.as_ref())?)))
    }

    /// Rows at `indices`, in the given order. Fails if a class disappears.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n_rows {
                return Err(Error::IndexOutOfRange { index: i, arity: self.n_rows });
            }
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self::from_row_major(indices.len(), values, labels, self.names.clone())
    }

    /// Uniformly shuffled train/test partition. The train side receives
    /// `floor(train_fraction * n)` rows; both sides keep the original row order.
    pub fn split(&self, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
        if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train fraction {} must lie strictly between 0 and 1",
                spec.train_fraction
            )));
        }
        let n_train = (spec.train_fraction * self.n_rows as f64).floor() as usize;
        let mut order: Vec<usize> = (0..self.n_rows).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
        let (train_idx, test_idx) = order.split_at(n_train);
        let mut train_idx = train_idx.to_vec();
        let mut test_idx = test_idx.to_vec();
        train_idx.sort_unstable();
        test_idx.sort_unstable();

        let degenerate = |idx: &[usize]| {
            let pos = idx.iter().filter(|&&i| self.labels[i] == 1).count();
            pos == 0 || pos == idx.len()
        };
        if degenerate(&train_idx) || degenerate(&test_idx) {
            return Err(Error::DegenerateSplit { seed: spec.seed });
        }
        Ok((self.select_rows(&train_idx)?, self.select_rows(&test_idx)?))
    }

    /// Keeps only the columns in `c`, in ascending index order.
    pub fn project(&self, c: Coalition) -> Result<Self> {
        if c.span() > self.n_features {
            return Err(Error::IndexOutOfRange {
                index: c.span() - 1,
                arity: self.n_features,
            });
        }
        let cols: Vec<usize> = c.indices().collect();
        let mut values = Vec::with_capacity(self.n_rows * cols.len());
        for i in 0..self.n_rows {
            let row = self.row(i);
            values.extend(cols.iter().map(|&j| row[j]));
        }
        Ok(Dataset {
            n_rows: self.n_rows,
            n_features: cols.len(),
            values,
            labels: self.labels.clone(),
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
        })
    }

    /// Resamples without replacement to reach `positive_fraction`.
    ///
    /// When the target is below the current proportion every negative row is
    /// kept and positives are down-sampled; otherwise every positive row is
    /// kept and negatives are down-sampled. Retained rows keep their order.
    pub fn subsample_imbalance(&self, spec: &ImbalanceSpec) -> Result<Self> {
        let p = spec.positive_fraction;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "positive fraction {p} must lie strictly between 0 and 1"
            )));
        }
        let (mut pos, mut neg): (Vec<usize>, Vec<usize>) =
            (0..self.n_rows).partition(|&i| self.labels[i] == 1);
        let infeasible = || Error::InfeasibleProportion {
            target: p,
            positives: pos.len(),
            negatives: neg.len(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

        let (n_pos, n_neg) = if p <= self.positive_fraction() {
            let k = (p * neg.len() as f64 / (1.0 - p)).round() as usize;
            (k, neg.len())
        } else {
            let m = (pos.len() as f64 * (1.0 - p) / p).round() as usize;
            (pos.len(), m)
        };
        if n_pos == 0 || n_neg == 0 || n_pos > pos.len() || n_neg > neg.len() {
            return Err(infeasible());
        }
        let total = n_pos + n_neg;
        if (n_pos as f64 / total as f64 - p).abs() > 1.0 / total as f64 {
            return Err(infeasible());
        }

        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
        let mut keep: Vec<usize> = pos[..n_pos].iter().chain(&neg[..n_neg]).copied().collect();
        keep.sort_unstable();
        self.select_rows(&keep)
    }

    /// Appends a bitwise copy of column `index` under `new_name`.
    pub fn duplicate_feature(&self, index: usize, new_name: &str) -> Result<Self> {
        if index >= self.n_features {
            return Err(Error::IndexOutOfRange { index, arity: self.n_features });
        }
        let mut names = self.names.clone();
        names.push(new_name.to_owned());
        check_names(&names)?;
        let mut values = Vec::with_capacity(self.n_rows * (self.n_features + 1));
        for i in 0..self.n_rows {
            let row = self.row(i);
            values.extend_from_slice(row);
            values.push(row[index]);
        }
        Ok(Dataset {
            n_rows: self.n_rows,
            n_features: self.n_features + 1,
            values,
            labels: self.labels.clone(),
            names,
        })
    }
}

fn parse_label(cell: &str) -> Option<u8> {
    match cell {
        "0" => Some(0),
        "1" => Some(1),
        _ => match cell.parse::<f64>() {
            Ok(0.0) => Some(0),
            Ok(1.0) => Some(1),
            _ => None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    fn toy(n: usize) -> Dataset {
        let rows = (0..n).map(|i| vec![i as f64, (i * i) as f64, -(i as f64)]).collect();
        let labels = (0..n).map(|i| (i % 2) as u8).collect();
        Dataset::new(rows, labels, names(&["a", "b", "c"])).unwrap()
    }

    #[test]
    fn loads_minimal_csv() {
        let d = Dataset::read_csv("x,class\n0.5,0\n1.5,1\n".as_bytes(), "class").unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.n_features(), 1);
        assert_eq!(d.labels(), &[0, 1]);
    }

    #[test]
    fn label_column_is_removed_wherever_it_sits() {
        let d = Dataset::read_csv("class,x,y\n1,0.5,2\n0,1.5,3\n".as_bytes(), "class").unwrap();
        assert_eq!(d.feature_names(), &["x", "y"]);
        assert_eq!(d.row(1), &[1.5, 3.0]);
    }

    #[test]
    fn csv_errors() {
        let err = Dataset::read_csv("x,class\n0.5,0\n1.5,2\n".as_bytes(), "class").unwrap_err();
        assert!(matches!(err, Error::NonBinaryLabel { row: 2, .. }), "{err:?}");
        let err = Dataset::read_csv("x,class\n0.5,0\n1.5,1\n".as_bytes(), "label").unwrap_err();
        assert!(matches!(err, Error::MissingColumn(_)));
        let err = Dataset::read_csv("x,class\nabc,0\n1.5,1\n".as_bytes(), "class").unwrap_err();
        assert!(matches!(err, Error::NonNumericCell { row: 1, .. }));
        let err = Dataset::read_csv("x,class\n".as_bytes(), "class").unwrap_err();
        assert!(matches!(err, Error::EmptyDataset));
        let err = Dataset::read_csv("x,x,class\n1,2,0\n1,2,1\n".as_bytes(), "class").unwrap_err();
        assert!(matches!(err, Error::DuplicateFeatureName(_)));
        let err = Dataset::read_csv("x,class\n1,1\n2,1\n".as_bytes(), "class").unwrap_err();
        assert!(matches!(err, Error::SingleClassDataset));
        let err = Dataset::read_csv("x,class\nNaN,0\n2,1\n".as_bytes(), "class").unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { .. }));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let d = toy(10);
        let spec = (0..32)
            .map(|seed| SplitSpec::new(0.8, seed))
            .find(|s| d.split(s).is_ok())
            .unwrap();
        let (train, test) = d.split(&spec).unwrap();
        assert_eq!((train.n_rows(), test.n_rows()), (8, 2));
        assert_eq!(d.split(&spec).unwrap(), (train, test));
    }

    #[test]
    fn split_two_rows_is_degenerate() {
        let d = Dataset::new(vec![vec![0.0], vec![1.0]], vec![0, 1], names(&["x"])).unwrap();
        for seed in 0..8 {
            assert!(matches!(
                d.split(&SplitSpec::new(0.5, seed)),
                Err(Error::DegenerateSplit { .. })
            ));
        }
    }

    #[test]
    fn split_rejects_bad_fraction() {
        assert!(matches!(
            toy(10).split(&SplitSpec::new(1.0, 0)),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn project_selects_columns() {
        let d = toy(6);
        let p = d.project(Coalition::from_indices([0, 2])).unwrap();
        assert_eq!(p.feature_names(), &["a", "c"]);
        assert_eq!(p.row(3), &[3.0, -3.0]);
        assert_eq!(d.project(Coalition::full(3)).unwrap(), d);
        let empty = d.project(Coalition::EMPTY).unwrap();
        assert_eq!(empty.n_features(), 0);
        assert_eq!(empty.labels(), d.labels());
        assert!(matches!(
            d.project(Coalition::singleton(3)),
            Err(Error::IndexOutOfRange { index: 3, arity: 3 })
        ));
    }

    #[test]
    fn duplicate_then_project_round_trip() {
        let d = toy(6);
        let dup = d.duplicate_feature(0, "a_copy").unwrap();
        assert_eq!(dup.n_features(), 4);
        assert!(dup.column(0).zip(dup.column(3)).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(dup.project(Coalition::full(3)).unwrap(), d);
        assert!(matches!(d.duplicate_feature(0, "b"), Err(Error::DuplicateFeatureName(_))));
        assert!(matches!(d.duplicate_feature(5, "z"), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn imbalance_no_op_and_infeasible() {
        let d = toy(10);
        let same = d.subsample_imbalance(&ImbalanceSpec::new(0.5, 3)).unwrap();
        assert_eq!(same, d);

        let small = Dataset::new(vec![vec![0.0], vec![1.0], vec![2.0]], vec![1, 0, 0], names(&["x"])).unwrap();
        assert!(matches!(
            small.subsample_imbalance(&ImbalanceSpec::new(0.1, 0)),
            Err(Error::InfeasibleProportion { .. })
        ));
    }

    #[test]
    fn imbalance_keeps_negatives() {
        let rows = (0..100).map(|i| vec![i as f64]).collect();
        let labels = (0..100).map(|i| u8::from(i < 45)).collect();
        let d = Dataset::new(rows, labels, names(&["x"])).unwrap();
        let s = d.subsample_imbalance(&ImbalanceSpec::new(0.10, 1)).unwrap();
        assert_eq!(s.n_rows() - s.positive_count(), 55);
        assert!((s.positive_fraction() - 0.10).abs() <= 1.0 / s.n_rows() as f64);
        // upward target down-samples negatives instead
        let up = d.subsample_imbalance(&ImbalanceSpec::new(0.75, 1)).unwrap();
        assert_eq!(up.positive_count(), 45);
        assert_eq!(up.n_rows(), 60);
    }
}
