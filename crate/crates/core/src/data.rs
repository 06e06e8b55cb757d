//! Labelled binary-classification datasets: loading, validation and seeded splits.
//!
//! Labels are stored as `i8` values in `{-1, +1}`. Files labelled with `{0, 1}`
//! are accepted and `0` is mapped to `-1`; any other label alphabet is rejected.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Number of reshuffles `split` tries before giving up on per-class non-emptiness.
pub const MAX_SPLIT_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<i8>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    /// Builds a dataset from a row-major feature buffer.
    ///
    /// Checks shapes, finiteness and the label alphabet. Class balance is not
    /// checked here; see [`Dataset::require_both_classes`].
    pub fn new(
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<i8>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidData("dataset has no examples".into()));
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * n_features,
                actual: features.len(),
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite feature value at row {}, feature {}",
                pos / n_features.max(1),
                pos % n_features.max(1)
            )));
        }
        if let Some(row) = labels.iter().position(|&y| y != 1 && y != -1) {
            return Err(Error::InvalidLabel {
                row,
                value: labels[row].to_string(),
            });
        }
        if let Some(names) = &feature_names {
            if names.len() != n_features {
                return Err(Error::DimensionMismatch {
                    expected: n_features,
                    actual: names.len(),
                });
            }
        }
        Ok(Self {
            features,
            n_features,
            labels,
            feature_names,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<i8>) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_features) {
            return Err(Error::DimensionMismatch {
                expected: n_features,
                actual: bad.len(),
            });
        }
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                actual: labels.len(),
            });
        }
        let features = rows.iter().flatten().copied().collect();
        Self::new(features, n_features, labels, None)
    }

    /// Training sets need `M >= 2` and at least one example of each class.
    pub fn require_both_classes(&self) -> Result<()> {
        if self.len() < 2 || !self.has_both_classes() {
            return Err(Error::SingleClass);
        }
        Ok(())
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&1) && self.labels.contains(&-1)
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn label(&self, i: usize) -> i8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Values of one feature across all examples, in example order.
    pub fn column(&self, feature: usize) -> Vec<f64> {
        self.rows().map(|r| r[feature]).collect()
    }

    /// New dataset holding the given examples, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features,
            n_features: self.n_features,
            labels,
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn count_positive(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }
}

/// Which CSV column holds the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
    Last,
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "last" => LabelColumn::Last,
            _ => match s.parse::<usize>() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(s.to_string()),
            },
        })
    }
}

fn parse_raw_label(raw: &str, row: usize) -> Result<i8> {
    let invalid = || Error::InvalidLabel {
        row,
        value: raw.to_string(),
    };
    let v: f64 = raw.trim().parse().map_err(|_| invalid())?;
    if v == 1.0 {
        Ok(1)
    } else if v == -1.0 {
        Ok(-1)
    } else if v == 0.0 {
        Ok(0)
    } else {
        Err(invalid())
    }
}

/// Maps a `{0,1}` alphabet onto `{-1,+1}`; rejects files that mix `0` with `-1`.
fn finish_labels(raw: Vec<i8>, rows: &[usize]) -> Result<Vec<i8>> {
    let has_minus = raw.contains(&-1);
    if has_minus {
        if let Some(pos) = raw.iter().position(|&y| y == 0) {
            return Err(Error::InvalidLabel {
                row: rows[pos],
                value: "0".into(),
            });
        }
        return Ok(raw);
    }
    Ok(raw.into_iter().map(|y| if y == 0 { -1 } else { y }).collect())
}

/// Loads a comma-separated file. A header row is detected when any cell of
/// the first line is not a number. Row numbers in errors are 1-based file lines.
pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::InvalidData(format!("{}: empty file", path.display())));
    }

    let has_header = records[0].iter().any(|c| c.parse::<f64>().is_err());
    let header: Option<Vec<String>> =
        has_header.then(|| records[0].iter().map(str::to_string).collect());
    let n_cols = records[0].len();
    let label_idx = match label_column {
        LabelColumn::Index(i) if *i < n_cols => *i,
        LabelColumn::Index(i) => {
            return Err(Error::InvalidParameter(format!(
                "label column {i} out of range for {n_cols} columns"
            )))
        }
        LabelColumn::Last => n_cols - 1,
        LabelColumn::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| {
                Error::InvalidParameter(format!("no column named {name:?} in header"))
            })?,
    };

    let first = usize::from(has_header);
    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    let mut line_numbers = Vec::new();
    for (k, rec) in records.iter().enumerate().skip(first) {
        let line = k + 1;
        for (j, cell) in rec.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(parse_raw_label(cell, line)?);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => features.push(v),
                _ => {
                    return Err(Error::NonNumeric {
                        path: path.to_path_buf(),
                        row: line,
                        column: j + 1,
                        value: cell.to_string(),
                    })
                }
            }
        }
        line_numbers.push(line);
    }
    let labels = finish_labels(raw_labels, &line_numbers)?;
    let names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(j, _)| *j != label_idx)
            .map(|(_, n)| n)
            .collect()
    });
    let data = Dataset::new(features, n_cols - 1, labels, names)?;
    data.require_both_classes()?;
    Ok(data)
}

/// Loads the sparse `label index:value ...` format. Indices are 1-based and
/// must be strictly increasing within a line; absent entries are zero.
pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut sparse: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut raw_labels = Vec::new();
    let mut line_numbers = Vec::new();
    let mut dim = 0usize;

    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line_no = k + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        raw_labels.push(parse_raw_label(label_tok, line_no)?);

        let mut entries = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let malformed = |message: String| Error::Malformed {
                line: line_no,
                message,
            };
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| malformed(format!("expected index:value, got {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| malformed(format!("bad feature index {idx:?}")))?;
            let val: f64 = val
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| malformed(format!("bad feature value {val:?}")))?;
            if idx == 0 {
                return Err(malformed("feature indices are 1-based".into()));
            }
            if idx <= prev {
                return Err(malformed("indices not increasing".into()));
            }
            prev = idx;
            entries.push((idx - 1, val));
        }
        dim = dim.max(prev);
        sparse.push(entries);
        line_numbers.push(line_no);
    }
    if sparse.is_empty() {
        return Err(Error::InvalidData(format!("{}: empty file", path.display())));
    }

    let mut features = vec![0.0; sparse.len() * dim];
    for (i, entries) in sparse.iter().enumerate() {
        for &(j, v) in entries {
            features[i * dim + j] = v;
        }
    }
    let labels = finish_labels(raw_labels, &line_numbers)?;
    let data = Dataset::new(features, dim, labels, None)?;
    data.require_both_classes()?;
    Ok(data)
}

/// Writes the dataset as CSV with a header row and the label in the last column.
/// Values use the shortest representation that parses back to the same `f64`.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let header: Vec<String> = match data.feature_names() {
        Some(names) => names.to_vec(),
        None => (0..data.n_features()).map(|j| format!("x{j}")).collect(),
    };
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "{},label", header.join(","))?;
        for (i, row) in data.rows().enumerate() {
            for v in row {
                write!(out, "{v},")?;
            }
            writeln!(out, "{}", data.label(i))?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}

/// Train/validation/test proportions plus the PRNG seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub valid_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, valid: f64, test: f64, seed: u64) -> Result<Self> {
        for (name, f) in [("train", train), ("valid", valid), ("test", test)] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} fraction {f} must lie in (0, 1)"
                )));
            }
        }
        if (train + valid + test - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "split fractions sum to {}, expected 1",
                train + valid + test
            )));
        }
        Ok(Self {
            train_fraction: train,
            valid_fraction: valid,
            test_fraction: test,
            seed,
        })
    }

    /// 60/20/20, the protocol for small and medium datasets.
    pub fn standard(seed: u64) -> Self {
        Self::new(0.6, 0.2, 0.2, seed).expect("constant fractions")
    }

    /// 10/30/60, the protocol for large datasets.
    pub fn large(seed: u64) -> Self {
        Self::new(0.1, 0.3, 0.6, seed).expect("constant fractions")
    }

    /// Sizes of (train, valid, test): floor for the first two, remainder to test.
    pub fn sizes(&self, m: usize) -> (usize, usize, usize) {
        let n_train = part_size(m, self.train_fraction);
        let n_valid = part_size(m, self.valid_fraction);
        (n_train, n_valid, m.saturating_sub(n_train + n_valid))
    }
}

// The small slack keeps products like 100 * 0.29 from flooring one short.
fn part_size(m: usize, fraction: f64) -> usize {
    (m as f64 * fraction + 1e-9).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn split_indices(data: &Dataset, spec: &SplitSpec) -> Result<SplitIndices> {
    let (a, b, c) = spec.sizes(data.len());
    let mut parts = partition(data, &[a, b, c], spec.seed)?;
    let test = parts.pop().unwrap();
    let valid = parts.pop().unwrap();
    let train = parts.pop().unwrap();
    Ok(SplitIndices { train, valid, test })
}

/// Random, unstratified three-way split; deterministic in `spec.seed`.
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    let idx = split_indices(data, spec)?;
    Ok((
        data.subset(&idx.train),
        data.subset(&idx.valid),
        data.subset(&idx.test),
    ))
}

/// Two-way split with `floor(M * train_fraction)` training examples.
pub fn train_test_split(
    data: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction {train_fraction} must lie in (0, 1)"
        )));
    }
    let n_train = part_size(data.len(), train_fraction);
    let parts = partition(data, &[n_train, data.len() - n_train.min(data.len())], seed)?;
    Ok((data.subset(&parts[0]), data.subset(&parts[1])))
}

fn partition(data: &Dataset, sizes: &[usize], seed: u64) -> Result<Vec<Vec<usize>>> {
    if sizes.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "split of {} examples leaves an empty part (sizes {sizes:?})",
            data.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..MAX_SPLIT_ATTEMPTS {
        order.shuffle(&mut rng);
        let mut parts = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &s in sizes {
            let mut part = order[start..start + s].to_vec();
            part.sort_unstable();
            parts.push(part);
            start += s;
        }
        let both = |part: &Vec<usize>| {
            part.iter().any(|&i| data.label(i) == 1) && part.iter().any(|&i| data.label(i) == -1)
        };
        if parts.iter().all(both) {
            return Ok(parts);
        }
    }
    Err(Error::SplitUnsatisfiable {
        attempts: MAX_SPLIT_ATTEMPTS,
    })
}
