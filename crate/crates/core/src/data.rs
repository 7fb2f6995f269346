//! Sparse labeled datasets: parsing, validation, normalization and the
//! sparse/dense kernels used by the solvers.
//!
//! The text format is the usual svmlight/libsvm layout,
//! `<label> <idx>:<val> <idx>:<val> ...`, with 1-based feature indices in the
//! file and 0-based indices in memory.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use thiserror::Error;

pub mod synthetic;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("dataset contains no examples")]
    Empty,
    #[error("feature index {index} out of range for vector of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid sparse vector: {0}")]
    InvalidVector(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds a vector from `(index, value)` pairs. Indices must be strictly
    /// increasing and values finite; exact zeros are dropped.
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self, DataError> {
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut last: Option<usize> = None;
        for (index, value) in entries {
            if let Some(prev) = last {
                if index <= prev {
                    return Err(DataError::InvalidVector(format!(
                        "index {index} follows {prev}; indices must be strictly increasing"
                    )));
                }
            }
            if !value.is_finite() {
                return Err(DataError::InvalidVector(format!(
                    "non-finite value at index {index}"
                )));
            }
            last = Some(index);
            if value != 0.0 {
                indices.push(index);
                values.push(value);
            }
        }
        Ok(Self { indices, values })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// One past the largest stored index, or 0 when empty.
    pub fn min_dim(&self) -> usize {
        self.indices.last().map_or(0, |&i| i + 1)
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Inner product with a dense vector. Panics if an index is out of range;
    /// see [`dot`] for the checked version.
    #[inline]
    pub fn dot_dense(&self, w: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&j, &v)| v * w[j])
            .sum()
    }

    /// `w += scale * self`, touching only the stored indices.
    #[inline]
    pub fn add_scaled_to(&self, scale: f64, w: &mut [f64]) {
        for (&j, &v) in self.indices.iter().zip(&self.values) {
            w[j] += scale * v;
        }
    }

    fn divided_by(&self, factor: f64) -> Self {
        let (indices, values) = self
            .iter()
            .map(|(j, v)| (j, v / factor))
            .filter(|&(_, v)| v != 0.0)
            .unzip();
        Self { indices, values }
    }
}

/// Checked inner product of a sparse vector with a dense one.
pub fn dot(x: &SparseVector, w: &[f64]) -> Result<f64, DataError> {
    if let Some(&index) = x.indices.last() {
        if index >= w.len() {
            return Err(DataError::IndexOutOfRange {
                index,
                len: w.len(),
            });
        }
    }
    Ok(x.dot_dense(w))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    features: SparseVector,
    label: f64,
    norm_sq: f64,
}

impl Example {
    pub fn new(features: SparseVector, label: f64) -> Self {
        let norm_sq = features.norm_sq();
        Self {
            features,
            label,
            norm_sq,
        }
    }

    pub fn features(&self) -> &SparseVector {
        &self.features
    }

    pub fn label(&self) -> f64 {
        self.label
    }

    /// Cached squared Euclidean norm of the features.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }
}

/// An immutable collection of labeled sparse examples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<Example>,
    dim: usize,
    max_norm: f64,
}

impl Dataset {
    /// Dimension is `1 + max feature index` (at least 1).
    pub fn new(examples: Vec<Example>) -> Result<Self, DataError> {
        Self::with_min_dim(examples, 1)
    }

    /// Like [`Dataset::new`] but the dimension is at least `min_dim`.
    pub fn with_min_dim(examples: Vec<Example>, min_dim: usize) -> Result<Self, DataError> {
        if examples.is_empty() {
            return Err(DataError::Empty);
        }
        for ex in &examples {
            if !ex.label.is_finite() {
                return Err(DataError::InvalidVector("non-finite label".into()));
            }
        }
        let dim = examples
            .iter()
            .map(|e| e.features.min_dim())
            .max()
            .unwrap_or(0)
            .max(min_dim)
            .max(1);
        let max_norm = examples
            .iter()
            .map(|e| e.norm_sq.sqrt())
            .fold(0.0_f64, f64::max);
        Ok(Self {
            examples,
            dim,
            max_norm,
        })
    }

    /// Returns the same examples with the dimension widened to `dim`.
    pub fn widened(&self, dim: usize) -> Self {
        Self {
            examples: self.examples.clone(),
            dim: self.dim.max(dim),
            max_norm: self.max_norm,
        }
    }

    pub fn n(&self) -> usize {
        self.examples.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_norm(&self) -> f64 {
        self.max_norm
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn example(&self, i: usize) -> &Example {
        &self.examples[i]
    }

    pub fn labels(&self) -> impl Iterator<Item = f64> + '_ {
        self.examples.iter().map(|e| e.label)
    }

    /// Divides every feature value by `factor` and rebuilds the norm caches.
    pub fn scaled_down(&self, factor: f64) -> Self {
        let examples = self
            .examples
            .iter()
            .map(|e| Example::new(e.features.divided_by(factor), e.label))
            .collect::<Vec<_>>();
        let max_norm = examples
            .iter()
            .map(|e| e.norm_sq.sqrt())
            .fold(0.0_f64, f64::max);
        Self {
            examples,
            dim: self.dim,
            max_norm,
        }
    }

    /// Serializes back to svmlight text (1-based indices, shortest
    /// round-trip float formatting).
    pub fn to_svmlight(&self) -> String {
        let mut out = String::new();
        for ex in &self.examples {
            write!(out, "{}", ex.label).unwrap();
            for (j, v) in ex.features.iter() {
                write!(out, " {}:{}", j + 1, v).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Scales the whole dataset by a single global factor so that every example
/// has norm at most 1. Returns the factor that was divided out (1 when the
/// data already satisfied the bound).
pub fn normalize_to_unit_ball(d: Dataset) -> (Dataset, f64) {
    if d.max_norm > 1.0 {
        let scale = d.max_norm;
        let scaled = d.scaled_down(scale);
        (scaled, scale)
    } else {
        (d, 1.0)
    }
}

/// Parses svmlight/libsvm text.
pub fn parse_svmlight(text: &str) -> Result<Dataset, DataError> {
    let mut examples = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let mut tokens = line.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let label: f64 = label_tok.parse().map_err(|_| DataError::Parse {
            line: line_no,
            msg: format!("bad label {label_tok:?}"),
        })?;
        if !label.is_finite() {
            return Err(DataError::Parse {
                line: line_no,
                msg: format!("non-finite label {label_tok:?}"),
            });
        }
        let mut entries = Vec::new();
        let mut prev: Option<usize> = None;
        for tok in tokens {
            let (idx_str, val_str) = tok.split_once(':').ok_or_else(|| DataError::Parse {
                line: line_no,
                msg: format!("expected <index>:<value>, got {tok:?}"),
            })?;
            let idx: usize = idx_str.parse().map_err(|_| DataError::Parse {
                line: line_no,
                msg: format!("bad feature index {idx_str:?}"),
            })?;
            if idx == 0 {
                return Err(DataError::Format {
                    line: line_no,
                    msg: "feature indices are 1-based; found 0".into(),
                });
            }
            let val: f64 = val_str.parse().map_err(|_| DataError::Parse {
                line: line_no,
                msg: format!("bad feature value {val_str:?}"),
            })?;
            if !val.is_finite() {
                return Err(DataError::Parse {
                    line: line_no,
                    msg: format!("non-finite feature value {val_str:?}"),
                });
            }
            let zero_based = idx - 1;
            if let Some(p) = prev {
                if zero_based <= p {
                    return Err(DataError::Format {
                        line: line_no,
                        msg: format!(
                            "indices not increasing: {} after {}",
                            idx,
                            p + 1
                        ),
                    });
                }
            }
            prev = Some(zero_based);
            entries.push((zero_based, val));
        }
        let features = SparseVector::new(entries).map_err(|e| DataError::Format {
            line: line_no,
            msg: e.to_string(),
        })?;
        examples.push(Example::new(features, label));
    }
    Dataset::new(examples)
}

pub fn read_svmlight<P: AsRef<Path>>(path: P) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    parse_svmlight(&text)
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, DataError> {
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(entries: &[(usize, f64)]) -> SparseVector {
        SparseVector::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn parses_single_line() {
        let d = parse_svmlight("+1 1:0.5 3:-0.25\n").unwrap();
        assert_eq!(d.n(), 1);
        assert_eq!(d.dim(), 3);
        let ex = d.example(0);
        assert_eq!(ex.label(), 1.0);
        assert_eq!(ex.features().indices(), &[0, 2]);
        assert_eq!(ex.features().values(), &[0.5, -0.25]);
    }

    #[test]
    fn skips_comments() {
        let d = parse_svmlight("-1 2:1.0\n# comment\n+1 1:1.0\n").unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.dim(), 2);
    }

    #[test]
    fn rejects_non_increasing_indices() {
        let err = parse_svmlight("+1 3:0.5 2:0.5\n").unwrap_err();
        assert!(matches!(err, DataError::Format { line: 1, .. }), "{err}");
        let err = parse_svmlight("+1 2:0.5 2:0.5\n").unwrap_err();
        assert!(matches!(err, DataError::Format { line: 1, .. }));
    }

    #[test]
    fn malformed_token_reports_line() {
        let err = parse_svmlight("+1 1:0.5\n-1 2-0.5\n").unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 2, .. }), "{err}");
        let err = parse_svmlight("x 1:1\n").unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 1, .. }));
        let err = parse_svmlight("1 0:1\n").unwrap_err();
        assert!(matches!(err, DataError::Format { line: 1, .. }));
    }

    #[test]
    fn empty_dataset_is_error() {
        assert!(matches!(parse_svmlight(""), Err(DataError::Empty)));
        assert!(matches!(
            parse_svmlight("# only\n\n"),
            Err(DataError::Empty)
        ));
    }

    #[test]
    fn label_only_line_is_empty_example() {
        let d = parse_svmlight("1\n-1 4:2\n").unwrap();
        assert_eq!(d.example(0).features().nnz(), 0);
        assert_eq!(d.dim(), 4);
    }

    #[test]
    fn zeros_are_pruned() {
        let v = sv(&[(0, 0.0), (3, 1.5)]);
        assert_eq!(v.indices(), &[3]);
    }

    #[test]
    fn normalize_divides_by_max_norm() {
        let d = Dataset::new(vec![Example::new(sv(&[(0, 3.0), (1, 4.0)]), 1.0)]).unwrap();
        let (n, scale) = normalize_to_unit_ball(d);
        assert_eq!(scale, 5.0);
        let vals = n.example(0).features().values();
        assert!((vals[0] - 0.6).abs() < 1e-15 && (vals[1] - 0.8).abs() < 1e-15);
        assert!((n.max_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_leaves_feasible_data_alone() {
        let d = Dataset::new(vec![Example::new(sv(&[(0, 0.9)]), 1.0)]).unwrap();
        let (n, scale) = normalize_to_unit_ball(d.clone());
        assert_eq!(scale, 1.0);
        assert_eq!(n, d);
    }

    #[test]
    fn normalize_keeps_zero_rows_zero() {
        let d = Dataset::new(vec![
            Example::new(sv(&[(0, 2.0)]), 1.0),
            Example::new(SparseVector::empty(), -1.0),
        ])
        .unwrap();
        let (n, scale) = normalize_to_unit_ball(d);
        assert_eq!(scale, 2.0);
        assert_eq!(n.example(1).features().nnz(), 0);
        assert_eq!(n.example(1).norm_sq(), 0.0);
    }

    #[test]
    fn dot_examples() {
        assert_eq!(dot(&sv(&[(0, 1.0)]), &[2.0, 5.0]).unwrap(), 2.0);
        assert_eq!(dot(&SparseVector::empty(), &[3.0]).unwrap(), 0.0);
        assert_eq!(
            dot(&sv(&[(0, 0.5), (2, -0.25)]), &[1.0, 1.0, 4.0]).unwrap(),
            -0.5
        );
        assert!(matches!(
            dot(&sv(&[(3, 1.0)]), &[1.0, 1.0]),
            Err(DataError::IndexOutOfRange { index: 3, len: 2 })
        ));
    }

    fn arb_dataset() -> impl Strategy<Value = Dataset> {
        let row = (
            prop_oneof![Just(1.0), Just(-1.0), -5.0..5.0f64],
            proptest::collection::btree_map(0usize..40, -1e3..1e3f64, 0..8),
        );
        proptest::collection::vec(row, 1..12).prop_map(|rows| {
            let examples = rows
                .into_iter()
                .map(|(y, m)| Example::new(SparseVector::new(m.into_iter().collect()).unwrap(), y))
                .collect();
            Dataset::new(examples).unwrap()
        })
    }

    proptest! {
        #[test]
        fn svmlight_round_trip(d in arb_dataset()) {
            let text = d.to_svmlight();
            let back = parse_svmlight(&text).unwrap();
            prop_assert_eq!(back, d);
        }

        #[test]
        fn normalized_norms_are_bounded(d in arb_dataset()) {
            let (n, _) = normalize_to_unit_ball(d);
            for ex in n.examples() {
                let fresh: f64 = ex.features().values().iter().map(|v| v * v).sum();
                prop_assert!(fresh.sqrt() <= 1.0 + 1e-12);
                prop_assert!((fresh - ex.norm_sq()).abs() <= 1e-12 * fresh.max(1e-300));
            }
        }

        #[test]
        fn dot_matches_dense(d in arb_dataset(), seed in any::<u64>()) {
            let w: Vec<f64> = (0..d.dim()).map(|j| ((j as u64 ^ seed) % 17) as f64 - 8.0).collect();
            for ex in d.examples() {
                let mut dense = vec![0.0; d.dim()];
                for (j, v) in ex.features().iter() { dense[j] = v; }
                let expect: f64 = dense.iter().zip(&w).map(|(a, b)| a * b).sum();
                let got = dot(ex.features(), &w).unwrap();
                prop_assert!((got - expect).abs() <= 1e-12 * expect.abs().max(1.0));
            }
        }
    }
}
