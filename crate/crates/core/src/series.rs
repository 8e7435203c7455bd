//! Scalar observation series and the transforms applied before estimation.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly sampled scalar observations.
///
/// Values are finite and there are at least two of them. Once built the
/// series is immutable; transforms return a new series and append their name
/// to `transform_history`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    sample_interval: f64,
    label: String,
    transform_history: Vec<String>,
}

impl TimeSeries {
    /// Builds a raw series with unit sample interval.
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        Self::with_history(values, 1.0, label.into(), vec!["raw".to_string()])
    }

    pub fn with_history(
        values: Vec<f64>,
        sample_interval: f64,
        label: String,
        transform_history: Vec<String>,
    ) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewObservations(values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if !(sample_interval > 0.0 && sample_interval.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sample_interval must be positive, got {sample_interval}"
            )));
        }
        Ok(Self {
            values,
            sample_interval,
            label,
            transform_history,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a series holds at least two values.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn transform_history(&self) -> &[String] {
        &self.transform_history
    }

    fn derive(&self, values: Vec<f64>, transform: &str) -> Result<Self> {
        let mut history = self.transform_history.clone();
        history.push(transform.to_string());
        Self::with_history(values, self.sample_interval, self.label.clone(), history)
    }

    /// `ln(x[i+1] / x[i])` for consecutive observations.
    pub fn to_log_returns(&self) -> Result<Self> {
        if let Some((index, &value)) = self.values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(Error::NonPositive { index, value });
        }
        let returns = self
            .values
            .windows(2)
            .map(|w| (w[1] / w[0]).ln())
            .collect();
        self.derive(returns, "log_returns")
    }

    /// Affine map onto [0, 1]: `(x - min) / (max - min)`.
    pub fn min_max_normalize(&self) -> Result<Self> {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let range = hi - lo;
        if range <= 0.0 {
            return Err(Error::ZeroRange);
        }
        let normalized = self
            .values
            .iter()
            .map(|&v| if v == hi { 1.0 } else { ((v - lo) / range).clamp(0.0, 1.0) })
            .collect();
        self.derive(normalized, "min_max")
    }
}

/// Which CSV column carries the observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for Column {
    type Err = std::convert::Infallible;

    /// Plain non-negative integers select by position, anything else by header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_string()),
        })
    }
}

impl std::fmt::Display for Column {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Column::Name(n) => write!(f, "{n:?}"),
            Column::Index(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub column: Column,
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            column: Column::Index(0),
            delimiter: b',',
            has_header: true,
        }
    }
}

/// Loads one column of a CSV file. The label is the file stem.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, opts, label)
}

pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions, label: String) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.has_header)
        .flexible(true)
        .from_reader(reader);

    let index = match &opts.column {
        Column::Index(i) => *i,
        Column::Name(name) => {
            if !opts.has_header {
                return Err(Error::InvalidParameter(format!(
                    "column {name:?} selected by name but the file has no header"
                )));
            }
            rdr.headers()?
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::MissingColumn {
                    row: 0,
                    column: name.clone(),
                })?
        }
    };

    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let cell = record.get(index).ok_or_else(|| Error::MissingColumn {
            row,
            column: opts.column.to_string(),
        })?;
        let trimmed = cell.trim();
        let value: f64 = trimmed.parse().map_err(|_| Error::Parse {
            row,
            cell: cell.to_string(),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                row,
                cell: cell.to_string(),
            });
        }
        values.push(value);
    }
    if values.len() < 2 {
        return Err(Error::TooFewObservations(values.len()));
    }
    TimeSeries::new(values, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn opts(col: &str) -> CsvOptions {
        CsvOptions {
            column: col.parse().unwrap(),
            ..CsvOptions::default()
        }
    }

    #[test]
    fn parses_named_column_in_file_order() {
        let s = read_csv("d,v\na,1.5\nb,2.0\nc,2.5".as_bytes(), &opts("v"), "x".into()).unwrap();
        assert_eq!(s.values(), &[1.5, 2.0, 2.5]);
        assert_eq!(s.transform_history(), &["raw".to_string()]);
    }

    #[test]
    fn bad_cell_names_its_row() {
        let err = read_csv("d,v\na,1.5\nb,abc\nc,2".as_bytes(), &opts("v"), "x".into()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err}");
        assert!(err.to_string().contains("row 2"));
    }

    #[test]
    fn empty_cell_is_an_error() {
        let err = read_csv("d,v\na,1.5\nb,\nc,2".as_bytes(), &opts("v"), "x".into()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
    }

    #[test]
    fn single_row_rejected() {
        let err = read_csv("d,v\na,1.5".as_bytes(), &opts("v"), "x".into()).unwrap_err();
        assert!(err.to_string().contains("fewer than 2 observations"));
    }

    #[test]
    fn thousands_separator_is_not_a_number() {
        let err = read_csv("v\n8.825,1\n".as_bytes(), &opts("v"), "x".into());
        assert!(err.is_err());
    }

    #[test]
    fn headerless_by_index_with_semicolons() {
        let o = CsvOptions {
            column: Column::Index(1),
            delimiter: b';',
            has_header: false,
        };
        let s = read_csv("a;1\nb;2\n".as_bytes(), &o, "x".into()).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0]);
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_csv("/nonexistent/prices.csv", &opts("v")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            TimeSeries::new(vec![1.0, f64::NAN], "x"),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn log_returns() {
        let s = TimeSeries::new(vec![1.0, E, E], "x").unwrap();
        let r = s.to_log_returns().unwrap();
        assert_abs_diff_eq!(r.values()[0], 1.0, epsilon = 1e-15);
        assert_eq!(r.values()[1], 0.0);
        assert_eq!(r.transform_history().last().unwrap(), "log_returns");

        let c = TimeSeries::new(vec![5.0; 4], "x").unwrap();
        assert_eq!(c.to_log_returns().unwrap().values(), &[0.0, 0.0, 0.0]);

        for n in [3usize, 10, 1000] {
            let s = TimeSeries::new((1..=n).map(|i| i as f64).collect(), "x").unwrap();
            assert_eq!(s.to_log_returns().unwrap().len(), n - 1);
        }
        // one return is not a series
        let s = TimeSeries::new(vec![1.0, 2.0], "x").unwrap();
        assert!(matches!(s.to_log_returns(), Err(Error::TooFewObservations(1))));
    }

    #[test]
    fn log_returns_reject_nonpositive() {
        let s = TimeSeries::new(vec![1.0, 0.0, 2.0], "x").unwrap();
        assert!(matches!(s.to_log_returns(), Err(Error::NonPositive { index: 1, .. })));
    }

    #[test]
    fn normalize_examples() {
        let n = |v: Vec<f64>| TimeSeries::new(v, "x").unwrap().min_max_normalize().unwrap();
        assert_eq!(n(vec![2.0, 4.0, 6.0]).values(), &[0.0, 0.5, 1.0]);
        assert_eq!(n(vec![0.0, 0.3, 1.0]).values(), &[0.0, 0.3, 1.0]);
        assert_eq!(n(vec![-1.0, 0.0, 3.0]).values(), &[0.0, 0.25, 1.0]);
        let c = TimeSeries::new(vec![3.0; 5], "x").unwrap();
        assert!(matches!(c.min_max_normalize(), Err(Error::ZeroRange)));
    }

    fn varied() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3f64..1e3, 2..200)
            .prop_filter("needs a range", |v| {
                let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                hi - lo > 1e-6
            })
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(v in varied()) {
            let once = TimeSeries::new(v, "x").unwrap().min_max_normalize().unwrap();
            let twice = once.min_max_normalize().unwrap();
            for (a, b) in once.values().iter().zip(twice.values()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            prop_assert!(once.values().iter().all(|x| (0.0..=1.0).contains(x)));
        }

        #[test]
        fn normalize_is_affine_invariant(v in varied(), a in 0.01f64..100.0, b in -100.0f64..100.0) {
            let base = TimeSeries::new(v.clone(), "x").unwrap().min_max_normalize().unwrap();
            let moved = TimeSeries::new(v.iter().map(|x| a * x + b).collect(), "x")
                .unwrap()
                .min_max_normalize()
                .unwrap();
            for (p, q) in base.values().iter().zip(moved.values()) {
                prop_assert!((p - q).abs() <= 1e-9);
            }
        }

        #[test]
        fn log_returns_are_scale_free(v in prop::collection::vec(0.01f64..1e3, 3..100), c in 0.001f64..1e3) {
            let base = TimeSeries::new(v.clone(), "x").unwrap().to_log_returns().unwrap();
            let scaled = TimeSeries::new(v.iter().map(|x| c * x).collect(), "x")
                .unwrap()
                .to_log_returns()
                .unwrap();
            for (p, q) in base.values().iter().zip(scaled.values()) {
                prop_assert!((p - q).abs() <= 1e-9);
            }
        }
    }
}
