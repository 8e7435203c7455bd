use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{run_sweep, top_k_by_kappa, verdicts_for, CellStatus, SweepCell, SweepConfig, Verdict};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

fn opt(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.decimals$}"))
}

fn full(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Columns separated by two spaces; numbers right-aligned, `status` left.
fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .zip(header)
            .map(|((c, &w), &h)| if h == "status" { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn cells_text(cells: &[&SweepCell]) -> String {
    let failures = cells.iter().any(|c| c.status != CellStatus::Ok);
    let mut header = vec!["m", "tau", "kappa", "MLE"];
    if failures {
        header.push("status");
    }
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            let mut row = vec![c.m.to_string(), c.tau.to_string(), opt(c.kappa, 6), opt(c.mle, 4)];
            if failures {
                row.push(c.status.to_string());
            }
            row
        })
        .collect();
    aligned(&header, &rows)
}

/// κ to 6 and MLE to 4 decimals as text; csv and json keep full precision.
pub fn render_cells(cells: &[SweepCell], format: Format) -> Result<String> {
    if cells.is_empty() {
        return Err(Error::EmptyInput);
    }
    match format {
        Format::Text => Ok(cells_text(&cells.iter().collect::<Vec<_>>())),
        Format::Csv => {
            let rows: Vec<Vec<String>> = cells
                .iter()
                .map(|c| {
                    vec![
                        c.m.to_string(),
                        c.tau.to_string(),
                        full(c.kappa),
                        full(c.mle),
                        c.mle_units.clone(),
                        c.status.to_string(),
                    ]
                })
                .collect();
            csv_string(&["m", "tau", "kappa", "mle", "mle_units", "status"], &rows)
        }
        Format::Json => Ok(serde_json::to_string_pretty(cells)? + "\n"),
    }
}

pub fn render_verdicts(verdicts: &[Verdict], format: Format) -> Result<String> {
    if verdicts.is_empty() {
        return Err(Error::EmptyInput);
    }
    match format {
        Format::Text => Ok(verdicts.iter().map(|v| format!("{}\n", v.narrative)).collect()),
        Format::Csv => {
            let rows: Vec<Vec<String>> = verdicts
                .iter()
                .map(|v| {
                    vec![
                        v.m.to_string(),
                        v.tau.to_string(),
                        v.kappa.to_string(),
                        v.mle.to_string(),
                        format!("{:?}", v.mle_sign),
                        v.reliability_percent.to_string(),
                        format!("{:?}", v.classification),
                    ]
                })
                .collect();
            csv_string(
                &["m", "tau", "kappa", "mle", "mle_sign", "reliability_percent", "classification"],
                &rows,
            )
        }
        Format::Json => Ok(serde_json::to_string_pretty(verdicts)? + "\n"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesInfo {
    pub label: String,
    pub n: usize,
    pub transforms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    #[serde(flatten)]
    pub sweep: SweepConfig,
    pub strong_threshold: f64,
    pub weak_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub series: SeriesInfo,
    pub params: ReportParams,
    pub cells: Vec<SweepCell>,
    pub verdicts: Vec<Verdict>,
    pub version: String,
}

impl Report {
    /// Runs the sweep and the verdicts for `series`.
    pub fn build(series: &TimeSeries, params: ReportParams) -> Result<Report> {
        let cells = run_sweep(series, &params.sweep)?;
        let k = if params.sweep.mle_all { usize::MAX } else { params.sweep.top_k };
        let verdicts = verdicts_for(&cells, k, params.strong_threshold, params.weak_threshold)?;
        let mut transforms = series.transform_history().to_vec();
        if transforms.last().map(String::as_str) != Some("min_max") {
            transforms.push("min_max".into());
        }
        Ok(Report {
            series: SeriesInfo {
                label: series.label().to_string(),
                n: series.len(),
                transforms,
            },
            params,
            cells,
            verdicts,
            version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }

    /// No cell produced a κ.
    pub fn all_failed(&self) -> bool {
        self.cells.iter().all(|c| c.kappa.is_none())
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => render_cells(&self.cells, Format::Csv),
            Format::Text => {
                let mut out = String::new();
                let _ = writeln!(
                    out,
                    "series {} ({} samples; {})",
                    self.series.label,
                    self.series.n,
                    self.series.transforms.join(" -> ")
                );
                let mut ms: Vec<usize> = self.cells.iter().map(|c| c.m).collect();
                ms.dedup();
                let k = self.params.sweep.top_k;
                for &m in &ms {
                    let top = top_k_by_kappa(&self.cells, k, m);
                    if top.is_empty() {
                        continue;
                    }
                    let _ = writeln!(out, "\nm = {m}: top {} by kappa", top.len());
                    out.push_str(&cells_text(&top));
                }
                if !self.verdicts.is_empty() {
                    out.push('\n');
                    out.push_str(&render_verdicts(&self.verdicts, Format::Text)?);
                }
                out.push_str("\nkappa sweep\n");
                out.push_str(&render_cells(&self.cells, Format::Text)?);
                Ok(out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table_1a() -> Vec<SweepCell> {
        [(2, 0.501905, 2.7159), (39, 0.444272, 1.7691), (4, 0.441020, 2.5150), (28, 0.433819, 2.0525), (5, 0.431399, 2.4318)]
            .iter()
            .map(|&(tau, k, mle)| SweepCell::new(2, tau, k, Some(mle)))
            .collect()
    }

    #[test]
    fn text_digits() {
        let text = render_cells(&table_1a(), Format::Text).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "m  tau     kappa     MLE");
        assert_eq!(lines[1], "2    2  0.501905  2.7159");
        assert_eq!(lines[3], "2    4  0.441020  2.5150");
        assert_eq!(lines.len(), 6);
    }

    #[test]
    fn failures_get_a_status_column() {
        let mut cells = table_1a();
        cells[1].kappa = None;
        cells[1].mle = None;
        cells[1].status = CellStatus::KappaFailed("too short".into());
        let text = render_cells(&cells, Format::Text).unwrap();
        assert!(text.lines().next().unwrap().ends_with("status"));
        assert!(text.contains("kappa failed: too short"));
    }

    #[test]
    fn csv_keeps_precision() {
        let mut cells = table_1a();
        cells[0].kappa = Some(0.1 + 0.2);
        let csv = render_cells(&cells, Format::Csv).unwrap();
        assert!(csv.starts_with("m,tau,kappa,mle,mle_units,status\n"));
        assert!(csv.contains("2,2,0.30000000000000004,2.7159,nats/sample,ok\n"));
    }

    #[test]
    fn empty_and_unknown() {
        assert!(matches!(render_cells(&[], Format::Text), Err(Error::EmptyInput)));
        assert!(matches!("xml".parse::<Format>(), Err(Error::UnknownFormat(_))));
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
    }

    proptest! {
        #[test]
        fn json_round_trip(rows in prop::collection::vec((1usize..6, 1usize..50, 0.0f64..1.0, prop::option::of(-5.0f64..20.0)), 1..30)) {
            let cells: Vec<SweepCell> = rows.iter().map(|&(m, tau, k, mle)| SweepCell::new(m, tau, k, mle)).collect();
            let json = render_cells(&cells, Format::Json).unwrap();
            let back: Vec<SweepCell> = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back, cells);
        }
    }
}
