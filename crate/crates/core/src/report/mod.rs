//! The analysis pipeline: κ over a grid of `(m, τ)`, the maximal Lyapunov
//! exponent on the best cells, and a verdict that reads κ as the reliability
//! of a positive exponent.

mod render;

pub use render::{render_cells, render_verdicts, Format, Report, ReportParams, SeriesInfo};

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::determinism::{determinism_coefficient, DeterminismParams};
use crate::embedding::{delay_embed, EmbeddingParams};
use crate::error::{Error, Result};
use crate::lyapunov::{max_lyapunov, LogBase, WolfParams};
use crate::series::TimeSeries;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", content = "message", rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    KappaFailed(String),
    MleFailed(String),
}

impl std::fmt::Display for CellStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CellStatus::Ok => f.write_str("ok"),
            CellStatus::KappaFailed(e) => write!(f, "kappa failed: {e}"),
            CellStatus::MleFailed(e) => write!(f, "mle failed: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub m: usize,
    pub tau: usize,
    /// `None` only when the determinism estimate failed.
    pub kappa: Option<f64>,
    pub mle: Option<f64>,
    pub mle_units: String,
    pub status: CellStatus,
}

impl SweepCell {
    pub fn new(m: usize, tau: usize, kappa: f64, mle: Option<f64>) -> Self {
        Self {
            m,
            tau,
            kappa: Some(kappa),
            mle,
            mle_units: LogBase::E.unit().to_string(),
            status: CellStatus::Ok,
        }
    }
}

/// Wolf settings shared by every cell; the minimum time separation defaults
/// to each cell's `m * tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WolfSettings {
    pub evolve_steps: usize,
    pub scale_min: f64,
    pub scale_max: f64,
    pub min_time_separation: Option<usize>,
    pub log_base: LogBase,
}

impl Default for WolfSettings {
    fn default() -> Self {
        let p = WolfParams::for_embedding(1, 1);
        Self {
            evolve_steps: p.evolve_steps,
            scale_min: p.scale_min,
            scale_max: p.scale_max,
            min_time_separation: None,
            log_base: p.log_base,
        }
    }
}

impl WolfSettings {
    pub fn params(&self, m: usize, tau: usize) -> WolfParams {
        let mut p = WolfParams::for_embedding(m, tau);
        p.evolve_steps = self.evolve_steps;
        p.scale_min = self.scale_min;
        p.scale_max = self.scale_max;
        p.log_base = self.log_base;
        if let Some(sep) = self.min_time_separation {
            p.min_time_separation = sep;
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub m_set: Vec<usize>,
    pub tau_min: usize,
    pub tau_max: usize,
    pub determinism: DeterminismParams,
    pub wolf: WolfSettings,
    /// Cells per `m` that get an exponent.
    pub top_k: usize,
    /// Compute the exponent on every cell instead of the top `top_k`.
    pub mle_all: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            m_set: vec![2, 3],
            tau_min: 2,
            tau_max: 43,
            determinism: DeterminismParams::default(),
            wolf: WolfSettings::default(),
            top_k: 5,
            mle_all: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_set.is_empty() || self.m_set.contains(&0) {
            return Err(Error::InvalidParameter("m set must be nonempty with m >= 1".into()));
        }
        if self.tau_min == 0 || self.tau_min > self.tau_max {
            return Err(Error::InvalidParameter(format!(
                "tau range {}..{} is empty or starts at 0",
                self.tau_min, self.tau_max
            )));
        }
        self.determinism.validate()
    }

    fn grid(&self) -> Vec<(usize, usize)> {
        let ms: BTreeSet<usize> = self.m_set.iter().copied().collect();
        ms.into_iter()
            .flat_map(|m| (self.tau_min..=self.tau_max).map(move |tau| (m, tau)))
            .collect()
    }
}

/// κ on every `(m, τ)` cell, then the exponent on the selected cells.
///
/// The series is min–max normalized first. Estimator failures are recorded
/// in the cell's status. Cells come back ordered by `(m, τ)`.
pub fn run_sweep(series: &TimeSeries, cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    cfg.validate()?;
    let s = series.min_max_normalize()?;
    let units = cfg.wolf.log_base.unit().to_string();
    let mut cells: Vec<SweepCell> = cfg
        .grid()
        .into_par_iter()
        .map(|(m, tau)| {
            let kappa = EmbeddingParams::new(m, tau)
                .and_then(|p| delay_embed(&s, p))
                .and_then(|e| determinism_coefficient(&e, &cfg.determinism));
            let (kappa, status) = match kappa {
                Ok(r) => (Some(r.kappa), CellStatus::Ok),
                Err(e) => (None, CellStatus::KappaFailed(e.to_string())),
            };
            SweepCell {
                m,
                tau,
                kappa,
                mle: None,
                mle_units: units.clone(),
                status,
            }
        })
        .collect();

    let mut chosen: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &m in &cfg.m_set {
        let picks: Vec<&SweepCell> = if cfg.mle_all {
            cells.iter().filter(|c| c.m == m && c.kappa.is_some()).collect()
        } else {
            top_k_by_kappa(&cells, cfg.top_k, m)
        };
        chosen.extend(picks.iter().map(|c| (c.m, c.tau)));
    }

    cells.par_iter_mut().for_each(|cell| {
        if !chosen.contains(&(cell.m, cell.tau)) {
            return;
        }
        let r = EmbeddingParams::new(cell.m, cell.tau)
            .and_then(|p| delay_embed(&s, p))
            .and_then(|e| max_lyapunov(&e, &cfg.wolf.params(cell.m, cell.tau)));
        match r {
            Ok(r) => cell.mle = Some(r.lambda_max),
            Err(e) => cell.status = CellStatus::MleFailed(e.to_string()),
        }
    });
    Ok(cells)
}

/// The `k` cells of dimension `m` with the largest κ, ties to the smaller τ.
pub fn top_k_by_kappa(cells: &[SweepCell], k: usize, m: usize) -> Vec<&SweepCell> {
    let mut rows: Vec<&SweepCell> = cells.iter().filter(|c| c.m == m && c.kappa.is_some()).collect();
    rows.sort_by(|a, b| {
        b.kappa
            .unwrap()
            .total_cmp(&a.kappa.unwrap())
            .then(a.tau.cmp(&b.tau))
    });
    rows.truncate(k);
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MleSign {
    Positive,
    NonPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Classification {
    NoEvidence,
    WeakEvidence,
    StrongEvidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub m: usize,
    pub tau: usize,
    pub kappa: f64,
    pub mle: f64,
    pub mle_sign: MleSign,
    /// 100 κ, unrounded.
    pub reliability_percent: f64,
    pub classification: Classification,
    pub narrative: String,
}

pub const STRONG_THRESHOLD: f64 = 90.0;
pub const WEAK_THRESHOLD: f64 = 70.0;

/// Reads κ as the reliability, in percent, of the exponent's sign.
pub fn make_verdict(cell: &SweepCell, strong_threshold: f64, weak_threshold: f64) -> Result<Verdict> {
    if !(0.0 < weak_threshold && weak_threshold < strong_threshold && strong_threshold <= 100.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < weak < strong <= 100, got {weak_threshold} and {strong_threshold}"
        )));
    }
    let (Some(kappa), Some(mle)) = (cell.kappa, cell.mle) else {
        return Err(Error::InsufficientData(format!(
            "cell m={} tau={} has no exponent",
            cell.m, cell.tau
        )));
    };
    let pct = 100.0 * kappa;
    let sign = if mle > 0.0 { MleSign::Positive } else { MleSign::NonPositive };
    let classification = match sign {
        MleSign::Positive if pct >= strong_threshold => Classification::StrongEvidence,
        MleSign::Positive if pct >= weak_threshold => Classification::WeakEvidence,
        _ => Classification::NoEvidence,
    };
    // whole percent, truncated: 56.5 reads as 56
    let shown = pct.floor();
    let narrative = match (sign, classification) {
        (MleSign::NonPositive, _) => format!(
            "m={} tau={}: MLE {mle:.4} is not positive, no sensitive dependence on initial conditions (reliability ≃{shown}%)",
            cell.m, cell.tau
        ),
        (_, Classification::StrongEvidence) => format!(
            "m={} tau={}: positive MLE {mle:.4} with reliability ≃{shown}%: strong evidence of sensitive dependence on initial conditions",
            cell.m, cell.tau
        ),
        (_, Classification::WeakEvidence) => format!(
            "m={} tau={}: positive MLE {mle:.4} with reliability ≃{shown}%: weak evidence of sensitive dependence on initial conditions",
            cell.m, cell.tau
        ),
        (_, Classification::NoEvidence) => format!(
            "m={} tau={}: positive MLE {mle:.4} with reliability ≃{shown}%: too low to conclude sensitive dependence on initial conditions",
            cell.m, cell.tau
        ),
    };
    Ok(Verdict {
        m: cell.m,
        tau: cell.tau,
        kappa,
        mle,
        mle_sign: sign,
        reliability_percent: pct,
        classification,
        narrative,
    })
}

/// Verdicts for the top `k` cells of each `m` that carry an exponent, best first.
pub fn verdicts_for(cells: &[SweepCell], k: usize, strong: f64, weak: f64) -> Result<Vec<Verdict>> {
    let ms: BTreeSet<usize> = cells.iter().map(|c| c.m).collect();
    let mut out = Vec::new();
    for m in ms {
        let with_mle: Vec<SweepCell> = cells.iter().filter(|c| c.m == m && c.mle.is_some()).cloned().collect();
        for cell in top_k_by_kappa(&with_mle, k, m) {
            out.push(make_verdict(cell, strong, weak)?);
        }
    }
    Ok(out)
}
