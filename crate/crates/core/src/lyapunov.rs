//! Largest Lyapunov exponent by Wolf's fiducial-trajectory method.
//!
//! A fiducial trajectory starting at the first embedded point is paired with
//! a nearby point from elsewhere in the series. Both are advanced
//! `evolve_steps` samples at a time and the log stretch `ln(L'/L)` of their
//! separation is accumulated. Once the separation exceeds `scale_max` the
//! neighbor is replaced: among points within `[scale_min, scale_max]` of the
//! fiducial point, the one whose offset is most nearly parallel to the old
//! separation wins, so the tracked vector stays on the most expanding
//! direction. When the shell is empty the nearest admissible point is used.
//! The estimate is the accumulated stretch divided by the number of samples
//! evolved.

use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    E,
    Two,
}

impl LogBase {
    pub fn ln(self) -> f64 {
        match self {
            LogBase::E => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            LogBase::E => "nats/sample",
            LogBase::Two => "bits/sample",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "E" => Ok(LogBase::E),
            "2" => Ok(LogBase::Two),
            other => Err(Error::InvalidParameter(format!(
                "log base must be 'e' or '2', got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WolfParams {
    /// Samples advanced between checks for replacement.
    pub evolve_steps: usize,
    /// Separations below this are treated as noise.
    pub scale_min: f64,
    /// Separation that triggers a neighbor replacement.
    pub scale_max: f64,
    /// Minimum index gap between the fiducial point and its neighbor.
    pub min_time_separation: usize,
    pub log_base: LogBase,
    pub record_trace: bool,
}

impl WolfParams {
    /// Defaults for an embedding with the given `(m, tau)`; the minimum time
    /// separation is one embedding window `m * tau`.
    pub fn for_embedding(m: usize, tau: usize) -> Self {
        Self {
            evolve_steps: 3,
            scale_min: 0.001,
            scale_max: 0.03,
            min_time_separation: (m * tau).max(1),
            log_base: LogBase::E,
            record_trace: false,
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.evolve_steps == 0 {
            return Err(Error::InvalidParameter("evolve_steps must be >= 1".into()));
        }
        if self.min_time_separation == 0 {
            return Err(Error::InvalidParameter("min_time_separation must be >= 1".into()));
        }
        let diameter = (m as f64).sqrt();
        if !(self.scale_min > 0.0 && self.scale_min < self.scale_max && self.scale_max <= diameter) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < scale_min < scale_max <= sqrt(m) = {diameter:.4}, got {} and {}",
                self.scale_min, self.scale_max
            )));
        }
        Ok(())
    }
}

/// One evolve cycle of the fiducial pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Fiducial index at the start of the cycle.
    pub step: usize,
    pub separation_before: f64,
    pub separation_after: f64,
    /// Whether a replacement was attempted after this cycle.
    pub replaced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    /// Per sample step, in units of `log_base`.
    pub lambda_max: f64,
    pub log_base: LogBase,
    pub replacements: usize,
    pub steps_used: usize,
    pub trace: Option<Vec<TraceRecord>>,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

struct Search<'a> {
    emb: &'a Embedding,
    p: &'a WolfParams,
    /// Exclusive bound on neighbor indices that can still be evolved.
    limit: usize,
}

impl Search<'_> {
    fn admissible(&self, fid: usize, k: usize) -> bool {
        k < self.limit && fid.abs_diff(k) >= self.p.min_time_separation
    }

    /// Nearest point at distance >= scale_min; ties go to the lowest index.
    fn nearest(&self, fid: usize) -> Option<(usize, f64)> {
        let origin = self.emb.point(fid);
        let mut best: Option<(usize, f64)> = None;
        for k in 0..self.limit {
            if !self.admissible(fid, k) {
                continue;
            }
            let d = distance(origin, self.emb.point(k));
            if d >= self.p.scale_min && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        best
    }

    /// Point within [scale_min, scale_max] of the fiducial point whose offset
    /// makes the smallest angle with `direction`; ties go to the lowest index.
    fn replacement(&self, fid: usize, direction: &[f64]) -> Option<(usize, f64)> {
        let origin = self.emb.point(fid);
        let dir_norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if dir_norm == 0.0 {
            return None;
        }
        let mut candidates = Vec::new();
        for k in 0..self.limit {
            if !self.admissible(fid, k) {
                continue;
            }
            let pk = self.emb.point(k);
            let d = distance(origin, pk);
            if d < self.p.scale_min || d > self.p.scale_max {
                continue;
            }
            let dot: f64 = pk
                .iter()
                .zip(origin)
                .zip(direction)
                .map(|((a, b), u)| (a - b) * u)
                .sum();
            let cos = (dot / (d * dir_norm)).clamp(-1.0, 1.0);
            candidates.push((k, d, cos));
        }
        candidates
            .into_iter()
            .fold(None::<(usize, f64, f64)>, |best, (k, d, cos)| match best {
                Some((_, _, bc)) if bc >= cos => best,
                _ => Some((k, d, cos)),
            })
            .map(|(k, d, _)| (k, d))
    }
}

pub fn max_lyapunov(emb: &Embedding, p: &WolfParams) -> Result<LyapunovResult> {
    p.validate(emb.dim())?;
    let n = emb.len();
    let evolve = p.evolve_steps;
    if n < evolve + 2 {
        return Err(Error::EmbeddingTooShort {
            points: n,
            needed: evolve + 2,
        });
    }
    if let Some(i) = emb.first_out_of_unit_cube() {
        return Err(Error::NotNormalized(i));
    }
    let search = Search {
        emb,
        p,
        limit: n - evolve,
    };

    let mut fid = 0;
    let (mut nb, _) = search.nearest(fid).ok_or(Error::NoInitialNeighbor)?;
    let mut log_sum = 0.0;
    let mut steps_used = 0;
    let mut replacements = 0;
    let mut trace = p.record_trace.then(Vec::new);

    while fid + evolve < n && nb + evolve < n {
        let before = distance(emb.point(fid), emb.point(nb));
        let (f2, n2) = (fid + evolve, nb + evolve);
        let after = distance(emb.point(f2), emb.point(n2));
        if before > 0.0 && after > 0.0 {
            log_sum += (after / before).ln();
            steps_used += evolve;
        }
        fid = f2;
        let needs_new = after > p.scale_max || after < p.scale_min || n2 + evolve >= n;
        if let Some(t) = trace.as_mut() {
            t.push(TraceRecord {
                step: fid - evolve,
                separation_before: before,
                separation_after: after,
                replaced: needs_new,
            });
        }
        if fid + evolve >= n {
            break;
        }
        if needs_new {
            let direction: Vec<f64> = emb
                .point(n2)
                .iter()
                .zip(emb.point(f2))
                .map(|(a, b)| a - b)
                .collect();
            let pick = search
                .replacement(fid, &direction)
                .or_else(|| search.nearest(fid));
            match pick {
                Some((k, _)) => {
                    nb = k;
                    replacements += 1;
                }
                None => break,
            }
        } else {
            nb = n2;
        }
    }

    if steps_used == 0 {
        return Err(Error::InsufficientData(
            "no evolve cycle produced a usable separation".into(),
        ));
    }
    Ok(LyapunovResult {
        lambda_max: log_sum / steps_used as f64 / p.log_base.ln(),
        log_base: p.log_base,
        replacements,
        steps_used,
        trace,
    })
}
