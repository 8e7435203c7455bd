//! Kaplan–Glass determinism coefficient.
//!
//! The unit hypercube is cut into `q^m` equal boxes. Each pass of the
//! trajectory through a box contributes the unit vector from the pass's
//! entry sample to the first sample after it leaves the box. Passes made of
//! a single sample carry no displacement inside the box and are skipped.
//! For every box with at least `min_passes` passes the pass vectors are
//! averaged, and κ is the pass-weighted mean length of those averages:
//!
//! ```text
//! κ = Σ_k n_k |V_k| / Σ_k n_k
//! ```
//!
//! A smooth flow gives aligned vectors in each box and κ near 1; a process
//! without a coherent vector field gives κ near the chance level.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterminismParams {
    /// Boxes per axis.
    pub grid_subdivisions: usize,
    /// Boxes with fewer passes are left out of κ.
    pub min_passes: usize,
}

impl Default for DeterminismParams {
    fn default() -> Self {
        Self {
            grid_subdivisions: 10,
            min_passes: 2,
        }
    }
}

impl DeterminismParams {
    pub fn validate(&self) -> Result<()> {
        if self.grid_subdivisions < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid subdivisions must be >= 2, got {}",
                self.grid_subdivisions
            )));
        }
        if self.min_passes < 1 {
            return Err(Error::InvalidParameter("min_passes must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterminismResult {
    pub kappa: f64,
    /// Boxes that received at least one pass vector.
    pub occupied_boxes: usize,
    /// Passes in the boxes that entered κ.
    pub total_passes: usize,
    /// Occupied boxes below `min_passes`.
    pub excluded_boxes: usize,
}

#[derive(Debug, Default)]
struct BoxAccumulator {
    sum: Vec<f64>,
    passes: usize,
}

fn box_key(point: &[f64], q: usize) -> u64 {
    point.iter().rev().fold(0u64, |key, &c| {
        let cell = ((c * q as f64) as usize).min(q - 1);
        key * q as u64 + cell as u64
    })
}

pub fn determinism_coefficient(
    embedding: &Embedding,
    params: &DeterminismParams,
) -> Result<DeterminismResult> {
    params.validate()?;
    let q = params.grid_subdivisions;
    let m = embedding.dim();
    if (q as f64).powi(m as i32) >= u64::MAX as f64 {
        return Err(Error::InvalidParameter(format!(
            "grid of {q}^{m} boxes is too large"
        )));
    }
    if embedding.len() < 2 {
        return Err(Error::EmbeddingTooShort {
            points: embedding.len(),
            needed: 2,
        });
    }
    if let Some(i) = embedding.first_out_of_unit_cube() {
        return Err(Error::NotNormalized(i));
    }

    let n = embedding.len();
    let keys: Vec<u64> = embedding.points().map(|p| box_key(p, q)).collect();
    let mut boxes: BTreeMap<u64, BoxAccumulator> = BTreeMap::new();
    let mut direction = vec![0.0; m];

    let mut entry = 0;
    while entry < n {
        let key = keys[entry];
        let mut exit = entry;
        while exit + 1 < n && keys[exit + 1] == key {
            exit += 1;
        }
        let next = exit + 1;
        if exit > entry && next < n {
            let from = embedding.point(entry);
            let to = embedding.point(next);
            let mut len2 = 0.0;
            for j in 0..m {
                direction[j] = to[j] - from[j];
                len2 += direction[j] * direction[j];
            }
            if len2 > 0.0 {
                let len = len2.sqrt();
                let acc = boxes.entry(key).or_insert_with(|| BoxAccumulator {
                    sum: vec![0.0; m],
                    passes: 0,
                });
                for (s, d) in acc.sum.iter_mut().zip(&direction) {
                    *s += d / len;
                }
                acc.passes += 1;
            }
        }
        entry = next;
    }

    let mut weighted = 0.0;
    let mut total_passes = 0;
    let mut excluded_boxes = 0;
    for acc in boxes.values() {
        if acc.passes < params.min_passes {
            excluded_boxes += 1;
            continue;
        }
        let mean_len = acc.sum.iter().map(|s| s * s).sum::<f64>().sqrt() / acc.passes as f64;
        weighted += acc.passes as f64 * mean_len;
        total_passes += acc.passes;
    }
    if total_passes == 0 {
        return Err(Error::NoQualifyingBoxes(params.min_passes));
    }
    Ok(DeterminismResult {
        kappa: (weighted / total_passes as f64).clamp(0.0, 1.0),
        occupied_boxes: boxes.len(),
        total_passes,
        excluded_boxes,
    })
}
