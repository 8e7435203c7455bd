//! Grassberger–Procaccia correlation sums, correlation dimension D2 and the
//! K2 correlation entropy.
//!
//! Distances use the max norm. Pairs closer in time than the Theiler window
//! are never counted. All embedding dimensions of a profile share one pair
//! set (the points that exist at the largest `m`), which makes `C_m(ε)`
//! nonincreasing in `m` pair by pair and keeps the K2 ratios well defined.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Log-spaced radii from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && count >= 2) {
        return Err(Error::InvalidParameter(format!(
            "epsilon grid needs 0 < min < max and count >= 2, got {min}, {max}, {count}"
        )));
    }
    let (a, b) = (min.ln(), max.ln());
    let step = (b - a) / (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count).map(|k| (a + step * k as f64).exp()).collect();
    grid[0] = min;
    grid[count - 1] = max;
    Ok(grid)
}

fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |d, (x, y)| d.max((x - y).abs()))
}

/// Fraction of pairs `(i, j)`, `|i - j| > theiler`, closer than `eps`.
///
/// Plain double loop; [`correlation_profile`] must agree with it exactly.
pub fn correlation_integral(emb: &Embedding, eps: f64, theiler: usize) -> Result<f64> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let n = emb.len();
    let mut total = 0u64;
    let mut close = 0u64;
    for i in 0..n {
        for j in (i + theiler + 1)..n {
            total += 1;
            if max_norm(emb.point(i), emb.point(j)) < eps {
                close += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::NoAdmissiblePairs(theiler));
    }
    Ok(close as f64 / total as f64)
}

/// Maps a distance to the number of grid radii `<= d`.
///
/// A table keyed on the exponent and top mantissa bits gives the answer for
/// the bottom of each bucket; buckets are narrower than a typical grid step,
/// so the final walk is usually zero or one comparison.
struct Slotter<'a> {
    grid: &'a [f64],
    table: Vec<u32>,
}

const BUCKET_SHIFT: u32 = 46;

impl<'a> Slotter<'a> {
    fn new(grid: &'a [f64]) -> Self {
        let table = (0..1u64 << (63 - BUCKET_SHIFT))
            .map(|b| {
                let floor = f64::from_bits(b << BUCKET_SHIFT);
                grid.partition_point(|&e| e <= floor) as u32
            })
            .collect();
        Self { grid, table }
    }

    #[inline]
    fn slot(&self, d: f64) -> usize {
        // non-negative, so the sign bit is clear
        let bits = d.to_bits();
        if bits >> 63 != 0 || d.is_nan() {
            return 0;
        }
        let mut s = self.table[(bits >> BUCKET_SHIFT) as usize] as usize;
        while s < self.grid.len() && self.grid[s] <= d {
            s += 1;
        }
        s
    }
}

/// Pair counts for several embedding dimensions over one radius grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCounts {
    pub epsilons: Vec<f64>,
    /// m -> number of pairs closer than each radius.
    pub counts: BTreeMap<usize, Vec<u64>>,
    pub total_pairs: u64,
}

impl PairCounts {
    pub fn c(&self, m: usize) -> Option<Vec<f64>> {
        let total = self.total_pairs as f64;
        self.counts
            .get(&m)
            .map(|c| c.iter().map(|&k| k as f64 / total).collect())
    }
}

/// Counts close pairs for every `m` in `m_list` in a single sweep.
pub fn pair_counts(
    values: &[f64],
    m_list: &[usize],
    tau: usize,
    epsilons: &[f64],
    theiler: usize,
) -> Result<PairCounts> {
    if m_list.is_empty() || m_list.contains(&0) || tau == 0 {
        return Err(Error::InvalidParameter("m_list must hold m >= 1 and tau >= 1".into()));
    }
    if epsilons.is_empty() || epsilons.windows(2).any(|w| w[0] >= w[1]) || epsilons[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "epsilons must be positive and strictly increasing".into(),
        ));
    }
    let max_m = *m_list.iter().max().unwrap();
    let window = (max_m - 1) * tau;
    let n = values
        .len()
        .checked_sub(window)
        .filter(|&n| n > 0)
        .ok_or(Error::SeriesTooShort {
            len: values.len(),
            m: max_m,
            tau,
        })?;
    let k = epsilons.len();
    let slotter = Slotter::new(epsilons);
    let mut wanted = vec![false; max_m + 1];
    for &m in m_list {
        wanted[m] = true;
    }
    // hist[m][s]: pairs with exactly s radii <= distance
    let mut hist = vec![vec![0u64; k + 1]; max_m + 1];
    let mut total = 0u64;
    let mut dist = vec![0.0f64; n];
    for i in 0..n {
        let start = i + theiler + 1;
        if start >= n {
            break;
        }
        let row = &mut dist[start..n];
        row.fill(0.0);
        total += row.len() as u64;
        for m in 1..=max_m {
            let off = (m - 1) * tau;
            let xi = values[i + off];
            let xs = &values[start + off..n + off];
            for (d, &x) in row.iter_mut().zip(xs) {
                *d = d.max((xi - x).abs());
            }
            if wanted[m] {
                let h = &mut hist[m];
                for &d in row.iter() {
                    h[slotter.slot(d)] += 1;
                }
            }
        }
    }
    if total == 0 {
        return Err(Error::NoAdmissiblePairs(theiler));
    }
    let mut counts = BTreeMap::new();
    for &m in m_list {
        let mut running = 0u64;
        let cumulative: Vec<u64> = (0..k)
            .map(|e| {
                running += hist[m][e];
                running
            })
            .collect();
        counts.insert(m, cumulative);
    }
    Ok(PairCounts {
        epsilons: epsilons.to_vec(),
        counts,
        total_pairs: total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Least-squares slope of ln C against ln ε.
    pub slope: f64,
    pub eps_lo: f64,
    pub eps_hi: f64,
    /// Grid indices of the fitted run, inclusive.
    pub first: usize,
    pub last: usize,
    /// Largest absolute residual of ln C about the fit.
    pub max_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct D2Estimate {
    pub m: usize,
    /// `None` when no scaling region exists.
    pub fit: Option<ScalingFit>,
}

/// Grid points with at least `min_pairs` close pairs and not yet saturated.
fn usable(counts: &[u64], total: u64, min_pairs: u64) -> Vec<bool> {
    counts.iter().map(|&c| c >= min_pairs && c < total).collect()
}

/// Longest run of usable grid points whose local slopes stay within
/// `slope_tol` (relative to their mean) of each other.
pub fn fit_scaling_region(
    epsilons: &[f64],
    counts: &[u64],
    total: u64,
    min_pairs: u64,
    slope_tol: f64,
) -> Option<ScalingFit> {
    let ok = usable(counts, total, min_pairs);
    let ln_e: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ln_c: Vec<f64> = counts.iter().map(|&c| (c as f64 / total as f64).ln()).collect();
    let k = epsilons.len();
    // local[i] is the slope between grid points i and i + 1
    let local: Vec<Option<f64>> = (0..k.saturating_sub(1))
        .map(|i| (ok[i] && ok[i + 1]).then(|| (ln_c[i + 1] - ln_c[i]) / (ln_e[i + 1] - ln_e[i])))
        .collect();

    let mut best: Option<(usize, usize, f64)> = None;
    for start in 0..local.len() {
        let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for (end, slope) in local.iter().enumerate().skip(start) {
            let Some(s) = *slope else { break };
            lo = lo.min(s);
            hi = hi.max(s);
            sum += s;
            let mean = sum / (end - start + 1) as f64;
            if mean <= 0.0 || hi - lo >= slope_tol * mean {
                break;
            }
            // at least three grid points, i.e. two local slopes
            let points = end - start + 2;
            if points < 3 {
                continue;
            }
            let spread = hi - lo;
            let better = match best {
                None => true,
                Some((bs, be, bspread)) => {
                    let bpoints = be - bs + 2;
                    points > bpoints || (points == bpoints && spread < bspread)
                }
            };
            if better {
                best = Some((start, end, spread));
            }
        }
    }

    let (start, end, _) = best?;
    let (first, last) = (start, end + 1);
    let xs = &ln_e[first..=last];
    let ys = &ln_c[first..=last];
    let cnt = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / cnt;
    let my = ys.iter().sum::<f64>() / cnt;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Some(ScalingFit {
        slope,
        eps_lo: epsilons[first],
        eps_hi: epsilons[last],
        first,
        last,
        max_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Saturation {
    Deterministic,
    Stochastic,
    Inconclusive,
}

/// Verdict from D2 estimates ordered by `m`.
///
/// Deterministic when each of the last two increments is below `tol`;
/// Stochastic when D2 rises by more than `0.5 * Δm` across the upper half of
/// the `m` range.
pub fn saturation_verdict(d2_by_m: &BTreeMap<usize, f64>, tol: f64) -> Result<Saturation> {
    if d2_by_m.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "saturation needs D2 at >= 3 embedding dimensions, got {}",
            d2_by_m.len()
        )));
    }
    let entries: Vec<(usize, f64)> = d2_by_m.iter().map(|(&m, &d)| (m, d)).collect();
    let last = entries.len() - 1;
    let inc1 = entries[last].1 - entries[last - 1].1;
    let inc2 = entries[last - 1].1 - entries[last - 2].1;
    if inc1.abs() < tol && inc2.abs() < tol {
        return Ok(Saturation::Deterministic);
    }
    let (m_hi, d_hi) = entries[last];
    let (m_mid, d_mid) = entries[last / 2];
    if d_hi - d_mid > 0.5 * (m_hi - m_mid) as f64 {
        return Ok(Saturation::Stochastic);
    }
    Ok(Saturation::Inconclusive)
}

/// Verdict from a matrix of `log10 C(ε)` at one radius, one row per delay and
/// one column per embedding dimension (increasing).
///
/// A row has saturated when its last two per-unit-m declines have both
/// shrunk to at most `flat_ratio` times the first; it is stochastic when it
/// keeps falling above that rate. The matrix verdict holds only when every
/// row agrees.
pub fn saturation_from_log_c(m_values: &[usize], rows: &[Vec<f64>], flat_ratio: f64) -> Result<Saturation> {
    if m_values.len() < 3 || m_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InsufficientData(
            "need >= 3 strictly increasing embedding dimensions".into(),
        ));
    }
    if rows.is_empty() || rows.iter().any(|r| r.len() != m_values.len()) {
        return Err(Error::InvalidParameter("each row needs one value per m".into()));
    }
    let row_verdict = |row: &Vec<f64>| {
        let declines: Vec<f64> = row
            .windows(2)
            .zip(m_values.windows(2))
            .map(|(c, m)| (c[0] - c[1]) / (m[1] - m[0]) as f64)
            .collect();
        let first = declines[0];
        let tail = &declines[declines.len() - 2..];
        if first <= 0.0 || declines.iter().any(|&d| d < 0.0) {
            Saturation::Inconclusive
        } else if tail.iter().all(|&d| d <= flat_ratio * first) {
            Saturation::Deterministic
        } else if declines.iter().all(|&d| d > 0.0) {
            Saturation::Stochastic
        } else {
            Saturation::Inconclusive
        }
    };
    let verdicts: Vec<Saturation> = rows.iter().map(row_verdict).collect();
    Ok(if verdicts.iter().all(|v| *v == verdicts[0]) {
        verdicts[0]
    } else {
        Saturation::Inconclusive
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K2Estimate {
    /// Lower embedding dimension of the pair `(m, m + 1)`.
    pub m: usize,
    /// Mean of K2(ε) over the averaging range, nats per sample.
    pub k2: f64,
    /// K2(ε) per grid radius; `None` where either sum is zero.
    pub per_eps: Vec<Option<f64>>,
    /// Grid indices averaged over, inclusive.
    pub range: (usize, usize),
    /// K2(ε) keeps climbing as ε shrinks instead of levelling off.
    pub divergent: bool,
}

/// Growth of `τ·K2` per e-fold decrease of ε above which K2 is taken to diverge.
pub const K2_DIVERGENCE_SLOPE: f64 = 0.5;

/// `K2(ε) = ln(C_m(ε) / C_{m+1}(ε)) / τ`, averaged over `range` (grid
/// indices, inclusive) or over every radius where both sums are positive.
pub fn k2_entropy(
    epsilons: &[f64],
    c_m: &[f64],
    c_m1: &[f64],
    tau: usize,
    m: usize,
    range: Option<(usize, usize)>,
) -> Result<K2Estimate> {
    if c_m.len() != epsilons.len() || c_m1.len() != epsilons.len() {
        return Err(Error::InvalidParameter("C lists must share the epsilon grid".into()));
    }
    if tau == 0 {
        return Err(Error::InvalidParameter("tau must be >= 1".into()));
    }
    let per_eps: Vec<Option<f64>> = c_m
        .iter()
        .zip(c_m1)
        .map(|(&a, &b)| (a > 0.0 && b > 0.0).then(|| (a / b).ln() / tau as f64))
        .collect();
    let valid: Vec<usize> = (0..per_eps.len()).filter(|&i| per_eps[i].is_some()).collect();
    if valid.is_empty() {
        return Err(Error::InsufficientData(
            "correlation sums are zero over the whole grid".into(),
        ));
    }
    let (lo, hi) = range.unwrap_or((valid[0], valid[valid.len() - 1]));
    let points: Vec<(f64, f64)> = (lo..=hi.min(per_eps.len() - 1))
        .filter_map(|i| per_eps[i].map(|k| (-epsilons[i].ln(), k * tau as f64)))
        .collect();
    if points.is_empty() {
        return Err(Error::InsufficientData("no positive sums in the K2 range".into()));
    }
    let k2 = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64 / tau as f64;
    let divergent = if points.len() >= 2 {
        let cnt = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / cnt;
        let my = points.iter().map(|p| p.1).sum::<f64>() / cnt;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        sxy / sxx > K2_DIVERGENCE_SLOPE
    } else {
        false
    };
    Ok(K2Estimate {
        m,
        k2,
        per_eps,
        range: (lo, hi),
        divergent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrdimParams {
    pub m_list: Vec<usize>,
    pub tau: usize,
    pub epsilons: Vec<f64>,
    /// Defaults to `tau * max(m_list)`.
    pub theiler: Option<usize>,
    /// Allowed spread of local slopes in a scaling region, relative to their mean.
    pub slope_tol: f64,
    /// Grid points with fewer close pairs are ignored.
    pub min_pairs: u64,
    /// Increment tolerance for the D2 saturation verdict.
    pub saturation_tol: f64,
}

impl CorrdimParams {
    pub fn new(m_list: Vec<usize>, tau: usize) -> Self {
        Self {
            m_list,
            tau,
            epsilons: log_grid(1e-3, 1.0, 24).expect("static grid"),
            theiler: None,
            slope_tol: 0.15,
            min_pairs: 50,
            saturation_tol: 0.2,
        }
    }

    pub fn theiler_window(&self) -> usize {
        self.theiler
            .unwrap_or_else(|| self.tau * self.m_list.iter().copied().max().unwrap_or(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationProfile {
    pub epsilons: Vec<f64>,
    pub tau: usize,
    pub theiler_window: usize,
    pub total_pairs: u64,
    pub c_by_m: BTreeMap<usize, Vec<f64>>,
    pub d2_by_m: BTreeMap<usize, D2Estimate>,
    /// Keyed by the lower dimension of each consecutive pair `(m, m + 1)` in `m_list`.
    pub k2_by_m: BTreeMap<usize, K2Estimate>,
    pub saturation: Saturation,
}

impl CorrelationProfile {
    /// Fitted slopes only.
    pub fn d2_values(&self) -> BTreeMap<usize, f64> {
        self.d2_by_m
            .iter()
            .filter_map(|(&m, e)| e.fit.map(|f| (m, f.slope)))
            .collect()
    }
}

/// Full correlation analysis of a series; the series is min–max normalized first.
pub fn correlation_profile(series: &TimeSeries, p: &CorrdimParams) -> Result<CorrelationProfile> {
    if p.epsilons.len() < 6 {
        return Err(Error::InvalidParameter(format!(
            "epsilon grid needs >= 6 radii, got {}",
            p.epsilons.len()
        )));
    }
    let mut m_list = p.m_list.clone();
    m_list.sort_unstable();
    m_list.dedup();
    let normalized = series.min_max_normalize()?;
    let theiler = p.theiler_window();
    let counts = pair_counts(normalized.values(), &m_list, p.tau, &p.epsilons, theiler)?;

    let mut d2_by_m = BTreeMap::new();
    for &m in &m_list {
        let fit = fit_scaling_region(&p.epsilons, &counts.counts[&m], counts.total_pairs, p.min_pairs, p.slope_tol);
        d2_by_m.insert(m, D2Estimate { m, fit });
    }

    let mut k2_by_m = BTreeMap::new();
    for pair in m_list.windows(2) {
        let (m, m1) = (pair[0], pair[1]);
        if m1 != m + 1 {
            continue;
        }
        let c_m = counts.c(m).unwrap();
        let c_m1 = counts.c(m1).unwrap();
        let range = d2_by_m[&m].fit.map(|f| (f.first, f.last)).or_else(|| {
            let ok: Vec<usize> = (0..p.epsilons.len())
                .filter(|&i| counts.counts[&m1][i] >= p.min_pairs)
                .collect();
            ok.first().map(|&lo| (lo, *ok.last().unwrap()))
        });
        if let Ok(k2) = k2_entropy(&p.epsilons, &c_m, &c_m1, p.tau, m, range) {
            k2_by_m.insert(m, k2);
        }
    }

    let c_by_m: BTreeMap<usize, Vec<f64>> = m_list.iter().map(|&m| (m, counts.c(m).unwrap())).collect();
    let mut profile = CorrelationProfile {
        epsilons: p.epsilons.clone(),
        tau: p.tau,
        theiler_window: theiler,
        total_pairs: counts.total_pairs,
        c_by_m,
        d2_by_m,
        k2_by_m,
        saturation: Saturation::Inconclusive,
    };
    profile.saturation =
        saturation_verdict(&profile.d2_values(), p.saturation_tol).unwrap_or(Saturation::Inconclusive);
    Ok(profile)
}
