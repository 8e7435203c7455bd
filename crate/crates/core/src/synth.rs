//! Reference signals with known dynamics.
//!
//! Stochastic generators draw from ChaCha8 seeded with `seed_from_u64`, so a
//! `(spec, seed)` pair always yields the same series.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub initial: [f64; 3],
    /// RK4 step.
    pub dt: f64,
    /// Integration steps per recorded sample.
    pub stride: usize,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            initial: [1.0, 1.0, 1.0],
            dt: 0.01,
            stride: 1,
        }
    }
}

impl LorenzParams {
    /// Time between recorded samples.
    pub fn sample_interval(&self) -> f64 {
        self.dt * self.stride as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.05) {
            return Err(Error::InvalidParameter(format!(
                "lorenz dt must be in (0, 0.05], got {}",
                self.dt
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("lorenz stride must be >= 1".into()));
        }
        if self.initial.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("lorenz initial state must be finite".into()));
        }
        Ok(())
    }

    fn field(&self, s: [f64; 3]) -> [f64; 3] {
        [
            self.sigma * (s[1] - s[0]),
            s[0] * (self.rho - s[2]) - s[1],
            s[0] * s[1] - self.beta * s[2],
        ]
    }

    fn rk4_step(&self, s: [f64; 3]) -> [f64; 3] {
        let h = self.dt;
        let add = |a: [f64; 3], k: [f64; 3], c: f64| [a[0] + c * k[0], a[1] + c * k[1], a[2] + c * k[2]];
        let k1 = self.field(s);
        let k2 = self.field(add(s, k1, h / 2.0));
        let k3 = self.field(add(s, k2, h / 2.0));
        let k4 = self.field(add(s, k3, h));
        [
            s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            s[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        ]
    }
}

fn check_length(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    Ok(())
}

/// Iterates `x -> r x (1 - x)`; the first kept value is `x0` when `transient == 0`.
pub fn gen_logistic(r: f64, x0: f64, n: usize, transient: usize) -> Result<TimeSeries> {
    check_length(n)?;
    if !(r > 0.0 && r <= 4.0) {
        return Err(Error::InvalidParameter(format!(
            "logistic r must be in (0, 4], got {r}"
        )));
    }
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "logistic x0 must be in (0, 1), got {x0}"
        )));
    }
    let mut x = x0;
    let mut out = Vec::with_capacity(n);
    for i in 0..n + transient {
        if i >= transient {
            out.push(x);
        }
        x = r * x * (1.0 - x);
    }
    TimeSeries::with_history(out, 1.0, format!("logistic r={r}"), vec!["synth".into()])
}

/// Full Lorenz states, one per recorded sample, after dropping `transient` samples.
pub fn lorenz_states(p: &LorenzParams, n: usize, transient: usize) -> Result<Vec<[f64; 3]>> {
    p.validate()?;
    let mut state = p.initial;
    let mut out = Vec::with_capacity(n);
    let mut step = 0usize;
    for i in 0..n + transient {
        if i >= transient {
            out.push(state);
        }
        for _ in 0..p.stride {
            state = p.rk4_step(state);
            step += 1;
            if state.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged(step));
            }
        }
    }
    Ok(out)
}

/// x-component of a fixed-step RK4 Lorenz integration.
pub fn gen_lorenz(p: &LorenzParams, n: usize, transient: usize) -> Result<TimeSeries> {
    check_length(n)?;
    let xs = lorenz_states(p, n, transient)?
        .into_iter()
        .map(|s| s[0])
        .collect();
    TimeSeries::with_history(
        xs,
        p.sample_interval(),
        format!("lorenz rho={}", p.rho),
        vec!["synth".into()],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    GaussianNoise { std: f64 },
    RandomWalk { std: f64 },
    Ar1 { phi: f64, std: f64 },
}

/// Stochastic baselines driven by one stream of standard normal innovations.
///
/// All kinds start from the first innovation, so an AR(1) with `phi = 0`
/// reproduces Gaussian noise element by element for the same seed.
pub fn gen_noise(kind: NoiseKind, n: usize, seed: u64, transient: usize) -> Result<TimeSeries> {
    check_length(n)?;
    let (phi, std, label) = match kind {
        NoiseKind::GaussianNoise { std } => (0.0, std, "gaussian_noise".to_string()),
        NoiseKind::RandomWalk { std } => (1.0, std, "random_walk".to_string()),
        NoiseKind::Ar1 { phi, std } => {
            if phi.is_nan() || phi.abs() >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "AR(1) needs |phi| < 1, got {phi}"
                )));
            }
            (phi, std, format!("ar1 phi={phi}"))
        }
    };
    if !(std > 0.0 && std.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise std must be positive, got {std}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut x = 0.0;
    let mut out = Vec::with_capacity(n);
    for i in 0..n + transient {
        let e: f64 = StandardNormal.sample(&mut rng);
        x = phi * x + std * e;
        if i >= transient {
            out.push(x);
        }
    }
    TimeSeries::with_history(out, 1.0, label, vec!["synth".into()])
}

/// Random permutation of the values; keeps the distribution, destroys the ordering.
pub fn shuffle_surrogate(s: &TimeSeries, seed: u64) -> Result<TimeSeries> {
    let mut values = s.values().to_vec();
    values.shuffle(&mut rng_from_seed(seed));
    let mut history = s.transform_history().to_vec();
    history.push("shuffle".into());
    TimeSeries::with_history(values, s.sample_interval(), s.label().to_string(), history)
}

/// Serializable description of any generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Logistic {
        r: f64,
        x0: f64,
        n: usize,
        transient: usize,
    },
    Lorenz {
        params: LorenzParams,
        n: usize,
        transient: usize,
    },
    Noise {
        noise: NoiseKind,
        n: usize,
        seed: u64,
        transient: usize,
    },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<TimeSeries> {
        match self {
            GeneratorSpec::Logistic { r, x0, n, transient } => gen_logistic(*r, *x0, *n, *transient),
            GeneratorSpec::Lorenz { params, n, transient } => gen_lorenz(params, *n, *transient),
            GeneratorSpec::Noise { noise, n, seed, transient } => gen_noise(*noise, *n, *seed, *transient),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_first_iterates() {
        let s = gen_logistic(4.0, 0.2, 4, 0).unwrap();
        for (got, want) in s.values().iter().zip([0.2, 0.64, 0.9216, 0.28901376]) {
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
    }

    #[test]
    fn logistic_fixed_point() {
        let s = gen_logistic(2.0, 0.3, 61, 0).unwrap();
        assert!((s.values()[60] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn logistic_stays_in_unit_interval() {
        let s = gen_logistic(4.0, 0.2, 1_000_000, 0).unwrap();
        assert!(s.values().iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn logistic_rejects_bad_params() {
        assert!(gen_logistic(4.1, 0.2, 10, 0).is_err());
        assert!(gen_logistic(3.0, 0.0, 10, 0).is_err());
        assert!(gen_logistic(3.0, 1.0, 10, 0).is_err());
        assert!(gen_logistic(3.0, 0.5, 1, 0).is_err());
    }

    #[test]
    fn lorenz_decays_below_unit_rho() {
        let p = LorenzParams { rho: 0.5, initial: [1.0, -2.0, 3.0], ..Default::default() };
        let s = gen_lorenz(&p, 5001, 0).unwrap();
        assert!(s.values()[5000].abs() < 1e-6);
    }

    #[test]
    fn lorenz_rho_below_one_monotone_energy() {
        let p = LorenzParams { rho: 0.5, initial: [1.0, -2.0, 3.0], ..Default::default() };
        let states = lorenz_states(&p, 2000, 100).unwrap();
        // V = x^2 / sigma + y^2 + z^2 is a Lyapunov function for rho < 1
        let energy: Vec<f64> = states
            .iter()
            .map(|s| s[0] * s[0] / p.sigma + s[1] * s[1] + s[2] * s[2])
            .collect();
        assert!(energy.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn lorenz_bounded_on_attractor() {
        let p = LorenzParams::default();
        let s = gen_lorenz(&p, 30_001, 0).unwrap();
        let max = s.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(max < 25.0, "max |x| = {max}");
    }

    #[test]
    fn lorenz_step_halving() {
        // fourth order: halving dt shrinks the change ~16-fold (2^3.5..2^5 at
        // this step size, still slightly pre-asymptotic)
        let at_t2 = |dt: f64, stride: usize| {
            let p = LorenzParams { dt, stride, ..Default::default() };
            gen_lorenz(&p, 201, 0).unwrap().values()[200]
        };
        let (a, b, c) = (at_t2(0.01, 1), at_t2(0.005, 2), at_t2(0.0025, 4));
        let ratio = (a - b).abs() / (b - c).abs();
        assert!((11.3..32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn lorenz_reports_divergence_step() {
        let p = LorenzParams { rho: 1e200, initial: [1e200, 1e200, 1e200], ..Default::default() };
        assert!(matches!(gen_lorenz(&p, 10, 0), Err(Error::Diverged(1))));
    }

    #[test]
    fn lorenz_rejects_large_step() {
        let p = LorenzParams { dt: 0.06, ..Default::default() };
        assert!(gen_lorenz(&p, 10, 0).is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let k = NoiseKind::GaussianNoise { std: 1.0 };
        assert_eq!(gen_noise(k, 100, 7, 0).unwrap(), gen_noise(k, 100, 7, 0).unwrap());
        assert_ne!(gen_noise(k, 100, 7, 0).unwrap(), gen_noise(k, 100, 8, 0).unwrap());
    }

    #[test]
    fn ar1_with_zero_phi_is_gaussian_noise() {
        let a = gen_noise(NoiseKind::Ar1 { phi: 0.0, std: 1.0 }, 500, 3, 10).unwrap();
        let g = gen_noise(NoiseKind::GaussianNoise { std: 1.0 }, 500, 3, 10).unwrap();
        assert_eq!(a.values(), g.values());
    }

    #[test]
    fn ar1_rejects_unit_root() {
        assert!(gen_noise(NoiseKind::Ar1 { phi: 1.0, std: 1.0 }, 10, 0, 0).is_err());
    }

    #[test]
    fn random_walk_variance_grows_linearly() {
        // sample variance across 50 seeds at each index, regressed on t
        let n = 400;
        let walks: Vec<Vec<f64>> = (0..50)
            .map(|seed| gen_noise(NoiseKind::RandomWalk { std: 1.0 }, n, seed, 0).unwrap().values().to_vec())
            .collect();
        let var: Vec<f64> = (0..n)
            .map(|t| {
                let mean = walks.iter().map(|w| w[t]).sum::<f64>() / 50.0;
                walks.iter().map(|w| (w[t] - mean).powi(2)).sum::<f64>() / 49.0
            })
            .collect();
        let ts: Vec<f64> = (0..n).map(|t| t as f64).collect();
        let (mt, mv) = (ts.iter().sum::<f64>() / n as f64, var.iter().sum::<f64>() / n as f64);
        let sxy: f64 = ts.iter().zip(&var).map(|(t, v)| (t - mt) * (v - mv)).sum();
        let sxx: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
        let syy: f64 = var.iter().map(|v| (v - mv).powi(2)).sum();
        let r2 = sxy * sxy / (sxx * syy);
        assert!(r2 > 0.95, "R^2 = {r2}");
        assert!(sxy / sxx > 0.0);
    }

    #[test]
    fn surrogate_is_a_seeded_permutation() {
        let s = gen_lorenz(&LorenzParams::default(), 1000, 100).unwrap();
        let a = shuffle_surrogate(&s, 11).unwrap();
        let b = shuffle_surrogate(&s, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values(), s.values());
        let mut x = a.values().to_vec();
        let mut y = s.values().to_vec();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        assert_eq!(x, y);
    }

    #[test]
    fn spec_dispatch() {
        let spec = GeneratorSpec::Logistic { r: 4.0, x0: 0.2, n: 3, transient: 0 };
        let direct = gen_logistic(4.0, 0.2, 3, 0).unwrap();
        assert_eq!(spec.generate().unwrap().values(), direct.values());
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<GeneratorSpec>(&json).unwrap(), spec);
    }
}
