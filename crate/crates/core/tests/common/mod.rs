//! Reference values computed without the library's estimators.

#![allow(dead_code)]

use std::path::PathBuf;

/// Mean of ln|f'(x)| = ln|r (1 - 2x)| along a logistic orbit.
pub fn logistic_derivative_average(r: f64, x0: f64, n: usize, transient: usize) -> f64 {
    let mut x = x0;
    for _ in 0..transient {
        x = r * x * (1.0 - x);
    }
    let mut sum = 0.0;
    for _ in 0..n {
        sum += (r * (1.0 - 2.0 * x)).abs().ln();
        x = r * x * (1.0 - x);
    }
    sum / n as f64
}

type State = [f64; 6];

/// Lorenz flow together with its linearization acting on a tangent vector.
fn flow(s: &State, sigma: f64, rho: f64, beta: f64) -> State {
    let (x, y, z) = (s[0], s[1], s[2]);
    let (u, v, w) = (s[3], s[4], s[5]);
    [
        sigma * (y - x),
        x * (rho - z) - y,
        x * y - beta * z,
        sigma * (v - u),
        (rho - z) * u - v - x * w,
        y * u + x * v - beta * w,
    ]
}

fn rk4(s: &State, h: f64, sigma: f64, rho: f64, beta: f64) -> State {
    let shift = |a: &State, k: &State, c: f64| {
        let mut out = *a;
        for i in 0..6 {
            out[i] += c * k[i];
        }
        out
    };
    let k1 = flow(s, sigma, rho, beta);
    let k2 = flow(&shift(s, &k1, h / 2.0), sigma, rho, beta);
    let k3 = flow(&shift(s, &k2, h / 2.0), sigma, rho, beta);
    let k4 = flow(&shift(s, &k3, h), sigma, rho, beta);
    let mut out = *s;
    for i in 0..6 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Largest Lyapunov exponent of the standard Lorenz system per unit time,
/// from a tangent vector renormalized after every step.
pub fn lorenz_benettin(dt: f64, transient_time: f64, total_time: f64) -> f64 {
    let (sigma, rho, beta) = (10.0, 28.0, 8.0 / 3.0);
    let mut s: State = [1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
    let warm = (transient_time / dt) as usize;
    let steps = (total_time / dt) as usize;
    let mut sum = 0.0;
    for i in 0..warm + steps {
        s = rk4(&s, dt, sigma, rho, beta);
        let norm = (s[3] * s[3] + s[4] * s[4] + s[5] * s[5]).sqrt();
        for c in &mut s[3..] {
            *c /= norm;
        }
        if i >= warm {
            sum += norm.ln();
        }
    }
    sum / (steps as f64 * dt)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}
