use std::path::PathBuf;

use chaoscope_core::series::CsvOptions;
use chaoscope_core::synth::{gen_logistic, gen_lorenz, gen_noise, shuffle_surrogate, LorenzParams, NoiseKind};
use chaoscope_core::{load_csv, Error, TimeSeries};
use clap::{Args, Subcommand};

use crate::emit;

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(subcommand)]
    kind: Kind,
    /// Write here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Kind {
    /// x -> r x (1 - x).
    Logistic {
        #[arg(long, default_value_t = 4.0)]
        r: f64,
        #[arg(long, default_value_t = 0.2)]
        x0: f64,
        #[arg(long, default_value_t = 10000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        transient: usize,
    },
    /// x-component of the Lorenz system, fixed-step RK4.
    Lorenz {
        #[arg(long, default_value_t = 10.0)]
        sigma: f64,
        #[arg(long, default_value_t = 28.0)]
        rho: f64,
        #[arg(long, default_value_t = 8.0 / 3.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Integration steps per recorded sample.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, default_value_t = 30000)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        transient: usize,
    },
    /// iid Gaussian noise.
    Noise {
        #[arg(long, default_value_t = 1.0)]
        std: f64,
        #[arg(long, default_value_t = 10000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cumulative sum of Gaussian steps.
    RandomWalk {
        #[arg(long, default_value_t = 1.0)]
        std: f64,
        #[arg(long, default_value_t = 10000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// x[t] = phi x[t-1] + noise.
    Ar1 {
        #[arg(long, default_value_t = 0.5)]
        phi: f64,
        #[arg(long, default_value_t = 1.0)]
        std: f64,
        #[arg(long, default_value_t = 10000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        transient: usize,
    },
    /// Random permutation of an existing series (first column of a CSV with header).
    Shuffle {
        csv: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn to_csv(s: &TimeSeries) -> String {
    let mut out = String::with_capacity(s.len() * 20);
    out.push_str("value\n");
    for v in s.values() {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

pub fn run(a: SynthArgs) -> Result<(), Error> {
    let series = match a.kind {
        Kind::Logistic { r, x0, n, transient } => gen_logistic(r, x0, n, transient)?,
        Kind::Lorenz { sigma, rho, beta, dt, stride, n, transient } => {
            let p = LorenzParams { sigma, rho, beta, dt, stride, ..Default::default() };
            gen_lorenz(&p, n, transient)?
        }
        Kind::Noise { std, n, seed } => gen_noise(NoiseKind::GaussianNoise { std }, n, seed, 0)?,
        Kind::RandomWalk { std, n, seed } => gen_noise(NoiseKind::RandomWalk { std }, n, seed, 0)?,
        Kind::Ar1 { phi, std, n, seed, transient } => gen_noise(NoiseKind::Ar1 { phi, std }, n, seed, transient)?,
        Kind::Shuffle { csv, seed } => shuffle_surrogate(&load_csv(csv, &CsvOptions::default())?, seed)?,
    };
    emit(&to_csv(&series), a.out.as_deref())
}
