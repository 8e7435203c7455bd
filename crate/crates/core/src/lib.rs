//! Diagnostics for deterministic chaos in scalar time series: delay
//! embedding, the Kaplan–Glass determinism coefficient, Wolf's maximal
//! Lyapunov exponent and Grassberger–Procaccia correlation analysis, plus
//! generators for test signals.

pub mod corrdim;
pub mod determinism;
pub mod embedding;
pub mod error;
pub mod lyapunov;
pub mod report;
pub mod series;
pub mod synth;

pub use corrdim::{correlation_profile, CorrdimParams, CorrelationProfile, Saturation};
pub use determinism::{determinism_coefficient, DeterminismParams, DeterminismResult};
pub use embedding::{delay_embed, Embedding, EmbeddingParams};
pub use error::{Error, Result};
pub use lyapunov::{max_lyapunov, LogBase, LyapunovResult, WolfParams};
pub use report::{Report, SweepCell, SweepConfig, Verdict};
pub use series::{load_csv, CsvOptions, TimeSeries};
