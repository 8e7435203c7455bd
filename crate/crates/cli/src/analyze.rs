use std::path::PathBuf;

use chaoscope_core::report::{
    Format, Report, ReportParams, SweepConfig, WolfSettings, STRONG_THRESHOLD, WEAK_THRESHOLD,
};
use chaoscope_core::{DeterminismParams, Error, LogBase};
use clap::Args;

use crate::{emit, parse_range, InputArgs};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Embedding dimensions, comma separated (1..=10).
    #[arg(long, default_value = "2,3", value_delimiter = ',')]
    m: Vec<usize>,
    /// Delay range, inclusive, e.g. 2..43.
    #[arg(long, default_value = "2..43", value_parser = parse_range)]
    tau: (usize, usize),
    /// Cells per m that get a Lyapunov exponent.
    #[arg(long, default_value_t = 5)]
    top_k: usize,
    /// Compute the exponent on every cell.
    #[arg(long)]
    mle_all: bool,
    /// Boxes per axis for kappa.
    #[arg(long, default_value_t = 10)]
    grid: usize,
    /// Boxes with fewer passes are left out of kappa.
    #[arg(long, default_value_t = 2)]
    min_passes: usize,
    /// Samples between replacement checks.
    #[arg(long, default_value_t = 3)]
    evolve: usize,
    #[arg(long, default_value_t = 0.001)]
    scale_min: f64,
    #[arg(long, default_value_t = 0.03)]
    scale_max: f64,
    /// Minimum index gap between neighbors [default: m * tau].
    #[arg(long)]
    min_sep: Option<usize>,
    /// Logarithm base for the exponent: e or 2.
    #[arg(long, default_value = "e")]
    log_base: LogBase,
    /// Reliability percent for strong evidence.
    #[arg(long, default_value_t = STRONG_THRESHOLD)]
    strong: f64,
    /// Reliability percent for weak evidence.
    #[arg(long, default_value_t = WEAK_THRESHOLD)]
    weak: f64,
    /// text: tables and verdicts; csv: every cell; json: the full report.
    #[arg(long, default_value = "text")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(a: AnalyzeArgs) -> Result<(), Error> {
    if let Some(&m) = a.m.iter().find(|&&m| !(1..=10).contains(&m)) {
        return Err(Error::InvalidParameter(format!("m must be in 1..=10, got {m}")));
    }
    let series = a.input.load()?;
    let params = ReportParams {
        sweep: SweepConfig {
            m_set: a.m,
            tau_min: a.tau.0,
            tau_max: a.tau.1,
            determinism: DeterminismParams {
                grid_subdivisions: a.grid,
                min_passes: a.min_passes,
            },
            wolf: WolfSettings {
                evolve_steps: a.evolve,
                scale_min: a.scale_min,
                scale_max: a.scale_max,
                min_time_separation: a.min_sep,
                log_base: a.log_base,
            },
            top_k: a.top_k,
            mle_all: a.mle_all,
        },
        strong_threshold: a.strong,
        weak_threshold: a.weak,
    };
    for &m in &params.sweep.m_set {
        params.sweep.wolf.params(m, a.tau.0).validate(m)?;
    }
    let report = Report::build(&series, params)?;
    if report.all_failed() {
        let first = report.cells.first().map(|c| c.status.to_string()).unwrap_or_default();
        return Err(Error::InsufficientData(format!("every cell failed; first: {first}")));
    }
    emit(&report.render(a.format)?, a.out.as_deref())
}
