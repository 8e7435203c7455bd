use std::fmt::Write as _;
use std::path::PathBuf;

use chaoscope_core::corrdim::{correlation_profile, log_grid, CorrdimParams, CorrelationProfile};
use chaoscope_core::report::Format;
use chaoscope_core::Error;
use clap::Args;

use crate::{emit, InputArgs};

#[derive(Debug, Args)]
pub struct CorrdimArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Embedding dimensions, comma separated.
    #[arg(long, default_value = "1,2,3,4,5", value_delimiter = ',')]
    m_list: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    tau: usize,
    #[arg(long, default_value_t = 1e-3)]
    eps_min: f64,
    #[arg(long, default_value_t = 1.0)]
    eps_max: f64,
    #[arg(long, default_value_t = 24)]
    eps_count: usize,
    /// Minimum index gap between paired points [default: tau * max(m)].
    #[arg(long)]
    theiler: Option<usize>,
    /// Increment below which D2 counts as saturated.
    #[arg(long, default_value_t = 0.2)]
    saturation_tol: f64,
    /// text: summary and log10 C table; csv: log10 C with one row per radius; json: everything.
    #[arg(long, default_value = "text")]
    format: Format,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// `log10 C`, blank where no pair is that close.
fn log10(c: f64) -> String {
    if c > 0.0 {
        c.log10().to_string()
    } else {
        String::new()
    }
}

fn matrix_csv(p: &CorrelationProfile) -> String {
    let mut out = String::from("eps");
    for m in p.c_by_m.keys() {
        let _ = write!(out, ",m={m}");
    }
    out.push('\n');
    for (i, eps) in p.epsilons.iter().enumerate() {
        let _ = write!(out, "{eps}");
        for c in p.c_by_m.values() {
            let _ = write!(out, ",{}", log10(c[i]));
        }
        out.push('\n');
    }
    out
}

fn summary(p: &CorrelationProfile) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "tau {}  theiler window {}  pairs {}",
        p.tau, p.theiler_window, p.total_pairs
    );
    for (m, d) in &p.d2_by_m {
        match d.fit {
            Some(f) => {
                let _ = writeln!(
                    out,
                    "m={m}  D2 {:.4}  over eps {:.4e}..{:.4e}  max residual {:.4}",
                    f.slope, f.eps_lo, f.eps_hi, f.max_residual
                );
            }
            None => {
                let _ = writeln!(out, "m={m}  D2 -  no scaling region");
            }
        }
    }
    for (m, k) in &p.k2_by_m {
        let _ = writeln!(
            out,
            "m={m}->{}  K2 {:.4} nats/sample{}",
            m + 1,
            k.k2,
            if k.divergent { "  (diverges as eps shrinks)" } else { "" }
        );
    }
    let _ = writeln!(out, "saturation: {:?}", p.saturation);
    out.push_str("\nlog10 C\n");
    out.push_str(&matrix_text(p));
    out
}

fn matrix_text(p: &CorrelationProfile) -> String {
    let mut out = format!("{:>10}", "eps");
    for m in p.c_by_m.keys() {
        let _ = write!(out, "  {:>8}", format!("m={m}"));
    }
    out.push('\n');
    for (i, eps) in p.epsilons.iter().enumerate() {
        let _ = write!(out, "{eps:>10.4e}");
        for c in p.c_by_m.values() {
            let cell = if c[i] > 0.0 { format!("{:.4}", c[i].log10()) } else { "-".into() };
            let _ = write!(out, "  {cell:>8}");
        }
        out.push('\n');
    }
    out
}

pub fn run(a: CorrdimArgs) -> Result<(), Error> {
    let series = a.input.load()?;
    let mut params = CorrdimParams::new(a.m_list, a.tau);
    params.epsilons = log_grid(a.eps_min, a.eps_max, a.eps_count)?;
    params.theiler = a.theiler;
    params.saturation_tol = a.saturation_tol;
    let profile = correlation_profile(&series, &params)?;
    let doc = match a.format {
        Format::Csv => matrix_csv(&profile),
        Format::Text => summary(&profile),
        Format::Json => serde_json::to_string_pretty(&profile)? + "\n",
    };
    emit(&doc, a.out.as_deref())
}
