mod analyze;
mod corrdim;
mod synth;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chaoscope_core::series::{Column, CsvOptions};
use chaoscope_core::{load_csv, Error, TimeSeries};
use clap::{Args, Parser, Subcommand};

/// Determinism, Lyapunov and correlation-dimension diagnostics for time series.
#[derive(Debug, Parser)]
#[command(name = "chaoscope", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep kappa over (m, tau), estimate the maximal Lyapunov exponent on the best cells.
    Analyze(analyze::AnalyzeArgs),
    /// Correlation sums, correlation dimension and K2 entropy.
    Corrdim(corrdim::CorrdimArgs),
    /// Generate a synthetic series as single-column CSV.
    Synth(synth::SynthArgs),
}

/// Where the series comes from and how to read it.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with one observation per row.
    pub csv: PathBuf,
    /// Value column, by header name or zero-based index.
    #[arg(long, default_value = "0")]
    pub column: String,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// The first row is data, not a header.
    #[arg(long)]
    pub no_header: bool,
    /// Analyze log returns instead of the raw values.
    #[arg(long)]
    pub returns: bool,
}

impl InputArgs {
    pub fn load(&self) -> Result<TimeSeries, Error> {
        if !self.delimiter.is_ascii() {
            return Err(Error::InvalidParameter(format!(
                "delimiter must be a single ASCII character, got {:?}",
                self.delimiter
            )));
        }
        let column: Column = match self.column.parse() {
            Ok(c) => c,
            Err(never) => match never {},
        };
        let opts = CsvOptions {
            column,
            delimiter: self.delimiter as u8,
            has_header: !self.no_header,
        };
        let series = load_csv(&self.csv, &opts)?;
        if self.returns {
            series.to_log_returns()
        } else {
            Ok(series)
        }
    }
}

/// `a..b` (inclusive) or a single value.
pub fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let parse = |p: &str| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b) = (parse(a)?, parse(b)?);
            if a > b {
                return Err(format!("empty range {s}"));
            }
            Ok((a, b))
        }
        None => parse(s).map(|v| (v, v)),
    }
}

/// Writes the whole document at once, so a failed run leaves no partial file.
pub fn emit(doc: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, doc).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}

/// 1 for bad input or parameters, 2 when the estimators produced nothing.
pub fn exit_code(err: &Error) -> u8 {
    if err.is_input_error() {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze::run(a),
        Command::Corrdim(a) => corrdim::run(a),
        Command::Synth(a) => synth::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chaoscope: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..43").unwrap(), (2, 43));
        assert_eq!(parse_range("2..=5").unwrap(), (2, 5));
        assert_eq!(parse_range("7").unwrap(), (7, 7));
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("a..2").is_err());
    }
}
