use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gqms::linalg::{RMatrix, RVector};
use gqms::report::{self, AnalysisOptions, EvolveOptions};

#[derive(Parser)]
#[command(
    name = "gqms",
    about = "Analyzer for Gaussian quantum Markov semigroups",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct CommonOpts {
    /// Relative tolerance for zero tests.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Search bound for integer relations among oscillator angles.
    #[arg(long, default_value_t = 12)]
    nmax: i64,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a model file and emit a report.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report serialization: json or text.
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Evolve moments and export a trajectory table.
    Evolve {
        file: PathBuf,
        /// Initial mean, comma separated (e.g. "1,0").
        #[arg(long)]
        m0: String,
        /// Initial covariance, rows separated by ';' (e.g. "1,0;0,1").
        #[arg(long)]
        sigma0: String,
        /// Time horizon.
        #[arg(long = "T")]
        horizon: f64,
        /// Number of grid intervals.
        #[arg(long)]
        steps: usize,
        /// Probe vector for the decoherence-defect column.
        #[arg(long)]
        probe: Option<String>,
        /// Significant digits in the table.
        #[arg(long, default_value_t = 9)]
        precision: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Output file (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze every model file in a directory.
    Batch {
        dir: PathBuf,
        /// Output directory for reports and the summary table.
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn parse_vector(text: &str) -> Result<RVector, String> {
    let entries: Result<Vec<f64>, _> = text.split(',').map(|x| x.trim().parse::<f64>()).collect();
    entries
        .map(RVector::from_vec)
        .map_err(|e| format!("invalid vector `{text}`: {e}"))
}

fn parse_matrix(text: &str) -> Result<RMatrix, String> {
    let rows: Result<Vec<Vec<f64>>, String> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| format!("invalid entry `{x}`: {e}"))
                })
                .collect()
        })
        .collect();
    let rows = rows?;
    let r = rows.len();
    let c = rows.first().map(|x| x.len()).unwrap_or(0);
    if rows.iter().any(|row| row.len() != c) {
        return Err(format!("ragged matrix `{text}`"));
    }
    Ok(RMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn run() -> Result<(), String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze {
            file,
            common,
            out,
            format,
        } => {
            let opts = AnalysisOptions {
                tol: common.tol,
                n_max: common.nmax,
            };
            let report = report::run_analyze(&file, opts).map_err(|e| e.to_string())?;
            let rendered = match format.as_str() {
                "json" => report::report_to_json(&report).map_err(|e| e.to_string())?,
                "text" => report::report_to_text(&report),
                other => return Err(format!("unknown format `{other}` (expected json or text)")),
            };
            match out {
                Some(path) => std::fs::write(path, rendered).map_err(|e| e.to_string())?,
                None => println!("{rendered}"),
            }
            Ok(())
        }
        Command::Evolve {
            file,
            m0,
            sigma0,
            horizon,
            steps,
            probe,
            precision,
            tol,
            out,
        } => {
            let opts = EvolveOptions {
                m0: parse_vector(&m0)?,
                sigma0: parse_matrix(&sigma0)?,
                horizon,
                steps,
                probe: probe.as_deref().map(parse_vector).transpose()?,
                precision,
                tol,
            };
            let table = report::run_evolve(&file, &opts).map_err(|e| e.to_string())?;
            match out {
                Some(path) => std::fs::write(path, table).map_err(|e| e.to_string())?,
                None => print!("{table}"),
            }
            Ok(())
        }
        Command::Batch { dir, out, common } => {
            let opts = AnalysisOptions {
                tol: common.tol,
                n_max: common.nmax,
            };
            let outcome = report::run_batch(&dir, &out, opts).map_err(|e| e.to_string())?;
            println!(
                "analyzed {} model(s), {} failure(s); reports in {}",
                outcome.rows.len(),
                outcome.failures.len(),
                out.display()
            );
            for (file, err) in &outcome.failures {
                eprintln!("failed: {file}: {err}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
