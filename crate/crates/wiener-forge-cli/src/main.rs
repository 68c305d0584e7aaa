mod commands;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "wiener-forge", version, about = "Weighted Wiener-type inversion: annuli, inverses, maximal weights and weight families")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunConfig {
    /// Numerical tolerance for inversion and root tests.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Relative back-off from root moduli when clamping rates.
    #[arg(long, global = true, default_value_t = 0.01)]
    pub margin: f64,
    /// Tolerance for numerically estimated GRS limits.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub grs_tol: f64,
    /// Largest FFT size for circle sampling (power of two).
    #[arg(long, global = true, default_value_t = 1 << 20)]
    pub fft_cap: usize,
    /// Number of family members examined.
    #[arg(long, global = true, default_value_t = 8)]
    pub depth: usize,
    /// Index window as LO:HI.
    #[arg(long, global = true, default_value = "-64:64", value_parser = parse_window, allow_hyphen_values = true)]
    pub window: (i64, i64),
    /// Directory for JSON and CSV outputs.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("bad LO in {s:?}: {e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("bad HI in {s:?}: {e}"))?;
    if lo > hi {
        return Err(format!("empty window {lo}:{hi}"));
    }
    Ok((lo, hi))
}

#[derive(Subcommand)]
enum Cmd {
    /// Growth rates of a weight (rho/mu, S_omega or log-scale rates on R).
    Rho { weight: PathBuf },
    /// GRS limits of a weight, or extended GRS of a weight family.
    Grs { input: PathBuf },
    /// Laurent inverse of a sequence, its tail fit and membership in the constructed weight.
    Invert {
        sequence: PathBuf,
        weight: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Invertibility annulus of a symbol on Z, optionally clamped to a weight's rates.
    Annulus {
        sequence: PathBuf,
        #[arg(long)]
        weight: Option<PathBuf>,
    },
    /// Maximal weight for a sequence on Z or a function on R.
    Maxweight { input: PathBuf, weight: PathBuf },
    /// Nested weight family for the inverse (Type-I or Type-II).
    Family {
        sequence: PathBuf,
        family: PathBuf,
        #[arg(long, conflicts_with = "type2")]
        type1: bool,
        #[arg(long)]
        type2: bool,
    },
    /// Membership along the rapidly/exponentially decreasing hierarchy.
    Hierarchy {
        /// Sequence to test; defaults to g(n) = rate^{|n|} on the window.
        sequence: Option<PathBuf>,
        #[arg(long, default_value_t = 0.25)]
        rate: f64,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 0.5)]
        b: f64,
        /// Comma-separated p_n (defaults to p for every member).
        #[arg(long, value_delimiter = ',')]
        p_seq: Vec<f64>,
        /// Comma-separated q_n (defaults to p for every member).
        #[arg(long, value_delimiter = ',')]
        q_seq: Vec<f64>,
    },
    /// Norm inclusion chain ||f||_1 <= ||f||_{q,nu} <= ||f||_{p,nu} <= ||f||_{p,omega}.
    Chain {
        sequence: PathBuf,
        nu: PathBuf,
        omega: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
    },
    /// Strip of invertibility and maximal weight for 1 + f on R.
    Continuous { function: PathBuf, weight: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { output::EXIT_INVALID } else { output::EXIT_OK });
        }
    };
    if let Ok(n) = std::env::var("WIENER_FORGE_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: WIENER_FORGE_THREADS must be a positive integer, got {n:?}");
                return ExitCode::from(output::EXIT_INVALID);
            }
        }
    }
    let code = match commands::run(&cli.cmd, &cli.config).and_then(|out| output::emit(&out, &cli.config)) {
        Ok(code) => code,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => output::EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            output::error_code(&e)
        }
    };
    ExitCode::from(code)
}
