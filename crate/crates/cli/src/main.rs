//! `germsum`: command-line access to the series toolkit.
//!
//! Every subcommand prints one JSON document on stdout. Exit status is 0 on
//! success or PASS, 1 on a FAIL verdict and 2 on usage or input errors.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "germsum",
    version,
    about = "Truncated multivariate power series and their summability"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where a series comes from. Exactly one source is required.
#[derive(Args, Clone, Debug)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Series JSON file.
    #[arg(long)]
    pub series_file: Option<PathBuf>,
    /// Polynomial expression, e.g. "x1*x2 + x1^3".
    #[arg(long)]
    pub expr: Option<String>,
    /// Euler's series composed with a polynomial germ, Ê(P).
    #[arg(long)]
    pub euler: Option<String>,
}

/// Configuration file and the flags that override it.
#[derive(Args, Clone, Debug, Default)]
pub struct Settings {
    /// TOML file with default_cap, float_precision_bits, fit_window,
    /// verdict_thresholds and quadrature_tol.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Truncation order.
    #[arg(long)]
    pub cap: Option<u32>,
    /// Fit window `a:b` or `a:`.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub s_tol: Option<f64>,
    #[arg(long)]
    pub residual_tol: Option<f64>,
    #[arg(long)]
    pub quadrature_tol: Option<f64>,
    /// Number of variables for expressions; inferred when omitted.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Parse a series and print it in canonical JSON.
    Series {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        settings: Settings,
    },
    /// Decompose along a monomial or a germ.
    Decompose {
        #[command(flatten)]
        source: Source,
        /// Monomial base, e.g. "1,1".
        #[arg(long, conflicts_with_all = ["germ_file", "germ"])]
        alpha: Option<String>,
        /// Germ base as a series JSON file.
        #[arg(long, conflicts_with = "germ")]
        germ_file: Option<PathBuf>,
        /// Germ base as an expression.
        #[arg(long)]
        germ: Option<String>,
        /// Linear form weights, e.g. "1,3/2"; graded by default.
        #[arg(long)]
        ell: Option<String>,
        /// Number of components.
        #[arg(long)]
        nmax: Option<usize>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Gevrey fit along a monomial and/or a radius verdict.
    Gevrey {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        alpha: Option<String>,
        /// Also report the convergence verdict.
        #[arg(long)]
        radius: bool,
        /// Write (x, value, bound) CSV of the fit.
        #[arg(long)]
        emit_plot_data: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Blow up until a list of couples is totally ordered.
    Monomialize {
        /// File with one couple `alpha=[..] k=p/q` per line.
        #[arg(long)]
        couples: PathBuf,
    },
    /// Compare two couples.
    Equiv {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Borel–Laplace sum at sample points.
    BorelSum {
        /// One-variable series file, or a ray of a multivariate one with --alpha.
        #[arg(long, required_unless_present = "builtin", conflicts_with = "builtin")]
        series_file: Option<PathBuf>,
        /// Built-in series: euler.
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        /// Level, a positive rational.
        #[arg(long, default_value = "1")]
        k: String,
        /// Direction of the Laplace ray.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta: f64,
        /// Sample points "re,im;re,im;...".
        #[arg(long)]
        points: String,
        /// Padé order m of the [m/m] continuation.
        #[arg(long)]
        pade: Option<usize>,
        #[arg(long)]
        emit_plot_data: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Euler system, ODE residual and remainder bound for Ê(P).
    VerifyEuler {
        /// The germ P as an expression.
        #[arg(long)]
        builtin: String,
        #[arg(long)]
        emit_plot_data: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Common second-order operator of two Euler equations.
    VerifyOperator {
        #[arg(long, required_unless_present = "p")]
        p_file: Option<PathBuf>,
        #[arg(long, required_unless_present = "q")]
        q_file: Option<PathBuf>,
        #[arg(long, conflicts_with = "p_file")]
        p: Option<String>,
        #[arg(long, conflicts_with = "q_file")]
        q: Option<String>,
        /// Differentiation axis, 1-based.
        #[arg(long, default_value_t = 1)]
        axis: usize,
        #[command(flatten)]
        settings: Settings,
    },
    /// Growth along several couples and the forced-convergence check.
    TauberianVerdict {
        #[command(flatten)]
        source: Source,
        /// A couple `alpha=[..] k=p/q`; repeat for several.
        #[arg(long = "couple", required = true)]
        couples: Vec<String>,
        #[command(flatten)]
        settings: Settings,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(out) => {
            let text = serde_json::to_string_pretty(&out.json).expect("json values serialize");
            if writeln!(std::io::stdout().lock(), "{text}").is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(if out.pass == Some(false) { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
