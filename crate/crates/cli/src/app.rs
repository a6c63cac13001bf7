//! Argument parsing and the top-level run loop.
//!
//! `theta-bundle {theta|bundle|sections|embed|symplectic} verify [flags]`.
//! Settings are layered: built-in defaults, then the `--config` file, then flags.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use theta_bundle::bundles::BundleSpec;
use theta_bundle::theta_core::TruncationPolicy;

use crate::config::{extract_tolerances, parse_bundle_arg, parse_complex, parse_matrix, usage, Format, RunConfig};
use crate::report::Report;
use crate::suites::{self, Command};
use crate::UsageError;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "THETA_BUNDLE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "theta-bundle", version, about = "Numerical checks for theta functions on torus bundles over the torus")]
#[command(after_help = "Tolerances: --tol.NAME=VALUE (or --tol.NAME VALUE) overrides the named check tolerance.\n\
Exit codes: 0 all checks pass, 1 some check fails, 2 usage or configuration error.")]
struct Cli {
    #[command(subcommand)]
    suite: Suite,
}

#[derive(Debug, Subcommand)]
enum Suite {
    /// Quasi-periodicity, modular constancy, heat equation and zero count of theta.
    Theta {
        #[command(subcommand)]
        action: Action,
    },
    /// Fiber period, the lattice action and its relations.
    Bundle {
        #[command(subcommand)]
        action: Action,
    },
    /// Multipliers, cocycles, constrained products and the comparison with the KT construction.
    Sections {
        #[command(subcommand)]
        action: Action,
    },
    /// Rank, injectivity and equivariance of the projective map.
    Embed {
        #[command(subcommand)]
        action: Action,
    },
    /// Pullback form: Pfaffian, closedness, periods and Chern pairings.
    Symplectic {
        #[command(subcommand)]
        action: Action,
    },
}

#[derive(Debug, Subcommand)]
enum Action {
    /// Run the suite and print a report.
    Verify(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Table row `TYPE[:k]` (e.g. `C:1`, `B2`) or a bundle JSON file [default: C:1]
    #[arg(long)]
    bundle: Option<String>,
    /// Monodromy `A` as `alpha,beta,gamma,delta`; needs --B
    #[arg(long = "A", requires = "b_matrix", conflicts_with = "bundle", allow_hyphen_values = true)]
    a_matrix: Option<String>,
    /// Monodromy `B` as `alpha,beta,gamma,delta`; needs --A
    #[arg(long = "B", id = "b_matrix", requires = "a_matrix", allow_hyphen_values = true)]
    b_matrix: Option<String>,
    /// Section degree [default: 3]
    #[arg(long)]
    k: Option<u32>,
    /// Points per axis of the [0,1)^4 grid [default: 5]
    #[arg(long)]
    grid: Option<usize>,
    /// Grid offset in cell units [default: 0]
    #[arg(long)]
    grid_offset: Option<f64>,
    /// Random points for the rank check [default: 100]
    #[arg(long)]
    rank_points: Option<usize>,
    /// Random samples per randomized check [default: 20]
    #[arg(long)]
    samples: Option<usize>,
    /// Finite-difference step [default: 1e-5]
    #[arg(long)]
    fd_step: Option<f64>,
    /// Outer step of the closedness check [default: 1e-3]
    #[arg(long)]
    closedness_step: Option<f64>,
    /// Quadrature nodes per axis for periods [default: 100]
    #[arg(long)]
    resolution: Option<usize>,
    /// Random seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Modular parameter for the theta suite, e.g. `0.5+0.866i`
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    /// Series truncation target [default: 64 machine epsilons]
    #[arg(long)]
    target_error: Option<f64>,
    /// Series term cap [default: 2000]
    #[arg(long)]
    max_terms: Option<usize>,
    /// json or csv [default: json]
    #[arg(long)]
    format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file; explicit flags take precedence over it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

/// Parses `args` (including the program name) into a command and a validated config.
pub fn parse(args: Vec<String>) -> Result<(Command, RunConfig, Option<PathBuf>), ParseOutcome> {
    let (args, tolerances) = extract_tolerances(args).map_err(ParseOutcome::Usage)?;
    let cli = Cli::try_parse_from(args).map_err(ParseOutcome::Clap)?;
    let (command, Action::Verify(flags)) = match cli.suite {
        Suite::Theta { action } => (Command::Theta, action),
        Suite::Bundle { action } => (Command::Bundle, action),
        Suite::Sections { action } => (Command::Sections, action),
        Suite::Embed { action } => (Command::Embed, action),
        Suite::Symplectic { action } => (Command::Symplectic, action),
    };
    let out = flags.out.clone();
    let config = build_config(flags, tolerances).map_err(ParseOutcome::Usage)?;
    Ok((command, config, out))
}

fn build_config(flags: Flags, tolerances: std::collections::BTreeMap<String, f64>) -> Result<RunConfig, UsageError> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(b) = &flags.bundle {
        cfg.bundle = parse_bundle_arg(b)?;
    }
    if let (Some(a), Some(b)) = (&flags.a_matrix, &flags.b_matrix) {
        cfg.bundle = BundleSpec::Matrices { a: parse_matrix(a)?.0, b: parse_matrix(b)?.0 };
    }
    macro_rules! take {
        ($($field:ident),*) => { $(if let Some(v) = flags.$field { cfg.$field = v; })* };
    }
    take!(k, grid, grid_offset, rank_points, samples, fd_step, closedness_step, resolution, seed, format);
    if let Some(t) = &flags.tau {
        let z = parse_complex(t)?;
        cfg.tau = Some([z.re, z.im]);
    }
    if flags.target_error.is_some() || flags.max_terms.is_some() {
        let target = flags.target_error.unwrap_or(cfg.truncation.target_abs_error);
        let terms = flags.max_terms.unwrap_or(cfg.truncation.max_terms);
        cfg.truncation = TruncationPolicy::new(target, terms).map_err(usage)?;
    }
    if flags.inject_fault.is_some() {
        cfg.inject_fault = flags.inject_fault;
    }
    cfg.tolerances.extend(tolerances);
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug)]
pub enum ParseOutcome {
    Usage(UsageError),
    Clap(clap::Error),
}

/// Renders the report in the configured format.
pub fn render(report: &Report) -> String {
    match report.config.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    }
}

fn configure_threads() -> Result<(), UsageError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| UsageError(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // a second call in the same process fails harmlessly; the first pool stays
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// The whole program. Returns the process exit code.
pub fn run(args: Vec<String>) -> i32 {
    let (command, config, out) = match parse(args) {
        Ok(parsed) => parsed,
        Err(ParseOutcome::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
        Err(ParseOutcome::Usage(e)) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return 2;
    }
    let start = Instant::now();
    let report = match suites::run(command, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let text = render(&report);
    let written = match &out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    eprintln!("{command} verify: {:?} in {:.2?}", report.verdict, start.elapsed());
    if !failed.is_empty() {
        eprintln!("failed checks: {}", failed.join(", "));
    }
    if report.passed() {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("theta-bundle").chain(s.split_whitespace()).map(String::from).collect()
    }

    fn config(s: &str) -> RunConfig {
        match parse(args(s)) {
            Ok((_, cfg, _)) => cfg,
            Err(e) => panic!("{s}: {e:?}"),
        }
    }

    #[test]
    fn flags_fill_the_config() {
        let cfg = config("embed verify --bundle B2 --k 4 --grid 3 --seed 9 --tol.rank=1e-5 --format csv");
        assert_eq!(cfg.bundle, BundleSpec::Row { tag: "B2".into(), k: None });
        assert_eq!((cfg.k, cfg.grid, cfg.seed, cfg.format), (4, 3, 9, Format::Csv));
        assert_eq!(cfg.tolerances["rank"], 1e-5);
    }

    #[test]
    fn matrices_and_tau() {
        let cfg = config("bundle verify --A 1,2,0,1 --B 1,0,0,1");
        assert_eq!(cfg.bundle, BundleSpec::Matrices { a: [[1, 2], [0, 1]], b: [[1, 0], [0, 1]] });
        let cfg = config("theta verify --tau -0.3+0.7i");
        assert_eq!(cfg.tau, Some([-0.3, 0.7]));
    }

    #[test]
    fn usage_errors() {
        for bad in [
            "theta verify --tau 0.02i",
            "theta verify --k 0",
            "embed verify --bundle Q",
            "bundle verify --A 1,0,0,1",
            "theta verify --tol.x=-1",
            "theta verify --max-terms 0",
            "theta verify --grid-offset 1.5",
        ] {
            assert!(parse(args(bad)).is_err(), "{bad}");
        }
    }
}
