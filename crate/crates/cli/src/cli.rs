//! Argument parsing, the worker pool and the human-readable run summary.
//!
//! Every flag has a `TORSOLV_*` environment counterpart; an explicit flag
//! wins over the variable, and both win over the config file.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{analyze, forge, solve};
use crate::config::{Overrides, RunConfig, TagArg};
use crate::error::CliError;
use crate::field_io::Format;

#[derive(Debug, Parser)]
#[command(name = "torsolv", version, about = "Global solvability of D_t + c(t, D_x) on the torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the symbol and the solvability conditions up to the cutoff.
    Analyze(Common),
    /// Solve Pu = f for a field file f.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Right-hand side field (CSV or binary).
        #[arg(long, env = "TORSOLV_RHS")]
        rhs: PathBuf,
    },
    /// Build a right-hand side with no smooth solution.
    Forge {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, env = "TORSOLV_TAG")]
        tag: Option<TagArg>,
        /// Number of terms when the sequence is chosen automatically.
        #[arg(long, env = "TORSOLV_TERMS")]
        terms: Option<usize>,
        /// Sequence frequency, repeatable; components separated by commas.
        #[arg(long = "xi", value_parser = parse_xi, allow_hyphen_values = true)]
        xi: Vec<Vec<i64>>,
        /// Interval `[α, β]` for the dc construction, as `A,B`.
        #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
        interval: Option<(f64, f64)>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Symbol configuration file (TOML).
    #[arg(long, env = "TORSOLV_SYMBOL")]
    pub symbol: PathBuf,
    /// Time grid size n_t.
    #[arg(long, env = "TORSOLV_NT")]
    pub nt: Option<usize>,
    /// Frequency cutoff K: the box is |xi| <= K.
    #[arg(long = "K", env = "TORSOLV_K")]
    pub cutoff: Option<f64>,
    /// Resonance tolerance.
    #[arg(long, env = "TORSOLV_EPS_Z")]
    pub eps_z: Option<f64>,
    /// Smallest |xi| entering the oscillation verdict.
    #[arg(long, env = "TORSOLV_D_FLOOR", allow_negative_numbers = true)]
    pub d_floor: Option<f64>,
    /// Output directory.
    #[arg(long, env = "TORSOLV_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "TORSOLV_THREADS")]
    pub threads: Option<usize>,
    /// Field file format for written fields.
    #[arg(long, value_enum, env = "TORSOLV_FORMAT")]
    pub format: Option<Format>,
}

fn parse_xi(s: &str) -> Result<Vec<i64>, String> {
    s.split(',')
        .map(|c| c.trim().parse::<i64>().map_err(|_| format!("`{s}` is not a comma-separated integer frequency")))
        .collect()
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let parse = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("`{s}` is not `A,B`"));
    match parts.as_slice() {
        [a, b] => Ok((parse(a)?, parse(b)?)),
        _ => Err(format!("`{s}` is not `A,B`")),
    }
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            nt: self.nt,
            cutoff: self.cutoff,
            eps_z: self.eps_z,
            d_floor: self.d_floor,
            threads: self.threads,
            format: self.format,
            out: self.out.clone(),
            ..Overrides::default()
        }
    }
}

/// Resolves the configuration for a parsed command line.
pub fn resolve(command: &Command) -> Result<RunConfig, CliError> {
    let (common, over) = match command {
        Command::Analyze(c) | Command::Solve { common: c, .. } => (c, c.overrides()),
        Command::Forge { common, tag, terms, xi, interval } => {
            let mut o = common.overrides();
            o.tag = *tag;
            o.terms = *terms;
            o.sequence = (!xi.is_empty()).then(|| xi.clone());
            o.interval = *interval;
            (common, o)
        }
    };
    Ok(RunConfig::load(&common.symbol, &over)?)
}

/// Runs a command and returns its summary.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = resolve(&cli.command)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Analyze(_) => analyze_report(&cfg),
        Command::Solve { rhs, .. } => solve_report(&cfg, rhs),
        Command::Forge { .. } => forge_report(&cfg),
    })
}

fn files_line(out: &mut String, files: &[PathBuf]) {
    for f in files {
        let _ = writeln!(out, "wrote {}", f.display());
    }
}

fn analyze_report(cfg: &RunConfig) -> Result<String, CliError> {
    let r = analyze(cfg)?;
    let mut s = String::new();
    let _ = writeln!(s, "solvable at cutoff {}: {}", cfg.cutoff, r.solvable);
    if !r.reasons.is_empty() {
        let _ = writeln!(s, "reasons: {}", r.reasons.join(", "));
    }
    let v = &r.verdict;
    let _ = writeln!(s, "sup D* = {:.6} (growth slope {:.4}, bounded {})", v.sup_d, v.growth_slope, v.bounded);
    let _ = writeln!(s, "dc clean: {}", v.dio.is_clean());
    if let Some(c) = &r.corollary {
        let _ = writeln!(s, "homogeneous criterion: {}", c.solvable);
    }
    files_line(&mut s, &r.files);
    Ok(s)
}

fn solve_report(cfg: &RunConfig, rhs: &std::path::Path) -> Result<String, CliError> {
    let r = solve(cfg, rhs)?;
    let sol = &r.solution;
    let mut s = String::new();
    let _ = writeln!(s, "relative residual {:.3e}", sol.relative_residual());
    if !sol.saturated.is_empty() {
        let _ = writeln!(s, "saturated modes: {}", sol.saturated.len());
    }
    if let Some(d) = &sol.decay[0] {
        let _ = writeln!(s, "decay exponent of u: {:.3}", d.exponent);
    }
    files_line(&mut s, &r.files);
    Ok(s)
}

fn forge_report(cfg: &RunConfig) -> Result<String, CliError> {
    let r = forge(cfg)?;
    let mut s = String::new();
    let held = r.checks.iter().filter(|c| c.holds).count();
    let _ = writeln!(s, "{} terms, bounds hold on {held}/{}", r.forged.modes.len(), r.checks.len());
    if let Some(d) = r.solution_decay {
        let _ = writeln!(s, "fitted decay of |u| along the sequence: {d:.3}");
    }
    files_line(&mut s, &r.files);
    Ok(s)
}
