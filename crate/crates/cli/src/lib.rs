//! Command-line front end: configuration, subcommands and report emission.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage
//! or configuration errors.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, SpecialFunction};
use output::Format;

/// Error carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<slipflow_core::Error> for CliError {
    fn from(e: slipflow_core::Error) -> Self {
        use slipflow_core::Error as E;
        match e {
            E::Config(_) | E::Input(_) | E::Domain(_) | E::Regime(_) => Self::usage(e.to_string()),
            _ => Self::runtime(e.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Parser)]
#[command(name = "slipflow", version, about = "Spectral solver and estimate harness for Navier-slip pipe flow")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for the report
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Overrides the seed of the configuration
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = logical cores)
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one stream-function mode
    SolveLinear(#[command(flatten)] Common),
    /// Solve one swirl mode
    SolveSwirl(#[command(flatten)] Common),
    /// Boundary-layer decomposition of one stream mode against the direct solve
    Decompose(#[command(flatten)] Common),
    /// Estimate ratios on a (flux, slip, n) lattice with exponent fits
    SweepEstimates(#[command(flatten)] Common),
    /// Picard iteration for the nonlinear problem
    SolveNonlinear(#[command(flatten)] Common),
    /// Randomized and grid checks of the inequality lemmas
    TestInequalities {
        #[command(flatten)]
        common: Common,
        /// Overrides inequalities.samples
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Evaluate I0, I1, Ai or the cutoff at given points
    SpecfunEval {
        #[command(flatten)]
        common: Common,
        /// Overrides specfun.function
        #[arg(long, value_enum)]
        function: Option<SpecialFunction>,
        /// Evaluation point `re` or `re,im`; repeatable, replaces specfun.points
        #[arg(long = "at", allow_hyphen_values = true)]
        at: Vec<String>,
    },
}

impl clap::ValueEnum for SpecialFunction {
    fn value_variants<'a>() -> &'a [Self] {
        &[SpecialFunction::BesselI0, SpecialFunction::BesselI1, SpecialFunction::AiryAi, SpecialFunction::CutoffChi]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            SpecialFunction::BesselI0 => "bessel_i0",
            SpecialFunction::BesselI1 => "bessel_i1",
            SpecialFunction::AiryAi => "airy_ai",
            SpecialFunction::CutoffChi => "cutoff_chi",
        }))
    }
}

fn parse_point(s: &str) -> Result<[f64; 2], CliError> {
    let bad = || CliError::usage(format!("`--at {s}`: expected `re` or `re,im`"));
    let mut it = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad()));
    let re = it.next().ok_or_else(bad)??;
    let im = it.next().transpose()?.unwrap_or(0.0);
    if it.next().is_some() {
        return Err(bad());
    }
    Ok([re, im])
}

fn resolve(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn execute(command: Command) -> Result<(bool, PathBuf), CliError> {
    let (common, cfg, run): (Common, RunConfig, fn(&RunConfig) -> Result<output::Artifact, CliError>) = match command {
        Command::SolveLinear(c) => {
            let cfg = resolve(&c)?;
            (c, cfg, commands::solve_linear)
        }
        Command::SolveSwirl(c) => {
            let cfg = resolve(&c)?;
            (c, cfg, commands::solve_swirl)
        }
        Command::Decompose(c) => {
            let cfg = resolve(&c)?;
            (c, cfg, commands::decompose)
        }
        Command::SweepEstimates(c) => {
            let cfg = resolve(&c)?;
            (c, cfg, commands::sweep_estimates)
        }
        Command::SolveNonlinear(c) => {
            let cfg = resolve(&c)?;
            (c, cfg, commands::solve_nonlinear)
        }
        Command::TestInequalities { common, samples } => {
            let mut cfg = resolve(&common)?;
            if let Some(s) = samples {
                cfg.inequalities.samples = s;
            }
            (common, cfg, commands::test_inequalities)
        }
        Command::SpecfunEval { common, function, at } => {
            let mut cfg = resolve(&common)?;
            if let Some(f) = function {
                cfg.specfun.function = f;
            }
            if !at.is_empty() {
                cfg.specfun.points = at.iter().map(|s| parse_point(s)).collect::<Result<_, _>>()?;
            }
            (common, cfg, commands::specfun_eval)
        }
    };
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs)
        .build()
        .map_err(|e| CliError::usage(format!("`--jobs`: {e}")))?;
    let artifact = pool.install(|| run(&cfg))?;
    let path = artifact.write(&cfg, common.format, &common.out)?;
    Ok((artifact.pass, path))
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok((pass, path)) => {
            println!("{} {}", if pass { "PASS" } else { "FAIL" }, path.display());
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
