//! `eir`: ensemble diagnostics, bounds, pathological ensembles and capacity sweeps.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eir_core::TieRule;

use crate::output::ConfigError;

#[derive(Parser, Debug)]
#[command(name = "eir", version, about = "Majority-vote ensemble diagnostics")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output directory (created if missing)
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Overrides the ensemble seed of a sweep config
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// How majority-vote ties are scored (default lowest-index)
    #[arg(long, global = true, value_enum)]
    pub tie_rule: Option<TieRuleArg>,

    /// Tolerated competence violation
    #[arg(long, global = true, default_value_t = 0.0)]
    pub slack: f64,

    /// Exit with status 3 when an applicable bound is violated
    #[arg(long, global = true)]
    pub strict: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    pub format: Format,

    /// Also write an SVG chart
    #[arg(long, global = true)]
    pub svg: bool,
}

impl Global {
    pub fn tie_rule(&self) -> TieRule {
        self.tie_rule.map(TieRule::from).unwrap_or_default()
    }

    pub fn json(&self) -> bool {
        matches!(self.format, Format::Json | Format::Both)
    }

    pub fn csv(&self) -> bool {
        matches!(self.format, Format::Csv | Format::Both)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieRuleArg {
    LowestIndex,
    Pessimistic,
}

impl From<TieRuleArg> for TieRule {
    fn from(t: TieRuleArg) -> Self {
        match t {
            TieRuleArg::LowestIndex => TieRule::LowestIndex,
            TieRuleArg::Pessimistic => TieRule::Pessimistic,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathologyArg {
    Example1,
    Example2,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Diagnostics, competence and bounds for one prediction matrix
    Analyze {
        /// Prediction matrix (.csv or .json)
        input: PathBuf,
    },
    /// Competence check and interval-probability curve
    Competence {
        input: PathBuf,
        /// Points on the uniform curve grid over [0, 1/2]
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Bound checks for several ensembles, with the second-order bound
    /// compared against the C-bound
    Bounds {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Writes an ensemble on which the first-order bound is nearly tight
    Pathological {
        #[arg(value_enum)]
        kind: PathologyArg,
        #[arg(long)]
        epsilon: f64,
        /// Fraction of examples (times two) the heavier member gets wrong; example2 only
        #[arg(long)]
        delta: Option<f64>,
        /// Number of examples
        #[arg(long)]
        m: usize,
    },
    /// Trains one bagged ensemble per capacity from a JSON config
    TrainSweep { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { input } => commands::analyze(input, &cli.global),
        Command::Competence { input, points } => commands::competence(input, *points, &cli.global),
        Command::Bounds { inputs } => commands::bounds(inputs, &cli.global),
        Command::Pathological { kind, epsilon, delta, m } => {
            commands::pathological(*kind, *epsilon, *delta, *m, &cli.global)
        }
        Command::TrainSweep { config } => commands::train_sweep(config, &cli.global),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
