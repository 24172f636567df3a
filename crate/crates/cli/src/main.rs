//! `survkit`: cohort summaries, survival curves, Cox tables, model
//! comparison and risk scoring from a cohort CSV.

mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use survkit::cox::Ties;
use survkit::dataset::EventPolicy;
use survkit::Error;

#[derive(Parser)]
#[command(name = "survkit", version, about = "Survival analysis pipeline for clinical cohort files")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Cohort CSV
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Which deaths count as events: `overall` or `cause-specific`
    #[arg(long, global = true, default_value = "overall")]
    pub policy: EventPolicy,

    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,

    /// Skip SVG output
    #[arg(long, global = true)]
    pub no_figures: bool,

    /// Fail on the first unusable row instead of skipping it
    #[arg(long, global = true)]
    pub strict: bool,
}

/// How a numeric stratifying variable is split at the cut point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutRule {
    /// `x < cut` versus `x >= cut`
    Below,
    /// `x <= cut` versus `x > cut`
    AtOrBelow,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive table by outcome group
    Summarize,
    /// Kaplan-Meier curves and log-rank test
    Km {
        /// Covariate to stratify by, or `treatment` for the three therapy panels
        #[arg(long)]
        strata: Option<String>,
        /// Cut point for a numeric stratifying variable
        #[arg(long)]
        cut: Option<f64>,
        /// Defaults to `below` for age and `at-or-below` for tumor size
        #[arg(long, value_enum)]
        cut_rule: Option<CutRule>,
    },
    /// Cox proportional-hazards table, global tests and forest plot
    Cox {
        /// Comma-separated covariates (default: all eight)
        #[arg(long)]
        covariates: Option<String>,
        #[arg(long, default_value = "efron")]
        ties: Ties,
        /// Horizon for the companion log-odds model, in months
        #[arg(long, default_value_t = survkit::logodds::DEFAULT_HORIZON_MONTHS)]
        horizon: f64,
        /// Ridge penalty for the log-odds model
        #[arg(long, default_value_t = 0.0)]
        ridge: f64,
    },
    /// Rank parametric families and the Cox model by AIC/BIC
    Compare {
        /// Comma-separated list from exponential, weibull, loglogistic, cox
        #[arg(long, default_value = "exponential,weibull,loglogistic,cox")]
        models: String,
        #[arg(long)]
        covariates: Option<String>,
        #[arg(long, default_value = "efron")]
        ties: Ties,
    },
    /// Score patients with a saved Cox or log-odds model
    Score {
        /// `cox_fit.json` or `logistic_fit.json`
        #[arg(long)]
        model: PathBuf,
        /// Patient CSV (defaults to --input)
        #[arg(long)]
        patients: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        bins: usize,
    },
    /// Generate a synthetic cohort from a JSON spec
    Synth {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the spec's seed
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::MissingColumn(_)
        | Error::InvalidRow { .. }
        | Error::Config(_)
        | Error::Domain(_)
        | Error::Csv(_)
        | Error::Json(_)
        | Error::Io(_) => 2,
        Error::Degenerate(_) | Error::ConstantColumn(_) | Error::Collinear(..) => 3,
        Error::NotConverged(_) | Error::Divergence(_) | Error::Singular(_) => 4,
        Error::CovariateMismatch(_) => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match cli.command {
        Command::Summarize => commands::summarize::run(g),
        Command::Km { strata, cut, cut_rule } => commands::km::run(g, strata.as_deref(), cut, cut_rule),
        Command::Cox { covariates, ties, horizon, ridge } => commands::cox::run(g, covariates.as_deref(), ties, horizon, ridge),
        Command::Compare { models, covariates, ties } => commands::compare::run(g, &models, covariates.as_deref(), ties),
        Command::Score { model, patients, bins } => commands::score::run(g, &model, patients.as_deref(), bins),
        Command::Synth { spec, seed } => commands::synth::run(g, &spec, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
