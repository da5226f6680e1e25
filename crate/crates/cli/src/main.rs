mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use grasspod::pdelab::{Problem, Split};

#[derive(Parser, Debug)]
#[command(name = "grasspod", version, about = "Constrained gradient boosting of POD bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProblemArg {
    Burgers,
    Beam,
    Wave,
    External,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::Burgers => Problem::Burgers,
            ProblemArg::Beam => Problem::Beam,
            ProblemArg::Wave => Problem::Wave,
            ProblemArg::External => Problem::External,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Cxgb,
    Interp,
    Oracle,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(clap::Args, Debug, Clone)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a benchmark solver over its parameter grid and write a manifest.
    Generate {
        #[arg(long, value_enum)]
        problem: Option<ProblemArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Convert a numeric CSV matrix (rows = degrees of freedom) to a snapshot file.
    Import {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Append the file to this manifest (created if missing).
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Comma-separated parameter values for the manifest entry.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        parameter: Vec<f64>,
        #[arg(long, value_enum, default_value = "train")]
        split: SplitArg,
    },
    /// Compute rank-r POD bases and truncation floors for every manifest entry.
    Pod {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the constrained ensemble on the manifest's training split.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Predict the POD basis at one parameter point.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        theta: Vec<f64>,
        #[arg(long, value_enum, default_value = "cxgb")]
        method: MethodArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score methods on the manifest's test split.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        /// Trained model; without it a model is fitted on the training split.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// k-fold cross-validation over all manifest entries.
    Cv {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// Summarize a per-case CSV report.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Result of a command that ran to completion.
pub enum Outcome {
    Done,
    /// Nothing to evaluate.
    NoOp,
    /// Some cases failed; the report was still written.
    CaseFailures(usize),
}

fn configure_threads() {
    if let Some(n) = std::env::var("GRASSPOD_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { problem, common } => commands::generate(problem.map(Into::into), &common),
        Command::Import {
            input,
            output,
            manifest,
            parameter,
            split,
        } => commands::import(&input, &output, manifest.as_deref(), parameter, split.into()),
        Command::Pod { manifest, common } => commands::pod(&manifest, &common),
        Command::Train { manifest, common } => commands::train(&manifest, &common),
        Command::Predict {
            model,
            theta,
            method,
            out,
        } => commands::predict(&model, &theta, method, out.as_deref()),
        Command::Evaluate {
            manifest,
            model,
            method,
            common,
        } => commands::evaluate(&manifest, model.as_deref(), method, &common),
        Command::Cv {
            manifest,
            folds,
            method,
            common,
        } => commands::cv(&manifest, folds, method, &common),
        Command::Report { input, out } => commands::report(&input, out.as_deref()),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NoOp) => {
            eprintln!("nothing to evaluate: empty test split");
            ExitCode::from(3)
        }
        Ok(Outcome::CaseFailures(n)) => {
            eprintln!("{n} case(s) failed; see the report");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
