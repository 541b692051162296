//! `stagewise` command-line driver.

mod commands;
mod config;
mod manifest;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<stagewise::Error> for CliError {
    fn from(e: stagewise::Error) -> Self {
        match e {
            stagewise::Error::Provider { .. } => CliError::internal(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "stagewise", version, about = "Stage-wise tweet classification and topic extraction")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for folds, training and sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Run directory for all outputs.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// JSON-lines corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Gold `id,label` CSV.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// bow, tfidf or embed.
    #[arg(long)]
    pub features: Option<String>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub eta0: Option<f64>,
    #[arg(long)]
    pub min_df: Option<usize>,
    /// Whitespace-separated word vectors, needed for `--features embed`.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a corpus and tabulate daily counts, token lengths and stage counts.
    Ingest {
        corpus: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Discover related hashtags from seed hashtags over an offline corpus.
    Snowball {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Comma-separated seed hashtags.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<String>,
        #[arg(long)]
        sample_size: Option<usize>,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long)]
        min_occurrences: Option<usize>,
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// Pairwise agreement between annotators.
    Reliability { annotations: PathBuf },
    /// Stratified k-fold cross-validation of one configuration.
    Cv(ClassifyArgs),
    /// Cross-validated grid search over regularization and epochs.
    Grid(ClassifyArgs),
    /// Fit a model bundle on every labeled tweet.
    Train(ClassifyArgs),
    /// Label a corpus with a trained model bundle.
    Predict {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        model: PathBuf,
    },
    /// Validate predictions from an external model and tabulate them.
    ImportPreds {
        preds: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Per-cell topic extraction over the racist categories and stages.
    Topics {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// `id,label` predictions (or gold labels).
        #[arg(long)]
        preds: Option<PathBuf>,
        /// Comma-separated candidate topic counts.
        #[arg(long, value_delimiter = ',')]
        ks: Vec<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        min_docs: Option<usize>,
    },
    /// Render all summary tables from earlier runs.
    Report {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        preds: Option<PathBuf>,
        /// Result files from `cv` or `grid`; repeat for several techniques.
        #[arg(long = "cv")]
        cv: Vec<PathBuf>,
        /// `topics.json` from a `topics` run.
        #[arg(long)]
        topics: Option<PathBuf>,
    },
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stagewise: error: {}", one_line(&e.message));
            ExitCode::from(e.code)
        }
    }
}
