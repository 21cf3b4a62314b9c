use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "argmine", version, about = "Mine tables from OCR token documents using a selected example item")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine every document with one or more pattern selections and write the results.
    Extract(ExtractArgs),
    /// Score result files against ground truth.
    Eval(EvalArgs),
    /// Generate a synthetic corpus.
    Gen(GenArgs),
    /// Serve documents, mining and evaluation over HTTP.
    Serve(ServeArgs),
}

/// Knobs shared by everything that mines.
#[derive(Debug, Clone, Args)]
pub struct Tuning {
    /// Blend between relation agreement (1) and node similarity (0).
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Minimum matching score for an item to be kept.
    #[arg(long, default_value_t = 0.7)]
    pub threshold: f64,
    /// Fixed intra-field gap in pixels instead of learning it from the selection.
    #[arg(long)]
    pub gap: Option<i64>,
    /// Rules file replacing the built-in label taxonomy.
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Keep every field on a single line.
    #[arg(long)]
    pub no_line_merge: bool,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Document files or directories of `*.json` documents.
    #[arg(long, required = true, num_args = 1..)]
    pub docs: Vec<PathBuf>,
    /// Pattern selection file; repeat to rank several patterns per document.
    #[arg(long, conflicts_with = "own_patterns")]
    pub pattern: Vec<PathBuf>,
    /// Directory holding `<doc_id>.json` selections; each document is mined with its own.
    #[arg(long)]
    pub own_patterns: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub tuning: Tuning,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Source {
    Lab,
    Client,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ZoneArg {
    Header,
    Body,
    Footer,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth files or directories.
    #[arg(long, required = true, num_args = 1..)]
    pub gt: Vec<PathBuf>,
    /// Result files or directories (a `ranking.json` is skipped).
    #[arg(long, required = true, num_args = 1..)]
    pub results: Vec<PathBuf>,
    /// Where the patterns came from; labels the report row.
    #[arg(long, value_enum, default_value = "lab")]
    pub source: Source,
    /// Selections whose zones group the report; otherwise every document uses `--zone`.
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "body")]
    pub zone: ZoneArg,
    /// Also write the machine-readable report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Corpus spec file; defaults apply to missing keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub docs: Vec<PathBuf>,
    /// Directory of named selections for `POST /mine-corpus` and the report.
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    /// Ground truth for `GET /report`.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Precomputed results for `GET /report`; mined on demand when absent.
    #[arg(long)]
    pub results: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[command(flatten)]
    pub tuning: Tuning,
}
