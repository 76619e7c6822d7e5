//! `sri`: command-line front end for semantic role induction.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "sri", version, about = "Unsupervised semantic role induction with crosslingual latent variables")]
struct Cli {
    /// More log output (-v info, -vv debug); RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read CoNLL-2009 files (and word alignments) into a corpus file.
    Ingest(IngestArgs),
    /// Train a model on a corpus.
    Train(TrainArgs),
    /// Label a language's frames with a trained model.
    Decode(DecodeArgs),
    /// Score labels against gold roles.
    Eval(EvalArgs),
    /// Produce baseline labels.
    Baseline(BaselineArgs),
    /// Draw a synthetic corpus from the generative model.
    Generate(GenerateArgs),
    /// Print corpus statistics.
    Stats(StatsArgs),
}

#[derive(Args)]
pub struct ManifestArg {
    /// Where to write the run manifest (default: next to the main output).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Rules {
    English,
    German,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Profile {
    Gold,
    Predicted,
}

#[derive(Args)]
pub struct IngestArgs {
    /// `LANG=PATH` of a CoNLL-2009 file; give two for a parallel corpus.
    #[arg(long = "conll", required = true, value_name = "LANG=PATH")]
    pub conll: Vec<String>,
    /// `LANG=PATH` of an argument sidecar replacing the APRED columns.
    #[arg(long = "sidecar", value_name = "LANG=PATH")]
    pub sidecar: Vec<String>,
    /// `LANG=english|german` voice and auxiliary rules (default english).
    #[arg(long = "rules", value_name = "LANG=RULES")]
    pub rules: Vec<String>,
    /// Pharaoh word alignments, one line per sentence pair.
    #[arg(long)]
    pub alignments: Option<PathBuf>,
    /// Keep only one-to-one alignment links.
    #[arg(long)]
    pub one_to_one: bool,
    /// Use gold or predicted lemma/POS/head/deprel columns.
    #[arg(long, value_enum, default_value = "gold")]
    pub profile: Profile,
    #[arg(short, long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub manifest: ManifestArg,
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// TOML training configuration.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Log-joint trace (default: `<out>.trace.tsv`).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Directory for the final sample's labels, one file per language.
    #[arg(long)]
    pub labels_dir: Option<PathBuf>,
    #[command(flatten)]
    pub manifest: ManifestArg,
}

#[derive(Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub language: String,
    #[arg(long, default_value_t = 50)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub manifest: ManifestArg,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub language: String,
    /// Labels to score.
    #[arg(long, conflicts_with = "model", required_unless_present = "model")]
    pub labels: Option<PathBuf>,
    /// Score a model by decoding the corpus first.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Gold labels file (default: the corpus' own gold roles).
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Second labels file to compare against with stratified shuffling.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub shuffles: usize,
    /// Seed of the shuffling test and of model decoding.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report JSON path.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub manifest: ManifestArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineKind {
    Syntactic,
    Supervised,
}

#[derive(Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub language: String,
    #[arg(long, value_enum, default_value = "syntactic")]
    pub kind: BaselineKind,
    /// Number of clusters of the syntactic baseline.
    #[arg(long = "n", short = 'n', default_value_t = 21)]
    pub n: usize,
    /// Training configuration of the supervised baseline.
    #[arg(long, required_if_eq("kind", "supervised"))]
    pub config: Option<PathBuf>,
    /// Fraction of frames whose gold labels the supervised baseline sees.
    #[arg(long, default_value_t = 0.1)]
    pub fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub selection_seed: u64,
    #[arg(short, long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub manifest: ManifestArg,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// TOML synthetic corpus configuration.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Directory for gold labels files, one per language (default: next to
    /// the corpus).
    #[arg(long)]
    pub labels_dir: Option<PathBuf>,
    /// Generating parameters (default: `<out>.params.json`).
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[command(flatten)]
    pub manifest: ManifestArg,
}

#[derive(Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Also write the statistics as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub manifest: ManifestArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Train(a) => commands::train(a),
        Command::Decode(a) => commands::decode(a),
        Command::Eval(a) => commands::eval(a),
        Command::Baseline(a) => commands::baseline(a),
        Command::Generate(a) => commands::generate(a),
        Command::Stats(a) => commands::stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
