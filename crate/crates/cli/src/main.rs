mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use embias::analogy::{DEFAULT_DELTA, DEFAULT_VOCAB_LIMIT};
use embias::debias::{DEFAULT_LAMBDA, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use embias::Format;

/// Measure and reduce direction bias in word embeddings.
#[derive(Debug, Parser)]
#[command(name = "embias", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Project words onto a bias direction (or compare two embeddings).
    Project(ProjectArgs),
    /// Generate analogy pairs along a bias direction.
    Analogies(AnalogiesArgs),
    /// Turn an analogy CSV into a rating-task CSV.
    ExportTasks(ExportTasksArgs),
    /// Aggregate rater responses for exported tasks.
    Aggregate(AggregateArgs),
    /// Learn and apply a debiasing transform.
    Debias(DebiasArgs),
    /// Score embeddings on similarity and analogy benchmarks.
    Eval(EvalArgs),
    /// Before/after bias report between two existing embeddings.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Input {
    /// Embedding file.
    #[arg(long, value_name = "FILE")]
    pub embedding: PathBuf,
    /// word2vec-binary, word2vec-text, glove-text or auto.
    #[arg(long, default_value = "auto")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub input: Input,
    /// Second embedding, projected on its own direction.
    #[arg(long, value_name = "FILE")]
    pub embedding2: Option<PathBuf>,
    #[arg(long, value_name = "POS,NEG", value_parser = parse_anchors)]
    pub anchors: (String, String),
    /// Words to project, one per line.
    #[arg(long, value_name = "FILE")]
    pub words: PathBuf,
    /// Row-normalize vectors before projecting.
    #[arg(long)]
    pub normalize: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct AnalogiesArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, value_name = "POS,NEG", value_parser = parse_anchors)]
    pub anchors: (String, String),
    /// Maximum pair distance.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = 1000)]
    pub top_k: usize,
    /// Candidate words; defaults to the first --vocab-limit entries.
    #[arg(long, value_name = "FILE")]
    pub words: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_VOCAB_LIMIT)]
    pub vocab_limit: usize,
    #[arg(long)]
    pub normalize: bool,
    /// Also write tasks.csv for human raters.
    #[arg(long)]
    pub export_tasks: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ExportTasksArgs {
    /// analogies.csv produced by the analogies subcommand.
    #[arg(long, value_name = "FILE")]
    pub pairs: PathBuf,
    #[arg(long, value_name = "POS,NEG", value_parser = parse_anchors)]
    pub anchors: (String, String),
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long, value_name = "FILE")]
    pub tasks: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub responses: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DebiasArgs {
    #[command(flatten)]
    pub input: Input,
    /// Direction anchor pair; repeat for several directions.
    #[arg(long, value_name = "POS,NEG", value_parser = parse_anchors, required = true)]
    pub anchors: Vec<(String, String)>,
    /// Training seed words.
    #[arg(long, value_name = "FILE")]
    pub seeds: PathBuf,
    /// Held-out seed words for the report; excluded from training.
    #[arg(long, value_name = "FILE")]
    pub test_words: Option<PathBuf>,
    /// Background words to preserve; defaults to the rest of the vocabulary.
    #[arg(long, value_name = "FILE")]
    pub background: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Use a fixed 1/L step instead of Barzilai-Borwein steps.
    #[arg(long)]
    pub fixed_step: bool,
    /// Background words sampled for the report.
    #[arg(long, default_value_t = 1000)]
    pub sample: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Format of the debiased embedding; defaults to --format, or
    /// word2vec-binary when that is auto.
    #[arg(long)]
    pub out_format: Option<Format>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: Input,
    /// Second embedding; rows are labelled before/after.
    #[arg(long, value_name = "FILE")]
    pub embedding2: Option<PathBuf>,
    /// Word-similarity dataset; repeatable.
    #[arg(long, value_name = "FILE")]
    pub similarity: Vec<PathBuf>,
    /// Analogy dataset; repeatable.
    #[arg(long, value_name = "FILE")]
    pub analogy: Vec<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, value_name = "FILE")]
    pub embedding2: PathBuf,
    #[arg(long, value_name = "POS,NEG", value_parser = parse_anchors, required = true)]
    pub anchors: Vec<(String, String)>,
    /// Stereotype words.
    #[arg(long, value_name = "FILE")]
    pub seeds: PathBuf,
    /// Background words.
    #[arg(long, value_name = "FILE")]
    pub words: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

fn parse_anchors(s: &str) -> Result<(String, String), String> {
    match s.split_once(',') {
        Some((p, n)) if !p.trim().is_empty() && !n.trim().is_empty() && !n.contains(',') => {
            Ok((p.trim().to_string(), n.trim().to_string()))
        }
        _ => Err(format!("expected POS,NEG, got {s:?}")),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EMBIAS_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Project(a) => commands::project(&a),
        Command::Analogies(a) => commands::analogies(&a),
        Command::ExportTasks(a) => commands::export_tasks(&a),
        Command::Aggregate(a) => commands::aggregate(&a),
        Command::Debias(a) => commands::debias(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Compare(a) => commands::compare(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("embias: {f}");
            ExitCode::from(f.code())
        }
    }
}
