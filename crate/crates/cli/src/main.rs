//! `ruleparse`: batch front end for the rule engine, feature export and
//! evaluation tools.
//!
//! Exit codes: 0 success, 2 bad input, 3 internal invariant violation.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ruleparse_core::engine::{EngineError, RuleSet};
use ruleparse_core::eval::{Metric, DEFAULT_SHUFFLES};
use ruleparse_core::features::HybridConfig;
use ruleparse_core::matrix::DEFAULT_LEMMA_CAP;

#[derive(Debug, Parser)]
#[command(name = "ruleparse", version, about = "Rule-based dependency pre-annotation for Turkish treebanks")]
pub struct Cli {
    /// Worker threads for per-sentence work (0 = one per core).
    #[arg(long, global = true, env = "RULEPARSE_JOBS", default_value_t = 0)]
    pub jobs: usize,

    /// Seed for randomized commands; recorded in every manifest.
    #[arg(long, global = true, env = "RULEPARSE_SEED", default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the rule engine and record rule codes and heads in MISC.
    Annotate(AnnotateArgs),
    /// Export per-token rule and suffix features.
    Features(FeaturesArgs),
    /// Build a lemma-suffix matrix from morphological sidecars.
    Matrix(MatrixArgs),
    /// Attachment scores of a system file against gold.
    Score(ScoreArgs),
    /// Paired randomization test between two directories of outputs.
    Sigtest(SigtestArgs),
    /// Rule coverage and precision for cumulative rule sets.
    Ablate(AblateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Conllu,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// Enabled rules, comma separated ("all" and "none" also work).
    #[arg(long, env = "RULEPARSE_RULES", default_value = "cpi,nc,pc,ac,aaj,ajc,ajn")]
    pub rules: RuleSet,

    /// Lexicon directory, or "sample" for the bundled starter lexicon.
    #[arg(long, env = "RULEPARSE_LEXICON", default_value = "sample")]
    pub lexicon: String,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    pub treebank: PathBuf,
    /// Morphological analyses, one `sentence<TAB>token<TAB>lemma<TAB>tags` line per token.
    pub morph: PathBuf,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, env = "RULEPARSE_FORMAT", value_enum, default_value_t = Format::Conllu)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    pub treebank: PathBuf,
    /// Morphological sidecar; required by the suffix modes.
    #[arg(long)]
    pub morph: Option<PathBuf>,
    /// Feature channels: rule, infl, last, sufvec, or rule+<suffix mode>.
    #[arg(long, env = "RULEPARSE_HYBRID", default_value = "rule")]
    pub hybrid: HybridConfig,
    /// Lemma-suffix matrix for the sufvec mode.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Suffix inventory file (defaults to the bundled 81-suffix inventory).
    #[arg(long, env = "RULEPARSE_INVENTORY")]
    pub inventory: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, env = "RULEPARSE_FORMAT", value_enum, default_value_t = Format::Conllu)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// Sidecar files making up the corpus.
    #[arg(required = true)]
    pub morph: Vec<PathBuf>,
    #[arg(long, env = "RULEPARSE_INVENTORY")]
    pub inventory: Option<PathBuf>,
    /// Number of most frequent lemmas kept.
    #[arg(long, env = "RULEPARSE_CAP", default_value_t = DEFAULT_LEMMA_CAP)]
    pub cap: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    pub gold: PathBuf,
    pub system: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SigtestArgs {
    pub gold: PathBuf,
    /// Directory of `.conllu` outputs of system A.
    pub dir_a: PathBuf,
    /// Directory of `.conllu` outputs of system B.
    pub dir_b: PathBuf,
    #[arg(long, env = "RULEPARSE_SHUFFLES", default_value_t = DEFAULT_SHUFFLES)]
    pub shuffles: usize,
    #[arg(long, env = "RULEPARSE_METRIC", default_value = "uas")]
    pub metric: Metric,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    pub gold: PathBuf,
    pub morph: PathBuf,
    /// Lexicon directory, or "sample".
    #[arg(long, env = "RULEPARSE_LEXICON", default_value = "sample")]
    pub lexicon: String,
    /// Use the six-step progression without AV and NV.
    #[arg(long)]
    pub no_av_nv: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// 3 when the engine broke one of its own guarantees, 2 for anything the
/// user can fix by changing the input.
fn exit_code(err: &anyhow::Error) -> u8 {
    let internal = err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<EngineError>(),
            Some(EngineError::IterationCap(_) | EngineError::ZeroIterations)
        )
    });
    if internal {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: {}", e);
            return ExitCode::from(3);
        }
    }
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {:#}", err);
            ExitCode::from(exit_code(&err))
        }
    }
}
