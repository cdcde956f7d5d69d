use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cotforge", version, about = "Reward shaping, grading, corpus mining and RL simulation for long chain-of-thought training")]
pub struct Cli {
    /// Worker threads for parallel stages (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate or check a length-shaped reward.
    #[command(subcommand)]
    Reward(RewardCommand),
    /// Token-level N-gram repetition penalty, one vector per input line.
    Penalty(PenaltyArgs),
    /// Multi-discount advantages, one vector per input trace.
    Advantage(AdvantageArgs),
    /// Grade responses against gold answers.
    Grade(GradeArgs),
    /// Rejection-sample correct responses or assemble an RL prompt set.
    Filter(FilterArgs),
    /// Keyword, branching, coding-rate and length report for a batch of responses.
    Analyze(AnalyzeArgs),
    /// Near-duplicate clustering with MinHash and LSH.
    Dedup(DedupArgs),
    /// Search documents for phrases, verbatim or approximately.
    Mine(MineArgs),
    /// Train the synthetic chain-of-thought simulator and stream per-iteration stats.
    Simulate(SimulateArgs),
    /// LLM-backed verification, answer extraction and action prompting.
    Orchestrate(OrchestrateArgs),
}

/// Reward settings shared by `reward eval` and `reward validate`.
#[derive(Debug, Args)]
pub struct RewardSource {
    /// Global JSON config; its `reward` section is the starting point.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Preset name: default, reward_a, reward_b or reward_c.
    #[arg(long)]
    pub preset: Option<String>,
    /// Context cap L_max in generated tokens.
    #[arg(long)]
    pub max_length: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum RewardCommand {
    /// Print the reward for one (correctness, length) pair.
    Eval {
        #[command(flatten)]
        source: RewardSource,
        /// The answer is correct (omit for a wrong answer).
        #[arg(long)]
        correct: bool,
        /// Generated length in tokens.
        #[arg(long)]
        length: u64,
    },
    /// Report the ordering constraints a reward configuration violates.
    Validate {
        #[command(flatten)]
        source: RewardSource,
    },
}

#[derive(Debug, Args)]
pub struct PenaltyArgs {
    /// N-gram size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Penalty written at each token covered by a repeated N-gram.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    /// JSONL of token arrays, or objects with a `tokens` array (`-` for stdin).
    #[arg(long)]
    pub tokens_file: PathBuf,
    /// Global JSON config supplying the `repetition` defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AdvantageArgs {
    /// Comma-separated discount per reward channel.
    #[arg(long, value_delimiter = ',')]
    pub gammas: Vec<f64>,
    /// Single-channel GAE with this lambda instead of the multi-discount sum.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// JSONL traces `{"rewards": [[...], ...], "values": [...]}` (`-` for stdin).
    #[arg(long)]
    pub input: PathBuf,
    /// Global JSON config; `advantage.gamma_correct` and `gamma_penalty` are
    /// used when `--gammas` is absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradeArgs {
    /// JSONL `{"problem_id", "gold", "response"}` (`-` for stdin).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PromptsetArg {
    Filtered,
    Unfiltered,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// JSONL input (`-` for stdin). Graded-response records for rejection
    /// sampling, dataset records with `--promptset`.
    #[arg(long)]
    pub input: PathBuf,
    /// Keep at most this many correct responses per problem.
    #[arg(long, conflicts_with = "promptset")]
    pub keep_per_prompt: Option<usize>,
    /// Build an RL prompt set instead of rejection sampling.
    #[arg(long, value_enum)]
    pub promptset: Option<PromptsetArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// JSONL `{"id", "text", "token_length"}` (`-` for stdin).
    pub input: PathBuf,
    /// Use the built-in reflection keywords.
    #[arg(long)]
    pub keywords_default: bool,
    /// Extra comma-separated keywords.
    #[arg(long, value_delimiter = ',')]
    pub keywords: Vec<String>,
    /// Context cap; responses at or above it count as unterminated.
    #[arg(long)]
    pub max_length: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DedupArgs {
    /// JSONL `{"id", "text"}` (`-` for stdin).
    #[arg(long)]
    pub input: PathBuf,
    /// Global JSON config supplying `corpus.dedup`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Word shingle size.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub num_hashes: Option<usize>,
    #[arg(long)]
    pub bands: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write only the kept representatives instead of cluster records.
    #[arg(long)]
    pub kept_only: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    /// JSONL `{"id", "text"}` (`-` for stdin).
    #[arg(long)]
    pub input: PathBuf,
    /// One phrase per line; the built-in list is used when absent.
    #[arg(long)]
    pub phrases_file: Option<PathBuf>,
    /// Global JSON config supplying `corpus.mine`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub num_hashes: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulator config: one JSON object or an array of them.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in preset (classic, cosine-default, cosine-a, cosine-b,
    /// cosine-c, cosine-rep-on, cosine-rep-off, gamma-sweep).
    #[arg(long)]
    pub preset: Option<String>,
    /// Override the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the number of training iterations.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Stats JSONL destination (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrchestrateMode {
    Verify,
    Extract,
    Act,
}

#[derive(Debug, Args)]
pub struct OrchestrateArgs {
    #[arg(long, value_enum)]
    pub mode: OrchestrateMode,
    /// JSONL input (`-` for stdin): `{"response", "reference"}` for verify,
    /// `{"problem", "solution"}` for extract, `{"problem"}` for act.
    #[arg(long)]
    pub input: PathBuf,
    /// Replay replies from a JSONL script of `{"reply": ...}` instead of
    /// calling an endpoint.
    #[arg(long)]
    pub mock_script: Option<PathBuf>,
    /// Separate script for reflection steps in `act` mode.
    #[arg(long)]
    pub reflection_mock_script: Option<PathBuf>,
    /// Global JSON config supplying `endpoint`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Step cap for `act` mode.
    #[arg(long, default_value_t = 32)]
    pub max_steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
