use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use cotforge_core::advantage::{gae_single, multi_channel_advantage, AdvantageTrace, ChannelTrace, ValueTrace};
use cotforge_core::analysis::{analyze, Response, DEFAULT_KEYWORDS};
use cotforge_core::corpus::{lsh_dedup, parse_phrases, phrase_mine, Document, DEFAULT_PHRASES};
use cotforge_core::orchestrator::{
    llm_extract_answer, model_verify, run_action_machine_with, ActionClients, ChainOfThought, CompletionClient, HttpClient,
    MockClient, TOKEN_ENV,
};
use cotforge_core::par::Executor;
use cotforge_core::pipeline::{
    read_jsonl, sim_preset, stream_jsonl, write_record, DatasetRecord, GlobalConfig, JsonlError, PromptsetFilter, PromptsetMode,
};
use cotforge_core::repetition::{ngram_repetition_penalty, TokenSequence};
use cotforge_core::reward::{cosine_reward, validate_config, CorrectnessLabel, OrderingWarning, RewardConfig};
use cotforge_core::simulator::{run_experiment_with, IterationStats, SimConfig};
use cotforge_core::verifier::{GradeInput, GradedRecord, RejectionFilter};

use crate::cli::{
    AdvantageArgs, AnalyzeArgs, Cli, Command, DedupArgs, FilterArgs, GradeArgs, MineArgs, OrchestrateArgs, OrchestrateMode,
    PenaltyArgs, PromptsetArg, RewardCommand, RewardSource, SimulateArgs,
};
use crate::{Classify, Failure};

/// Records handed to the worker pool at a time by streaming subcommands.
const CHUNK: usize = 1024;

pub fn dispatch(cli: Cli) -> Result<(), Failure> {
    let workers = cli.workers;
    match cli.command {
        Command::Reward(cmd) => reward(cmd),
        Command::Penalty(args) => penalty(args, &Executor::new(workers)),
        Command::Advantage(args) => advantage(args, &Executor::new(workers)),
        Command::Grade(args) => grade(args, &Executor::new(workers)),
        Command::Filter(args) => filter(args),
        Command::Analyze(args) => analyze_cmd(args),
        Command::Dedup(args) => dedup(args, &Executor::new(workers)),
        Command::Mine(args) => mine(args, &Executor::new(workers)),
        Command::Simulate(args) => simulate(args, workers),
        Command::Orchestrate(args) => orchestrate(args),
    }
}

fn load_global(path: Option<&Path>) -> Result<GlobalConfig, Failure> {
    match path {
        Some(p) => GlobalConfig::load(p).config(),
        None => Ok(GlobalConfig::default()),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display())).input()?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_all<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, Failure> {
    let reader: Box<dyn io::BufRead> = if path.as_os_str() == "-" {
        Box::new(BufReader::new(io::stdin()))
    } else {
        Box::new(BufReader::new(
            File::open(path).with_context(|| format!("cannot open {}", path.display())).input()?,
        ))
    };
    let read = read_jsonl(reader).with_context(|| format!("reading {}", path.display())).input()?;
    if !read.malformed.is_empty() {
        eprintln!("skipped {} malformed line(s) in {}", read.malformed.len(), path.display());
    }
    Ok(read.records)
}

/// Streams `input` through `f` on the worker pool, writing results in input
/// order. Records for which `f` fails are skipped with a warning.
fn stream_map<T, R, F>(input: &Path, exec: &Executor, out: &mut dyn Write, f: F) -> Result<(), Failure>
where
    T: DeserializeOwned + Sync,
    R: Serialize + Send,
    F: Fn(&T) -> Result<R, String> + Sync + Send,
{
    let lines = stream_jsonl::<T>(input)
        .with_context(|| format!("cannot open {}", input.display()))
        .input()?;
    let mut skipped = 0usize;
    let mut record_index = 0usize;
    let mut chunk: Vec<T> = Vec::with_capacity(CHUNK);
    let mut flush = |chunk: &mut Vec<T>, skipped: &mut usize, record_index: &mut usize| -> Result<(), Failure> {
        for result in exec.map(chunk, &f) {
            match result {
                Ok(r) => write_record(out, &r).input()?,
                Err(message) => {
                    tracing::warn!(record = *record_index, %message, "skipping record");
                    *skipped += 1;
                }
            }
            *record_index += 1;
        }
        chunk.clear();
        Ok(())
    };
    for item in lines {
        match item {
            Ok(record) => {
                chunk.push(record);
                if chunk.len() == CHUNK {
                    flush(&mut chunk, &mut skipped, &mut record_index)?;
                }
            }
            Err(JsonlError::Malformed { line, message }) => {
                tracing::warn!(line, %message, "skipping malformed JSONL line");
                skipped += 1;
            }
            Err(JsonlError::Io(e)) => return Err(e).with_context(|| format!("reading {}", input.display())).input(),
        }
    }
    flush(&mut chunk, &mut skipped, &mut record_index)?;
    if skipped > 0 {
        eprintln!("skipped {skipped} record(s) in {}", input.display());
    }
    Ok(())
}

fn resolve_reward(src: &RewardSource) -> Result<RewardConfig, Failure> {
    let mut section = load_global(src.config.as_deref())?.reward;
    if let Some(preset) = &src.preset {
        section.preset = preset.clone();
    }
    if let Some(max) = src.max_length {
        section.max_length = Some(max);
    }
    section.resolve().config()
}

#[derive(Serialize)]
struct WarningOut {
    kind: OrderingWarning,
    message: String,
}

#[derive(Serialize)]
struct ValidateOut<'a> {
    config: &'a RewardConfig,
    warnings: Vec<WarningOut>,
}

fn reward(cmd: RewardCommand) -> Result<(), Failure> {
    match cmd {
        RewardCommand::Eval { source, correct, length } => {
            let cfg = resolve_reward(&source)?;
            println!("{:?}", cosine_reward(correct, length, &cfg));
        }
        RewardCommand::Validate { source } => {
            let cfg = resolve_reward(&source)?;
            let warnings = validate_config(&cfg)
                .into_iter()
                .map(|w| WarningOut {
                    kind: w,
                    message: w.to_string(),
                })
                .collect();
            let out = ValidateOut { config: &cfg, warnings };
            println!("{}", serde_json::to_string(&out).input()?);
        }
    }
    Ok(())
}

/// A penalty input line: a bare token array or an object with optional
/// active and output lengths.
#[derive(Deserialize)]
#[serde(untagged)]
enum TokensLine {
    Bare(Vec<u32>),
    Full {
        tokens: Vec<u32>,
        #[serde(default)]
        active_length: Option<usize>,
        #[serde(default)]
        max_length: Option<usize>,
    },
}

fn penalty(args: PenaltyArgs, exec: &Executor) -> Result<(), Failure> {
    let global = load_global(args.config.as_deref())?;
    let n = args.n.unwrap_or(global.repetition.ngram);
    let p = args.p.unwrap_or(global.repetition.penalty);
    if n == 0 {
        return Err(Failure::Config(anyhow!("--n must be at least 1")));
    }
    if !p.is_finite() {
        return Err(Failure::Config(anyhow!("--p must be finite")));
    }
    if p > 0.0 {
        tracing::warn!(p, "positive repetition penalty rewards repeats");
    }
    let mut out = open_out(args.out.as_deref())?;
    stream_map(&args.tokens_file, exec, &mut out, |line: &TokensLine| {
        let (tokens, active, max) = match line {
            TokensLine::Bare(t) => (t.clone(), None, None),
            TokensLine::Full {
                tokens,
                active_length,
                max_length,
            } => (tokens.clone(), *active_length, *max_length),
        };
        let active = active.unwrap_or(tokens.len());
        let max = max.unwrap_or(tokens.len());
        if active == 0 && max == 0 {
            return Ok(Vec::new());
        }
        let seq = TokenSequence::new(tokens, active, max).map_err(|e| e.to_string())?;
        ngram_repetition_penalty(&seq, n, p)
            .map(|v| v.values)
            .map_err(|e| e.to_string())
    })?;
    out.flush().input()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceLine {
    rewards: Vec<Vec<f64>>,
    values: Vec<f64>,
}

fn advantage(args: AdvantageArgs, exec: &Executor) -> Result<(), Failure> {
    let gammas = if args.gammas.is_empty() {
        let a = load_global(args.config.as_deref())?.advantage;
        vec![a.gamma_correct, a.gamma_penalty]
    } else {
        args.gammas.clone()
    };
    if let Some(g) = gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Failure::Config(anyhow!("discount {g} is outside [0, 1]")));
    }
    if let Some(lambda) = args.lambda {
        if gammas.len() != 1 {
            return Err(Failure::Config(anyhow!("--lambda needs exactly one discount")));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Failure::Config(anyhow!("lambda {lambda} is outside (0, 1]")));
        }
    }
    let mut out = open_out(args.out.as_deref())?;
    stream_map(&args.input, exec, &mut out, |line: &TraceLine| {
        if line.rewards.len() != gammas.len() {
            return Err(format!("{} reward channels but {} discounts", line.rewards.len(), gammas.len()));
        }
        let values = ValueTrace(line.values.clone());
        let result: Result<AdvantageTrace, _> = match args.lambda {
            Some(lambda) => gae_single(&line.rewards[0], &values, gammas[0], lambda),
            None => {
                let channels: Vec<ChannelTrace> = line
                    .rewards
                    .iter()
                    .zip(&gammas)
                    .map(|(r, &g)| ChannelTrace::new(r.clone(), g))
                    .collect::<Result<_, _>>()
                    .map_err(|e| e.to_string())?;
                multi_channel_advantage(&channels, &values)
            }
        };
        result.map(|a| a.0).map_err(|e| e.to_string())
    })?;
    out.flush().input()
}

fn grade(args: GradeArgs, exec: &Executor) -> Result<(), Failure> {
    let mut out = open_out(args.out.as_deref())?;
    stream_map(&args.input, exec, &mut out, |input: &GradeInput| Ok(GradedRecord::from_input(input.clone())))?;
    out.flush().input()
}

#[derive(Serialize)]
struct PromptsetReport {
    seen: usize,
    kept: usize,
    missing_gold: usize,
    duplicate_ids: usize,
    malformed: usize,
    ratio: f64,
}

fn filter(args: FilterArgs) -> Result<(), Failure> {
    let lines_err = || format!("cannot open {}", args.input.display());
    let mut out = open_out(args.out.as_deref())?;
    let mut io_error = None;
    let summary = match args.promptset {
        Some(mode) => {
            let mode = match mode {
                PromptsetArg::Filtered => PromptsetMode::Filtered,
                PromptsetArg::Unfiltered => PromptsetMode::Unfiltered,
            };
            let lines = stream_jsonl::<DatasetRecord>(&args.input).with_context(lines_err).input()?;
            let mut filter = PromptsetFilter::new(stop_on_io(lines, &mut io_error), mode);
            for record in filter.by_ref() {
                write_record(&mut out, &record).input()?;
            }
            let s = filter.summary();
            serde_json::to_string(&PromptsetReport {
                seen: s.seen,
                kept: s.kept,
                missing_gold: s.missing_gold,
                duplicate_ids: s.duplicate_ids,
                malformed: s.malformed,
                ratio: s.ratio(),
            })
        }
        None => {
            let lines = stream_jsonl::<GradeInput>(&args.input).with_context(lines_err).input()?;
            let mut filter = RejectionFilter::new(stop_on_io(lines, &mut io_error), args.keep_per_prompt);
            for record in filter.by_ref() {
                write_record(&mut out, &record).input()?;
            }
            serde_json::to_string(&filter.summary())
        }
    }
    .input()?;
    if let Some(e) = io_error {
        return Err(e).with_context(|| format!("reading {}", args.input.display())).input();
    }
    out.flush().input()?;
    eprintln!("{summary}");
    Ok(())
}

/// Ends the stream at the first I/O error, keeping it in `slot`.
fn stop_on_io<'a, T: 'a>(
    lines: impl Iterator<Item = Result<T, JsonlError>> + 'a,
    slot: &'a mut Option<io::Error>,
) -> impl Iterator<Item = Result<T, JsonlError>> + 'a {
    lines.map_while(move |item| match item {
        Err(JsonlError::Io(e)) => {
            *slot = Some(e);
            None
        }
        other => Some(other),
    })
}

fn analyze_cmd(args: AnalyzeArgs) -> Result<(), Failure> {
    let batch: Vec<Response> = read_all(&args.input)?;
    let mut keywords: Vec<&str> = Vec::new();
    if args.keywords_default || args.keywords.is_empty() {
        keywords.extend(DEFAULT_KEYWORDS);
    }
    keywords.extend(args.keywords.iter().map(String::as_str));
    let report = analyze(&batch, &keywords, args.max_length).input()?;
    let mut out = open_out(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report).input()?;
    writeln!(out).input()?;
    out.flush().input()
}

#[derive(Serialize)]
struct DedupSummary {
    documents: usize,
    clusters: usize,
    duplicates_removed: usize,
    skipped: usize,
    candidate_pairs: usize,
    confirmed_pairs: usize,
}

fn dedup(args: DedupArgs, exec: &Executor) -> Result<(), Failure> {
    let mut cfg = load_global(args.config.as_deref())?.corpus.dedup;
    cfg.k = args.k.unwrap_or(cfg.k);
    cfg.num_hashes = args.num_hashes.unwrap_or(cfg.num_hashes);
    cfg.bands = args.bands.unwrap_or(cfg.bands);
    cfg.rows = args.rows.unwrap_or(cfg.rows);
    cfg.threshold = args.threshold.unwrap_or(cfg.threshold);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.check().config()?;
    let docs: Vec<Document> = read_all(&args.input)?;
    let result = lsh_dedup(&docs, &cfg, exec).config()?;
    let mut out = open_out(args.out.as_deref())?;
    if args.kept_only {
        let kept: std::collections::HashSet<&str> = result.kept_ids().collect();
        for doc in docs.iter().filter(|d| kept.contains(d.id.as_str())) {
            write_record(&mut out, doc).input()?;
        }
    } else {
        for cluster in &result.clusters {
            write_record(&mut out, cluster).input()?;
        }
    }
    out.flush().input()?;
    let clustered: usize = result.clusters.iter().map(|c| c.members.len()).sum();
    let summary = DedupSummary {
        documents: docs.len(),
        clusters: result.clusters.len(),
        duplicates_removed: clustered - result.clusters.len(),
        skipped: result.skipped.len(),
        candidate_pairs: result.candidate_pairs,
        confirmed_pairs: result.confirmed_pairs,
    };
    eprintln!("{}", serde_json::to_string(&summary).input()?);
    Ok(())
}

fn mine(args: MineArgs, exec: &Executor) -> Result<(), Failure> {
    let mut cfg = load_global(args.config.as_deref())?.corpus.mine;
    cfg.k = args.k.unwrap_or(cfg.k);
    cfg.num_hashes = args.num_hashes.unwrap_or(cfg.num_hashes);
    cfg.threshold = args.threshold.unwrap_or(cfg.threshold);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    let phrases = match &args.phrases_file {
        Some(path) => parse_phrases(
            &std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))
                .input()?,
        ),
        None => parse_phrases(DEFAULT_PHRASES),
    };
    if phrases.is_empty() {
        return Err(Failure::Config(anyhow!("the phrase list is empty")));
    }
    let docs: Vec<Document> = read_all(&args.input)?;
    let matches = phrase_mine(&docs, &phrases, &cfg, exec).config()?;
    let mut out = open_out(args.out.as_deref())?;
    for m in &matches {
        write_record(&mut out, m).input()?;
    }
    out.flush().input()
}

fn load_sim_configs(args: &SimulateArgs) -> Result<Vec<SimConfig>, Failure> {
    let mut configs = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read simulator config {}", path.display()))
                .config()?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("invalid simulator config {}", path.display()))
                .config()?;
            let parsed = match value {
                serde_json::Value::Array(items) => items
                    .into_iter()
                    .map(serde_json::from_value)
                    .collect::<Result<Vec<SimConfig>, _>>(),
                other => serde_json::from_value(other).map(|c| vec![c]),
            };
            parsed
                .with_context(|| format!("invalid simulator config {}", path.display()))
                .config()?
        }
        (None, Some(name)) => sim_preset(name).config()?,
        (None, None) => vec![SimConfig::default()],
    };
    if configs.is_empty() {
        return Err(Failure::Config(anyhow!("simulator config array is empty")));
    }
    for cfg in &mut configs {
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        if let Some(iterations) = args.iterations {
            cfg.iterations = iterations;
        }
        cfg.validate().config()?;
    }
    Ok(configs)
}

#[derive(Serialize)]
struct RunStats<'a> {
    run: usize,
    #[serde(flatten)]
    stats: &'a IterationStats,
}

fn simulate(args: SimulateArgs, workers: usize) -> Result<(), Failure> {
    let configs = load_sim_configs(&args)?;
    let mut out = open_out(args.out.as_deref())?;
    let tagged = configs.len() > 1;
    let mut write_error = None;
    for (run, cfg) in configs.iter().enumerate() {
        run_experiment_with(cfg, Executor::new(workers), |stats| {
            if write_error.is_some() {
                return;
            }
            let written = if tagged {
                write_record(&mut out, &RunStats { run, stats })
            } else {
                write_record(&mut out, stats)
            };
            if let Err(e) = written {
                write_error = Some(e);
            }
        })
        .config()?;
        if let Some(e) = write_error.take() {
            return Err(Failure::Input(e.into()));
        }
    }
    out.flush().input()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyLine {
    #[serde(default)]
    id: Option<String>,
    response: String,
    reference: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtractLine {
    #[serde(default)]
    id: Option<String>,
    problem: String,
    solution: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActLine {
    #[serde(default)]
    id: Option<String>,
    problem: String,
}

#[derive(Serialize)]
struct VerifyOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    label: CorrectnessLabel,
}

#[derive(Serialize)]
struct ExtractOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    extracted: Option<String>,
}

#[derive(Serialize)]
struct ActOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    chain: ChainOfThought,
}

fn mock_client(path: &Path) -> Result<MockClient, Failure> {
    let script = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read mock script {}", path.display()))
        .input()?;
    MockClient::from_script(&script)
        .with_context(|| format!("in {}", path.display()))
        .input()
}

fn http_client(url: Option<&str>, global: &GlobalConfig) -> Result<HttpClient, Failure> {
    let ep = &global.endpoint;
    match url {
        Some(url) => {
            let token = std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty());
            Ok(HttpClient::new(url, token, ep.timeout(), ep.retries))
        }
        None => HttpClient::from_env(ep.timeout(), ep.retries).config(),
    }
}

fn orchestrate(args: OrchestrateArgs) -> Result<(), Failure> {
    let global = load_global(args.config.as_deref())?;
    let client: Box<dyn CompletionClient> = match &args.mock_script {
        Some(path) => Box::new(mock_client(path)?),
        None => Box::new(http_client(global.endpoint.url.as_deref(), &global)?),
    };
    let reflection: Option<Box<dyn CompletionClient>> = match (&args.reflection_mock_script, &global.endpoint.reflection_url) {
        (Some(path), _) => Some(Box::new(mock_client(path)?)),
        (None, Some(url)) if args.mock_script.is_none() => Some(Box::new(http_client(Some(url), &global)?)),
        _ => None,
    };
    let mut out = open_out(args.out.as_deref())?;
    match args.mode {
        OrchestrateMode::Verify => {
            for line in read_all::<VerifyLine>(&args.input)? {
                let label = model_verify(&line.response, &line.reference, client.as_ref());
                write_record(&mut out, &VerifyOut { id: line.id, label }).input()?;
            }
        }
        OrchestrateMode::Extract => {
            for line in read_all::<ExtractLine>(&args.input)? {
                let extracted = llm_extract_answer(&line.problem, &line.solution, client.as_ref());
                write_record(&mut out, &ExtractOut { id: line.id, extracted }).input()?;
            }
        }
        OrchestrateMode::Act => {
            if args.max_steps == 0 {
                return Err(Failure::Config(anyhow!("--max-steps must be at least 1")));
            }
            let clients = ActionClients {
                default: client.as_ref(),
                reflection: reflection.as_deref(),
            };
            for line in read_all::<ActLine>(&args.input)? {
                let chain = run_action_machine_with(&line.problem, &clients, args.max_steps).input()?;
                write_record(&mut out, &ActOut { id: line.id, chain }).input()?;
            }
        }
    }
    out.flush().input()
}
