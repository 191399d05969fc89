//! Command-line front end. Exit codes: 0 success, 2 user error, 1 internal error.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::clock::SystemClock;
use crate::config::Config;
use crate::corpus::{five_topic_spec, generate, CorpusSpec};
use crate::embed::Embedder;
use crate::engine::{parse_horizon, Engine, OverviewRequest};
use crate::eval::{format_sds_table, read_sds_cases, run_sds, SdsRanker};
use crate::service::{serve, AppState};
use crate::summarize::{
    label_stats, pairwise_accuracy, read_labels, train_ranker, Methods, RankerModel, SummarizeError,
};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USER: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "newsthemes", version, about = "Query-driven news theme overviews")]
pub struct Cli {
    /// TOML configuration file; every key is optional.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a story journal and report the resulting index. Accepted stories
    /// are appended to the configured journal, if any.
    Ingest { journal: PathBuf },
    /// Compose one overview offline and print it as JSON.
    Overview(OverviewArgs),
    /// Train the candidate ranker from graded labels.
    TrainRanker(TrainArgs),
    /// Evaluation harnesses.
    Eval {
        #[command(subcommand)]
        harness: EvalCommand,
    },
    /// Run the HTTP service until interrupted.
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
    /// Write a synthetic planted-topic journal.
    Generate {
        /// Corpus spec as JSON; the built-in five-topic spec when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct OverviewArgs {
    /// Story journal; defaults to the configured journal.
    #[arg(long)]
    pub journal: Option<PathBuf>,
    #[arg(short, long)]
    pub query: String,
    /// 1h, 8h, 1d, 2d or seconds.
    #[arg(long, default_value = "1d")]
    pub horizon: String,
    #[arg(long)]
    pub max_themes: Option<usize>,
    #[arg(long)]
    pub stories_per_theme: Option<usize>,
    /// Unix time of the request; defaults to the newest story in the journal.
    #[arg(long)]
    pub now: Option<i64>,
    /// Compose through the overview cache.
    #[arg(long)]
    pub cache: bool,
    /// Ranker model JSON; overrides the configured one.
    #[arg(long)]
    pub ranker: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub margin: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Single-document summarization: ROUGE of each story's summary against its reference.
    Sds {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "both")]
        method: Methods,
        /// Print JSON instead of the table.
        #[arg(long)]
        json: bool,
        /// Ranker model JSON; the default hand-set weights when omitted.
        #[arg(long, conflicts_with = "oracle")]
        ranker: Option<PathBuf>,
        /// Pick the candidate with the best ROUGE-L against the reference.
        #[arg(long)]
        oracle: bool,
    },
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn user(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USER, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) | Error::Compose(_) => EXIT_INTERNAL,
            _ => EXIT_USER,
        };
        let message = match &e {
            Error::Syntax(s) => format!("query syntax error at offset {}: {}", s.offset, s.message),
            other => other.to_string(),
        };
        CliError { code, message }
    }
}

type CliResult = Result<(), CliError>;

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))
}

/// Runs a parsed command line, writing results to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result =
        Config::load_or_default(cli.config.as_deref()).map_err(CliError::from).and_then(|config| match cli.command {
            Command::Ingest { journal } => cmd_ingest(config, &journal, out, err),
            Command::Overview(args) => cmd_overview(config, args, out, err),
            Command::TrainRanker(args) => cmd_train_ranker(args, out),
            Command::Eval { harness: EvalCommand::Sds { corpus, method, json, ranker, oracle } } => {
                cmd_eval_sds(config, &corpus, method, json, ranker.as_deref(), oracle, out)
            }
            Command::Serve { port } => cmd_serve(config, port, err),
            Command::Generate { spec, seed, out: path } => cmd_generate(spec.as_deref(), seed, &path, out),
        });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError { code: EXIT_INTERNAL, message: e.to_string() }
}

pub fn cmd_ingest(config: Config, journal: &Path, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let reader = open(journal)?;
    let (engine, _) = Engine::open(config)?;
    let report = engine.ingest_reader(reader)?;
    for (line, message) in &report.errors {
        writeln!(err, "warning: line {line}: {message}").map_err(io_err)?;
    }
    engine.flush()?;
    writeln!(out, "ingested {} stories, {} online clusters", report.accepted, engine.online_cluster_count())
        .map_err(io_err)
}

pub fn cmd_overview(mut config: Config, args: OverviewArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let horizon = parse_horizon(&args.horizon).map_err(CliError::user)?;
    crate::query::parse_query(&args.query).map_err(Error::from)?;
    let journal = args
        .journal
        .or_else(|| config.service.journal_path.take())
        .ok_or_else(|| CliError::user("no journal given (use --journal or service.journal_path)"))?;
    if let Some(path) = args.ranker {
        config.service.ranker_path = Some(path);
    }
    let reader = open(&journal)?;
    let engine = Engine::new(config)?;
    let report = engine.ingest_reader(reader)?;
    for (line, message) in &report.errors {
        writeln!(err, "warning: line {line}: {message}").map_err(io_err)?;
    }
    let now = args
        .now
        .unwrap_or_else(|| engine.index().snapshot().stories().iter().map(|s| s.ingested_at).max().unwrap_or(0));
    let request = OverviewRequest {
        query: args.query,
        horizon_seconds: horizon,
        max_themes: args.max_themes,
        stories_per_theme: args.stories_per_theme,
    };
    let (overview, _) = engine.overview(&request, now, args.cache)?;
    writeln!(out, "{}", overview.to_json()).map_err(io_err)
}

pub fn cmd_train_ranker(args: TrainArgs, out: &mut dyn Write) -> CliResult {
    let labels = read_labels(open(&args.labels)?)?;
    let stats = label_stats(&labels);
    let model = match train_ranker(&labels, args.epochs, args.margin) {
        Ok(m) => m,
        Err(SummarizeError::NoTrainingSignal) => {
            return Err(CliError::user("labels carry no preference (all grades are equal)"));
        }
        Err(e) => return Err(Error::from(e).into()),
    };
    model.save(&args.out)?;
    let accuracy = pairwise_accuracy(&model, &labels);
    let mut report = String::new();
    report += &format!(
        "labels: {} (multi-annotated {}, conflicts {})\n",
        stats.labels, stats.multi_annotated, stats.conflicts
    );
    report +=
        &format!("great: {:.3}\nacceptable: {:.3}\nterrible: {:.3}\n", stats.great, stats.acceptable, stats.terrible);
    report += &format!("pairwise accuracy: {accuracy:.3}\n");
    report += &format!("model written to {}\n", args.out.display());
    out.write_all(report.as_bytes()).map_err(io_err)
}

pub fn cmd_eval_sds(
    config: Config,
    corpus: &Path,
    method: Methods,
    json: bool,
    ranker_path: Option<&Path>,
    oracle: bool,
    out: &mut dyn Write,
) -> CliResult {
    let cases = read_sds_cases(open(corpus)?)?;
    if cases.is_empty() {
        return Err(CliError::user("the SDS corpus has no cases"));
    }
    let model = match ranker_path.or(config.service.ranker_path.as_deref()) {
        Some(p) => RankerModel::load(p)?,
        None => RankerModel::default(),
    };
    let ranker = if oracle { SdsRanker::RougeLOracle } else { SdsRanker::Model(&model) };
    let embedder = Embedder::new(config.embed.clone()).map_err(Error::from)?;
    let report = run_sds(&cases, method, ranker, &embedder, config.themes.max_body_sentences)?;
    let text = if json {
        serde_json::to_string(&report).map_err(|e| CliError { code: EXIT_INTERNAL, message: e.to_string() })? + "\n"
    } else {
        format_sds_table(std::slice::from_ref(&report))
    };
    out.write_all(text.as_bytes()).map_err(io_err)
}

pub fn cmd_serve(mut config: Config, port: Option<u16>, err: &mut dyn Write) -> CliResult {
    if let Some(p) = port {
        config.service.port = p;
    }
    let addr = format!("{}:{}", config.service.bind, config.service.port);
    let (engine, report) = Engine::open(config)?;
    if !report.errors.is_empty() {
        writeln!(err, "warning: {} journal lines skipped during replay", report.errors.len()).map_err(io_err)?;
    }
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(io_err)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError { code: EXIT_INTERNAL, message: format!("cannot bind {addr}: {e}") })?;
        log::info!("listening on {addr} with {} stories", report.accepted);
        let state = AppState { engine: Arc::new(engine), clock: Arc::new(SystemClock) };
        serve(state, listener, shutdown_signal()).await.map_err(io_err)
    })
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = terminate => {}
    }
}

pub fn cmd_generate(spec_path: Option<&Path>, seed: u64, path: &Path, out: &mut dyn Write) -> CliResult {
    let spec = match spec_path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| CliError::user(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str::<CorpusSpec>(&text)
                .map_err(|e| CliError::user(format!("invalid corpus spec: {e}")))?
        }
        None => five_topic_spec(seed),
    };
    let corpus = generate(&spec).map_err(Error::from)?;
    std::fs::write(path, corpus.to_journal()).map_err(io_err)?;
    writeln!(out, "wrote {} stories over {} topics to {}", corpus.stories.len(), spec.topics.len(), path.display())
        .map_err(io_err)
}
