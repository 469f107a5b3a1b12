//! `ema`: operator entry point.
//!
//! Exit codes: 0 success, 1 rejected input (validation, authorization,
//! conflict), 2 I/O, network, store or bind failure. Failures are reported
//! on stderr as JSON lines.

mod config;
mod table;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ema_core::model::QuestionnaireDocument;
use ema_core::time::{parse_rfc3339, EpochMillis};
use ema_core::validate::{element_counts, Issue};
use ema_pipeline::{compile_dir, emit_json, is_workbook_dir, workbook_dirs, PipelineError, SeedError};
use ema_server::{compute_summary, AppState, Clock, ServiceConfig, Store};
use serde_json::{json, Value};

use crate::config::Config;

#[derive(Parser)]
#[command(name = "ema", version, about = "Questionnaire platform operator tool")]
struct Cli {
    /// TOML config file; every field has a default.
    #[arg(long, global = true, env = "EMA_CONFIG")]
    config: Option<PathBuf>,
    /// Fixed clock for reproducible runs (RFC 3339).
    #[arg(long, global = true, value_parser = parse_now)]
    now: Option<EpochMillis>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a workbook directory to JSON. Given a directory of
    /// workbooks, writes one `<study>.json` per workbook into `--out`.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Upload questionnaire JSON (a file, or every `*.json` in a directory).
    Seed {
        /// Base URL; defaults to the configured listen address.
        #[arg(long)]
        api: Option<String>,
        /// Defaults to the configured admin token.
        #[arg(long, env = "EMA_TOKEN", hide_env_values = true)]
        token: Option<String>,
        #[arg(long)]
        file: PathBuf,
    },
    /// Run the API service until SIGINT or SIGTERM.
    Serve {
        /// Overrides the configured listen address.
        #[arg(long)]
        listen: Option<String>,
    },
    /// Print summary statistics from the configured database.
    Stats {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

fn parse_now(s: &str) -> Result<EpochMillis, String> {
    parse_rfc3339(s).map_err(|e| e.to_string())
}

/// A failed command: exit status plus the JSON lines describing it.
#[derive(Debug)]
pub struct Failure {
    exit: u8,
    lines: Vec<Value>,
}

impl Failure {
    pub fn invalid(code: &str, message: impl Into<String>) -> Self {
        Self { exit: 1, lines: vec![json!({ "code": code, "message": message.into() })] }
    }

    pub fn fatal(code: &str, message: impl Into<String>) -> Self {
        Self { exit: 2, lines: vec![json!({ "code": code, "message": message.into() })] }
    }

    pub fn io(path: &Path, e: io::Error) -> Self {
        Self::fatal("E_IO", format!("{}: {e}", path.display()))
    }

    fn issues(issues: &[Issue]) -> Self {
        Self { exit: 1, lines: issues.iter().map(|i| issue_line(i, "error")).collect() }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Invalid(issues) => Self::issues(&issues),
            PipelineError::Io { path, source } => Self::io(&path, source),
        }
    }
}

impl From<SeedError> for Failure {
    fn from(e: SeedError) -> Self {
        let line = json!({ "code": e.code(), "message": e.to_string() });
        Self { exit: if e.is_transport() { 2 } else { 1 }, lines: vec![line] }
    }
}

impl From<ema_server::StoreError> for Failure {
    fn from(e: ema_server::StoreError) -> Self {
        Self::fatal(e.code(), e.to_string())
    }
}

fn issue_line(issue: &Issue, severity: &str) -> Value {
    let mut v = serde_json::to_value(issue).expect("issues serialize");
    v["severity"] = json!(severity);
    v
}

fn emit_stdout(v: &Value) {
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "{v}");
}

fn convert(input: &Path, out: &Path) -> Result<(), Failure> {
    let single = is_workbook_dir(input);
    let dirs = if single { vec![input.to_path_buf()] } else { workbook_dirs(input).map_err(|e| Failure::io(input, e))? };
    if dirs.is_empty() {
        return Err(Failure::invalid("E_VALIDATION", format!("{} holds no workbook", input.display())));
    }
    // compile everything before writing anything
    let mut docs = Vec::new();
    let mut errors = Vec::new();
    for dir in &dirs {
        match compile_dir(dir) {
            Ok(c) => {
                for w in &c.warnings {
                    eprintln!("{}", issue_line(w, "warning"));
                }
                docs.push(c.document);
            }
            Err(PipelineError::Invalid(issues)) => errors.extend(issues),
            Err(e) => return Err(e.into()),
        }
    }
    if !errors.is_empty() {
        return Err(Failure::issues(&errors));
    }

    let mut counts = std::collections::BTreeMap::new();
    let mut written = Vec::new();
    for doc in &docs {
        let path = if single { out.to_path_buf() } else { out.join(format!("{}.json", doc.meta.study_id)) };
        emit_json(doc, &path)?;
        for (kind, n) in element_counts(doc.unique_questionnaires()) {
            *counts.entry(kind).or_insert(0) += n;
        }
        written.push(json!({
            "study_id": doc.meta.study_id,
            "file": path,
            "questionnaires": doc.questionnaires.len(),
            "rules": doc.feedback.len(),
        }));
    }
    let total: usize = counts.values().sum();
    emit_stdout(&json!({ "documents": written, "element_counts": counts, "elements_total": total }));
    Ok(())
}

fn seed_files(path: &Path) -> Result<Vec<PathBuf>, Failure> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| Failure::io(path, e))? {
        let p = entry.map_err(|e| Failure::io(path, e))?.path();
        if p.is_file() && p.extension().is_some_and(|x| x == "json") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn seed(config: &Config, api: Option<String>, token: Option<String>, file: &Path) -> Result<(), Failure> {
    let api = api.unwrap_or_else(|| format!("http://{}", config.listen));
    let token = token
        .or_else(|| config.admin_token.clone())
        .ok_or_else(|| Failure::invalid("E_AUTH", "no token: pass --token, set EMA_TOKEN or admin_token"))?;
    for path in seed_files(file)? {
        let text = fs::read_to_string(&path).map_err(|e| Failure::io(&path, e))?;
        let doc: QuestionnaireDocument = serde_json::from_str(&text)
            .map_err(|e| Failure::invalid("E_VALIDATION", format!("{}: {e}", path.display())))?;
        for r in ema_pipeline::seed(&api, &token, &doc)? {
            emit_stdout(&json!({
                "questionnaire_id": r.questionnaire_id,
                "action": r.action,
                "new_version": r.new_version,
            }));
        }
    }
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
    tracing::info!("shutting down");
}

fn serve(config: &Config, listen: Option<String>, now: Option<EpochMillis>) -> Result<(), Failure> {
    let _ = tracing_subscriber::fmt()
        .with_writer(io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .try_init();
    let service = ServiceConfig {
        clock: now.map(Clock::Fixed),
        offset: config.timezone,
        admin_token: config.admin_token.clone(),
        tracked_packages: config.tracked()?,
    };
    let store = Store::open(&config.database)?;
    let state = AppState::new(store, service);
    let addr = listen.unwrap_or_else(|| config.listen.clone());
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::fatal("E_RUNTIME", e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| Failure::fatal("E_BIND", format!("cannot listen on {addr}: {e}")))?;
        let local = listener.local_addr().map_err(|e| Failure::fatal("E_BIND", e.to_string()))?;
        emit_stdout(&json!({ "listening": format!("http://{local}") }));
        tracing::info!(%local, database = %config.database.display(), "serving");
        ema_server::serve(listener, state, shutdown_signal())
            .await
            .map_err(|e| Failure::fatal("E_SERVE", e.to_string()))
    })
}

fn stats(config: &Config, format: Format) -> Result<(), Failure> {
    let summary = compute_summary(&Store::open(&config.database)?)?;
    match format {
        Format::Json => emit_stdout(&serde_json::to_value(&summary).expect("summary serializes")),
        Format::Table => print!("{}", table::render(&summary)),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Convert { input, out } => convert(&input, &out),
        Command::Seed { api, token, file } => seed(&config, api, token, &file),
        Command::Serve { listen } => serve(&config, listen, cli.now),
        Command::Stats { format } => stats(&config, format),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let mut err = io::stderr().lock();
            for line in &f.lines {
                let _ = writeln!(err, "{line}");
            }
            ExitCode::from(f.exit)
        }
    }
}
