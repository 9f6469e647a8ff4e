use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use citeverify::report::ReportFormat;
use citeverify::service::api::{self, VerdictRequest, DEFAULT_PORT};
use citeverify::service::{run_pipeline, PipelineError, ReportScope, RunConfig, RunStore, StatusFilter, TriageFilter};
use citeverify::sources::{Cache, SystemClock};

#[derive(Parser)]
#[command(name = "citeverify", version, about = "Check a paper's bibliography against scholarly metadata sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract, parse, verify and classify every citation of the input papers.
    Run(RunArgs),
    /// Human review of flagged citations.
    Triage {
        #[command(subcommand)]
        command: TriageCommand,
    },
    /// Render a run's report with current verdicts applied.
    Report {
        /// Run directory.
        #[arg(long)]
        run: PathBuf,
        /// corpus, papers, or paper:<id>
        #[arg(long, default_value = "corpus")]
        scope: String,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Inspect or evict the response cache.
    Cache {
        #[arg(long, env = "CITEVERIFY_CACHE_DIR")]
        cache_dir: PathBuf,
        #[command(subcommand)]
        command: CacheCommand,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Paper files or directories of papers (.pdf, .txt).
    #[arg(long, num_args = 1.., required = true)]
    input: Vec<PathBuf>,
    /// Use only the cache and recorded fixtures; never open a connection.
    #[arg(long)]
    offline: bool,
    #[arg(long, env = "CITEVERIFY_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// TOML run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parent directory for the run directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    anonymize_salt: Option<String>,
    /// Directory of recorded aggregator exchanges to replay.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Record live exchanges into this file.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Replacement reference-format grammar table.
    #[arg(long)]
    grammar: Option<PathBuf>,
    /// Ignore cached responses.
    #[arg(long)]
    refresh: bool,
    /// Write extracted text, parsed references and search traces.
    #[arg(long)]
    debug_artifacts: bool,
    #[arg(long, env = "CITEVERIFY_CONTACT")]
    contact: Option<String>,
    #[arg(long)]
    corpus_id: Option<String>,
    #[arg(long)]
    run_id: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum TriageCommand {
    /// Serve the triage API (and UI bundle, if given).
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        /// A run directory; its parent is served as the run collection.
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
        bind: IpAddr,
        /// Require `Authorization: Bearer <token>`.
        #[arg(long, env = "CITEVERIFY_TOKEN")]
        token: Option<String>,
        /// Static UI bundle to serve at `/`.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
    /// Print the queue.
    List {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value = "pending")]
        status: String,
    },
    /// Record a verdict.
    Decide {
        #[arg(long)]
        run: PathBuf,
        /// paper:index
        #[arg(long)]
        key: String,
        #[arg(long)]
        severity: String,
        #[arg(long)]
        reviewer: String,
        #[arg(long, default_value = "")]
        note: String,
        #[arg(long)]
        evidence_url: Option<String>,
    },
}

#[derive(Subcommand)]
enum CacheCommand {
    /// List entries with source, status, fetch date and expiry.
    Inspect,
    /// Remove expired entries, one entry, or everything.
    Evict {
        /// Only expired entries (default).
        #[arg(long, conflicts_with_all = ["all", "digest"])]
        expired: bool,
        #[arg(long, conflicts_with = "digest")]
        all: bool,
        /// Full digest, as printed by inspect.
        #[arg(long)]
        digest: Option<String>,
    },
}

type Failure = (u8, String);

fn split_run(run: &Path) -> Result<(RunStore, String), Failure> {
    let id = run.file_name().map(|n| n.to_string_lossy().into_owned()).ok_or((2, format!("bad run path {}", run.display())))?;
    let root = run.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let root = if root.as_os_str().is_empty() { PathBuf::from(".") } else { root };
    Ok((RunStore::new(root), id))
}

fn run_cmd(a: RunArgs) -> Result<(), Failure> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::from_path(p).map_err(|e| (2, e.to_string()))?,
        None => RunConfig::default(),
    };
    cfg.apply_env();
    cfg.inputs = a.input;
    cfg.offline |= a.offline;
    cfg.sources.refresh |= a.refresh;
    cfg.debug_artifacts |= a.debug_artifacts;
    macro_rules! set {
        ($field:expr, $value:expr) => {
            if let Some(v) = $value {
                $field = Some(v);
            }
        };
    }
    set!(cfg.cache_dir, a.cache_dir);
    set!(cfg.anonymize_salt, a.anonymize_salt);
    set!(cfg.fixtures_dir, a.fixtures);
    set!(cfg.record_to, a.record);
    set!(cfg.grammar_path, a.grammar);
    set!(cfg.contact, a.contact);
    set!(cfg.corpus_id, a.corpus_id);
    set!(cfg.run_id, a.run_id);
    if let Some(o) = a.out {
        cfg.out_dir = o;
    }
    if let Some(w) = a.workers {
        cfg.workers = w;
    }

    let out = run_pipeline(&cfg).map_err(|e| {
        let code = match e {
            PipelineError::Config(_) | PipelineError::EmptyInput | PipelineError::MissingInput(_) => 2,
            _ => 1,
        };
        (code, e.to_string())
    })?;
    for f in &out.failures {
        eprintln!("quarantined {}: {}", f.paper_id, f.error);
    }
    let s = &out.stats;
    println!("run {} -> {}", out.run_id, out.run_dir.display());
    println!(
        "{} papers, {} citations; {} papers with rephrased or mysterious citations ({:.1}%)",
        s.paper_count,
        s.citation_count,
        s.papers_with_issue,
        s.fraction_with_issue * 100.0
    );
    let pending: usize = out.reports.iter().map(|r| r.needs_triage_count).sum();
    println!("{pending} citations await triage");
    Ok(())
}

fn triage_cmd(c: TriageCommand) -> Result<(), Failure> {
    match c {
        TriageCommand::Serve { port, run, bind, token, ui_dir } => {
            let (store, id) = split_run(&run)?;
            store.manifest(&id).map_err(|e| (1, e.to_string()))?;
            if !bind.is_loopback() && token.is_none() {
                eprintln!("warning: serving on {bind} without a token");
            }
            let app = api::router(Arc::new(store), token, ui_dir);
            let rt = tokio::runtime::Runtime::new().map_err(|e| (1, e.to_string()))?;
            println!("serving run {id} on http://{}", SocketAddr::new(bind, port));
            rt.block_on(api::serve(SocketAddr::new(bind, port), app)).map_err(|e| (1, e.to_string()))
        }
        TriageCommand::List { run, status } => {
            let (store, id) = split_run(&run)?;
            let status: StatusFilter = status.parse().map_err(|e| (2, e))?;
            let items = store.list_triage(&id, &TriageFilter { status, ..Default::default() }).map_err(|e| (1, e.to_string()))?;
            for i in &items {
                let title = i.parsed.title.as_deref().unwrap_or("(no title)");
                println!("{:<24} {:<16} {title}", i.key, i.classification.severity.as_str());
                println!("{:<24} {}", "", i.classification.rationale);
            }
            println!("{} items", items.len());
            Ok(())
        }
        TriageCommand::Decide { run, key, severity, reviewer, note, evidence_url } => {
            let (store, id) = split_run(&run)?;
            let req = VerdictRequest {
                citation_key: key,
                decided_severity: severity.parse().map_err(|e| (2, e))?,
                reviewer,
                note,
                evidence_url,
                decided_at: None,
            };
            let v = req.into_verdict(chrono::Utc::now()).map_err(|e| (2, e.to_string()))?;
            let ack = store.record_verdict(&id, v).map_err(|e| (1, e.to_string()))?;
            println!("{}: {} -> {}", ack.citation_key, ack.machine_severity, ack.effective_severity);
            Ok(())
        }
    }
}

fn report_cmd(run: &Path, scope: &str, format: &str) -> Result<(), Failure> {
    let (store, id) = split_run(run)?;
    let scope: ReportScope = scope.parse().map_err(|e| (2, e))?;
    let format: ReportFormat = format.parse().map_err(|e| (2, e))?;
    let bytes = store.get_report(&id, &scope, format).map_err(|e| (1, e.to_string()))?;
    use std::io::Write as _;
    std::io::stdout().write_all(&bytes).map_err(|e| (1, e.to_string()))
}

fn cache_cmd(dir: PathBuf, c: CacheCommand) -> Result<(), Failure> {
    let cache = Cache::open(dir, Arc::new(SystemClock::default())).map_err(|e| (1, e.to_string()))?;
    let err = |e: citeverify::sources::CacheError| (1, e.to_string());
    match c {
        CacheCommand::Inspect => {
            let now = chrono::Utc::now();
            let entries = cache.entries().map_err(err)?;
            for (digest, e) in &entries {
                let state = if e.expired_at(now) { "expired" } else { "live" };
                println!("{} {:<12} {} {} {:<7} {}", digest, e.header.source, e.header.status, e.header.stored_at.format("%Y-%m-%d"), state, e.header.query);
            }
            println!("{} entries", entries.len());
        }
        CacheCommand::Evict { all, digest, .. } => {
            let n = match (all, digest) {
                (true, _) => cache.evict_all().map_err(err)?,
                (false, Some(d)) => usize::from(cache.evict(&d).map_err(err)?),
                (false, None) => cache.evict_expired().map_err(err)?,
            };
            println!("evicted {n} entries");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => run_cmd(a),
        Command::Triage { command } => triage_cmd(command),
        Command::Report { run, scope, format } => report_cmd(&run, &scope, &format),
        Command::Cache { cache_dir, command } => cache_cmd(cache_dir, command),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
