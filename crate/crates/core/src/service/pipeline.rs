use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::Utc;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{ConfigError, RunConfig};
use super::store::{write_json, RunManifest, RUN_MANIFEST};
use crate::classify::{check_identifiers, classify_citation, classify_unverified, Classification, Lookup, Thresholds};
use crate::extract::{extract_text, isolate_bibliography, split_entries, DocumentText, ExtractError, Input, SourceKind};
use crate::parse::{parse_reference_with, GrammarError, GrammarTable, ParsedReference};
use crate::report::{
    aggregate_corpus, anonymize, build_paper_report, render_report, CitationRecord, CorpusStats, PaperReport,
    ReportFormat, ReportView,
};
use crate::sources::{
    search_all, Cache, CandidateMatch, Clock, FixtureError, OfflineTransport, RecordingTransport, ReplayTransport,
    SearchError, SearchPlan, SimulatedClock, SourceClient, SourceTrace, SystemClock, Transport,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no .pdf or .txt papers found under the given inputs")]
    EmptyInput,
    #[error("input {0} does not exist")]
    MissingInput(PathBuf),
    #[error("loading grammar table: {0}")]
    Grammar(#[from] GrammarError),
    #[error("loading fixtures: {0}")]
    Fixtures(#[from] FixtureError),
    #[error("opening cache: {0}")]
    Cache(#[from] crate::sources::CacheError),
    #[error("live network transport is not compiled in; use --offline")]
    NoNetwork,
    #[error("run directory {0} already exists")]
    RunExists(PathBuf),
    #[error("no paper could be processed ({0} failed)")]
    NothingProcessed(usize),
    #[error("writing run directory: {0}")]
    Io(#[from] std::io::Error),
}

/// Why one paper was quarantined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperFailure {
    pub paper_id: String,
    pub path: PathBuf,
    pub error: String,
}

/// Outcome of verifying one parsed reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub classification: Classification,
    pub candidates: Vec<CandidateMatch>,
    pub trace: Vec<SourceTrace>,
}

/// Parses and verifies references. Shareable across worker threads.
pub struct Verifier {
    client: SourceClient,
    plan: SearchPlan,
    thresholds: Thresholds,
    grammars: Arc<GrammarTable>,
    markers: Vec<String>,
}

impl Verifier {
    pub fn new(client: SourceClient, plan: SearchPlan, thresholds: Thresholds) -> Self {
        Self {
            client,
            plan,
            thresholds,
            grammars: Arc::new(GrammarTable::builtin().clone()),
            markers: crate::parse::DEFAULT_LLM_MARKERS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn with_grammars(mut self, table: GrammarTable) -> Self {
        self.grammars = Arc::new(table);
        self
    }

    pub fn with_markers(mut self, markers: Vec<String>) -> Self {
        self.markers = markers;
        self
    }

    pub fn client(&self) -> &SourceClient {
        &self.client
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    pub fn parse(&self, entry: &crate::extract::BibEntry) -> ParsedReference {
        parse_reference_with(entry, &self.grammars, &self.markers)
    }

    /// Searches every planned source and classifies the result.
    pub fn verify(&self, reference: &ParsedReference) -> Verification {
        let th = &self.thresholds;
        match search_all(&self.client, reference, &self.plan, th) {
            Ok(out) => {
                let finding = check_identifiers(reference, out.doi_lookup.as_lookup(), out.arxiv_lookup.as_lookup(), th);
                Verification {
                    classification: classify_citation(reference, &out.candidates, finding, th),
                    candidates: out.candidates,
                    trace: out.trace,
                }
            }
            Err(SearchError::AllSourcesFailed(e)) => {
                tracing::warn!(paper = %reference.entry.paper_id, index = reference.entry.index, "unverified: {e}");
                let finding = check_identifiers(reference, Lookup::Failed, Lookup::Failed, th);
                Verification { classification: classify_unverified(reference, finding), candidates: vec![], trace: vec![] }
            }
        }
    }

    /// Bibliography of one document, parsed and verified in order.
    pub fn process_document(&self, paper_id: &str, doc: &DocumentText) -> Result<PaperRun, ExtractError> {
        let slice = isolate_bibliography(doc)?;
        let entries = split_entries(&slice, paper_id)?;
        let mut records = Vec::with_capacity(entries.len());
        let mut traces = Vec::with_capacity(entries.len());
        for entry in entries {
            let parsed = self.parse(&entry);
            let v = self.verify(&parsed);
            traces.push((entry.index, v.trace));
            records.push(CitationRecord {
                entry,
                parsed,
                classification: v.classification,
                candidates: v.candidates,
                verdict: None,
            });
        }
        Ok(PaperRun { paper_id: paper_id.to_owned(), bibliography: slice.text, records, traces })
    }
}

/// Machine results for one paper, before rollup.
#[derive(Debug, Clone)]
pub struct PaperRun {
    pub paper_id: String,
    pub bibliography: String,
    pub records: Vec<CitationRecord>,
    pub traces: Vec<(u32, Vec<SourceTrace>)>,
}

/// Expands directories into their `.pdf` / `.txt` files, sorted by path.
pub fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, PipelineError> {
    let is_paper = |p: &Path| p.extension().and_then(|e| e.to_str()).is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "pdf" | "txt"));
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            for e in std::fs::read_dir(input)? {
                let p = e?.path();
                if p.is_file() && is_paper(&p) {
                    out.push(p);
                }
            }
        } else if input.is_file() {
            out.push(input.clone());
        } else {
            return Err(PipelineError::MissingInput(input.clone()));
        }
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(PipelineError::EmptyInput);
    }
    Ok(out)
}

pub fn paper_id_for(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

pub fn load_document(path: &Path) -> Result<DocumentText, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    let kind = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("pdf") => SourceKind::Pdf,
        _ => SourceKind::PlainText,
    };
    extract_text(Input::Bytes(&bytes), kind).map_err(|e| e.to_string())
}

/// Everything a finished run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub run_id: String,
    pub run_dir: PathBuf,
    pub reports: Vec<PaperReport>,
    pub stats: CorpusStats,
    pub failures: Vec<PaperFailure>,
    /// Requests that reached a network-capable transport.
    pub network_requests: usize,
}

fn build_transport(config: &RunConfig) -> Result<Arc<dyn Transport>, PipelineError> {
    let fixtures = config.fixtures_dir.as_deref().map(ReplayTransport::from_dir).transpose()?;
    if config.offline {
        return Ok(match fixtures {
            Some(f) => Arc::new(f),
            None => Arc::new(OfflineTransport::default()),
        });
    }
    if let Some(f) = fixtures {
        return Ok(Arc::new(f));
    }
    #[cfg(feature = "http")]
    {
        let live = crate::sources::HttpTransport::new(std::time::Duration::from_secs(30))
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(match &config.record_to {
            Some(path) => Arc::new(RecordingTransport::new(live, path.clone())),
            None => Arc::new(live),
        })
    }
    #[cfg(not(feature = "http"))]
    {
        let _ = RecordingTransport::<OfflineTransport>::new;
        Err(PipelineError::NoNetwork)
    }
}

/// Builds the verifier a config describes over an explicit transport.
pub fn build_verifier(config: &RunConfig, transport: Arc<dyn Transport>) -> Result<Verifier, PipelineError> {
    // Offline runs cannot hit anyone, so pacing uses simulated time.
    let clock: Arc<dyn Clock> = if config.offline || !transport.opens_network() {
        Arc::new(SimulatedClock::new(Utc::now()))
    } else {
        Arc::new(SystemClock::default())
    };
    let cache = match &config.cache_dir {
        Some(dir) => Some(Arc::new(Cache::open(dir, clock.clone())?)),
        None => None,
    };
    let client = SourceClient::new(transport, cache, clock, config.effective_sources());
    let mut v = Verifier::new(client, config.plan.clone(), config.thresholds).with_markers(config.llm_markers.clone());
    if let Some(path) = &config.grammar_path {
        v = v.with_grammars(GrammarTable::from_path(path)?);
    }
    Ok(v)
}

pub fn run_pipeline(config: &RunConfig) -> Result<RunOutput, PipelineError> {
    config.validate()?;
    let transport = build_transport(config)?;
    run_pipeline_with(config, transport)
}

fn new_run_id() -> String {
    Utc::now().format("run-%Y%m%dT%H%M%S%.3fZ").to_string()
}

/// Runs extract, parse, search, classify and report over every input paper and
/// persists the run directory. Papers that fail are quarantined, not fatal.
pub fn run_pipeline_with(config: &RunConfig, transport: Arc<dyn Transport>) -> Result<RunOutput, PipelineError> {
    config.validate()?;
    let paths = collect_inputs(&config.inputs)?;
    let verifier = build_verifier(config, transport)?;

    let corpus_id = config.corpus_id.clone().unwrap_or_else(|| {
        config.inputs.first().map(|p| paper_id_for(p)).unwrap_or_else(|| "corpus".to_owned())
    });
    let run_id = config.run_id.clone().unwrap_or_else(new_run_id);
    let run_dir = config.out_dir.join(&run_id);
    if run_dir.exists() {
        return Err(PipelineError::RunExists(run_dir));
    }

    let process = |path: &PathBuf| {
        let paper_id = paper_id_for(path);
        let doc = load_document(path)
            .map_err(|error| PaperFailure { paper_id: paper_id.clone(), path: path.clone(), error })?;
        let run = verifier
            .process_document(&paper_id, &doc)
            .map_err(|e| PaperFailure { paper_id: paper_id.clone(), path: path.clone(), error: e.to_string() })?;
        Ok::<_, PaperFailure>((doc, run))
    };
    let results: Vec<Result<(DocumentText, PaperRun), PaperFailure>> = if config.workers == 1 {
        paths.iter().map(process).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        pool.install(|| paths.par_iter().map(process).collect())
    };

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(x) => runs.push(x),
            Err(f) => {
                tracing::warn!(paper = %f.paper_id, "quarantined: {}", f.error);
                failures.push(f);
            }
        }
    }
    if runs.is_empty() {
        return Err(PipelineError::NothingProcessed(failures.len()));
    }
    runs.sort_by(|a, b| a.1.paper_id.cmp(&b.1.paper_id));

    let reports: Vec<PaperReport> = runs
        .iter()
        .map(|(_, r)| build_paper_report(&r.paper_id, r.records.clone(), &[]).expect("records belong to their paper"))
        .collect();
    let stats = aggregate_corpus(&reports, &corpus_id).expect("at least one report");

    std::fs::create_dir_all(config.out_dir.join(&run_id).join("papers"))?;
    let manifest = RunManifest {
        schema_version: crate::report::SCHEMA_VERSION,
        run_id: run_id.clone(),
        corpus_id: corpus_id.clone(),
        created_at: Utc::now(),
        papers: reports.iter().map(|r| r.paper_id.clone()).collect(),
        failures: failures.clone(),
        config: config.clone(),
    };
    write_json(&run_dir.join(RUN_MANIFEST), &manifest)?;
    for r in &reports {
        write_json(&run_dir.join("papers").join(format!("{}.json", r.paper_id)), r)?;
    }
    std::fs::File::create(run_dir.join(super::store::VERDICT_LOG))?;
    write_rendered(&run_dir.join("reports"), &reports, &stats)?;
    if let Some(salt) = config.anonymize_salt.as_deref().filter(|s| !s.is_empty()) {
        let (anon_reports, mut map) = anonymize(&reports, salt).expect("salt checked");
        let (anon_stats, stats_map) = anonymize(&stats, salt).expect("salt checked");
        map.ids.extend(stats_map.ids);
        write_rendered(&run_dir.join("reports").join("anonymized"), &anon_reports, &anon_stats)?;
        // Operator-only; keep it apart from anything that gets shared.
        write_json(&run_dir.join("private").join("anonymization_map.json"), &map)?;
    }
    if config.debug_artifacts {
        for (doc, run) in &runs {
            let dir = run_dir.join("debug").join(&run.paper_id);
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join("text.txt"), &doc.full_text)?;
            std::fs::write(dir.join("bibliography.txt"), &run.bibliography)?;
            let parsed: Vec<&ParsedReference> = run.records.iter().map(|r| &r.parsed).collect();
            write_json(&dir.join("parsed.json"), &parsed)?;
            write_json(&dir.join("search.json"), &run.traces)?;
        }
    }

    Ok(RunOutput {
        run_id,
        run_dir,
        reports,
        stats,
        failures,
        network_requests: verifier.client().network_requests(),
    })
}

/// Writes papers.json, papers.csv, papers.txt, corpus.json, corpus.csv and corpus.txt.
pub fn write_rendered(dir: &Path, reports: &[PaperReport], stats: &CorpusStats) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (fmt, ext) in [(ReportFormat::Json, "json"), (ReportFormat::Csv, "csv"), (ReportFormat::Text, "txt")] {
        std::fs::write(dir.join(format!("papers.{ext}")), render_report(ReportView::Papers(reports), fmt))?;
        std::fs::write(dir.join(format!("corpus.{ext}")), render_report(ReportView::Corpus(stats), fmt))?;
    }
    Ok(())
}
