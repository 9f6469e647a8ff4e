//! One function per acceptance criterion. Each returns whether it held plus a short
//! measurement line; `tests/acceptance.rs` prints them and the focused test files reuse
//! the same checks.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use citeverify::classify::{compare_authors, title_similarity, AuthorDiffKind, Severity, Thresholds};
use citeverify::extract::BibEntry;
use citeverify::parse::parse_reference;
use citeverify::report::{effective_verdicts, CitationKey, ReportFormat, Verdict};
use citeverify::service::{
    read_verdict_log, replay_verdict_log, run_pipeline_with, ReportScope, RunConfig, RunStore, VERDICT_LOG,
};
use citeverify::sources::{
    title_search_url, Clock, HttpResponse, SimulatedClock, SourceClient, SourceId, SourcesConfig, Transport,
    TransportError,
};
use parking_lot::Mutex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::bibforge::{labelled_corpus, planted_corpus, render, round_trip_corpus, write_papers, PlantedCorpus};
use super::oracle;
use super::pairs::{author_case, name_pool_is_separated, similarity_pairs};
use super::sim::SimulatedAggregator;

// Pinned tolerances.
pub const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(5);
pub const SIMILARITY_TOLERANCE: f64 = 1e-9;
pub const SIMILARITY_PAIRS: usize = 500;
pub const PLANTED_BUDGET: Duration = Duration::from_secs(60);
pub const PLANTED_MIN_ACCURACY: f64 = 0.95;
pub const AUTHOR_CASES: usize = 1000;
pub const MARKER_CASES: usize = 50;
pub const RATE_BURST: usize = 500;

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

pub fn offline_config(input: &Path, out: &Path, run_id: &str) -> RunConfig {
    RunConfig {
        inputs: vec![input.to_owned()],
        offline: true,
        out_dir: out.to_owned(),
        run_id: Some(run_id.to_owned()),
        ..Default::default()
    }
}

/// Runs the pipeline over a planted corpus against the simulated aggregator.
pub fn run_planted(corpus: &PlantedCorpus, root: &Path) -> citeverify::service::RunOutput {
    let input = root.join("papers");
    write_papers(corpus, &input);
    let cfg = offline_config(&input, &root.join("runs"), "planted");
    let sim = Arc::new(SimulatedAggregator::new(corpus.registry.clone()));
    run_pipeline_with(&cfg, sim).expect("pipeline runs")
}

pub fn parser_round_trip() -> Outcome {
    let works = round_trip_corpus(20251017, 10);
    let start = Instant::now();
    let mut failures = Vec::new();
    for (i, w) in works.iter().enumerate() {
        let entry = BibEntry { index: i as u32 + 1, raw_text: render(w), paper_id: "round-trip".into() };
        let p = parse_reference(&entry);
        let families: Vec<&str> = p.authors.iter().map(|a| a.family.as_str()).collect();
        let want: Vec<&str> = w.authors.iter().map(|a| a.family.as_str()).collect();
        let initials_ok = p.authors.iter().zip(&w.authors).all(|(got, truth)| {
            got.given.as_deref().and_then(|g| g.chars().next()) == truth.given.chars().next()
        });
        let ok = p.format_id == Some(w.format)
            && p.title.as_deref() == Some(w.title.as_str())
            && p.year == Some(w.year)
            && families == want
            && initials_ok;
        if !ok {
            failures.push(format!("format {} entry {}: {:?}", w.format, i + 1, entry.raw_text));
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && works.len() == 120 && elapsed < ROUND_TRIP_BUDGET;
    let mut detail = format!("{}/{} entries exact in {:.2?} (budget {:?})", works.len() - failures.len(), works.len(), elapsed, ROUND_TRIP_BUDGET);
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first failure {f}"));
    }
    Outcome::new(pass, detail)
}

pub fn similarity_oracle() -> Outcome {
    let pairs = similarity_pairs(7, SIMILARITY_PAIRS);
    let mut worst: f64 = 0.0;
    let mut asym: f64 = 0.0;
    let mut identity_ok = true;
    for (a, b) in &pairs {
        let got = title_similarity(a, b);
        worst = worst.max((got - oracle::title_similarity(a, b)).abs());
        asym = asym.max((got - title_similarity(b, a)).abs());
        identity_ok &= title_similarity(a, a) == 1.0 && title_similarity(b, b) == 1.0;
    }
    let pass = worst <= SIMILARITY_TOLERANCE && asym <= SIMILARITY_TOLERANCE && identity_ok;
    Outcome::new(
        pass,
        format!("{} pairs, max |lib-oracle| {worst:.1e}, max asymmetry {asym:.1e}, identity {identity_ok}", pairs.len()),
    )
}

pub fn planted_corpus_accuracy() -> Outcome {
    let start = Instant::now();
    let corpus = planted_corpus(11, 40, 25, [85, 5, 5, 5]);
    let tmp = tempfile::tempdir().unwrap();
    let out = run_planted(&corpus, tmp.path());
    let elapsed = start.elapsed();

    let mut confusion: BTreeMap<(Severity, Option<Severity>), usize> = BTreeMap::new();
    for (p, c) in corpus.citations() {
        let report = out.reports.iter().find(|r| r.paper_id == p.paper_id);
        let got = report.and_then(|r| r.citation(c.index)).map(|x| x.classification.severity);
        *confusion.entry((c.label, got)).or_default() += 1;
    }
    let total: usize = confusion.values().sum();
    let correct: usize = confusion.iter().filter(|((want, got), _)| Some(*want) == *got).map(|(_, n)| n).sum();
    let mysterious: usize = confusion.iter().filter(|((w, _), _)| *w == Severity::Mysterious).map(|(_, n)| n).sum();
    let caught = confusion.get(&(Severity::Mysterious, Some(Severity::Mysterious))).copied().unwrap_or(0);
    let accuracy = correct as f64 / total as f64;
    let pass = total == 1000
        && mysterious == 50
        && caught == mysterious
        && accuracy >= PLANTED_MIN_ACCURACY
        && out.failures.is_empty()
        && elapsed < PLANTED_BUDGET;
    Outcome::new(
        pass,
        format!(
            "mysterious recall {caught}/{mysterious}, overall {correct}/{total} = {:.3} (min {PLANTED_MIN_ACCURACY}), {:.1?} (budget {:?})",
            accuracy, elapsed, PLANTED_BUDGET
        ),
    )
}

/// 50 papers; `affected` of them carry a rephrased or mysterious citation. Every
/// other paper has minor errors only, which must not count.
pub fn fraction_layout(affected: usize) -> Vec<Vec<Severity>> {
    (0..50)
        .map(|p| {
            if p % (50 / affected.max(1)) == 0 && p / (50 / affected.max(1)) < affected {
                let worst = if (p / (50 / affected)) % 2 == 0 { Severity::Mysterious } else { Severity::RephrasedTitle };
                vec![Severity::Ok, Severity::MinorError, worst, Severity::Ok]
            } else if p % 3 == 0 {
                vec![Severity::Ok, Severity::MinorError, Severity::Ok]
            } else {
                vec![Severity::Ok, Severity::Ok]
            }
        })
        .collect()
}

pub fn fraction_scenarios() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (affected, expected) in [(1usize, 0.02f64), (3, 0.06)] {
        let layout = fraction_layout(affected);
        let corpus = labelled_corpus(100 + affected as u64, &layout);
        let tmp = tempfile::tempdir().unwrap();
        let out = run_planted(&corpus, tmp.path());
        let rollups_ok = corpus.papers.iter().zip(&layout).all(|(p, labels)| {
            let want = labels.iter().copied().max().unwrap();
            out.reports.iter().find(|r| r.paper_id == p.paper_id).is_some_and(|r| r.max_severity == want)
        });
        let got = out.stats.fraction_with_issue;
        let ok = got == expected && out.stats.paper_count == 50 && out.stats.papers_with_issue == affected && rollups_ok;
        pass &= ok;
        parts.push(format!("{affected}/50 -> {got} (want {expected}, max-severity rollups {rollups_ok})"));
    }
    Outcome::new(pass, parts.join("; "))
}

pub fn author_diff_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let th = Thresholds::default();
    let separated = name_pool_is_separated();
    let mut mismatches = 0;
    let mut first = None;
    let (mut clean, mut clean_none) = (0, 0);
    for _ in 0..AUTHOR_CASES {
        let case = author_case(&mut rng);
        let diff = compare_authors(&case.cited, case.et_al, &case.truth, &th);
        let (missing, extra) = oracle::author_set_difference(&case.cited_ids, &case.truth_ids, case.et_al);
        let want_missing: BTreeSet<String> = case
            .truth_ids
            .iter()
            .zip(&case.truth)
            .filter(|(id, _)| missing.contains(id))
            .map(|(_, n)| n.raw.clone())
            .collect();
        let want_extra: BTreeSet<String> = case
            .cited_ids
            .iter()
            .zip(&case.cited)
            .filter(|(id, _)| extra.contains(id))
            .map(|(_, n)| n.raw.clone())
            .collect();
        let got_missing: BTreeSet<String> = diff.missing.iter().map(|n| n.raw.clone()).collect();
        let got_extra: BTreeSet<String> = diff.extra.iter().map(|n| n.raw.clone()).collect();
        let want_kind = match (want_missing.is_empty(), want_extra.is_empty()) {
            (true, true) => AuthorDiffKind::None,
            (false, true) => AuthorDiffKind::Missing,
            (true, false) => AuthorDiffKind::Extra,
            (false, false) => AuthorDiffKind::Both,
        };
        if got_missing != want_missing || got_extra != want_extra || diff.kind != want_kind {
            mismatches += 1;
            first.get_or_insert_with(|| format!("{case:?} -> {diff:?}"));
        }
        if case.clean {
            clean += 1;
            clean_none += usize::from(diff.kind == AuthorDiffKind::None);
        }
    }
    let pass = separated && mismatches == 0 && clean > 0 && clean == clean_none;
    let mut detail = format!(
        "{}/{AUTHOR_CASES} agree with set difference; {clean_none}/{clean} clean pairs kind=none; name pool separated {separated}",
        AUTHOR_CASES - mismatches
    );
    if let Some(f) = first {
        detail.push_str(&format!("; first mismatch {f}"));
    }
    Outcome::new(pass, detail)
}

/// 50 entries with the marker in some URL and 50 without (including lookalikes).
pub fn marker_entries() -> (Vec<String>, Vec<String>) {
    let works = round_trip_corpus(5, 9);
    let mut planted = Vec::new();
    let mut clean = Vec::new();
    for (i, w) in works.iter().enumerate().take(2 * MARKER_CASES) {
        let base = render(w);
        if i % 2 == 0 {
            let url = match (i / 2) % 5 {
                0 => format!("https://example.org/paper-{i}?utm_source=chatgpt.com"),
                1 => format!("https://example.org/paper-{i}?ref=x&utm_source=chatgpt.com"),
                2 => format!("https://example.org/paper-{i}?utm_source=chatgpt.com&utm_medium=referral"),
                3 => format!("https://example.org/p/{i}.pdf?UTM_SOURCE=ChatGPT.com"),
                _ => format!("http://www.example.org/{i}/?q=1&utm_source=chatgpt.com#sec"),
            };
            planted.push(format!("{base} Available: {url}"));
        } else {
            let extra = match (i / 2) % 4 {
                0 => format!(" Available: https://example.org/paper-{i}?utm_source=newsletter"),
                1 => " Available: https://chatgpt.com/".to_owned(),
                2 => " Generated with help from chatgpt.com, utm_source noted.".to_owned(),
                _ => String::new(),
            };
            clean.push(format!("{base}{extra}"));
        }
    }
    (planted, clean)
}

pub fn llm_markers() -> Outcome {
    let (planted, clean) = marker_entries();
    let flagged = |text: &String, i: usize| {
        let entry = BibEntry { index: i as u32 + 1, raw_text: text.clone(), paper_id: "markers".into() };
        !parse_reference(&entry).llm_markers.is_empty()
    };
    let hits = planted.iter().enumerate().filter(|(i, t)| flagged(t, *i)).count();
    let false_pos = clean.iter().enumerate().filter(|(i, t)| flagged(t, *i)).count();
    let pass = planted.len() == MARKER_CASES && hits == MARKER_CASES && false_pos == 0 && !clean.is_empty();
    Outcome::new(pass, format!("{hits}/{} planted flagged, {false_pos}/{} marker-free flagged", planted.len(), clean.len()))
}

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

fn json_files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    for sub in ["papers", "reports"] {
        let d = dir.join(sub);
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.extension().is_some_and(|x| x == "json") {
                out.insert(p.strip_prefix(dir).unwrap().to_owned(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn cli_run(papers: &Path, fixtures: &Path, cache: &Path, out: &Path, run_id: &str) -> Result<(), String> {
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_citeverify"))
        .arg("run")
        .arg("--input")
        .arg(papers)
        .arg("--offline")
        .arg("--cache-dir")
        .arg(cache)
        .arg("--fixtures")
        .arg(fixtures)
        .arg("--out")
        .arg(out)
        .args(["--run-id", run_id])
        .env_remove("CITEVERIFY_CONTACT")
        .env_remove("CITEVERIFY_CACHE_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&o.stderr).into_owned())
    }
}

pub fn offline_determinism() -> Outcome {
    let e2e = data_dir().join("e2e");
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache");
    let out = tmp.path().join("runs");
    for id in ["warm", "first", "second"] {
        if let Err(e) = cli_run(&e2e.join("papers"), &e2e.join("fixtures"), &cache, &out, id) {
            return Outcome::new(false, format!("run {id} failed: {e}"));
        }
    }
    let a = json_files(&out.join("first"));
    let b = json_files(&out.join("second"));
    let differing: Vec<String> =
        a.iter().filter(|(k, v)| b.get(*k) != Some(*v)).map(|(k, _)| k.display().to_string()).collect();
    let pass = !a.is_empty() && a.len() == b.len() && differing.is_empty();
    Outcome::new(pass, format!("{} JSON reports compared, {} differ {:?}", a.len(), differing.len(), differing))
}

/// Answers every request, throttling some, and logs per-host send times.
pub struct ClockedTransport {
    clock: Arc<SimulatedClock>,
    pub log: Mutex<Vec<(String, Duration)>>,
}

impl ClockedTransport {
    pub fn new(clock: Arc<SimulatedClock>) -> Self {
        Self { clock, log: Mutex::default() }
    }
}

impl Transport for ClockedTransport {
    fn get(&self, url: &str, _user_agent: &str) -> Result<HttpResponse, TransportError> {
        let host = url::Url::parse(url).ok().and_then(|u| u.host_str().map(str::to_owned)).unwrap_or_default();
        let mut log = self.log.lock();
        log.push((host, self.clock.elapsed()));
        let status = if log.len() % 7 == 0 { 429 } else { 404 };
        Ok(HttpResponse { status, body: String::new(), fetched_at: Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap() })
    }
}

/// Largest number of times falling in any half-open window of `width`.
pub fn max_in_window(times: &[Duration], width: Duration) -> usize {
    times.iter().map(|&t| times.iter().filter(|&&u| u >= t && u < t + width).count()).max().unwrap_or(0)
}

pub fn rate_limit_compliance() -> Outcome {
    let clock = Arc::new(SimulatedClock::default());
    let transport = Arc::new(ClockedTransport::new(clock.clone()));
    let client = SourceClient::new(transport.clone(), None, clock.clone(), SourcesConfig::default());
    for i in 0..RATE_BURST {
        let source = SourceId::ALL[i % SourceId::ALL.len()];
        let _ = client.search_title(source, &format!("burst query {i}"));
    }
    let mut worst = 0;
    let mut per_host: BTreeMap<String, Vec<Duration>> = BTreeMap::new();
    for (host, t) in transport.log.lock().iter() {
        per_host.entry(host.clone()).or_default().push(*t);
    }
    for times in per_host.values() {
        worst = worst.max(max_in_window(times, Duration::from_secs(1)));
    }
    for s in SourceId::ALL {
        worst = worst.max(max_in_window(&client.limiter(s).request_log(), Duration::from_secs(1)));
    }
    let sent = transport.log.lock().len();
    let hosts: BTreeSet<String> =
        SourceId::ALL.iter().filter_map(|s| url::Url::parse(&title_search_url(*s, "x", 5)).ok()?.host_str().map(str::to_owned)).collect();
    let pass = worst <= 1 && sent >= RATE_BURST && per_host.len() == hosts.len();
    Outcome::new(
        pass,
        format!("{RATE_BURST} queries, {sent} requests over {} sources, max {worst} request(s) in any 1 s window", per_host.len()),
    )
}

pub fn verdict_override() -> Outcome {
    let layout = vec![vec![Severity::Ok, Severity::Mysterious, Severity::MinorError], vec![Severity::Ok, Severity::RephrasedTitle]];
    let corpus = labelled_corpus(404, &layout);
    let tmp = tempfile::tempdir().unwrap();
    let out = run_planted(&corpus, tmp.path());
    let store = RunStore::new(tmp.path().join("runs"));
    let run = out.run_id.as_str();
    let key = CitationKey::new("paper-000", 2);
    let before = store.reports(run).unwrap();
    let machine = before[0].citation(2).map(|c| c.classification.severity);

    let at = |s: u32| Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, s).unwrap();
    let verdict = |sev: Severity, s: u32| Verdict {
        citation_key: key.clone(),
        decided_severity: sev,
        reviewer: "reviewer-1".into(),
        note: String::new(),
        evidence_url: None,
        decided_at: at(s),
    };
    store.record_verdict(run, verdict(Severity::RephrasedTitle, 1)).unwrap();
    store.record_verdict(run, verdict(Severity::Ok, 2)).unwrap();
    store.record_verdict(run, verdict(Severity::Ok, 2)).unwrap();
    let after = store.reports(run).unwrap();
    let effective = after[0].citation(2).map(|c| c.effective_severity());
    let corpus_before = String::from_utf8(store.get_report(run, &ReportScope::Corpus, ReportFormat::Json).unwrap()).unwrap();

    // A fresh store sees the same state from the log alone.
    let log_path = store.run_dir(run).join(VERDICT_LOG);
    let replayed = replay_verdict_log(&log_path).unwrap();
    let from_log = effective_verdicts(&read_verdict_log(&log_path).unwrap());
    let fresh = RunStore::new(tmp.path().join("runs"));
    let rebuilt = fresh.reports(run).unwrap();
    let corpus_after = String::from_utf8(fresh.get_report(run, &ReportScope::Corpus, ReportFormat::Json).unwrap()).unwrap();
    let changed = machine == Some(Severity::Mysterious)
        && effective == Some(Severity::Ok)
        && before[0].max_severity == Severity::Mysterious
        && after[0].max_severity == Severity::MinorError;
    let replay_ok = replayed == from_log
        && replayed.get(&key).map(|v| v.decided_severity) == Some(Severity::Ok)
        && rebuilt == after
        && corpus_before == corpus_after;
    Outcome::new(
        changed && replay_ok,
        format!(
            "machine {:?} -> effective {:?}; paper max {:?} -> {:?}; log replay identical {replay_ok}",
            machine, effective, before[0].max_severity, after[0].max_severity
        ),
    )
}
