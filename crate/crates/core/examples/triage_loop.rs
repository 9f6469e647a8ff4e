//! The reviewer loop without the HTTP layer: list the queue, record a verdict,
//! watch the report change, then rebuild state from the verdict log.

use std::path::PathBuf;

use chrono::Utc;
use citeverify::classify::Severity;
use citeverify::report::{effective_verdicts, ReportFormat, Verdict};
use citeverify::service::{read_verdict_log, run_pipeline, ReportScope, RunConfig, RunStore, TriageFilter, VERDICT_LOG};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e2e = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/e2e");
    let out = tempfile::tempdir()?;
    let cfg = RunConfig {
        inputs: vec![e2e.join("papers")],
        offline: true,
        fixtures_dir: Some(e2e.join("fixtures")),
        out_dir: out.path().to_owned(),
        run_id: Some("triage".into()),
        ..Default::default()
    };
    run_pipeline(&cfg)?;
    let store = RunStore::new(out.path());

    let queue = store.list_triage("triage", &TriageFilter::default())?;
    println!("{} citation(s) awaiting review", queue.len());
    for item in &queue {
        println!("  {} {} {:?}", item.key, item.classification.severity, item.parsed.title);
    }
    let Some(first) = queue.first() else { return Ok(()) };

    let corpus = |s: &RunStore| -> Result<String, Box<dyn std::error::Error>> {
        Ok(String::from_utf8(s.get_report("triage", &ReportScope::Corpus, ReportFormat::Text)?)?)
    };
    println!("\nbefore:\n{}", corpus(&store)?);

    let ack = store.record_verdict(
        "triage",
        Verdict {
            citation_key: first.citation_key.clone(),
            decided_severity: Severity::Ok,
            reviewer: "example".into(),
            note: "found in the proceedings under a different title".into(),
            evidence_url: None,
            decided_at: Utc::now(),
        },
    )?;
    println!("verdict on {}: {} -> {}", ack.citation_key, ack.machine_severity, ack.effective_severity);
    println!("\nafter:\n{}", corpus(&store)?);

    let log = read_verdict_log(&store.run_dir("triage").join(VERDICT_LOG))?;
    let state = effective_verdicts(&log);
    println!("replayed {} log entr(ies) into {} decision(s)", log.len(), state.len());
    Ok(())
}
