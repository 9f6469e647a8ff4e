//! Searches the aggregators for one reference, replaying recorded responses.

use std::path::PathBuf;
use std::sync::Arc;

use citeverify::classify::Thresholds;
use citeverify::extract::{isolate_bibliography, split_entries};
use citeverify::service::{build_verifier, load_document, RunConfig};
use citeverify::sources::{search_all, ReplayTransport, SearchPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e2e = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/e2e");
    let index: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);

    let doc = load_document(&e2e.join("papers/paper-001.txt"))?;
    let entries = split_entries(&isolate_bibliography(&doc)?, "paper-001")?;
    let entry = entries.iter().find(|e| e.index == index).ok_or("no such entry")?;

    let transport = Arc::new(ReplayTransport::from_dir(&e2e.join("fixtures"))?);
    let cfg = RunConfig { offline: true, ..Default::default() };
    let verifier = build_verifier(&cfg, transport)?;
    let reference = verifier.parse(entry);
    println!("title: {:?}", reference.title);

    let out = search_all(verifier.client(), &reference, &SearchPlan::default(), &Thresholds::default())?;
    for t in &out.trace {
        println!("  {:<12} {:?} {:?} records={}", t.source.as_str(), t.mode, t.status, t.records);
    }
    for c in &out.candidates {
        println!(
            "  {:.3} located={} {} {:?}",
            c.title_score, c.location_confirmed, c.record.source, c.record.title
        );
    }
    Ok(())
}
