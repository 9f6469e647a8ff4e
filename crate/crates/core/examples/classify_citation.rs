//! Verifies every citation of one paper and prints severity and rationale.

use std::path::PathBuf;
use std::sync::Arc;

use citeverify::service::{build_verifier, load_document, RunConfig};
use citeverify::sources::ReplayTransport;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e2e = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/e2e");
    let paper = std::env::args().nth(1).unwrap_or_else(|| "paper-000".into());

    let transport = Arc::new(ReplayTransport::from_dir(&e2e.join("fixtures"))?);
    let verifier = build_verifier(&RunConfig { offline: true, ..Default::default() }, transport)?;
    let doc = load_document(&e2e.join("papers").join(format!("{paper}.txt")))?;
    let run = verifier.process_document(&paper, &doc)?;
    for r in &run.records {
        let c = &r.classification;
        println!("[{}] {:<16} triage={:<5} {}", r.entry.index, c.severity.as_str(), c.needs_triage, c.rationale);
        if let Some(m) = &c.matched {
            println!("      best: {:.3} from {} {:?}", m.title_score, m.record.source, m.record.title);
        }
    }
    Ok(())
}
