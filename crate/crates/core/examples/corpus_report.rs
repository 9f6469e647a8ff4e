//! Runs the whole pipeline over a directory of papers offline and prints the
//! corpus summary, plain and anonymized.

use std::path::PathBuf;

use citeverify::report::{anonymize, render_report, ReportFormat, ReportView};
use citeverify::service::{run_pipeline, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e2e = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/e2e");
    let out = tempfile::tempdir()?;
    let cfg = RunConfig {
        inputs: vec![e2e.join("papers")],
        offline: true,
        fixtures_dir: Some(e2e.join("fixtures")),
        out_dir: out.path().to_owned(),
        run_id: Some("example".into()),
        corpus_id: Some("workshop-2025".into()),
        ..Default::default()
    };
    let run = run_pipeline(&cfg)?;
    println!("run written to {}\n", run.run_dir.display());
    print!("{}", String::from_utf8(render_report(ReportView::Corpus(&run.stats), ReportFormat::Text))?);
    for r in &run.reports {
        println!("{}: max {}", r.paper_id, r.max_severity);
    }

    let (anon, _map) = anonymize(&run.reports, "example-salt")?;
    println!("\nanonymized:");
    for r in &anon {
        println!("{}: max {}", r.paper_id, r.max_severity);
    }
    Ok(())
}
