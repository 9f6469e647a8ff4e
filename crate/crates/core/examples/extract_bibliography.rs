//! Pulls the numbered bibliography out of a paper (PDF or plain text).
//!
//! cargo run --example extract_bibliography -- path/to/paper.pdf

use std::path::PathBuf;

use citeverify::extract::{isolate_bibliography, split_entries};
use citeverify::service::{load_document, paper_id_for};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/e2e/papers/paper-001.txt")
    });
    let doc = load_document(&path)?;
    println!("{}: {} page(s), {} chars", path.display(), doc.pages.len(), doc.full_text.chars().count());

    let slice = isolate_bibliography(&doc)?;
    println!("heading {:?} at char {}", slice.heading_matched, slice.start_offset);
    for e in split_entries(&slice, &paper_id_for(&path))? {
        println!("[{}] {}", e.index, e.raw_text);
    }
    Ok(())
}
