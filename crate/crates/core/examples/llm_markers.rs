//! Flags reference URLs carrying query parameters that chat assistants append.

use citeverify::extract::BibEntry;
use citeverify::parse::{parse_reference, parse_reference_with, GrammarTable};

fn main() {
    let refs = [
        "K. Abernathy, \"Power Capping on Shared Clusters,\" 2023. [Online]. Available: https://example.org/capping?utm_source=chatgpt.com",
        "K. Abernathy, \"Power Capping on Shared Clusters,\" 2023. [Online]. Available: https://example.org/capping?utm_source=newsletter",
        "Notes on chatgpt.com usage. https://chatgpt.com/",
    ];
    for (i, raw) in refs.iter().enumerate() {
        let e = BibEntry { index: i as u32 + 1, raw_text: raw.to_string(), paper_id: "demo".into() };
        let p = parse_reference(&e);
        match p.llm_markers.as_slice() {
            [] => println!("[{}] clean", e.index),
            ms => ms.iter().for_each(|m| println!("[{}] {} in {}", e.index, m.marker, m.url)),
        }
    }

    // Marker lists are configurable.
    let e = BibEntry { index: 9, raw_text: "See https://x.org/a?ref=assistant-v2".into(), paper_id: "demo".into() };
    let p = parse_reference_with(&e, GrammarTable::builtin(), &["ref=assistant"]);
    println!("custom marker: {:?}", p.llm_markers.first().map(|m| &m.marker));
}
