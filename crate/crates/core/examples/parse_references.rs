//! Parses references in a few common styles and shows the recovered fields.

use citeverify::extract::BibEntry;
use citeverify::parse::parse_reference;

const REFS: &[&str] = &[
    "A. Lindqvist and B. Okonkwo, \"Adaptive Mesh Refinement for Exascale Stencil Codes,\" in Proc. Int. Conf. Parallel Processing, 2021, pp. 10–20. doi:10.5555/amr.2021",
    "Ferreira A, Weber J. Scalable graph partitioning on distributed memory. J Parallel Distrib Comput. 2019;12:1-14.",
    "H. Okafor, L. Brandt, and M. Tanaka, \"Tensor sketching for streaming eigenproblems,\" arXiv preprint arXiv:2104.01777, 2021.",
    "Jane Doe and John Roe. 2020. Fast Things at Scale. In Proceedings of SC. ACM, 1–12. https://doi.org/10.1145/3295500.3356181",
    "Some half-remembered talk about Checkpointing At Exascale Levels. 2018",
];

fn main() {
    for (i, raw) in REFS.iter().enumerate() {
        let p = parse_reference(&BibEntry { index: i as u32 + 1, raw_text: raw.to_string(), paper_id: "demo".into() });
        println!("[{}] format {:?}, confidence {:?}", i + 1, p.format_id, p.parse_confidence);
        println!("    title   {:?}", p.title);
        let authors: Vec<String> = p.authors.iter().map(|a| format!("{} {}", a.given.as_deref().unwrap_or(""), a.family)).collect();
        println!("    authors {:?}{}", authors, if p.et_al { " et al." } else { "" });
        println!("    venue   {:?}  year {:?}  pages {:?}", p.venue, p.year, p.pages);
        println!("    doi {:?}  arxiv {:?}", p.identifiers.doi, p.identifiers.arxiv_id);
    }
}
