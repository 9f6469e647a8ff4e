//! Scores two titles and shows which severity band the score falls in.
//!
//! cargo run --example title_similarity -- "First title" "Second title"

use citeverify::classify::{title_similarity, Thresholds};

fn band(score: f64, th: &Thresholds) -> &'static str {
    if score >= 1.0 {
        "exact"
    } else if score >= th.minor {
        "minor error"
    } else if score >= th.rephrase {
        "rephrased (if found at the cited location)"
    } else {
        "no match"
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let pairs: Vec<(String, String)> = match args.as_slice() {
        [a, b] => vec![(a.clone(), b.clone())],
        _ => [
            ("Kokkos: Enabling Manycore Performance Portability", "Kokkos"),
            ("Scalable Sparse Matrix Solvers for Exascale Systems", "Scalable Sparse Matrix Solvers for Exascale System"),
            ("Scalable Sparse Matrix Solvers for Exascale Systems", "Sparse Solvers That Scale to Exascale Machines"),
            ("Scalable Sparse Matrix Solvers for Exascale Systems", "A History of Punched Cards"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect(),
    };
    let th = Thresholds::default();
    for (a, b) in pairs {
        let s = title_similarity(&a, &b);
        println!("{s:.4}  {:<44} {a:?} / {b:?}", band(s, &th));
    }
}
