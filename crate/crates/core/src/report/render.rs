use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CorpusStats, PaperReport, ISSUE_SEVERITIES};
use crate::classify::Severity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
    Text,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "text" | "txt" => Ok(Self::Text),
            _ => Err(format!("unknown report format `{s}` (json, csv, text)")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ReportView<'a> {
    Paper(&'a PaperReport),
    Papers(&'a [PaperReport]),
    Corpus(&'a CorpusStats),
}

/// Renders a report. JSON is canonical: fixed field order, sorted maps, shortest
/// round-trip floats, trailing newline.
pub fn render_report(view: ReportView<'_>, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = match view {
                ReportView::Paper(r) => serde_json::to_vec_pretty(r),
                ReportView::Papers(rs) => serde_json::to_vec_pretty(rs),
                ReportView::Corpus(s) => serde_json::to_vec_pretty(s),
            }
            .expect("report types serialize infallibly");
            out.push(b'\n');
            out
        }
        ReportFormat::Csv => match view {
            ReportView::Paper(r) => citations_csv(std::slice::from_ref(r)),
            ReportView::Papers(rs) => citations_csv(rs),
            ReportView::Corpus(s) => corpus_csv(s),
        },
        ReportFormat::Text => match view {
            ReportView::Paper(r) => paper_text(r).into_bytes(),
            ReportView::Papers(rs) => rs.iter().map(paper_text).collect::<Vec<_>>().join("\n").into_bytes(),
            ReportView::Corpus(s) => corpus_text(s).into_bytes(),
        },
    }
}

const CITATION_COLUMNS: [&str; 20] = [
    "paper_id",
    "index",
    "format_id",
    "title",
    "year",
    "venue",
    "doi",
    "arxiv_id",
    "machine_severity",
    "effective_severity",
    "needs_triage",
    "author_diff",
    "doi_status",
    "arxiv_status",
    "llm_markers",
    "matched_source",
    "matched_title",
    "title_score",
    "reviewer",
    "rationale",
];

fn enum_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

fn citations_csv(reports: &[PaperReport]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CITATION_COLUMNS).expect("in-memory csv");
    for r in reports {
        for c in &r.citations {
            let p = &c.parsed;
            let cl = &c.classification;
            let opt = |o: Option<&String>| o.cloned().unwrap_or_default();
            let row = [
                c.entry.paper_id.clone(),
                c.entry.index.to_string(),
                p.format_id.map(|f| f.to_string()).unwrap_or_default(),
                opt(p.title.as_ref()),
                p.year.map(|y| y.to_string()).unwrap_or_default(),
                opt(p.venue.as_ref()),
                opt(p.identifiers.doi.as_ref()),
                opt(p.identifiers.arxiv_id.as_ref()),
                cl.severity.to_string(),
                c.effective_severity().to_string(),
                cl.needs_triage.to_string(),
                enum_name(&cl.author_diff.kind),
                enum_name(&cl.identifier_finding.doi_status),
                enum_name(&cl.identifier_finding.arxiv_status),
                cl.llm_markers.iter().map(|m| m.marker.as_str()).collect::<Vec<_>>().join(" "),
                cl.matched.as_ref().map(|m| m.record.source.to_string()).unwrap_or_default(),
                cl.matched.as_ref().map(|m| m.record.title.clone()).unwrap_or_default(),
                cl.matched.as_ref().map(|m| format!("{:.6}", m.title_score)).unwrap_or_default(),
                c.verdict.as_ref().map(|v| v.reviewer.clone()).unwrap_or_default(),
                cl.rationale.clone(),
            ];
            w.write_record(&row).expect("in-memory csv");
        }
    }
    w.into_inner().expect("in-memory csv")
}

fn corpus_csv(s: &CorpusStats) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut row = |k: &str, v: String| w.write_record([k, v.as_str()]).expect("in-memory csv");
    row("metric", "value".into());
    row("corpus_id", s.corpus_id.clone());
    row("paper_count", s.paper_count.to_string());
    row("citation_count", s.citation_count.to_string());
    row("papers_with_issue", s.papers_with_issue.to_string());
    row("fraction_with_issue", s.fraction_with_issue.to_string());
    row("fraction_with_any_issue", s.fraction_with_any_issue.to_string());
    for (sev, n) in &s.papers_with_issue_by_severity {
        row(&format!("papers_max_{sev}"), n.to_string());
    }
    for (sev, n) in &s.total_erroneous_citations_by_severity {
        row(&format!("citations_{sev}"), n.to_string());
    }
    for (k, n) in &s.author_error_totals {
        row(&format!("author_{}", enum_name(k)), n.to_string());
    }
    row("identifier_errors", s.identifier_error_total.to_string());
    row("llm_markers", s.llm_marker_total.to_string());
    w.into_inner().expect("in-memory csv")
}

fn paper_text(r: &PaperReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "paper {}: {} citations, max severity {}", r.paper_id, r.citations.len(), r.max_severity);
    let counts: Vec<String> = r.counts.iter().map(|(s, n)| format!("{s}={n}")).collect();
    let _ = writeln!(out, "  counts: {}", counts.join(" "));
    let _ = writeln!(
        out,
        "  identifier errors: {}  llm markers: {}  pending triage: {}",
        r.identifier_error_count, r.llm_marker_count, r.needs_triage_count
    );
    for c in r.citations.iter().filter(|c| c.effective_severity() > Severity::Ok) {
        let title = c.parsed.title.as_deref().unwrap_or("(no title)");
        let decided = if c.verdict.is_some() { " [reviewed]" } else { "" };
        let _ = writeln!(out, "  [{}] {}{}: {}", c.entry.index, c.effective_severity(), decided, title);
        let _ = writeln!(out, "      {}", c.classification.rationale);
    }
    out
}

fn corpus_text(s: &CorpusStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "corpus {}: {} papers, {} citations", s.corpus_id, s.paper_count, s.citation_count);
    let _ = writeln!(
        out,
        "  papers with rephrased or mysterious citations: {} ({:.1}%)",
        s.papers_with_issue,
        s.fraction_with_issue * 100.0
    );
    let _ = writeln!(out, "  including minor errors: {:.1}%", s.fraction_with_any_issue * 100.0);
    for sev in ISSUE_SEVERITIES {
        let _ = writeln!(
            out,
            "  {sev}: {} papers at max, {} citations",
            s.papers_with_issue_by_severity.get(&sev).unwrap_or(&0),
            s.total_erroneous_citations_by_severity.get(&sev).unwrap_or(&0)
        );
    }
    let authors: Vec<String> = s.author_error_totals.iter().map(|(k, n)| format!("{}={n}", enum_name(k))).collect();
    let _ = writeln!(out, "  author errors: {}", authors.join(" "));
    let _ = writeln!(out, "  identifier errors: {}  llm markers: {}", s.identifier_error_total, s.llm_marker_total);
    out
}
