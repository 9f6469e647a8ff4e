//! Per-aggregator request URLs and response mapping.

use chrono::{DateTime, Utc};
use serde_json::Value;
use url::form_urlencoded::byte_serialize;

use crate::parse::{normalize_doi, PersonName};
use crate::text::collapse_whitespace;

use super::{ArxivVersion, MetadataRecord, SourceId};

fn enc(s: &str) -> String {
    byte_serialize(s.as_bytes()).collect()
}

/// Title reduced to words, which every search API accepts.
fn search_terms(title: &str) -> String {
    crate::text::tokens(title).join(" ")
}

pub fn doi_lookup_url(source: SourceId, doi: &str) -> Option<String> {
    match source {
        SourceId::Crossref => Some(format!("https://api.crossref.org/works/{}", enc(doi))),
        SourceId::Openalex => Some(format!("https://api.openalex.org/works/doi:{}", enc(doi))),
        SourceId::Osti => Some(format!("https://www.osti.gov/api/v1/records?doi={}", enc(doi))),
        _ => None,
    }
}

pub fn arxiv_lookup_url(id: &str, version: Option<u32>) -> String {
    match version {
        Some(v) => format!("https://export.arxiv.org/api/query?id_list={}v{v}", enc(id)),
        None => format!("https://export.arxiv.org/api/query?id_list={}", enc(id)),
    }
}

pub fn title_search_url(source: SourceId, title: &str, rows: usize) -> String {
    let q = enc(&search_terms(title));
    match source {
        SourceId::Crossref => format!("https://api.crossref.org/works?query.bibliographic={q}&rows={rows}"),
        SourceId::Openalex => format!("https://api.openalex.org/works?search={q}&per-page={rows}"),
        SourceId::Dblp => format!("https://dblp.org/search/publ/api?q={q}&format=json&h={rows}"),
        SourceId::Arxiv => {
            format!("https://export.arxiv.org/api/query?search_query=ti:%22{q}%22&max_results={rows}")
        }
        SourceId::GoogleBooks => format!("https://www.googleapis.com/books/v1/volumes?q=intitle:{q}&maxResults={rows}"),
        SourceId::Osti => format!("https://www.osti.gov/api/v1/records?title={q}&rows={rows}"),
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{aggregator} payload: {detail}")]
pub struct PayloadError {
    pub aggregator: SourceId,
    pub detail: String,
}

pub fn parse_payload(source: SourceId, body: &str, fetched_at: DateTime<Utc>) -> Result<Vec<MetadataRecord>, PayloadError> {
    let err = |detail: String| PayloadError { aggregator: source, detail };
    if source == SourceId::Arxiv {
        return parse_arxiv(body, fetched_at).map_err(err);
    }
    let v: Value = serde_json::from_str(body).map_err(|e| err(e.to_string()))?;
    let records = match source {
        SourceId::Crossref => parse_crossref(&v, fetched_at),
        SourceId::Openalex => parse_openalex(&v, fetched_at),
        SourceId::Dblp => parse_dblp(&v, fetched_at),
        SourceId::GoogleBooks => parse_google_books(&v, fetched_at),
        SourceId::Osti => parse_osti(&v, fetched_at),
        SourceId::Arxiv => unreachable!(),
    };
    Ok(records.into_iter().filter(|r| !r.title.trim().is_empty()).collect())
}

fn s(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(collapse_whitespace(s)).filter(|s| !s.is_empty()),
        Value::Number(n) => Some(n.to_string()),
        Value::Array(a) => a.first().and_then(s),
        _ => None,
    }
}

fn year_from(v: &Value) -> Option<i32> {
    let y = match v {
        Value::Number(n) => n.as_i64()? as i32,
        Value::String(t) => t.get(..4)?.parse().ok()?,
        _ => return None,
    };
    (1800..=2100).contains(&y).then_some(y)
}

fn base_record(source: SourceId, native: String, title: String, fetched_at: DateTime<Utc>) -> MetadataRecord {
    MetadataRecord {
        title,
        authors: Vec::new(),
        venue: None,
        year: None,
        pages: None,
        doi: None,
        arxiv_id: None,
        arxiv_versions: None,
        source,
        source_native_id: native,
        retrieved_at: fetched_at,
    }
}

fn crossref_work(w: &Value, fetched_at: DateTime<Utc>) -> Option<MetadataRecord> {
    let mut title = s(&w["title"])?;
    if let Some(sub) = s(&w["subtitle"]) {
        title = format!("{title}: {sub}");
    }
    let doi = s(&w["DOI"]).map(|d| normalize_doi(&d));
    let mut r = base_record(SourceId::Crossref, doi.clone().unwrap_or_default(), title, fetched_at);
    r.doi = doi;
    r.authors = w["author"]
        .as_array()
        .map(|a| {
            a.iter()
                .filter_map(|p| match (s(&p["given"]), s(&p["family"]), s(&p["name"])) {
                    (g, Some(f), _) => Some(PersonName::new(g.as_deref(), &f)),
                    (_, None, Some(n)) => PersonName::parse(&n),
                    _ => None,
                })
                .collect()
        })
        .unwrap_or_default();
    r.venue = s(&w["container-title"]).or_else(|| s(&w["publisher"]));
    r.year = ["issued", "published", "published-print", "published-online"]
        .iter()
        .find_map(|k| year_from(&w[*k]["date-parts"][0][0]));
    r.pages = s(&w["page"]);
    Some(r)
}

fn parse_crossref(v: &Value, fetched_at: DateTime<Utc>) -> Vec<MetadataRecord> {
    let msg = &v["message"];
    match msg["items"].as_array() {
        Some(items) => items.iter().filter_map(|w| crossref_work(w, fetched_at)).collect(),
        None => crossref_work(msg, fetched_at).into_iter().collect(),
    }
}

fn openalex_work(w: &Value, fetched_at: DateTime<Utc>) -> Option<MetadataRecord> {
    let title = s(&w["display_name"]).or_else(|| s(&w["title"]))?;
    let mut r = base_record(SourceId::Openalex, s(&w["id"]).unwrap_or_default(), title, fetched_at);
    r.doi = s(&w["doi"]).map(|d| normalize_doi(&d));
    r.authors = w["authorships"]
        .as_array()
        .map(|a| a.iter().filter_map(|x| s(&x["author"]["display_name"]).and_then(|n| PersonName::parse(&n))).collect())
        .unwrap_or_default();
    r.venue = s(&w["primary_location"]["source"]["display_name"]);
    r.year = year_from(&w["publication_year"]);
    r.pages = match (s(&w["biblio"]["first_page"]), s(&w["biblio"]["last_page"])) {
        (Some(f), Some(l)) => Some(format!("{f}-{l}")),
        (Some(f), None) => Some(f),
        _ => None,
    };
    r.arxiv_id = s(&w["ids"]["arxiv"]).map(|a| a.trim_start_matches("https://arxiv.org/abs/").to_owned());
    Some(r)
}

fn parse_openalex(v: &Value, fetched_at: DateTime<Utc>) -> Vec<MetadataRecord> {
    match v["results"].as_array() {
        Some(items) => items.iter().filter_map(|w| openalex_work(w, fetched_at)).collect(),
        None => openalex_work(v, fetched_at).into_iter().collect(),
    }
}

/// dblp disambiguates homonyms with a numeric suffix: "Wei Zhang 0001".
fn dblp_name(n: &str) -> Option<PersonName> {
    let trimmed = match n.rsplit_once(' ') {
        Some((head, tail)) if tail.len() == 4 && tail.chars().all(|c| c.is_ascii_digit()) => head,
        _ => n,
    };
    PersonName::parse(trimmed)
}

fn parse_dblp(v: &Value, fetched_at: DateTime<Utc>) -> Vec<MetadataRecord> {
    let Some(hits) = v["result"]["hits"]["hit"].as_array() else { return Vec::new() };
    hits.iter()
        .filter_map(|h| {
            let info = &h["info"];
            let title = s(&info["title"])?.trim_end_matches('.').to_owned();
            let mut r = base_record(SourceId::Dblp, s(&info["key"]).unwrap_or_default(), title, fetched_at);
            let authors = &info["authors"]["author"];
            let list: Vec<&Value> = match authors {
                Value::Array(a) => a.iter().collect(),
                Value::Object(_) => vec![authors],
                _ => Vec::new(),
            };
            r.authors = list.into_iter().filter_map(|a| s(&a["text"]).or_else(|| s(a))).filter_map(|n| dblp_name(&n)).collect();
            r.venue = s(&info["venue"]);
            r.year = year_from(&info["year"]);
            r.doi = s(&info["doi"]).map(|d| normalize_doi(&d));
            r.pages = s(&info["pages"]);
            if let Some(ee) = s(&info["ee"]) {
                if let Some(id) = ee.strip_prefix("https://arxiv.org/abs/") {
                    r.arxiv_id = Some(id.to_owned());
                }
            }
            Some(r)
        })
        .collect()
}

fn parse_google_books(v: &Value, fetched_at: DateTime<Utc>) -> Vec<MetadataRecord> {
    let Some(items) = v["items"].as_array() else { return Vec::new() };
    items
        .iter()
        .filter_map(|it| {
            let info = &it["volumeInfo"];
            let mut title = s(&info["title"])?;
            if let Some(sub) = s(&info["subtitle"]) {
                title = format!("{title}: {sub}");
            }
            let mut r = base_record(SourceId::GoogleBooks, s(&it["id"]).unwrap_or_default(), title, fetched_at);
            r.authors = info["authors"]
                .as_array()
                .map(|a| a.iter().filter_map(s).filter_map(|n| PersonName::parse(&n)).collect())
                .unwrap_or_default();
            r.venue = s(&info["publisher"]);
            r.year = year_from(&info["publishedDate"]);
            Some(r)
        })
        .collect()
}

/// OSTI lists authors as "Family, Given [Affiliation] (ORCID:...)".
fn osti_name(raw: &str) -> Option<PersonName> {
    let cut = raw.find(['[', '(']).map_or(raw, |i| &raw[..i]).trim();
    match cut.split_once(',') {
        Some((family, given)) if !family.trim().is_empty() => {
            let given = given.trim();
            Some(PersonName {
                given: (!given.is_empty()).then(|| given.to_owned()),
                family: family.trim().to_owned(),
                raw: raw.to_owned(),
            })
        }
        _ => PersonName::parse(cut),
    }
}

fn parse_osti(v: &Value, fetched_at: DateTime<Utc>) -> Vec<MetadataRecord> {
    let Some(items) = v.as_array() else { return Vec::new() };
    items
        .iter()
        .filter_map(|it| {
            let title = s(&it["title"])?;
            let mut r = base_record(SourceId::Osti, s(&it["osti_id"]).unwrap_or_default(), title, fetched_at);
            r.authors = it["authors"]
                .as_array()
                .map(|a| a.iter().filter_map(s).filter_map(|n| osti_name(&n)).collect())
                .unwrap_or_default();
            r.venue = s(&it["journal_name"]).or_else(|| s(&it["research_orgs"]));
            r.year = year_from(&it["publication_date"]);
            r.doi = s(&it["doi"]).map(|d| normalize_doi(&d));
            Some(r)
        })
        .collect()
}

/// Splits "2104.01777v2" into the bare ID and version.
pub fn split_arxiv_version(id: &str) -> (String, Option<u32>) {
    if let Some(pos) = id.rfind('v') {
        if let Ok(v) = id[pos + 1..].parse::<u32>() {
            if pos > 0 && id.as_bytes()[pos - 1].is_ascii_digit() {
                return (id[..pos].to_owned(), Some(v));
            }
        }
    }
    (id.to_owned(), None)
}

fn parse_arxiv(body: &str, fetched_at: DateTime<Utc>) -> Result<Vec<MetadataRecord>, String> {
    let doc = roxmltree::Document::parse(body).map_err(|e| e.to_string())?;
    let text_of = |node: roxmltree::Node<'_, '_>, name: &str| {
        node.children()
            .find(|c| c.tag_name().name() == name)
            .and_then(|c| c.text())
            .map(collapse_whitespace)
    };
    let mut out = Vec::new();
    for entry in doc.root_element().children().filter(|n| n.tag_name().name() == "entry") {
        let Some(id_url) = text_of(entry, "id") else { continue };
        if id_url.contains("/api/errors") {
            continue;
        }
        let Some(title) = text_of(entry, "title").filter(|t| !t.is_empty() && t != "Error") else { continue };
        let versioned = id_url.rsplit("/abs/").next().unwrap_or(&id_url).to_owned();
        let (bare, version) = split_arxiv_version(&versioned);
        let authors: Vec<PersonName> = entry
            .children()
            .filter(|c| c.tag_name().name() == "author")
            .filter_map(|a| text_of(a, "name"))
            .filter_map(|n| PersonName::parse(&n))
            .collect();
        let mut r = base_record(SourceId::Arxiv, versioned.clone(), title.clone(), fetched_at);
        r.authors = authors.clone();
        r.arxiv_id = Some(bare);
        r.year = text_of(entry, "published").and_then(|p| p.get(..4)?.parse().ok());
        r.doi = text_of(entry, "doi").map(|d| normalize_doi(&d));
        r.venue = text_of(entry, "journal_ref").or_else(|| Some("arXiv".to_owned()));
        r.arxiv_versions = Some(vec![ArxivVersion { version: version.unwrap_or(1), title, authors }]);
        out.push(r);
    }
    Ok(out)
}
