use serde::{Deserialize, Serialize};

use super::Identifiers;

/// Query parameters that chat assistants append to links they emit.
pub const DEFAULT_LLM_MARKERS: &[&str] = &["utm_source=chatgpt.com", "utm_source=openai"];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LlmUrlMarker {
    pub url: String,
    pub marker: String,
}

pub fn detect_llm_url_markers(identifiers: &Identifiers) -> Vec<LlmUrlMarker> {
    detect_llm_url_markers_with(identifiers, DEFAULT_LLM_MARKERS)
}

/// One marker per URL containing a configured marker, case-insensitively (first configured match wins).
pub fn detect_llm_url_markers_with<S: AsRef<str>>(identifiers: &Identifiers, markers: &[S]) -> Vec<LlmUrlMarker> {
    identifiers
        .urls
        .iter()
        .filter_map(|url| {
            let lower = url.to_ascii_lowercase();
            markers
                .iter()
                .map(AsRef::as_ref)
                .find(|m| !m.is_empty() && lower.contains(&m.to_ascii_lowercase()))
                .map(|m| LlmUrlMarker { url: url.clone(), marker: m.to_owned() })
        })
        .collect()
}
