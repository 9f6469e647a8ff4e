use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use once_cell::sync::Lazy;
use regex::{Captures, Regex};
use serde::Deserialize;
use thiserror::Error;

pub const BUILTIN_GRAMMARS: &str = include_str!("grammars.toml");
pub const FORMAT_COUNT: u8 = 12;

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("reading grammar file: {0}")]
    Io(#[from] std::io::Error),
    #[error("grammar file is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("grammar {id}: {source}")]
    Regex { id: u8, source: regex::Error },
    #[error("grammar {id}: unknown macro {{{{{name}}}}}")]
    UnknownMacro { id: u8, name: String },
    #[error("grammar id {0} is outside 1..=12 or duplicated")]
    BadId(u8),
    #[error("grammar {0} has no `title` capture group")]
    NoTitleGroup(u8),
    #[error("unsupported grammar file version {0}")]
    Version(u32),
}

#[derive(Debug, Deserialize)]
struct GrammarFile {
    version: u32,
    #[serde(default)]
    macros: BTreeMap<String, String>,
    grammar: Vec<GrammarDef>,
}

#[derive(Debug, Deserialize)]
struct GrammarDef {
    id: u8,
    name: String,
    priority: u32,
    pattern: String,
    reject: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Grammar {
    pub id: u8,
    pub name: String,
    pub priority: u32,
    pattern: Regex,
    reject: Option<Regex>,
}

impl Grammar {
    pub fn captures<'t>(&self, text: &'t str) -> Option<Captures<'t>> {
        if self.reject.as_ref().is_some_and(|r| r.is_match(text)) {
            return None;
        }
        self.pattern.captures(text)
    }
}

/// Ordered table of reference-format grammars.
#[derive(Debug, Clone)]
pub struct GrammarTable {
    pub version: u32,
    grammars: Vec<Grammar>,
}

static BUILTIN: Lazy<GrammarTable> =
    Lazy::new(|| GrammarTable::from_toml_str(BUILTIN_GRAMMARS).expect("built-in grammar table is valid"));

impl GrammarTable {
    pub fn builtin() -> &'static GrammarTable {
        &BUILTIN
    }

    pub fn from_path(path: &Path) -> Result<Self, GrammarError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_toml_str(s: &str) -> Result<Self, GrammarError> {
        let file: GrammarFile = toml::from_str(s)?;
        if file.version != 1 {
            return Err(GrammarError::Version(file.version));
        }
        let mut ids = HashSet::new();
        let mut grammars = Vec::with_capacity(file.grammar.len());
        for def in file.grammar {
            if !(1..=FORMAT_COUNT).contains(&def.id) || !ids.insert(def.id) {
                return Err(GrammarError::BadId(def.id));
            }
            let compile = |src: &str| -> Result<Regex, GrammarError> {
                let expanded = expand_macros(src, &file.macros, def.id)?;
                Regex::new(&expanded).map_err(|source| GrammarError::Regex { id: def.id, source })
            };
            let pattern = compile(&def.pattern)?;
            if !pattern.capture_names().flatten().any(|n| n == "title") {
                return Err(GrammarError::NoTitleGroup(def.id));
            }
            let reject = def.reject.as_deref().map(compile).transpose()?;
            grammars.push(Grammar { id: def.id, name: def.name, priority: def.priority, pattern, reject });
        }
        grammars.sort_by_key(|g| (g.priority, g.id));
        Ok(Self { version: file.version, grammars })
    }

    /// Grammars in priority order.
    pub fn grammars(&self) -> &[Grammar] {
        &self.grammars
    }

    pub fn get(&self, id: u8) -> Option<&Grammar> {
        self.grammars.iter().find(|g| g.id == id)
    }
}

fn expand_macros(src: &str, macros: &BTreeMap<String, String>, id: u8) -> Result<String, GrammarError> {
    static MACRO: Lazy<Regex> = Lazy::new(|| Regex::new(r"\{\{([a-z_]+)\}\}").unwrap());
    let mut out = src.to_owned();
    // Macros may reference other macros; bound the expansion depth.
    for _ in 0..4 {
        let mut missing = None;
        let next = MACRO.replace_all(&out, |c: &Captures<'_>| match macros.get(&c[1]) {
            Some(body) => body.clone(),
            None => {
                missing.get_or_insert_with(|| c[1].to_owned());
                String::new()
            }
        });
        if let Some(name) = missing {
            return Err(GrammarError::UnknownMacro { id, name });
        }
        if next == out {
            break;
        }
        out = next.into_owned();
    }
    Ok(out)
}
