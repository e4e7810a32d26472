//! Rule-based query annotation: token length, query type and entity lookup.
//!
//! A gazetteer directory holds three UTF-8 files, all optional:
//!
//! * `entities.tsv`: `phrase<TAB>category` with category `person`,
//!   `company` (alias `organization`) or `location`
//! * `sites.txt`: one navigational target per line
//! * `transactional.txt`: one trigger token per line
//!
//! Lines starting with `#` and blank lines are ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::Serialize;
use tracing::warn;

use crate::error::GazetteerError;
use crate::model::{AssessmentRecord, EntityKind, QueryText, QueryType};

pub const ENTITIES_FILE: &str = "entities.tsv";
pub const SITES_FILE: &str = "sites.txt";
pub const TRIGGERS_FILE: &str = "transactional.txt";

const DOMAIN_SUFFIXES: [&str; 3] = [".com", ".org", ".net"];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Gazetteer {
    entries: BTreeMap<String, EntityKind>,
    site_names: BTreeSet<String>,
    transactional_triggers: BTreeSet<String>,
}

fn normalize_phrase(phrase: &str) -> String {
    phrase
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.trim_end_matches('\r')))
        .filter(|(_, line)| !line.trim().is_empty() && !line.trim_start().starts_with('#'))
}

impl Gazetteer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entity phrase; the phrase is lowercased and whitespace-normalized.
    /// Blank phrases and `none` categories are ignored.
    pub fn with_entity(mut self, phrase: &str, kind: EntityKind) -> Self {
        let phrase = normalize_phrase(phrase);
        if !phrase.is_empty() && kind != EntityKind::None {
            self.entries.insert(phrase, kind);
        }
        self
    }

    pub fn with_site(mut self, site: &str) -> Self {
        let site = normalize_phrase(site);
        if !site.is_empty() {
            self.site_names.insert(site);
        }
        self
    }

    pub fn with_trigger(mut self, trigger: &str) -> Self {
        let trigger = trigger.trim().to_lowercase();
        if !trigger.is_empty() {
            self.transactional_triggers.insert(trigger);
        }
        self
    }

    pub fn parse_entities(mut self, text: &str) -> Result<Self, GazetteerError> {
        for (line, content) in content_lines(text) {
            let (phrase, category) = content
                .split_once('\t')
                .ok_or(GazetteerError::Malformed { line })?;
            let kind = category
                .parse::<EntityKind>()
                .map_err(|source| GazetteerError::Category { line, source })?;
            if normalize_phrase(phrase).is_empty() {
                return Err(GazetteerError::EmptyPhrase { line });
            }
            self = self.with_entity(phrase, kind);
        }
        Ok(self)
    }

    pub fn parse_sites(mut self, text: &str) -> Self {
        for (_, content) in content_lines(text) {
            self = self.with_site(content);
        }
        self
    }

    pub fn parse_triggers(mut self, text: &str) -> Self {
        for (_, content) in content_lines(text) {
            self = self.with_trigger(content);
        }
        self
    }

    pub fn load_dir(dir: &Path) -> Result<Self, GazetteerError> {
        let read = |name: &str| -> Result<String, GazetteerError> {
            let path = dir.join(name);
            match fs::read_to_string(&path) {
                Ok(text) => Ok(text),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(String::new()),
                Err(source) => Err(GazetteerError::Io { path, source }),
            }
        };
        if !dir.is_dir() {
            return Err(GazetteerError::Io {
                path: dir.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
            });
        }
        Ok(Self::new()
            .parse_entities(&read(ENTITIES_FILE)?)?
            .parse_sites(&read(SITES_FILE)?)
            .parse_triggers(&read(TRIGGERS_FILE)?))
    }
}

/// Number of whitespace-separated tokens.
pub fn query_length(query: &str) -> usize {
    query.split_whitespace().count()
}

/// Transactional trigger, then navigational target, then informational.
pub fn classify_query_type(query: &QueryText, gaz: &Gazetteer) -> QueryType {
    let tokens = query.tokens();
    if tokens
        .iter()
        .any(|t| gaz.transactional_triggers.contains(t))
    {
        return QueryType::Transactional;
    }
    let whole = tokens.join(" ");
    let looks_like_domain = tokens.len() == 1
        && DOMAIN_SUFFIXES
            .iter()
            .any(|suffix| tokens[0].len() > suffix.len() && tokens[0].ends_with(suffix));
    if gaz.site_names.contains(&whole) || looks_like_domain {
        return QueryType::Navigational;
    }
    QueryType::Informational
}

/// Longest matching token span wins; equal lengths go to the leftmost span.
pub fn detect_entity(query: &QueryText, gaz: &Gazetteer) -> EntityKind {
    let tokens = query.tokens();
    for len in (1..=tokens.len()).rev() {
        for window in tokens.windows(len) {
            if let Some(kind) = gaz.entries.get(&window.join(" ")) {
                return *kind;
            }
        }
    }
    EntityKind::None
}

/// A stored annotation that disagreed with the recomputed one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnnotationMismatch {
    pub record_id: u64,
    pub field: &'static str,
    pub stored: String,
    pub computed: String,
}

/// Recomputes every record's annotations. Values already present are
/// overwritten; disagreements are logged and returned.
pub fn annotate_with_report(
    records: &[AssessmentRecord],
    gaz: &Gazetteer,
) -> (Vec<AssessmentRecord>, Vec<AnnotationMismatch>) {
    let mut mismatches = Vec::new();
    let annotated = records
        .iter()
        .map(|record| {
            let mut out = record.clone();
            let length = query_length(record.query.as_str());
            let query_type = classify_query_type(&record.query, gaz);
            let entity = detect_entity(&record.query, gaz);
            let stored = &record.annotations;
            if stored.query_length != length {
                mismatches.push(AnnotationMismatch {
                    record_id: record.record_id,
                    field: "query_length",
                    stored: stored.query_length.to_string(),
                    computed: length.to_string(),
                });
            }
            if let Some(old) = stored.query_type.filter(|t| *t != query_type) {
                mismatches.push(AnnotationMismatch {
                    record_id: record.record_id,
                    field: "query_type",
                    stored: old.as_str().to_string(),
                    computed: query_type.as_str().to_string(),
                });
            }
            if let Some(old) = stored.entity.filter(|e| *e != entity) {
                mismatches.push(AnnotationMismatch {
                    record_id: record.record_id,
                    field: "entity",
                    stored: old.as_str().to_string(),
                    computed: entity.as_str().to_string(),
                });
            }
            out.annotations.query_length = length;
            out.annotations.query_type = Some(query_type);
            out.annotations.entity = Some(entity);
            out
        })
        .collect();
    for m in &mismatches {
        warn!(
            record_id = m.record_id,
            field = m.field,
            stored = %m.stored,
            computed = %m.computed,
            "stored annotation overwritten"
        );
    }
    (annotated, mismatches)
}

pub fn annotate_records(records: &[AssessmentRecord], gaz: &Gazetteer) -> Vec<AssessmentRecord> {
    annotate_with_report(records, gaz).0
}
