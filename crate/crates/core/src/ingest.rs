//! Reading task-result tables.
//!
//! A [`ColumnMapping`] is parsed from a JSON config document and says which
//! result-file column plays which role (query, the A/B rankers, the label,
//! the worker and the work time) and which columns become facets. Results are
//! then parsed row by row; a row that fails validation is reported in the
//! [`IngestReport`] and never aborts the run.
//!
//! ```json
//! {
//!   "roles": {"query": "Query", "doc_a": "doc_A", "doc_b": "doc_B",
//!             "label": "label", "worker_id": "worker_id", "work_time": "work time"},
//!   "facets": [{"column": "query type", "name": "Query Type", "kind": "string"}],
//!   "rankers": ["r1", "r2"],
//!   "labels": {"A": "A", "B": "B", "same": "Same"},
//!   "delimiter": "tab"
//! }
//! ```

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::error::{ConfigError, IngestError, ModelError};
use crate::model::{
    format_number, Annotations, AssessmentRecord, AssignmentMeta, EntityKind, FacetDefinition,
    FacetSource, Label, QueryText, QueryType, RankerId, ValueKind,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoleColumns {
    pub query: String,
    pub doc_a: String,
    pub doc_b: String,
    pub label: String,
    pub worker_id: String,
    pub work_time: String,
    pub approval_rate: Option<String>,
}

impl RoleColumns {
    fn bindings(&self) -> Vec<(FacetSource, &str)> {
        let mut out = vec![
            (FacetSource::Query, self.query.as_str()),
            (FacetSource::DocA, self.doc_a.as_str()),
            (FacetSource::DocB, self.doc_b.as_str()),
            (FacetSource::Label, self.label.as_str()),
            (FacetSource::WorkerId, self.worker_id.as_str()),
            (FacetSource::WorkTime, self.work_time.as_str()),
        ];
        if let Some(col) = &self.approval_rate {
            out.push((FacetSource::ApprovalRate, col.as_str()));
        }
        out
    }
}

/// A facet backed by a result-file column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetBinding {
    pub column: String,
    pub facet: FacetDefinition,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnMapping {
    pub roles: RoleColumns,
    pub facets: Vec<FacetBinding>,
    pub rankers: BTreeSet<RankerId>,
    /// Lowercased input string and the label it maps to, in config order.
    pub labels: Vec<(String, Label)>,
    pub delimiter: u8,
}

impl ColumnMapping {
    pub fn facet_definitions(&self) -> Vec<FacetDefinition> {
        self.facets.iter().map(|b| b.facet.clone()).collect()
    }

    pub fn map_label(&self, raw: &str) -> Option<Label> {
        let needle = raw.trim().to_lowercase();
        self.labels
            .iter()
            .find(|(input, _)| *input == needle)
            .map(|(_, label)| *label)
    }

    /// Columns carrying precomputed query annotations.
    fn annotation_columns(&self) -> Vec<(FacetSource, &str)> {
        let mut out: Vec<(FacetSource, &str)> = Vec::new();
        for binding in &self.facets {
            let Some(source) = binding.facet.source else {
                continue;
            };
            if matches!(
                source,
                FacetSource::QueryLength | FacetSource::QueryType | FacetSource::Entity
            ) && !out.iter().any(|(s, _)| *s == source)
            {
                out.push((source, binding.column.as_str()));
            }
        }
        out
    }
}

pub fn default_labels() -> Vec<(String, Label)> {
    vec![
        ("a".to_string(), Label::A),
        ("b".to_string(), Label::B),
        ("same".to_string(), Label::Same),
    ]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    roles: RawRoles,
    #[serde(default)]
    facets: Vec<RawFacet>,
    #[serde(default)]
    rankers: Vec<String>,
    labels: Option<serde_json::Map<String, serde_json::Value>>,
    delimiter: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoles {
    query: Option<String>,
    doc_a: Option<String>,
    doc_b: Option<String>,
    label: Option<String>,
    worker_id: Option<String>,
    work_time: Option<String>,
    approval_rate: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFacet {
    column: String,
    name: Option<String>,
    kind: Option<String>,
    source: Option<String>,
}

fn infer_annotation_source(column: &str) -> Option<FacetSource> {
    let normalized: String = column
        .chars()
        .filter(char::is_ascii_alphanumeric)
        .flat_map(char::to_lowercase)
        .collect();
    match normalized.as_str() {
        "querylength" => Some(FacetSource::QueryLength),
        "querytype" => Some(FacetSource::QueryType),
        "hasentity" | "entity" => Some(FacetSource::Entity),
        _ => None,
    }
}

fn parse_delimiter(raw: &str) -> Result<u8, ConfigError> {
    match raw {
        "tab" | "\t" => Ok(b'\t'),
        "comma" | "," => Ok(b','),
        other => match other.as_bytes() {
            [b] if b.is_ascii_punctuation() && *b != b'"' => Ok(*b),
            _ => Err(ConfigError::Delimiter(other.to_string())),
        },
    }
}

/// Parses the JSON mapping document. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ColumnMapping, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text)?;

    let need = |value: Option<String>, role: &'static str| {
        value
            .filter(|v| !v.trim().is_empty())
            .ok_or(ConfigError::MissingRole(role))
    };
    let roles = RoleColumns {
        query: need(raw.roles.query, "query")?,
        doc_a: need(raw.roles.doc_a, "doc_a")?,
        doc_b: need(raw.roles.doc_b, "doc_b")?,
        label: need(raw.roles.label, "label")?,
        worker_id: need(raw.roles.worker_id, "worker_id")?,
        work_time: need(raw.roles.work_time, "work_time")?,
        approval_rate: raw.roles.approval_rate.filter(|v| !v.trim().is_empty()),
    };
    let bindings = roles.bindings();
    for (i, (first, column)) in bindings.iter().enumerate() {
        if let Some((second, _)) = bindings[i + 1..].iter().find(|(_, c)| c == column) {
            return Err(ConfigError::SharedColumn {
                first: first.as_str(),
                second: second.as_str(),
                column: column.to_string(),
            });
        }
    }

    let mut facets: Vec<FacetBinding> = Vec::with_capacity(raw.facets.len());
    for raw_facet in raw.facets {
        let name = raw_facet.name.unwrap_or_else(|| raw_facet.column.clone());
        if facets.iter().any(|b| b.facet.name == name) {
            return Err(ConfigError::DuplicateFacet(name));
        }
        let source = match raw_facet.source {
            Some(s) => FacetSource::parse(&s).ok_or_else(|| ConfigError::UnknownSource {
                facet: name.clone(),
                source_name: s,
            })?,
            None => bindings
                .iter()
                .find(|(_, c)| *c == raw_facet.column)
                .map(|(s, _)| *s)
                .or_else(|| infer_annotation_source(&raw_facet.column))
                .ok_or_else(|| ConfigError::UnboundFacetColumn {
                    facet: name.clone(),
                    column: raw_facet.column.clone(),
                })?,
        };
        let kind = match raw_facet.kind {
            Some(k) => k.parse::<ValueKind>().map_err(|source| ConfigError::FacetKind {
                facet: name.clone(),
                source,
            })?,
            None => source.natural_kind(),
        };
        if kind == ValueKind::Number && source.natural_kind() != ValueKind::Number {
            return Err(ConfigError::NonNumericSource {
                facet: name,
                source_name: source.as_str(),
            });
        }
        if name.trim().is_empty() {
            return Err(ConfigError::FacetKind {
                facet: name,
                source: ModelError::EmptyFacetName,
            });
        }
        facets.push(FacetBinding {
            column: raw_facet.column,
            facet: FacetDefinition::new(name, kind, source),
        });
    }

    if raw.rankers.is_empty() {
        return Err(ConfigError::NoRankers);
    }
    let rankers = raw
        .rankers
        .into_iter()
        .map(RankerId::new)
        .collect::<Result<BTreeSet<_>, _>>()
        .map_err(ConfigError::Ranker)?;

    let labels = match raw.labels {
        None => default_labels(),
        Some(map) => {
            let mut labels: Vec<(String, Label)> = Vec::with_capacity(map.len());
            for (input, value) in map {
                let target = value.as_str().unwrap_or_default();
                let label = target
                    .parse::<Label>()
                    .map_err(|source| ConfigError::LabelValue {
                        input: input.clone(),
                        source,
                    })?;
                let key = input.trim().to_lowercase();
                if labels.iter().any(|(k, _)| *k == key) {
                    return Err(ConfigError::DuplicateLabelInput(input));
                }
                labels.push((key, label));
            }
            labels
        }
    };

    let delimiter = match raw.delimiter {
        Some(d) => parse_delimiter(&d)?,
        None => b'\t',
    };

    Ok(ColumnMapping {
        roles,
        facets,
        rankers,
        labels,
        delimiter,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line number in the results file; the header is line 1.
    pub row: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateAssignment {
    pub worker_id: String,
    pub query: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
    pub duplicate_assignments: Vec<DuplicateAssignment>,
}

impl IngestReport {
    pub fn total_rows(&self) -> usize {
        self.accepted + self.rejected.len()
    }
}

struct ColumnIndex {
    query: usize,
    doc_a: usize,
    doc_b: usize,
    label: usize,
    worker_id: usize,
    work_time: usize,
    approval_rate: Option<usize>,
    query_length: Option<usize>,
    query_type: Option<usize>,
    entity: Option<usize>,
}

impl ColumnIndex {
    fn resolve(header: &[String], mapping: &ColumnMapping) -> Result<Self, IngestError> {
        let find = |column: &str, binding: &str| {
            header
                .iter()
                .position(|h| h == column)
                .ok_or_else(|| IngestError::MissingColumn {
                    column: column.to_string(),
                    binding: binding.to_string(),
                })
        };
        let roles = &mapping.roles;
        let mut index = ColumnIndex {
            query: find(&roles.query, "role query")?,
            doc_a: find(&roles.doc_a, "role doc_a")?,
            doc_b: find(&roles.doc_b, "role doc_b")?,
            label: find(&roles.label, "role label")?,
            worker_id: find(&roles.worker_id, "role worker_id")?,
            work_time: find(&roles.work_time, "role work_time")?,
            approval_rate: roles
                .approval_rate
                .as_deref()
                .map(|c| find(c, "role approval_rate"))
                .transpose()?,
            query_length: None,
            query_type: None,
            entity: None,
        };
        for (source, column) in mapping.annotation_columns() {
            let at = Some(find(column, &format!("facet source {}", source.as_str()))?);
            match source {
                FacetSource::QueryLength => index.query_length = at,
                FacetSource::QueryType => index.query_type = at,
                FacetSource::Entity => index.entity = at,
                _ => unreachable!(),
            }
        }
        // Facets reading role fields need no extra column; any other bound
        // column must still be present so the mapping matches the file.
        for binding in &mapping.facets {
            find(&binding.column, &format!("facet {:?}", binding.facet.name))?;
        }
        Ok(index)
    }
}

fn field<'a>(row: &'a [String], at: usize, column: &str) -> Result<&'a str, String> {
    row.get(at)
        .map(String::as_str)
        .ok_or_else(|| format!("missing field {column:?}"))
}

fn parse_row(
    row: &[String],
    index: &ColumnIndex,
    mapping: &ColumnMapping,
    record_id: u64,
) -> Result<AssessmentRecord, String> {
    let roles = &mapping.roles;
    let query = QueryText::new(field(row, index.query, &roles.query)?).map_err(|_| "empty query")?;

    let ranker = |at, column: &str| -> Result<RankerId, String> {
        let raw = field(row, at, column)?;
        let id = RankerId::new(raw).map_err(|_| format!("empty ranker in {column:?}"))?;
        if !mapping.rankers.contains(&id) {
            return Err(format!("unknown ranker {:?}", id.as_str()));
        }
        Ok(id)
    };
    let doc_a = ranker(index.doc_a, &roles.doc_a)?;
    let doc_b = ranker(index.doc_b, &roles.doc_b)?;
    if doc_a == doc_b {
        return Err("identical rankers".to_string());
    }

    let label = mapping
        .map_label(field(row, index.label, &roles.label)?)
        .ok_or("unknown label")?;

    let worker_id = field(row, index.worker_id, &roles.worker_id)?.trim();
    if worker_id.is_empty() {
        return Err("empty worker id".to_string());
    }

    let work_time_s = field(row, index.work_time, &roles.work_time)?
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|t| t.is_finite())
        .ok_or("invalid work time")?;
    if work_time_s < 0.0 {
        return Err("negative work time".to_string());
    }

    let approval_rate = match (index.approval_rate, &roles.approval_rate) {
        (Some(at), Some(column)) => {
            let raw = field(row, at, column)?.trim();
            if raw.is_empty() {
                None
            } else {
                let rate = raw.parse::<f64>().map_err(|_| "invalid approval rate")?;
                if !(0.0..=1.0).contains(&rate) {
                    return Err("approval rate out of range".to_string());
                }
                Some(rate)
            }
        }
        _ => None,
    };

    let mut annotations = Annotations::unannotated(&query);
    if let Some(at) = index.query_length {
        let raw = field(row, at, "query length")?.trim();
        if !raw.is_empty() {
            let stated = raw.parse::<usize>().map_err(|_| "invalid query length")?;
            if stated != annotations.query_length {
                warn!(
                    record_id,
                    stated,
                    counted = annotations.query_length,
                    "query length column disagrees with token count"
                );
            }
        }
    }
    if let Some(at) = index.query_type {
        let raw = field(row, at, "query type")?.trim();
        if !raw.is_empty() {
            annotations.query_type =
                Some(raw.parse::<QueryType>().map_err(|_| "invalid query type")?);
        }
    }
    if let Some(at) = index.entity {
        let raw = field(row, at, "entity")?.trim();
        if !raw.is_empty() {
            annotations.entity = Some(raw.parse::<EntityKind>().map_err(|_| "invalid entity")?);
        }
    }

    Ok(AssessmentRecord {
        record_id,
        query,
        doc_a,
        doc_b,
        annotations,
        label,
        assignment: AssignmentMeta {
            worker_id: worker_id.to_string(),
            work_time_s,
            approval_rate,
        },
    })
}

/// Parses a results table held in memory as text.
pub fn parse_results(
    text: &str,
    mapping: &ColumnMapping,
) -> Result<(Vec<AssessmentRecord>, IngestReport), IngestError> {
    parse_results_bytes(text.as_bytes(), mapping)
}

/// Parses raw bytes; rows containing invalid UTF-8 are rejected.
pub fn parse_results_bytes(
    bytes: &[u8],
    mapping: &ColumnMapping,
) -> Result<(Vec<AssessmentRecord>, IngestReport), IngestError> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);

    let mut rows = reader.byte_records();
    let header = match rows.next() {
        None => return Err(IngestError::NoHeader),
        Some(header) => header?,
    };
    let header: Vec<String> = header
        .iter()
        .map(|h| {
            std::str::from_utf8(h)
                .map(|s| s.trim().to_string())
                .map_err(|_| IngestError::HeaderEncoding)
        })
        .collect::<Result<_, _>>()?;
    let index = ColumnIndex::resolve(&header, mapping)?;

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    let mut fallback_line = 1u64;

    for row in rows {
        fallback_line += 1;
        let row = match row {
            Ok(row) => row,
            Err(err) => {
                let line = err.position().map_or(fallback_line, |p| p.line());
                report.rejected.push(Rejection {
                    row: line,
                    reason: format!("unreadable row: {err}"),
                });
                continue;
            }
        };
        let line = row.position().map_or(fallback_line, |p| p.line());
        fallback_line = line;
        if row.iter().all(|f| f.is_empty()) && row.len() <= 1 {
            continue;
        }
        let fields: Result<Vec<String>, _> = row
            .iter()
            .map(|f| std::str::from_utf8(f).map(str::to_string))
            .collect();
        let result = match fields {
            Err(_) => Err("invalid UTF-8".to_string()),
            Ok(fields) => parse_row(&fields, &index, mapping, records.len() as u64),
        };
        match result {
            Ok(record) => {
                let key = (
                    record.assignment.worker_id.clone(),
                    record.query.as_str().to_string(),
                );
                let count = seen.entry(key.clone()).or_default();
                *count += 1;
                if *count == 2 {
                    warn!(worker = %key.0, query = %key.1, "duplicate assignment");
                    report.duplicate_assignments.push(DuplicateAssignment {
                        worker_id: key.0,
                        query: key.1,
                    });
                }
                records.push(record);
            }
            Err(reason) => report.rejected.push(Rejection { row: line, reason }),
        }
    }

    report.accepted = records.len();
    if records.is_empty() {
        return Err(IngestError::EmptyDataset);
    }
    Ok((records, report))
}

/// Serializes records back into a results table under `mapping`.
pub fn write_results(
    records: &[AssessmentRecord],
    mapping: &ColumnMapping,
) -> Result<String, IngestError> {
    let roles = &mapping.roles;
    let mut columns: Vec<(FacetSource, &str)> = roles.bindings();
    for (source, column) in mapping.annotation_columns() {
        if !columns.iter().any(|(_, c)| *c == column) {
            columns.push((source, column));
        }
    }

    let label_text = |label: Label| {
        mapping
            .labels
            .iter()
            .find(|(_, l)| *l == label)
            .map(|(input, _)| input.clone())
            .ok_or(IngestError::UnwritableLabel(label))
    };

    let mut writer = csv::WriterBuilder::new()
        .delimiter(mapping.delimiter)
        .from_writer(Vec::new());
    writer.write_record(columns.iter().map(|(_, c)| *c))?;
    for record in records {
        let mut row = Vec::with_capacity(columns.len());
        for (source, _) in &columns {
            let cell = match source {
                FacetSource::Query => record.query.as_str().to_string(),
                FacetSource::DocA => record.doc_a.to_string(),
                FacetSource::DocB => record.doc_b.to_string(),
                FacetSource::Label => label_text(record.label)?,
                FacetSource::WorkerId => record.assignment.worker_id.clone(),
                FacetSource::WorkTime => format_number(record.assignment.work_time_s),
                FacetSource::ApprovalRate => record
                    .assignment
                    .approval_rate
                    .map(format_number)
                    .unwrap_or_default(),
                FacetSource::QueryLength => record.annotations.query_length.to_string(),
                FacetSource::QueryType => record
                    .annotations
                    .query_type
                    .map(|t| t.as_str().to_string())
                    .unwrap_or_default(),
                FacetSource::Entity => record
                    .annotations
                    .entity
                    .map(|e| e.as_str().to_string())
                    .unwrap_or_default(),
            };
            row.push(cell);
        }
        writer.write_record(&row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| IngestError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits the UTF-8 it was given"))
}
