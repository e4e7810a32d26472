//! Domain types shared by every stage of the pipeline.
//!
//! An [`AssessmentRecord`] is one worker assignment: the query, the A/B
//! placement of the two rankers, the query annotations, the worker's label
//! and the assignment metadata. A [`Collection`] is the immutable, faceted
//! snapshot built from a list of records; emitters and the HTTP service only
//! ever read collections.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::ModelError;

/// The query as issued to the rankers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct QueryText(String);

impl QueryText {
    pub fn new(raw: impl Into<String>) -> Result<Self, ModelError> {
        let raw = raw.into();
        if raw.trim().is_empty() {
            return Err(ModelError::EmptyQuery);
        }
        Ok(Self(raw))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Lowercased whitespace tokens.
    pub fn tokens(&self) -> Vec<String> {
        self.0.split_whitespace().map(str::to_lowercase).collect()
    }
}

impl TryFrom<String> for QueryText {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<QueryText> for String {
    fn from(value: QueryText) -> Self {
        value.0
    }
}

impl fmt::Display for QueryText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Identifier of a ranking function under evaluation, e.g. `r1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RankerId(String);

impl RankerId {
    pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
        let id = id.into();
        let trimmed = id.trim();
        if trimmed.is_empty() {
            return Err(ModelError::EmptyRanker);
        }
        Ok(Self(trimmed.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for RankerId {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<RankerId> for String {
    fn from(value: RankerId) -> Self {
        value.0
    }
}

impl fmt::Display for RankerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Maximum number of results on one page.
pub const MAX_SERP_RESULTS: usize = 9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerpResult {
    pub rank: u32,
    pub title: String,
    pub url: String,
    #[serde(default)]
    pub snippet: String,
}

/// A ranked hit list as shown to a worker.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SerpContent {
    query: QueryText,
    results: Vec<SerpResult>,
}

impl SerpContent {
    pub fn new(query: QueryText, results: Vec<SerpResult>) -> Result<Self, ModelError> {
        if results.is_empty() || results.len() > MAX_SERP_RESULTS {
            return Err(ModelError::SerpLength(results.len()));
        }
        for (expected, result) in (1u32..).zip(&results) {
            if result.rank != expected {
                return Err(ModelError::SerpRanks {
                    expected,
                    found: result.rank,
                });
            }
        }
        Ok(Self { query, results })
    }

    pub fn query(&self) -> &QueryText {
        &self.query
    }

    pub fn results(&self) -> &[SerpResult] {
        &self.results
    }
}

impl<'de> Deserialize<'de> for SerpContent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            query: QueryText,
            results: Vec<SerpResult>,
        }
        let raw = Raw::deserialize(deserializer)?;
        SerpContent::new(raw.query, raw.results).map_err(de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryType {
    Navigational,
    Informational,
    Transactional,
}

impl QueryType {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryType::Navigational => "navigational",
            QueryType::Informational => "informational",
            QueryType::Transactional => "transactional",
        }
    }
}

impl FromStr for QueryType {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "navigational" => Ok(QueryType::Navigational),
            "informational" => Ok(QueryType::Informational),
            "transactional" => Ok(QueryType::Transactional),
            _ => Err(ModelError::UnknownQueryType(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Person,
    Company,
    Location,
    None,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Person => "person",
            EntityKind::Company => "company",
            EntityKind::Location => "location",
            EntityKind::None => "none",
        }
    }
}

impl FromStr for EntityKind {
    type Err = ModelError;

    /// "organization" is accepted as an alias of `company`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "person" => Ok(EntityKind::Person),
            "company" | "organization" | "organisation" => Ok(EntityKind::Company),
            "location" => Ok(EntityKind::Location),
            "none" | "" => Ok(EntityKind::None),
            _ => Err(ModelError::UnknownEntity(s.to_string())),
        }
    }
}

/// Query annotations. `query_type` and `entity` stay `None` until the
/// records are annotated, unless the input file carried them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotations {
    pub query_length: usize,
    pub query_type: Option<QueryType>,
    pub entity: Option<EntityKind>,
}

impl Annotations {
    pub fn unannotated(query: &QueryText) -> Self {
        Self {
            query_length: query.as_str().split_whitespace().count(),
            query_type: None,
            entity: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignmentMeta {
    pub worker_id: String,
    pub work_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approval_rate: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    A,
    B,
    Same,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::A, Label::B, Label::Same];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::A => "A",
            Label::B => "B",
            Label::Same => "Same",
        }
    }
}

impl FromStr for Label {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "a" => Ok(Label::A),
            "b" => Ok(Label::B),
            "same" => Ok(Label::Same),
            _ => Err(ModelError::UnknownLabel(s.to_string())),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One worker assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessmentRecord {
    pub record_id: u64,
    pub query: QueryText,
    pub doc_a: RankerId,
    pub doc_b: RankerId,
    pub annotations: Annotations,
    pub label: Label,
    pub assignment: AssignmentMeta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    String,
    Number,
}

impl ValueKind {
    /// The CXML `Type` attribute value.
    pub fn cxml_name(self) -> &'static str {
        match self {
            ValueKind::String => "String",
            ValueKind::Number => "Number",
        }
    }

    pub fn from_cxml_name(name: &str) -> Option<Self> {
        match name {
            "String" => Some(ValueKind::String),
            "Number" => Some(ValueKind::Number),
            _ => None,
        }
    }
}

impl FromStr for ValueKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "string" | "String" => Ok(ValueKind::String),
            "number" | "Number" => Ok(ValueKind::Number),
            other => Err(ModelError::UnknownValueKind(other.to_string())),
        }
    }
}

/// The record field a facet reads its value from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetSource {
    Query,
    DocA,
    DocB,
    Label,
    WorkerId,
    WorkTime,
    ApprovalRate,
    QueryLength,
    QueryType,
    Entity,
}

impl FacetSource {
    pub const ALL: [FacetSource; 10] = [
        FacetSource::Query,
        FacetSource::DocA,
        FacetSource::DocB,
        FacetSource::Label,
        FacetSource::WorkerId,
        FacetSource::WorkTime,
        FacetSource::ApprovalRate,
        FacetSource::QueryLength,
        FacetSource::QueryType,
        FacetSource::Entity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FacetSource::Query => "query",
            FacetSource::DocA => "doc_a",
            FacetSource::DocB => "doc_b",
            FacetSource::Label => "label",
            FacetSource::WorkerId => "worker_id",
            FacetSource::WorkTime => "work_time",
            FacetSource::ApprovalRate => "approval_rate",
            FacetSource::QueryLength => "query_length",
            FacetSource::QueryType => "query_type",
            FacetSource::Entity => "entity",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.as_str() == name)
    }

    /// The natural kind of the field. Numeric fields can still be exposed as
    /// string facets; string fields cannot become numbers.
    pub fn natural_kind(self) -> ValueKind {
        match self {
            FacetSource::WorkTime | FacetSource::ApprovalRate | FacetSource::QueryLength => {
                ValueKind::Number
            }
            _ => ValueKind::String,
        }
    }

    /// Reads the value from a record, or `None` when the record lacks it.
    pub fn read(self, record: &AssessmentRecord, kind: ValueKind) -> Option<FacetValue> {
        let number = match self {
            FacetSource::WorkTime => Some(record.assignment.work_time_s),
            FacetSource::ApprovalRate => Some(record.assignment.approval_rate?),
            FacetSource::QueryLength => Some(record.annotations.query_length as f64),
            _ => None,
        };
        if let Some(n) = number {
            return Some(match kind {
                ValueKind::Number => FacetValue::Number(n),
                ValueKind::String => FacetValue::Text(format_number(n)),
            });
        }
        if kind == ValueKind::Number {
            return None;
        }
        let text = match self {
            FacetSource::Query => record.query.as_str().to_string(),
            FacetSource::DocA => record.doc_a.to_string(),
            FacetSource::DocB => record.doc_b.to_string(),
            FacetSource::Label => record.label.as_str().to_string(),
            FacetSource::WorkerId => record.assignment.worker_id.clone(),
            FacetSource::QueryType => record.annotations.query_type?.as_str().to_string(),
            FacetSource::Entity => record.annotations.entity?.as_str().to_string(),
            FacetSource::WorkTime | FacetSource::ApprovalRate | FacetSource::QueryLength => {
                unreachable!("numeric sources handled above")
            }
        };
        Some(FacetValue::Text(text))
    }
}

/// Shortest decimal representation that parses back to the same `f64`.
pub fn format_number(n: f64) -> String {
    format!("{n}")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetDefinition {
    pub name: String,
    pub value_kind: ValueKind,
    /// `None` for facets read from a document that does not say where the
    /// values came from; such facets cannot be rebuilt from records.
    pub source: Option<FacetSource>,
}

impl FacetDefinition {
    pub fn new(name: impl Into<String>, value_kind: ValueKind, source: FacetSource) -> Self {
        Self {
            name: name.into(),
            value_kind,
            source: Some(source),
        }
    }

    pub fn detached(name: impl Into<String>, value_kind: ValueKind) -> Self {
        Self {
            name: name.into(),
            value_kind,
            source: None,
        }
    }

    /// Lowercase key with whitespace removed: "Query Type" -> "querytype".
    pub fn key(&self) -> String {
        facet_key(&self.name)
    }
}

pub fn facet_key(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect()
}

/// A scalar facet value. Numbers are always finite.
#[derive(Clone, Debug)]
pub enum FacetValue {
    Text(String),
    Number(f64),
}

impl FacetValue {
    pub fn kind(&self) -> ValueKind {
        match self {
            FacetValue::Text(_) => ValueKind::String,
            FacetValue::Number(_) => ValueKind::Number,
        }
    }

    /// Parses a raw string as a value of the given kind.
    pub fn parse(raw: &str, kind: ValueKind) -> Option<Self> {
        match kind {
            ValueKind::String => Some(FacetValue::Text(raw.to_string())),
            ValueKind::Number => raw
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|n| n.is_finite())
                .map(FacetValue::Number),
        }
    }
}

impl fmt::Display for FacetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FacetValue::Text(s) => f.write_str(s),
            FacetValue::Number(n) => f.write_str(&format_number(*n)),
        }
    }
}

impl From<&str> for FacetValue {
    fn from(value: &str) -> Self {
        FacetValue::Text(value.to_string())
    }
}

impl From<f64> for FacetValue {
    fn from(value: f64) -> Self {
        FacetValue::Number(value)
    }
}

// Numbers sort before text; numbers compare by `total_cmp`.
impl Ord for FacetValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (FacetValue::Number(a), FacetValue::Number(b)) => a.total_cmp(b),
            (FacetValue::Text(a), FacetValue::Text(b)) => a.cmp(b),
            (FacetValue::Number(_), FacetValue::Text(_)) => Ordering::Less,
            (FacetValue::Text(_), FacetValue::Number(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for FacetValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for FacetValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FacetValue {}

const MAX_EXACT_INT: f64 = 9_007_199_254_740_992.0;

impl Serialize for FacetValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            FacetValue::Text(s) => serializer.serialize_str(s),
            FacetValue::Number(n) if n.fract() == 0.0 && n.abs() < MAX_EXACT_INT => {
                serializer.serialize_i64(*n as i64)
            }
            FacetValue::Number(n) => serializer.serialize_f64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for FacetValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        Ok(match Raw::deserialize(deserializer)? {
            Raw::Text(s) => FacetValue::Text(s),
            Raw::Number(n) => FacetValue::Number(n),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollectionItem {
    pub item_id: u64,
    pub name: String,
    pub description: String,
    pub image_ref: String,
    pub thumbnail_ref: String,
    pub facet_values: BTreeMap<String, FacetValue>,
    pub record_id: u64,
}

/// An immutable faceted snapshot. Construct with [`Collection::new`] or
/// [`build_collection`]; there are no mutators.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Collection {
    title: String,
    facets: Vec<FacetDefinition>,
    items: Vec<CollectionItem>,
}

impl Collection {
    /// Validates facet uniqueness, contiguous item ids and that every item
    /// carries exactly one value of the right kind per facet.
    pub fn new(
        title: impl Into<String>,
        facets: Vec<FacetDefinition>,
        items: Vec<CollectionItem>,
    ) -> Result<Self, ModelError> {
        let mut seen = std::collections::HashSet::new();
        for facet in &facets {
            if facet.name.trim().is_empty() {
                return Err(ModelError::EmptyFacetName);
            }
            if !seen.insert(facet.name.as_str()) {
                return Err(ModelError::DuplicateFacet(facet.name.clone()));
            }
        }
        for (position, item) in items.iter().enumerate() {
            if item.item_id != position as u64 {
                return Err(ModelError::ItemOrder {
                    position,
                    item_id: item.item_id,
                });
            }
            if item.facet_values.len() != facets.len() {
                return Err(ModelError::FacetArity {
                    item_id: item.item_id,
                    expected: facets.len(),
                    found: item.facet_values.len(),
                });
            }
            for facet in &facets {
                match item.facet_values.get(&facet.name) {
                    None => {
                        return Err(ModelError::MissingFacetValue {
                            item_id: item.item_id,
                            facet: facet.name.clone(),
                        })
                    }
                    Some(value) if value.kind() != facet.value_kind => {
                        return Err(ModelError::FacetKind {
                            item_id: item.item_id,
                            facet: facet.name.clone(),
                        })
                    }
                    Some(FacetValue::Number(n)) if !n.is_finite() => {
                        return Err(ModelError::FacetKind {
                            item_id: item.item_id,
                            facet: facet.name.clone(),
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(Self {
            title: title.into(),
            facets,
            items,
        })
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn facets(&self) -> &[FacetDefinition] {
        &self.facets
    }

    pub fn items(&self) -> &[CollectionItem] {
        &self.items
    }

    pub fn facet(&self, name: &str) -> Option<&FacetDefinition> {
        self.facets.iter().find(|f| f.name == name)
    }

    /// Looks a facet up by display name, falling back to its key.
    pub fn resolve_facet(&self, name_or_key: &str) -> Option<&FacetDefinition> {
        self.facet(name_or_key).or_else(|| {
            let key = facet_key(name_or_key);
            self.facets.iter().find(|f| f.key() == key)
        })
    }

    /// Copy with every image and thumbnail reference rewritten.
    pub fn map_image_refs(&self, mut rewrite: impl FnMut(&str) -> String) -> Self {
        let items = self
            .items
            .iter()
            .map(|item| CollectionItem {
                image_ref: rewrite(&item.image_ref),
                thumbnail_ref: rewrite(&item.thumbnail_ref),
                ..item.clone()
            })
            .collect();
        Self {
            title: self.title.clone(),
            facets: self.facets.clone(),
            items,
        }
    }
}

/// Location of the full image and the thumbnail for one record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRefs {
    pub image_ref: String,
    pub thumbnail_ref: String,
}

pub fn item_description(record: &AssessmentRecord) -> String {
    format!(
        "worker {}, answer {}",
        record.assignment.worker_id, record.label
    )
}

/// One item per record, in input order.
pub fn build_collection(
    title: impl Into<String>,
    records: &[AssessmentRecord],
    facet_defs: &[FacetDefinition],
    image_index: &BTreeMap<u64, ImageRefs>,
) -> Result<Collection, ModelError> {
    let mut items = Vec::with_capacity(records.len());
    for (position, record) in records.iter().enumerate() {
        let images = image_index
            .get(&record.record_id)
            .ok_or(ModelError::MissingImage(record.record_id))?;
        let mut facet_values = BTreeMap::new();
        for facet in facet_defs {
            let value = facet
                .source
                .and_then(|source| source.read(record, facet.value_kind))
                .ok_or_else(|| ModelError::UnresolvableFacet {
                    facet: facet.name.clone(),
                    source_field: facet.source.map_or("(no source)", FacetSource::as_str),
                    record_id: record.record_id,
                })?;
            facet_values.insert(facet.name.clone(), value);
        }
        items.push(CollectionItem {
            item_id: position as u64,
            name: record.query.as_str().to_string(),
            description: item_description(record),
            image_ref: images.image_ref.clone(),
            thumbnail_ref: images.thumbnail_ref.clone(),
            facet_values,
            record_id: record.record_id,
        });
    }
    Collection::new(title, facet_defs.to_vec(), items)
}
