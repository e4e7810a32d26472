use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("query is empty")]
    EmptyQuery,
    #[error("ranker id is empty")]
    EmptyRanker,
    #[error("result page must hold 1 to 9 results, got {0}")]
    SerpLength(usize),
    #[error("result ranks must run 1..n, expected {expected} got {found}")]
    SerpRanks { expected: u32, found: u32 },
    #[error("unknown query type {0:?}")]
    UnknownQueryType(String),
    #[error("unknown entity category {0:?}")]
    UnknownEntity(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("unknown value kind {0:?} (expected \"string\" or \"number\")")]
    UnknownValueKind(String),
    #[error("facet name is empty")]
    EmptyFacetName,
    #[error("duplicate facet {0:?}")]
    DuplicateFacet(String),
    #[error("item at position {position} has id {item_id}")]
    ItemOrder { position: usize, item_id: u64 },
    #[error("item {item_id} has {found} facet values, expected {expected}")]
    FacetArity {
        item_id: u64,
        expected: usize,
        found: usize,
    },
    #[error("item {item_id} has no value for facet {facet:?}")]
    MissingFacetValue { item_id: u64, facet: String },
    #[error("item {item_id} has a value of the wrong kind for facet {facet:?}")]
    FacetKind { item_id: u64, facet: String },
    #[error("no image for record {0}")]
    MissingImage(u64),
    #[error("facet {facet:?} cannot read {source_field} from record {record_id}")]
    UnresolvableFacet {
        facet: String,
        source_field: &'static str,
        record_id: u64,
    },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing column binding for role {0:?}")]
    MissingRole(&'static str),
    #[error("roles {first:?} and {second:?} are both bound to column {column:?}")]
    SharedColumn {
        first: &'static str,
        second: &'static str,
        column: String,
    },
    #[error("duplicate facet name {0:?}")]
    DuplicateFacet(String),
    #[error("facet {facet:?}: {source}")]
    FacetKind { facet: String, source: ModelError },
    #[error("facet {facet:?} reads column {column:?}, which is bound to no known field; set \"source\" explicitly")]
    UnboundFacetColumn { facet: String, column: String },
    #[error("facet {facet:?} has unknown source {source_name:?}")]
    UnknownSource { facet: String, source_name: String },
    #[error("facet {facet:?} cannot expose {source_name} as a number")]
    NonNumericSource {
        facet: String,
        source_name: &'static str,
    },
    #[error("ranker vocabulary is empty")]
    NoRankers,
    #[error("invalid ranker id: {0}")]
    Ranker(ModelError),
    #[error("label vocabulary entry {input:?}: {source}")]
    LabelValue { input: String, source: ModelError },
    #[error("label vocabulary lists {0:?} twice")]
    DuplicateLabelInput(String),
    #[error("unsupported delimiter {0:?}")]
    Delimiter(String),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("header is missing column {column:?} bound to {binding}")]
    MissingColumn { column: String, binding: String },
    #[error("results file has no header row")]
    NoHeader,
    #[error("header is not valid UTF-8")]
    HeaderEncoding,
    #[error("empty dataset: no row was accepted")]
    EmptyDataset,
    #[error("cannot write label {0} with this label vocabulary")]
    UnwritableLabel(crate::model::Label),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected \"phrase<TAB>category\"")]
    Malformed { line: usize },
    #[error("line {line}: {source}")]
    Category { line: usize, source: ModelError },
    #[error("line {line}: empty phrase")]
    EmptyPhrase { line: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("unknown facet {0:?}")]
    UnknownFacet(String),
    #[error("value {value:?} is not a valid {kind} for facet {facet:?}")]
    BadValue {
        facet: String,
        value: String,
        kind: &'static str,
    },
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("malformed SVG document: {0}")]
    Malformed(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum CxmlError {
    #[error("XML syntax error: {0}")]
    Xml(String),
    #[error("{path}: unexpected element <{name}>")]
    UnknownElement { path: String, name: String },
    #[error("{path}: missing attribute {attr}")]
    MissingAttribute { path: String, attr: &'static str },
    #[error("{path}: invalid attribute {attr}: {value:?}")]
    InvalidAttribute {
        path: String,
        attr: &'static str,
        value: String,
    },
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("unexpected text at {0}")]
    UnexpectedText(String),
    #[error("item {item_id} has no value for facet {facet:?}")]
    MissingFacetValue { item_id: u64, facet: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum ExhibitError {
    #[error("facet {facet:?} maps to reserved key {key:?}")]
    ReservedKey { facet: String, key: String },
    #[error("facets {first:?} and {second:?} both map to key {key:?}")]
    KeyCollision {
        first: String,
        second: String,
        key: String,
    },
}

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Exhibit(#[from] ExhibitError),
    #[error(transparent)]
    Cxml(#[from] CxmlError),
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}: not a bundle (manifest.json missing)")]
    NotABundle(PathBuf),
    #[error("images {first} and {second} would both be copied as {name}")]
    ImageNameClash {
        first: PathBuf,
        second: PathBuf,
        name: String,
    },
    #[error("image reference {0:?} has no file name")]
    BadImageRef(String),
}

impl BundleError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| BundleError::Io { path, source }
    }
}
