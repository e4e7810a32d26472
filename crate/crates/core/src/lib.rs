//! Crowdsourced relevance-assessment pipeline: ingest task results, annotate
//! queries, compute label/worker/ranker analytics, render debranded result
//! pages and compile faceted collections (Pivot CXML and Exhibit bundles).

pub mod analytics;
pub mod api;
pub mod annotate;
pub mod bundle;
pub mod error;
pub mod exhibit;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod pivot;
pub mod render;

#[cfg(test)]
mod testdata;

pub use error::{
    BundleError, ConfigError, CxmlError, ExhibitError, GazetteerError, IngestError, ModelError,
    RenderError, SelectionError,
};
pub use model::{
    build_collection, AssessmentRecord, Collection, CollectionItem, FacetDefinition, FacetSource,
    FacetValue, ImageRefs, Label, QueryText, RankerId, SerpContent, ValueKind,
};
