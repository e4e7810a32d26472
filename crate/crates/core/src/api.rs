//! JSON documents served over HTTP. The server and in-process callers share
//! these so responses can be compared byte for byte.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::analytics::{apply_selection, facet_counts, AnalyticsReport, FacetSelection};
use crate::error::SelectionError;
use crate::model::{Collection, CollectionItem, FacetValue};

#[derive(Serialize)]
struct ItemView<'a> {
    item_id: u64,
    record_id: u64,
    name: &'a str,
    description: &'a str,
    image: &'a str,
    thumbnail: &'a str,
    facets: Map<String, Value>,
}

#[derive(Serialize)]
struct ValueCount<'a> {
    value: &'a FacetValue,
    count: usize,
}

#[derive(Serialize)]
struct FacetView<'a> {
    name: &'a str,
    key: String,
    #[serde(rename = "type")]
    kind: &'static str,
    counts: Vec<ValueCount<'a>>,
}

fn item_view<'a>(collection: &Collection, item: &'a CollectionItem) -> ItemView<'a> {
    let facets = collection
        .facets()
        .iter()
        .filter_map(|f| {
            item.facet_values.get(&f.name).map(|v| {
                (f.name.clone(), serde_json::to_value(v).expect("facet values serialize"))
            })
        })
        .collect();
    ItemView {
        item_id: item.item_id,
        record_id: item.record_id,
        name: &item.name,
        description: &item.description,
        image: &item.image_ref,
        thumbnail: &item.thumbnail_ref,
        facets,
    }
}

/// The items matching `sel`, as a JSON array in collection order.
pub fn items_document(collection: &Collection, sel: &FacetSelection) -> Result<String, SelectionError> {
    let items: Vec<ItemView> = apply_selection(collection, sel)?
        .into_iter()
        .map(|item| item_view(collection, item))
        .collect();
    Ok(serde_json::to_string(&items).expect("items serialize"))
}

/// Per-facet value counts under `sel`, in facet order.
pub fn facets_document(collection: &Collection, sel: &FacetSelection) -> Result<String, SelectionError> {
    let mut counts = Vec::with_capacity(collection.facets().len());
    for facet in collection.facets() {
        counts.push(facet_counts(collection, sel, &facet.name)?);
    }
    let facets: Vec<FacetView> = collection
        .facets()
        .iter()
        .zip(&counts)
        .map(|(facet, counts)| FacetView {
            name: &facet.name,
            key: facet.key(),
            kind: facet.value_kind.cxml_name(),
            counts: counts
                .iter()
                .map(|(value, &count)| ValueCount { value, count })
                .collect(),
        })
        .collect();
    Ok(serde_json::json!({ "facets": facets }).to_string())
}

pub fn workers_document(report: &AnalyticsReport) -> String {
    serde_json::json!({ "workers": report.workers }).to_string()
}

pub fn rankers_document(report: &AnalyticsReport) -> String {
    serde_json::to_string(&report.rankers).expect("report serializes")
}

pub fn units_document(report: &AnalyticsReport) -> String {
    serde_json::json!({ "units": report.units }).to_string()
}

/// The whole report, pretty-printed, as written by `analyze` and bundled.
pub fn report_document(report: &AnalyticsReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// Body for a rejected request.
pub fn error_document(error: &str, detail: &str) -> String {
    serde_json::json!({ "error": error, "detail": detail }).to_string()
}
