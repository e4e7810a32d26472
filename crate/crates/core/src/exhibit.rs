//! Exhibit-style output: a JSON data file and a static HTML layout page.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::error::ExhibitError;
use crate::model::Collection;

pub const RESERVED_KEYS: [&str; 4] = ["type", "label", "image", "thumbnail"];
pub const DATA_FILE: &str = "exhibit.json";

/// Facet name and its JSON key, checked for collisions.
pub fn facet_keys(collection: &Collection) -> Result<Vec<(String, String)>, ExhibitError> {
    let mut keys: Vec<(String, String)> = Vec::with_capacity(collection.facets().len());
    for facet in collection.facets() {
        let key = facet.key();
        if RESERVED_KEYS.contains(&key.as_str()) {
            return Err(ExhibitError::ReservedKey {
                facet: facet.name.clone(),
                key,
            });
        }
        if let Some((first, _)) = keys.iter().find(|(_, k)| *k == key) {
            return Err(ExhibitError::KeyCollision {
                first: first.clone(),
                second: facet.name.clone(),
                key,
            });
        }
        keys.push((facet.name.clone(), key));
    }
    Ok(keys)
}

pub fn exhibit_value(collection: &Collection) -> Result<Value, ExhibitError> {
    let keys = facet_keys(collection)?;
    let items: Vec<Value> = collection
        .items()
        .iter()
        .map(|item| {
            let mut obj = Map::new();
            obj.insert("type".into(), json!("Item"));
            obj.insert("label".into(), json!(item.name));
            for (name, key) in &keys {
                let value = item.facet_values.get(name).map_or(Value::Null, |v| {
                    serde_json::to_value(v).expect("facet values serialize")
                });
                obj.insert(key.clone(), value);
            }
            obj.insert("image".into(), json!(item.image_ref));
            obj.insert("thumbnail".into(), json!(item.thumbnail_ref));
            Value::Object(obj)
        })
        .collect();
    Ok(json!({
        "types": {"Item": {"pluralLabel": "Items"}},
        "items": items,
    }))
}

/// Strict JSON, two-space indented, trailing newline.
pub fn emit_exhibit_json(collection: &Collection) -> Result<String, ExhibitError> {
    let value = exhibit_value(collection)?;
    let mut text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    text.push('\n');
    Ok(text)
}

fn escape_html(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Layout page: item grid plus a facet sidebar. The data stays in
/// `exhibit.json`; the page only references it.
pub fn emit_exhibit_html(collection: &Collection) -> String {
    let title = escape_html(collection.title());
    let mut html = String::new();
    let w = &mut html;
    let _ = writeln!(w, "<!DOCTYPE html>");
    let _ = writeln!(w, r#"<html lang="en">"#);
    let _ = writeln!(w, "<head>");
    let _ = writeln!(w, r#"  <meta charset="utf-8">"#);
    let _ = writeln!(w, "  <title>{title}</title>");
    let _ = writeln!(w, r#"  <link rel="exhibit-data" type="application/json" href="{DATA_FILE}">"#);
    let _ = writeln!(w, r#"  <link rel="stylesheet" href="app.css">"#);
    let _ = writeln!(w, "</head>");
    let _ = writeln!(w, r#"<body data-collection="{DATA_FILE}">"#);
    let _ = writeln!(w, "  <header><h1>{title}</h1></header>");
    let _ = writeln!(w, r#"  <main class="explorer">"#);
    let _ = writeln!(w, r#"    <section id="item-grid" class="item-grid"></section>"#);
    let _ = writeln!(w, r#"    <aside id="facets" class="facet-sidebar">"#);
    for facet in collection.facets() {
        let _ = writeln!(
            w,
            r#"      <div class="facet" data-facet="{}" data-facet-name="{}" data-facet-type="{}">"#,
            escape_html(&facet.key()),
            escape_html(&facet.name),
            facet.value_kind.cxml_name()
        );
        let _ = writeln!(w, "        <h2>{}</h2>", escape_html(&facet.name));
        let _ = writeln!(w, r#"        <ul class="facet-values"></ul>"#);
        let _ = writeln!(w, "      </div>");
    }
    let _ = writeln!(w, "    </aside>");
    let _ = writeln!(w, "  </main>");
    let _ = writeln!(w, r#"  <script src="app.js" defer></script>"#);
    let _ = writeln!(w, "</body>");
    let _ = writeln!(w, "</html>");
    html
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_collection, FacetDefinition, FacetSource, QueryText, ValueKind};
    use crate::testdata::{sample_images, sample_records};

    fn facets() -> Vec<FacetDefinition> {
        vec![
            FacetDefinition::new("Worker", ValueKind::String, FacetSource::WorkerId),
            FacetDefinition::new("Query Type", ValueKind::String, FacetSource::QueryType),
            FacetDefinition::new("Answer", ValueKind::String, FacetSource::Label),
            FacetDefinition::new("Work Time", ValueKind::Number, FacetSource::WorkTime),
        ]
    }

    fn sample() -> Collection {
        build_collection("Sample", &sample_records(), &facets(), &sample_images()).unwrap()
    }

    #[test]
    fn exhibit_item_shape() {
        let text = emit_exhibit_json(&sample()).unwrap();
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["types"]["Item"]["pluralLabel"], "Items");
        let items = doc["items"].as_array().unwrap();
        assert_eq!(items.len(), 6);
        let item = &items[4];
        let keys: Vec<&str> = item.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(
            keys,
            ["type", "label", "worker", "querytype", "answer", "worktime", "image", "thumbnail"]
        );
        assert_eq!(item["type"], "Item");
        assert_eq!(item["label"], "selena gomez");
        assert_eq!(item["worker"], "4");
        assert_eq!(item["querytype"], "informational");
        assert_eq!(item["answer"], "B");
        assert_eq!(item["worktime"], 37);
        assert_eq!(item["image"], "images/4.svg");
        assert_eq!(item["thumbnail"], "images/4_tb.svg");
        assert!(!text.contains('\''));
    }

    #[test]
    fn empty_collection() {
        let c = Collection::new("e", vec![], vec![]).unwrap();
        let doc: Value = serde_json::from_str(&emit_exhibit_json(&c).unwrap()).unwrap();
        let expected: Value =
            serde_json::from_str(r#"{"types":{"Item":{"pluralLabel":"Items"}},"items":[]}"#).unwrap();
        assert_eq!(doc, expected);
    }

    #[test]
    fn quotes_are_escaped() {
        let mut records = sample_records();
        records[0].query = QueryText::new(r#"say "hi""#).unwrap();
        let c = build_collection("t", &records, &facets(), &sample_images()).unwrap();
        let text = emit_exhibit_json(&c).unwrap();
        assert!(text.contains(r#""label": "say \"hi\"""#));
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["items"][0]["label"], r#"say "hi""#);
    }

    #[test]
    fn reserved_and_colliding_keys() {
        let records = &sample_records()[..1];
        let reserved = [FacetDefinition::new("Label", ValueKind::String, FacetSource::Label)];
        let c = build_collection("t", records, &reserved, &sample_images()).unwrap();
        assert!(matches!(
            emit_exhibit_json(&c),
            Err(ExhibitError::ReservedKey { .. })
        ));
        let clash = [
            FacetDefinition::new("Query Type", ValueKind::String, FacetSource::QueryType),
            FacetDefinition::new("querytype", ValueKind::String, FacetSource::QueryType),
        ];
        let c = build_collection("t", records, &clash, &sample_images()).unwrap();
        assert!(matches!(
            emit_exhibit_json(&c),
            Err(ExhibitError::KeyCollision { .. })
        ));
    }

    fn facet_divs(html: &str) -> Vec<String> {
        html.lines()
            .filter(|l| l.trim_start().starts_with(r#"<div class="facet""#))
            .map(|l| {
                let start = l.find("data-facet-name=\"").unwrap() + 17;
                let end = start + l[start..].find('"').unwrap();
                l[start..end].to_string()
            })
            .collect()
    }

    #[test]
    fn html_lists_each_facet() {
        let html = emit_exhibit_html(&sample());
        assert_eq!(facet_divs(&html), ["Worker", "Query Type", "Answer", "Work Time"]);
        assert!(html.contains(r#"id="item-grid""#));
        assert!(html.contains(r#"href="exhibit.json""#));
        assert!(!html.contains("selena"), "no inline data");
    }

    #[test]
    fn html_without_facets_and_escaped_title() {
        let c = Collection::new("A&B", vec![], vec![]).unwrap();
        let html = emit_exhibit_html(&c);
        assert!(facet_divs(&html).is_empty());
        assert!(html.contains(r#"id="item-grid""#));
        assert!(html.contains("<title>A&amp;B</title>"));
        assert!(!html.contains("A&B"));
    }
}
