//! One PASS/FAIL line per acceptance criterion; exits non-zero on any
//! failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rave_core::analytics::{
    apply_selection, facet_counts, normalize_preference, preference_report, unit_summaries,
    worker_summaries, FacetSelection, Majority, Winner,
};
use rave_core::annotate::{annotate_records, Gazetteer};
use rave_core::api;
use rave_core::bundle::relocate_images;
use rave_core::exhibit::emit_exhibit_json;
use rave_core::ingest::{parse_config, parse_results};
use rave_core::model::{Annotations, AssignmentMeta, EntityKind, QueryType, SerpResult};
use rave_core::pipeline::{bundle_from_serps, read_serps};
use rave_core::pivot::{emit_cxml, parse_cxml};
use rave_core::render::{render_dataset, render_serp};
use rave_core::{
    AssessmentRecord, Collection, CollectionItem, FacetDefinition, FacetValue, Label, QueryText,
    RankerId, SerpContent, ValueKind,
};
use tower::ServiceExt;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn read(name: &str) -> String {
    fs::read_to_string(fixture(name)).unwrap()
}

fn sample_records() -> Vec<AssessmentRecord> {
    let mapping = parse_config(&read("sample_config.json")).unwrap();
    let (records, _) = parse_results(&read("sample.tsv"), &mapping).unwrap();
    annotate_records(&records, &Gazetteer::load_dir(&fixture("gazetteer")).unwrap())
}

fn sample_end_to_end() -> Outcome {
    let start = Instant::now();
    let mapping = parse_config(&read("sample_config.json")).map_err(|e| e.to_string())?;
    let (records, report) = parse_results(&read("sample.tsv"), &mapping).map_err(|e| e.to_string())?;
    let gaz = Gazetteer::load_dir(&fixture("gazetteer")).map_err(|e| e.to_string())?;
    let records = annotate_records(&records, &gaz);
    let work = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let serps = read_serps(&fixture("sample_serps.json")).map_err(|e| e.to_string())?;
    let (collection, manifest) = bundle_from_serps(
        "Sample",
        &records,
        &mapping.facet_definitions(),
        &serps,
        work.path(),
        out.path(),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    ensure!(records.len() == 6 && report.rejected.is_empty(), "expected 6 clean rows");
    let r = &records[3];
    ensure!(
        r.query.as_str() == "selena gomez"
            && r.doc_a.as_str() == "r2"
            && r.doc_b.as_str() == "r1"
            && r.label == Label::Same
            && r.assignment.worker_id == "1"
            && r.assignment.work_time_s == 21.0,
        "record 4 is {r:?}"
    );
    let lengths: BTreeSet<usize> = records.iter().map(|r| r.annotations.query_length).collect();
    let types: BTreeSet<Option<QueryType>> =
        records.iter().map(|r| r.annotations.query_type).collect();
    let entities: BTreeSet<Option<EntityKind>> =
        records.iter().map(|r| r.annotations.entity).collect();
    ensure!(lengths == BTreeSet::from([1, 2]), "lengths {lengths:?}");
    ensure!(
        types == BTreeSet::from([Some(QueryType::Navigational), Some(QueryType::Informational)]),
        "types {types:?}"
    );
    ensure!(
        entities == BTreeSet::from([Some(EntityKind::Company), Some(EntityKind::Person)]),
        "entities {entities:?}"
    );
    ensure!(collection.items().len() == 6 && manifest.items == 6, "collection size");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("6 records, record 4 matches, {elapsed:.0?}"))
}

fn preference_oracle() -> Outcome {
    let oracle: serde_json::Value =
        serde_json::from_str(&read("sample_preference_handcount.json")).unwrap();
    let records = sample_records();
    for (i, (r, row)) in records.iter().zip(oracle["rows"].as_array().unwrap()).enumerate() {
        let got = match normalize_preference(r) {
            Winner::Ranker(id) => id.as_str().to_string(),
            Winner::Same => "same".into(),
        };
        ensure!(got == row["winner"], "row {i}: {got} vs {}", row["winner"]);
    }
    let report = preference_report(&records);
    let wins: BTreeMap<String, u64> = report
        .wins
        .iter()
        .map(|(k, &v)| (k.as_str().to_string(), v as u64))
        .collect();
    let expected: BTreeMap<String, u64> = oracle["wins"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.clone(), v.as_u64().unwrap()))
        .collect();
    ensure!(wins == expected, "wins {wins:?} vs {expected:?}");
    ensure!(report.same_count as u64 == oracle["same_count"], "same {}", report.same_count);
    ensure!(
        report.column_a_label_count as u64 == oracle["column_a_label_count"]
            && report.column_b_label_count as u64 == oracle["column_b_label_count"],
        "column counts {} / {}",
        report.column_a_label_count,
        report.column_b_label_count
    );
    Ok("wins r1:3 r2:2, same 1, A 3, B 2".into())
}

fn aggregation() -> Outcome {
    let units = unit_summaries(&sample_records());
    ensure!(units.len() == 2, "{} units", units.len());
    let (yt, sg) = (&units[0], &units[1]);
    ensure!(yt.query == "youtube" && sg.query == "selena gomez", "unit order");
    ensure!(yt.majority == Majority::Label(Label::A), "youtube majority {}", yt.majority);
    ensure!(yt.disagreement.abs() <= 1e-12, "youtube disagreement {}", yt.disagreement);
    ensure!(sg.majority == Majority::Label(Label::B), "selena majority {}", sg.majority);
    ensure!(
        (sg.disagreement - 1.0 / 3.0).abs() <= 1e-12,
        "selena disagreement {}",
        sg.disagreement
    );
    Ok(format!("youtube A/0, selena gomez B/{:.12}", sg.disagreement))
}

fn arb_text() -> impl Strategy<Value = String> {
    "[ -~\t\né&<>\"']{0,10}"
}

fn arb_collection(max_items: usize, max_facets: usize) -> impl Strategy<Value = Collection> {
    let facets = proptest::collection::vec((arb_text(), any::<bool>()), 0..=max_facets).prop_map(
        |raw| {
            raw.into_iter()
                .enumerate()
                .map(|(i, (name, numeric))| {
                    let kind = if numeric { ValueKind::Number } else { ValueKind::String };
                    FacetDefinition::detached(format!("{name}#{i}"), kind)
                })
                .collect::<Vec<_>>()
        },
    );
    facets
        .prop_flat_map(move |facets| {
            let values = proptest::collection::vec((arb_text(), -1e9f64..1e9), facets.len());
            let item = (arb_text(), arb_text(), 0u64..10_000, values);
            (
                Just(facets),
                arb_text(),
                proptest::collection::vec(item, 0..=max_items),
            )
        })
        .prop_map(|(facets, title, raw)| {
            let items = raw
                .into_iter()
                .enumerate()
                .map(|(i, (name, description, record_id, values))| CollectionItem {
                    item_id: i as u64,
                    name,
                    description,
                    image_ref: format!("images/{i}.svg"),
                    thumbnail_ref: format!("images/{i}_tb.svg"),
                    record_id,
                    facet_values: facets
                        .iter()
                        .zip(values)
                        .map(|(f, (s, n))| {
                            let v = match f.value_kind {
                                ValueKind::String => FacetValue::Text(s),
                                ValueKind::Number => FacetValue::Number(n),
                            };
                            (f.name.clone(), v)
                        })
                        .collect(),
                })
                .collect();
            Collection::new(title, facets, items).unwrap()
        })
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn sample_collection() -> Collection {
    let mapping = parse_config(&read("sample_config.json")).unwrap();
    let records = sample_records();
    let images = records
        .iter()
        .map(|r| {
            (
                r.record_id,
                rave_core::ImageRefs {
                    image_ref: format!("images/{}.svg", r.record_id),
                    thumbnail_ref: format!("images/{}_tb.svg", r.record_id),
                },
            )
        })
        .collect();
    rave_core::build_collection("Sample", &records, &mapping.facet_definitions(), &images).unwrap()
}

fn cxml() -> Outcome {
    let start = Instant::now();
    let text = emit_cxml(&sample_collection()).map_err(|e| e.to_string())?;
    let doc = roxmltree::Document::parse(&text).map_err(|e| format!("not well-formed: {e}"))?;
    let names: BTreeSet<&str> = doc
        .descendants()
        .filter(|n| n.is_element())
        .map(|n| n.tag_name().name())
        .collect();
    let expected = BTreeSet::from([
        "Collection",
        "FacetCategories",
        "FacetCategory",
        "Items",
        "Item",
        "Description",
        "Facets",
        "Facet",
        "String",
        "Number",
    ]);
    ensure!(names == expected, "element vocabulary {names:?}");

    let cases = AtomicUsize::new(0);
    let codec = std::sync::Mutex::new(Duration::ZERO);
    runner(200)
        .run(&arb_collection(50, 8), |c| {
            cases.fetch_add(1, Ordering::Relaxed);
            let t = Instant::now();
            let text = emit_cxml(&c).unwrap();
            let back = parse_cxml(&text).unwrap();
            *codec.lock().unwrap() += t.elapsed();
            prop_assert!(roxmltree::Document::parse(&text).is_ok());
            prop_assert_eq!(back, c);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let total = start.elapsed();
    let codec = codec.into_inner().unwrap();
    let cases = cases.into_inner();
    ensure!(cases >= 200, "only {cases} round trips");
    ensure!(codec < Duration::from_secs(5), "emit+parse took {codec:?}");
    Ok(format!(
        "vocabulary exact, {cases} round trips, emit+parse {codec:.0?} ({total:.1?} with generation)"
    ))
}

fn exhibit() -> Outcome {
    let collection = sample_collection();
    let text = emit_exhibit_json(&collection).map_err(|e| e.to_string())?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("strict parse failed: {e}"))?;
    ensure!(doc["types"]["Item"]["pluralLabel"] == "Items", "pluralLabel");
    let items = doc["items"].as_array().ok_or("items is not an array")?;
    ensure!(items.len() == 6, "{} items", items.len());
    let mut expected: BTreeSet<String> = ["type", "label", "image", "thumbnail"]
        .into_iter()
        .map(String::from)
        .collect();
    expected.extend(collection.facets().iter().map(|f| f.key()));
    for (i, item) in items.iter().enumerate() {
        let keys: BTreeSet<String> = item.as_object().unwrap().keys().cloned().collect();
        ensure!(keys == expected, "item {i} keys {keys:?}");
    }
    Ok(format!("6 items, {} keys each", expected.len()))
}

fn small_collection() -> impl Strategy<Value = Collection> {
    let facets = proptest::collection::vec(any::<bool>(), 1..=4);
    facets
        .prop_flat_map(|kinds| {
            let item = proptest::collection::vec(0u8..3, kinds.len());
            (Just(kinds), proptest::collection::vec(item, 0..=30))
        })
        .prop_map(|(kinds, raw)| {
            let facets: Vec<FacetDefinition> = kinds
                .iter()
                .enumerate()
                .map(|(i, &numeric)| {
                    let kind = if numeric { ValueKind::Number } else { ValueKind::String };
                    FacetDefinition::detached(format!("f{i}"), kind)
                })
                .collect();
            let items = raw
                .into_iter()
                .enumerate()
                .map(|(i, values)| CollectionItem {
                    item_id: i as u64,
                    name: format!("item {i}"),
                    description: String::new(),
                    image_ref: format!("{i}.svg"),
                    thumbnail_ref: format!("{i}_tb.svg"),
                    record_id: i as u64,
                    facet_values: facets
                        .iter()
                        .zip(values)
                        .map(|(f, v)| {
                            let value = match f.value_kind {
                                ValueKind::Number => FacetValue::Number(v as f64),
                                ValueKind::String => FacetValue::Text(["a", "b", "c"][v as usize].into()),
                            };
                            (f.name.clone(), value)
                        })
                        .collect(),
                })
                .collect();
            Collection::new("t", facets, items).unwrap()
        })
}

fn value_for(facet: &FacetDefinition, v: u8) -> FacetValue {
    match facet.value_kind {
        ValueKind::Number => FacetValue::Number(v as f64),
        ValueKind::String => FacetValue::Text(["a", "b", "c"][v as usize].into()),
    }
}

fn arb_case() -> impl Strategy<Value = (Collection, Vec<(usize, u8)>, (usize, u8))> {
    small_collection().prop_flat_map(|c| {
        let n = c.facets().len();
        let picks = proptest::collection::vec((0..n, 0u8..3), 0..5);
        (Just(c), picks, (0..n, 0u8..3))
    })
}

fn selection(c: &Collection, picks: &[(usize, u8)]) -> FacetSelection {
    picks.iter().fold(FacetSelection::new(), |sel, &(f, v)| {
        let facet = &c.facets()[f];
        sel.with(&facet.name, value_for(facet, v))
    })
}

/// Reference filter: walk every item and test every picked constraint.
fn linear_scan(c: &Collection, picks: &[(usize, u8)]) -> Vec<u64> {
    let mut by_facet: BTreeMap<usize, Vec<FacetValue>> = BTreeMap::new();
    for &(f, v) in picks {
        by_facet.entry(f).or_default().push(value_for(&c.facets()[f], v));
    }
    let mut out = Vec::new();
    for item in c.items() {
        let mut keep = true;
        for (&f, accepted) in &by_facet {
            let value = &item.facet_values[&c.facets()[f].name];
            if !accepted.iter().any(|a| a == value) {
                keep = false;
            }
        }
        if keep {
            out.push(item.item_id);
        }
    }
    out
}

fn facet_engine() -> Outcome {
    let cases = AtomicUsize::new(0);
    runner(1000)
        .run(&arb_case(), |(c, picks, extra)| {
            cases.fetch_add(1, Ordering::Relaxed);
            let sel = selection(&c, &picks);
            let got: Vec<u64> = apply_selection(&c, &sel).unwrap().iter().map(|i| i.item_id).collect();
            prop_assert_eq!(&got, &linear_scan(&c, &picks));

            let mut narrower = picks.clone();
            if !picks.iter().any(|&(f, _)| f == extra.0) {
                narrower.push(extra);
            }
            let narrowed: Vec<u64> = apply_selection(&c, &selection(&c, &narrower))
                .unwrap()
                .iter()
                .map(|i| i.item_id)
                .collect();
            prop_assert!(narrowed.iter().all(|id| got.contains(id)));

            for facet in c.facets() {
                let all: usize = facet_counts(&c, &FacetSelection::new(), &facet.name)
                    .unwrap()
                    .values()
                    .sum();
                prop_assert_eq!(all, c.items().len());
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let cases = cases.into_inner();
    ensure!(cases >= 1000, "only {cases} cases");
    Ok(format!("{cases} generated cases"))
}

const BRANDS: [&str; 8] = ["google", "bing", "yahoo", "baidu", "yandex", "duckduckgo", "ask.com", "logo"];

fn serp(n: usize) -> SerpContent {
    let results = (1..=n)
        .map(|rank| SerpResult {
            rank: rank as u32,
            title: format!("Result number {rank}"),
            url: format!("https://example.org/page/{rank}"),
            snippet: "A plain snippet of text that goes on for a while so that it needs to wrap onto a second line when drawn.".into(),
        })
        .collect();
    SerpContent::new(QueryText::new("sample query").unwrap(), results).unwrap()
}

fn renderer() -> Outcome {
    for n in 1..=9 {
        let svg = render_serp(&serp(n));
        let doc = roxmltree::Document::parse(&svg).map_err(|e| e.to_string())?;
        let height = doc.root_element().attribute("height").unwrap_or("");
        let expected = (60 + 110 * n).to_string();
        ensure!(height == expected, "n={n}: height {height}, expected {expected}");
        let lower = svg.to_lowercase();
        for brand in BRANDS {
            ensure!(!lower.contains(brand), "n={n}: found {brand:?}");
        }
    }
    let serps = read_serps(&fixture("sample_serps.json")).map_err(|e| e.to_string())?;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    render_dataset(&serps, a.path()).map_err(|e| e.to_string())?;
    render_dataset(&serps, b.path()).map_err(|e| e.to_string())?;
    let mut files = 0;
    for entry in fs::read_dir(a.path()).unwrap() {
        let path = entry.unwrap().path();
        let bytes = fs::read(&path).unwrap();
        let name = path.file_name().unwrap();
        ensure!(bytes == fs::read(b.path().join(name)).unwrap(), "{name:?} differs");
        let lower = String::from_utf8(bytes).unwrap().to_lowercase();
        for brand in BRANDS {
            ensure!(!lower.contains(brand), "{name:?}: found {brand:?}");
        }
        files += 1;
    }
    ensure!(files == 12, "{files} files rendered");
    Ok(format!("heights 170..1050, {files} files byte-identical, no brand strings"))
}

/// 100 single-assignment units spread 27/27/26 over three heavy workers,
/// 5/5/4/4 over four medium workers and 1/1 over two singletons.
fn skew_fixture() -> (Vec<AssessmentRecord>, BTreeMap<String, usize>) {
    let plan = [
        ("h1", 27),
        ("h2", 27),
        ("h3", 26),
        ("m1", 5),
        ("m2", 5),
        ("m3", 4),
        ("m4", 4),
        ("s1", 1),
        ("s2", 1),
    ];
    let mut records = Vec::new();
    for (worker, count) in plan {
        for _ in 0..count {
            let id = records.len() as u64;
            let query = QueryText::new(format!("unit {id}")).unwrap();
            records.push(AssessmentRecord {
                record_id: id,
                annotations: Annotations::unannotated(&query),
                query,
                doc_a: RankerId::new("r1").unwrap(),
                doc_b: RankerId::new("r2").unwrap(),
                label: Label::ALL[id as usize % 3],
                assignment: AssignmentMeta {
                    worker_id: worker.into(),
                    work_time_s: 10.0,
                    approval_rate: None,
                },
            });
        }
    }
    let counts = plan.iter().map(|&(w, c)| (w.to_string(), c)).collect();
    (records, counts)
}

fn worker_skew() -> Outcome {
    let (records, counts) = skew_fixture();
    ensure!(records.len() == 100 && counts.len() == 9, "generator shape");
    let units = unit_summaries(&records);
    ensure!(units.len() == 100, "{} units", units.len());
    let workers = worker_summaries(&records, &units);
    ensure!(workers.len() == 9, "{} workers", workers.len());
    for w in &workers {
        ensure!(
            w.assignment_count == counts[&w.worker_id],
            "{}: {} vs {}",
            w.worker_id,
            w.assignment_count,
            counts[&w.worker_id]
        );
    }
    let top: BTreeSet<&str> = workers[..3].iter().map(|w| w.worker_id.as_str()).collect();
    ensure!(top == BTreeSet::from(["h1", "h2", "h3"]), "top three {top:?}");
    let top_share: f64 = workers[..3].iter().map(|w| w.share_of_work).sum();
    ensure!((top_share - 0.8).abs() <= 1e-12, "top share {top_share}");
    let singles: BTreeSet<&str> = workers
        .iter()
        .filter(|w| (w.share_of_work - 0.01).abs() <= 1e-12)
        .map(|w| w.worker_id.as_str())
        .collect();
    ensure!(singles == BTreeSet::from(["s1", "s2"]), "singletons {singles:?}");
    ensure!(
        workers[7..].iter().all(|w| w.assignment_count == 1),
        "singletons not last"
    );
    Ok("h1/h2/h3 hold 80 of 100, s1 and s2 at share 0.01".into())
}

async fn http_get(app: &axum::Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let response = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = response.status();
    (status, response.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn serve() -> Outcome {
    let mapping = parse_config(&read("sample_config.json")).unwrap();
    let records = sample_records();
    let serps = read_serps(&fixture("sample_serps.json")).unwrap();
    let work = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let (collection, _) = bundle_from_serps(
        "Sample",
        &records,
        &mapping.facet_definitions(),
        &serps,
        work.path(),
        out.path(),
    )
    .map_err(|e| e.to_string())?;
    let collection = relocate_images(&collection).map_err(|e| e.to_string())?;
    let config = rave_server::ServerConfig::new(out.path());
    let state = rave_server::load_state(&config).map_err(|e| e.to_string())?;
    let app = rave_server::router(state, &config).map_err(|e| e.to_string())?;

    let cases: Vec<(&str, FacetSelection)> = vec![
        ("", FacetSelection::new()),
        ("query=selena%20gomez", FacetSelection::new().with("Query", "selena gomez")),
        (
            "answer=A&answer=Same",
            FacetSelection::new().with("Answer", "A").with("Answer", "Same"),
        ),
        (
            "Worker=3&Work%20Time=9",
            FacetSelection::new().with("Worker", "3").with("Work Time", 9.0),
        ),
    ];
    let runtime = tokio::runtime::Runtime::new().unwrap();
    runtime.block_on(async {
        for (query, sel) in &cases {
            let (status, body) = http_get(&app, &format!("/api/items?{query}")).await;
            ensure!(status == StatusCode::OK, "items?{query}: {status}");
            let expected = api::items_document(&collection, sel).unwrap();
            ensure!(body == expected.as_bytes(), "items?{query} differs");
            let (status, body) = http_get(&app, &format!("/api/facets?{query}")).await;
            ensure!(status == StatusCode::OK, "facets?{query}: {status}");
            let expected = api::facets_document(&collection, sel).unwrap();
            ensure!(body == expected.as_bytes(), "facets?{query} differs");
        }
        let (status, body) = http_get(&app, "/api/items?query=selena%20gomez").await;
        let items: serde_json::Value = serde_json::from_slice(&body).unwrap();
        ensure!(
            status == StatusCode::OK && items.as_array().map(Vec::len) == Some(3),
            "selena gomez should give 3 items"
        );
        let (status, body) = http_get(&app, "/api/items?nosuchfacet=x").await;
        ensure!(status == StatusCode::BAD_REQUEST, "unknown facet gave {status}");
        let err: serde_json::Value = serde_json::from_slice(&body).map_err(|e| e.to_string())?;
        ensure!(err["error"].is_string() && err["detail"].is_string(), "error body {err}");
        Ok(())
    })?;
    Ok(format!("{} selections byte-equal, unknown facet 400", cases.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("sample-end-to-end", sample_end_to_end),
        ("preference-oracle", preference_oracle),
        ("aggregation", aggregation),
        ("cxml", cxml),
        ("exhibit-json", exhibit),
        ("facet-engine", facet_engine),
        ("renderer", renderer),
        ("worker-skew", worker_skew),
        ("serve", serve),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check)
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                Err(format!("panicked: {msg}"))
            });
        match outcome {
            Ok(detail) => println!("PASS  {name:<20} {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<20} {why}");
            }
        }
    }
    println!("{} of {} criteria passed", 9 - failed, 9);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
