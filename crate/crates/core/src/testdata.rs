//! Hand-built fixtures shared by unit tests.

use std::collections::BTreeMap;

use crate::model::{
    Annotations, AssessmentRecord, AssignmentMeta, EntityKind, ImageRefs, Label, QueryText,
    QueryType, RankerId,
};

pub const SAMPLE_TSV: &str = include_str!("../fixtures/sample.tsv");
pub const SAMPLE_CONFIG: &str = include_str!("../fixtures/sample_config.json");

pub fn record(
    id: u64,
    query: &str,
    a: &str,
    b: &str,
    label: Label,
    worker: &str,
    time: f64,
) -> AssessmentRecord {
    let query = QueryText::new(query).unwrap();
    AssessmentRecord {
        record_id: id,
        annotations: Annotations::unannotated(&query),
        query,
        doc_a: RankerId::new(a).unwrap(),
        doc_b: RankerId::new(b).unwrap(),
        label,
        assignment: AssignmentMeta {
            worker_id: worker.to_string(),
            work_time_s: time,
            approval_rate: None,
        },
    }
}

/// Sample, annotations included.
pub fn sample_records() -> Vec<AssessmentRecord> {
    let rows = [
        ("youtube", "r1", "r2", Label::A, "1", 19.0),
        ("youtube", "r2", "r1", Label::A, "2", 7.0),
        ("youtube", "r1", "r2", Label::A, "3", 8.0),
        ("selena gomez", "r2", "r1", Label::Same, "1", 21.0),
        ("selena gomez", "r1", "r2", Label::B, "4", 37.0),
        ("selena gomez", "r2", "r1", Label::B, "3", 9.0),
    ];
    rows.iter()
        .enumerate()
        .map(|(i, &(q, a, b, label, worker, time))| {
            let mut r = record(i as u64, q, a, b, label, worker, time);
            let youtube = q == "youtube";
            r.annotations.query_type = Some(if youtube {
                QueryType::Navigational
            } else {
                QueryType::Informational
            });
            r.annotations.entity = Some(if youtube {
                EntityKind::Company
            } else {
                EntityKind::Person
            });
            r
        })
        .collect()
}

pub fn sample_images() -> BTreeMap<u64, ImageRefs> {
    (0..6)
        .map(|id| {
            (
                id,
                ImageRefs {
                    image_ref: format!("images/{id}.svg"),
                    thumbnail_ref: format!("images/{id}_tb.svg"),
                },
            )
        })
        .collect()
}
