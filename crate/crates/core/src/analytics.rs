//! Label aggregation, worker statistics, ranker preferences and the facet
//! engine behind exploration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SelectionError;
use crate::model::{AssessmentRecord, Collection, CollectionItem, FacetValue, Label, RankerId};

/// Which ranker a single assignment preferred.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Ranker(RankerId),
    Same,
}

/// Maps the positional label back to the ranker shown in that column.
pub fn normalize_preference(record: &AssessmentRecord) -> Winner {
    match record.label {
        Label::A => Winner::Ranker(record.doc_a.clone()),
        Label::B => Winner::Ranker(record.doc_b.clone()),
        Label::Same => Winner::Same,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Majority {
    Label(Label),
    Tie,
}

impl Majority {
    pub fn label(self) -> Option<Label> {
        match self {
            Majority::Label(l) => Some(l),
            Majority::Tie => None,
        }
    }
}

impl fmt::Display for Majority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Majority::Label(l) => f.write_str(l.as_str()),
            Majority::Tie => f.write_str("Tie"),
        }
    }
}

impl Serialize for Majority {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Majority {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        if raw == "Tie" {
            return Ok(Majority::Tie);
        }
        raw.parse::<Label>()
            .map(Majority::Label)
            .map_err(serde::de::Error::custom)
    }
}

/// Votes on one unit (one query).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitSummary {
    pub query: String,
    pub label_counts: BTreeMap<Label, usize>,
    pub majority: Majority,
    /// `1 - max_count / vote_total`.
    pub disagreement: f64,
    pub vote_total: usize,
}

/// One summary per distinct query, in order of first appearance. The
/// majority must be strictly larger than every other count.
pub fn unit_summaries(records: &[AssessmentRecord]) -> Vec<UnitSummary> {
    let mut order: Vec<&str> = Vec::new();
    let mut counts: HashMap<&str, BTreeMap<Label, usize>> = HashMap::new();
    for record in records {
        let query = record.query.as_str();
        let entry = counts.entry(query).or_insert_with(|| {
            order.push(query);
            Label::ALL.into_iter().map(|l| (l, 0)).collect()
        });
        *entry.get_mut(&record.label).expect("all labels seeded") += 1;
    }
    order
        .into_iter()
        .map(|query| {
            let label_counts = counts.remove(query).expect("seen query");
            let vote_total: usize = label_counts.values().sum();
            let max = label_counts.values().copied().max().unwrap_or(0);
            let mut leaders = label_counts.iter().filter(|(_, &c)| c == max);
            let majority = match (leaders.next(), leaders.next()) {
                (Some((&label, _)), None) => Majority::Label(label),
                _ => Majority::Tie,
            };
            UnitSummary {
                query: query.to_string(),
                disagreement: 1.0 - max as f64 / vote_total as f64,
                label_counts,
                majority,
                vote_total,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkerSummary {
    pub worker_id: String,
    pub assignment_count: usize,
    pub mean_work_time_s: f64,
    /// Share of this worker's labels on strict-majority units that match the
    /// majority; `None` when the worker only labeled tied units.
    pub agreement_rate: Option<f64>,
    pub share_of_work: f64,
}

/// Sorted by assignment count descending, then worker id ascending.
pub fn worker_summaries(records: &[AssessmentRecord], units: &[UnitSummary]) -> Vec<WorkerSummary> {
    #[derive(Default)]
    struct Acc {
        count: usize,
        time: f64,
        decided: usize,
        agreed: usize,
    }

    let majority: HashMap<&str, Majority> = units
        .iter()
        .map(|u| (u.query.as_str(), u.majority))
        .collect();
    let mut per_worker: BTreeMap<&str, Acc> = BTreeMap::new();
    for record in records {
        let acc = per_worker
            .entry(record.assignment.worker_id.as_str())
            .or_default();
        acc.count += 1;
        acc.time += record.assignment.work_time_s;
        if let Some(label) = majority
            .get(record.query.as_str())
            .and_then(|m| m.label())
        {
            acc.decided += 1;
            if label == record.label {
                acc.agreed += 1;
            }
        }
    }

    let total = records.len() as f64;
    let mut out: Vec<WorkerSummary> = per_worker
        .into_iter()
        .map(|(worker, acc)| WorkerSummary {
            worker_id: worker.to_string(),
            assignment_count: acc.count,
            mean_work_time_s: acc.time / acc.count as f64,
            agreement_rate: (acc.decided > 0).then(|| acc.agreed as f64 / acc.decided as f64),
            share_of_work: acc.count as f64 / total,
        })
        .collect();
    out.sort_by(|a, b| {
        b.assignment_count
            .cmp(&a.assignment_count)
            .then_with(|| a.worker_id.cmp(&b.worker_id))
    });
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceReport {
    /// Every ranker seen in either column, including those with zero wins.
    pub wins: BTreeMap<RankerId, usize>,
    pub same_count: usize,
    /// Raw A labels, before mapping back to rankers.
    pub column_a_label_count: usize,
    pub column_b_label_count: usize,
}

pub fn preference_report(records: &[AssessmentRecord]) -> PreferenceReport {
    let mut report = PreferenceReport::default();
    for record in records {
        report.wins.entry(record.doc_a.clone()).or_default();
        report.wins.entry(record.doc_b.clone()).or_default();
        match record.label {
            Label::A => report.column_a_label_count += 1,
            Label::B => report.column_b_label_count += 1,
            Label::Same => {}
        }
        match normalize_preference(record) {
            Winner::Ranker(r) => *report.wins.entry(r).or_default() += 1,
            Winner::Same => report.same_count += 1,
        }
    }
    report
}

/// Everything `analyze` computes, as one document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub units: Vec<UnitSummary>,
    pub workers: Vec<WorkerSummary>,
    pub rankers: PreferenceReport,
}

impl AnalyticsReport {
    pub fn compute(records: &[AssessmentRecord]) -> Self {
        let units = unit_summaries(records);
        let workers = worker_summaries(records, &units);
        Self {
            units,
            workers,
            rankers: preference_report(records),
        }
    }
}

/// Accepted values per facet: conjunction across facets, disjunction within
/// one facet. An empty map selects everything.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FacetSelection {
    pub chosen: BTreeMap<String, BTreeSet<FacetValue>>,
}

impl FacetSelection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, facet: &str, value: impl Into<FacetValue>) -> Self {
        self.chosen
            .entry(facet.to_string())
            .or_default()
            .insert(value.into());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    /// Builds a selection from `key=value` pairs. Keys may be a facet's
    /// display name or its lowercase key; values are parsed by facet kind.
    /// Repeated keys add alternatives.
    pub fn from_pairs<'a>(
        collection: &Collection,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, SelectionError> {
        let mut selection = Self::new();
        for (key, raw) in pairs {
            let facet = collection
                .resolve_facet(key)
                .ok_or_else(|| SelectionError::UnknownFacet(key.to_string()))?;
            let value = FacetValue::parse(raw, facet.value_kind).ok_or_else(|| {
                SelectionError::BadValue {
                    facet: facet.name.clone(),
                    value: raw.to_string(),
                    kind: "number",
                }
            })?;
            selection
                .chosen
                .entry(facet.name.clone())
                .or_default()
                .insert(value);
        }
        Ok(selection)
    }

    fn check(&self, collection: &Collection) -> Result<(), SelectionError> {
        match self.chosen.keys().find(|name| collection.facet(name).is_none()) {
            Some(unknown) => Err(SelectionError::UnknownFacet(unknown.clone())),
            None => Ok(()),
        }
    }

    fn matches(&self, item: &CollectionItem, skip: Option<&str>) -> bool {
        self.chosen
            .iter()
            .filter(|(name, _)| Some(name.as_str()) != skip)
            .all(|(name, accepted)| {
                item.facet_values
                    .get(name)
                    .is_some_and(|v| accepted.contains(v))
            })
    }
}

/// Items satisfying the selection, in collection order.
pub fn apply_selection<'c>(
    collection: &'c Collection,
    sel: &FacetSelection,
) -> Result<Vec<&'c CollectionItem>, SelectionError> {
    sel.check(collection)?;
    Ok(collection
        .items()
        .iter()
        .filter(|item| sel.matches(item, None))
        .collect())
}

/// Value counts for `facet` among items matching every constraint except the
/// facet's own.
pub fn facet_counts(
    collection: &Collection,
    sel: &FacetSelection,
    facet: &str,
) -> Result<BTreeMap<FacetValue, usize>, SelectionError> {
    if collection.facet(facet).is_none() {
        return Err(SelectionError::UnknownFacet(facet.to_string()));
    }
    sel.check(collection)?;
    let mut counts = BTreeMap::new();
    for item in collection.items() {
        if sel.matches(item, Some(facet)) {
            if let Some(value) = item.facet_values.get(facet) {
                *counts.entry(value.clone()).or_default() += 1;
            }
        }
    }
    Ok(counts)
}
