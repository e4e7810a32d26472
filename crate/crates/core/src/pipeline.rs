//! File-level glue between the stages, shared by the command line and the
//! end-to-end tests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analytics::AnalyticsReport;
use crate::bundle::{export_bundle, Manifest};
use crate::error::{BundleError, ModelError, RenderError};
use crate::model::{
    build_collection, AssessmentRecord, Collection, FacetDefinition, FacetSource, ImageRefs,
    SerpContent, ValueKind,
};
use crate::render::{image_file_name, render_dataset, thumbnail_file_name};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: serp key {key:?} is not a record id")]
    SerpKey { path: PathBuf, key: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

fn read(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| PipelineError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> PipelineError {
    let path = path.to_path_buf();
    move |source| PipelineError::Json { path, source }
}

/// Facets used when no column config is supplied.
pub fn default_facets() -> Vec<FacetDefinition> {
    vec![
        FacetDefinition::new("Worker", ValueKind::String, FacetSource::WorkerId),
        FacetDefinition::new("Query", ValueKind::String, FacetSource::Query),
        FacetDefinition::new("Answer", ValueKind::String, FacetSource::Label),
        FacetDefinition::new("Query Type", ValueKind::String, FacetSource::QueryType),
        FacetDefinition::new("Query Length", ValueKind::Number, FacetSource::QueryLength),
        FacetDefinition::new("Has Entity", ValueKind::String, FacetSource::Entity),
        FacetDefinition::new("Work Time", ValueKind::Number, FacetSource::WorkTime),
    ]
}

pub fn records_to_json(records: &[AssessmentRecord]) -> String {
    let mut text = serde_json::to_string_pretty(records).expect("records serialize");
    text.push('\n');
    text
}

pub fn read_records(path: &Path) -> Result<Vec<AssessmentRecord>, PipelineError> {
    serde_json::from_str(&read(path)?).map_err(json_err(path))
}

pub fn write_records(path: &Path, records: &[AssessmentRecord]) -> Result<(), PipelineError> {
    write_file(path, &records_to_json(records))
}

/// Reads `{"<record id>": {"query": .., "results": [..]}, ..}`.
pub fn read_serps(path: &Path) -> Result<BTreeMap<u64, SerpContent>, PipelineError> {
    let raw: BTreeMap<String, SerpContent> =
        serde_json::from_str(&read(path)?).map_err(json_err(path))?;
    raw.into_iter()
        .map(|(key, content)| {
            key.parse::<u64>()
                .map(|id| (id, content))
                .map_err(|_| PipelineError::SerpKey {
                    path: path.to_path_buf(),
                    key,
                })
        })
        .collect()
}

/// Image references, relative to `dir`, for every record whose full image
/// and thumbnail both exist there.
pub fn image_refs_in(dir: &Path, records: &[AssessmentRecord]) -> BTreeMap<u64, ImageRefs> {
    records
        .iter()
        .filter_map(|r| {
            let image = image_file_name(r.record_id);
            let thumb = thumbnail_file_name(r.record_id);
            let present = dir.join(&image).is_file() && dir.join(&thumb).is_file();
            present.then_some((
                r.record_id,
                ImageRefs {
                    image_ref: image,
                    thumbnail_ref: thumb,
                },
            ))
        })
        .collect()
}

/// Collection and bundle from annotated records and a directory of
/// pre-rendered images.
pub fn bundle_from_images(
    title: &str,
    records: &[AssessmentRecord],
    facets: &[FacetDefinition],
    images_dir: &Path,
    out_dir: &Path,
) -> Result<(Collection, Manifest), PipelineError> {
    let refs = image_refs_in(images_dir, records);
    let collection = build_collection(title, records, facets, &refs)?;
    let report = AnalyticsReport::compute(records);
    let manifest = export_bundle(&collection, &report, images_dir, out_dir)?;
    Ok((collection, manifest))
}

/// Renders the pages into `work_dir`, then builds the bundle in `out_dir`.
pub fn bundle_from_serps(
    title: &str,
    records: &[AssessmentRecord],
    facets: &[FacetDefinition],
    serps: &BTreeMap<u64, SerpContent>,
    work_dir: &Path,
    out_dir: &Path,
) -> Result<(Collection, Manifest), PipelineError> {
    render_dataset(serps, work_dir)?;
    bundle_from_images(title, records, facets, work_dir, out_dir)
}
