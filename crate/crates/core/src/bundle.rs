//! Self-contained output directory: CXML, Exhibit JSON and HTML, analytics
//! and the referenced images, described by a manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::AnalyticsReport;
use crate::api::report_document;
use crate::error::BundleError;
use crate::exhibit::{emit_exhibit_html, emit_exhibit_json};
use crate::model::Collection;
use crate::pivot::{emit_cxml, parse_cxml};

pub const IMAGES_DIR: &str = "images";
pub const COLLECTION_FILE: &str = "collection.cxml";
pub const EXHIBIT_FILE: &str = "exhibit.json";
pub const INDEX_FILE: &str = "index.html";
pub const ANALYTICS_FILE: &str = "analytics.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub title: String,
    pub items: usize,
    pub files: Vec<ManifestEntry>,
}

/// Source path for every distinct image reference, keyed by the bundle file
/// name it will be copied to.
fn plan_images(
    collection: &Collection,
    image_root: &Path,
) -> Result<BTreeMap<String, PathBuf>, BundleError> {
    let mut plan: BTreeMap<String, PathBuf> = BTreeMap::new();
    for item in collection.items() {
        for reference in [&item.image_ref, &item.thumbnail_ref] {
            let source = image_root.join(reference);
            let name = file_name(reference)?;
            match plan.get(&name) {
                Some(existing) if *existing != source => {
                    return Err(BundleError::ImageNameClash {
                        first: existing.clone(),
                        second: source,
                        name,
                    })
                }
                Some(_) => {}
                None => {
                    plan.insert(name, source);
                }
            }
        }
    }
    Ok(plan)
}

fn file_name(reference: &str) -> Result<String, BundleError> {
    Path::new(reference)
        .file_name()
        .and_then(|n| n.to_str())
        .map(str::to_string)
        .ok_or_else(|| BundleError::BadImageRef(reference.to_string()))
}

/// Rewrites every image reference to `images/<file name>`.
pub fn relocate_images(collection: &Collection) -> Result<Collection, BundleError> {
    for item in collection.items() {
        file_name(&item.image_ref)?;
        file_name(&item.thumbnail_ref)?;
    }
    Ok(collection.map_image_refs(|r| {
        format!("{IMAGES_DIR}/{}", file_name(r).expect("checked above"))
    }))
}

fn write(out_dir: &Path, rel: &str, bytes: &[u8], files: &mut Vec<ManifestEntry>) -> Result<(), BundleError> {
    let path = out_dir.join(rel);
    fs::write(&path, bytes).map_err(BundleError::io(&path))?;
    files.push(ManifestEntry {
        path: rel.to_string(),
        bytes: bytes.len() as u64,
    });
    Ok(())
}

/// Writes a bundle to `out_dir`. Relative image references are resolved
/// against `image_root`. Running twice on the same input gives identical
/// bytes.
pub fn export_bundle(
    collection: &Collection,
    report: &AnalyticsReport,
    image_root: &Path,
    out_dir: &Path,
) -> Result<Manifest, BundleError> {
    let plan = plan_images(collection, image_root)?;
    let relocated = relocate_images(collection)?;
    let cxml = emit_cxml(&relocated)?;
    let exhibit = emit_exhibit_json(&relocated)?;
    let html = emit_exhibit_html(&relocated);
    let analytics = report_document(report);

    let images_dir = out_dir.join(IMAGES_DIR);
    fs::create_dir_all(&images_dir).map_err(BundleError::io(out_dir))?;

    let mut files = Vec::new();
    for (name, source) in &plan {
        let bytes = fs::read(source).map_err(BundleError::io(source))?;
        write(out_dir, &format!("{IMAGES_DIR}/{name}"), &bytes, &mut files)?;
    }
    write(out_dir, COLLECTION_FILE, cxml.as_bytes(), &mut files)?;
    write(out_dir, EXHIBIT_FILE, exhibit.as_bytes(), &mut files)?;
    write(out_dir, INDEX_FILE, html.as_bytes(), &mut files)?;
    write(out_dir, ANALYTICS_FILE, analytics.as_bytes(), &mut files)?;
    files.sort_by(|a, b| a.path.cmp(&b.path));

    let manifest = Manifest {
        title: collection.title().to_string(),
        items: collection.items().len(),
        files,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, text).map_err(BundleError::io(&path))?;
    Ok(manifest)
}

/// A bundle read back from disk, as the server uses it.
#[derive(Clone, Debug)]
pub struct LoadedBundle {
    pub root: PathBuf,
    pub manifest: Manifest,
    pub collection: Collection,
    pub exhibit_json: String,
    pub index_html: String,
    pub analytics: AnalyticsReport,
}

impl LoadedBundle {
    pub fn images_dir(&self) -> PathBuf {
        self.root.join(IMAGES_DIR)
    }
}

fn read_text(path: &Path) -> Result<String, BundleError> {
    fs::read_to_string(path).map_err(BundleError::io(path))
}

pub fn load_bundle(dir: &Path) -> Result<LoadedBundle, BundleError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(BundleError::NotABundle(dir.to_path_buf()));
    }
    let manifest: Manifest = serde_json::from_str(&read_text(&manifest_path)?)
        .map_err(|source| BundleError::Json {
            path: manifest_path.clone(),
            source,
        })?;
    let collection = parse_cxml(&read_text(&dir.join(COLLECTION_FILE))?)?;
    let analytics_path = dir.join(ANALYTICS_FILE);
    let analytics = serde_json::from_str(&read_text(&analytics_path)?).map_err(|source| {
        BundleError::Json {
            path: analytics_path.clone(),
            source,
        }
    })?;
    Ok(LoadedBundle {
        root: dir.to_path_buf(),
        manifest,
        collection,
        exhibit_json: read_text(&dir.join(EXHIBIT_FILE))?,
        index_html: read_text(&dir.join(INDEX_FILE))?,
        analytics,
    })
}
