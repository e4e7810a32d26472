//! Debranded result-page images.
//!
//! Pages are drawn as SVG on a fixed canvas: an 800 unit wide frame, a 60
//! unit query header and a 110 unit block per result holding the title, a
//! green URL line and two snippet lines. Nothing else is drawn: no logos,
//! no search box, no engine chrome. Output is a pure function of the input.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, Writer};
use serde::Serialize;

use crate::error::RenderError;
use crate::model::{ImageRefs, SerpContent};

pub const CANVAS_WIDTH: u32 = 800;
pub const HEADER_HEIGHT: u32 = 60;
pub const RESULT_HEIGHT: u32 = 110;
pub const THUMBNAIL_WIDTH: u32 = 160;

/// Approximate glyph budget per snippet line at 14 units.
const SNIPPET_LINE_CHARS: usize = 100;
const MARGIN_X: u32 = 20;

pub mod palette {
    pub const BACKGROUND: &str = "#ffffff";
    pub const HEADER: &str = "#f2f2f2";
    pub const QUERY: &str = "#222222";
    pub const TITLE: &str = "#1f3a93";
    pub const URL: &str = "#2e7d32";
    pub const SNIPPET: &str = "#4d4d4d";
    pub const RULE: &str = "#e0e0e0";
}

/// Strings that must never appear in a rendered page.
pub const BRAND_DENY_LIST: &[&str] = &[
    "google",
    "bing",
    "yahoo",
    "baidu",
    "yandex",
    "duckduckgo",
    "ask.com",
    "logo",
];

pub fn page_height(results: usize) -> u32 {
    HEADER_HEIGHT + RESULT_HEIGHT * results as u32
}

fn escape(text: &str) -> String {
    quick_xml::escape::escape(text).into_owned()
}

/// Greedy word wrap into two lines; whatever does not fit the first line
/// goes on the second, which is clipped at the canvas edge.
fn snippet_lines(snippet: &str) -> (String, String) {
    let mut first = String::new();
    let mut words = snippet.split_whitespace().peekable();
    while let Some(word) = words.peek() {
        let needed = if first.is_empty() { 0 } else { 1 } + word.chars().count();
        if first.chars().count() + needed > SNIPPET_LINE_CHARS {
            if first.is_empty() {
                // A single overlong word: hard break it.
                let head: String = word.chars().take(SNIPPET_LINE_CHARS).collect();
                let tail: String = word.chars().skip(SNIPPET_LINE_CHARS).collect();
                words.next();
                let rest: Vec<&str> = std::iter::once(tail.as_str()).chain(words).collect();
                return (head, rest.join(" ").trim().to_string());
            }
            break;
        }
        if !first.is_empty() {
            first.push(' ');
        }
        first.push_str(word);
        words.next();
    }
    let second = words.collect::<Vec<_>>().join(" ");
    (first, second)
}

pub fn render_serp(content: &SerpContent) -> String {
    let width = CANVAS_WIDTH;
    let height = page_height(content.results().len());
    let mut svg = String::new();
    let w = &mut svg;
    // Writing into a String cannot fail.
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        w,
        r#"  <defs><clipPath id="canvas"><rect x="0" y="0" width="{width}" height="{height}"/></clipPath></defs>"#
    );
    let _ = writeln!(w, r#"  <g clip-path="url(#canvas)" font-family="sans-serif">"#);
    let _ = writeln!(
        w,
        r#"    <rect x="0" y="0" width="{width}" height="{height}" fill="{}"/>"#,
        palette::BACKGROUND
    );
    let _ = writeln!(
        w,
        r#"    <rect x="0" y="0" width="{width}" height="{HEADER_HEIGHT}" fill="{}"/>"#,
        palette::HEADER
    );
    let _ = writeln!(
        w,
        r#"    <text class="query" x="{MARGIN_X}" y="38" font-size="20" fill="{}">{}</text>"#,
        palette::QUERY,
        escape(content.query().as_str())
    );
    for (i, result) in content.results().iter().enumerate() {
        let top = HEADER_HEIGHT + RESULT_HEIGHT * i as u32;
        let (line1, line2) = snippet_lines(&result.snippet);
        let _ = writeln!(w, r#"    <g class="result" data-rank="{}">"#, result.rank);
        let _ = writeln!(
            w,
            r#"      <text class="title" x="{MARGIN_X}" y="{}" font-size="18" fill="{}">{}</text>"#,
            top + 28,
            palette::TITLE,
            escape(&result.title)
        );
        let _ = writeln!(
            w,
            r#"      <text class="url" x="{MARGIN_X}" y="{}" font-size="14" fill="{}">{}</text>"#,
            top + 50,
            palette::URL,
            escape(&result.url)
        );
        for (offset, line) in [(72, line1), (92, line2)] {
            let _ = writeln!(
                w,
                r#"      <text class="snippet" x="{MARGIN_X}" y="{}" font-size="14" fill="{}">{}</text>"#,
                top + offset,
                palette::SNIPPET,
                escape(&line)
            );
        }
        let _ = writeln!(
            w,
            r#"      <line x1="0" y1="{y}" x2="{width}" y2="{y}" stroke="{}" stroke-width="1"/>"#,
            palette::RULE,
            y = top + RESULT_HEIGHT
        );
        let _ = writeln!(w, "    </g>");
    }
    let _ = writeln!(w, "  </g>");
    let _ = writeln!(w, "</svg>");
    svg
}

fn malformed(msg: impl Into<String>) -> RenderError {
    RenderError::Malformed(msg.into())
}

fn dimension(root: &BytesStart<'_>, name: &str) -> Result<Option<f64>, RenderError> {
    let attr = root
        .try_get_attribute(name)
        .map_err(|e| malformed(e.to_string()))?;
    match attr {
        None => Ok(None),
        Some(attr) => {
            let value = attr
                .unescape_value()
                .map_err(|e| malformed(e.to_string()))?;
            value
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .map(Some)
                .ok_or_else(|| malformed(format!("invalid {name} {value:?}")))
        }
    }
}

fn check_root(start: &BytesStart<'_>) -> Result<(), RenderError> {
    if start.name().as_ref() == b"svg" {
        Ok(())
    } else {
        Err(malformed("root element is not <svg>"))
    }
}

fn scaled_root(root: &BytesStart<'_>) -> Result<BytesStart<'static>, RenderError> {
    let width = dimension(root, "width")?.ok_or_else(|| malformed("root has no width"))?;
    let height = dimension(root, "height")?.ok_or_else(|| malformed("root has no height"))?;
    let thumb_height = (height * f64::from(THUMBNAIL_WIDTH) / width).round();

    let mut out = BytesStart::new("svg");
    let mut has_view_box = false;
    for attr in root.attributes() {
        let attr = attr.map_err(|e| malformed(e.to_string()))?;
        match attr.key.as_ref() {
            b"width" => out.push_attribute(("width", THUMBNAIL_WIDTH.to_string().as_str())),
            b"height" => out.push_attribute(("height", format!("{thumb_height}").as_str())),
            key => {
                has_view_box |= key == b"viewBox";
                out.push_attribute(attr);
            }
        }
    }
    if !has_view_box {
        out.push_attribute(("viewBox", format!("0 0 {width} {height}").as_str()));
    }
    Ok(out)
}

/// Rescales the root to 160 units wide keeping the aspect ratio. Only the
/// root element's width and height change; the view box keeps the drawing.
pub fn make_thumbnail(full: &str) -> Result<String, RenderError> {
    let mut reader = Reader::from_str(full);
    let mut writer = Writer::new(Cursor::new(Vec::new()));
    let mut seen_root = false;
    let mut depth = 0usize;
    loop {
        let event = reader
            .read_event()
            .map_err(|e| malformed(format!("at byte {}: {e}", reader.buffer_position())))?;
        let event = match event {
            Event::Eof => break,
            Event::Start(start) if !seen_root => {
                check_root(&start)?;
                seen_root = true;
                depth += 1;
                Event::Start(scaled_root(&start)?)
            }
            Event::Empty(start) if !seen_root => {
                check_root(&start)?;
                seen_root = true;
                Event::Empty(scaled_root(&start)?)
            }
            Event::Start(start) => {
                depth += 1;
                Event::Start(start)
            }
            Event::End(end) => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| malformed("unbalanced end tag"))?;
                Event::End(end)
            }
            other => other,
        };
        writer
            .write_event(event)
            .map_err(|e| malformed(e.to_string()))?;
    }
    if !seen_root {
        return Err(malformed("no <svg> root element"));
    }
    if depth != 0 {
        return Err(malformed("unclosed elements"));
    }
    String::from_utf8(writer.into_inner().into_inner()).map_err(|e| malformed(e.to_string()))
}

/// Files written for one record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImagePair {
    pub image_ref: PathBuf,
    pub thumbnail_ref: PathBuf,
    pub record_id: u64,
}

impl ImagePair {
    pub fn refs(&self) -> ImageRefs {
        ImageRefs {
            image_ref: self.image_ref.to_string_lossy().into_owned(),
            thumbnail_ref: self.thumbnail_ref.to_string_lossy().into_owned(),
        }
    }
}

pub fn image_file_name(record_id: u64) -> String {
    format!("{record_id}.svg")
}

pub fn thumbnail_file_name(record_id: u64) -> String {
    format!("{record_id}_tb.svg")
}

/// Writes `{id}.svg` and `{id}_tb.svg` per record, overwriting old files.
pub fn render_dataset(
    serps: &BTreeMap<u64, SerpContent>,
    out_dir: &Path,
) -> Result<BTreeMap<u64, ImagePair>, RenderError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RenderError::Io { path, source }
    };
    if !serps.is_empty() {
        fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    }
    let mut index = BTreeMap::new();
    for (&record_id, content) in serps {
        let full = render_serp(content);
        let thumb = make_thumbnail(&full)?;
        let image_ref = out_dir.join(image_file_name(record_id));
        let thumbnail_ref = out_dir.join(thumbnail_file_name(record_id));
        fs::write(&image_ref, full).map_err(io(&image_ref))?;
        fs::write(&thumbnail_ref, thumb).map_err(io(&thumbnail_ref))?;
        index.insert(
            record_id,
            ImagePair {
                image_ref,
                thumbnail_ref,
                record_id,
            },
        );
    }
    Ok(index)
}
