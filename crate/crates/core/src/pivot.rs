//! Pivot collection documents (CXML).
//!
//! The dialect written here:
//!
//! ```xml
//! <?xml version="1.0" encoding="UTF-8"?>
//! <Collection xmlns:rave="urn:rave:cxml:1" Name="..." SchemaVersion="1.0">
//!   <FacetCategories>
//!     <FacetCategory Name="Worker" Type="String" rave:Source="worker_id"/>
//!   </FacetCategories>
//!   <Items>
//!     <Item Id="0" Name="youtube" Img="images/0.svg" rave:Thumb="images/0_tb.svg" rave:RecordId="0">
//!       <Description>worker 1, answer A</Description>
//!       <Facets>
//!         <Facet Name="Worker">
//!           <String Value="1"/>
//!         </Facet>
//!       </Facets>
//!     </Item>
//!   </Items>
//! </Collection>
//! ```
//!
//! Numeric facets use `Number` in place of `String`. The `rave:` attributes
//! are optional on input: a missing source leaves the facet detached, a
//! missing thumbnail defaults to the image name with a `_tb` suffix and a
//! missing record id defaults to the item id.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::error::CxmlError;
use crate::model::{
    Collection, CollectionItem, FacetDefinition, FacetSource, FacetValue, ValueKind,
};

pub const SCHEMA_VERSION: &str = "1.0";
pub const EXTENSION_NS: &str = "urn:rave:cxml:1";

const ATTR_SOURCE: &str = "rave:Source";
const ATTR_THUMB: &str = "rave:Thumb";
const ATTR_RECORD: &str = "rave:RecordId";

/// Escapes for attribute values and text. Whitespace control characters are
/// written as character references so attribute normalization keeps them.
fn escape(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    out
}

/// Default thumbnail name for an image: `a/b.svg` -> `a/b_tb.svg`.
pub fn default_thumbnail(image: &str) -> String {
    let file_start = image.rfind('/').map_or(0, |i| i + 1);
    match image[file_start..].rfind('.') {
        Some(dot) if dot > 0 => {
            let dot = file_start + dot;
            format!("{}_tb{}", &image[..dot], &image[dot..])
        }
        _ => format!("{image}_tb"),
    }
}

pub fn emit_cxml(collection: &Collection) -> Result<String, CxmlError> {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<Collection xmlns:rave="{EXTENSION_NS}" Name="{}" SchemaVersion="{SCHEMA_VERSION}">"#,
        escape(collection.title())
    );

    if collection.facets().is_empty() {
        let _ = writeln!(w, "  <FacetCategories/>");
    } else {
        let _ = writeln!(w, "  <FacetCategories>");
        for facet in collection.facets() {
            let _ = write!(
                w,
                r#"    <FacetCategory Name="{}" Type="{}""#,
                escape(&facet.name),
                facet.value_kind.cxml_name()
            );
            if let Some(source) = facet.source {
                let _ = write!(w, r#" {ATTR_SOURCE}="{}""#, source.as_str());
            }
            let _ = writeln!(w, "/>");
        }
        let _ = writeln!(w, "  </FacetCategories>");
    }

    if collection.items().is_empty() {
        let _ = writeln!(w, "  <Items/>");
    } else {
        let _ = writeln!(w, "  <Items>");
        for item in collection.items() {
            write_item(w, collection, item)?;
        }
        let _ = writeln!(w, "  </Items>");
    }
    let _ = writeln!(w, "</Collection>");
    Ok(out)
}

fn write_item(w: &mut String, collection: &Collection, item: &CollectionItem) -> Result<(), CxmlError> {
    let _ = writeln!(
        w,
        r#"    <Item Id="{}" Name="{}" Img="{}" {ATTR_THUMB}="{}" {ATTR_RECORD}="{}">"#,
        item.item_id,
        escape(&item.name),
        escape(&item.image_ref),
        escape(&item.thumbnail_ref),
        item.record_id
    );
    let _ = writeln!(w, "      <Description>{}</Description>", escape(&item.description));
    if collection.facets().is_empty() {
        let _ = writeln!(w, "      <Facets/>");
    } else {
        let _ = writeln!(w, "      <Facets>");
        for facet in collection.facets() {
            let value = item.facet_values.get(&facet.name).ok_or_else(|| {
                CxmlError::MissingFacetValue {
                    item_id: item.item_id,
                    facet: facet.name.clone(),
                }
            })?;
            let _ = writeln!(w, r#"        <Facet Name="{}">"#, escape(&facet.name));
            let _ = writeln!(
                w,
                r#"          <{} Value="{}"/>"#,
                value.kind().cxml_name(),
                escape(&value.to_string())
            );
            let _ = writeln!(w, "        </Facet>");
        }
        let _ = writeln!(w, "      </Facets>");
    }
    let _ = writeln!(w, "    </Item>");
    Ok(())
}

#[derive(Default)]
struct PendingItem {
    item_id: u64,
    name: String,
    description: Option<String>,
    image_ref: String,
    thumbnail_ref: String,
    record_id: u64,
    facet_values: BTreeMap<String, FacetValue>,
    saw_facets: bool,
}

struct PendingFacet {
    name: String,
    value: Option<FacetValue>,
}

struct Parser {
    stack: Vec<String>,
    title: Option<String>,
    facets: Vec<FacetDefinition>,
    saw_categories: bool,
    saw_items: bool,
    items: Vec<CollectionItem>,
    item: Option<PendingItem>,
    facet: Option<PendingFacet>,
    text: Option<String>,
}

fn attr(start: &BytesStart<'_>, name: &str, path: &str) -> Result<Option<String>, CxmlError> {
    let found = start
        .try_get_attribute(name)
        .map_err(|e| CxmlError::Xml(format!("{path}: {e}")))?;
    found
        .map(|a| {
            a.unescape_value()
                .map(|v| v.into_owned())
                .map_err(|e| CxmlError::Xml(format!("{path}: {e}")))
        })
        .transpose()
}

fn required(
    start: &BytesStart<'_>,
    name: &'static str,
    path: &str,
) -> Result<String, CxmlError> {
    attr(start, name, path)?.ok_or_else(|| CxmlError::MissingAttribute {
        path: path.to_string(),
        attr: name,
    })
}

fn integer(value: &str, name: &'static str, path: &str) -> Result<u64, CxmlError> {
    value.parse().map_err(|_| CxmlError::InvalidAttribute {
        path: path.to_string(),
        attr: name,
        value: value.to_string(),
    })
}

impl Parser {
    fn new() -> Self {
        Self {
            stack: Vec::new(),
            title: None,
            facets: Vec::new(),
            saw_categories: false,
            saw_items: false,
            items: Vec::new(),
            item: None,
            facet: None,
            text: None,
        }
    }

    fn path(&self, name: &str) -> String {
        let mut parts: Vec<&str> = self.stack.iter().map(String::as_str).collect();
        parts.push(name);
        format!("/{}", parts.join("/"))
    }

    fn open(&mut self, start: &BytesStart<'_>) -> Result<(), CxmlError> {
        let name = String::from_utf8_lossy(start.name().as_ref()).into_owned();
        let path = self.path(&name);
        let parent = self.stack.last().cloned();
        match (parent.as_deref(), name.as_str()) {
            (None, "Collection") => {
                self.title = Some(required(start, "Name", &path)?);
            }
            (Some("Collection"), "FacetCategories") if !self.saw_categories => {
                self.saw_categories = true;
            }
            (Some("FacetCategories"), "FacetCategory") => {
                let facet_name = required(start, "Name", &path)?;
                let kind_name = required(start, "Type", &path)?;
                let kind = ValueKind::from_cxml_name(&kind_name).ok_or_else(|| {
                    CxmlError::InvalidAttribute {
                        path: path.clone(),
                        attr: "Type",
                        value: kind_name.clone(),
                    }
                })?;
                let source = match attr(start, ATTR_SOURCE, &path)? {
                    None => None,
                    Some(raw) => Some(FacetSource::parse(&raw).ok_or_else(|| {
                        CxmlError::InvalidAttribute {
                            path: path.clone(),
                            attr: ATTR_SOURCE,
                            value: raw,
                        }
                    })?),
                };
                self.facets.push(FacetDefinition {
                    name: facet_name,
                    value_kind: kind,
                    source,
                });
            }
            (Some("Collection"), "Items") if !self.saw_items => {
                self.saw_items = true;
            }
            (Some("Items"), "Item") => {
                let item_id = integer(&required(start, "Id", &path)?, "Id", &path)?;
                let image_ref = required(start, "Img", &path)?;
                let thumbnail_ref = attr(start, ATTR_THUMB, &path)?
                    .unwrap_or_else(|| default_thumbnail(&image_ref));
                let record_id = match attr(start, ATTR_RECORD, &path)? {
                    Some(raw) => integer(&raw, ATTR_RECORD, &path)?,
                    None => item_id,
                };
                self.item = Some(PendingItem {
                    item_id,
                    name: required(start, "Name", &path)?,
                    image_ref,
                    thumbnail_ref,
                    record_id,
                    ..PendingItem::default()
                });
            }
            (Some("Item"), "Description")
                if self.item.as_ref().is_some_and(|i| i.description.is_none()) =>
            {
                self.text = Some(String::new());
            }
            (Some("Item"), "Facets") if self.item.as_ref().is_some_and(|i| !i.saw_facets) => {
                self.pending_item()?.saw_facets = true;
            }
            (Some("Facets"), "Facet") => {
                self.facet = Some(PendingFacet {
                    name: required(start, "Name", &path)?,
                    value: None,
                });
            }
            (Some("Facet"), kind @ ("String" | "Number")) => {
                let kind = ValueKind::from_cxml_name(kind).expect("matched above");
                let raw = required(start, "Value", &path)?;
                let value = FacetValue::parse(&raw, kind).ok_or_else(|| {
                    CxmlError::InvalidAttribute {
                        path: path.clone(),
                        attr: "Value",
                        value: raw.clone(),
                    }
                })?;
                let facet = self.facet.as_mut().expect("inside Facet");
                if facet.value.replace(value).is_some() {
                    return Err(CxmlError::UnknownElement {
                        path,
                        name: format!("{name} (second value)"),
                    });
                }
            }
            _ => return Err(CxmlError::UnknownElement { path, name }),
        }
        self.stack.push(name);
        Ok(())
    }

    fn pending_item(&mut self) -> Result<&mut PendingItem, CxmlError> {
        self.item
            .as_mut()
            .ok_or(CxmlError::Missing("enclosing Item"))
    }

    fn close(&mut self) -> Result<(), CxmlError> {
        let name = self.stack.pop().ok_or(CxmlError::Xml("unbalanced end tag".into()))?;
        let path = self.path(&name);
        match name.as_str() {
            "Description" => {
                let text = self.text.take().unwrap_or_default();
                self.pending_item()?.description = Some(text);
            }
            "Facet" => {
                let facet = self.facet.take().expect("Facet open");
                let definition = self
                    .facets
                    .iter()
                    .find(|f| f.name == facet.name)
                    .ok_or_else(|| CxmlError::InvalidAttribute {
                        path: path.clone(),
                        attr: "Name",
                        value: facet.name.clone(),
                    })?;
                let value = facet.value.ok_or(CxmlError::MissingAttribute {
                    path: path.clone(),
                    attr: "Value",
                })?;
                if value.kind() != definition.value_kind {
                    return Err(CxmlError::InvalidAttribute {
                        path,
                        attr: "Type",
                        value: value.kind().cxml_name().to_string(),
                    });
                }
                let item = self.pending_item()?;
                if item.facet_values.insert(facet.name.clone(), value).is_some() {
                    return Err(CxmlError::InvalidAttribute {
                        path,
                        attr: "Name",
                        value: facet.name,
                    });
                }
            }
            "Item" => {
                let item = self.item.take().expect("Item open");
                for facet in &self.facets {
                    if !item.facet_values.contains_key(&facet.name) {
                        return Err(CxmlError::MissingFacetValue {
                            item_id: item.item_id,
                            facet: facet.name.clone(),
                        });
                    }
                }
                self.items.push(CollectionItem {
                    item_id: item.item_id,
                    name: item.name,
                    description: item.description.unwrap_or_default(),
                    image_ref: item.image_ref,
                    thumbnail_ref: item.thumbnail_ref,
                    facet_values: item.facet_values,
                    record_id: item.record_id,
                });
            }
            _ => {}
        }
        Ok(())
    }

    fn text(&mut self, text: &str) -> Result<(), CxmlError> {
        match self.text.as_mut() {
            Some(buf) => buf.push_str(text),
            None if text.trim().is_empty() => {}
            None => return Err(CxmlError::UnexpectedText(self.path("#text"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<Collection, CxmlError> {
        let title = self.title.ok_or(CxmlError::Missing("Collection"))?;
        if !self.saw_categories {
            return Err(CxmlError::Missing("FacetCategories"));
        }
        if !self.saw_items {
            return Err(CxmlError::Missing("Items"));
        }
        Ok(Collection::new(title, self.facets, self.items)?)
    }
}

pub fn parse_cxml(text: &str) -> Result<Collection, CxmlError> {
    let mut reader = Reader::from_str(text);
    let mut parser = Parser::new();
    let xml_err = |reader: &Reader<&[u8]>, e: &dyn std::fmt::Display| {
        CxmlError::Xml(format!("at byte {}: {e}", reader.buffer_position()))
    };
    loop {
        match reader.read_event() {
            Err(e) => return Err(xml_err(&reader, &e)),
            Ok(Event::Eof) => break,
            Ok(Event::Start(start)) => parser.open(&start)?,
            Ok(Event::Empty(start)) => {
                parser.open(&start)?;
                parser.close()?;
            }
            Ok(Event::End(_)) => parser.close()?,
            Ok(Event::Text(t)) => {
                let text = t.unescape().map_err(|e| xml_err(&reader, &e))?;
                parser.text(&text)?;
            }
            Ok(Event::CData(c)) => {
                let raw = c.into_inner();
                parser.text(&String::from_utf8_lossy(&raw))?;
            }
            Ok(Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_)) => {}
        }
    }
    if !parser.stack.is_empty() {
        return Err(CxmlError::Xml(format!(
            "unclosed element {}",
            parser.path("")
        )));
    }
    parser.finish()
}
