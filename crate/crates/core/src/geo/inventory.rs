use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use serde_json::{json, Map, Value};

use super::{CoordMode, GeoPolygon};
use crate::error::{Error, Result};

pub const CANONICAL_CLASSES: [&str; 4] = ["slide", "flow", "fall", "complex"];

/// Sub-types and the class each belongs to.
pub const SUB_TYPES: [(&str, &str); 5] = [
    ("rotational_slide", "slide"),
    ("translational_slide", "slide"),
    ("debris_flow", "flow"),
    ("earth_flow", "flow"),
    ("rock_fall", "fall"),
];

/// One landslide outline from an inventory.
#[derive(Debug, Clone)]
pub struct InventoryRecord {
    pub id: String,
    pub polygon: GeoPolygon,
    pub label: Option<String>,
    pub sublabel: Option<String>,
    /// Source feature properties, kept for grouping and write-back.
    pub properties: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Default)]
pub struct ParsedInventory {
    pub records: Vec<InventoryRecord>,
    /// Coordinate mode declared by a top-level `"coords"` member, if any.
    pub coords: Option<CoordMode>,
    pub rejected: Vec<Rejection>,
    pub skipped_non_polygon: usize,
    pub warnings: Vec<String>,
}

/// Maps raw inventory label strings to canonical class / sub-type names.
#[derive(Debug, Clone)]
pub struct LabelMap {
    entries: BTreeMap<String, String>,
}

pub(crate) fn normalize_label(raw: &str) -> String {
    let lowered = raw.trim().to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    for c in lowered.chars() {
        if c.is_whitespace() || c == '-' {
            if !out.ends_with('_') {
                out.push('_');
            }
        } else {
            out.push(c);
        }
    }
    out
}

impl Default for LabelMap {
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        for c in CANONICAL_CLASSES {
            entries.insert(c.to_string(), c.to_string());
        }
        for (s, _) in SUB_TYPES {
            entries.insert(s.to_string(), s.to_string());
        }
        for (alias, target) in [
            ("slides", "slide"),
            ("flows", "flow"),
            ("falls", "fall"),
            ("rockfall", "rock_fall"),
            ("debrisflow", "debris_flow"),
            ("earthflow", "earth_flow"),
        ] {
            entries.insert(alias.to_string(), target.to_string());
        }
        LabelMap { entries }
    }
}

impl LabelMap {
    /// Adds user mappings on top of the defaults. Targets must be canonical
    /// classes or sub-types.
    pub fn with_entries<'a, I>(mut self, extra: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a String, &'a String)>,
    {
        for (from, to) in extra {
            let target = normalize_label(to);
            let known = CANONICAL_CLASSES.contains(&target.as_str())
                || SUB_TYPES.iter().any(|(s, _)| *s == target);
            if !known {
                return Err(Error::Config(format!(
                    "label mapping {from:?} -> {to:?}: target is not a known class or sub-type"
                )));
            }
            self.entries.insert(normalize_label(from), target);
        }
        Ok(self)
    }

    /// Returns `(class, sub_type, mapped)`; `mapped` is false when the raw
    /// label did not match any entry and is passed through normalized.
    pub fn resolve(&self, raw: &str) -> (String, Option<String>, bool) {
        let norm = normalize_label(raw);
        let (target, mapped) = match self.entries.get(&norm) {
            Some(t) => (t.clone(), true),
            None => (norm, false),
        };
        match SUB_TYPES.iter().find(|(s, _)| *s == target) {
            Some((sub, parent)) => (parent.to_string(), Some(sub.to_string()), mapped),
            None => (target, None, mapped),
        }
    }
}

fn parse_ring(value: &Value) -> Result<Vec<[f64; 2]>> {
    let arr = value
        .as_array()
        .ok_or_else(|| Error::Inventory("ring is not an array".into()))?;
    arr.iter()
        .map(|pos| {
            let p = pos
                .as_array()
                .filter(|p| p.len() >= 2)
                .ok_or_else(|| Error::Inventory("position must have at least 2 numbers".into()))?;
            let x = p[0].as_f64();
            let y = p[1].as_f64();
            match (x, y) {
                (Some(x), Some(y)) => Ok([x, y]),
                _ => Err(Error::Inventory("position is not numeric".into())),
            }
        })
        .collect()
}

fn feature_id(feature: &Value, props: &Map<String, Value>, index: usize) -> String {
    let as_text = |v: &Value| match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    };
    feature
        .get("id")
        .and_then(as_text)
        .or_else(|| props.get("id").and_then(as_text))
        .unwrap_or_else(|| format!("f{index}"))
}

/// Reads a GeoJSON FeatureCollection. Each polygon exterior ring becomes a
/// record; MultiPolygon parts get `_<part>` id suffixes. Bad rings are
/// rejected individually and reported rather than failing the document.
pub fn parse_inventory<R: Read>(
    source: R,
    label_key: &str,
    labels: &LabelMap,
) -> Result<ParsedInventory> {
    let doc: Value = serde_json::from_reader(source)
        .map_err(|e| Error::Inventory(format!("not valid JSON: {e}")))?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::Inventory("document is not a FeatureCollection".into()));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Inventory("FeatureCollection has no features array".into()))?;

    let mut out = ParsedInventory {
        coords: doc
            .get("coords")
            .and_then(Value::as_str)
            .map(str::parse)
            .transpose()?,
        ..Default::default()
    };
    let mut seen = HashSet::new();

    for (index, feature) in features.iter().enumerate() {
        let props = feature
            .get("properties")
            .and_then(Value::as_object)
            .cloned()
            .unwrap_or_default();
        let id = feature_id(feature, &props, index);
        let geometry = feature.get("geometry").filter(|g| !g.is_null());
        let Some(geometry) = geometry else {
            out.skipped_non_polygon += 1;
            out.warnings.push(format!("{id}: feature has no geometry, skipped"));
            continue;
        };
        let coords = geometry
            .get("coordinates")
            .ok_or_else(|| Error::Inventory(format!("{id}: geometry has no coordinates")))?;
        let parts: Vec<(String, &Value)> = match geometry.get("type").and_then(Value::as_str) {
            Some("Polygon") => vec![(id.clone(), coords)],
            Some("MultiPolygon") => coords
                .as_array()
                .ok_or_else(|| Error::Inventory(format!("{id}: MultiPolygon is not an array")))?
                .iter()
                .enumerate()
                .map(|(k, poly)| (format!("{id}_{k}"), poly))
                .collect(),
            other => {
                out.skipped_non_polygon += 1;
                out.warnings.push(format!(
                    "{id}: geometry type {} is not a polygon, skipped",
                    other.unwrap_or("?")
                ));
                continue;
            }
        };

        let (label, sublabel) = match props.get(label_key) {
            Some(Value::String(raw)) if !raw.trim().is_empty() => {
                let (class, sub, mapped) = labels.resolve(raw);
                if !mapped {
                    out.warnings
                        .push(format!("{id}: label {raw:?} not in label mapping, kept as {class:?}"));
                }
                (Some(class), sub)
            }
            _ => (None, None),
        };

        for (part_id, poly) in parts {
            let exterior = poly
                .as_array()
                .and_then(|rings| rings.first())
                .ok_or_else(|| Error::Inventory(format!("{part_id}: polygon has no rings")))?;
            let ring = parse_ring(exterior).map_err(|e| match e {
                Error::Inventory(m) => Error::Inventory(format!("{part_id}: {m}")),
                other => other,
            })?;
            if !seen.insert(part_id.clone()) {
                out.rejected.push(Rejection {
                    id: part_id,
                    reason: "duplicate id".into(),
                });
                continue;
            }
            match GeoPolygon::new(ring) {
                Ok((polygon, auto_closed)) => {
                    if auto_closed {
                        out.warnings.push(format!("{part_id}: ring was not closed, closed it"));
                    }
                    out.records.push(InventoryRecord {
                        id: part_id,
                        polygon,
                        label: label.clone(),
                        sublabel: sublabel.clone(),
                        properties: props.clone(),
                    });
                }
                Err(e) => out.rejected.push(Rejection {
                    id: part_id,
                    reason: e.to_string(),
                }),
            }
        }
    }
    Ok(out)
}

/// Writes records as a FeatureCollection. Labels are written under
/// `label_key`; the source properties are preserved.
pub fn write_inventory<W: Write>(
    mut w: W,
    records: &[InventoryRecord],
    label_key: &str,
    coords: Option<CoordMode>,
) -> Result<()> {
    let features: Vec<Value> = records
        .iter()
        .map(|r| {
            let mut props = r.properties.clone();
            if let Some(label) = r.sublabel.as_ref().or(r.label.as_ref()) {
                props.insert(label_key.to_string(), Value::String(label.clone()));
            }
            let ring: Vec<Value> = r.polygon.ring().iter().map(|p| json!([p[0], p[1]])).collect();
            json!({
                "type": "Feature",
                "id": r.id,
                "properties": props,
                "geometry": {"type": "Polygon", "coordinates": [ring]},
            })
        })
        .collect();
    let mut doc = json!({"type": "FeatureCollection", "features": features});
    if let Some(c) = coords {
        doc["coords"] = serde_json::to_value(c)?;
    }
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    Ok(())
}
