use std::collections::HashMap;
use std::fmt::Write as _;

use super::{RoadStructure, DEFAULT_RESAMPLE_M};
use crate::error::{Error, Result};
use crate::geo::{mean_longitude, project_sinusoidal, resample_polyline, unproject_sinusoidal, LatLon, Point2};

/// Parses an OSM XML document into a road map resampled at 1 m.
pub fn parse_osm(document: &[u8]) -> Result<RoadStructure> {
    parse_osm_with(document, DEFAULT_RESAMPLE_M)
}

/// Like [`parse_osm`] with an explicit knot spacing.
///
/// Every way carrying a `highway` tag becomes one road, except ways tagged
/// `area=yes`. The whole map is projected around its own mean longitude.
pub fn parse_osm_with(document: &[u8], spacing: f64) -> Result<RoadStructure> {
    let text = std::str::from_utf8(document).map_err(|e| Error::Xml {
        offset: e.valid_up_to(),
        message: "document is not valid UTF-8".into(),
    })?;
    let doc = roxmltree::Document::parse(text).map_err(|e| {
        let pos = e.pos();
        Error::Xml {
            offset: byte_offset(text, pos.row as usize, pos.col as usize),
            message: e.to_string(),
        }
    })?;

    let mut nodes: HashMap<&str, LatLon> = HashMap::new();
    for node in doc.descendants().filter(|n| n.has_tag_name("node")) {
        let Some(id) = node.attribute("id") else { continue };
        let coord = |name: &str| -> Result<f64> {
            node.attribute(name)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::Xml {
                    offset: node.range().start,
                    message: format!("node {id} has missing or invalid {name}"),
                })
        };
        nodes.insert(id, LatLon::new(coord("lat")?, coord("lon")?));
    }

    let mut ways: Vec<Vec<LatLon>> = Vec::new();
    for way in doc.descendants().filter(|n| n.has_tag_name("way")) {
        let mut highway = false;
        let mut area = false;
        for tag in way.children().filter(|c| c.has_tag_name("tag")) {
            match (tag.attribute("k"), tag.attribute("v")) {
                (Some("highway"), Some(_)) => highway = true,
                (Some("area"), Some("yes")) => area = true,
                _ => {}
            }
        }
        if !highway || area {
            continue;
        }
        let way_id = way.attribute("id").unwrap_or("?");
        let mut knots = Vec::new();
        for nd in way.children().filter(|c| c.has_tag_name("nd")) {
            let Some(r) = nd.attribute("ref") else { continue };
            let ll = nodes.get(r).ok_or_else(|| Error::MissingNode {
                way: way_id.to_string(),
                node: r.to_string(),
            })?;
            knots.push(*ll);
        }
        ways.push(knots);
    }

    let all: Vec<LatLon> = ways.iter().flatten().copied().collect();
    let Some(lon0) = mean_longitude(&all) else {
        return Err(Error::EmptyMap);
    };
    let mut roads = Vec::with_capacity(ways.len());
    for way in &ways {
        let projected = project_sinusoidal(way, Some(lon0))?;
        let mut knots: Vec<Point2> = Vec::with_capacity(projected.len());
        for p in projected {
            if knots.last() != Some(&p) {
                knots.push(p);
            }
        }
        // Single-knot ways carry no road geometry.
        if knots.len() >= 2 {
            roads.push(resample_polyline(&knots, spacing)?);
        }
    }
    if roads.is_empty() {
        return Err(Error::EmptyMap);
    }
    Ok(RoadStructure {
        name: String::new(),
        roads,
        area_acres: None,
        central_meridian: Some(lon0),
    })
}

fn byte_offset(text: &str, row: usize, col: usize) -> usize {
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if i + 1 == row {
            return offset
                + line
                    .char_indices()
                    .nth(col.saturating_sub(1))
                    .map_or(line.len(), |(b, _)| b);
        }
        offset += line.len();
    }
    text.len()
}

/// Writes local-meter polylines as an OSM document, placing the local
/// origin at `anchor`. Each polyline becomes a `highway=service` way.
pub fn write_osm(polylines: &[Vec<Point2>], anchor: LatLon) -> String {
    let lat0 = anchor.lat.to_radians() * crate::geo::EARTH_RADIUS_M;
    let mut out =
        String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\" generator=\"pgeval\">\n");
    let mut next_id = 1u64;
    let mut ways = String::new();
    for (w, line) in polylines.iter().enumerate() {
        let shifted: Vec<Point2> = line.iter().map(|p| Point2::new(p.x, p.y + lat0)).collect();
        let ll = unproject_sinusoidal(&shifted, anchor.lon);
        let _ = writeln!(ways, "  <way id=\"{}\">", w + 1);
        for p in ll {
            let _ = writeln!(
                out,
                "  <node id=\"{next_id}\" lat=\"{:.9}\" lon=\"{:.9}\"/>",
                p.lat, p.lon
            );
            let _ = writeln!(ways, "    <nd ref=\"{next_id}\"/>");
            next_id += 1;
        }
        ways.push_str("    <tag k=\"highway\" v=\"service\"/>\n  </way>\n");
    }
    out.push_str(&ways);
    out.push_str("</osm>\n");
    out
}
