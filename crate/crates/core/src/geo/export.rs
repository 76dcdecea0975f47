//! GeoJSON and KML writers for excellence maps and collaboration edges.

use serde_json::{json, Value};

use super::{GeoCollab, SiteStats};
use crate::scale::SizeScale;
use crate::xml::escape;

/// RFC 7946 FeatureCollection of site points with the test verdict and
/// style class in the properties.
pub fn export_geojson_sites(stats: &[SiteStats]) -> String {
    let features: Vec<Value> = stats
        .iter()
        .map(|s| {
            json!({
                "type": "Feature",
                "geometry": {
                    "type": "Point",
                    "coordinates": [s.site.lon, s.site.lat],
                },
                "properties": {
                    "city": s.site.city,
                    "country": s.site.country,
                    "n_total": s.n_total,
                    "n_top": s.n_top,
                    "expected": s.expected_top,
                    "chi2": s.chi2,
                    "significant": s.significant,
                    "direction": s.direction,
                    "validity_warning": s.validity_warning,
                    "style": s.style().name(),
                },
            })
        })
        .collect();
    let doc = json!({ "type": "FeatureCollection", "features": features });
    serde_json::to_string_pretty(&doc).expect("geojson serialises")
}

/// FeatureCollection mixing city points (sized by the log rule) and
/// co-authorship LineStrings weighted by shared records.
pub fn export_geojson_edges(collab: &GeoCollab, scale: &SizeScale) -> String {
    let max_count = collab.city_counts.values().copied().max().unwrap_or(0);
    let mut features: Vec<Value> = Vec::new();
    for (key, site) in &collab.sites {
        let count = collab.city_counts.get(key).copied().unwrap_or(0);
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "Point", "coordinates": [site.lon, site.lat] },
            "properties": {
                "city": site.city,
                "country": site.country,
                "articles": count,
                "radius": round3(scale.radius(count, max_count)),
            },
        }));
    }
    for ((a, b), weight) in &collab.edges {
        let sa = &collab.sites[a];
        let sb = &collab.sites[b];
        features.push(json!({
            "type": "Feature",
            "geometry": {
                "type": "LineString",
                "coordinates": [[sa.lon, sa.lat], [sb.lon, sb.lat]],
            },
            "properties": { "a": a, "b": b, "weight": weight },
        }));
    }
    let doc = json!({ "type": "FeatureCollection", "features": features });
    serde_json::to_string_pretty(&doc).expect("geojson serialises")
}

/// KML 2.2 document with one shared style per class and one placemark per
/// site.
pub fn export_kml(stats: &[SiteStats]) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<kml xmlns=\"http://www.opengis.net/kml/2.2\">\n<Document>\n");
    for (name, color) in [
        // KML colors are aabbggrr.
        ("dark_green", "ff006400"),
        ("light_green", "ff90ee90"),
        ("red", "ff2827d6"),
        ("orange", "ff008cff"),
    ] {
        out.push_str(&format!(
            "  <Style id=\"{name}\"><IconStyle><color>{color}</color></IconStyle></Style>\n"
        ));
    }
    for s in stats {
        out.push_str("  <Placemark>\n");
        out.push_str(&format!("    <name>{}</name>\n", escape(&s.site.key())));
        out.push_str(&format!(
            "    <description>articles {}; top-cited {} (expected {:.2}); chi2 {:.3}</description>\n",
            s.n_total, s.n_top, s.expected_top, s.chi2
        ));
        out.push_str(&format!("    <styleUrl>#{}</styleUrl>\n", s.style().name()));
        out.push_str(&format!(
            "    <Point><coordinates>{},{},0</coordinates></Point>\n",
            s.site.lon, s.site.lat
        ));
        out.push_str("  </Placemark>\n");
    }
    out.push_str("</Document>\n</kml>\n");
    out
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}
