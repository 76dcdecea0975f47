//! The shipped data files load cleanly and the reference-map node counts
//! are enforced.

use std::path::{Path, PathBuf};

use estmap::geo::Gazetteer;
use estmap::overlay::{Basemap, OverlayError};
use estmap::record::{CodeScheme, Store};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn reference_mesh_basemap_has_822_terms() {
    let map = Basemap::load(&data_dir().join("basemaps/mesh.json")).unwrap();
    assert!(map.reference);
    assert_eq!(map.scheme, CodeScheme::Mesh);
    assert_eq!(map.nodes.len(), 822);
    // Every node sits on one of the three mapped branches.
    for node in &map.nodes {
        assert!(matches!(node.branch, Some('C' | 'D' | 'E')), "{:?}", node.code);
    }
}

#[test]
fn reference_category_basemap_has_225_categories() {
    let map = Basemap::load(&data_dir().join("basemaps/wos_categories.json")).unwrap();
    assert!(map.reference);
    assert_eq!(map.nodes.len(), 225);
}

#[test]
fn journal_reference_count_is_enforced() {
    // A reference journal map must have 10,330 nodes: a generated file of
    // exactly that size loads, anything else is rejected.
    let dir = tempfile::tempdir().unwrap();
    let nodes: Vec<serde_json::Value> = (0..10_330)
        .map(|i| {
            serde_json::json!({
                "code": format!("J{i:05}"),
                "label": format!("Journal {i:05}"),
                "cluster": i % 12,
                "x": (i % 100) as f64,
                "y": (i / 100) as f64,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "id": "journals-ref",
        "scheme": "journal",
        "reference": true,
        "nodes": nodes,
        "edges": [],
    });
    let good = dir.path().join("journals_full.json");
    std::fs::write(&good, serde_json::to_string(&doc).unwrap()).unwrap();
    let map = Basemap::load(&good).unwrap();
    assert_eq!(map.nodes.len(), 10_330);

    let mut short = doc.clone();
    short["nodes"].as_array_mut().unwrap().truncate(9_000);
    let bad = dir.path().join("journals_short.json");
    std::fs::write(&bad, serde_json::to_string(&short).unwrap()).unwrap();
    match Basemap::load(&bad).unwrap_err() {
        OverlayError::WrongReferenceCount { expected, found, .. } => {
            assert_eq!(expected, 10_330);
            assert_eq!(found, 9_000);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn demo_case_files_load() {
    let store = Store::load(&data_dir().join("cases/demo/store.jsonl")).unwrap();
    assert!(store.len() >= 500, "demo store has {} records", store.len());
    for record in store.iter() {
        record.validate().unwrap();
    }

    let mut gazetteer = Gazetteer::load(&data_dir().join("gazetteer.tsv")).unwrap();
    gazetteer
        .load_aliases(&data_dir().join("geo_aliases.tsv"))
        .unwrap();
    assert!(gazetteer.len() >= 50);

    let journals = Basemap::load(&data_dir().join("cases/demo/journals.json")).unwrap();
    assert!(journals.similarity.is_some(), "demo journal map carries the full matrix");
    let ipc = Basemap::load(&data_dir().join("basemaps/ipc.json")).unwrap();
    assert_eq!(ipc.scheme, CodeScheme::Ipc);
}
