//! Acceptance: the full `report` pipeline on the bundled case study is
//! fast, byte-for-byte deterministic, schema-valid, and refuses the
//! too-small patent window.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

fn manifest_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/cases/demo/manifest.toml")
}

fn run_report(out: &Path) -> Duration {
    let started = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_estmap"))
        .args([
            "report",
            "--manifest",
            manifest_path().to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "report failed");
    started.elapsed()
}

fn tree_bytes(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

// --- lightweight schema validators -----------------------------------

fn check_geojson(bytes: &[u8], name: &str) {
    let doc: serde_json::Value = serde_json::from_slice(bytes)
        .unwrap_or_else(|e| panic!("{name}: invalid JSON: {e}"));
    assert_eq!(doc["type"], "FeatureCollection", "{name}: type");
    let features = doc["features"].as_array().unwrap_or_else(|| panic!("{name}: features"));
    for feature in features {
        assert_eq!(feature["type"], "Feature", "{name}");
        assert!(feature["properties"].is_object(), "{name}: properties");
        let geometry = &feature["geometry"];
        let coords = geometry["coordinates"].as_array().unwrap();
        match geometry["type"].as_str().unwrap() {
            "Point" => {
                let lon = coords[0].as_f64().unwrap();
                let lat = coords[1].as_f64().unwrap();
                assert!((-180.0..=180.0).contains(&lon), "{name}: lon {lon}");
                assert!((-90.0..=90.0).contains(&lat), "{name}: lat {lat}");
            }
            "LineString" => {
                assert!(coords.len() >= 2, "{name}: line needs 2+ positions");
                for pos in coords {
                    assert!(pos.as_array().unwrap().len() >= 2, "{name}: position");
                }
            }
            other => panic!("{name}: unexpected geometry {other}"),
        }
    }
}

/// Minimal well-formedness: tags balance and expected elements appear.
fn check_xml(bytes: &[u8], name: &str, required: &[&str]) {
    let text = std::str::from_utf8(bytes).unwrap_or_else(|_| panic!("{name}: not UTF-8"));
    let mut stack: Vec<String> = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        let after = &rest[open + 1..];
        let close = after.find('>').unwrap_or_else(|| panic!("{name}: unclosed tag"));
        let tag = &after[..close];
        rest = &after[close + 1..];
        if tag.starts_with('?') || tag.starts_with('!') {
            continue;
        }
        if let Some(end_name) = tag.strip_prefix('/') {
            let opened = stack.pop().unwrap_or_else(|| panic!("{name}: stray </{end_name}>"));
            assert_eq!(opened, end_name.trim(), "{name}: mismatched close tag");
        } else if !tag.ends_with('/') {
            let tag_name = tag.split_whitespace().next().unwrap_or(tag);
            stack.push(tag_name.to_string());
        }
    }
    assert!(stack.is_empty(), "{name}: unclosed elements {stack:?}");
    for element in required {
        assert!(text.contains(&format!("<{element}")), "{name}: missing <{element}>");
    }
}

#[test]
fn criterion_10_report_determinism_and_schemas() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();

    let elapsed_a = run_report(dir_a.path());
    let elapsed_b = run_report(dir_b.path());
    assert!(
        elapsed_a < Duration::from_secs(10) && elapsed_b < Duration::from_secs(10),
        "report too slow: {elapsed_a:?} / {elapsed_b:?}"
    );

    // Byte-identical output trees across the two runs.
    let tree_a = tree_bytes(dir_a.path());
    let tree_b = tree_bytes(dir_b.path());
    assert_eq!(
        tree_a.keys().collect::<Vec<_>>(),
        tree_b.keys().collect::<Vec<_>>(),
        "file sets differ"
    );
    for (path, bytes) in &tree_a {
        assert_eq!(bytes, &tree_b[path], "{path} differs between runs");
    }
    assert!(!tree_a.is_empty());

    // Every artifact listed in the index exists; the 11-record patent
    // window is recorded as refused.
    let index: serde_json::Value =
        serde_json::from_slice(&tree_a["index.json"]).expect("index.json parses");
    let artifacts = index["artifacts"].as_array().unwrap();
    let mut refused = 0;
    for artifact in artifacts {
        let status = artifact["status"].as_str().unwrap();
        let path = artifact["path"].as_str().unwrap();
        if status == "ok" {
            assert!(tree_a.contains_key(path), "indexed artifact {path} missing");
        } else {
            assert!(status.starts_with("refused"), "unexpected status {status}");
            refused += 1;
            assert_eq!(artifact["db"], "uspto");
            assert_eq!(artifact["window"], "1998-2001");
        }
    }
    assert_eq!(refused, 1, "exactly the 11-record patent window refuses");

    // Schema validation for every structured artifact.
    let mut checked = 0;
    for (path, bytes) in &tree_a {
        if path.ends_with(".geojson") {
            check_geojson(bytes, path);
            checked += 1;
        } else if path.ends_with(".graphml") {
            check_xml(bytes, path, &["graphml", "graph", "node"]);
            checked += 1;
        } else if path.ends_with(".svg") {
            check_xml(bytes, path, &["svg"]);
            checked += 1;
        } else if path.ends_with(".kml") {
            check_xml(bytes, path, &["kml", "Document", "Placemark", "Style"]);
            checked += 1;
        } else if path.ends_with(".json") {
            let _: serde_json::Value = serde_json::from_slice(bytes)
                .unwrap_or_else(|e| panic!("{path}: invalid JSON: {e}"));
            checked += 1;
        }
    }
    assert!(checked > 30, "only {checked} artifacts validated");

    println!("acceptance: 10 report determinism and schema validation: PASS ({checked} artifacts, {elapsed_a:?})");
}

#[test]
fn criterion_10_small_sample_refusal_exit_code() {
    let out = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_estmap"))
        .args([
            "geomap",
            "--manifest",
            manifest_path().to_str().unwrap(),
            "--out",
            out.path().to_str().unwrap(),
            "--db",
            "uspto",
            "--window",
            "1998-2001",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "refusal must exit 3");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("sample too small"), "stderr: {stderr}");
    println!("acceptance: 10b small-sample geomap refusal exits 3: PASS");
}
