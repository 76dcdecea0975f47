//! End-to-end checks of the individual subcommands and the exit-code
//! contract (0 ok, 1 usage, 2 input, 3 refusal).

use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/cases/demo/manifest.toml")
}

fn estmap(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_estmap"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn counts_total_matches_corpus_size() {
    let out = tempfile::tempdir().unwrap();
    let output = estmap(&[
        "counts",
        "--manifest",
        manifest_path().to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--db",
        "wos",
    ]);
    assert!(output.status.success());
    let line = String::from_utf8_lossy(&output.stdout);
    let summary: serde_json::Value = serde_json::from_str(line.lines().last().unwrap()).unwrap();
    let total = summary["total"].as_u64().unwrap();

    // Independent check: the tsv column sums to the same total.
    let tsv = std::fs::read_to_string(out.path().join("counts_wos.tsv")).unwrap();
    let sum: u64 = tsv
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(1).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(sum, total);
    assert!(total > 0);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(estmap(&["no-such-command"]).status.code(), Some(1));
    let out = estmap(&["netreport", "--manifest", manifest_path().to_str().unwrap(), "--db", "wos", "--level", "nation"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn input_errors_exit_2() {
    let out = estmap(&["counts", "--manifest", "/no/such/manifest.toml", "--db", "wos"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn translate_prints_one_line_per_target() {
    let output = estmap(&[
        "translate",
        "--query",
        "TI=TPMT or TI=\"Thiopurine Methyltransferase\"",
        "--emit",
        "pubmed",
        "--emit",
        "uspto",
        "--retarget",
    ]);
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(
        lines,
        vec![
            "TPMT[Title] or \"Thiopurine Methyltransferase\"[Title]",
            "ACLM/(TPMT or \"Thiopurine Methyltransferase\")",
        ]
    );
}

#[test]
fn ingest_round_trips_raw_fixtures() {
    // Copy the demo tree into a sandbox so ingest can rewrite the store.
    let dir = tempfile::tempdir().unwrap();
    let src_root = manifest_path().parent().unwrap().to_path_buf();
    let data_root = src_root.parent().unwrap().parent().unwrap();
    for sub in ["gazetteer.tsv", "geo_aliases.tsv"] {
        std::fs::copy(data_root.join(sub), dir.path().join(sub)).unwrap();
    }
    for sub in ["store.jsonl", "org_aliases.tsv", "journals.json", "manifest.toml"] {
        std::fs::copy(src_root.join(sub), dir.path().join(sub)).unwrap();
    }
    std::fs::create_dir_all(dir.path().join("basemaps")).unwrap();
    for sub in ["wos_categories.json", "mesh.json", "ipc.json"] {
        std::fs::copy(
            data_root.join("basemaps").join(sub),
            dir.path().join("basemaps").join(sub),
        )
        .unwrap();
    }
    // Rewrite the manifest paths for the flattened sandbox layout.
    let manifest = std::fs::read_to_string(dir.path().join("manifest.toml"))
        .unwrap()
        .replace("../../gazetteer.tsv", "gazetteer.tsv")
        .replace("../../geo_aliases.tsv", "geo_aliases.tsv")
        .replace("../../basemaps/", "basemaps/");
    std::fs::write(dir.path().join("manifest.toml"), manifest).unwrap();
    let sandbox_manifest = dir.path().join("manifest.toml");

    let raw = src_root.join("raw");
    let out = estmap(&[
        "ingest",
        "--manifest",
        sandbox_manifest.to_str().unwrap(),
        "--format",
        "medline",
        raw.join("sample_medline.txt").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let line = String::from_utf8_lossy(&out.stdout);
    let summary: serde_json::Value = serde_json::from_str(line.lines().last().unwrap()).unwrap();
    assert_eq!(summary["parsed"], 2);
    assert_eq!(summary["inserted"], 2);

    // Re-ingesting the same file replaces rather than duplicates.
    let again = estmap(&[
        "ingest",
        "--manifest",
        sandbox_manifest.to_str().unwrap(),
        "--format",
        "medline",
        raw.join("sample_medline.txt").to_str().unwrap(),
    ]);
    assert!(again.status.success());
    let line = String::from_utf8_lossy(&again.stdout);
    let summary: serde_json::Value = serde_json::from_str(line.lines().last().unwrap()).unwrap();
    assert_eq!(summary["inserted"], 0);
    assert_eq!(summary["replaced"], 2);

    // The patent fixture has one skip (filing year n/a) reported.
    let patents = estmap(&[
        "ingest",
        "--manifest",
        sandbox_manifest.to_str().unwrap(),
        "--format",
        "patent",
        raw.join("sample_patents.jsonl").to_str().unwrap(),
    ]);
    assert!(patents.status.success());
    assert!(String::from_utf8_lossy(&patents.stderr).contains("no usable filing year"));
}

#[test]
fn basemap_build_writes_a_loadable_map() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("matrix.tsv");
    std::fs::write(
        &matrix,
        "Alpha\tBeta\tGamma\n4\t3\t0\n3\t4\t0\n0\t0\t5\n",
    )
    .unwrap();
    let out_file = dir.path().join("map.json");
    let output = estmap(&[
        "basemap-build",
        "--matrix",
        matrix.to_str().unwrap(),
        "--scheme",
        "journal",
        "--out-file",
        out_file.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let map: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&out_file).unwrap()).unwrap();
    assert_eq!(map["nodes"].as_array().unwrap().len(), 3);
    assert!(map["similarity"].is_array());
}

#[test]
fn harvest_against_mock_server_ingests_records() {
    use estmap::harvest::mock::MockServer;

    let corpus: Vec<(String, String)> = (0..12)
        .map(|i| {
            (
                format!("medline:90{i:02}"),
                format!("PMID- 90{i:02}\nTI  - harvested siRNA record {i}\nDP  - 2005\n\n"),
            )
        })
        .collect();
    let server = MockServer::start(corpus).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let src_root = manifest_path().parent().unwrap().to_path_buf();
    let data_root = src_root.parent().unwrap().parent().unwrap();
    for sub in ["gazetteer.tsv", "geo_aliases.tsv"] {
        std::fs::copy(data_root.join(sub), dir.path().join(sub)).unwrap();
    }
    for sub in ["store.jsonl", "org_aliases.tsv", "journals.json"] {
        std::fs::copy(src_root.join(sub), dir.path().join(sub)).unwrap();
    }
    std::fs::create_dir_all(dir.path().join("basemaps")).unwrap();
    for sub in ["wos_categories.json", "mesh.json", "ipc.json"] {
        std::fs::copy(
            data_root.join("basemaps").join(sub),
            dir.path().join("basemaps").join(sub),
        )
        .unwrap();
    }
    let manifest = std::fs::read_to_string(src_root.join("manifest.toml"))
        .unwrap()
        .replace("../../gazetteer.tsv", "gazetteer.tsv")
        .replace("../../geo_aliases.tsv", "geo_aliases.tsv")
        .replace("../../basemaps/", "basemaps/");
    std::fs::write(dir.path().join("manifest.toml"), manifest).unwrap();

    let out = dir.path().join("out");
    let output = estmap(&[
        "harvest",
        "--manifest",
        dir.path().join("manifest.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--db",
        "medline",
        "--endpoint",
        server.url(),
        "--page-size",
        "5",
        "--rate",
        "200",
        "--ingest",
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    let last: serde_json::Value = serde_json::from_str(stdout.lines().last().unwrap()).unwrap();
    assert_eq!(last["event"], "harvest-ingest");
    assert_eq!(last["records"], 12);
    // 12 ids at page size 5 → 3 search pages spooled.
    assert!(std::fs::read_dir(out.join("harvest_medline")).unwrap().count() >= 3);
}
