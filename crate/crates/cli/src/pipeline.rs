//! Subcommand implementations and the full `report` pipeline.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use estmap::geo::{
    collab_geo_edges, excellence_map, export_geojson_edges, export_geojson_sites, export_kml,
    ExcellenceConfig, Gazetteer, GeoError,
};
use estmap::network::{
    build_coauthorship, component_report, export_graphml, export_network_svg, stress_layout,
    top_central, AliasMap, ComponentReport, NodeKind, StressOptions,
};
use estmap::overlay::{
    animate_frames, density_map, project_overlay, rao_stirling, Basemap, OverlayFrame,
    ProjectOptions,
};
use estmap::query::{delineate, parse_query, Dialect, QueryAst};
use estmap::record::{
    window_partition, yearly_counts, CodeScheme, Corpus, Record, SourceDb, Store, Window,
    WindowSpec,
};
use estmap::scale::{ScaleRule, SizeScale};

use crate::manifest::Manifest;

pub struct CaseContext {
    pub manifest: Manifest,
    pub store: Store,
    pub gazetteer: Gazetteer,
    pub org_aliases: AliasMap,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl CaseContext {
    pub fn load(manifest_path: &Path, out_override: Option<&Path>, seed_override: Option<u64>) -> Result<CaseContext> {
        let manifest = Manifest::load(manifest_path)?;
        let store = Store::load(&manifest.store_path())
            .with_context(|| format!("loading store {}", manifest.store_path().display()))?;
        let mut gazetteer = Gazetteer::load(&manifest.resolve(&manifest.paths.gazetteer))?;
        if let Some(aliases) = &manifest.paths.geo_aliases {
            gazetteer.load_aliases(&manifest.resolve(aliases))?;
        }
        let org_aliases = match &manifest.paths.org_aliases {
            Some(path) => AliasMap::load(&manifest.resolve(path))?,
            None => AliasMap::default(),
        };
        let out_dir = out_override
            .map(Path::to_path_buf)
            .unwrap_or_else(|| manifest.resolve(&manifest.case.output_dir));
        let seed = seed_override.unwrap_or(manifest.case.seed);
        Ok(CaseContext {
            manifest,
            store,
            gazetteer,
            org_aliases,
            out_dir,
            seed,
        })
    }

    pub fn basemap(&self, scheme: CodeScheme) -> Result<Basemap> {
        let path = self
            .manifest
            .basemaps
            .get(&scheme.to_string())
            .ok_or_else(|| anyhow!("manifest has no {scheme} basemap"))?;
        Ok(Basemap::load(&self.manifest.resolve(path))?)
    }

    pub fn corpus(&self, db: SourceDb) -> Result<Corpus> {
        let query = self
            .manifest
            .query_for(db)
            .ok_or_else(|| anyhow!("manifest has no query for {db}"))?;
        let ast = parse_query(query, Dialect::Canonical)?;
        Ok(self.delineate_with(db, &ast))
    }

    pub fn delineate_with(&self, db: SourceDb, ast: &QueryAst) -> Corpus {
        delineate(
            &self.store,
            ast,
            (self.manifest.years.from, self.manifest.years.to),
            Some(db),
            &format!("{}-{db}", self.manifest.case.name),
            &self.manifest.case.retrieved_on,
        )
    }

    pub fn window_spec(&self) -> WindowSpec {
        WindowSpec {
            width_years: self.manifest.windows.width,
            anchor_year: self.manifest.windows.anchor,
            first_window_override: self.manifest.first_override(),
        }
    }

    pub fn windowed_records(&self, corpus: &Corpus) -> Result<Vec<(Window, Vec<&Record>)>> {
        let part = window_partition(&self.store, corpus, &self.window_spec())?;
        Ok(part
            .windows
            .iter()
            .map(|(window, ids)| {
                let records = ids.iter().filter_map(|id| self.store.get(id)).collect();
                (*window, records)
            })
            .collect())
    }

    pub fn excellence_config(&self, db: SourceDb) -> ExcellenceConfig {
        let mut config = match db {
            SourceDb::Uspto => ExcellenceConfig::patents(),
            _ => ExcellenceConfig::publications(),
        };
        config.top_share = self.manifest.top_share(db);
        config.alpha = self.manifest.thresholds.alpha;
        config
    }
}

/// Atomic write: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp-write");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes one line to standard output, exiting quietly when the reader
/// has gone away (a closed pipe is not an error for a filter).
pub fn emit_stdout(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
    }
}

pub fn summary(event: &str, fields: serde_json::Value) {
    let mut obj = json!({ "event": event });
    if let (Some(map), Some(extra)) = (obj.as_object_mut(), fields.as_object()) {
        for (k, v) in extra {
            map.insert(k.clone(), v.clone());
        }
    }
    emit_stdout(&format!("{obj}\n"));
}

// ------------------------------------------------------------- subcommands

pub fn cmd_ingest(ctx: &mut CaseContext, format: &str, files: &[PathBuf]) -> Result<()> {
    for file in files {
        let reader = std::fs::File::open(file)
            .with_context(|| format!("opening {}", file.display()))?;
        let parsed = match format {
            "medline" => estmap::record::parse_medline(reader)?,
            "wos" => estmap::record::parse_wos_export(reader)?,
            "patent" => estmap::record::parse_patent_file(reader)?,
            other => bail!("unknown ingest format {other}"),
        };
        for warning in &parsed.warnings {
            eprintln!("warning: {warning}");
        }
        let count = parsed.records.len();
        let report = ctx.store.upsert(parsed.records);
        summary(
            "ingest",
            json!({
                "file": file.display().to_string(),
                "parsed": count,
                "inserted": report.inserted,
                "replaced": report.replaced,
            }),
        );
    }
    ctx.store.save(&ctx.manifest.store_path())?;
    Ok(())
}

pub fn cmd_delineate(ctx: &CaseContext, db: Option<SourceDb>) -> Result<()> {
    let dbs = match db {
        Some(db) => vec![db],
        None => ctx.manifest.dbs(),
    };
    for db in dbs {
        let corpus = ctx.corpus(db)?;
        let path = ctx.out_dir.join(format!("corpus_{db}.json"));
        write_atomic(&path, serde_json::to_string_pretty(&corpus)?.as_bytes())?;
        summary(
            "delineate",
            json!({ "db": db.to_string(), "records": corpus.len(), "path": path.display().to_string() }),
        );
    }
    Ok(())
}

pub fn cmd_windows(ctx: &CaseContext, db: SourceDb) -> Result<()> {
    let corpus = ctx.corpus(db)?;
    let part = window_partition(&ctx.store, &corpus, &ctx.window_spec())?;
    let path = ctx.out_dir.join(format!("windows_{db}.json"));
    write_atomic(&path, serde_json::to_string_pretty(&part)?.as_bytes())?;
    for (window, ids) in &part.windows {
        summary(
            "window",
            json!({ "db": db.to_string(), "window": window.to_string(), "records": ids.len() }),
        );
    }
    summary(
        "windows",
        json!({ "db": db.to_string(), "excluded": part.excluded.len(), "path": path.display().to_string() }),
    );
    Ok(())
}

fn counts_tsv(counts: &BTreeMap<i32, usize>) -> String {
    let mut out = String::from("year\tcount\n");
    for (year, count) in counts {
        let _ = writeln!(out, "{year}\t{count}");
    }
    out
}

pub fn cmd_counts(ctx: &CaseContext, db: SourceDb) -> Result<()> {
    let corpus = ctx.corpus(db)?;
    let counts = yearly_counts(&ctx.store, &corpus);
    let path = ctx.out_dir.join(format!("counts_{db}.tsv"));
    write_atomic(&path, counts_tsv(&counts).as_bytes())?;
    summary(
        "counts",
        json!({
            "db": db.to_string(),
            "total": counts.values().sum::<usize>(),
            "years": counts.len(),
            "path": path.display().to_string(),
        }),
    );
    Ok(())
}

pub fn cmd_trends(ctx: &CaseContext, db_a: SourceDb, db_b: SourceDb) -> Result<()> {
    let a = ctx.corpus(db_a)?;
    let b = ctx.corpus(db_b)?;
    let cmp = estmap::record::compare_trends(&ctx.store, &a, &b);
    let mut tsv = format!("year\t{db_a}\t{db_b}\n");
    for i in 0..cmp.years.len() {
        let _ = writeln!(tsv, "{}\t{}\t{}", cmp.years[i], cmp.series_a[i], cmp.series_b[i]);
    }
    let path = ctx.out_dir.join(format!("trends_{db_a}_vs_{db_b}.tsv"));
    write_atomic(&path, tsv.as_bytes())?;
    summary(
        "trends",
        json!({ "a": db_a.to_string(), "b": db_b.to_string(), "path": path.display().to_string() }),
    );
    Ok(())
}

fn find_window(ctx: &CaseContext, corpus: &Corpus, label: &str) -> Result<(Window, Vec<String>)> {
    let part = window_partition(&ctx.store, corpus, &ctx.window_spec())?;
    part.windows
        .into_iter()
        .find(|(w, _)| w.to_string() == label)
        .ok_or_else(|| anyhow!("window {label} not in the partition"))
}

pub fn cmd_geomap(
    ctx: &CaseContext,
    db: SourceDb,
    label: &str,
    formats: &FormatFilter,
) -> std::result::Result<(), crate::CliError> {
    let corpus = ctx.corpus(db).map_err(crate::CliError::input)?;
    let (window, ids) = find_window(ctx, &corpus, label).map_err(crate::CliError::usage_from)?;
    let records: Vec<&Record> = ids.iter().filter_map(|id| ctx.store.get(id)).collect();
    let geocoded = records
        .iter()
        .filter(|r| !estmap::geo::record_sites(r, &ctx.gazetteer).is_empty())
        .count();
    let config = ctx.excellence_config(db);
    match excellence_map(&records, &ctx.gazetteer, &config) {
        Ok(stats) => {
            let base = ctx.out_dir.join(format!("geomap_{db}_{window}"));
            if formats.wants("geojson") {
                write_atomic(&base.with_extension("geojson"), export_geojson_sites(&stats).as_bytes())
                    .map_err(crate::CliError::input)?;
            }
            if formats.wants("kml") {
                write_atomic(&base.with_extension("kml"), export_kml(&stats).as_bytes())
                    .map_err(crate::CliError::input)?;
            }
            summary(
                "geomap",
                json!({
                    "db": db.to_string(),
                    "window": window.to_string(),
                    "sites": stats.len(),
                    "significant": stats.iter().filter(|s| s.significant).count(),
                    "skipped_ungeocoded": records.len() - geocoded,
                }),
            );
            Ok(())
        }
        Err(GeoError::SampleTooSmall { have, need }) => Err(crate::CliError::Refusal(format!(
            "sample too small: {have} geocoded records in {window}, need {need}"
        ))),
        Err(e) => Err(crate::CliError::input(e)),
    }
}

/// Which export formats a subcommand writes; empty means all of them.
#[derive(Debug, Default)]
pub struct FormatFilter(pub Vec<String>);

impl FormatFilter {
    pub fn wants(&self, format: &str) -> bool {
        self.0.is_empty() || self.0.iter().any(|f| f == format)
    }
}

pub fn cmd_collabmap(ctx: &CaseContext, db: SourceDb, label: &str, formats: &FormatFilter) -> Result<()> {
    let corpus = ctx.corpus(db)?;
    let (window, ids) = find_window(ctx, &corpus, label)?;
    let records: Vec<&Record> = ids.iter().filter_map(|id| ctx.store.get(id)).collect();
    write_collabmap_filtered(ctx, db, window, &records, formats)?;
    Ok(())
}

fn write_collabmap(ctx: &CaseContext, db: SourceDb, window: Window, records: &[&Record]) -> Result<usize> {
    write_collabmap_filtered(ctx, db, window, records, &FormatFilter::default())
}

fn write_collabmap_filtered(
    ctx: &CaseContext,
    db: SourceDb,
    window: Window,
    records: &[&Record],
    formats: &FormatFilter,
) -> Result<usize> {
    let collab = collab_geo_edges(records, &ctx.gazetteer);
    let scale = SizeScale::new(ScaleRule::Log10Plus1, 2.0, 14.0);
    let base = ctx.out_dir.join(format!("collab_cities_{db}_{window}"));
    if formats.wants("geojson") {
        write_atomic(
            &base.with_extension("geojson"),
            export_geojson_edges(&collab, &scale).as_bytes(),
        )?;
    }

    let (graph, skipped) =
        build_coauthorship(records, NodeKind::City, &ctx.gazetteer, &ctx.org_aliases);
    let layout = stress_layout(&graph, ctx.seed, &StressOptions::default());
    if formats.wants("graphml") {
        write_atomic(
            &base.with_extension("graphml"),
            export_graphml(&graph, &layout.coords).as_bytes(),
        )?;
    }
    if formats.wants("svg") {
        let top = top_central(&graph, 0.05);
        write_atomic(
            &base.with_extension("svg"),
            export_network_svg(&graph, &layout.coords, &scale, &top.labels).as_bytes(),
        )?;
    }
    summary(
        "collabmap",
        json!({
            "db": db.to_string(),
            "window": window.to_string(),
            "cities": collab.city_counts.len(),
            "edges": collab.edges.len(),
            "skipped_unlocated": skipped,
        }),
    );
    Ok(collab.city_counts.len())
}

fn render_netreport_table(reports: &[ComponentReport]) -> String {
    let mut out = String::new();
    let headers = ["window", "articles", "nodes", "ties", "weight", "comps>=4", "giant", "isolated"];
    let mut rows: Vec<Vec<String>> = vec![headers.iter().map(|s| s.to_string()).collect()];
    for r in reports {
        rows.push(vec![
            r.window.to_string(),
            r.n_articles.to_string(),
            r.n_nodes.to_string(),
            r.n_ties.to_string(),
            r.total_tie_weight.to_string(),
            r.n_components_min4.to_string(),
            format!("{}", r.giant_share),
            format!("{}", r.isolated_share),
        ]);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:>width$}", width = widths[c]))
            .collect();
        out.push_str(&line.join("  "));
        out.push('\n');
    }
    out
}

pub fn cmd_netreport(ctx: &CaseContext, db: SourceDb, level: NodeKind) -> Result<Vec<ComponentReport>> {
    let corpus = ctx.corpus(db)?;
    let windows = ctx.windowed_records(&corpus)?;
    let mut reports = Vec::new();
    let level_name = match level {
        NodeKind::City => "city",
        NodeKind::Org => "org",
    };
    for (idx, (window, records)) in windows.iter().enumerate() {
        let (graph, _skipped) =
            build_coauthorship(records, level, &ctx.gazetteer, &ctx.org_aliases);
        let report = component_report(&graph, *window, records.len(), 4);
        reports.push(report);

        let layout = stress_layout(&graph, ctx.seed.wrapping_add(idx as u64), &StressOptions::default());
        let scale = SizeScale::new(ScaleRule::Log10Plus1, 2.0, 14.0);
        let top = top_central(&graph, 0.05);
        let base = ctx
            .out_dir
            .join(format!("network_{level_name}_{db}_{window}"));
        write_atomic(
            &base.with_extension("graphml"),
            export_graphml(&graph, &layout.coords).as_bytes(),
        )?;
        write_atomic(
            &base.with_extension("svg"),
            export_network_svg(&graph, &layout.coords, &scale, &top.labels).as_bytes(),
        )?;
    }
    let table = render_netreport_table(&reports);
    emit_stdout(&table);
    let base = ctx.out_dir.join(format!("netreport_{level_name}_{db}"));
    write_atomic(&base.with_extension("txt"), table.as_bytes())?;
    write_atomic(
        &base.with_extension("json"),
        serde_json::to_string_pretty(&reports)?.as_bytes(),
    )?;
    summary(
        "netreport",
        json!({ "db": db.to_string(), "level": level_name, "windows": reports.len() }),
    );
    Ok(reports)
}

pub fn cmd_overlay(
    ctx: &CaseContext,
    db: SourceDb,
    scheme: CodeScheme,
    with_density: bool,
) -> Result<Vec<OverlayFrame>> {
    let corpus = ctx.corpus(db)?;
    let basemap = ctx.basemap(scheme)?;
    let windows = ctx.windowed_records(&corpus)?;
    let mut frames = Vec::new();
    for (window, records) in &windows {
        let (frame, reports) =
            project_overlay(records, &basemap, *window, &ProjectOptions::default())?;
        for report in reports {
            eprintln!("warning: {report}");
        }
        frames.push(frame);
    }
    let exports = animate_frames(&frames, &basemap, 2.0)?;
    for export in &exports {
        let stem = export.file_stem(&format!("overlay_{scheme}_{db}"));
        write_atomic(&ctx.out_dir.join(format!("{stem}.svg")), export.svg.as_bytes())?;
        write_atomic(&ctx.out_dir.join(format!("{stem}.json")), export.json.as_bytes())?;
    }
    if with_density {
        for (seq, frame) in frames.iter().enumerate() {
            let grid = density_map(
                frame,
                &basemap,
                density_bandwidth(&basemap),
                estmap::overlay::DEFAULT_DENSITY_RESOLUTION,
            );
            let path = ctx
                .out_dir
                .join(format!("density_{scheme}_{db}_{seq:03}.txt"));
            write_atomic(&path, grid.to_text().as_bytes())?;
        }
    }
    summary(
        "overlay",
        json!({
            "db": db.to_string(),
            "scheme": scheme.to_string(),
            "windows": frames.len(),
            "active_codes": frames.iter().map(|f| f.counts.len()).sum::<usize>(),
        }),
    );
    Ok(frames)
}

/// Bandwidth proportional to the basemap extent keeps heatmaps readable
/// across differently scaled maps.
fn density_bandwidth(basemap: &Basemap) -> f64 {
    let (mut min_x, mut min_y, mut max_x, mut max_y) =
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for n in &basemap.nodes {
        min_x = min_x.min(n.x);
        min_y = min_y.min(n.y);
        max_x = max_x.max(n.x);
        max_y = max_y.max(n.y);
    }
    if basemap.nodes.is_empty() {
        1.0
    } else {
        ((max_x - min_x).max(max_y - min_y) / 20.0).max(1e-6)
    }
}

pub fn cmd_diversity(ctx: &CaseContext, db: SourceDb, scheme: CodeScheme) -> Result<()> {
    let corpus = ctx.corpus(db)?;
    let basemap = ctx.basemap(scheme)?;
    let distances = basemap.distance_matrix().ok_or_else(|| {
        anyhow!("{scheme} basemap has no similarity matrix; diversity needs the full matrix")
    })?;
    let windows = ctx.windowed_records(&corpus)?;
    let mut reports = Vec::new();
    for (window, records) in &windows {
        let (frame, _) = project_overlay(records, &basemap, *window, &ProjectOptions::default())?;
        if frame.total_count() == 0 {
            continue;
        }
        let report = rao_stirling(&frame, &basemap, &distances)?;
        summary(
            "diversity",
            json!({
                "db": db.to_string(),
                "scheme": scheme.to_string(),
                "window": window.to_string(),
                "delta": report.delta,
                "convention": report.convention,
            }),
        );
        reports.push(report);
    }
    let path = ctx.out_dir.join(format!("diversity_{scheme}_{db}.json"));
    write_atomic(&path, serde_json::to_string_pretty(&reports)?.as_bytes())?;
    Ok(())
}

pub fn cmd_basemap_build(
    matrix_path: &Path,
    scheme: CodeScheme,
    out_file: &Path,
    threshold: f64,
    seed: u64,
) -> Result<()> {
    let text = std::fs::read_to_string(matrix_path)
        .with_context(|| format!("reading matrix {}", matrix_path.display()))?;
    let mut lines = text.lines();
    let labels: Vec<String> = lines
        .next()
        .ok_or_else(|| anyhow!("matrix file is empty"))?
        .split('\t')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split('\t')
            .map(|cell| cell.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("matrix row {}", idx + 2))?;
        if row.len() != labels.len() {
            bail!("matrix row {} has {} cells, expected {}", idx + 2, row.len(), labels.len());
        }
        rows.push(row);
    }
    if rows.len() != labels.len() {
        bail!("matrix has {} rows for {} labels", rows.len(), labels.len());
    }
    let (basemap, warnings) = estmap::overlay::build_basemap(&labels, &rows, scheme, seed, threshold)?;
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
    basemap.save(out_file)?;
    summary(
        "basemap-build",
        json!({
            "scheme": scheme.to_string(),
            "nodes": basemap.nodes.len(),
            "edges": basemap.edges.len(),
            "path": out_file.display().to_string(),
        }),
    );
    Ok(())
}

pub fn cmd_translate(query: &str, dialect: Dialect, emit: &[Dialect], retarget: bool) -> Result<()> {
    let ast = parse_query(query, dialect)?;
    for &target in emit {
        let text = estmap::query::emit_query(&ast, target, retarget)?;
        emit_stdout(&format!("{text}\n"));
    }
    Ok(())
}

// ------------------------------------------------------------------ report

struct IndexEntry {
    path: String,
    kind: &'static str,
    db: Option<SourceDb>,
    window: Option<String>,
    status: String,
}

/// Runs the full pipeline and writes an index of every artifact. Refusals
/// (small samples) are recorded, not fatal, so the bundle is complete.
pub fn cmd_report(ctx: &CaseContext) -> Result<()> {
    let mut index: Vec<IndexEntry> = Vec::new();
    let push = |index: &mut Vec<IndexEntry>, path: String, kind: &'static str, db: Option<SourceDb>, window: Option<String>, status: String| {
        index.push(IndexEntry { path, kind, db, window, status });
    };

    let dbs = ctx.manifest.dbs();
    for &db in &dbs {
        let corpus = ctx.corpus(db)?;
        let corpus_path = format!("corpus_{db}.json");
        write_atomic(
            &ctx.out_dir.join(&corpus_path),
            serde_json::to_string_pretty(&corpus)?.as_bytes(),
        )?;
        push(&mut index, corpus_path, "corpus", Some(db), None, "ok".into());

        let counts = yearly_counts(&ctx.store, &corpus);
        let counts_path = format!("counts_{db}.tsv");
        write_atomic(&ctx.out_dir.join(&counts_path), counts_tsv(&counts).as_bytes())?;
        push(&mut index, counts_path, "counts", Some(db), None, "ok".into());

        let windows = ctx.windowed_records(&corpus)?;

        // Geographic maps for databases with citation counts.
        if matches!(db, SourceDb::Wos | SourceDb::Uspto) {
            let config = ctx.excellence_config(db);
            for (window, records) in &windows {
                match excellence_map(records, &ctx.gazetteer, &config) {
                    Ok(stats) => {
                        for (ext, bytes) in [
                            ("geojson", export_geojson_sites(&stats)),
                            ("kml", export_kml(&stats)),
                        ] {
                            let path = format!("geomap_{db}_{window}.{ext}");
                            write_atomic(&ctx.out_dir.join(&path), bytes.as_bytes())?;
                            push(&mut index, path, "geomap", Some(db), Some(window.to_string()), "ok".into());
                        }
                    }
                    Err(GeoError::SampleTooSmall { have, need }) => {
                        push(
                            &mut index,
                            String::new(),
                            "geomap",
                            Some(db),
                            Some(window.to_string()),
                            format!("refused: sample too small ({have} geocoded records, need {need})"),
                        );
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }

        if db == SourceDb::Wos {
            for (window, records) in &windows {
                write_collabmap(ctx, db, *window, records)?;
                for ext in ["geojson", "graphml", "svg"] {
                    push(
                        &mut index,
                        format!("collab_cities_{db}_{window}.{ext}"),
                        "collabmap",
                        Some(db),
                        Some(window.to_string()),
                        "ok".into(),
                    );
                }
            }
            cmd_netreport(ctx, db, NodeKind::Org)?;
            for ext in ["txt", "json"] {
                push(&mut index, format!("netreport_org_{db}.{ext}"), "netreport", Some(db), None, "ok".into());
            }
            for (window, _) in &windows {
                for ext in ["graphml", "svg"] {
                    push(
                        &mut index,
                        format!("network_org_{db}_{window}.{ext}"),
                        "network",
                        Some(db),
                        Some(window.to_string()),
                        "ok".into(),
                    );
                }
            }
        }

        // Cognitive overlays per database kind.
        let schemes: Vec<(CodeScheme, bool)> = match db {
            SourceDb::Wos => vec![(CodeScheme::WosCategory, true), (CodeScheme::Journal, false)],
            SourceDb::Medline => vec![(CodeScheme::Mesh, true)],
            SourceDb::Uspto => vec![(CodeScheme::Ipc, false)],
        };
        for (scheme, with_density) in schemes {
            if !ctx.manifest.basemaps.contains_key(&scheme.to_string()) {
                continue;
            }
            let frames = cmd_overlay(ctx, db, scheme, with_density)?;
            for (seq, frame) in frames.iter().enumerate() {
                for ext in ["svg", "json"] {
                    push(
                        &mut index,
                        format!("overlay_{scheme}_{db}_{seq:03}.{ext}"),
                        "overlay",
                        Some(db),
                        Some(frame.window.to_string()),
                        "ok".into(),
                    );
                }
                if with_density {
                    push(
                        &mut index,
                        format!("density_{scheme}_{db}_{seq:03}.txt"),
                        "density",
                        Some(db),
                        Some(frame.window.to_string()),
                        "ok".into(),
                    );
                }
            }
            if scheme == CodeScheme::Journal {
                cmd_diversity(ctx, db, scheme)?;
                push(&mut index, format!("diversity_{scheme}_{db}.json"), "diversity", Some(db), None, "ok".into());
            }
        }
    }

    if dbs.contains(&SourceDb::Wos) && dbs.contains(&SourceDb::Medline) {
        cmd_trends(ctx, SourceDb::Wos, SourceDb::Medline)?;
        push(&mut index, "trends_wos_vs_medline.tsv".into(), "trends", None, None, "ok".into());
    }

    let entries: Vec<serde_json::Value> = index
        .iter()
        .map(|e| {
            json!({
                "path": e.path,
                "kind": e.kind,
                "db": e.db.map(|d| d.to_string()),
                "window": e.window,
                "status": e.status,
            })
        })
        .collect();
    let doc = json!({
        "case": ctx.manifest.case.name,
        "seed": ctx.seed,
        "retrieved_on": ctx.manifest.case.retrieved_on,
        "artifacts": entries,
    });
    write_atomic(
        &ctx.out_dir.join("index.json"),
        serde_json::to_string_pretty(&doc)?.as_bytes(),
    )?;
    summary(
        "report",
        json!({
            "case": ctx.manifest.case.name,
            "artifacts": index.iter().filter(|e| !e.path.is_empty()).count(),
            "refused": index.iter().filter(|e| e.status.starts_with("refused")).count(),
            "out": ctx.out_dir.display().to_string(),
        }),
    );
    Ok(())
}

// ------------------------------------------------------------------ harvest

/// Harvest knobs collected from the command line.
pub struct HarvestArgs {
    pub db: SourceDb,
    pub endpoint: Option<String>,
    pub fixtures: Option<PathBuf>,
    pub page_size: usize,
    pub rate: f64,
    pub max_retries: u32,
    pub ingest: bool,
}

pub fn cmd_harvest(ctx: &mut CaseContext, args: HarvestArgs) -> Result<()> {
    let HarvestArgs { db, endpoint, fixtures, page_size, rate, max_retries, ingest } = args;
    let query = ctx
        .manifest
        .query_for(db)
        .ok_or_else(|| anyhow!("manifest has no query for {db}"))?
        .to_string();
    let config = estmap::harvest::HarvestConfig {
        endpoint: endpoint.or_else(|| std::env::var("ESTMAP_ENDPOINT").ok()),
        fixture_dir: fixtures,
        ..Default::default()
    };
    let client = estmap::harvest::HarvestClient::new(config)?;
    let spool = ctx.out_dir.join(format!("harvest_{db}"));
    std::fs::create_dir_all(&spool)?;
    let job = estmap::harvest::HarvestJob {
        query_text: query,
        source_db: db,
        page_size,
        cursor_path: spool.join("cursor.json"),
        max_retries,
        rate_limit: rate,
    };
    let outcome = client.search(&job)?;
    summary(
        "harvest-search",
        json!({
            "db": db.to_string(),
            "total": outcome.total,
            "pages": outcome.pages.len(),
            "retries": outcome.retries,
            "resumed_from": outcome.resumed_from,
        }),
    );
    let mut all_payloads = Vec::new();
    for (i, page) in outcome.pages.iter().enumerate() {
        let fetched = client.fetch_records(&job, page)?;
        for id in &fetched.missing {
            eprintln!("warning: unknown id {id}");
        }
        for (k, payload) in fetched.payloads.iter().enumerate() {
            let path = spool.join(format!("page_{i:04}_{k:02}.payload"));
            write_atomic(&path, payload)?;
            all_payloads.push(payload.clone());
        }
    }
    if ingest {
        let mut total = 0usize;
        for payload in &all_payloads {
            let parsed = match db {
                SourceDb::Medline => estmap::record::parse_medline(&payload[..])?,
                SourceDb::Wos => estmap::record::parse_wos_export(&payload[..])?,
                SourceDb::Uspto => estmap::record::parse_patent_file(&payload[..])?,
            };
            total += parsed.records.len();
            ctx.store.upsert(parsed.records);
        }
        ctx.store.save(&ctx.manifest.store_path())?;
        summary("harvest-ingest", json!({ "db": db.to_string(), "records": total }));
    }
    Ok(())
}
