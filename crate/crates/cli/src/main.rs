//! `estmap` — drives the corpus-to-maps pipeline from a case manifest.
//!
//! Exit codes: 0 success, 1 usage error, 2 input/parse error,
//! 3 statistical refusal (sample too small).

mod manifest;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use estmap::network::NodeKind;
use estmap::query::Dialect;
use estmap::record::{CodeScheme, SourceDb};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(anyhow::Error),
    Refusal(String),
}

impl CliError {
    pub(crate) fn usage_from(e: anyhow::Error) -> CliError {
        CliError::Usage(e.to_string())
    }

    pub(crate) fn input(e: impl Into<anyhow::Error>) -> CliError {
        CliError::Input(e.into())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Refusal(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "estmap", version, about = "Corpus delineation, excellence maps, co-authorship networks, and science overlays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ManifestArgs {
    /// Case manifest (TOML).
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory (defaults to the manifest's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override for layout and clustering.
    #[arg(long)]
    seed: Option<u64>,
}

impl ManifestArgs {
    fn load(&self) -> Result<pipeline::CaseContext, CliError> {
        pipeline::CaseContext::load(&self.manifest, self.out.as_deref(), self.seed)
            .map_err(CliError::Input)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse input files into the canonical store.
    Ingest {
        #[command(flatten)]
        args: ManifestArgs,
        /// Input format: medline | wos | patent.
        #[arg(long)]
        format: String,
        /// Files to ingest.
        files: Vec<PathBuf>,
    },
    /// Run a paginated search/fetch harvest into a spool directory.
    Harvest {
        #[command(flatten)]
        args: ManifestArgs,
        #[arg(long)]
        db: SourceDb,
        /// Endpoint URL (or set ESTMAP_ENDPOINT).
        #[arg(long)]
        endpoint: Option<String>,
        /// Offline fixture directory of canned responses.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        page_size: usize,
        /// Requests per second.
        #[arg(long, default_value_t = 3.0)]
        rate: f64,
        #[arg(long, default_value_t = 3)]
        max_retries: u32,
        /// Parse fetched payloads into the store.
        #[arg(long)]
        ingest: bool,
    },
    /// Evaluate the manifest queries against the store and write corpora.
    Delineate {
        #[command(flatten)]
        args: ManifestArgs,
        #[arg(long)]
        db: Option<SourceDb>,
    },
    /// Partition a corpus into the manifest's time windows.
    Windows {
        #[command(flatten)]
        args: ManifestArgs,
        #[arg(long)]
        db: SourceDb,
    },
    /// Per-year record counts.
    Counts {
        #[command(flatten)]
        args: ManifestArgs,
        #[arg(long)]
        db: SourceDb,
    },
    /// Paired per-year series for two corpora.
    Trends {
        #[command(flatten)]
        args: ManifestArgs,
        #[arg(long)]
        db_a: SourceDb,
        #[arg(long)]
        db_b: SourceDb,
    },
    /// Geographic excellence map for one window (GeoJSON + KML).
    Geomap {
        #[command(flatten)]
        args: ManifestArgs,
        #[arg(long)]
        db: SourceDb,
        /// Window label, e.g. 2002-2006.
        #[arg(long)]
        window: String,
        /// Restrict output formats (geojson, kml); default writes all.
        #[arg(long)]
        format: Vec<String>,
    },
    /// City collaboration map for one window (GeoJSON + GraphML + SVG).
    Collabmap {
        #[command(flatten)]
        args: ManifestArgs,
        #[arg(long)]
        db: SourceDb,
        #[arg(long)]
        window: String,
        /// Restrict output formats (geojson, graphml, svg); default all.
        #[arg(long)]
        format: Vec<String>,
    },
    /// Structural network summary across all windows.
    Netreport {
        #[command(flatten)]
        args: ManifestArgs,
        #[arg(long)]
        db: SourceDb,
        /// org | city.
        #[arg(long, default_value = "org")]
        level: String,
    },
    /// Project a corpus onto a basemap, one frame per window.
    Overlay {
        #[command(flatten)]
        args: ManifestArgs,
        #[arg(long)]
        db: SourceDb,
        /// wos_category | journal | mesh | ipc.
        #[arg(long)]
        scheme: String,
        /// Also write density heatmap grids.
        #[arg(long)]
        density: bool,
    },
    /// Rao-Stirling diversity per window.
    Diversity {
        #[command(flatten)]
        args: ManifestArgs,
        #[arg(long)]
        db: SourceDb,
        #[arg(long, default_value = "journal")]
        scheme: String,
    },
    /// Build a basemap from a labelled co-occurrence matrix (TSV).
    BasemapBuild {
        /// TSV: first line labels, then a square matrix of values.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        out_file: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Parse a query in one dialect and print translations, one per line.
    Translate {
        #[arg(long)]
        query: String,
        /// Dialect the query is written in.
        #[arg(long, default_value = "canonical")]
        dialect: String,
        /// Target dialect(s): wos | pubmed | uspto.
        #[arg(long, required = true)]
        emit: Vec<String>,
        /// Rewrite title terms to claims for USPTO emission.
        #[arg(long)]
        retarget: bool,
    },
    /// Full pipeline: delineate, windows, maps, networks, overlays,
    /// diversity, and an index of every artifact.
    Report {
        #[command(flatten)]
        args: ManifestArgs,
    },
}

fn check_formats(formats: &[String], allowed: &[&str]) -> Result<(), CliError> {
    for format in formats {
        if !allowed.contains(&format.as_str()) {
            return Err(CliError::Usage(format!(
                "unknown format {format}; expected one of {allowed:?}"
            )));
        }
    }
    Ok(())
}

fn parse_scheme(text: &str) -> Result<CodeScheme, CliError> {
    text.parse().map_err(CliError::Usage)
}

fn parse_dialect(text: &str) -> Result<Dialect, CliError> {
    text.parse().map_err(CliError::Usage)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { args, format, files } => {
            if files.is_empty() {
                return Err(CliError::Usage("ingest needs at least one file".into()));
            }
            let mut ctx = args.load()?;
            pipeline::cmd_ingest(&mut ctx, &format, &files).map_err(CliError::Input)
        }
        Command::Harvest {
            args,
            db,
            endpoint,
            fixtures,
            page_size,
            rate,
            max_retries,
            ingest,
        } => {
            if page_size < 1 {
                return Err(CliError::Usage("page size must be >= 1".into()));
            }
            if rate <= 0.0 {
                return Err(CliError::Usage("rate must be positive".into()));
            }
            let mut ctx = args.load()?;
            pipeline::cmd_harvest(
                &mut ctx,
                pipeline::HarvestArgs { db, endpoint, fixtures, page_size, rate, max_retries, ingest },
            )
            .map_err(CliError::Input)
        }
        Command::Delineate { args, db } => {
            let ctx = args.load()?;
            pipeline::cmd_delineate(&ctx, db).map_err(CliError::Input)
        }
        Command::Windows { args, db } => {
            let ctx = args.load()?;
            pipeline::cmd_windows(&ctx, db).map_err(CliError::Input)
        }
        Command::Counts { args, db } => {
            let ctx = args.load()?;
            pipeline::cmd_counts(&ctx, db).map_err(CliError::Input)
        }
        Command::Trends { args, db_a, db_b } => {
            let ctx = args.load()?;
            pipeline::cmd_trends(&ctx, db_a, db_b).map_err(CliError::Input)
        }
        Command::Geomap { args, db, window, format } => {
            check_formats(&format, &["geojson", "kml"])?;
            let ctx = args.load()?;
            pipeline::cmd_geomap(&ctx, db, &window, &pipeline::FormatFilter(format))
        }
        Command::Collabmap { args, db, window, format } => {
            check_formats(&format, &["geojson", "graphml", "svg"])?;
            let ctx = args.load()?;
            pipeline::cmd_collabmap(&ctx, db, &window, &pipeline::FormatFilter(format))
                .map_err(CliError::Input)
        }
        Command::Netreport { args, db, level } => {
            let level = match level.as_str() {
                "org" => NodeKind::Org,
                "city" => NodeKind::City,
                other => return Err(CliError::Usage(format!("unknown level {other}"))),
            };
            let ctx = args.load()?;
            pipeline::cmd_netreport(&ctx, db, level)
                .map(|_| ())
                .map_err(CliError::Input)
        }
        Command::Overlay { args, db, scheme, density } => {
            let scheme = parse_scheme(&scheme)?;
            let ctx = args.load()?;
            pipeline::cmd_overlay(&ctx, db, scheme, density)
                .map(|_| ())
                .map_err(CliError::Input)
        }
        Command::Diversity { args, db, scheme } => {
            let scheme = parse_scheme(&scheme)?;
            let ctx = args.load()?;
            pipeline::cmd_diversity(&ctx, db, scheme).map_err(CliError::Input)
        }
        Command::BasemapBuild { matrix, scheme, out_file, threshold, seed } => {
            let scheme = parse_scheme(&scheme)?;
            pipeline::cmd_basemap_build(&matrix, scheme, &out_file, threshold, seed)
                .map_err(CliError::Input)
        }
        Command::Translate { query, dialect, emit, retarget } => {
            let dialect = parse_dialect(&dialect)?;
            let targets = emit
                .iter()
                .map(|e| parse_dialect(e))
                .collect::<Result<Vec<_>, _>>()?;
            pipeline::cmd_translate(&query, dialect, &targets, retarget).map_err(CliError::Input)
        }
        Command::Report { args } => {
            let ctx = args.load()?;
            pipeline::cmd_report(&ctx).map_err(CliError::Input)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are success, everything else is a
            // usage error (exit 1).
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("usage error: {msg}"),
                CliError::Input(err) => eprintln!("error: {err:#}"),
                CliError::Refusal(msg) => eprintln!("refused: {msg}"),
            }
            ExitCode::from(e.code())
        }
    }
}
