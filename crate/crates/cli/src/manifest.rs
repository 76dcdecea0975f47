//! Case-study manifest: the machine-readable form of one case's queries,
//! windows, thresholds, and data-file paths.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use estmap::record::{SourceDb, Window};

#[derive(Debug, Deserialize)]
pub struct Manifest {
    pub case: CaseSection,
    pub store: StoreSection,
    pub windows: WindowsSection,
    pub years: YearsSection,
    /// Canonical-dialect query text per database.
    pub queries: BTreeMap<String, String>,
    pub thresholds: Thresholds,
    pub paths: PathsSection,
    /// Basemap file per scheme.
    pub basemaps: BTreeMap<String, String>,
    /// Directory the manifest lives in; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
pub struct CaseSection {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub retrieved_on: String,
    pub output_dir: String,
}

#[derive(Debug, Deserialize)]
pub struct StoreSection {
    pub path: String,
}

#[derive(Debug, Deserialize)]
pub struct WindowsSection {
    pub width: u32,
    pub anchor: i32,
    #[serde(default)]
    pub first_override: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct YearsSection {
    pub from: i32,
    pub to: i32,
}

#[derive(Debug, Deserialize)]
pub struct Thresholds {
    pub top_share_publications: f64,
    pub top_share_patents: f64,
    pub alpha: f64,
}

#[derive(Debug, Deserialize)]
pub struct PathsSection {
    pub gazetteer: String,
    #[serde(default)]
    pub geo_aliases: Option<String>,
    #[serde(default)]
    pub org_aliases: Option<String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let mut manifest: Manifest =
            toml::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
        manifest.base_dir = path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .to_path_buf();
        manifest.validate()?;
        Ok(manifest)
    }

    fn validate(&self) -> Result<()> {
        if self.case.name.is_empty()
            || self
                .case
                .name
                .chars()
                .any(|c| !(c.is_ascii_alphanumeric() || c == '-' || c == '_'))
        {
            bail!("case name {:?} is not a valid path segment", self.case.name);
        }
        for (label, share) in [
            ("top_share_publications", self.thresholds.top_share_publications),
            ("top_share_patents", self.thresholds.top_share_patents),
        ] {
            if !(share > 0.0 && share < 1.0) {
                bail!("{label} must lie in (0, 1), got {share}");
            }
        }
        if !(self.thresholds.alpha > 0.0 && self.thresholds.alpha < 1.0) {
            bail!("alpha must lie in (0, 1), got {}", self.thresholds.alpha);
        }
        if self.windows.width < 1 {
            bail!("window width must be >= 1");
        }
        if let Some(label) = &self.windows.first_override {
            Window::parse_label(label)
                .map_err(|_| anyhow::anyhow!("bad first_override window label {label:?}"))?;
        }
        for db in self.queries.keys() {
            db.parse::<SourceDb>().map_err(anyhow::Error::msg)?;
        }
        for scheme in self.basemaps.keys() {
            scheme
                .parse::<estmap::record::CodeScheme>()
                .map_err(anyhow::Error::msg)?;
        }
        // Referenced files must exist at run start.
        let mut referenced = vec![self.store.path.clone(), self.paths.gazetteer.clone()];
        referenced.extend(self.paths.geo_aliases.clone());
        referenced.extend(self.paths.org_aliases.clone());
        referenced.extend(self.basemaps.values().cloned());
        for file in referenced {
            let resolved = self.resolve(&file);
            if !resolved.exists() {
                bail!("manifest references missing file {}", resolved.display());
            }
        }
        Ok(())
    }

    /// Resolves a manifest-relative path.
    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn store_path(&self) -> PathBuf {
        self.resolve(&self.store.path)
    }

    pub fn first_override(&self) -> Option<Window> {
        self.windows
            .first_override
            .as_deref()
            .map(|label| Window::parse_label(label).expect("validated on load"))
    }

    pub fn query_for(&self, db: SourceDb) -> Option<&str> {
        self.queries.get(&db.to_string()).map(String::as_str)
    }

    pub fn dbs(&self) -> Vec<SourceDb> {
        let mut dbs: Vec<SourceDb> = self
            .queries
            .keys()
            .filter_map(|k| k.parse().ok())
            .collect();
        dbs.sort();
        dbs
    }

    pub fn top_share(&self, db: SourceDb) -> f64 {
        match db {
            SourceDb::Uspto => self.thresholds.top_share_patents,
            _ => self.thresholds.top_share_publications,
        }
    }
}
