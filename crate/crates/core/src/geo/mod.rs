//! Geographic layer: city-level aggregation, top-cited excellence
//! statistics, collaboration edges, and GeoJSON/KML export.

mod excellence;
mod export;

pub use excellence::{
    excellence_map, excellence_test, top_cited_threshold, ExcellenceOutcome, TopCited,
};
pub use export::{export_geojson_edges, export_geojson_sites, export_kml};

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::record::{Affiliation, Record};

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("{path} line {line}: malformed gazetteer row: {message}")]
    BadGazetteerRow {
        path: String,
        line: usize,
        message: String,
    },
    #[error("sample too small: {have} geocoded records in window, need at least {need}")]
    SampleTooSmall { have: usize, need: usize },
    #[error("record {0} has no citation count")]
    MissingCitations(String),
    #[error("no records to threshold")]
    EmptyInput,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GeoError>;

/// One gazetteer city.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoSite {
    pub city: String,
    pub country: String,
    pub lat: f64,
    pub lon: f64,
}

impl GeoSite {
    /// Stable display key, used for node ids and edge ordering.
    pub fn key(&self) -> String {
        format!("{}, {}", self.city, self.country)
    }
}

/// Case- and diacritic-folded lookup key.
fn fold(text: &str) -> String {
    text.nfd()
        .filter(|c| !unicode_normalization::char::is_combining_mark(*c))
        .collect::<String>()
        .to_lowercase()
        .trim()
        .to_string()
}

/// City gazetteer with an alias table. Lookup is exact on the folded
/// (city, country) pair after alias substitution; nothing is ever guessed.
#[derive(Debug, Default, Clone)]
pub struct Gazetteer {
    sites: HashMap<(String, String), GeoSite>,
    aliases: HashMap<String, String>,
}

impl Gazetteer {
    /// Loads tab-separated rows: city, country, lat, lon.
    pub fn load(path: &Path) -> Result<Gazetteer> {
        let text = std::fs::read_to_string(path)?;
        let mut gaz = Gazetteer::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cells.len() != 4 {
                return Err(GeoError::BadGazetteerRow {
                    path: path.display().to_string(),
                    line: line_no,
                    message: format!("expected 4 tab-separated cells, got {}", cells.len()),
                });
            }
            let lat: f64 = cells[2].parse().map_err(|_| GeoError::BadGazetteerRow {
                path: path.display().to_string(),
                line: line_no,
                message: format!("bad latitude {:?}", cells[2]),
            })?;
            let lon: f64 = cells[3].parse().map_err(|_| GeoError::BadGazetteerRow {
                path: path.display().to_string(),
                line: line_no,
                message: format!("bad longitude {:?}", cells[3]),
            })?;
            if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                return Err(GeoError::BadGazetteerRow {
                    path: path.display().to_string(),
                    line: line_no,
                    message: format!("coordinates ({lat}, {lon}) out of range"),
                });
            }
            let site = GeoSite {
                city: cells[0].to_string(),
                country: cells[1].to_string(),
                lat,
                lon,
            };
            gaz.sites.insert((fold(cells[0]), fold(cells[1])), site);
        }
        Ok(gaz)
    }

    /// Loads tab-separated alias rows: from, to. `#` starts a comment.
    pub fn load_aliases(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cells.len() != 2 || cells[0].is_empty() || cells[1].is_empty() {
                return Err(GeoError::BadGazetteerRow {
                    path: path.display().to_string(),
                    line: idx + 1,
                    message: "expected two tab-separated cells".into(),
                });
            }
            self.aliases.insert(fold(cells[0]), fold(cells[1]));
        }
        Ok(())
    }

    pub fn add_site(&mut self, site: GeoSite) {
        self.sites
            .insert((fold(&site.city), fold(&site.country)), site);
    }

    pub fn add_alias(&mut self, from: &str, to: &str) {
        self.aliases.insert(fold(from), fold(to));
    }

    fn canon(&self, text: &str) -> String {
        let folded = fold(text);
        self.aliases.get(&folded).cloned().unwrap_or(folded)
    }

    /// Looks up one affiliation. Affiliations without parsed city/country
    /// fields resolve to `None`.
    pub fn resolve(&self, affiliation: &Affiliation) -> Option<GeoSite> {
        let city = affiliation.city.as_deref()?;
        let country = affiliation.country.as_deref()?;
        self.sites
            .get(&(self.canon(city), self.canon(country)))
            .cloned()
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

/// Per-affiliation geocoding outcome; unresolved affiliations are
/// reported, never guessed.
#[derive(Debug, Default)]
pub struct GeocodeResult {
    pub resolved: Vec<Option<GeoSite>>,
    pub unresolved: Vec<String>,
}

pub fn geocode(affiliations: &[Affiliation], gazetteer: &Gazetteer) -> GeocodeResult {
    let mut result = GeocodeResult::default();
    for aff in affiliations {
        match gazetteer.resolve(aff) {
            Some(site) => result.resolved.push(Some(site)),
            None => {
                result.resolved.push(None);
                result.unresolved.push(aff.raw.clone());
            }
        }
    }
    result
}

/// Distinct sites mentioned by one record (whole counting: each city at
/// most once per record), sorted by key for determinism.
pub fn record_sites(record: &Record, gazetteer: &Gazetteer) -> Vec<GeoSite> {
    let mut sites: BTreeMap<String, GeoSite> = BTreeMap::new();
    for aff in &record.affiliations {
        if let Some(site) = gazetteer.resolve(aff) {
            sites.insert(site.key(), site);
        }
    }
    sites.into_values().collect()
}

/// Thresholds and the pinned χ² critical value for the excellence test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcellenceConfig {
    /// Share of records counted as top-cited (0.10 publications, 0.25 patents).
    pub top_share: f64,
    pub alpha: f64,
    /// Critical value at df = 1; 3.841 for alpha = 0.05.
    pub chi2_critical: f64,
    /// Yates continuity correction, off by default.
    pub continuity_correction: bool,
    /// Windows with fewer geocoded records are refused.
    pub min_sample: usize,
}

impl ExcellenceConfig {
    pub fn publications() -> ExcellenceConfig {
        ExcellenceConfig {
            top_share: 0.10,
            alpha: 0.05,
            chi2_critical: 3.841,
            continuity_correction: false,
            min_sample: 20,
        }
    }

    pub fn patents() -> ExcellenceConfig {
        ExcellenceConfig {
            top_share: 0.25,
            ..ExcellenceConfig::publications()
        }
    }
}

impl Default for ExcellenceConfig {
    fn default() -> ExcellenceConfig {
        ExcellenceConfig::publications()
    }
}

/// Excess/deficit sign of a site's observed top-cited count against its
/// expectation under the global proportion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Positive,
    Negative,
    None,
}

/// Map style classes from the four-way significance/direction rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    DarkGreen,
    LightGreen,
    Red,
    Orange,
}

/// Significant excess is dark green, non-significant excess light green,
/// significant deficit red, non-significant deficit orange. An exactly
/// expected count can never be significant and is shown light green.
pub fn style_for(significant: bool, direction: Direction) -> Style {
    match (direction, significant) {
        (Direction::Positive, true) => Style::DarkGreen,
        (Direction::Positive, false) => Style::LightGreen,
        (Direction::Negative, true) => Style::Red,
        (Direction::Negative, false) => Style::Orange,
        (Direction::None, _) => Style::LightGreen,
    }
}

impl Style {
    pub fn name(&self) -> &'static str {
        match self {
            Style::DarkGreen => "dark_green",
            Style::LightGreen => "light_green",
            Style::Red => "red",
            Style::Orange => "orange",
        }
    }

    pub fn color(&self) -> &'static str {
        match self {
            Style::DarkGreen => "#006400",
            Style::LightGreen => "#90ee90",
            Style::Red => "#d62728",
            Style::Orange => "#ff8c00",
        }
    }
}

/// Per-city observed/expected top-cited counts with the test verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteStats {
    pub site: GeoSite,
    pub n_total: u32,
    pub n_top: u32,
    pub expected_top: f64,
    pub chi2: f64,
    pub significant: bool,
    pub direction: Direction,
    pub validity_warning: bool,
}

impl SiteStats {
    pub fn style(&self) -> Style {
        style_for(self.significant, self.direction)
    }
}

/// Weighted city-pair collaboration edges plus per-city article counts.
#[derive(Debug, Default, Clone, Serialize)]
pub struct GeoCollab {
    pub sites: BTreeMap<String, GeoSite>,
    pub city_counts: BTreeMap<String, u32>,
    /// Keyed by (key_a, key_b) with key_a < key_b.
    pub edges: BTreeMap<(String, String), u32>,
}

/// Builds city co-authorship edges: a record with addresses in cities
/// {A, B, C} adds one to each unordered pair. Cities with no records in
/// the input never appear.
pub fn collab_geo_edges(records: &[&Record], gazetteer: &Gazetteer) -> GeoCollab {
    let mut collab = GeoCollab::default();
    for record in records {
        let sites = record_sites(record, gazetteer);
        for site in &sites {
            let key = site.key();
            *collab.city_counts.entry(key.clone()).or_insert(0) += 1;
            collab.sites.entry(key).or_insert_with(|| site.clone());
        }
        for i in 0..sites.len() {
            for j in (i + 1)..sites.len() {
                let (a, b) = (sites[i].key(), sites[j].key());
                *collab.edges.entry((a, b)).or_insert(0) += 1;
            }
        }
    }
    collab
}
