//! Canonical record model, input-format parsers, the persistent corpus
//! store, and temporal windowing.

mod medline;
mod patent;
mod store;
mod windows;
mod wos;

pub use medline::parse_medline;
pub use patent::parse_patent_file;
pub use store::{read_records, write_records, MergeReport, Store, STORE_SCHEMA_VERSION};
pub use windows::{
    compare_trends, window_partition, yearly_counts, TrendComparison, WindowPartition, WindowSpec,
};
pub use wos::parse_wos_export;

use std::collections::BTreeSet;
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("duplicate record id in stream: {0}")]
    DuplicateId(String),
    #[error("invalid record {id}: {message}")]
    Invalid { id: String, message: String },
    #[error("store header missing or unsupported: {0}")]
    BadHeader(String),
    #[error("first window {override_window} overlaps the regular sequence starting {anchor}")]
    OverrideOverlap {
        override_window: Window,
        anchor: i32,
    },
    #[error("window width must be >= 1, got {0}")]
    BadWidth(u32),
    #[error("window start {0} after end {1}")]
    BadWindow(i32, i32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed store line {line}: {source}")]
    BadLine {
        line: usize,
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, RecordError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Publication,
    Patent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceDb {
    Wos,
    Medline,
    Uspto,
}

impl fmt::Display for SourceDb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceDb::Wos => write!(f, "wos"),
            SourceDb::Medline => write!(f, "medline"),
            SourceDb::Uspto => write!(f, "uspto"),
        }
    }
}

impl std::str::FromStr for SourceDb {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "wos" => Ok(SourceDb::Wos),
            "medline" | "pubmed" => Ok(SourceDb::Medline),
            "uspto" => Ok(SourceDb::Uspto),
            other => Err(format!("unknown source database: {other}")),
        }
    }
}

/// Classification scheme a code belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeScheme {
    WosCategory,
    Mesh,
    Ipc,
    Journal,
}

impl fmt::Display for CodeScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeScheme::WosCategory => write!(f, "wos_category"),
            CodeScheme::Mesh => write!(f, "mesh"),
            CodeScheme::Ipc => write!(f, "ipc"),
            CodeScheme::Journal => write!(f, "journal"),
        }
    }
}

impl std::str::FromStr for CodeScheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "wos_category" | "wos" => Ok(CodeScheme::WosCategory),
            "mesh" => Ok(CodeScheme::Mesh),
            "ipc" => Ok(CodeScheme::Ipc),
            "journal" => Ok(CodeScheme::Journal),
            other => Err(format!("unknown code scheme: {other}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CodeTag {
    pub scheme: CodeScheme,
    pub code: String,
}

impl CodeTag {
    pub fn new(scheme: CodeScheme, code: impl Into<String>) -> Self {
        CodeTag {
            scheme,
            code: code.into(),
        }
    }

    /// MeSH tree numbers: branch letter followed by dot-separated numeric
    /// segments, e.g. `C04.557.470`.
    pub fn is_valid_mesh(code: &str) -> bool {
        static RE: OnceLock<Regex> = OnceLock::new();
        RE.get_or_init(|| Regex::new(r"^[A-Z]\d{2}(\.\d+)*$").unwrap())
            .is_match(code)
    }

    /// Hierarchical IPC codes, e.g. `C12N15/11` or the truncated `C12N` / `C12`.
    pub fn is_valid_ipc(code: &str) -> bool {
        static RE: OnceLock<Regex> = OnceLock::new();
        RE.get_or_init(|| Regex::new(r"^[A-H]\d{2}([A-Z](\d{1,4}(/\d{1,6})?)?)?$").unwrap())
            .is_match(code)
    }

    pub fn is_valid(&self) -> bool {
        if self.code.is_empty() {
            return false;
        }
        match self.scheme {
            CodeScheme::Mesh => Self::is_valid_mesh(&self.code),
            CodeScheme::Ipc => Self::is_valid_ipc(&self.code),
            CodeScheme::WosCategory | CodeScheme::Journal => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn in_range(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Affiliation {
    pub raw: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub organisation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub city: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geocode: Option<LatLon>,
}

impl Affiliation {
    /// Splits a raw address on commas: first segment is read as the
    /// organisation, the last as the country, and the second-to-last as the
    /// city. Addresses with fewer than three segments keep only the raw text.
    pub fn from_raw(raw: &str) -> Affiliation {
        let raw = raw.trim().to_string();
        let parts: Vec<&str> = raw.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
        let (organisation, city, country) = if parts.len() >= 3 {
            (
                Some(parts[0].to_string()),
                Some(parts[parts.len() - 2].to_string()),
                Some(parts[parts.len() - 1].to_string()),
            )
        } else {
            (None, None, None)
        };
        Affiliation {
            raw,
            organisation,
            city,
            country,
            geocode: None,
        }
    }
}

/// One publication or patent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// Database-qualified id, e.g. `medline:9486653`.
    pub id: String,
    pub kind: RecordKind,
    pub source_db: SourceDb,
    pub title: String,
    #[serde(default, rename = "abstract", skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
    /// Patents only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claims: Option<String>,
    /// Publication year; filing year for patents.
    pub year: i32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub authors: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub affiliations: Vec<Affiliation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub codes: Vec<CodeTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journal: Option<String>,
}

impl Record {
    /// Checks the type invariants. Parsers run this before emitting a record.
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| RecordError::Invalid {
            id: self.id.clone(),
            message,
        };
        if self.id.is_empty() {
            return Err(fail("empty id".into()));
        }
        if !(1900..=2100).contains(&self.year) {
            return Err(fail(format!("year {} outside 1900..=2100", self.year)));
        }
        if self.claims.is_some() && self.kind != RecordKind::Patent {
            return Err(fail("claims present on a non-patent record".into()));
        }
        for tag in &self.codes {
            if !tag.is_valid() {
                return Err(fail(format!("invalid {} code {:?}", tag.scheme, tag.code)));
            }
        }
        for aff in &self.affiliations {
            if aff.raw.is_empty() {
                return Err(fail("affiliation with empty raw text".into()));
            }
            if let Some(geo) = &aff.geocode {
                if !geo.in_range() {
                    return Err(fail(format!(
                        "geocode ({}, {}) out of range",
                        geo.lat, geo.lon
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Inclusive year window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Window {
    pub start_year: i32,
    pub end_year: i32,
}

impl Window {
    pub fn new(start_year: i32, end_year: i32) -> Result<Window> {
        if start_year > end_year {
            return Err(RecordError::BadWindow(start_year, end_year));
        }
        Ok(Window {
            start_year,
            end_year,
        })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start_year..=self.end_year).contains(&year)
    }

    /// Parses a `1982-1986` style label.
    pub fn parse_label(label: &str) -> Result<Window> {
        let (a, b) = label
            .split_once('-')
            .ok_or(RecordError::BadWindow(0, 0))?;
        let start: i32 = a.trim().parse().map_err(|_| RecordError::BadWindow(0, 0))?;
        let end: i32 = b.trim().parse().map_err(|_| RecordError::BadWindow(0, 0))?;
        Window::new(start, end)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start_year, self.end_year)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub query_text: String,
    pub source_db: SourceDb,
    /// ISO date the records were retrieved (or the pinned date from the
    /// manifest when reproducibility matters more than wall time).
    pub retrieved_on: String,
}

/// A named, delineated subset of the store.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub name: String,
    pub record_ids: BTreeSet<String>,
    pub provenance: Provenance,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.record_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.record_ids.is_empty()
    }
}

/// Extracts the first 4-digit run from a free-form date string.
pub(crate) fn first_year(text: &str) -> Option<i32> {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d{4}").unwrap())
        .find(text)
        .and_then(|m| m.as_str().parse().ok())
}

/// Parser output: records plus non-fatal per-line reports.
#[derive(Debug, Default)]
pub struct Parsed {
    pub records: Vec<Record>,
    pub warnings: Vec<String>,
}
