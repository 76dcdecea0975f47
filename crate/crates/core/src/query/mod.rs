//! Boolean field-query language: parse the WoS, PubMed, USPTO, and
//! canonical dialects, re-emit equivalent strings, and evaluate queries
//! against records.

mod emit;
mod eval;
mod parse;

pub use emit::{emit_query, to_canonical_string};
pub use eval::{delineate, evaluate, tokenize_text, wildcard_match};
pub use parse::parse_query;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("parse error at offset {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("{dialect} emission does not support the {field} field")]
    UnsupportedField { field: Field, dialect: Dialect },
}

pub type Result<T> = std::result::Result<T, QueryError>;

/// Searchable record field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    /// TI — title.
    Title,
    /// AB — abstract.
    Abstract,
    /// CLM — patent claims.
    Claims,
    /// MH — MeSH codes.
    Mesh,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Title => write!(f, "TI"),
            Field::Abstract => write!(f, "AB"),
            Field::Claims => write!(f, "CLM"),
            Field::Mesh => write!(f, "MH"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dialect {
    Wos,
    Pubmed,
    Uspto,
    Canonical,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dialect::Wos => write!(f, "wos"),
            Dialect::Pubmed => write!(f, "pubmed"),
            Dialect::Uspto => write!(f, "uspto"),
            Dialect::Canonical => write!(f, "canonical"),
        }
    }
}

impl std::str::FromStr for Dialect {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "wos" => Ok(Dialect::Wos),
            "pubmed" | "medline" => Ok(Dialect::Pubmed),
            "uspto" => Ok(Dialect::Uspto),
            "canonical" => Ok(Dialect::Canonical),
            other => Err(format!("unknown dialect: {other}")),
        }
    }
}

/// One field-restricted search term. `*` inside the pattern matches any
/// (possibly empty) character run; phrases are quoted token sequences that
/// must match contiguously.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermNode {
    pub field: Field,
    pub pattern: String,
    pub is_phrase: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum QueryAst {
    And(Vec<QueryAst>),
    Or(Vec<QueryAst>),
    Term(TermNode),
}

impl QueryAst {
    pub fn term(field: Field, pattern: impl Into<String>) -> QueryAst {
        QueryAst::Term(TermNode {
            field,
            pattern: pattern.into(),
            is_phrase: false,
        })
    }

    pub fn phrase(field: Field, pattern: impl Into<String>) -> QueryAst {
        QueryAst::Term(TermNode {
            field,
            pattern: pattern.into(),
            is_phrase: true,
        })
    }

    /// Rewrites every title term to search claims instead; used when
    /// translating publication queries into the claims-only USPTO dialect.
    pub fn retarget_title_to_claims(&self) -> QueryAst {
        match self {
            QueryAst::And(children) => {
                QueryAst::And(children.iter().map(|c| c.retarget_title_to_claims()).collect())
            }
            QueryAst::Or(children) => {
                QueryAst::Or(children.iter().map(|c| c.retarget_title_to_claims()).collect())
            }
            QueryAst::Term(t) if t.field == Field::Title => QueryAst::Term(TermNode {
                field: Field::Claims,
                ..t.clone()
            }),
            term => term.clone(),
        }
    }
}
