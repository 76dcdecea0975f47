//! Toolkit for tracing emerging science and technology fields through
//! bibliographic and patent records: corpus delineation with a boolean
//! field-query language, geographic excellence maps, co-authorship network
//! reports, and cognitive overlay maps with diversity metrics, windowed
//! over time.

pub mod geo;
pub mod harvest;
pub mod network;
pub mod overlay;
pub mod query;
pub mod record;
pub mod scale;

mod xml;

pub use record::{Affiliation, CodeScheme, CodeTag, Corpus, Record, RecordKind, SourceDb, Window};
