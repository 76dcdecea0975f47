//! Canonical record store: a UTF-8 file with one JSON object per line and
//! a versioned header line. Line-delimited writes keep the file
//! append-friendly and diff-friendly.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Record, RecordError, Result};

pub const STORE_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
    version: u32,
}

impl Header {
    fn current() -> Header {
        Header {
            schema: "estmap-store".into(),
            version: STORE_SCHEMA_VERSION,
        }
    }
}

/// In-memory view of a store file. Records keep their first-seen order so
/// that saves are stable; re-ingesting an id replaces the record in place
/// (last write wins).
#[derive(Debug, Default)]
pub struct Store {
    order: Vec<String>,
    by_id: HashMap<String, Record>,
}

/// Outcome of an upsert batch.
#[derive(Debug, Default, Clone, Serialize)]
pub struct MergeReport {
    pub inserted: usize,
    pub replaced: usize,
    pub replaced_ids: Vec<String>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    pub fn load(path: &Path) -> Result<Store> {
        let file = File::open(path)?;
        let mut reader = BufReader::new(file);
        let mut header_line = String::new();
        reader.read_line(&mut header_line)?;
        let header: Header = serde_json::from_str(header_line.trim())
            .map_err(|e| RecordError::BadHeader(e.to_string()))?;
        if header.schema != "estmap-store" || header.version != STORE_SCHEMA_VERSION {
            return Err(RecordError::BadHeader(format!(
                "schema {} version {}",
                header.schema, header.version
            )));
        }
        let mut store = Store::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(&line).map_err(|source| {
                RecordError::BadLine {
                    line: idx + 2,
                    source,
                }
            })?;
            store.insert(record);
        }
        Ok(store)
    }

    /// Atomic save: writes to a sibling temp file, then renames over the
    /// target, so concurrent readers always see a complete snapshot.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = temp_sibling(path);
        {
            let mut out = BufWriter::new(File::create(&tmp)?);
            serde_json::to_writer(&mut out, &Header::current()).map_err(io_err)?;
            out.write_all(b"\n")?;
            for id in &self.order {
                serde_json::to_writer(&mut out, &self.by_id[id]).map_err(io_err)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    fn insert(&mut self, record: Record) -> bool {
        if self.by_id.insert(record.id.clone(), record.clone()).is_none() {
            self.order.push(record.id);
            true
        } else {
            false
        }
    }

    /// Merges a batch of records; duplicate ids are replaced (last write
    /// wins) and reported so re-runs stay idempotent.
    pub fn upsert(&mut self, records: Vec<Record>) -> MergeReport {
        let mut report = MergeReport::default();
        for record in records {
            let id = record.id.clone();
            if self.insert(record) {
                report.inserted += 1;
            } else {
                report.replaced += 1;
                report.replaced_ids.push(id);
            }
        }
        report
    }

    pub fn get(&self, id: &str) -> Option<&Record> {
        self.by_id.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Record> {
        self.order.iter().map(move |id| &self.by_id[id])
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Writes a record list in store format, preserving list order.
pub fn write_records(path: &Path, records: &[Record]) -> Result<()> {
    let tmp = temp_sibling(path);
    {
        let mut out = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer(&mut out, &Header::current()).map_err(io_err)?;
        out.write_all(b"\n")?;
        for record in records {
            serde_json::to_writer(&mut out, record).map_err(io_err)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a store-format file back as an ordered record list.
pub fn read_records(path: &Path) -> Result<Vec<Record>> {
    let store = Store::load(path)?;
    Ok(store.iter().cloned().collect())
}

fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

fn io_err(e: serde_json::Error) -> RecordError {
    RecordError::Io(std::io::Error::other(e))
}
