//! Field-tagged MEDLINE/PubMed export parser.
//!
//! Entries are blocks of `TAG - value` lines (tag padded to four
//! characters) separated by blank lines; continuation lines are indented.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read};

use super::{
    first_year, Affiliation, CodeScheme, CodeTag, Parsed, Record, RecordError, RecordKind, Result,
    SourceDb,
};

pub fn parse_medline<R: Read>(input: R) -> Result<Parsed> {
    let reader = BufReader::new(input);
    let mut entries: Vec<Vec<(String, String)>> = Vec::new();
    let mut current: Vec<(String, String)> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            if !current.is_empty() {
                entries.push(std::mem::take(&mut current));
            }
            continue;
        }
        if line.starts_with(' ') {
            // Continuation of the previous field.
            match current.last_mut() {
                Some((_, value)) => {
                    value.push(' ');
                    value.push_str(line.trim());
                }
                None => {
                    return Err(RecordError::Parse {
                        path: "<medline>".into(),
                        line: line_no,
                        message: "continuation line before any field".into(),
                    })
                }
            }
            continue;
        }
        if line.len() < 6 || &line[4..6] != "- " {
            return Err(RecordError::Parse {
                path: "<medline>".into(),
                line: line_no,
                message: format!("malformed tag line: {line:?}"),
            });
        }
        let tag = line[..4].trim_end().to_string();
        if tag.is_empty() || !tag.bytes().all(|b| b.is_ascii_uppercase() || b.is_ascii_digit()) {
            return Err(RecordError::Parse {
                path: "<medline>".into(),
                line: line_no,
                message: format!("malformed tag {tag:?}"),
            });
        }
        current.push((tag, line[6..].trim().to_string()));
    }
    if !current.is_empty() {
        entries.push(current);
    }

    let mut parsed = Parsed::default();
    let mut seen = HashSet::new();
    for fields in entries {
        let record = build_record(&fields, &mut parsed.warnings)?;
        if !seen.insert(record.id.clone()) {
            return Err(RecordError::DuplicateId(record.id));
        }
        record.validate()?;
        parsed.records.push(record);
    }
    Ok(parsed)
}

fn build_record(fields: &[(String, String)], warnings: &mut Vec<String>) -> Result<Record> {
    let get = |tag: &str| fields.iter().find(|(t, _)| t == tag).map(|(_, v)| v.clone());
    let all = |tag: &str| -> Vec<String> {
        fields
            .iter()
            .filter(|(t, _)| t == tag)
            .map(|(_, v)| v.clone())
            .collect()
    };

    let pmid = get("PMID").ok_or_else(|| RecordError::Parse {
        path: "<medline>".into(),
        line: 0,
        message: "entry without PMID".into(),
    })?;
    let id = format!("medline:{pmid}");

    let year = get("DP")
        .as_deref()
        .and_then(first_year)
        .ok_or_else(|| RecordError::Invalid {
            id: id.clone(),
            message: "no 4-digit year in DP".into(),
        })?;

    let mut codes = Vec::new();
    for mh in all("MH") {
        if CodeTag::is_valid_mesh(&mh) {
            codes.push(CodeTag::new(CodeScheme::Mesh, mh));
        } else {
            warnings.push(format!("{id}: MH value {mh:?} is not a MeSH tree number, skipped"));
        }
    }

    Ok(Record {
        id,
        kind: RecordKind::Publication,
        source_db: SourceDb::Medline,
        title: get("TI").unwrap_or_default(),
        abstract_text: get("AB"),
        claims: None,
        year,
        authors: all("AU"),
        affiliations: all("AD").iter().map(|a| Affiliation::from_raw(a)).collect(),
        citation_count: None,
        codes,
        journal: get("JT").or_else(|| get("TA")),
    })
}
