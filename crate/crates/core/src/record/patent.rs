//! Line-delimited patent object parser: one JSON object per line with id,
//! title, claims text, filing year, citation count, and IPC codes.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read};

use serde::Deserialize;

use super::{
    Affiliation, CodeScheme, CodeTag, Parsed, Record, RecordError, RecordKind, Result, SourceDb,
};

#[derive(Deserialize)]
struct PatentLine {
    id: String,
    title: String,
    #[serde(default)]
    claims: Option<String>,
    #[serde(default)]
    filing_year: Option<serde_json::Value>,
    #[serde(default)]
    citation_count: Option<u32>,
    #[serde(default)]
    ipc: Vec<String>,
    #[serde(default)]
    inventors: Vec<String>,
    #[serde(default)]
    affiliations: Vec<String>,
}

pub fn parse_patent_file<R: Read>(input: R) -> Result<Parsed> {
    let reader = BufReader::new(input);
    let mut parsed = Parsed::default();
    let mut seen = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let obj: PatentLine = match serde_json::from_str(&line) {
            Ok(obj) => obj,
            Err(e) => {
                return Err(RecordError::Parse {
                    path: "<patents>".into(),
                    line: line_no,
                    message: e.to_string(),
                })
            }
        };

        let claims = match obj.claims {
            Some(c) if !c.is_empty() => c,
            _ => {
                parsed
                    .warnings
                    .push(format!("line {line_no}: patent {} has no claims, skipped", obj.id));
                continue;
            }
        };
        let year = match obj.filing_year.as_ref().and_then(year_of) {
            Some(y) => y,
            None => {
                parsed.warnings.push(format!(
                    "line {line_no}: patent {} has no usable filing year, skipped",
                    obj.id
                ));
                continue;
            }
        };

        let id = if obj.id.starts_with("uspto:") {
            obj.id.clone()
        } else {
            format!("uspto:{}", obj.id)
        };
        if !seen.insert(id.clone()) {
            return Err(RecordError::DuplicateId(id));
        }

        let mut codes = Vec::new();
        for code in &obj.ipc {
            let code = code.trim();
            if CodeTag::is_valid_ipc(code) {
                codes.push(CodeTag::new(CodeScheme::Ipc, code));
            } else {
                parsed
                    .warnings
                    .push(format!("line {line_no}: {id}: invalid IPC code {code:?}, skipped"));
            }
        }

        let record = Record {
            id,
            kind: RecordKind::Patent,
            source_db: SourceDb::Uspto,
            title: obj.title,
            abstract_text: None,
            claims: Some(claims),
            year,
            authors: obj.inventors,
            affiliations: obj.affiliations.iter().map(|a| Affiliation::from_raw(a)).collect(),
            citation_count: obj.citation_count,
            codes,
            journal: None,
        };
        record.validate()?;
        parsed.records.push(record);
    }
    Ok(parsed)
}

fn year_of(value: &serde_json::Value) -> Option<i32> {
    match value {
        serde_json::Value::Number(n) => n.as_i64().map(|y| y as i32),
        serde_json::Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}
