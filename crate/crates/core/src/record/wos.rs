//! Tab-delimited Web-of-Science-style export parser.
//!
//! The first row names the columns (TI, AB, AU, C1, PY, TC, WC, SO, and
//! optionally UT for the accession number). Unknown columns are ignored.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Read};

use super::{
    Affiliation, CodeScheme, CodeTag, Parsed, Record, RecordError, RecordKind, Result, SourceDb,
};

pub fn parse_wos_export<R: Read>(input: R) -> Result<Parsed> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line?,
        None => {
            return Err(RecordError::BadHeader(
                "empty input, expected a tab-delimited header row".into(),
            ))
        }
    };
    let columns: HashMap<String, usize> = header
        .split('\t')
        .enumerate()
        .map(|(i, name)| (name.trim().trim_start_matches('\u{feff}').to_string(), i))
        .collect();
    if !columns.contains_key("TI") || !columns.contains_key("PY") {
        return Err(RecordError::BadHeader(format!(
            "header row must name at least TI and PY, got {header:?}"
        )));
    }

    let mut parsed = Parsed::default();
    let mut seen = HashSet::new();
    for (idx, line) in lines {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        let cell = |name: &str| -> Option<&str> {
            columns
                .get(name)
                .and_then(|&i| cells.get(i))
                .map(|c| c.trim())
                .filter(|c| !c.is_empty())
        };

        let year: i32 = match cell("PY").and_then(|py| py.parse().ok()) {
            Some(y) => y,
            None => {
                parsed.warnings.push(format!(
                    "line {line_no}: non-integer PY {:?}, record skipped",
                    cell("PY").unwrap_or("")
                ));
                continue;
            }
        };

        let id = match cell("UT") {
            Some(ut) => format!("wos:{ut}"),
            None => format!("wos:row{line_no}"),
        };
        if !seen.insert(id.clone()) {
            return Err(RecordError::DuplicateId(id));
        }

        let citation_count = match cell("TC") {
            Some(tc) => match tc.parse::<u32>() {
                Ok(n) => Some(n),
                Err(_) => {
                    parsed
                        .warnings
                        .push(format!("line {line_no}: non-integer TC {tc:?}, count dropped"));
                    None
                }
            },
            None => None,
        };

        let codes = cell("WC")
            .map(|wc| {
                wc.split(';')
                    .map(str::trim)
                    .filter(|c| !c.is_empty())
                    .map(|c| CodeTag::new(CodeScheme::WosCategory, c))
                    .collect()
            })
            .unwrap_or_default();

        let affiliations = cell("C1")
            .map(|c1| c1.split(';').filter_map(parse_address).collect())
            .unwrap_or_default();

        let record = Record {
            id,
            kind: RecordKind::Publication,
            source_db: SourceDb::Wos,
            title: cell("TI").unwrap_or_default().to_string(),
            abstract_text: cell("AB").map(str::to_string),
            claims: None,
            year,
            authors: cell("AU")
                .map(|au| au.split(';').map(|a| a.trim().to_string()).collect())
                .unwrap_or_default(),
            affiliations,
            citation_count,
            codes,
            journal: cell("SO").map(str::to_string),
        };
        record.validate()?;
        parsed.records.push(record);
    }
    Ok(parsed)
}

/// One C1 address, with any leading `[Author; ...]` group stripped.
fn parse_address(part: &str) -> Option<Affiliation> {
    let mut text = part.trim();
    if let Some(rest) = text.strip_prefix('[') {
        text = rest.split_once(']').map(|(_, after)| after).unwrap_or(rest);
        text = text.trim();
    }
    if text.is_empty() {
        None
    } else {
        Some(Affiliation::from_raw(text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "UT\tTI\tAB\tAU\tC1\tPY\tTC\tWC\tSO";

    #[test]
    fn header_only_is_empty_list() {
        let parsed = parse_wos_export(HEADER.as_bytes()).unwrap();
        assert!(parsed.records.is_empty());
    }

    #[test]
    fn missing_header_is_an_error() {
        assert!(matches!(
            parse_wos_export(std::io::empty()).unwrap_err(),
            RecordError::BadHeader(_)
        ));
        assert!(matches!(
            parse_wos_export("just a title\tno tabs of interest".as_bytes()).unwrap_err(),
            RecordError::BadHeader(_)
        ));
    }

    #[test]
    fn citation_count_comes_from_tc() {
        let input = format!(
            "{HEADER}\nA1\tsiRNA delivery\t\tSmith J\tUniv Sussex, Brighton, UK\t2004\t17\tOncology\tGene Ther"
        );
        let parsed = parse_wos_export(input.as_bytes()).unwrap();
        assert_eq!(parsed.records[0].citation_count, Some(17));
        assert_eq!(parsed.records[0].id, "wos:A1");
    }

    #[test]
    fn wc_cell_splits_on_semicolons() {
        let input = format!("{HEADER}\nA1\tHPV testing\t\t\t\t2004\t3\tOncology; Virology\tJ Clin Virol");
        let parsed = parse_wos_export(input.as_bytes()).unwrap();
        let codes = &parsed.records[0].codes;
        assert_eq!(codes.len(), 2);
        assert_eq!(codes[0], CodeTag::new(CodeScheme::WosCategory, "Oncology"));
        assert_eq!(codes[1], CodeTag::new(CodeScheme::WosCategory, "Virology"));
    }

    #[test]
    fn non_integer_py_skips_row_with_report() {
        let input = format!("{HEADER}\nA1\tTitle one\t\t\t\tn/a\t\t\t\nA2\tTitle two\t\t\t\t2005\t\t\t");
        let parsed = parse_wos_export(input.as_bytes()).unwrap();
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.records[0].year, 2005);
        assert_eq!(parsed.warnings.len(), 1);
    }

    #[test]
    fn bracketed_author_groups_are_stripped_from_addresses() {
        let input = format!(
            "{HEADER}\nA1\tTitle\t\tSmith J\t[Smith, J] Univ Sussex, Brighton, UK; [Doe, A] Mayo Clin, Rochester, USA\t2004\t\t\t"
        );
        let parsed = parse_wos_export(input.as_bytes()).unwrap();
        let affs = &parsed.records[0].affiliations;
        assert_eq!(affs.len(), 2);
        assert_eq!(affs[0].city.as_deref(), Some("Brighton"));
        assert_eq!(affs[1].organisation.as_deref(), Some("Mayo Clin"));
    }
}
