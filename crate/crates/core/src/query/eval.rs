//! Query evaluation against records, and corpus delineation over a store.

use super::{Field, QueryAst, TermNode};
use crate::record::{CodeScheme, Corpus, Provenance, Record, SourceDb, Store};

use std::collections::BTreeSet;

/// Splits text into tokens on any character that is not alphanumeric,
/// `*`, or `-`; hyphens stay token-internal, so "double-stranded" is one
/// token.
pub fn tokenize_text(text: &str) -> Vec<&str> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '*' || c == '-'))
        .filter(|t| !t.is_empty())
        .collect()
}

/// Case-insensitive token match where `*` matches any (possibly empty)
/// character run.
pub fn wildcard_match(pattern: &str, token: &str) -> bool {
    let p: Vec<char> = pattern.to_lowercase().chars().collect();
    let t: Vec<char> = token.to_lowercase().chars().collect();
    // Classic two-pointer glob over `*` only.
    let (mut pi, mut ti) = (0usize, 0usize);
    let (mut star, mut star_ti) = (None::<usize>, 0usize);
    while ti < t.len() {
        if pi < p.len() && (p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some(pi);
            star_ti = ti;
            pi += 1;
        } else if let Some(s) = star {
            pi = s + 1;
            star_ti += 1;
            ti = star_ti;
        } else {
            return false;
        }
    }
    while pi < p.len() && p[pi] == '*' {
        pi += 1;
    }
    pi == p.len()
}

/// True when the record satisfies the query. Matching is case-insensitive;
/// terms over an absent field are false.
pub fn evaluate(ast: &QueryAst, record: &Record) -> bool {
    match ast {
        QueryAst::And(children) => children.iter().all(|c| evaluate(c, record)),
        QueryAst::Or(children) => children.iter().any(|c| evaluate(c, record)),
        QueryAst::Term(term) => eval_term(term, record),
    }
}

fn eval_term(term: &TermNode, record: &Record) -> bool {
    match term.field {
        Field::Title => text_matches(term, &record.title),
        Field::Abstract => record
            .abstract_text
            .as_deref()
            .is_some_and(|text| text_matches(term, text)),
        Field::Claims => record
            .claims
            .as_deref()
            .is_some_and(|text| text_matches(term, text)),
        // MH terms match within any single MeSH code string.
        Field::Mesh => record
            .codes
            .iter()
            .filter(|tag| tag.scheme == CodeScheme::Mesh)
            .any(|tag| text_matches(term, &tag.code)),
    }
}

fn text_matches(term: &TermNode, text: &str) -> bool {
    let tokens = tokenize_text(text);
    if term.is_phrase {
        let ptokens = tokenize_text(&term.pattern);
        if ptokens.is_empty() || ptokens.len() > tokens.len() {
            return false;
        }
        (0..=tokens.len() - ptokens.len()).any(|start| {
            ptokens
                .iter()
                .zip(&tokens[start..])
                .all(|(p, t)| wildcard_match(p, t))
        })
    } else {
        tokens.iter().any(|t| wildcard_match(&term.pattern, t))
    }
}

/// Selects every record of `source` (all sources when `None`) whose year
/// lies in `year_range` and which satisfies the query. Provenance records
/// the canonical query text.
pub fn delineate(
    store: &Store,
    ast: &QueryAst,
    year_range: (i32, i32),
    source: Option<SourceDb>,
    name: &str,
    retrieved_on: &str,
) -> Corpus {
    let (from, to) = year_range;
    let record_ids: BTreeSet<String> = store
        .iter()
        .filter(|r| source.is_none_or(|s| r.source_db == s))
        .filter(|r| r.year >= from && r.year <= to)
        .filter(|r| evaluate(ast, r))
        .map(|r| r.id.clone())
        .collect();
    Corpus {
        name: name.to_string(),
        record_ids,
        provenance: Provenance {
            query_text: super::to_canonical_string(ast),
            source_db: source.unwrap_or(SourceDb::Wos),
            retrieved_on: retrieved_on.to_string(),
        },
    }
}
