//! Activity projection onto a basemap.

use std::collections::BTreeSet;

use super::{Basemap, OverlayError, OverlayFrame, Result};
use crate::record::{CodeScheme, Record, Window};
use crate::scale::{ScaleRule, SizeScale};

#[derive(Debug, Clone, Copy)]
pub struct ProjectOptions {
    /// IPC truncation level (3 or 4 characters).
    pub ipc_level: usize,
    /// MeSH tree levels kept.
    pub mesh_levels: usize,
    pub min_radius: f64,
    pub max_radius: f64,
    /// Override the per-scheme size rule (MeSH log2(c+1), others linear).
    pub rule: Option<ScaleRule>,
}

impl Default for ProjectOptions {
    fn default() -> ProjectOptions {
        ProjectOptions {
            ipc_level: 4,
            mesh_levels: 2,
            min_radius: 2.0,
            max_radius: 14.0,
            rule: None,
        }
    }
}

fn default_rule(scheme: CodeScheme) -> ScaleRule {
    match scheme {
        CodeScheme::Mesh => ScaleRule::Log2Plus1,
        CodeScheme::WosCategory | CodeScheme::Journal | CodeScheme::Ipc => ScaleRule::Linear,
    }
}

/// The deduplicated codes one record contributes for a scheme, after
/// MeSH/IPC truncation. Journal overlays read the journal field.
fn record_codes(
    record: &Record,
    scheme: CodeScheme,
    options: &ProjectOptions,
    reports: &mut Vec<String>,
) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    if scheme == CodeScheme::Journal {
        if let Some(journal) = &record.journal {
            out.insert(journal.clone());
        }
    }
    for tag in &record.codes {
        if tag.scheme != scheme {
            continue;
        }
        match scheme {
            CodeScheme::Mesh => match super::mesh_truncate_code(&tag.code, options.mesh_levels) {
                Ok(Some((code, _))) => {
                    out.insert(code);
                }
                Ok(None) => {}
                Err(e) => reports.push(format!("{}: {e}", record.id)),
            },
            CodeScheme::Ipc => match super::ipc_truncate_code(&tag.code, options.ipc_level) {
                Ok(code) => {
                    out.insert(code);
                }
                Err(e) => reports.push(format!("{}: {e}", record.id)),
            },
            _ => {
                out.insert(tag.code.clone());
            }
        }
    }
    out
}

/// Projects a window's records onto the basemap: per-record deduped code
/// occurrences are counted, matched against the basemap nodes, and sized
/// by the per-scheme rule. Occurrence mass is conserved between `counts`
/// and `unmatched`.
pub fn project_overlay(
    records: &[&Record],
    basemap: &Basemap,
    window: Window,
    options: &ProjectOptions,
) -> Result<(OverlayFrame, Vec<String>)> {
    let scheme = basemap.scheme;
    let mut reports = Vec::new();
    let mut frame = OverlayFrame {
        basemap_id: basemap.id.clone(),
        scheme,
        window,
        counts: Default::default(),
        unmatched: Default::default(),
        sizes: Default::default(),
    };

    let known = basemap.node_index();
    let mut any_scheme_code = false;
    let mut any_other_code = false;
    for record in records {
        let codes = record_codes(record, scheme, options, &mut reports);
        any_scheme_code |= !codes.is_empty();
        any_other_code |= record.codes.iter().any(|t| t.scheme != scheme)
            || (scheme != CodeScheme::Journal && record.journal.is_some());
        for code in codes {
            if known.contains_key(code.as_str()) {
                *frame.counts.entry(code).or_insert(0) += 1;
            } else {
                *frame.unmatched.entry(code).or_insert(0) += 1;
            }
        }
    }
    if !records.is_empty() && !any_scheme_code && any_other_code {
        return Err(OverlayError::SchemeMismatch { scheme });
    }

    let rule = options.rule.unwrap_or_else(|| default_rule(scheme));
    let scale = SizeScale::new(rule, options.min_radius, options.max_radius);
    let max_count = frame.counts.values().copied().max().unwrap_or(0);
    frame.sizes = frame
        .counts
        .iter()
        .map(|(code, &count)| (code.clone(), round3(scale.radius(count, max_count))))
        .collect();

    if !frame.unmatched.is_empty() {
        reports.push(format!(
            "{} codes not on the {} basemap (total occurrences {})",
            frame.unmatched.len(),
            scheme,
            frame.unmatched.values().map(|&c| u64::from(c)).sum::<u64>()
        ));
    }
    Ok((frame, reports))
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}
