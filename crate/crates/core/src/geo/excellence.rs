//! Top-cited thresholding and the χ² two-proportion excellence test.

use std::collections::{BTreeMap, BTreeSet};

use super::{Direction, ExcellenceConfig, GeoError, Gazetteer, Result, SiteStats};
use crate::record::Record;

/// Top-cited selection for one window.
#[derive(Debug, Clone)]
pub struct TopCited {
    /// Citation count of the record at rank ceil(share·N); every record at
    /// or above it is in the top set (ties included).
    pub cutoff: u32,
    pub top_ids: BTreeSet<String>,
    /// All counts equal: the rule selects everything.
    pub degenerate: bool,
}

/// Selects the top `top_share` most-cited records, ties included, so the
/// selected share is always at least `top_share`.
pub fn top_cited_threshold(records: &[&Record], top_share: f64) -> Result<TopCited> {
    if records.is_empty() {
        return Err(GeoError::EmptyInput);
    }
    let mut counts = Vec::with_capacity(records.len());
    for record in records {
        match record.citation_count {
            Some(c) => counts.push((c, record.id.as_str())),
            None => return Err(GeoError::MissingCitations(record.id.clone())),
        }
    }
    counts.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
    let rank = ((top_share * records.len() as f64).ceil() as usize).max(1);
    let cutoff = counts[rank - 1].0;
    let top_ids: BTreeSet<String> = counts
        .iter()
        .filter(|(c, _)| *c >= cutoff)
        .map(|(_, id)| id.to_string())
        .collect();
    let degenerate = counts.first().map(|(c, _)| *c) == counts.last().map(|(c, _)| *c);
    Ok(TopCited {
        cutoff,
        top_ids,
        degenerate,
    })
}

/// χ² verdict for one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcellenceOutcome {
    pub chi2: f64,
    pub significant: bool,
    pub direction: Direction,
    pub validity_warning: bool,
    pub expected_top: f64,
}

/// Pearson χ² on the 2×2 table (site vs rest of world) × (top vs non-top),
/// df = 1, no continuity correction unless configured. Degenerate tables
/// with a zero margin score 0 and carry a validity warning.
pub fn excellence_test(
    n_top: u32,
    n_total: u32,
    k_global: u32,
    n_global: u32,
    config: &ExcellenceConfig,
) -> ExcellenceOutcome {
    debug_assert!(n_top <= n_total && n_total <= n_global && n_top <= k_global);
    let a = n_top as f64;
    let b = (n_total - n_top) as f64;
    let c = (k_global - n_top) as f64;
    let d = (n_global - n_total) as f64 - c;
    let n = n_global as f64;

    let expected_top = n_total as f64 * k_global as f64 / n;
    // Integer cross product keeps the exactly-equal case exact.
    let direction = match (u64::from(n_top) * u64::from(n_global))
        .cmp(&(u64::from(n_total) * u64::from(k_global)))
    {
        std::cmp::Ordering::Greater => Direction::Positive,
        std::cmp::Ordering::Less => Direction::Negative,
        std::cmp::Ordering::Equal => Direction::None,
    };

    let row1 = a + b;
    let row2 = c + d;
    let col1 = a + c;
    let col2 = b + d;
    let zero_margin = row1 == 0.0 || row2 == 0.0 || col1 == 0.0 || col2 == 0.0;
    let chi2 = if zero_margin {
        0.0
    } else {
        let det = a * d - b * c;
        let num = if config.continuity_correction {
            let shrunk = (det.abs() - n / 2.0).max(0.0);
            shrunk * shrunk
        } else {
            det * det
        };
        n * num / (row1 * row2 * col1 * col2)
    };

    let min_expected = if zero_margin {
        0.0
    } else {
        [row1 * col1, row1 * col2, row2 * col1, row2 * col2]
            .into_iter()
            .map(|m| m / n)
            .fold(f64::INFINITY, f64::min)
    };

    ExcellenceOutcome {
        chi2,
        significant: chi2 > config.chi2_critical,
        direction,
        validity_warning: zero_margin || min_expected < 5.0,
        expected_top,
    }
}

/// Excellence statistics for every city with at least one geocoded record
/// in the window. Counting is whole and per-record deduplicated; K and N
/// are computed over the window's geocoded records. Windows with fewer
/// than `config.min_sample` geocoded records are refused.
pub fn excellence_map(
    records: &[&Record],
    gazetteer: &Gazetteer,
    config: &ExcellenceConfig,
) -> Result<Vec<SiteStats>> {
    let geocoded: Vec<&Record> = records
        .iter()
        .copied()
        .filter(|r| !super::record_sites(r, gazetteer).is_empty())
        .collect();
    if geocoded.len() < config.min_sample {
        return Err(GeoError::SampleTooSmall {
            have: geocoded.len(),
            need: config.min_sample,
        });
    }

    let top = top_cited_threshold(&geocoded, config.top_share)?;
    let k_global = top.top_ids.len() as u32;
    let n_global = geocoded.len() as u32;

    #[derive(Default)]
    struct CityTally {
        n_total: u32,
        n_top: u32,
    }
    let mut tallies: BTreeMap<String, (super::GeoSite, CityTally)> = BTreeMap::new();
    for record in &geocoded {
        for site in super::record_sites(record, gazetteer) {
            let entry = tallies
                .entry(site.key())
                .or_insert_with(|| (site, CityTally::default()));
            entry.1.n_total += 1;
            if top.top_ids.contains(&record.id) {
                entry.1.n_top += 1;
            }
        }
    }

    Ok(tallies
        .into_values()
        .map(|(site, tally)| {
            let outcome = excellence_test(tally.n_top, tally.n_total, k_global, n_global, config);
            SiteStats {
                site,
                n_total: tally.n_total,
                n_top: tally.n_top,
                expected_top: outcome.expected_top,
                chi2: outcome.chi2,
                significant: outcome.significant,
                direction: outcome.direction,
                validity_warning: outcome.validity_warning,
            }
        })
        .collect())
}
