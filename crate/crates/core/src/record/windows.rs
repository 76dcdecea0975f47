//! Temporal windowing and per-year tallies.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{Corpus, Record, RecordError, Result, Store, Window};

/// Window layout: fixed-width consecutive windows from `anchor_year`, with
/// an optional (possibly shorter) first window placed strictly before the
/// regular sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub width_years: u32,
    pub anchor_year: i32,
    pub first_window_override: Option<Window>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowPartition {
    pub windows: Vec<(Window, Vec<String>)>,
    /// Ids whose year falls outside every window.
    pub excluded: Vec<String>,
}

/// Partitions a corpus into consecutive non-overlapping windows. Every
/// in-range record lands in exactly one window; out-of-range records are
/// returned in `excluded`.
pub fn window_partition(
    store: &Store,
    corpus: &Corpus,
    spec: &WindowSpec,
) -> Result<WindowPartition> {
    if spec.width_years < 1 {
        return Err(RecordError::BadWidth(spec.width_years));
    }
    if let Some(first) = spec.first_window_override {
        if first.end_year >= spec.anchor_year {
            return Err(RecordError::OverrideOverlap {
                override_window: first,
                anchor: spec.anchor_year,
            });
        }
    }

    let records: Vec<&Record> = corpus
        .record_ids
        .iter()
        .filter_map(|id| store.get(id))
        .collect();
    let max_year = records.iter().map(|r| r.year).max();

    let mut windows: Vec<Window> = Vec::new();
    if let Some(first) = spec.first_window_override {
        windows.push(first);
    }
    let width = spec.width_years as i32;
    let last_needed = max_year.unwrap_or(spec.anchor_year).max(spec.anchor_year);
    let mut start = spec.anchor_year;
    while start <= last_needed {
        windows.push(Window::new(start, start + width - 1)?);
        start += width;
    }

    let mut partition = WindowPartition {
        windows: windows.into_iter().map(|w| (w, Vec::new())).collect(),
        excluded: Vec::new(),
    };
    for record in records {
        match partition
            .windows
            .iter_mut()
            .find(|(w, _)| w.contains(record.year))
        {
            Some((_, ids)) => ids.push(record.id.clone()),
            None => partition.excluded.push(record.id.clone()),
        }
    }
    Ok(partition)
}

/// Per-year record counts with every year between min and max present.
pub fn yearly_counts(store: &Store, corpus: &Corpus) -> BTreeMap<i32, usize> {
    let mut counts: BTreeMap<i32, usize> = BTreeMap::new();
    for id in &corpus.record_ids {
        if let Some(record) = store.get(id) {
            *counts.entry(record.year).or_insert(0) += 1;
        }
    }
    zero_fill(&mut counts);
    counts
}

fn zero_fill(counts: &mut BTreeMap<i32, usize>) {
    if let (Some(&min), Some(&max)) = (
        counts.keys().next(),
        counts.keys().next_back(),
    ) {
        for year in min..=max {
            counts.entry(year).or_insert(0);
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendComparison {
    pub name_a: String,
    pub name_b: String,
    pub years: Vec<i32>,
    pub series_a: Vec<usize>,
    pub series_b: Vec<usize>,
}

/// Aligns two corpora on the union of their year ranges, zero-filled.
pub fn compare_trends(store: &Store, a: &Corpus, b: &Corpus) -> TrendComparison {
    let counts_a = yearly_counts(store, a);
    let counts_b = yearly_counts(store, b);
    let min = counts_a
        .keys()
        .chain(counts_b.keys())
        .min()
        .copied();
    let max = counts_a
        .keys()
        .chain(counts_b.keys())
        .max()
        .copied();
    let mut cmp = TrendComparison {
        name_a: a.name.clone(),
        name_b: b.name.clone(),
        years: Vec::new(),
        series_a: Vec::new(),
        series_b: Vec::new(),
    };
    if let (Some(min), Some(max)) = (min, max) {
        for year in min..=max {
            cmp.years.push(year);
            cmp.series_a.push(counts_a.get(&year).copied().unwrap_or(0));
            cmp.series_b.push(counts_b.get(&year).copied().unwrap_or(0));
        }
    }
    cmp
}
