//! Rao-Stirling diversity over an overlay frame.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{Basemap, OverlayError, OverlayFrame, Result};
use crate::record::{CodeScheme, Window};

/// Pair convention used by [`rao_stirling`], stated in every report: the
/// sum runs over ordered pairs i ≠ j (twice the unordered-pair sum).
pub const RAO_STIRLING_CONVENTION: &str = "ordered-pairs";

#[derive(Debug, Clone, Serialize)]
pub struct DiversityReport {
    pub window: Window,
    pub scheme: CodeScheme,
    /// Activity proportions over codes with count > 0; they sum to 1.
    pub proportions: BTreeMap<String, f64>,
    /// Δ = Σ_{i≠j} p_i p_j d_ij.
    pub delta: f64,
    pub convention: &'static str,
}

/// Computes Δ = Σ over ordered pairs i ≠ j of p_i p_j d_ij, with p the
/// frame's activity proportions and d the full (unpruned) distance matrix
/// of the basemap, indexed like its nodes.
pub fn rao_stirling(
    frame: &OverlayFrame,
    basemap: &Basemap,
    distances: &[Vec<f64>],
) -> Result<DiversityReport> {
    let total = frame.total_count();
    if total == 0 {
        return Err(OverlayError::EmptyFrame);
    }
    let index = basemap.node_index();
    let active: Vec<(usize, f64)> = frame
        .counts
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(code, &c)| (index[code.as_str()], c as f64 / total as f64))
        .collect();

    let mut delta = 0.0;
    for (a, &(i, pi)) in active.iter().enumerate() {
        for &(j, pj) in &active[(a + 1)..] {
            delta += 2.0 * pi * pj * distances[i][j];
        }
    }

    Ok(DiversityReport {
        window: frame.window,
        scheme: frame.scheme,
        proportions: frame
            .counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(code, &c)| (code.clone(), c as f64 / total as f64))
            .collect(),
        delta,
        convention: RAO_STIRLING_CONVENTION,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlay::{BasemapEdge, BasemapNode};

    fn map_with(codes: &[&str], distances: Vec<Vec<f64>>) -> (Basemap, Vec<Vec<f64>>) {
        let map = Basemap {
            id: "div".into(),
            scheme: CodeScheme::Journal,
            reference: false,
            nodes: codes
                .iter()
                .enumerate()
                .map(|(i, &code)| BasemapNode {
                    code: code.into(),
                    label: code.into(),
                    cluster: 0,
                    branch: None,
                    x: i as f64,
                    y: 0.0,
                })
                .collect(),
            edges: Vec::<BasemapEdge>::new(),
            similarity: None,
        };
        (map, distances)
    }

    fn frame(map: &Basemap, counts: &[(&str, u32)]) -> OverlayFrame {
        OverlayFrame {
            basemap_id: map.id.clone(),
            scheme: map.scheme,
            window: Window::new(2002, 2006).unwrap(),
            counts: counts.iter().map(|&(c, n)| (c.to_string(), n)).collect(),
            unmatched: Default::default(),
            sizes: Default::default(),
        }
    }

    #[test]
    fn single_code_activity_has_zero_diversity() {
        let (map, d) = map_with(&["A", "B"], vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let report = rao_stirling(&frame(&map, &[("A", 7)]), &map, &d).unwrap();
        assert_eq!(report.delta, 0.0);
    }

    #[test]
    fn even_split_at_unit_distance_is_half() {
        let (map, d) = map_with(&["A", "B"], vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let report = rao_stirling(&frame(&map, &[("A", 5), ("B", 5)]), &map, &d).unwrap();
        assert!((report.delta - 0.5).abs() < 1e-15);
        assert_eq!(report.convention, "ordered-pairs");
    }

    #[test]
    fn empty_frame_is_an_error() {
        let (map, d) = map_with(&["A"], vec![vec![0.0]]);
        assert!(matches!(
            rao_stirling(&frame(&map, &[]), &map, &d).unwrap_err(),
            OverlayError::EmptyFrame
        ));
    }

    #[test]
    fn proportions_sum_to_one() {
        let (map, d) = map_with(
            &["A", "B", "C"],
            vec![
                vec![0.0, 0.3, 0.9],
                vec![0.3, 0.0, 0.5],
                vec![0.9, 0.5, 0.0],
            ],
        );
        let report = rao_stirling(&frame(&map, &[("A", 1), ("B", 2), ("C", 7)]), &map, &d).unwrap();
        let sum: f64 = report.proportions.values().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}
