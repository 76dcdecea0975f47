//! Basemap construction for synthetic or small matrices: cosine edges,
//! stress layout, and greedy modularity clustering. The published
//! reference maps are consumed as data files instead.

use super::{Basemap, BasemapEdge, BasemapNode, OverlayError, Result};
use crate::network::{stress_layout_weighted, StressOptions};
use crate::record::CodeScheme;

/// Builds a basemap from a non-negative co-occurrence (or cross-citation)
/// matrix. Edges keep pairs with similarity at or above
/// `similarity_prune_threshold`; the full matrix is retained for
/// diversity distances. Deterministic given `seed`.
pub fn build_basemap(
    labels: &[String],
    matrix: &[Vec<f64>],
    scheme: CodeScheme,
    seed: u64,
    similarity_prune_threshold: f64,
) -> Result<(Basemap, Vec<String>)> {
    if matrix.iter().all(|row| row.iter().all(|&x| x == 0.0)) {
        return Err(OverlayError::DegenerateBasemap);
    }
    let sim = super::cosine_similarity(matrix);
    let n = labels.len();

    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if sim[i][j] >= similarity_prune_threshold && sim[i][j] > 0.0 {
                edges.push(BasemapEdge { i, j, s: sim[i][j] });
            }
        }
    }
    let mut warnings = Vec::new();
    if edges.is_empty() {
        warnings.push(format!(
            "sparse basemap: no pair reaches similarity {similarity_prune_threshold}"
        ));
    }

    let layout_edges: Vec<(usize, usize, f64)> = edges
        .iter()
        .map(|e| (e.i, e.j, (1.0 - e.s).max(0.01)))
        .collect();
    let layout = stress_layout_weighted(n, &layout_edges, seed, &StressOptions::default());

    let clusters = greedy_modularity(n, &edges);

    let nodes = labels
        .iter()
        .enumerate()
        .map(|(i, label)| BasemapNode {
            code: label.clone(),
            label: label.clone(),
            cluster: clusters[i],
            branch: match scheme {
                CodeScheme::Mesh => label.chars().next().filter(|c| c.is_ascii_uppercase()),
                _ => None,
            },
            x: layout.coords[i].0,
            y: layout.coords[i].1,
        })
        .collect();

    Ok((
        Basemap {
            id: format!("{scheme}-built"),
            scheme,
            reference: false,
            nodes,
            edges,
            similarity: Some(sim),
        },
        warnings,
    ))
}

/// Greedy agglomerative modularity maximisation over the pruned weighted
/// graph. Merges the connected community pair with the largest gain until
/// no merge improves modularity; ties break on the smallest community
/// ids, so the result is deterministic.
fn greedy_modularity(n: usize, edges: &[BasemapEdge]) -> Vec<u32> {
    let mut community: Vec<usize> = (0..n).collect();
    if edges.is_empty() {
        return renumber(&community);
    }
    let two_m: f64 = 2.0 * edges.iter().map(|e| e.s).sum::<f64>();
    let mut degree = vec![0.0f64; n];
    for e in edges {
        degree[e.i] += e.s;
        degree[e.j] += e.s;
    }

    // community totals
    let mut total: Vec<f64> = degree.clone();
    loop {
        // weight between community pairs
        let mut between: std::collections::BTreeMap<(usize, usize), f64> =
            std::collections::BTreeMap::new();
        for e in edges {
            let (a, b) = (community[e.i], community[e.j]);
            if a == b {
                continue;
            }
            let key = (a.min(b), a.max(b));
            *between.entry(key).or_insert(0.0) += e.s;
        }
        let mut best: Option<((usize, usize), f64)> = None;
        for (&pair, &w) in &between {
            let gain = w / two_m * 2.0 - 2.0 * (total[pair.0] / two_m) * (total[pair.1] / two_m);
            match best {
                Some((_, best_gain)) if gain <= best_gain => {}
                _ => best = Some((pair, gain)),
            }
        }
        match best {
            Some(((a, b), gain)) if gain > 1e-12 => {
                for c in community.iter_mut() {
                    if *c == b {
                        *c = a;
                    }
                }
                total[a] += total[b];
                total[b] = 0.0;
            }
            _ => break,
        }
    }
    renumber(&community)
}

/// Relabels community ids as dense cluster numbers ordered by first
/// appearance.
fn renumber(community: &[usize]) -> Vec<u32> {
    let mut mapping = std::collections::BTreeMap::new();
    let mut next = 0u32;
    community
        .iter()
        .map(|&c| {
            *mapping.entry(c).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_block_matrix_recovers_two_clusters() {
        // Two groups of rows that co-occur within the group only.
        let labels: Vec<String> = (0..6).map(|i| format!("C{i:02}")).collect();
        let mut matrix = vec![vec![0.0; 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                matrix[i][j] = if i == j { 4.0 } else { 3.0 };
            }
        }
        for i in 3..6 {
            for j in 3..6 {
                matrix[i][j] = if i == j { 4.0 } else { 3.0 };
            }
        }
        let (map, warnings) =
            build_basemap(&labels, &matrix, CodeScheme::WosCategory, 7, 0.05).unwrap();
        assert!(warnings.is_empty());
        let c0 = map.nodes[0].cluster;
        let c3 = map.nodes[3].cluster;
        assert_ne!(c0, c3);
        assert!(map.nodes[..3].iter().all(|n| n.cluster == c0));
        assert!(map.nodes[3..].iter().all(|n| n.cluster == c3));
    }

    #[test]
    fn all_zero_matrix_is_degenerate() {
        let labels = vec!["A".to_string(), "B".to_string()];
        let matrix = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert!(matches!(
            build_basemap(&labels, &matrix, CodeScheme::WosCategory, 1, 0.05).unwrap_err(),
            OverlayError::DegenerateBasemap
        ));
    }

    #[test]
    fn threshold_one_on_distinct_rows_is_sparse_but_valid() {
        let labels = vec!["A".to_string(), "B".to_string()];
        let matrix = vec![vec![1.0, 0.0], vec![0.5, 1.0]];
        let (map, warnings) =
            build_basemap(&labels, &matrix, CodeScheme::WosCategory, 1, 1.0).unwrap();
        assert!(map.edges.is_empty());
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn build_is_deterministic_for_a_seed() {
        let labels: Vec<String> = (0..5).map(|i| format!("L{i}")).collect();
        let matrix: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..5).map(|j| ((i * 3 + j * 7) % 5) as f64).collect())
            .collect();
        let (a, _) = build_basemap(&labels, &matrix, CodeScheme::Journal, 99, 0.05).unwrap();
        let (b, _) = build_basemap(&labels, &matrix, CodeScheme::Journal, 99, 0.05).unwrap();
        assert_eq!(a, b);
    }
}
