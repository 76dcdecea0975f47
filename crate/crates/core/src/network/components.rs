//! Connected components, the structural summary table, and degree
//! centrality.

use std::collections::BTreeSet;

use serde::Serialize;

use super::Graph;
use crate::record::Window;

/// Exact count/total pair; the display form rounds to two decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Share {
    pub count: usize,
    pub total: usize,
}

impl Share {
    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.count as f64 / self.total as f64
        }
    }

    /// Percentage rounded to two decimals, as printed in reports.
    pub fn percent_2dp(&self) -> f64 {
        (self.percent() * 100.0).round() / 100.0
    }
}

impl std::fmt::Display for Share {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({:.2}%)", self.count, self.percent())
    }
}

/// Structural summary of one window's co-authorship graph.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub window: Window,
    pub n_articles: usize,
    pub n_nodes: usize,
    /// Unweighted edge count.
    pub n_ties: usize,
    /// Sum of edge weights, reported alongside the unweighted count.
    pub total_tie_weight: u64,
    /// Components with at least `min_component_size` nodes (the giant
    /// component is included when it is large enough).
    pub n_components_min4: usize,
    pub n_components_total: usize,
    pub giant_size: usize,
    pub giant_share: Share,
    pub isolated_count: usize,
    pub isolated_share: Share,
}

/// Connected components by traversal; singleton nodes are size-1
/// components, so the partition covers every node.
pub fn connected_components(graph: &Graph) -> Vec<Vec<usize>> {
    let adj = graph.adjacency();
    let mut seen = vec![false; graph.nodes.len()];
    let mut components = Vec::new();
    for start in 0..graph.nodes.len() {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut component = Vec::new();
        while let Some(node) = stack.pop() {
            component.push(node);
            for &next in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}

pub fn component_report(
    graph: &Graph,
    window: Window,
    n_articles: usize,
    min_component_size: usize,
) -> ComponentReport {
    let components = connected_components(graph);
    let degrees = degree_centrality(graph);
    let n_nodes = graph.nodes.len();
    let giant_size = components.iter().map(Vec::len).max().unwrap_or(0);
    let isolated_count = degrees.iter().filter(|&&d| d == 0).count();
    ComponentReport {
        window,
        n_articles,
        n_nodes,
        n_ties: graph.edges.len(),
        total_tie_weight: graph.total_weight(),
        n_components_min4: components
            .iter()
            .filter(|c| c.len() >= min_component_size)
            .count(),
        n_components_total: components.len(),
        giant_size,
        giant_share: Share {
            count: giant_size,
            total: n_nodes,
        },
        isolated_count,
        isolated_share: Share {
            count: isolated_count,
            total: n_nodes,
        },
    }
}

/// Unweighted degree (count of incident edges) per node.
pub fn degree_centrality(graph: &Graph) -> Vec<usize> {
    let mut degrees = vec![0usize; graph.nodes.len()];
    for edge in &graph.edges {
        degrees[edge.u] += 1;
        degrees[edge.v] += 1;
    }
    degrees
}

#[derive(Debug, Clone, Default)]
pub struct TopCentral {
    pub labels: BTreeSet<String>,
    /// The rank node has degree 0, so no meaningful top set exists.
    pub degenerate: bool,
}

/// Labels of the top `share` most-connected nodes (ties included). Nodes
/// with degree 0 never qualify; if the cutoff itself is 0 the result is
/// empty and flagged degenerate.
pub fn top_central(graph: &Graph, share: f64) -> TopCentral {
    if graph.nodes.is_empty() {
        return TopCentral::default();
    }
    let degrees = degree_centrality(graph);
    let mut sorted: Vec<usize> = degrees.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let rank = ((share * graph.nodes.len() as f64).ceil() as usize).max(1);
    let cutoff = sorted[rank - 1];
    if cutoff == 0 {
        return TopCentral {
            labels: BTreeSet::new(),
            degenerate: true,
        };
    }
    TopCentral {
        labels: degrees
            .iter()
            .enumerate()
            .filter(|(_, &d)| d >= cutoff)
            .map(|(i, _)| graph.nodes[i].label.clone())
            .collect(),
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Edge, Node, NodeKind};

    fn graph_with(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph {
            nodes: (0..n)
                .map(|i| Node {
                    id: format!("n{i}"),
                    label: format!("node {i}"),
                    kind: NodeKind::Org,
                    article_count: 1,
                })
                .collect(),
            edges: edges
                .iter()
                .map(|&(u, v)| Edge {
                    u: u.min(v),
                    v: u.max(v),
                    weight: 1,
                })
                .collect(),
        }
    }

    #[test]
    fn empty_graph_gives_zero_report() {
        let report = component_report(
            &Graph::default(),
            Window::new(1982, 1986).unwrap(),
            0,
            4,
        );
        assert_eq!(report.n_nodes, 0);
        assert_eq!(report.giant_size, 0);
        assert_eq!(report.giant_share.percent(), 0.0);
        assert_eq!(report.isolated_count, 0);
    }

    #[test]
    fn shares_round_to_published_precision() {
        assert_eq!(Share { count: 239, total: 471 }.percent_2dp(), 50.74);
        assert_eq!(Share { count: 55, total: 471 }.percent_2dp(), 11.68);
        assert_eq!(Share { count: 5, total: 6 }.percent_2dp(), 83.33);
        assert_eq!(Share { count: 82, total: 232 }.percent_2dp(), 35.34);
    }

    #[test]
    fn component_partition_is_total() {
        let graph = graph_with(7, &[(0, 1), (1, 2), (3, 4)]);
        let components = connected_components(&graph);
        let covered: usize = components.iter().map(Vec::len).sum();
        assert_eq!(covered, graph.nodes.len());
        assert_eq!(components.len(), 4); // {0,1,2}, {3,4}, {5}, {6}
    }

    #[test]
    fn min_size_filter_counts_only_big_components() {
        let graph = graph_with(9, &[(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (6, 7)]);
        let report = component_report(&graph, Window::new(2002, 2006).unwrap(), 9, 4);
        assert_eq!(report.n_components_min4, 2);
        assert_eq!(report.n_components_total, 3);
        assert_eq!(report.giant_size, 4);
        assert_eq!(report.isolated_count, 1);
    }

    #[test]
    fn star_graph_top_central_is_center() {
        let edges: Vec<(usize, usize)> = (1..10).map(|i| (0, i)).collect();
        let graph = graph_with(10, &edges);
        let degrees = degree_centrality(&graph);
        assert_eq!(degrees[0], 9);
        let top = top_central(&graph, 0.05);
        assert_eq!(top.labels.len(), 1);
        assert!(top.labels.contains("node 0"));
        assert!(!top.degenerate);
    }

    #[test]
    fn all_isolated_top_set_is_degenerate() {
        let graph = graph_with(5, &[]);
        let top = top_central(&graph, 0.05);
        assert!(top.labels.is_empty());
        assert!(top.degenerate);
    }
}
