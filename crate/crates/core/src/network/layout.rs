//! Deterministic stress-minimising layout.
//!
//! Minimises the classical Kamada-Kawai objective
//! Σ_{i<j} w_ij (‖x_i − x_j‖ − d_ij)² with w_ij = d_ij⁻² over all-pairs
//! graph-theoretic distances, via iterative stress majorization (the
//! update never increases the stress). Disconnected components are laid
//! out independently and packed on a grid by descending size.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Graph;

#[derive(Debug, Clone, Copy)]
pub struct StressOptions {
    pub max_iterations: usize,
    /// Stop when an iteration improves the stress by less than this
    /// relative amount.
    pub tolerance: f64,
}

impl Default for StressOptions {
    fn default() -> StressOptions {
        StressOptions {
            // Graphs that embed exactly converge geometrically towards
            // zero stress and only stop on the iteration cap; everything
            // else exits early on the relative-improvement test.
            max_iterations: 2000,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LayoutResult {
    pub coords: Vec<(f64, f64)>,
    /// Stress value after each iteration, one trace per component
    /// (components ordered as packed).
    pub component_traces: Vec<Vec<f64>>,
}

/// Lays out a plain graph with unit edge lengths.
pub fn stress_layout(graph: &Graph, seed: u64, options: &StressOptions) -> LayoutResult {
    let edges: Vec<(usize, usize, f64)> = graph
        .edges
        .iter()
        .map(|e| (e.u, e.v, 1.0))
        .collect();
    stress_layout_weighted(graph.nodes.len(), &edges, seed, options)
}

/// Lays out `n_nodes` with explicit edge lengths (used by basemaps where
/// the length is one minus the similarity).
pub fn stress_layout_weighted(
    n_nodes: usize,
    edges: &[(usize, usize, f64)],
    seed: u64,
    options: &StressOptions,
) -> LayoutResult {
    if n_nodes == 0 {
        return LayoutResult {
            coords: Vec::new(),
            component_traces: Vec::new(),
        };
    }

    let mut adjacency = vec![Vec::new(); n_nodes];
    for &(u, v, len) in edges {
        let len = len.max(1e-3);
        adjacency[u].push((v, len));
        adjacency[v].push((u, len));
    }

    // Split into connected components, largest first.
    let mut components = component_partition(n_nodes, &adjacency);
    components.sort_by_key(|c| (Reverse(c.len()), c[0]));

    let mut coords = vec![(0.0, 0.0); n_nodes];
    let mut traces = Vec::with_capacity(components.len());
    let mut boxes = Vec::with_capacity(components.len());

    for (comp_idx, members) in components.iter().enumerate() {
        let local = layout_component(members, &adjacency, seed, comp_idx, options);
        traces.push(local.trace);
        let (min_x, min_y, max_x, max_y) = bounding_box(&local.coords);
        boxes.push((max_x - min_x, max_y - min_y));
        for (&node, &(x, y)) in members.iter().zip(&local.coords) {
            // Centre the component on its own origin; packing shifts it later.
            coords[node] = (
                x - (min_x + max_x) / 2.0,
                y - (min_y + max_y) / 2.0,
            );
        }
    }

    pack_components(&components, &boxes, &mut coords);
    LayoutResult {
        coords,
        component_traces: traces,
    }
}

fn component_partition(n: usize, adjacency: &[Vec<(usize, f64)>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(node) = stack.pop() {
            members.push(node);
            for &(next, _) in &adjacency[node] {
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

struct ComponentLayout {
    coords: Vec<(f64, f64)>,
    trace: Vec<f64>,
}

fn layout_component(
    members: &[usize],
    adjacency: &[Vec<(usize, f64)>],
    seed: u64,
    comp_idx: usize,
    options: &StressOptions,
) -> ComponentLayout {
    let n = members.len();
    if n == 1 {
        return ComponentLayout {
            coords: vec![(0.0, 0.0)],
            trace: Vec::new(),
        };
    }

    let index_of = |node: usize| members.binary_search(&node).unwrap();
    let dist = all_pairs_distances(members, adjacency, &index_of);

    let d_max = dist
        .iter()
        .flatten()
        .copied()
        .fold(0.0f64, f64::max)
        .max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9 * comp_idx as u64));
    let mut pos: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.random_range(-d_max..d_max),
                rng.random_range(-d_max..d_max),
            )
        })
        .collect();

    let weights: Vec<Vec<f64>> = dist
        .iter()
        .map(|row| row.iter().map(|&d| if d > 0.0 { d.powi(-2) } else { 0.0 }).collect())
        .collect();

    let mut trace = Vec::new();
    let mut prev = stress(&pos, &dist, &weights);
    trace.push(prev);
    for _ in 0..options.max_iterations {
        majorize_step(&mut pos, &dist, &weights);
        let current = stress(&pos, &dist, &weights);
        trace.push(current);
        let done = current <= 1e-16 || prev - current < options.tolerance * prev.max(1e-30);
        prev = current;
        if done {
            break;
        }
    }
    let _ = prev;
    ComponentLayout { coords: pos, trace }
}

/// Dijkstra from every member, restricted to the component.
fn all_pairs_distances(
    members: &[usize],
    adjacency: &[Vec<(usize, f64)>],
    index_of: &dyn Fn(usize) -> usize,
) -> Vec<Vec<f64>> {
    let n = members.len();
    let mut dist = vec![vec![0.0f64; n]; n];
    for si in 0..n {
        let mut d = vec![f64::INFINITY; n];
        d[si] = 0.0;
        let mut heap: BinaryHeap<Reverse<(OrderedF64, usize)>> = BinaryHeap::new();
        heap.push(Reverse((OrderedF64(0.0), si)));
        while let Some(Reverse((OrderedF64(cost), node))) = heap.pop() {
            if cost > d[node] {
                continue;
            }
            for &(next, len) in &adjacency[members[node]] {
                let ni = index_of(next);
                let cand = cost + len;
                if cand < d[ni] {
                    d[ni] = cand;
                    heap.push(Reverse((OrderedF64(cand), ni)));
                }
            }
        }
        dist[si] = d;
    }
    dist
}

#[derive(PartialEq)]
struct OrderedF64(f64);

impl Eq for OrderedF64 {}
impl PartialOrd for OrderedF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.partial_cmp(&other.0).unwrap_or(std::cmp::Ordering::Equal)
    }
}

fn stress(pos: &[(f64, f64)], dist: &[Vec<f64>], weights: &[Vec<f64>]) -> f64 {
    let n = pos.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pos[i].0 - pos[j].0;
            let dy = pos[i].1 - pos[j].1;
            let norm = (dx * dx + dy * dy).sqrt();
            let diff = norm - dist[i][j];
            total += weights[i][j] * diff * diff;
        }
    }
    total
}

/// One guarded SMACOF update: each point moves to the weighted average of
/// the positions its neighbours would have it at.
fn majorize_step(pos: &mut [(f64, f64)], dist: &[Vec<f64>], weights: &[Vec<f64>]) {
    let n = pos.len();
    let snapshot: Vec<(f64, f64)> = pos.to_vec();
    for i in 0..n {
        let mut sum_w = 0.0;
        let mut acc = (0.0f64, 0.0f64);
        for j in 0..n {
            if i == j {
                continue;
            }
            let w = weights[i][j];
            if w == 0.0 {
                continue;
            }
            let dx = snapshot[i].0 - snapshot[j].0;
            let dy = snapshot[i].1 - snapshot[j].1;
            let norm = (dx * dx + dy * dy).sqrt();
            let (tx, ty) = if norm > 1e-12 {
                let scale = dist[i][j] / norm;
                (snapshot[j].0 + dx * scale, snapshot[j].1 + dy * scale)
            } else {
                // Coincident points contribute their own position.
                snapshot[j]
            };
            sum_w += w;
            acc.0 += w * tx;
            acc.1 += w * ty;
        }
        if sum_w > 0.0 {
            pos[i] = (acc.0 / sum_w, acc.1 / sum_w);
        }
    }
}

fn bounding_box(coords: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let mut min_x = f64::INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for &(x, y) in coords {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    if coords.is_empty() {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        (min_x, min_y, max_x, max_y)
    }
}

/// Places component k (largest first) on a square-ish grid; a single
/// component stays centred at the origin.
fn pack_components(components: &[Vec<usize>], boxes: &[(f64, f64)], coords: &mut [(f64, f64)]) {
    if components.len() <= 1 {
        return;
    }
    let cell = boxes
        .iter()
        .map(|&(w, h)| w.max(h))
        .fold(0.0f64, f64::max)
        .max(1.0)
        * 1.2;
    let cols = (components.len() as f64).sqrt().ceil() as usize;
    for (k, members) in components.iter().enumerate() {
        let row = k / cols;
        let col = k % cols;
        let offset_x = col as f64 * cell;
        let offset_y = -(row as f64) * cell;
        for &node in members {
            coords[node].0 += offset_x;
            coords[node].1 += offset_y;
        }
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
                .map(|&(u, v)| Edge { u, v, weight: 1 })
                .collect(),
        }
    }

    #[test]
    fn single_node_sits_at_origin() {
        let result = stress_layout(&graph_with(1, &[]), 7, &StressOptions::default());
        assert_eq!(result.coords, vec![(0.0, 0.0)]);
    }

    #[test]
    fn three_node_path_reaches_near_zero_stress() {
        let graph = graph_with(3, &[(0, 1), (1, 2)]);
        let result = stress_layout(&graph, 11, &StressOptions::default());
        let final_stress = result.component_traces[0].last().copied().unwrap();
        assert!(final_stress <= 1e-6, "stress {final_stress} too high");
    }

    #[test]
    fn stress_trace_never_increases() {
        let graph = graph_with(
            12,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (5, 6), (6, 7), (8, 9), (9, 10), (10, 11), (8, 11)],
        );
        let result = stress_layout(&graph, 23, &StressOptions::default());
        for trace in &result.component_traces {
            for pair in trace.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-12, "stress rose: {} -> {}", pair[0], pair[1]);
            }
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let graph = graph_with(20, &[(0, 1), (2, 3), (4, 5), (1, 2), (6, 7), (7, 8), (9, 10)]);
        let a = stress_layout(&graph, 42, &StressOptions::default());
        let b = stress_layout(&graph, 42, &StressOptions::default());
        assert_eq!(a.coords, b.coords);
        let c = stress_layout(&graph, 43, &StressOptions::default());
        assert_ne!(a.coords, c.coords);
    }

    #[test]
    fn components_do_not_overlap() {
        let graph = graph_with(6, &[(0, 1), (1, 2), (3, 4), (4, 5)]);
        let result = stress_layout(&graph, 5, &StressOptions::default());
        // Bounding boxes of the two components must be disjoint on x or y.
        let a = [result.coords[0], result.coords[1], result.coords[2]];
        let b = [result.coords[3], result.coords[4], result.coords[5]];
        let ax: Vec<f64> = a.iter().map(|p| p.0).collect();
        let bx: Vec<f64> = b.iter().map(|p| p.0).collect();
        let a_max = ax.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let b_min = bx.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(a_max < b_min, "components overlap: {a_max} vs {b_min}");
    }
}
