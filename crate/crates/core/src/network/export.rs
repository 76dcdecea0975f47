//! GraphML and SVG writers for co-authorship networks. Output is fully
//! deterministic: fixed float precision, nodes and edges in stored order.

use std::collections::BTreeSet;

use super::Graph;
use crate::scale::SizeScale;
use crate::xml::escape;

/// GraphML 1.0 with label/kind/article-count node attributes, weight edge
/// attribute, and x/y coordinates.
pub fn export_graphml(graph: &Graph, coords: &[(f64, f64)]) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"kind\" for=\"node\" attr.name=\"kind\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"articles\" for=\"node\" attr.name=\"articles\" attr.type=\"int\"/>\n");
    out.push_str("  <key id=\"x\" for=\"node\" attr.name=\"x\" attr.type=\"double\"/>\n");
    out.push_str("  <key id=\"y\" for=\"node\" attr.name=\"y\" attr.type=\"double\"/>\n");
    out.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"int\"/>\n");
    out.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    for (i, node) in graph.nodes.iter().enumerate() {
        let (x, y) = coords.get(i).copied().unwrap_or((0.0, 0.0));
        out.push_str(&format!("    <node id=\"{}\">\n", escape(&node.id)));
        out.push_str(&format!("      <data key=\"label\">{}</data>\n", escape(&node.label)));
        out.push_str(&format!(
            "      <data key=\"kind\">{}</data>\n",
            match node.kind {
                super::NodeKind::City => "city",
                super::NodeKind::Org => "org",
            }
        ));
        out.push_str(&format!(
            "      <data key=\"articles\">{}</data>\n",
            node.article_count
        ));
        out.push_str(&format!("      <data key=\"x\">{x:.4}</data>\n"));
        out.push_str(&format!("      <data key=\"y\">{y:.4}</data>\n"));
        out.push_str("    </node>\n");
    }
    for (k, edge) in graph.edges.iter().enumerate() {
        out.push_str(&format!(
            "    <edge id=\"e{k}\" source=\"{}\" target=\"{}\">\n",
            escape(&graph.nodes[edge.u].id),
            escape(&graph.nodes[edge.v].id)
        ));
        out.push_str(&format!("      <data key=\"weight\">{}</data>\n", edge.weight));
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

/// SVG 1.1 drawing: node radius follows the size rule over article
/// counts, labels only for the given set (the top-central nodes).
pub fn export_network_svg(
    graph: &Graph,
    coords: &[(f64, f64)],
    scale: &SizeScale,
    labelled: &BTreeSet<String>,
) -> String {
    const MARGIN: f64 = 30.0;
    const SIDE: f64 = 720.0;

    let (min_x, min_y, max_x, max_y) = {
        let mut bounds = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(x, y) in coords {
            bounds.0 = bounds.0.min(x);
            bounds.1 = bounds.1.min(y);
            bounds.2 = bounds.2.max(x);
            bounds.3 = bounds.3.max(y);
        }
        if coords.is_empty() {
            (0.0, 0.0, 1.0, 1.0)
        } else {
            bounds
        }
    };
    let span = (max_x - min_x).max(max_y - min_y).max(1e-9);
    let to_px = |(x, y): (f64, f64)| {
        (
            MARGIN + (x - min_x) / span * SIDE,
            MARGIN + (y - min_y) / span * SIDE,
        )
    };

    let max_count = graph.nodes.iter().map(|n| n.article_count).max().unwrap_or(0);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
        SIDE + 2.0 * MARGIN
    ));
    out.push_str("  <g stroke=\"#b0b0b0\" stroke-opacity=\"0.6\">\n");
    for edge in &graph.edges {
        let (x1, y1) = to_px(coords[edge.u]);
        let (x2, y2) = to_px(coords[edge.v]);
        out.push_str(&format!(
            "    <line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke-width=\"{:.2}\"/>\n",
            (edge.weight as f64).sqrt().min(6.0)
        ));
    }
    out.push_str("  </g>\n  <g fill=\"#1f77b4\" stroke=\"#ffffff\" stroke-width=\"0.75\">\n");
    for (i, node) in graph.nodes.iter().enumerate() {
        let (cx, cy) = to_px(coords[i]);
        let r = scale.radius(node.article_count, max_count);
        out.push_str(&format!(
            "    <circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.2}\"><title>{} ({} articles)</title></circle>\n",
            escape(&node.label),
            node.article_count
        ));
    }
    out.push_str("  </g>\n  <g font-family=\"sans-serif\" font-size=\"10\" fill=\"#222222\">\n");
    for (i, node) in graph.nodes.iter().enumerate() {
        if labelled.contains(&node.label) {
            let (cx, cy) = to_px(coords[i]);
            let r = scale.radius(node.article_count, max_count);
            out.push_str(&format!(
                "    <text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
                cx + r + 2.0,
                cy + 3.0,
                escape(&node.label)
            ));
        }
    }
    out.push_str("  </g>\n</svg>\n");
    out
}
