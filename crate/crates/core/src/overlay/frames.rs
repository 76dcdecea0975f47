//! Overlay frame rendering and windowed animation export.

use serde::Serialize;

use super::{Basemap, MeshBranch, OverlayError, OverlayFrame, Result};
use crate::record::CodeScheme;
use crate::xml::escape;

const CLUSTER_PALETTE: &[&str] = &[
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn node_color(scheme: CodeScheme, branch: Option<char>, cluster: u32) -> &'static str {
    if scheme == CodeScheme::Mesh {
        if let Some(branch) = branch.and_then(MeshBranch::from_letter) {
            return match branch {
                MeshBranch::Diseases => "#d62728",
                MeshBranch::ChemicalsAndDrugs => "#2ca02c",
                MeshBranch::Techniques => "#1f77b4",
            };
        }
    }
    CLUSTER_PALETTE[cluster as usize % CLUSTER_PALETTE.len()]
}

/// Renders one frame over its basemap. The basemap geometry (edges, node
/// positions, colours) is identical for every frame; only the node radii
/// come from the frame, with inactive nodes on the floor radius. The
/// sequence number appears only in the metadata element.
pub fn render_overlay_svg(
    basemap: &Basemap,
    frame: &OverlayFrame,
    seq: usize,
    floor_radius: f64,
) -> String {
    const MARGIN: f64 = 30.0;
    const SIDE: f64 = 720.0;

    let (mut min_x, mut min_y, mut max_x, mut max_y) =
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for node in &basemap.nodes {
        min_x = min_x.min(node.x);
        min_y = min_y.min(node.y);
        max_x = max_x.max(node.x);
        max_y = max_y.max(node.y);
    }
    if basemap.nodes.is_empty() {
        (min_x, min_y, max_x, max_y) = (0.0, 0.0, 1.0, 1.0);
    }
    let span = (max_x - min_x).max(max_y - min_y).max(1e-9);
    let to_px = |x: f64, y: f64| {
        (
            MARGIN + (x - min_x) / span * SIDE,
            MARGIN + (y - min_y) / span * SIDE,
        )
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
        SIDE + 2.0 * MARGIN
    ));
    out.push_str(&format!(
        "  <metadata>frame {seq:03} window {} basemap {}</metadata>\n",
        frame.window,
        escape(&basemap.id)
    ));
    out.push_str("  <g stroke=\"#cccccc\" stroke-opacity=\"0.5\">\n");
    for edge in &basemap.edges {
        let a = &basemap.nodes[edge.i];
        let b = &basemap.nodes[edge.j];
        let (x1, y1) = to_px(a.x, a.y);
        let (x2, y2) = to_px(b.x, b.y);
        out.push_str(&format!(
            "    <line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke-width=\"{:.2}\"/>\n",
            (edge.s * 3.0).max(0.3)
        ));
    }
    out.push_str("  </g>\n  <g stroke=\"#ffffff\" stroke-width=\"0.5\">\n");
    for node in &basemap.nodes {
        let (cx, cy) = to_px(node.x, node.y);
        let r = frame
            .sizes
            .get(&node.code)
            .copied()
            .unwrap_or(floor_radius)
            .max(floor_radius);
        let count = frame.counts.get(&node.code).copied().unwrap_or(0);
        out.push_str(&format!(
            "    <circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.2}\" fill=\"{}\" fill-opacity=\"{}\"><title>{} ({count})</title></circle>\n",
            node_color(basemap.scheme, node.branch, node.cluster),
            if count > 0 { "0.95" } else { "0.25" },
            escape(&node.label)
        ));
    }
    out.push_str("  </g>\n</svg>\n");
    out
}

/// One exported animation step.
#[derive(Debug, Clone, Serialize)]
pub struct FrameExport {
    pub seq: usize,
    pub window_label: String,
    pub svg: String,
    pub json: String,
}

impl FrameExport {
    /// Zero-padded file stem, e.g. `overlay_mesh_003`.
    pub fn file_stem(&self, prefix: &str) -> String {
        format!("{prefix}_{:03}", self.seq)
    }
}

/// Exports one SVG + one JSON per window, numbered in window order. All
/// frames must reference the same basemap; its geometry is identical
/// across the sequence (only node sizes vary).
pub fn animate_frames(frames: &[OverlayFrame], basemap: &Basemap, floor_radius: f64) -> Result<Vec<FrameExport>> {
    for frame in frames {
        if frame.basemap_id != basemap.id {
            return Err(OverlayError::MixedBasemaps(
                basemap.id.clone(),
                frame.basemap_id.clone(),
            ));
        }
    }
    let mut ordered: Vec<&OverlayFrame> = frames.iter().collect();
    ordered.sort_by_key(|f| (f.window.start_year, f.window.end_year));
    ordered
        .into_iter()
        .enumerate()
        .map(|(seq, frame)| {
            Ok(FrameExport {
                seq,
                window_label: frame.window.to_string(),
                svg: render_overlay_svg(basemap, frame, seq, floor_radius),
                json: serde_json::to_string_pretty(frame)?,
            })
        })
        .collect()
}
