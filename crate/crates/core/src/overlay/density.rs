//! Gaussian kernel density over basemap coordinates, the heatmap
//! companion of an overlay frame.

use super::{Basemap, OverlayFrame};

/// Grid resolution used when callers have no reason to pick another.
pub const DEFAULT_DENSITY_RESOLUTION: usize = 128;

/// Regular raster over the basemap's padded bounding box. Cell values are
/// densities; summed times the cell area they recover the total activity
/// count within quadrature tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub rows: usize,
    pub cols: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    /// Row-major cell values.
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Plain-text export: a header line (rows, cols, bounds), then one
    /// whitespace-separated row per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# rows {} cols {} x0 {:.6} y0 {:.6} dx {:.6} dy {:.6}\n",
            self.rows, self.cols, self.x0, self.y0, self.dx, self.dy
        );
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| format!("{:.6e}", self.values[r * self.cols + c]))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Kernel density of the frame's counts over the basemap coordinates,
/// evaluated at cell centres on a `resolution`² grid padded by four
/// bandwidths so the kernels' mass stays on the raster.
pub fn density_map(
    frame: &OverlayFrame,
    basemap: &Basemap,
    bandwidth: f64,
    resolution: usize,
) -> DensityGrid {
    assert!(bandwidth > 0.0, "bandwidth must be positive");
    assert!(resolution >= 2, "grid needs at least 2x2 cells");

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
    let pad = 4.0 * bandwidth;
    min_x -= pad;
    min_y -= pad;
    max_x += pad;
    max_y += pad;

    let cols = resolution;
    let rows = resolution;
    let dx = (max_x - min_x) / cols as f64;
    let dy = (max_y - min_y) / rows as f64;

    let weighted: Vec<(f64, f64, f64)> = basemap
        .nodes
        .iter()
        .filter_map(|node| {
            frame
                .counts
                .get(&node.code)
                .filter(|&&c| c > 0)
                .map(|&c| (node.x, node.y, c as f64))
        })
        .collect();

    let norm = 1.0 / (2.0 * std::f64::consts::PI * bandwidth * bandwidth);
    let inv2s2 = 1.0 / (2.0 * bandwidth * bandwidth);
    let mut values = vec![0.0; rows * cols];
    for r in 0..rows {
        let cy = min_y + (r as f64 + 0.5) * dy;
        for c in 0..cols {
            let cx = min_x + (c as f64 + 0.5) * dx;
            let mut v = 0.0;
            for &(x, y, w) in &weighted {
                let d2 = (cx - x) * (cx - x) + (cy - y) * (cy - y);
                v += w * norm * (-d2 * inv2s2).exp();
            }
            values[r * cols + c] = v;
        }
    }

    DensityGrid {
        rows,
        cols,
        x0: min_x,
        y0: min_y,
        dx,
        dy,
        values,
    }
}
