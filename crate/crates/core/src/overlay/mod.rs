//! Cognitive overlay layer: basemaps with cosine-similarity edges,
//! activity projection, MeSH/IPC code handling, density heatmaps,
//! Rao-Stirling diversity, and frame export.

mod build;
mod codes;
mod density;
mod diversity;
mod frames;
mod project;
mod similarity;

pub use build::build_basemap;
pub use codes::{ipc_truncate, ipc_truncate_code, mesh_truncate, mesh_truncate_code, MeshBranch};
pub use density::{density_map, DensityGrid, DEFAULT_DENSITY_RESOLUTION};
pub use diversity::{rao_stirling, DiversityReport, RAO_STIRLING_CONVENTION};
pub use frames::{animate_frames, render_overlay_svg, FrameExport};
pub use project::{project_overlay, ProjectOptions};
pub use similarity::cosine_similarity;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::{CodeScheme, Window};

#[derive(Debug, Error)]
pub enum OverlayError {
    #[error("degenerate basemap: similarity matrix is all zero")]
    DegenerateBasemap,
    #[error("basemap {path}: {message}")]
    BadBasemap { path: String, message: String },
    #[error("reference {scheme} basemap must have {expected} nodes, found {found}")]
    WrongReferenceCount {
        scheme: CodeScheme,
        expected: usize,
        found: usize,
    },
    #[error("scheme mismatch: corpus carries no {scheme} codes")]
    SchemeMismatch { scheme: CodeScheme },
    #[error("empty overlay frame: no activity to report")]
    EmptyFrame,
    #[error("frames reference different basemaps: {0} vs {1}")]
    MixedBasemaps(String, String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("basemap JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, OverlayError>;

/// Node counts of the published reference maps, enforced on load for
/// files that declare themselves `reference`.
pub fn reference_node_count(scheme: CodeScheme) -> Option<usize> {
    match scheme {
        CodeScheme::WosCategory => Some(225),
        CodeScheme::Journal => Some(10_330),
        CodeScheme::Mesh => Some(822),
        CodeScheme::Ipc => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasemapNode {
    pub code: String,
    pub label: String,
    pub cluster: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<char>,
    pub x: f64,
    pub y: f64,
}

/// Similarity edge between node indices, kept only above the prune
/// threshold for rendering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasemapEdge {
    pub i: usize,
    pub j: usize,
    pub s: f64,
}

/// A fixed reference map of categories/journals/terms/classes with
/// coordinates, clusters, and similarity edges. Small built maps may
/// carry the full similarity matrix inline; the published reference maps
/// are consumed without it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basemap {
    pub id: String,
    pub scheme: CodeScheme,
    #[serde(default)]
    pub reference: bool,
    pub nodes: Vec<BasemapNode>,
    pub edges: Vec<BasemapEdge>,
    /// Full similarity matrix (row per node) when available; diversity
    /// distances are 1 − s over this matrix, never over the pruned edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<Vec<Vec<f64>>>,
}

impl Basemap {
    pub fn load(path: &Path) -> Result<Basemap> {
        let text = std::fs::read_to_string(path)?;
        let map: Basemap = serde_json::from_str(&text)?;
        map.check(path)?;
        Ok(map)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    fn check(&self, path: &Path) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for node in &self.nodes {
            if !seen.insert(node.code.as_str()) {
                return Err(OverlayError::BadBasemap {
                    path: path.display().to_string(),
                    message: format!("duplicate code {:?}", node.code),
                });
            }
            if !node.x.is_finite() || !node.y.is_finite() {
                return Err(OverlayError::BadBasemap {
                    path: path.display().to_string(),
                    message: format!("non-finite coordinates on {:?}", node.code),
                });
            }
        }
        for edge in &self.edges {
            if edge.i >= self.nodes.len() || edge.j >= self.nodes.len() {
                return Err(OverlayError::BadBasemap {
                    path: path.display().to_string(),
                    message: format!("edge ({}, {}) out of range", edge.i, edge.j),
                });
            }
        }
        if self.reference {
            if let Some(expected) = reference_node_count(self.scheme) {
                if self.nodes.len() != expected {
                    return Err(OverlayError::WrongReferenceCount {
                        scheme: self.scheme,
                        expected,
                        found: self.nodes.len(),
                    });
                }
            }
        }
        if let Some(matrix) = &self.similarity {
            if matrix.len() != self.nodes.len()
                || matrix.iter().any(|row| row.len() != self.nodes.len())
            {
                return Err(OverlayError::BadBasemap {
                    path: path.display().to_string(),
                    message: "similarity matrix shape does not match node count".into(),
                });
            }
        }
        Ok(())
    }

    pub fn node_index(&self) -> BTreeMap<&str, usize> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.code.as_str(), i))
            .collect()
    }

    /// Distance matrix d = 1 − s from the inline similarity matrix.
    pub fn distance_matrix(&self) -> Option<Vec<Vec<f64>>> {
        self.similarity.as_ref().map(|sim| {
            sim.iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, &s)| if i == j { 0.0 } else { 1.0 - s })
                        .collect()
                })
                .collect()
        })
    }
}

/// Per-window activity counts projected onto one basemap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayFrame {
    pub basemap_id: String,
    pub scheme: CodeScheme,
    pub window: Window,
    /// Codes present in the basemap only.
    pub counts: BTreeMap<String, u32>,
    /// Deduped occurrences of codes absent from the basemap.
    pub unmatched: BTreeMap<String, u32>,
    /// Display radii per code, from the per-scheme size rule.
    pub sizes: BTreeMap<String, f64>,
}

impl OverlayFrame {
    pub fn total_count(&self) -> u64 {
        self.counts.values().map(|&c| u64::from(c)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_map() -> Basemap {
        Basemap {
            id: "tiny".into(),
            scheme: CodeScheme::WosCategory,
            reference: false,
            nodes: vec![
                BasemapNode {
                    code: "Oncology".into(),
                    label: "Oncology".into(),
                    cluster: 0,
                    branch: None,
                    x: 0.0,
                    y: 0.0,
                },
                BasemapNode {
                    code: "Virology".into(),
                    label: "Virology".into(),
                    cluster: 1,
                    branch: None,
                    x: 1.0,
                    y: 0.5,
                },
            ],
            edges: vec![BasemapEdge { i: 0, j: 1, s: 0.4 }],
            similarity: Some(vec![vec![1.0, 0.4], vec![0.4, 1.0]]),
        }
    }

    #[test]
    fn basemap_round_trips_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.json");
        let map = tiny_map();
        map.save(&path).unwrap();
        assert_eq!(Basemap::load(&path).unwrap(), map);
    }

    #[test]
    fn reference_map_with_wrong_count_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.json");
        let mut map = tiny_map();
        map.scheme = CodeScheme::Mesh;
        map.reference = true;
        map.similarity = None;
        map.save(&path).unwrap();
        match Basemap::load(&path).unwrap_err() {
            OverlayError::WrongReferenceCount { expected, found, .. } => {
                assert_eq!(expected, 822);
                assert_eq!(found, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn distance_matrix_is_one_minus_similarity() {
        let map = tiny_map();
        let d = map.distance_matrix().unwrap();
        assert_eq!(d[0][0], 0.0);
        assert!((d[0][1] - 0.6).abs() < 1e-12);
    }
}
