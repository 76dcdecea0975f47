//! Node-size scaling rules shared by the map and overlay renderers.

use serde::{Deserialize, Serialize};

/// How an activity count maps to a size term before pixel scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleRule {
    /// log10(count + 1) — city and network maps.
    Log10Plus1,
    /// log2(count + 1) — MeSH overlays.
    Log2Plus1,
    /// count itself — category, journal, and IPC overlays.
    Linear,
}

impl ScaleRule {
    pub fn size_term(&self, count: u32) -> f64 {
        match self {
            ScaleRule::Log10Plus1 => (count as f64 + 1.0).log10(),
            ScaleRule::Log2Plus1 => (count as f64 + 1.0).log2(),
            ScaleRule::Linear => count as f64,
        }
    }
}

/// Maps size terms to display radii in a configured pixel range. A zero
/// size term lands on the floor radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeScale {
    pub rule: ScaleRule,
    pub min_radius: f64,
    pub max_radius: f64,
}

impl SizeScale {
    pub fn new(rule: ScaleRule, min_radius: f64, max_radius: f64) -> SizeScale {
        SizeScale {
            rule,
            min_radius,
            max_radius,
        }
    }

    /// Radius for `count`, normalised against the largest count on the map.
    pub fn radius(&self, count: u32, max_count: u32) -> f64 {
        let denom = self.rule.size_term(max_count);
        let norm = if denom > 0.0 {
            self.rule.size_term(count) / denom
        } else {
            0.0
        };
        self.min_radius + norm * (self.max_radius - self.min_radius)
    }
}

impl Default for SizeScale {
    fn default() -> SizeScale {
        SizeScale::new(ScaleRule::Log10Plus1, 2.0, 14.0)
    }
}
