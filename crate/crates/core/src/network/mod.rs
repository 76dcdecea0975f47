//! Co-authorship graphs at city and organisation level, name
//! disambiguation helpers, component statistics, degree centrality,
//! deterministic layout, and graph exports.

mod components;
mod export;
mod layout;

pub use components::{
    component_report, connected_components, degree_centrality, top_central, ComponentReport,
    Share, TopCentral,
};
pub use export::{export_graphml, export_network_svg};
pub use layout::{stress_layout, stress_layout_weighted, LayoutResult, StressOptions};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::Gazetteer;
use crate::record::Record;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("{path} line {line}: malformed alias row")]
    BadAliasRow { path: String, line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NetworkError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    City,
    Org,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub label: String,
    pub kind: NodeKind,
    /// Records mentioning this node (whole counting).
    pub article_count: u32,
}

/// Undirected weighted edge with endpoints in canonical order (u < v).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl Graph {
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for edge in &self.edges {
            adj[edge.u].push(edge.v);
            adj[edge.v].push(edge.u);
        }
        adj
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| u64::from(e.weight)).sum()
    }
}

/// Reviewed raw-name → canonical-name table. Canonical names map to
/// themselves, so applying the table twice equals applying it once.
#[derive(Debug, Clone, Default)]
pub struct AliasMap {
    entries: BTreeMap<String, String>,
}

impl AliasMap {
    /// Loads tab-separated (raw, canonical) rows; `#` starts a comment.
    pub fn load(path: &Path) -> Result<AliasMap> {
        let text = std::fs::read_to_string(path)?;
        let mut map = AliasMap::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cells.len() != 2 || cells[0].is_empty() || cells[1].is_empty() {
                return Err(NetworkError::BadAliasRow {
                    path: path.display().to_string(),
                    line: idx + 1,
                });
            }
            map.insert(cells[0], cells[1]);
        }
        Ok(map)
    }

    pub fn insert(&mut self, raw: &str, canonical: &str) {
        self.entries.insert(raw.to_string(), canonical.to_string());
        self.entries
            .insert(canonical.to_string(), canonical.to_string());
    }

    pub fn canonical<'a>(&'a self, name: &'a str) -> &'a str {
        self.entries.get(name).map(String::as_str).unwrap_or(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The distinct node labels one record contributes at the requested level.
fn record_labels(record: &Record, level: NodeKind, gaz: &Gazetteer, aliases: &AliasMap) -> BTreeSet<String> {
    let mut labels = BTreeSet::new();
    match level {
        NodeKind::City => {
            for site in crate::geo::record_sites(record, gaz) {
                labels.insert(site.key());
            }
        }
        NodeKind::Org => {
            for aff in &record.affiliations {
                let name = aff
                    .organisation
                    .as_deref()
                    .unwrap_or(aff.raw.as_str())
                    .trim();
                if !name.is_empty() {
                    labels.insert(aliases.canonical(name).to_string());
                }
            }
        }
    }
    labels
}

/// Builds the co-authorship graph: per record the distinct node set is
/// formed, every unordered pair gains one edge weight, and isolated nodes
/// are retained. Records without usable affiliations are skipped and
/// counted.
pub fn build_coauthorship(
    records: &[&Record],
    level: NodeKind,
    gazetteer: &Gazetteer,
    aliases: &AliasMap,
) -> (Graph, usize) {
    let mut node_index: HashMap<String, usize> = HashMap::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut edge_weights: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut skipped = 0usize;

    for record in records {
        let labels = record_labels(record, level, gazetteer, aliases);
        if labels.is_empty() {
            skipped += 1;
            continue;
        }
        let ids: Vec<usize> = labels
            .iter()
            .map(|label| {
                *node_index.entry(label.clone()).or_insert_with(|| {
                    nodes.push(Node {
                        id: format!("n{}", nodes.len()),
                        label: label.clone(),
                        kind: level,
                        article_count: 0,
                    });
                    nodes.len() - 1
                })
            })
            .collect();
        for &i in &ids {
            nodes[i].article_count += 1;
        }
        for a in 0..ids.len() {
            for b in (a + 1)..ids.len() {
                let (u, v) = if ids[a] < ids[b] {
                    (ids[a], ids[b])
                } else {
                    (ids[b], ids[a])
                };
                *edge_weights.entry((u, v)).or_insert(0) += 1;
            }
        }
    }

    let edges = edge_weights
        .into_iter()
        .map(|((u, v), weight)| Edge { u, v, weight })
        .collect();
    (Graph { nodes, edges }, skipped)
}

/// A fuzzy-match candidate pair awaiting human review.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeSuggestion {
    pub a: String,
    pub b: String,
    pub score: f64,
}

const ABBREVIATIONS: &[(&str, &str)] = &[
    ("univ", "university"),
    ("inst", "institute"),
    ("lab", "laboratory"),
    ("labs", "laboratory"),
    ("dept", "department"),
    ("hosp", "hospital"),
    ("natl", "national"),
    ("nat", "national"),
    ("ctr", "center"),
    ("cent", "center"),
    ("centre", "center"),
    ("med", "medical"),
    ("sch", "school"),
    ("coll", "college"),
    ("acad", "academy"),
    ("tech", "technology"),
    ("clin", "clinic"),
    ("corp", "corporation"),
    ("co", "company"),
    ("res", "research"),
];

const STOP_WORDS: &[&str] = &["of", "the", "and", "for", "de", "la", "der", "di", "du"];

/// Normalised token set: case-fold, strip punctuation, expand
/// abbreviations, drop stop words.
fn name_tokens(name: &str) -> BTreeSet<String> {
    name.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| !STOP_WORDS.contains(t))
        .map(|t| {
            ABBREVIATIONS
                .iter()
                .find(|(abbr, _)| *abbr == t)
                .map(|(_, full)| full.to_string())
                .unwrap_or_else(|| t.to_string())
        })
        .collect()
}

/// Token-set Jaccard similarity over normalised names. Suggestions are
/// sorted by descending score and are never applied automatically; only a
/// reviewed alias map takes effect.
pub fn suggest_merges(raw_names: &[String], threshold: f64) -> Vec<MergeSuggestion> {
    let tokens: Vec<BTreeSet<String>> = raw_names.iter().map(|n| name_tokens(n)).collect();
    let mut suggestions = Vec::new();
    for i in 0..raw_names.len() {
        for j in (i + 1)..raw_names.len() {
            let inter = tokens[i].intersection(&tokens[j]).count();
            let union = tokens[i].union(&tokens[j]).count();
            if union == 0 {
                continue;
            }
            let score = inter as f64 / union as f64;
            if score >= threshold {
                suggestions.push(MergeSuggestion {
                    a: raw_names[i].clone(),
                    b: raw_names[j].clone(),
                    score,
                });
            }
        }
    }
    suggestions.sort_by(|x, y| {
        y.score
            .partial_cmp(&x.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| x.a.cmp(&y.a))
            .then_with(|| x.b.cmp(&y.b))
    });
    suggestions
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::{Affiliation, RecordKind, SourceDb};

    fn rec_with_orgs(id: &str, orgs: &[&str]) -> Record {
        Record {
            id: id.into(),
            kind: RecordKind::Publication,
            source_db: SourceDb::Wos,
            title: String::new(),
            abstract_text: None,
            claims: None,
            year: 2004,
            authors: vec![],
            affiliations: orgs
                .iter()
                .map(|o| Affiliation {
                    raw: format!("{o}, City, Nation"),
                    organisation: Some(o.to_string()),
                    city: Some("City".into()),
                    country: Some("Nation".into()),
                    geocode: None,
                })
                .collect(),
            citation_count: None,
            codes: vec![],
            journal: None,
        }
    }

    #[test]
    fn single_org_record_yields_isolated_node() {
        let record = rec_with_orgs("wos:1", &["X"]);
        let (graph, skipped) =
            build_coauthorship(&[&record], NodeKind::Org, &Gazetteer::default(), &AliasMap::default());
        assert_eq!(graph.nodes.len(), 1);
        assert!(graph.edges.is_empty());
        assert_eq!(skipped, 0);
        assert_eq!(graph.nodes[0].article_count, 1);
    }

    #[test]
    fn within_record_duplicates_collapse() {
        let record = rec_with_orgs("wos:1", &["X", "Y", "X"]);
        let (graph, _) =
            build_coauthorship(&[&record], NodeKind::Org, &Gazetteer::default(), &AliasMap::default());
        assert_eq!(graph.nodes.len(), 2);
        assert_eq!(graph.edges.len(), 1);
        assert_eq!(graph.edges[0].weight, 1);
    }

    #[test]
    fn alias_map_is_idempotent() {
        let mut aliases = AliasMap::default();
        aliases.insert("Univ Sussex", "University of Sussex");
        let once = aliases.canonical("Univ Sussex");
        let twice = aliases.canonical(once);
        assert_eq!(once, "University of Sussex");
        assert_eq!(once, twice);
    }

    #[test]
    fn suggest_merges_normalises_abbreviations() {
        let names = vec!["Univ Sussex".to_string(), "University of Sussex".to_string()];
        let suggestions = suggest_merges(&names, 0.8);
        assert_eq!(suggestions.len(), 1);
        assert!((suggestions[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_strings_score_one() {
        let names = vec!["Mayo Clinic".to_string(), "Mayo Clinic".to_string()];
        let suggestions = suggest_merges(&names, 0.99);
        assert_eq!(suggestions.len(), 1);
        assert_eq!(suggestions[0].score, 1.0);
    }

    #[test]
    fn unrelated_names_are_not_suggested() {
        let names = vec!["Mayo Clinic".to_string(), "University of Manchester".to_string()];
        assert!(suggest_merges(&names, 0.8).is_empty());
    }

    #[test]
    fn edge_weight_sum_matches_pair_count() {
        let records = [
            rec_with_orgs("wos:1", &["A", "B", "C"]),
            rec_with_orgs("wos:2", &["A", "B"]),
            rec_with_orgs("wos:3", &["C"]),
        ];
        let refs: Vec<&Record> = records.iter().collect();
        let (graph, _) =
            build_coauthorship(&refs, NodeKind::Org, &Gazetteer::default(), &AliasMap::default());
        // C(3,2) + C(2,2) + C(1,2) = 3 + 1 + 0.
        assert_eq!(graph.total_weight(), 4);
    }
}
