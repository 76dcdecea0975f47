//! MeSH tree-number and IPC code truncation for overlay projection.

use crate::record::CodeTag;

/// The three mapped MeSH branches: diseases (red), chemicals and drugs
/// (green), and analytical/diagnostic/therapeutic techniques and
/// equipment (blue). Terms outside them are dropped from the overlay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshBranch {
    Diseases,
    ChemicalsAndDrugs,
    Techniques,
}

impl MeshBranch {
    pub fn from_letter(letter: char) -> Option<MeshBranch> {
        match letter {
            'C' => Some(MeshBranch::Diseases),
            'D' => Some(MeshBranch::ChemicalsAndDrugs),
            'E' => Some(MeshBranch::Techniques),
            _ => None,
        }
    }

    pub fn letter(&self) -> char {
        match self {
            MeshBranch::Diseases => 'C',
            MeshBranch::ChemicalsAndDrugs => 'D',
            MeshBranch::Techniques => 'E',
        }
    }

    pub fn color(&self) -> &'static str {
        match self {
            MeshBranch::Diseases => "red",
            MeshBranch::ChemicalsAndDrugs => "green",
            MeshBranch::Techniques => "blue",
        }
    }
}

/// Truncates one tree number to its first `levels` dot-segments and
/// filters on the mapped branches. `Ok(None)` means a well-formed code
/// outside the branch set.
pub fn mesh_truncate_code(code: &str, levels: usize) -> Result<Option<(String, MeshBranch)>, String> {
    if !CodeTag::is_valid_mesh(code) {
        return Err(format!("malformed MeSH tree number {code:?}"));
    }
    let branch = match code.chars().next().and_then(MeshBranch::from_letter) {
        Some(branch) => branch,
        None => return Ok(None),
    };
    let truncated: Vec<&str> = code.split('.').take(levels).collect();
    Ok(Some((truncated.join("."), branch)))
}

/// Batch form: mapped codes in input order, with malformed and filtered
/// codes reported.
pub fn mesh_truncate(codes: &[String], levels: usize) -> (Vec<(String, MeshBranch)>, Vec<String>) {
    let mut mapped = Vec::new();
    let mut reports = Vec::new();
    for code in codes {
        match mesh_truncate_code(code, levels) {
            Ok(Some(pair)) => mapped.push(pair),
            Ok(None) => reports.push(format!("{code}: branch outside C/D/E, dropped")),
            Err(e) => reports.push(e),
        }
    }
    (mapped, reports)
}

/// Truncates an IPC code to its 3- or 4-character prefix.
pub fn ipc_truncate_code(code: &str, level: usize) -> Result<String, String> {
    debug_assert!(level == 3 || level == 4);
    if code.chars().count() < level {
        return Err(format!("IPC code {code:?} shorter than level {level}"));
    }
    Ok(code.chars().take(level).collect())
}

pub fn ipc_truncate(codes: &[String], level: usize) -> (Vec<String>, Vec<String>) {
    let mut mapped = Vec::new();
    let mut reports = Vec::new();
    for code in codes {
        match ipc_truncate_code(code, level) {
            Ok(t) => mapped.push(t),
            Err(e) => reports.push(e),
        }
    }
    (mapped, reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_truncation() {
        let (code, branch) = mesh_truncate_code("C04.557.470", 2).unwrap().unwrap();
        assert_eq!(code, "C04.557");
        assert_eq!(branch, MeshBranch::Diseases);
        assert_eq!(branch.color(), "red");
    }

    #[test]
    fn branch_filter_drops_anatomy() {
        assert_eq!(mesh_truncate_code("A01.111", 2).unwrap(), None);
    }

    #[test]
    fn malformed_tree_number_is_reported() {
        assert!(mesh_truncate_code("Neoplasms", 2).is_err());
        let (mapped, reports) = mesh_truncate(&["bad".into(), "D02.455".into()], 2);
        assert_eq!(mapped.len(), 1);
        assert_eq!(reports.len(), 1);
    }

    #[test]
    fn mesh_truncation_is_idempotent() {
        let (once, _) = mesh_truncate_code("E05.393.420", 2).unwrap().unwrap();
        let (twice, _) = mesh_truncate_code(&once, 2).unwrap().unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn ipc_prefixes() {
        assert_eq!(ipc_truncate_code("C12N15/11", 4).unwrap(), "C12N");
        assert_eq!(ipc_truncate_code("C12N15/11", 3).unwrap(), "C12");
    }

    #[test]
    fn short_ipc_code_is_reported() {
        assert!(ipc_truncate_code("C1", 3).is_err());
        let (mapped, reports) = ipc_truncate(&["C12N15/11".into(), "A6".into()], 4);
        assert_eq!(mapped, vec!["C12N".to_string()]);
        assert_eq!(reports.len(), 1);
    }

    #[test]
    fn ipc_truncation_is_idempotent() {
        let once = ipc_truncate_code("C12N15/11", 4).unwrap();
        assert_eq!(ipc_truncate_code(&once, 4).unwrap(), once);
    }
}
