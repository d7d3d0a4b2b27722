//! JSON encodings for instances and results, and atomic file writes.
//!
//! Instance files look like
//!
//! ```json
//! { "n": 3, "k": 2, "A": [[0, 1, 0], [1, 0, 2], [0, 2, 0]], "H": [[0.5, -0.5], ...] }
//! ```
//!
//! or, with an edge list in place of the dense matrix,
//! `"edges": [[i, j, w], ...]` (zero-based, `i <= j`, each unordered pair at
//! most once). Writers use the dense form up to [`DENSE_WRITE_LIMIT`]
//! variables.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mrf::MrfInstance;

pub const DENSE_WRITE_LIMIT: usize = 64;

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    k: usize,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<(usize, usize, f64)>>,
    #[serde(rename = "H")]
    h: Vec<Vec<f64>>,
}

pub fn instance_from_json(text: &str) -> Result<MrfInstance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let n = file.n;
    let raw = match (file.a, file.edges) {
        (Some(_), Some(_)) => return Err(Error::Format("both \"A\" and \"edges\" given".into())),
        (None, None) => return Err(Error::Format("missing \"A\" or \"edges\"".into())),
        (Some(a), None) => {
            if a.len() != n {
                return Err(Error::Dimension(format!("\"A\" has {} rows but n = {n}", a.len())));
            }
            a
        }
        (None, Some(edges)) => {
            let mut a = vec![vec![0.0; n]; n];
            let mut seen = std::collections::HashSet::new();
            for (e, &(i, j, w)) in edges.iter().enumerate() {
                if i >= n || j >= n {
                    return Err(Error::Format(format!("edge {e} ({i}, {j}) out of range for n = {n}")));
                }
                let (i, j) = if i <= j { (i, j) } else { (j, i) };
                if !seen.insert((i, j)) {
                    return Err(Error::Format(format!("duplicate edge ({i}, {j})")));
                }
                a[i][j] = w;
                a[j][i] = w;
            }
            a
        }
    };
    if file.h.len() != n {
        return Err(Error::Dimension(format!("\"H\" has {} rows but n = {n}", file.h.len())));
    }
    MrfInstance::symmetrize_and_validate(&raw, &file.h, file.k)
}

pub fn instance_to_json(inst: &MrfInstance) -> String {
    let n = inst.n();
    let (a, edges) = if n <= DENSE_WRITE_LIMIT {
        (Some(inst.a_rows()), None)
    } else {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i..n {
                let w = inst.a(i, j);
                if w != 0.0 {
                    edges.push((i, j, w));
                }
            }
        }
        (None, Some(edges))
    };
    let file = InstanceFile {
        n,
        k: inst.k(),
        a,
        edges,
        h: inst.h_rows(),
    };
    serde_json::to_string(&file).expect("instance serialization cannot fail")
}

pub fn read_instance(path: &Path) -> Result<MrfInstance> {
    let text = fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    instance_from_json(&text)
}

pub fn write_instance(path: &Path, inst: &MrfInstance) -> Result<()> {
    write_atomic(path, instance_to_json(inst).as_bytes())
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_and_edge_forms_agree() {
        let dense = r#"{"n":3,"k":2,"A":[[0,1,0],[1,0,2],[0,2,0]],"H":[[1,0],[0,0],[0,-1]]}"#;
        let edges = r#"{"n":3,"k":2,"edges":[[0,1,1],[2,1,2]],"H":[[1,0],[0,0],[0,-1]]}"#;
        assert_eq!(instance_from_json(dense).unwrap(), instance_from_json(edges).unwrap());
    }

    #[test]
    fn malformed_files_are_rejected() {
        let both = r#"{"n":1,"k":2,"A":[[0]],"edges":[],"H":[[0,0]]}"#;
        assert!(instance_from_json(both).is_err());
        let neither = r#"{"n":1,"k":2,"H":[[0,0]]}"#;
        assert!(instance_from_json(neither).is_err());
        let dup = r#"{"n":2,"k":2,"edges":[[0,1,1],[1,0,1]],"H":[[0,0],[0,0]]}"#;
        assert!(instance_from_json(dup).is_err());
        let range = r#"{"n":2,"k":2,"edges":[[0,2,1]],"H":[[0,0],[0,0]]}"#;
        assert!(instance_from_json(range).is_err());
        let rows = r#"{"n":2,"k":2,"A":[[0,0]],"H":[[0,0],[0,0]]}"#;
        assert!(instance_from_json(rows).is_err());
    }

    #[test]
    fn large_instances_use_edges() {
        let n = DENSE_WRITE_LIMIT + 1;
        let mut raw = vec![vec![0.0; n]; n];
        raw[0][n - 1] = 0.25;
        raw[n - 1][0] = 0.25;
        let inst = MrfInstance::symmetrize_and_validate(&raw, &vec![vec![0.0, 0.1]; n], 2).unwrap();
        let text = instance_to_json(&inst);
        assert!(text.contains("\"edges\"") && !text.contains("\"A\""));
        assert_eq!(instance_from_json(&text).unwrap(), inst);
    }
}
