use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use super::{parse_query_file, QueryFile, SmtError};

/// One cache lifetime: the `.smt2` files of a directory in lexicographic
/// order of their relative paths.
#[derive(Clone, Debug)]
pub struct Suite {
    pub id: String,
    pub root: PathBuf,
    pub files: Vec<QueryFile>,
}

pub fn load_suite(dir: &Path) -> Result<Suite, SmtError> {
    let io = |source: std::io::Error| SmtError::Io { path: dir.to_path_buf(), source };
    if !dir.is_dir() {
        return Err(io(std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory")));
    }
    let mut paths = Vec::new();
    for entry in WalkDir::new(dir).follow_links(true) {
        let entry = entry.map_err(|e| io(e.into()))?;
        let path = entry.path();
        if entry.file_type().is_file() && path.extension().is_some_and(|e| e == "smt2") {
            let rel = path.strip_prefix(dir).expect("walkdir yields paths under its root");
            let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            paths.push((rel, path.to_path_buf()));
        }
    }
    if paths.is_empty() {
        return Err(SmtError::EmptySuite(dir.to_path_buf()));
    }
    paths.sort();

    let mut files = Vec::with_capacity(paths.len());
    for (rel, path) in paths {
        let bytes = std::fs::read(&path).map_err(|source| SmtError::Io { path: path.clone(), source })?;
        let q = parse_query_file(&bytes, &rel).map_err(|e| SmtError::InFile { path: rel.clone(), source: Box::new(e) })?;
        files.push(q);
    }
    let id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    Ok(Suite { id, root: dir.to_path_buf(), files })
}
