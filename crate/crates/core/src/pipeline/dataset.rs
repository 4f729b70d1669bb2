//! Ground-truth lookup for a dataset root.
//!
//! Pairwise files `corres/<src>-<tgt>.txt` take precedence. Otherwise, when
//! both shapes have a `corres/<name>.vts` file mapping each vertex to a
//! template vertex, source `i` maps to the lowest target vertex sharing its
//! template index.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use super::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::io::{load_correspondence, parse_correspondence, CorrespondenceMap};

fn corres_dir(cfg: &PipelineConfig) -> PathBuf {
    cfg.dataset_root.join("corres")
}

fn load_vts(cfg: &PipelineConfig, name: &str, n: usize) -> Result<Option<Vec<usize>>> {
    let path = corres_dir(cfg).join(format!("{name}.vts"));
    if !path.is_file() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let map = parse_correspondence(&text, cfg.indexing, Some((n, usize::MAX)))?;
    if map.len() != n {
        return Err(Error::parse(
            0,
            format!("{}: {} entries for {n} vertices", path.display(), map.len()),
        ));
    }
    let mut out = vec![0; n];
    for (s, t) in map.pairs {
        out[s] = t;
    }
    Ok(Some(out))
}

/// Ground truth from `source` to `target`, or `None` when the dataset has
/// none for this pair.
pub fn ground_truth(
    cfg: &PipelineConfig,
    source: &str,
    target: &str,
    n_source: usize,
    n_target: usize,
) -> Result<Option<CorrespondenceMap>> {
    let pairwise = corres_dir(cfg).join(format!("{source}-{target}.txt"));
    if pairwise.is_file() {
        return load_correspondence(&pairwise, cfg.indexing, Some((n_source, n_target))).map(Some);
    }
    if source == target && n_source == n_target {
        return Ok(Some(CorrespondenceMap::identity(n_source)));
    }
    let (Some(vs), Some(vt)) = (load_vts(cfg, source, n_source)?, load_vts(cfg, target, n_target)?) else {
        return Ok(None);
    };
    let mut first: HashMap<usize, usize> = HashMap::new();
    for (j, &t) in vt.iter().enumerate() {
        first.entry(t).or_insert(j);
    }
    let pairs: Vec<(usize, usize)> = vs
        .iter()
        .enumerate()
        .filter_map(|(i, t)| first.get(t).map(|&j| (i, j)))
        .collect();
    if pairs.is_empty() {
        return Ok(None);
    }
    Ok(Some(CorrespondenceMap::new(pairs)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_files_compose() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.dataset_root = dir.path().to_path_buf();
        fs::create_dir_all(dir.path().join("corres")).unwrap();
        fs::write(dir.path().join("corres/a.vts"), "2\n0\n1\n5\n").unwrap();
        fs::write(dir.path().join("corres/b.vts"), "0\n1\n1\n2\n").unwrap();
        let gt = ground_truth(&cfg, "a", "b", 4, 4).unwrap().unwrap();
        // Template 5 has no vertex on b; template 1 first appears at vertex 1.
        assert_eq!(gt.pairs, vec![(0, 3), (1, 0), (2, 1)]);
        assert!(ground_truth(&cfg, "a", "c", 4, 4).unwrap().is_none());
    }
}
