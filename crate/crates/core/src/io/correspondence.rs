//! Vertex correspondences between a source and a target shape.
//!
//! Text format: one pair `src tgt` per line, or a single column where line
//! `i` holds the target of source `i`. Blank lines and `#` comments are ignored.

use std::collections::HashSet;
use std::fmt::Write;
use std::fs;
use std::path::Path;

use super::content_lines;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Indexing {
    #[default]
    ZeroBased,
    OneBased,
}

impl Indexing {
    fn offset(self) -> i64 {
        match self {
            Indexing::ZeroBased => 0,
            Indexing::OneBased => 1,
        }
    }
}

impl std::str::FromStr for Indexing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero_based" | "zero" | "0" => Ok(Self::ZeroBased),
            "one_based" | "one" | "1" => Ok(Self::OneBased),
            _ => Err(Error::InvalidConfig(format!("unknown indexing '{s}'"))),
        }
    }
}

/// Zero-based `(source, target)` pairs; each source appears at most once.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorrespondenceMap {
    pub pairs: Vec<(usize, usize)>,
}

impl CorrespondenceMap {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self { pairs }
    }

    /// Dense map where source `i` goes to `targets[i]`.
    pub fn from_targets(targets: &[usize]) -> Self {
        Self {
            pairs: targets.iter().copied().enumerate().collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            pairs: (0..n).map(|i| (i, i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Lookup table from source index to target, `None` where unmapped.
    pub fn target_lookup(&self, n_source: usize) -> Vec<Option<usize>> {
        let mut table = vec![None; n_source];
        for &(s, t) in &self.pairs {
            if s < n_source {
                table[s] = Some(t);
            }
        }
        table
    }

    /// True when every source vertex in `0..n_source` has exactly one pair.
    pub fn is_dense(&self, n_source: usize) -> bool {
        self.pairs.len() == n_source && self.target_lookup(n_source).iter().all(Option::is_some)
    }

    pub fn validate(&self, n_source: usize, n_target: usize) -> Result<()> {
        let mut seen = HashSet::new();
        for (row, &(s, t)) in self.pairs.iter().enumerate() {
            if s >= n_source {
                return Err(Error::IndexOutOfRange { line: row + 1, index: s as i64, bound: n_source });
            }
            if t >= n_target {
                return Err(Error::IndexOutOfRange { line: row + 1, index: t as i64, bound: n_target });
            }
            if !seen.insert(s) {
                return Err(Error::DuplicateSource { line: row + 1, source_index: s });
            }
        }
        Ok(())
    }
}

/// Parses a correspondence file. With `bounds = Some((n_source, n_target))`
/// every index is range-checked; errors name the offending line.
pub fn parse_correspondence(
    text: &str,
    indexing: Indexing,
    bounds: Option<(usize, usize)>,
) -> Result<CorrespondenceMap> {
    let offset = indexing.offset();
    let (ns, nt) = bounds.unwrap_or((usize::MAX, usize::MAX));
    let convert = |tok: &str, line: usize, bound: usize| -> Result<usize> {
        let raw: i64 = tok
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid index '{tok}'")))?;
        let v = raw - offset;
        if v < 0 || v as u64 >= bound as u64 {
            return Err(Error::IndexOutOfRange { line, index: v, bound });
        }
        Ok(v as usize)
    };

    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    let mut columns = None;
    for (row, (line, s)) in content_lines(text).enumerate() {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let ncol = toks.len().min(2);
        if *columns.get_or_insert(ncol) != ncol {
            return Err(Error::parse(line, "inconsistent column count"));
        }
        let (src, tgt) = if ncol == 1 {
            if row >= ns {
                return Err(Error::IndexOutOfRange { line, index: row as i64, bound: ns });
            }
            (row, convert(toks[0], line, nt)?)
        } else {
            (convert(toks[0], line, ns)?, convert(toks[1], line, nt)?)
        };
        if !seen.insert(src) {
            return Err(Error::DuplicateSource { line, source_index: src });
        }
        pairs.push((src, tgt));
    }
    if pairs.is_empty() {
        return Err(Error::Empty("correspondence file has no entries".into()));
    }
    Ok(CorrespondenceMap { pairs })
}

pub fn load_correspondence(
    path: impl AsRef<Path>,
    indexing: Indexing,
    bounds: Option<(usize, usize)>,
) -> Result<CorrespondenceMap> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_correspondence(&text, indexing, bounds)
}

pub fn format_correspondence(map: &CorrespondenceMap, indexing: Indexing) -> String {
    let off = indexing.offset() as usize;
    let mut out = String::new();
    for &(s, t) in &map.pairs {
        writeln!(out, "{} {}", s + off, t + off).unwrap();
    }
    out
}

pub fn save_correspondence(
    map: &CorrespondenceMap,
    path: impl AsRef<Path>,
    indexing: Indexing,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_correspondence(map, indexing)).map_err(|e| Error::io(path, e))
}
