use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::io::CorrespondenceMap;
use crate::shape::{distance, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorKind {
    Hks,
    GtIndicator,
    External,
}

/// Per-point descriptor matrix, one row per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    pub values: DMatrix<f64>,
    pub kind: DescriptorKind,
}

impl Descriptor {
    pub fn new(values: DMatrix<f64>, kind: DescriptorKind) -> Self {
        Self { values, kind }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            values: self.values.select_rows(perm),
            kind: self.kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Landmarks {
    All,
    /// `q` landmarks by farthest-point sampling seeded at vertex 0.
    Fps(usize),
}

/// Greedy farthest-point sampling in Euclidean space starting from vertex 0.
/// Ties go to the lowest index.
pub fn farthest_point_sampling(shape: &Shape, q: usize) -> Vec<usize> {
    let v = shape.vertices();
    let q = q.min(v.len());
    if q == 0 {
        return Vec::new();
    }
    let mut chosen = vec![0];
    let mut dist: Vec<f64> = v.iter().map(|p| distance(p, &v[0])).collect();
    while chosen.len() < q {
        let mut best = 0;
        for i in 1..v.len() {
            if dist[i] > dist[best] {
                best = i;
            }
        }
        chosen.push(best);
        for (i, p) in v.iter().enumerate() {
            dist[i] = dist[i].min(distance(p, &v[best]));
        }
    }
    chosen
}

/// Indicator descriptors from a ground-truth map: column `j` is 1 at landmark
/// `j` on the source and at its match on the target.
pub fn gt_indicator_descriptor(
    corr: &CorrespondenceMap,
    landmarks: Landmarks,
    source: &Shape,
    n_target: usize,
) -> Result<(Descriptor, Descriptor)> {
    let n_source = source.n_vertices();
    let lookup = corr.target_lookup(n_source);
    let selected: Vec<usize> = match landmarks {
        Landmarks::All => corr.pairs.iter().map(|&(s, _)| s).collect(),
        Landmarks::Fps(q) => farthest_point_sampling(source, q),
    };
    let missing: Vec<usize> = selected
        .iter()
        .copied()
        .filter(|&s| s >= n_source || lookup[s].is_none())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingMatch(missing));
    }
    let q = selected.len();
    let mut ds = DMatrix::zeros(n_source, q);
    let mut dt = DMatrix::zeros(n_target, q);
    for (j, &s) in selected.iter().enumerate() {
        let t = lookup[s].unwrap();
        if t >= n_target {
            return Err(Error::IndexOutOfRange { line: j + 1, index: t as i64, bound: n_target });
        }
        ds[(s, j)] = 1.0;
        dt[(t, j)] = 1.0;
    }
    Ok((
        Descriptor::new(ds, DescriptorKind::GtIndicator),
        Descriptor::new(dt, DescriptorKind::GtIndicator),
    ))
}
