use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::io::CorrespondenceMap;
use crate::laplacian::{estimate_area, knn_graph, PointCloudOptions};
use crate::shape::{distance, Shape};

/// Undirected weighted graph in adjacency-list form.
#[derive(Debug, Clone)]
pub struct EdgeGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl EdgeGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("edge ({i}, {j}) outside 0..{n}")));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidArgument(format!("edge ({i}, {j}) has length {w}")));
            }
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        Ok(Self { adjacency })
    }

    /// Mesh edges, or the k-NN graph of a point cloud, with Euclidean lengths.
    pub fn of_shape(shape: &Shape, cloud: PointCloudOptions) -> Result<Self> {
        let v = shape.vertices();
        let edges: Vec<(usize, usize, f64)> = if shape.is_mesh() {
            shape
                .edges()
                .into_iter()
                .map(|(i, j)| (i, j, distance(&v[i], &v[j])))
                .collect()
        } else {
            knn_graph(shape, cloud.k_nn)?
        };
        Self::from_edges(shape.n_vertices(), &edges)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    /// Dijkstra from `source`; unreachable vertices get `f64::INFINITY`.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.n()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Reverse((Key(0.0), source)));
        while let Some(Reverse((Key(d), u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((Key(nd), v)));
                }
            }
        }
        dist
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Single-source graph distances on `shape`.
pub fn geodesic_distances(shape: &Shape, source: usize) -> Result<Vec<f64>> {
    if source >= shape.n_vertices() {
        return Err(Error::InvalidArgument(format!(
            "source {source} outside 0..{}",
            shape.n_vertices()
        )));
    }
    let dist = EdgeGraph::of_shape(shape, PointCloudOptions::default())?.distances_from(source);
    let unreachable = dist.iter().filter(|d| d.is_infinite()).count();
    if unreachable > 0 {
        log::warn!("{unreachable} vertices of {} unreachable from {source}", shape.name);
    }
    Ok(dist)
}

/// Graph distances on one shape with lazily cached single-source queries and
/// the `sqrt(area)` normalization of the error metric.
#[derive(Debug)]
pub struct GeodesicField {
    pub shape_id: String,
    graph: EdgeGraph,
    normalization: f64,
    cache: Mutex<HashMap<usize, Vec<f64>>>,
}

impl GeodesicField {
    /// Uses mesh area, or the density-based estimate for point clouds.
    pub fn new(shape: &Shape) -> Result<Self> {
        let opts = PointCloudOptions::default();
        let area = match shape.surface_area() {
            Some(a) => a,
            None => estimate_area(shape, opts)?,
        };
        Self::from_graph(shape.name.clone(), EdgeGraph::of_shape(shape, opts)?, area)
    }

    pub fn from_graph(shape_id: impl Into<String>, graph: EdgeGraph, area: f64) -> Result<Self> {
        if !(area > 0.0) || !area.is_finite() {
            return Err(Error::DegenerateShape(format!("surface area {area}")));
        }
        Ok(Self {
            shape_id: shape_id.into(),
            graph,
            normalization: area.sqrt(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// `sqrt` of the total surface area.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        let mut cache = self.cache.lock().expect("geodesic cache poisoned");
        cache
            .entry(source)
            .or_insert_with(|| self.graph.distances_from(source))
            .clone()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let mut cache = self.cache.lock().expect("geodesic cache poisoned");
        if let Some(d) = cache.get(&a) {
            return d[b];
        }
        if let Some(d) = cache.get(&b) {
            return d[a];
        }
        cache.entry(a).or_insert_with(|| self.graph.distances_from(a))[b]
    }
}

/// Mean geodesic distance on the target between predicted and ground-truth
/// targets, divided by `sqrt(area)` of the target and multiplied by 100.
pub fn mean_geodesic_error(pred: &CorrespondenceMap, gt: &CorrespondenceMap, geo: &GeodesicField) -> Result<f64> {
    if pred.is_empty() {
        return Err(Error::Empty("prediction has no pairs".into()));
    }
    let gt_of: HashMap<usize, usize> = gt.pairs.iter().copied().collect();
    let mut missing: Vec<usize> = pred
        .pairs
        .iter()
        .filter(|(s, _)| !gt_of.contains_key(s))
        .map(|&(s, _)| s)
        .collect();
    if !missing.is_empty() {
        missing.sort_unstable();
        return Err(Error::MissingMatch(missing));
    }
    let n = geo.n();
    let mut sum = 0.0;
    for &(s, t) in &pred.pairs {
        let g = gt_of[&s];
        if t >= n || g >= n {
            return Err(Error::IndexOutOfRange {
                line: 0,
                index: t.max(g) as i64,
                bound: n,
            });
        }
        sum += geo.distance(g, t);
    }
    Ok(100.0 * sum / pred.len() as f64 / geo.normalization())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph() {
        let g = EdgeGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(g.distances_from(0), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(g.distances_from(3)[0], 3.0);
    }

    #[test]
    fn disconnected_is_infinite() {
        let g = EdgeGraph::from_edges(3, &[(0, 1, 1.0)]).unwrap();
        assert!(g.distances_from(0)[2].is_infinite());
    }

    #[test]
    fn missing_gt_lists_vertices() {
        let g = EdgeGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let field = GeodesicField::from_graph("p", g, 1.0).unwrap();
        let pred = CorrespondenceMap::from_targets(&[0, 1, 2]);
        let gt = CorrespondenceMap::new(vec![(1, 1)]);
        match mean_geodesic_error(&pred, &gt, &field) {
            Err(Error::MissingMatch(v)) => assert_eq!(v, vec![0, 2]),
            other => panic!("{other:?}"),
        }
    }
}
