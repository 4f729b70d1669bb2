//! Graph Laplacian for raw point clouds.
//!
//! Symmetric k-NN graph (an edge exists if either endpoint lists the other)
//! with Gaussian weights `exp(-d^2 / sigma^2)`, stiffness `L = D - W`, and a
//! mass proportional to the area share of each point inside its sigma-ball,
//! rescaled to total one.

use std::f64::consts::PI;
use std::fmt;

use super::{MassDiagonal, SparseSymmetric};
use crate::error::{Error, Result};
use crate::knn::{KdTree, PointSet};
use crate::shape::Shape;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Mean distance to the k-th neighbor.
    Auto,
    Value(f64),
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bandwidth::Auto => write!(f, "auto"),
            Bandwidth::Value(v) => write!(f, "{v:?}"),
        }
    }
}

impl std::str::FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Self::Value(v)),
            _ => Err(Error::InvalidConfig(format!("invalid bandwidth '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCloudOptions {
    pub k_nn: usize,
    pub bandwidth: Bandwidth,
}

impl Default for PointCloudOptions {
    fn default() -> Self {
        Self {
            k_nn: 8,
            bandwidth: Bandwidth::Auto,
        }
    }
}

/// Per-point neighbor lists excluding the point itself, nearest first.
fn neighbor_lists(shape: &Shape, k_nn: usize) -> Result<Vec<Vec<(usize, f64)>>> {
    let n = shape.n_vertices();
    if k_nn < 1 || n <= k_nn {
        return Err(Error::InvalidArgument(format!(
            "k-NN graph needs n > k_nn >= 1 (n = {n}, k_nn = {k_nn})"
        )));
    }
    let pts = PointSet::from_points(shape.vertices());
    let tree = KdTree::build(&pts);
    Ok((0..n)
        .map(|i| {
            tree.knn(pts.point(i), k_nn + 1)
                .into_iter()
                .filter(|nb| nb.index != i)
                .take(k_nn)
                .map(|nb| (nb.index, nb.dist2.sqrt()))
                .collect()
        })
        .collect())
}

/// Undirected edges `(i, j, length)` with `i < j` of the symmetric k-NN graph.
pub fn knn_graph(shape: &Shape, k_nn: usize) -> Result<Vec<(usize, usize, f64)>> {
    let lists = neighbor_lists(shape, k_nn)?;
    let mut edges: Vec<(usize, usize, f64)> = lists
        .iter()
        .enumerate()
        .flat_map(|(i, l)| l.iter().map(move |&(j, d)| (i.min(j), i.max(j), d)))
        .collect();
    edges.sort_by_key(|&(i, j, _)| (i, j));
    edges.dedup_by_key(|&mut (i, j, _)| (i, j));
    Ok(edges)
}

fn resolve_sigma(lists: &[Vec<(usize, f64)>], bandwidth: Bandwidth) -> Result<f64> {
    let sigma = match bandwidth {
        Bandwidth::Value(v) => v,
        Bandwidth::Auto => {
            lists.iter().map(|l| l.last().map_or(0.0, |x| x.1)).sum::<f64>() / lists.len() as f64
        }
    };
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Bandwidth(format!(
            "bandwidth {sigma} is not positive (duplicate points?)"
        )));
    }
    Ok(sigma)
}

/// Unnormalized area shares `pi sigma^2 / |B_sigma(i)|`.
fn area_shares(shape: &Shape, sigma: f64) -> Vec<f64> {
    let pts = PointSet::from_points(shape.vertices());
    let tree = KdTree::build(&pts);
    let ball = PI * sigma * sigma;
    (0..pts.len())
        .map(|i| ball / tree.count_within(pts.point(i), sigma * sigma) as f64)
        .collect()
}

pub fn pointcloud_laplacian(
    shape: &Shape,
    options: PointCloudOptions,
) -> Result<(SparseSymmetric, MassDiagonal)> {
    if options.k_nn < 2 {
        return Err(Error::InvalidArgument(format!("k_nn must be >= 2, got {}", options.k_nn)));
    }
    let n = shape.n_vertices();
    let lists = neighbor_lists(shape, options.k_nn)?;
    let sigma = resolve_sigma(&lists, options.bandwidth)?;
    let edges = knn_graph(shape, options.k_nn)?;

    let mut off = Vec::with_capacity(2 * edges.len());
    for &(i, j, d) in &edges {
        let w = (-(d * d) / (sigma * sigma)).exp();
        off.push((i, j, -w));
        off.push((j, i, -w));
    }
    let off = SparseSymmetric::from_triplets(n, off);
    let mut all = off.triplets();
    all.extend(off.row_sums().into_iter().enumerate().map(|(i, s)| (i, i, -s)));
    let stiffness = SparseSymmetric::from_triplets(n, all);

    let shares = area_shares(shape, sigma);
    let total: f64 = shares.iter().sum();
    let mass = MassDiagonal::new(shares.iter().map(|a| a / total).collect())?;
    Ok((stiffness, mass))
}

/// Surface-area estimate of a point cloud from sigma-ball densities.
pub fn estimate_area(shape: &Shape, options: PointCloudOptions) -> Result<f64> {
    let lists = neighbor_lists(shape, options.k_nn)?;
    let sigma = resolve_sigma(&lists, options.bandwidth)?;
    Ok(area_shares(shape, sigma).iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn collinear_points() {
        let s = Shape::point_cloud("line", vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]]).unwrap();
        let opts = PointCloudOptions { k_nn: 3, bandwidth: Bandwidth::Auto };
        let (l, m) = pointcloud_laplacian(&s, opts).unwrap();
        assert!(l.is_symmetric());
        assert!(l.row_sums().iter().all(|r| r.abs() < 1e-14));
        assert!((m.total() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn three_points_two_neighbors() {
        let s = Shape::point_cloud("line", vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).unwrap();
        let (l, _) = pointcloud_laplacian(&s, PointCloudOptions { k_nn: 2, bandwidth: Bandwidth::Auto }).unwrap();
        assert!(l.is_symmetric());
        assert_eq!(l.nnz(), 9);
        assert!(l.row_sums().iter().all(|r| r.abs() < 1e-14));
    }

    #[test]
    fn too_few_neighbors() {
        let s = Shape::point_cloud("line", vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).unwrap();
        assert!(pointcloud_laplacian(&s, PointCloudOptions { k_nn: 1, bandwidth: Bandwidth::Auto }).is_err());
        assert!(pointcloud_laplacian(&s, PointCloudOptions { k_nn: 3, bandwidth: Bandwidth::Auto }).is_err());
    }

    #[test]
    fn duplicate_points_collapse_bandwidth() {
        let s = Shape::point_cloud("dup", vec![[1.0, 2.0, 3.0]; 10]).unwrap();
        let err = pointcloud_laplacian(&s, PointCloudOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Bandwidth(_)));
    }

    #[test]
    fn random_cloud_is_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = (0..200)
            .map(|_| [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let s = Shape::point_cloud("r", pts).unwrap();
        let (l, m) = pointcloud_laplacian(&s, PointCloudOptions::default()).unwrap();
        assert!(l.is_symmetric());
        assert!(l.mul_vec(&vec![1.0; 200]).iter().all(|r| r.abs() <= 1e-10 * l.norm_inf()));
        let eig = nalgebra::SymmetricEigen::new(l.to_dense());
        assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-9));
        assert!(m.areas().iter().all(|&a| a > 0.0));
    }
}
