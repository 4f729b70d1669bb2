//! Discrete Laplace–Beltrami operators as a stiffness/mass pair.

mod cotan;
mod pointcloud;
mod sparse;

pub use cotan::{cotan_stiffness, lumped_mass, COT_CLAMP, MIN_MASS};
pub use pointcloud::{
    estimate_area, knn_graph, pointcloud_laplacian, Bandwidth, PointCloudOptions,
};
pub use sparse::{MassDiagonal, SparseSymmetric};

use crate::error::Result;
use crate::shape::Shape;

/// How the operator was built; part of every cache key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaplacianKind {
    Cotangent,
    PointCloud(PointCloudOptions),
}

impl LaplacianKind {
    pub fn for_shape(shape: &Shape, options: PointCloudOptions) -> Self {
        if shape.is_mesh() {
            Self::Cotangent
        } else {
            Self::PointCloud(options)
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Cotangent => "cotangent".into(),
            Self::PointCloud(o) => format!("pointcloud:k_nn={}:bandwidth={}", o.k_nn, o.bandwidth),
        }
    }
}

/// Assembles `(L, M)` for a mesh or point cloud.
pub fn assemble(shape: &Shape, kind: LaplacianKind) -> Result<(SparseSymmetric, MassDiagonal)> {
    match kind {
        LaplacianKind::Cotangent => Ok((cotan_stiffness(shape)?, lumped_mass(shape)?)),
        LaplacianKind::PointCloud(opts) => pointcloud_laplacian(shape, opts),
    }
}
