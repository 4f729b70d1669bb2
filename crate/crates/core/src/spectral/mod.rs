//! Laplace–Beltrami eigenbases and pointwise spectral descriptors.

mod descriptor;
mod eigen;
mod hks;

pub use descriptor::{farthest_point_sampling, gt_indicator_descriptor, Descriptor, DescriptorKind, Landmarks};
pub use eigen::{eig_smallest, eig_smallest_with, reverse_cuthill_mckee, EigenOptions, EnvelopeCholesky};
pub use hks::{hks, HksNormalization, HksOptions, TimeRange, HKS_DEFAULT_DIM};

use nalgebra::DMatrix;

use crate::error::Result;
use crate::io::CorrespondenceMap;
use crate::laplacian::{assemble, LaplacianKind, MassDiagonal, PointCloudOptions, SparseSymmetric};
use crate::matching::nn_match;
use crate::shape::Shape;

/// Default spectral resolution.
pub const DEFAULT_K: usize = 50;

/// The `k` smallest generalized eigenpairs, M-orthonormal columns and
/// ascending eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    pub phi: DMatrix<f64>,
    pub lambda: Vec<f64>,
}

impl SpectralBasis {
    pub fn n(&self) -> usize {
        self.phi.nrows()
    }

    pub fn k(&self) -> usize {
        self.phi.ncols()
    }

    /// The first `k` eigenpairs.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            phi: self.phi.columns(0, k).into_owned(),
            lambda: self.lambda[..k].to_vec(),
        }
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            phi: self.phi.select_rows(perm),
            lambda: self.lambda.clone(),
        }
    }
}

/// Operators and eigenbasis of one shape.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub stiffness: SparseSymmetric,
    pub mass: MassDiagonal,
    pub basis: SpectralBasis,
}

/// Assembles `(L, M)` (cotangent for meshes, k-NN graph for point clouds)
/// and computes the `k` smallest eigenpairs.
pub fn decompose(shape: &Shape, k: usize, cloud: PointCloudOptions) -> Result<Decomposition> {
    let (stiffness, mass) = assemble(shape, LaplacianKind::for_shape(shape, cloud))?;
    let basis = eig_smallest(&stiffness, &mass, k)?;
    Ok(Decomposition { stiffness, mass, basis })
}

/// Scales each column by +-1 so that its largest-magnitude entry is positive.
/// Ties in magnitude go to the lowest row index.
pub fn fix_signs(basis: &SpectralBasis) -> SpectralBasis {
    let mut phi = basis.phi.clone();
    for mut col in phi.column_iter_mut() {
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        if col.len() > 0 && col[best] < 0.0 {
            col.neg_mut();
        }
    }
    SpectralBasis {
        phi,
        lambda: basis.lambda.clone(),
    }
}

/// Nearest-neighbor matching on sign-fixed raw eigenfunctions.
pub fn spectral_embedding_nn_baseline(
    source: &SpectralBasis,
    target: &SpectralBasis,
) -> Result<CorrespondenceMap> {
    if source.k() != target.k() {
        return Err(crate::error::Error::DimensionMismatch {
            expected: source.k(),
            found: target.k(),
        });
    }
    nn_match(&fix_signs(source).phi, &fix_signs(target).phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_fix_examples() {
        let b = SpectralBasis {
            phi: DMatrix::from_column_slice(3, 2, &[-3.0, 1.0, 2.0, -2.0, 2.0, 1.0]),
            lambda: vec![0.0, 1.0],
        };
        let f = fix_signs(&b);
        assert_eq!(f.phi.column(0).as_slice(), &[3.0, -1.0, -2.0]);
        // Magnitude tie: the lowest index decides.
        assert_eq!(f.phi.column(1).as_slice(), &[2.0, -2.0, -1.0]);
        assert_eq!(fix_signs(&f), f);
        let neg = SpectralBasis { phi: -b.phi.clone(), lambda: b.lambda.clone() };
        assert_eq!(fix_signs(&neg), f);
    }

    #[test]
    fn identical_bases_give_identity() {
        let phi = DMatrix::from_fn(10, 3, |i, j| ((i * 7 + j * 3) as f64).sin());
        let b = SpectralBasis { phi, lambda: vec![0.0, 1.0, 2.0] };
        let map = spectral_embedding_nn_baseline(&b, &b).unwrap();
        assert_eq!(map, CorrespondenceMap::identity(10));
    }
}
