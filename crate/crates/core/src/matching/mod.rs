//! Correspondence retrieval, geodesic evaluation and segmentation.

mod geodesic;
mod segment;

pub use geodesic::{geodesic_distances, mean_geodesic_error, EdgeGraph, GeodesicField};
pub use segment::{kmeans_objective, kmeans_segment, kmeans_segment_with, transfer_segments, KMeansOptions, KMeansReport, SegmentLabels};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::io::CorrespondenceMap;
use crate::knn::{KdTree, PointSet};

/// Target sizes from which nearest-neighbor search switches to a k-d tree.
pub const TREE_THRESHOLD: usize = 5000;

/// Row-major copy of the rows of `m`.
pub(crate) fn rows_of(m: &DMatrix<f64>) -> PointSet {
    let (n, k) = m.shape();
    let mut data = Vec::with_capacity(n * k);
    for i in 0..n {
        data.extend(m.row(i).iter());
    }
    PointSet::new(data, k.max(1))
}

/// For each source row, the index of the nearest target row in Euclidean
/// distance. Ties go to the lowest target index.
pub fn nn_match(psi_source: &DMatrix<f64>, psi_target: &DMatrix<f64>) -> Result<CorrespondenceMap> {
    if psi_target.nrows() == 0 {
        return Err(Error::Empty("target embedding has no rows".into()));
    }
    if psi_source.ncols() != psi_target.ncols() {
        return Err(Error::DimensionMismatch {
            expected: psi_source.ncols(),
            found: psi_target.ncols(),
        });
    }
    if psi_source.ncols() == 0 {
        return Ok(CorrespondenceMap::from_targets(&vec![0; psi_source.nrows()]));
    }
    let src = rows_of(psi_source);
    let tgt = rows_of(psi_target);
    let targets: Vec<usize> = if tgt.len() < TREE_THRESHOLD {
        (0..src.len())
            .map(|i| tgt.nearest_brute(src.point(i)).expect("target is nonempty").index)
            .collect()
    } else {
        let tree = KdTree::build(&tgt);
        (0..src.len())
            .map(|i| tree.nearest(src.point(i)).expect("target is nonempty").index)
            .collect()
    };
    Ok(CorrespondenceMap::from_targets(&targets))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_three_by_two() {
        let s = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let t = DMatrix::from_row_slice(3, 2, &[0.1, 0.0, 0.9, 0.1, 0.0, 1.2]);
        // Brute-force all nine distances.
        let mut expect = Vec::new();
        for i in 0..3 {
            let mut best = (f64::INFINITY, 0);
            for j in 0..3 {
                let d = (s.row(i) - t.row(j)).norm();
                if d < best.0 {
                    best = (d, j);
                }
            }
            expect.push(best.1);
        }
        assert_eq!(nn_match(&s, &t).unwrap(), CorrespondenceMap::from_targets(&expect));
        assert_eq!(expect, vec![0, 1, 2]);
    }

    #[test]
    fn single_row_target_is_constant() {
        let s = DMatrix::from_fn(5, 3, |i, j| (i * 3 + j) as f64);
        let t = DMatrix::from_row_slice(1, 3, &[7.0, -1.0, 2.0]);
        assert_eq!(nn_match(&s, &t).unwrap().pairs, (0..5).map(|i| (i, 0)).collect::<Vec<_>>());
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let s = DMatrix::from_row_slice(1, 1, &[0.0]);
        let t = DMatrix::from_row_slice(3, 1, &[1.0, -1.0, 1.0]);
        assert_eq!(nn_match(&s, &t).unwrap().pairs, vec![(0, 0)]);
    }

    #[test]
    fn empty_target_errors() {
        let s = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        assert!(matches!(nn_match(&s, &DMatrix::zeros(0, 2)), Err(Error::Empty(_))));
    }
}
