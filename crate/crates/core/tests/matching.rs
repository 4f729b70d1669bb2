//! Geodesic error metric, nearest-neighbor matching and segmentation.

mod common;

use common::*;
use coupled_embed::io::CorrespondenceMap;
use coupled_embed::matching::{
    kmeans_segment, mean_geodesic_error, nn_match, transfer_segments, EdgeGraph, GeodesicField,
};
use coupled_embed::synth::{random_closed_mesh, random_permutation};
use rand::Rng;

#[test]
fn hand_evaluated_error() {
    // Unit path 0 - 1 - 2 on a shape of area 4: one of two sources lands one
    // edge away, so 100 * (1 / 2) / 2 = 25.
    let g = EdgeGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
    let geo = GeodesicField::from_graph("path", g, 4.0).unwrap();
    let gt = CorrespondenceMap::new(vec![(0, 0), (1, 1)]);
    let pred = CorrespondenceMap::new(vec![(0, 0), (1, 2)]);
    assert!((mean_geodesic_error(&pred, &gt, &geo).unwrap() - 25.0).abs() < 1e-12);
    assert_eq!(mean_geodesic_error(&gt, &gt, &geo).unwrap(), 0.0);
}

#[test]
fn error_is_scale_invariant() {
    let shape = random_closed_mesh(10, 16, 0.3, 1);
    let n = shape.n_vertices();
    let scaled = shape.with_vertices(shape.vertices().iter().map(|v| [v[0] * 3.7, v[1] * 3.7, v[2] * 3.7]).collect());
    let mut r = rng(2);
    let pred = CorrespondenceMap::from_targets(&(0..n).map(|_| r.gen_range(0..n)).collect::<Vec<_>>());
    let gt = CorrespondenceMap::identity(n);
    let a = mean_geodesic_error(&pred, &gt, &GeodesicField::new(&shape).unwrap()).unwrap();
    let b = mean_geodesic_error(&pred, &gt, &GeodesicField::new(&scaled).unwrap()).unwrap();
    assert!(a > 1.0);
    assert!((a - b).abs() <= 1e-9 * a);
}

#[test]
fn permuted_copy_matches_exactly() {
    let shape = random_closed_mesh(8, 12, 0.3, 3);
    let dec = decomposition(&shape, 10);
    let perm = random_permutation(shape.n_vertices(), 1);
    let map = nn_match(&dec.basis.phi, &dec.basis.phi.select_rows(&perm)).unwrap();
    let target = shape.permuted(&perm);
    let err = mean_geodesic_error(&map, &permutation_gt(&perm), &GeodesicField::new(&target).unwrap()).unwrap();
    assert_eq!(err, 0.0);
}

#[test]
fn segmentation_is_deterministic_and_transfers_to_copies() {
    let shape = random_closed_mesh(10, 16, 0.2, 4);
    let dec = decomposition(&shape, 8);
    let a = kmeans_segment(&dec.basis.phi, 6, 11).unwrap();
    let b = kmeans_segment(&dec.basis.phi, 6, 11).unwrap();
    assert_eq!(a, b);
    let perm = random_permutation(shape.n_vertices(), 2);
    let moved = transfer_segments(&a, &dec.basis.phi.select_rows(&perm)).unwrap();
    for (new, &old) in perm.iter().enumerate() {
        assert_eq!(moved.labels[new], a.labels[old]);
    }
}
