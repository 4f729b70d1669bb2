//! Eigenpairs against a dense symmetric eigensolver, plus invariances of
//! the basis and the heat kernel signature.

mod common;

use common::*;
use coupled_embed::spectral::{hks, HksOptions, SpectralBasis};
use coupled_embed::synth::{icosphere, random_closed_mesh, random_permutation};
use coupled_embed::Shape;
use nalgebra::DMatrix;
use rand::Rng;

fn random_cloud(n: usize, seed: u64) -> Shape {
    let mut r = rng(seed);
    let pts = (0..n)
        .map(|_| {
            let v: [f64; 3] = [r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / norm, v[1] / norm, 0.6 * v[2] / norm]
        })
        .collect();
    Shape::point_cloud("cloud", pts).unwrap()
}

fn check_against_dense(shape: &Shape, k: usize) {
    let dec = decomposition(shape, k);
    let oracle = dense_spectrum(shape, k);
    for (i, (a, b)) in dec.basis.lambda.iter().zip(&oracle).enumerate() {
        assert!(
            (a - b).abs() <= 1e-8 * b.abs().max(1.0),
            "{} eigenvalue {i}: {a} vs {b}",
            shape.name
        );
    }
    // Residual and M-orthonormality of the returned vectors.
    let phi = &dec.basis.phi;
    let lphi = dec.stiffness.mul_dense(phi);
    let mphi = dec.mass.mul_dense(phi);
    for j in 0..k {
        let r = lphi.column(j) - mphi.column(j) * dec.basis.lambda[j];
        assert!(r.norm() <= 1e-7 * (1.0 + dec.basis.lambda[j]), "{} residual {j}", shape.name);
    }
    let gram = phi.tr_mul(&mphi);
    assert!((gram - DMatrix::identity(k, k)).amax() < 1e-8);
}

#[test]
fn meshes_match_dense_oracle() {
    for (seed, (stacks, slices)) in [(4, 8), (7, 12), (10, 20), (12, 24)].into_iter().enumerate() {
        let shape = random_closed_mesh(stacks, slices, 0.4, seed as u64);
        assert!(shape.n_vertices() <= 300);
        check_against_dense(&shape, 20);
    }
}

#[test]
fn point_clouds_match_dense_oracle() {
    for (seed, n) in [60, 150, 300].into_iter().enumerate() {
        check_against_dense(&random_cloud(n, seed as u64), 12);
    }
}

#[test]
fn icosphere_spherical_harmonics() {
    let sphere = icosphere(4);
    assert_eq!(sphere.n_vertices(), 2562);
    let lambda = decomposition(&sphere, 16).basis.lambda;
    assert!(lambda[0].abs() < 1e-8);
    let mut start = 1;
    for l in 1..=3usize {
        let exact = (l * (l + 1)) as f64;
        for (i, v) in lambda[start..start + 2 * l + 1].iter().enumerate() {
            assert!((v - exact).abs() / exact < 0.05, "l = {l}, entry {i}: {v}");
        }
        start += 2 * l + 1;
    }
}

#[test]
fn spectrum_is_permutation_invariant() {
    let shape = random_closed_mesh(8, 12, 0.3, 9);
    let perm = random_permutation(shape.n_vertices(), 4);
    let a = decomposition(&shape, 15);
    let b = decomposition(&shape.permuted(&perm), 15);
    for (x, y) in a.basis.lambda.iter().zip(&b.basis.lambda) {
        assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
    }
    // Permuted mass and stiffness agree entrywise.
    assert_eq!(a.mass.permuted(&perm).areas().len(), b.mass.areas().len());
    for (x, y) in a.mass.permuted(&perm).areas().iter().zip(b.mass.areas()) {
        assert!((x - y).abs() < 1e-15);
    }
}

#[test]
fn hks_ignores_eigenvector_signs() {
    let shape = random_closed_mesh(8, 12, 0.3, 2);
    let dec = decomposition(&shape, 12);
    let mut r = rng(5);
    let mut phi = dec.basis.phi.clone();
    for mut col in phi.column_iter_mut() {
        if r.gen::<bool>() {
            col.neg_mut();
        }
    }
    let flipped = SpectralBasis { phi, lambda: dec.basis.lambda.clone() };
    let opts = HksOptions::default();
    let a = hks(&dec.basis, &opts).unwrap();
    let b = hks(&flipped, &opts).unwrap();
    assert!((a.values - b.values).amax() < 1e-14);
}
