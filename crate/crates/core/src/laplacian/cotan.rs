use std::collections::HashMap;

use super::{MassDiagonal, SparseSymmetric};
use crate::error::{Error, Result};
use crate::shape::{cross, dot, norm, sub, triangle_area, Shape};

/// Cotangent magnitudes are capped here so sliver triangles stay finite.
pub const COT_CLAMP: f64 = 1e4;

/// Mass assigned to vertices without any incident area.
pub const MIN_MASS: f64 = 1e-12;

/// Cotangent stiffness matrix: `L_ij = -1/2 (cot a_ij + cot b_ij)` off the
/// diagonal, `L_ii = -sum_j L_ij`. Boundary edges get a single cotangent.
pub fn cotan_stiffness(shape: &Shape) -> Result<SparseSymmetric> {
    let faces = shape
        .faces()
        .ok_or_else(|| Error::Unsupported("cotangent stiffness requires a mesh".into()))?;
    let v = shape.vertices();
    let n = shape.n_vertices();

    let mut edge_faces: HashMap<(usize, usize), u32> = HashMap::new();
    let mut triplets = Vec::with_capacity(faces.len() * 6 + n);
    for f in faces {
        for corner in 0..3 {
            let c = f[corner];
            let a = f[(corner + 1) % 3];
            let b = f[(corner + 2) % 3];
            let ea = sub(&v[a], &v[c]);
            let eb = sub(&v[b], &v[c]);
            let cot = (dot(&ea, &eb) / norm(&cross(&ea, &eb))).clamp(-COT_CLAMP, COT_CLAMP);
            let w = -0.5 * cot;
            triplets.push((a, b, w));
            triplets.push((b, a, w));
            *edge_faces.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let non_manifold = edge_faces.values().filter(|&&c| c > 2).count();
    if non_manifold > 0 {
        log::warn!(
            "shape '{}': {non_manifold} edge(s) shared by more than two faces",
            shape.name
        );
    }

    let off = SparseSymmetric::from_triplets(n, triplets);
    let mut all = off.triplets();
    all.extend(off.row_sums().into_iter().enumerate().map(|(i, s)| (i, i, -s)));
    Ok(SparseSymmetric::from_triplets(n, all))
}

/// Barycentric lumped mass: one third of the incident face areas per vertex.
pub fn lumped_mass(shape: &Shape) -> Result<MassDiagonal> {
    let faces = shape
        .faces()
        .ok_or_else(|| Error::Unsupported("lumped mass requires a mesh".into()))?;
    let v = shape.vertices();
    let mut areas = vec![0.0; shape.n_vertices()];
    for f in faces {
        let a = triangle_area(v, f) / 3.0;
        for &i in f {
            areas[i] += a;
        }
    }
    let isolated = areas.iter().filter(|&&a| a < MIN_MASS).count();
    if isolated > 0 {
        log::warn!(
            "shape '{}': {isolated} vertex(es) without incident area, mass clamped to {MIN_MASS:e}",
            shape.name
        );
        for a in &mut areas {
            *a = a.max(MIN_MASS);
        }
    }
    MassDiagonal::new(areas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn equilateral() -> Shape {
        let h = 3f64.sqrt() / 2.0;
        Shape::mesh("tri", vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]], vec![[0, 1, 2]]).unwrap()
    }

    fn unit_square() -> Shape {
        Shape::mesh(
            "sq",
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn equilateral_triangle_weights() {
        let l = cotan_stiffness(&equilateral()).unwrap();
        let w = -1.0 / (2.0 * 3f64.sqrt());
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 / 3f64.sqrt() } else { w };
                assert!((l.get(i, j) - expected).abs() < 1e-14, "({i},{j}) = {}", l.get(i, j));
            }
        }
    }

    #[test]
    fn square_diagonal_edge() {
        let l = cotan_stiffness(&unit_square()).unwrap();
        // The diagonal faces two right angles, cot 90 = 0.
        assert!(l.get(0, 2).abs() < 1e-14);
        // Boundary edges face one 45 degree angle.
        assert!((l.get(0, 1) + 0.5).abs() < 1e-14);
        assert!((l.get(0, 0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn masses_of_small_shapes() {
        let m = lumped_mass(&equilateral()).unwrap();
        let area = 3f64.sqrt() / 4.0;
        assert!(m.areas().iter().all(|a| (a - area / 3.0).abs() < 1e-15));
        let m = lumped_mass(&unit_square()).unwrap();
        let expected = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0];
        for (a, e) in m.areas().iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_mesh_kernel_and_area() {
        let s = synth::icosphere(3);
        let l = cotan_stiffness(&s).unwrap();
        assert!(l.is_symmetric());
        let tol = 1e-10 * l.norm_inf();
        assert!(l.mul_vec(&vec![1.0; s.n_vertices()]).iter().all(|r| r.abs() <= tol));
        let m = lumped_mass(&s).unwrap();
        let area = s.surface_area().unwrap();
        assert!((m.total() - area).abs() <= 1e-10 * area);
    }

    #[test]
    fn point_cloud_unsupported() {
        let s = Shape::point_cloud("p", vec![[0.0; 3]; 4]).unwrap();
        assert!(matches!(cotan_stiffness(&s), Err(Error::Unsupported(_))));
    }
}
