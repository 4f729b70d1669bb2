//! Triangle meshes and point clouds.

use crate::error::{Error, Result};

/// Faces whose doubled area falls below this are considered degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

pub type Point = [f64; 3];
pub type Face = [usize; 3];

/// A triangle mesh (faces present) or a point cloud (faces absent).
#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub name: String,
    vertices: Vec<Point>,
    faces: Option<Vec<Face>>,
}

impl Shape {
    /// Builds a mesh, validating face indices and dropping degenerate faces.
    pub fn mesh(name: impl Into<String>, vertices: Vec<Point>, faces: Vec<Face>) -> Result<Self> {
        let name = name.into();
        let n = vertices.len();
        if n < 3 {
            return Err(Error::DegenerateShape(format!(
                "mesh '{name}' needs at least 3 vertices, got {n}"
            )));
        }
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= n {
                    return Err(Error::IndexOutOfRange {
                        line: fi,
                        index: v as i64,
                        bound: n,
                    });
                }
            }
        }
        let before = faces.len();
        let faces: Vec<Face> = faces
            .into_iter()
            .filter(|f| !is_degenerate(&vertices, f))
            .collect();
        if faces.len() != before {
            log::warn!(
                "shape '{name}': dropped {} degenerate face(s)",
                before - faces.len()
            );
        }
        if faces.is_empty() {
            return Err(Error::DegenerateShape(format!(
                "mesh '{name}' has no non-degenerate faces"
            )));
        }
        Ok(Self {
            name,
            vertices,
            faces: Some(faces),
        })
    }

    pub fn point_cloud(name: impl Into<String>, vertices: Vec<Point>) -> Result<Self> {
        let name = name.into();
        if vertices.is_empty() {
            return Err(Error::Empty(format!("point cloud '{name}' has no points")));
        }
        Ok(Self {
            name,
            vertices,
            faces: None,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> Option<&[Face]> {
        self.faces.as_deref()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.as_ref().map_or(0, Vec::len)
    }

    pub fn is_mesh(&self) -> bool {
        self.faces.is_some()
    }

    /// Replaces the vertex positions, keeping topology. Degenerate faces are
    /// not re-checked, so callers must preserve non-degeneracy.
    pub fn with_vertices(&self, vertices: Vec<Point>) -> Self {
        assert_eq!(vertices.len(), self.vertices.len());
        Self {
            name: self.name.clone(),
            vertices,
            faces: self.faces.clone(),
        }
    }

    /// Total surface area, `None` for point clouds.
    pub fn surface_area(&self) -> Option<f64> {
        self.faces
            .as_ref()
            .map(|faces| faces.iter().map(|f| triangle_area(&self.vertices, f)).sum())
    }

    /// Unique undirected mesh edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        if let Some(faces) = &self.faces {
            for f in faces {
                for e in 0..3 {
                    let (a, b) = (f[e], f[(e + 1) % 3]);
                    edges.push((a.min(b), a.max(b)));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Returns the shape with vertices reordered: new vertex `i` is old vertex `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n_vertices());
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        Self {
            name: self.name.clone(),
            vertices: perm.iter().map(|&old| self.vertices[old]).collect(),
            faces: self.faces.as_ref().map(|faces| {
                faces
                    .iter()
                    .map(|f| [inverse[f[0]], inverse[f[1]], inverse[f[2]]])
                    .collect()
            }),
        }
    }
}

fn is_degenerate(vertices: &[Point], f: &Face) -> bool {
    f[0] == f[1] || f[1] == f[2] || f[0] == f[2] || triangle_area(vertices, f) < DEGENERATE_AREA
}

pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn distance(a: &Point, b: &Point) -> f64 {
    norm(&sub(a, b))
}

pub fn triangle_area(vertices: &[Point], f: &Face) -> f64 {
    let (a, b, c) = (&vertices[f[0]], &vertices[f[1]], &vertices[f[2]]);
    0.5 * norm(&cross(&sub(b, a), &sub(c, a)))
}

/// Centers the shape at the origin and scales it so the farthest vertex has norm 1.
pub fn normalize_unit_ball(shape: &Shape) -> Result<Shape> {
    let n = shape.n_vertices() as f64;
    let mut centroid = [0.0; 3];
    for v in shape.vertices() {
        for a in 0..3 {
            centroid[a] += v[a];
        }
    }
    for c in &mut centroid {
        *c /= n;
    }
    let centered: Vec<Point> = shape.vertices().iter().map(|v| sub(v, &centroid)).collect();
    let radius = centered.iter().map(norm).fold(0.0, f64::max);
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::DegenerateShape(format!(
            "shape '{}' has zero radius",
            shape.name
        )));
    }
    let scaled = centered
        .iter()
        .map(|v| [v[0] / radius, v[1] / radius, v[2] / radius])
        .collect();
    Ok(shape.with_vertices(scaled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symmetric_pair_normalizes() {
        let s = Shape::point_cloud("p", vec![[2.0, 0.0, 0.0], [-2.0, 0.0, 0.0]]).unwrap();
        let out = normalize_unit_ball(&s).unwrap();
        assert_eq!(out.vertices(), &[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]);
        assert_eq!(normalize_unit_ball(&out).unwrap(), out);
    }

    #[test]
    fn random_cloud_centroid_and_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Point> = (0..50)
            .map(|_| [rng.gen_range(-3.0..5.0), rng.gen_range(0.0..2.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let out = normalize_unit_ball(&Shape::point_cloud("r", pts).unwrap()).unwrap();
        let mut c = [0.0; 3];
        for v in out.vertices() {
            for a in 0..3 {
                c[a] += v[a] / 50.0;
            }
        }
        assert!(norm(&c) < 1e-12);
        let r = out.vertices().iter().map(norm).fold(0.0, f64::max);
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_points_rejected() {
        let s = Shape::point_cloud("c", vec![[1.0, 1.0, 1.0]; 4]).unwrap();
        assert!(matches!(normalize_unit_ball(&s), Err(Error::DegenerateShape(_))));
    }

    #[test]
    fn degenerate_faces_dropped() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.0, 0.0, 0.0]];
        let s = Shape::mesh("m", v, vec![[0, 1, 2], [0, 0, 1], [0, 1, 3]]).unwrap();
        assert_eq!(s.n_faces(), 1);
    }

    #[test]
    fn out_of_range_face_rejected() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let err = Shape::mesh("m", v, vec![[0, 1, 5]]).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { index: 5, bound: 3, .. }));
    }
}
