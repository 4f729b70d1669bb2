//! Synthetic shapes for tests and examples: spheres, bumpy ellipsoids and
//! near-isometric poses obtained by bending and twisting.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::shape::{Face, Point, Shape};

/// Subdivided icosahedron projected to the unit sphere.
/// Level `l` has `10 * 4^l + 2` vertices.
pub fn icosphere(level: u32) -> Shape {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Point> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut faces: Vec<Face> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut m = [0; 3];
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                m[e] = *mid.entry(key).or_insert_with(|| {
                    let (pa, pb) = (verts[a], verts[b]);
                    verts.push([(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0, (pa[2] + pb[2]) / 2.0]);
                    verts.len() - 1
                });
            }
            next.push([f[0], m[0], m[2]]);
            next.push([f[1], m[1], m[0]]);
            next.push([f[2], m[2], m[1]]);
            next.push([m[0], m[1], m[2]]);
        }
        faces = next;
    }
    for v in &mut verts {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        for c in v.iter_mut() {
            *c /= r;
        }
    }
    Shape::mesh(format!("icosphere{level}"), verts, faces).expect("icosphere is valid")
}

/// Latitude/longitude sphere with `stacks` interior rings of `slices`
/// vertices plus two poles: `stacks * slices + 2` vertices.
pub fn uv_sphere(stacks: usize, slices: usize) -> Shape {
    assert!(stacks >= 1 && slices >= 3);
    let mut verts = vec![[0.0, 0.0, 1.0]];
    for s in 0..stacks {
        let theta = std::f64::consts::PI * (s + 1) as f64 / (stacks + 1) as f64;
        for t in 0..slices {
            let phi = 2.0 * std::f64::consts::PI * t as f64 / slices as f64;
            verts.push([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]);
        }
    }
    verts.push([0.0, 0.0, -1.0]);
    let south = verts.len() - 1;
    let ring = |s: usize, t: usize| 1 + s * slices + (t % slices);
    let mut faces = Vec::new();
    for t in 0..slices {
        faces.push([0, ring(0, t), ring(0, t + 1)]);
        faces.push([south, ring(stacks - 1, t + 1), ring(stacks - 1, t)]);
    }
    for s in 0..stacks - 1 {
        for t in 0..slices {
            faces.push([ring(s, t), ring(s + 1, t), ring(s + 1, t + 1)]);
            faces.push([ring(s, t), ring(s + 1, t + 1), ring(s, t + 1)]);
        }
    }
    Shape::mesh(format!("uvsphere{stacks}x{slices}"), verts, faces).expect("uv sphere is valid")
}

/// A closed sphere-topology mesh with `stacks * slices + 2` vertices whose
/// radius is randomly perturbed by up to `roughness`.
pub fn random_closed_mesh(stacks: usize, slices: usize, roughness: f64, seed: u64) -> Shape {
    let base = uv_sphere(stacks, slices);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verts = base
        .vertices()
        .iter()
        .map(|v| {
            let r = 1.0 + roughness * (rng.gen::<f64>() - 0.5);
            [v[0] * r, v[1] * r, v[2] * r]
        })
        .collect();
    let mut s = base.with_vertices(verts);
    s.name = format!("random{seed}");
    s
}

/// Gaussian bump displacing the surface along the radial direction.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub center: Point,
    pub width: f64,
    pub height: f64,
}

/// An ellipsoid with radii `radii` sampled on a uv sphere, with bumps
/// applied on the unit sphere before stretching.
pub fn bumpy_ellipsoid(stacks: usize, slices: usize, radii: [f64; 3], bumps: &[Bump]) -> Shape {
    let base = uv_sphere(stacks, slices);
    let verts = base
        .vertices()
        .iter()
        .map(|v| {
            let mut r = 1.0;
            for b in bumps {
                let d2 = (v[0] - b.center[0]).powi(2) + (v[1] - b.center[1]).powi(2) + (v[2] - b.center[2]).powi(2);
                r += b.height * (-d2 / (b.width * b.width)).exp();
            }
            [v[0] * r * radii[0], v[1] * r * radii[1], v[2] * r * radii[2]]
        })
        .collect();
    let mut s = base.with_vertices(verts);
    s.name = "ellipsoid".into();
    s
}

/// An elongated ellipsoid with three asymmetric bumps, a stand-in for a limb
/// or torso: long stretches with nearly uniform local geometry.
pub fn elongated_blob(stacks: usize, slices: usize) -> Shape {
    let bumps = [
        Bump { center: [0.95, 0.3, 0.0], width: 0.3, height: 0.3 },
        Bump { center: [-0.9, 0.0, 0.4], width: 0.35, height: 0.4 },
        Bump { center: [0.3, -0.9, 0.3], width: 0.3, height: 0.25 },
    ];
    let mut s = bumpy_ellipsoid(stacks, slices, [2.5, 0.8, 0.6], &bumps);
    s.name = "blob".into();
    s
}

/// Three near-isometric poses of `base`: a bend, a twist and both.
/// `strength` scales the deformation.
pub fn standard_poses(base: &Shape, strength: f64) -> Vec<Shape> {
    let named = |s: Shape, tag: &str| {
        let mut s = s;
        s.name = format!("{}_{tag}", base.name);
        s
    };
    vec![
        named(bend(base, 0.35 * strength), "bend"),
        named(twist(base, 0.4 * strength), "twist"),
        named(twist(&bend(base, -0.25 * strength), 0.25 * strength), "bend_twist"),
    ]
}

/// Bends the shape about the z axis: the x axis is wrapped onto a circle of
/// curvature `kappa`. Lengths along y = 0 are preserved.
pub fn bend(shape: &Shape, kappa: f64) -> Shape {
    if kappa == 0.0 {
        return shape.clone();
    }
    let r = 1.0 / kappa;
    let verts = shape
        .vertices()
        .iter()
        .map(|v| {
            let theta = v[0] * kappa;
            [(r - v[1]) * theta.sin(), r - (r - v[1]) * theta.cos(), v[2]]
        })
        .collect();
    shape.with_vertices(verts)
}

/// Twists the shape about the x axis by `rate` radians per unit length.
pub fn twist(shape: &Shape, rate: f64) -> Shape {
    let verts = shape
        .vertices()
        .iter()
        .map(|v| {
            let a = v[0] * rate;
            let (s, c) = a.sin_cos();
            [v[0], c * v[1] - s * v[2], s * v[1] + c * v[2]]
        })
        .collect();
    shape.with_vertices(verts)
}

/// Seeded random permutation of `0..n`.
pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}

/// Keeps the part of a mesh whose projection on `direction` lies within the
/// lowest `fraction` of vertices. Returns the partial mesh and, for each
/// partial vertex, its index in the full mesh.
pub fn crop(shape: &Shape, direction: Point, fraction: f64) -> (Shape, Vec<usize>) {
    let faces = shape.faces().expect("crop needs a mesh");
    let proj: Vec<f64> = shape
        .vertices()
        .iter()
        .map(|v| v[0] * direction[0] + v[1] * direction[1] + v[2] * direction[2])
        .collect();
    let mut sorted = proj.clone();
    sorted.sort_by(f64::total_cmp);
    let cut_idx = ((fraction * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    let cut = sorted[cut_idx];
    let inside: Vec<bool> = proj.iter().map(|&p| p <= cut).collect();
    let kept_faces: Vec<Face> = faces
        .iter()
        .filter(|f| f.iter().all(|&i| inside[i]))
        .copied()
        .collect();
    let mut used = vec![false; shape.n_vertices()];
    for f in &kept_faces {
        for &i in f {
            used[i] = true;
        }
    }
    let to_full: Vec<usize> = (0..shape.n_vertices()).filter(|&i| used[i]).collect();
    let mut to_partial = vec![usize::MAX; shape.n_vertices()];
    for (p, &f) in to_full.iter().enumerate() {
        to_partial[f] = p;
    }
    let verts = to_full.iter().map(|&i| shape.vertices()[i]).collect();
    let new_faces = kept_faces
        .iter()
        .map(|f| [to_partial[f[0]], to_partial[f[1]], to_partial[f[2]]])
        .collect();
    let partial = Shape::mesh(format!("{}_partial", shape.name), verts, new_faces)
        .expect("crop keeps valid faces");
    (partial, to_full)
}

/// Adds uniform noise of amplitude `amp` to every coordinate.
pub fn jitter(shape: &Shape, amp: f64, seed: u64) -> Shape {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verts = shape
        .vertices()
        .iter()
        .map(|v| {
            [
                v[0] + amp * (rng.gen::<f64>() - 0.5),
                v[1] + amp * (rng.gen::<f64>() - 0.5),
                v[2] + amp * (rng.gen::<f64>() - 0.5),
            ]
        })
        .collect();
    shape.with_vertices(verts)
}
