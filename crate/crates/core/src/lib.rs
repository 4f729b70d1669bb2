//! Coupled spectral embeddings for non-rigid shape correspondence.
//!
//! Shapes are loaded from OFF, PLY or XYZ files, turned into a stiffness/mass
//! pair, decomposed into a Laplace–Beltrami eigenbasis and described with heat
//! kernel signatures. A pair of shapes is then given coupled embeddings by
//! minimizing diagonalization, orthogonality and descriptor-coupling losses,
//! and matched by nearest neighbors in the shared embedding space.

pub mod coupling;
pub mod error;
pub mod io;
pub mod knn;
pub mod laplacian;
pub mod matching;
pub mod pipeline;
pub mod shape;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
pub use shape::Shape;
