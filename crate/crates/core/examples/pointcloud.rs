//! The same pipeline on point clouds: a k-NN graph Laplacian replaces the
//! cotangent one, and coupled embeddings are matched by nearest neighbors.

use coupled_embed::coupling::{optimize_coupled, CouplingProblem, OptimizerConfig, ShapeData};
use coupled_embed::io::CorrespondenceMap;
use coupled_embed::laplacian::PointCloudOptions;
use coupled_embed::matching::{mean_geodesic_error, nn_match, GeodesicField};
use coupled_embed::spectral::{
    decompose, gt_indicator_descriptor, spectral_embedding_nn_baseline, Decomposition, Descriptor, Landmarks,
};
use coupled_embed::synth::{bend, elongated_blob, jitter, random_permutation};
use coupled_embed::Shape;

fn cloud_of(mesh: &Shape) -> coupled_embed::Result<Shape> {
    Shape::point_cloud(mesh.name.clone(), mesh.vertices().to_vec())
}

fn shape_data(dec: &Decomposition, descriptor: Descriptor) -> ShapeData {
    ShapeData {
        stiffness: dec.stiffness.clone(),
        mass: dec.mass.clone(),
        basis: dec.basis.clone(),
        descriptor,
    }
}

fn main() -> coupled_embed::Result<()> {
    let k = 10;
    let base = elongated_blob(24, 27);
    let source = cloud_of(&jitter(&base, 0.005, 1))?;
    let perm = random_permutation(base.n_vertices(), 2);
    let target = cloud_of(&bend(&base, 0.3).permuted(&perm))?;
    let mut inverse = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let gt = CorrespondenceMap::from_targets(&inverse);

    let opts = PointCloudOptions::default();
    let dec_s = decompose(&source, k, opts)?;
    let dec_t = decompose(&target, k, opts)?;
    println!("source lambda {:?}", &dec_s.basis.lambda[..5]);
    println!("target lambda {:?}", &dec_t.basis.lambda[..5]);

    let (ds, dt) = gt_indicator_descriptor(&gt, Landmarks::Fps(60), &source, target.n_vertices())?;
    let problem = CouplingProblem::new(shape_data(&dec_s, ds), shape_data(&dec_t, dt))?;
    let result = optimize_coupled(&problem, &OptimizerConfig::default())?;

    let geo = GeodesicField::new(&target)?;
    let coupled = nn_match(&result.source.psi, &result.target.psi)?;
    let raw = spectral_embedding_nn_baseline(&dec_s.basis, &dec_t.basis)?;
    println!("coupled error x100 = {:.3}", mean_geodesic_error(&coupled, &gt, &geo)?);
    println!("raw     error x100 = {:.3}", mean_geodesic_error(&raw, &gt, &geo)?);
    Ok(())
}
