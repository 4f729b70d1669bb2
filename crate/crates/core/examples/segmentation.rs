//! k-means segments computed on one shape's coupled embedding and carried
//! over to its partner by nearest centroid.

use coupled_embed::coupling::{optimize_coupled, CouplingProblem, OptimizerConfig, ShapeData};
use coupled_embed::io::CorrespondenceMap;
use coupled_embed::laplacian::PointCloudOptions;
use coupled_embed::matching::{kmeans_segment, transfer_segments};
use coupled_embed::spectral::{decompose, gt_indicator_descriptor, Decomposition, Descriptor, Landmarks};
use coupled_embed::synth::{elongated_blob, random_permutation, standard_poses};

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
    let clusters = 6;
    let source = elongated_blob(30, 33);
    let pose = &standard_poses(&source, 1.0)[0];
    let perm = random_permutation(pose.n_vertices(), 5);
    let target = pose.permuted(&perm);
    let mut inverse = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let gt = CorrespondenceMap::from_targets(&inverse);

    let cloud = PointCloudOptions::default();
    let dec_s = decompose(&source, k, cloud)?;
    let dec_t = decompose(&target, k, cloud)?;
    let (ds, dt) = gt_indicator_descriptor(&gt, Landmarks::Fps(100), &source, target.n_vertices())?;
    let problem = CouplingProblem::new(shape_data(&dec_s, ds), shape_data(&dec_t, dt))?;
    let result = optimize_coupled(&problem, &OptimizerConfig::default())?;

    let seg_s = kmeans_segment(&result.source.psi, clusters, 0)?;
    let seg_t = transfer_segments(&seg_s, &result.target.psi)?;
    let agree = (0..source.n_vertices())
        .filter(|&v| seg_s.labels[v] == seg_t.labels[inverse[v]])
        .count();
    let mut sizes = vec![0usize; clusters];
    for &l in &seg_s.labels {
        sizes[l] += 1;
    }
    println!("segment sizes {sizes:?}");
    println!(
        "label agreement under ground truth: {:.1}%",
        100.0 * agree as f64 / source.n_vertices() as f64
    );
    Ok(())
}
