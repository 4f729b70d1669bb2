//! Near-isometric pairs matched four ways: nearest neighbors on raw
//! eigenfunctions, on heat kernel signatures, and on coupled embeddings
//! driven by HKS or by ground-truth landmarks.
//!
//! Usage: `cargo run --release --example match_pair [k]`

use coupled_embed::coupling::{optimize_coupled, CouplingProblem, OptimizerConfig, ShapeData};
use coupled_embed::io::CorrespondenceMap;
use coupled_embed::laplacian::PointCloudOptions;
use coupled_embed::matching::{mean_geodesic_error, nn_match, GeodesicField};
use coupled_embed::spectral::{
    decompose, gt_indicator_descriptor, hks, spectral_embedding_nn_baseline, Decomposition, Descriptor, HksOptions,
    Landmarks,
};
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
    let k: usize = std::env::args().nth(1).map_or(10, |a| a.parse().expect("k must be an integer"));
    let base = elongated_blob(30, 33);
    let hks_opts = HksOptions::default();
    let cloud = PointCloudOptions::default();
    let cfg = OptimizerConfig::default();
    let dec_s = decompose(&base, k, cloud)?;
    let hks_s = hks(&dec_s.basis, &hks_opts)?;

    for (i, pose) in standard_poses(&base, 1.0).iter().enumerate() {
        // Shuffle the target so vertex order carries no information.
        let perm = random_permutation(pose.n_vertices(), 100 + i as u64);
        let target = pose.permuted(&perm);
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let gt = CorrespondenceMap::from_targets(&inverse);

        let dec_t = decompose(&target, k, cloud)?;
        let hks_t = hks(&dec_t.basis, &hks_opts)?;
        let geo = GeodesicField::new(&target)?;
        let err = |m: &CorrespondenceMap| mean_geodesic_error(m, &gt, &geo);

        let nn_spec = err(&spectral_embedding_nn_baseline(&dec_s.basis, &dec_t.basis)?)?;
        let nn_hks = err(&nn_match(&hks_s.values, &hks_t.values)?)?;

        let p = CouplingProblem::new(shape_data(&dec_s, hks_s.clone()), shape_data(&dec_t, hks_t))?;
        let r = optimize_coupled(&p, &cfg)?;
        let c_hks = err(&nn_match(&r.source.psi, &r.target.psi)?)?;

        let (gs, gtd) = gt_indicator_descriptor(&gt, Landmarks::Fps(100), &base, target.n_vertices())?;
        let p = CouplingProblem::new(shape_data(&dec_s, gs), shape_data(&dec_t, gtd))?;
        let r = optimize_coupled(&p, &cfg)?;
        let c_gt = err(&nn_match(&r.source.psi, &r.target.psi)?)?;

        println!(
            "{:>16}: nn_spectral {nn_spec:7.3}  nn_hks {nn_hks:7.3}  coupled(hks) {c_hks:7.3}  coupled(gt) {c_gt:7.3}",
            pose.name
        );
    }
    Ok(())
}
