//! Matching a cropped, bent copy of a shape back onto the full shape.
//! The partial side only asks for a diagonal `Psi^T L Psi`, without the
//! eigenvalue anchor or orthogonality.

use coupled_embed::coupling::{optimize_coupled, CouplingProblem, Mode, OptimizerConfig, ShapeData};
use coupled_embed::io::CorrespondenceMap;
use coupled_embed::laplacian::PointCloudOptions;
use coupled_embed::matching::{mean_geodesic_error, nn_match, GeodesicField};
use coupled_embed::spectral::{decompose, fix_signs, gt_indicator_descriptor, Landmarks};
use coupled_embed::synth::{bend, crop, elongated_blob};

fn main() -> coupled_embed::Result<()> {
    let k: usize = std::env::args().nth(1).map_or(10, |a| a.parse().unwrap());
    let full = elongated_blob(30, 33);
    let (partial, to_full) = crop(&bend(&full, 0.3), [1.0, 0.2, 0.0], 0.8);
    println!("full {} vertices, partial {}", full.n_vertices(), partial.n_vertices());

    let cloud = PointCloudOptions::default();
    let dec_f = decompose(&full, k, cloud)?;
    let dec_p = decompose(&partial, k, cloud)?;

    // Ground truth from the partial side, where every vertex has a match.
    let gt = CorrespondenceMap::from_targets(&to_full);
    let (d_p, d_f) = gt_indicator_descriptor(&gt, Landmarks::All, &partial, full.n_vertices())?;

    let mut problem = CouplingProblem::new(
        ShapeData { stiffness: dec_f.stiffness.clone(), mass: dec_f.mass.clone(), basis: dec_f.basis.clone(), descriptor: d_f },
        ShapeData { stiffness: dec_p.stiffness.clone(), mass: dec_p.mass.clone(), basis: dec_p.basis.clone(), descriptor: d_p },
    )?;
    problem.mode = Mode::FullPartial;
    let result = optimize_coupled(&problem, &OptimizerConfig::default())?;
    println!("final terms {:?}", result.final_terms);

    let geo = GeodesicField::new(&full)?;
    let coupled = nn_match(&result.target.psi, &result.source.psi)?;
    let raw = nn_match(&fix_signs(&dec_p.basis).phi, &fix_signs(&dec_f.basis).phi)?;
    println!("coupled error x100 = {:.3}", mean_geodesic_error(&coupled, &gt, &geo)?);
    println!("raw     error x100 = {:.3}", mean_geodesic_error(&raw, &gt, &geo)?);
    Ok(())
}
