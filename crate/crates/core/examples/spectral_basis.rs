//! Laplace-Beltrami spectrum of a unit icosphere next to the continuum
//! values `l(l+1)`, plus a few heat kernel signature rows.

use coupled_embed::laplacian::PointCloudOptions;
use coupled_embed::spectral::{decompose, hks, HksOptions};
use coupled_embed::synth::icosphere;

fn main() -> coupled_embed::Result<()> {
    let sphere = icosphere(4);
    let k = 25;
    let t0 = std::time::Instant::now();
    let dec = decompose(&sphere, k, PointCloudOptions::default())?;
    println!("{} vertices, {k} eigenpairs in {:.2?}", sphere.n_vertices(), t0.elapsed());

    let mut l = 0usize;
    let mut seen = 0;
    for (i, lam) in dec.basis.lambda.iter().enumerate() {
        if seen == 2 * l + 1 {
            l += 1;
            seen = 0;
        }
        seen += 1;
        let exact = (l * (l + 1)) as f64;
        println!("{i:3}  lambda {lam:9.4}  l(l+1) {exact:5.1}");
    }

    let sig = hks(&dec.basis, &HksOptions::default())?;
    println!("hks: {} x {}", sig.n(), sig.dim());
    for v in [0, 1, 2] {
        let row = sig.values.row(v);
        println!("vertex {v}: first {:.4}  last {:.4}", row[0], row[sig.dim() - 1]);
    }
    Ok(())
}
