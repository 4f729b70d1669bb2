#![allow(dead_code)]

use coupled_embed::coupling::ShapeData;
use coupled_embed::io::CorrespondenceMap;
use coupled_embed::laplacian::PointCloudOptions;
use coupled_embed::spectral::{decompose, Decomposition, Descriptor, DescriptorKind};
use coupled_embed::Shape;
use coupled_embed::laplacian::{assemble, LaplacianKind};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
}

pub fn decomposition(shape: &Shape, k: usize) -> Decomposition {
    decompose(shape, k, PointCloudOptions::default()).unwrap()
}

pub fn shape_data(dec: &Decomposition, descriptor: DMatrix<f64>) -> ShapeData {
    ShapeData {
        stiffness: dec.stiffness.clone(),
        mass: dec.mass.clone(),
        basis: dec.basis.clone(),
        descriptor: Descriptor::new(descriptor, DescriptorKind::External),
    }
}

/// Ground truth for `target = source.permuted(perm)`.
pub fn permutation_gt(perm: &[usize]) -> CorrespondenceMap {
    let mut inverse = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    CorrespondenceMap::from_targets(&inverse)
}

/// Central differences of `f` at `x`, entry by entry.
pub fn finite_difference(x: &DMatrix<f64>, h: f64, f: impl Fn(&DMatrix<f64>) -> f64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(x.nrows(), x.ncols());
    let mut y = x.clone();
    for i in 0..x.len() {
        let orig = y[i];
        y[i] = orig + h;
        let fp = f(&y);
        y[i] = orig - h;
        let fm = f(&y);
        y[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

pub fn relative_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Writes `<root>/shapes/*.off` for a small blob and its three poses, plus
/// identity template files so every pair has ground truth.
pub fn write_dataset(root: &std::path::Path) -> Vec<String> {
    use coupled_embed::io::{save_shape, ShapeFormat};
    use coupled_embed::synth::{elongated_blob, standard_poses};
    std::fs::create_dir_all(root.join("shapes")).unwrap();
    std::fs::create_dir_all(root.join("corres")).unwrap();
    let base = elongated_blob(12, 15);
    let mut shapes = vec![base.clone()];
    shapes.extend(standard_poses(&base, 1.0));
    let vts: String = (0..base.n_vertices()).map(|i| format!("{i}\n")).collect();
    for s in &shapes {
        save_shape(s, root.join("shapes").join(format!("{}.off", s.name)), ShapeFormat::Off).unwrap();
        std::fs::write(root.join("corres").join(format!("{}.vts", s.name)), &vts).unwrap();
    }
    shapes.iter().map(|s| s.name.clone()).collect()
}

/// A fast configuration over `write_dataset(root)`.
pub fn small_config(root: &std::path::Path) -> coupled_embed::pipeline::PipelineConfig {
    let mut cfg = coupled_embed::pipeline::PipelineConfig::default();
    for (k, v) in [
        ("dataset_root", root.to_str().unwrap().to_string()),
        ("cache_dir", root.join("cache").to_str().unwrap().to_string()),
        ("output_dir", root.join("out").to_str().unwrap().to_string()),
        ("k", "8".into()),
        ("hks_dim", "32".into()),
        ("max_iters", "150".into()),
        ("pairs", "blob:blob_bend,blob:blob_twist".into()),
    ] {
        cfg.set(k, &v).unwrap();
    }
    cfg.validate().unwrap();
    cfg
}

/// Every file under `dir`, keyed by relative path.
pub fn snapshot(dir: &std::path::Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// `match_eval.csv` with the wall-clock column blanked.
pub fn mask_wall_ms(csv: &[u8]) -> String {
    String::from_utf8_lossy(csv)
        .lines()
        .map(|l| match l.rfind(',') {
            Some(i) => format!("{},*", &l[..i]),
            None => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Smallest `k` eigenvalues of `L x = lambda M x` from the dense matrix
/// `M^{-1/2} L M^{-1/2}`.
pub fn dense_spectrum(shape: &Shape, k: usize) -> Vec<f64> {
    let (l, m) = assemble(shape, LaplacianKind::for_shape(shape, PointCloudOptions::default())).unwrap();
    let inv_sqrt: Vec<f64> = m.areas().iter().map(|a| 1.0 / a.sqrt()).collect();
    let mut c = l.to_dense();
    for i in 0..c.nrows() {
        for j in 0..c.ncols() {
            c[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(k);
    ev
}
