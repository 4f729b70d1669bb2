//! Smallest eigenpairs of the generalized problem `L phi = lambda M phi`.
//!
//! With `M` diagonal the problem is symmetric after scaling by `M^{-1/2}`:
//! `C = M^{-1/2} L M^{-1/2}`. Small problems are solved densely. Larger ones
//! run a restarted block Krylov iteration on the shift-inverted operator
//! `(C - sigma I)^{-1} = M^{1/2} (L - sigma M)^{-1} M^{1/2}`, factoring
//! `L - sigma M` once with an envelope Cholesky under a reverse
//! Cuthill–McKee ordering. Ritz values are always taken from `C` itself.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fix_signs, SpectralBasis};
use crate::error::{Error, Result};
use crate::laplacian::{MassDiagonal, SparseSymmetric};

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Residual tolerance relative to the operator scale.
    pub tol: f64,
    pub max_restarts: usize,
    /// Krylov blocks per restart.
    pub depth: usize,
    pub seed: u64,
    /// Use the iterative path whenever the Krylov basis fits in `n / 2`;
    /// setting this forces the dense path.
    pub force_dense: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_restarts: 200,
            depth: 4,
            seed: 0x5eed,
            force_dense: false,
        }
    }
}

pub fn eig_smallest(l: &SparseSymmetric, m: &MassDiagonal, k: usize) -> Result<SpectralBasis> {
    eig_smallest_with(l, m, k, &EigenOptions::default())
}

pub fn eig_smallest_with(
    l: &SparseSymmetric,
    m: &MassDiagonal,
    k: usize,
    opts: &EigenOptions,
) -> Result<SpectralBasis> {
    let n = l.n();
    if m.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.len() });
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("need 0 < k < n (k = {k}, n = {n})")));
    }
    let inv_sqrt: Vec<f64> = m.areas().iter().map(|a| 1.0 / a.sqrt()).collect();
    let block = k + (k / 4).max(6);
    let (theta, y) = if opts.force_dense || block * opts.depth.max(2) * 2 > n {
        dense_smallest(l, &inv_sqrt, k)
    } else {
        krylov_smallest(l, m, &inv_sqrt, k, block, opts)?
    };

    let mut phi = y;
    for mut col in phi.column_iter_mut() {
        for (v, s) in col.iter_mut().zip(&inv_sqrt) {
            *v *= s;
        }
    }
    // Round-off can leave the kernel eigenvalue a hair below zero.
    let scale = operator_scale(l, &inv_sqrt);
    let lambda = theta
        .into_iter()
        .map(|t| if t < 0.0 && t > -1e-9 * scale { 0.0 } else { t })
        .collect();
    Ok(fix_signs(&SpectralBasis { phi, lambda }))
}

/// `max_i L_ii / M_ii`, an estimate of the spectral radius of `C`.
fn operator_scale(l: &SparseSymmetric, inv_sqrt: &[f64]) -> f64 {
    l.diagonal()
        .iter()
        .zip(inv_sqrt)
        .map(|(d, s)| d * s * s)
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE)
}

fn apply_c(l: &SparseSymmetric, inv_sqrt: &[f64], x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut scaled = x.clone();
    scale_rows(&mut scaled, inv_sqrt);
    let mut out = l.mul_dense(&scaled);
    scale_rows(&mut out, inv_sqrt);
    out
}

fn scale_rows(x: &mut DMatrix<f64>, s: &[f64]) {
    for mut col in x.column_iter_mut() {
        for (v, f) in col.iter_mut().zip(s) {
            *v *= f;
        }
    }
}

fn sorted_eigen(h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(eig.eigenvectors.nrows(), idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

fn dense_smallest(l: &SparseSymmetric, inv_sqrt: &[f64], k: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = l.n();
    let c = DMatrix::from_fn(n, n, |i, j| l.get(i, j) * inv_sqrt[i] * inv_sqrt[j]);
    let (vals, vecs) = sorted_eigen(c);
    (vals[..k].to_vec(), vecs.columns(0, k).into_owned())
}

fn krylov_smallest(
    l: &SparseSymmetric,
    m: &MassDiagonal,
    inv_sqrt: &[f64],
    k: usize,
    block: usize,
    opts: &EigenOptions,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = l.n();
    let scale = operator_scale(l, inv_sqrt);
    let sigma = -1e-6 * scale;
    let shifted: Vec<(usize, usize, f64)> = l
        .triplets()
        .into_iter()
        .map(|(i, j, v)| if i == j { (i, j, v - sigma * m.areas()[i]) } else { (i, j, v) })
        .collect();
    let factor = EnvelopeCholesky::factor(&SparseSymmetric::from_triplets(n, shifted))?;
    let sqrt_m: Vec<f64> = m.areas().iter().map(|a| a.sqrt()).collect();
    let apply_inverse = |x: &DMatrix<f64>| -> DMatrix<f64> {
        let mut out = x.clone();
        scale_rows(&mut out, &sqrt_m);
        for mut col in out.column_iter_mut() {
            let mut v: Vec<f64> = col.iter().copied().collect();
            factor.solve_in_place(&mut v);
            col.copy_from_slice(&v);
        }
        scale_rows(&mut out, &sqrt_m);
        out
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = DMatrix::from_fn(n, block, |_, _| rng.gen::<f64>() - 0.5);
    let mut worst = f64::INFINITY;
    for _ in 0..opts.max_restarts {
        let mut basis = DMatrix::<f64>::zeros(n, 0);
        let mut current = x.clone();
        for depth in 0..opts.depth {
            if depth > 0 {
                current = apply_inverse(&current);
            }
            let added = orthonormalize_against(&basis, current, &mut rng);
            current = added.clone();
            let old = basis.ncols();
            basis = basis.resize_horizontally(old + added.ncols(), 0.0);
            basis.columns_mut(old, added.ncols()).copy_from(&added);
        }
        let cq = apply_c(l, inv_sqrt, &basis);
        let h = basis.transpose() * &cq;
        let h = (&h + h.transpose()) * 0.5;
        let (theta, u) = sorted_eigen(h);
        let u_block = u.columns(0, block);
        let ritz = &basis * u_block;
        let c_ritz = &cq * u_block;

        worst = (0..k)
            .map(|i| (c_ritz.column(i) - ritz.column(i) * theta[i]).norm())
            .fold(0.0, f64::max);
        if worst <= opts.tol * scale {
            return Ok((theta[..k].to_vec(), ritz.columns(0, k).into_owned()));
        }
        x = ritz;
    }
    Err(Error::Solver {
        iterations: opts.max_restarts,
        residual: worst / scale,
    })
}

/// Orthonormalizes the columns of `new` against `basis` and each other
/// (classical Gram–Schmidt, applied twice). Columns that vanish are replaced
/// by random directions.
fn orthonormalize_against(
    basis: &DMatrix<f64>,
    mut new: DMatrix<f64>,
    rng: &mut ChaCha8Rng,
) -> DMatrix<f64> {
    let n = new.nrows();
    for c in 0..new.ncols() {
        let mut attempts = 0;
        loop {
            let original = new.column(c).norm();
            let mut v: DVector<f64> = new.column(c).into_owned();
            for _ in 0..2 {
                if basis.ncols() > 0 {
                    let coeffs = basis.tr_mul(&v);
                    v -= basis * coeffs;
                }
                for p in 0..c {
                    let q = new.column(p);
                    let d = q.dot(&v);
                    v.axpy(-d, &q, 1.0);
                }
            }
            let norm = v.norm();
            if norm > 1e-10 * original && norm > 0.0 {
                new.set_column(c, &(v / norm));
                break;
            }
            attempts += 1;
            assert!(attempts < 10, "cannot extend an orthonormal basis of size {n}");
            let fresh = DVector::from_fn(n, |_, _| rng.gen::<f64>() - 0.5);
            new.set_column(c, &fresh);
        }
    }
    new
}

/// Envelope (skyline) Cholesky factorization of a sparse SPD matrix under a
/// reverse Cuthill–McKee ordering.
pub struct EnvelopeCholesky {
    /// `perm[new] = old`.
    perm: Vec<usize>,
    first: Vec<usize>,
    row_start: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &SparseSymmetric) -> Result<Self> {
        let n = a.n();
        let perm = reverse_cuthill_mckee(a);
        let mut inverse = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in a.row(old) {
                let jn = inverse[j];
                if jn < first[new] {
                    first[new] = jn;
                }
            }
        }
        let mut row_start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for i in 0..n {
            row_start.push(total);
            total += i - first[i] + 1;
        }
        row_start.push(total);
        let mut values = vec![0.0; total];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in a.row(old) {
                let jn = inverse[j];
                if jn <= new {
                    values[row_start[new] + jn - first[new]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let ri = row_start[i];
            for j in fi..=i {
                let fj = first[j];
                let rj = row_start[j];
                let start = fi.max(fj);
                let mut s = values[ri + j - fi];
                for t in start..j {
                    s -= values[ri + t - fi] * values[rj + t - fj];
                }
                if j < i {
                    s /= values[rj + j - fj];
                    values[ri + j - fi] = s;
                } else {
                    if !(s > 0.0) {
                        return Err(Error::Spectrum(format!(
                            "shifted operator not positive definite at row {i}"
                        )));
                    }
                    values[ri + i - fi] = s.sqrt();
                }
            }
        }
        Ok(Self {
            perm,
            first,
            row_start,
            values,
        })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.perm.len();
        let mut z: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let ri = self.row_start[i];
            let mut s = z[i];
            for j in fi..i {
                s -= self.values[ri + j - fi] * z[j];
            }
            z[i] = s / self.values[ri + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let ri = self.row_start[i];
            z[i] /= self.values[ri + i - fi];
            let xi = z[i];
            for j in fi..i {
                z[j] -= self.values[ri + j - fi] * xi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = z[new];
        }
    }

    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }
}

/// Reverse Cuthill–McKee ordering, `result[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseSymmetric) -> Vec<usize> {
    let n = a.n();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize| -> Vec<usize> {
        let mut level = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::from([start]);
        level[start] = 0;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if level[w] == usize::MAX {
                    level[w] = level[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        level
    };

    while order.len() < n {
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i))
            .unwrap();
        // Walk towards a pseudo-peripheral node.
        let mut start = seed;
        let mut ecc = 0;
        for _ in 0..5 {
            let level = bfs_levels(start);
            let far = level.iter().filter(|&&l| l != usize::MAX).copied().max().unwrap_or(0);
            if far <= ecc && start != seed {
                break;
            }
            ecc = far;
            let cand = (0..n)
                .filter(|&i| level[i] == far)
                .min_by_key(|&i| (degree[i], i))
                .unwrap();
            if cand == start {
                break;
            }
            start = cand;
        }

        let begin = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = begin;
        while head < order.len() {
            let u = order[head];
            head += 1;
            let mut next: Vec<usize> = adj[u].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacian::{cotan_stiffness, lumped_mass};
    use crate::synth;

    #[test]
    fn envelope_cholesky_solves() {
        let s = synth::icosphere(2);
        let l = cotan_stiffness(&s).unwrap();
        let m = lumped_mass(&s).unwrap();
        let shifted: Vec<_> = l
            .triplets()
            .into_iter()
            .map(|(i, j, v)| if i == j { (i, j, v + 0.1 * m.areas()[i]) } else { (i, j, v) })
            .collect();
        let a = SparseSymmetric::from_triplets(l.n(), shifted);
        let f = EnvelopeCholesky::factor(&a).unwrap();
        let x_true: Vec<f64> = (0..a.n()).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = a.mul_vec(&x_true);
        f.solve_in_place(&mut b);
        let err = b.iter().zip(&x_true).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        assert!(f.envelope_size() < a.n() * a.n() / 4);
    }

    #[test]
    fn rcm_is_permutation() {
        let l = cotan_stiffness(&synth::uv_sphere(6, 9)).unwrap();
        let mut p = reverse_cuthill_mckee(&l);
        p.sort_unstable();
        assert_eq!(p, (0..l.n()).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_bad_k() {
        let s = synth::icosphere(1);
        let (l, m) = (cotan_stiffness(&s).unwrap(), lumped_mass(&s).unwrap());
        assert!(eig_smallest(&l, &m, 0).is_err());
        assert!(eig_smallest(&l, &m, s.n_vertices()).is_err());
    }
}
