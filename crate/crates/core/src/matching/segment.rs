use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::rows_of;
use crate::error::{Error, Result};
use crate::knn::{squared_distance, PointSet};

/// Cluster labels and the `c x k` centroid matrix they refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentLabels {
    pub labels: Vec<usize>,
    pub centroids: DMatrix<f64>,
}

impl SegmentLabels {
    pub fn n_clusters(&self) -> usize {
        self.centroids.nrows()
    }

    /// One label per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.labels.len() * 3);
        for l in &self.labels {
            s.push_str(&l.to_string());
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when no centroid moves farther than this.
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iters: 300,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansReport {
    pub segments: SegmentLabels,
    pub objective: f64,
    /// Objective after each assignment step of the winning restart.
    pub history: Vec<f64>,
}

/// Sum of squared distances from each row to its assigned centroid.
pub fn kmeans_objective(psi: &DMatrix<f64>, seg: &SegmentLabels) -> f64 {
    let pts = rows_of(psi);
    let cents = rows_of(&seg.centroids);
    seg.labels
        .iter()
        .enumerate()
        .map(|(i, &l)| squared_distance(pts.point(i), cents.point(l)))
        .sum()
}

fn nearest_centroid(p: &[f64], cents: &PointSet) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..cents.len() {
        let d = squared_distance(p, cents.point(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(pts: &PointSet, c: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = pts.len();
    let dim = pts.dim();
    let mut cents: Vec<f64> = Vec::with_capacity(c * dim);
    cents.extend_from_slice(pts.point(rng.gen_range(0..n)));
    let mut d2: Vec<f64> = (0..n).map(|i| squared_distance(pts.point(i), &cents[..dim])).collect();
    while cents.len() < c * dim {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let r = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, d) in d2.iter().enumerate() {
                acc += d;
                if acc > r {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        let start = cents.len();
        cents.extend_from_slice(pts.point(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(squared_distance(pts.point(i), &cents[start..]));
        }
    }
    cents
}

fn lloyd(pts: &PointSet, mut cents: Vec<f64>, c: usize, opts: &KMeansOptions) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = pts.len();
    let dim = pts.dim();
    let mut labels = vec![0; n];
    let mut history = Vec::new();
    for _ in 0..opts.max_iters.max(1) {
        let cset = PointSet::new(cents.clone(), dim);
        let mut obj = 0.0;
        for (i, l) in labels.iter_mut().enumerate() {
            let (c_i, d) = nearest_centroid(pts.point(i), &cset);
            *l = c_i;
            obj += d;
        }
        history.push(obj);

        let mut sums = vec![0.0; c * dim];
        let mut counts = vec![0usize; c];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for (s, x) in sums[l * dim..(l + 1) * dim].iter_mut().zip(pts.point(i)) {
                *s += x;
            }
        }
        let mut new = cents.clone();
        for j in 0..c {
            if counts[j] > 0 {
                for t in 0..dim {
                    new[j * dim + t] = sums[j * dim + t] / counts[j] as f64;
                }
            }
        }
        // An empty cluster takes over the point farthest from its centroid.
        for j in 0..c {
            if counts[j] == 0 {
                let cset = PointSet::new(new.clone(), dim);
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = squared_distance(pts.point(a), cset.point(labels[a]));
                        let db = squared_distance(pts.point(b), cset.point(labels[b]));
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("n >= c >= 1");
                let old = labels[far];
                counts[old] -= 1;
                counts[j] = 1;
                labels[far] = j;
                new[j * dim..(j + 1) * dim].copy_from_slice(pts.point(far));
            }
        }
        let shift = (0..c)
            .map(|j| squared_distance(&cents[j * dim..(j + 1) * dim], &new[j * dim..(j + 1) * dim]).sqrt())
            .fold(0.0, f64::max);
        cents = new;
        if shift < opts.tol {
            break;
        }
    }
    // Final assignment against the final centroids.
    let cset = PointSet::new(cents.clone(), dim);
    let mut obj = 0.0;
    for (i, l) in labels.iter_mut().enumerate() {
        let (c_i, d) = nearest_centroid(pts.point(i), &cset);
        *l = c_i;
        obj += d;
    }
    history.push(obj);
    (labels, cents, history)
}

/// k-means with k-means++ seeding; the best of several restarts by
/// objective. Deterministic given `seed`.
pub fn kmeans_segment_with(psi: &DMatrix<f64>, c: usize, seed: u64, opts: &KMeansOptions) -> Result<KMeansReport> {
    let n = psi.nrows();
    if c == 0 || c > n {
        return Err(Error::InvalidArgument(format!("cluster count {c} must be in 1..={n}")));
    }
    if psi.ncols() == 0 {
        return Err(Error::InvalidArgument("embedding has no columns".into()));
    }
    let pts = rows_of(psi);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>, Vec<f64>, Vec<f64>)> = None;
    for _ in 0..opts.restarts.max(1) {
        let init = plus_plus(&pts, c, &mut rng);
        let (labels, cents, history) = lloyd(&pts, init, c, opts);
        let obj = *history.last().expect("at least one assignment");
        if best.as_ref().map_or(true, |b| obj < b.0) {
            best = Some((obj, labels, cents, history));
        }
    }
    let (objective, labels, cents, history) = best.expect("at least one restart");
    Ok(KMeansReport {
        segments: SegmentLabels {
            labels,
            centroids: DMatrix::from_row_slice(c, psi.ncols(), &cents),
        },
        objective,
        history,
    })
}

pub fn kmeans_segment(psi: &DMatrix<f64>, c: usize, seed: u64) -> Result<SegmentLabels> {
    Ok(kmeans_segment_with(psi, c, seed, &KMeansOptions::default())?.segments)
}

/// Labels each row of `psi_target` by its nearest source centroid. Clusters
/// may come out empty on the target.
pub fn transfer_segments(source: &SegmentLabels, psi_target: &DMatrix<f64>) -> Result<SegmentLabels> {
    if source.centroids.ncols() != psi_target.ncols() {
        return Err(Error::DimensionMismatch {
            expected: source.centroids.ncols(),
            found: psi_target.ncols(),
        });
    }
    let pts = rows_of(psi_target);
    let cents = rows_of(&source.centroids);
    Ok(SegmentLabels {
        labels: (0..pts.len()).map(|i| nearest_centroid(pts.point(i), &cents).0).collect(),
        centroids: source.centroids.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_cluster_is_the_mean() {
        let psi = DMatrix::from_fn(7, 2, |i, j| (i * i) as f64 + j as f64);
        let s = kmeans_segment(&psi, 1, 3).unwrap();
        assert!(s.labels.iter().all(|&l| l == 0));
        for j in 0..2 {
            let mean = psi.column(j).mean();
            assert!((s.centroids[(0, j)] - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn too_many_clusters() {
        let psi = DMatrix::zeros(3, 2);
        assert!(kmeans_segment(&psi, 4, 0).is_err());
    }

    #[test]
    fn separated_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = DMatrix::from_fn(40, 3, |i, _| {
            let base = if i < 20 { 0.0 } else { 100.0 };
            base + rng.gen::<f64>()
        });
        let s = kmeans_segment(&psi, 2, 5).unwrap();
        assert!(s.labels[..20].iter().all(|&l| l == s.labels[0]));
        assert!(s.labels[20..].iter().all(|&l| l == s.labels[20]));
        assert_ne!(s.labels[0], s.labels[20]);
    }

    #[test]
    fn matches_exhaustive_two_partition() {
        // Lloyd iterations can stall in a local minimum that all ten seeded
        // restarts share; on these 20 instances that happens once.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut misses = 0;
        for _ in 0..20 {
            let psi = DMatrix::from_fn(8, 2, |_, _| rng.gen::<f64>());
            let report = kmeans_segment_with(&psi, 2, 7, &KMeansOptions::default()).unwrap();
            let mut best = f64::INFINITY;
            for mask in 1u32..(1 << 7) {
                // Vertex 7 always in cluster 0 removes the label symmetry.
                let mut cost = 0.0;
                for side in [false, true] {
                    let in_one = |i: usize| i < 7 && (mask >> i) & 1 == 1;
                    let members: Vec<usize> = (0..8).filter(|&i| in_one(i) == side).collect();
                    let mut mean = [0.0; 2];
                    for &i in &members {
                        mean[0] += psi[(i, 0)] / members.len() as f64;
                        mean[1] += psi[(i, 1)] / members.len() as f64;
                    }
                    for &i in &members {
                        cost += (psi[(i, 0)] - mean[0]).powi(2) + (psi[(i, 1)] - mean[1]).powi(2);
                    }
                }
                best = best.min(cost);
            }
            assert!(report.objective >= best - 1e-9);
            if (report.objective - best).abs() > 1e-9 {
                misses += 1;
            }
        }
        assert!(misses <= 1, "{misses} of 20 instances missed the optimum");
    }

    #[test]
    fn objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = DMatrix::from_fn(300, 4, |_, _| rng.gen::<f64>());
        let r = kmeans_segment_with(&psi, 6, 2, &KMeansOptions::default()).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs(), "{:?}", w);
        }
    }
}
