//! Exact nearest-neighbor search: brute force and a k-d tree.
//!
//! Both paths compute squared distances with the same summation order, so
//! they agree bit-for-bit. Ties are broken towards the lowest point index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const LEAF_SIZE: usize = 16;

/// Squared Euclidean distance, summed in coordinate order.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist2: f64,
}

impl Neighbor {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

impl Eq for Neighbor {}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

/// Row-major point set of fixed dimension.
#[derive(Debug, Clone)]
pub struct PointSet {
    data: Vec<f64>,
    dim: usize,
}

impl PointSet {
    pub fn new(data: Vec<f64>, dim: usize) -> Self {
        assert!(dim > 0 && data.len() % dim == 0);
        Self { data, dim }
    }

    pub fn from_points(points: &[[f64; 3]]) -> Self {
        Self::new(points.iter().flatten().copied().collect(), 3)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Brute-force nearest point to `q`; `None` on an empty set.
    pub fn nearest_brute(&self, q: &[f64]) -> Option<Neighbor> {
        (0..self.len())
            .map(|i| Neighbor {
                index: i,
                dist2: squared_distance(q, self.point(i)),
            })
            .min()
    }

    pub fn knn_brute(&self, q: &[f64], k: usize) -> Vec<Neighbor> {
        let mut all: Vec<Neighbor> = (0..self.len())
            .map(|i| Neighbor {
                index: i,
                dist2: squared_distance(q, self.point(i)),
            })
            .collect();
        all.sort();
        all.truncate(k);
        all
    }
}

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

pub struct KdTree<'a> {
    points: &'a PointSet,
    order: Vec<usize>,
    root: Node,
}

impl<'a> KdTree<'a> {
    pub fn build(points: &'a PointSet) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let n = order.len();
        let root = build_node(points, &mut order, 0, n);
        Self {
            points,
            order,
            root,
        }
    }

    pub fn nearest(&self, q: &[f64]) -> Option<Neighbor> {
        self.knn(q, 1).into_iter().next()
    }

    /// The `k` nearest points sorted by `(distance, index)`.
    pub fn knn(&self, q: &[f64], k: usize) -> Vec<Neighbor> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(&self.root, q, k, &mut heap);
        heap.into_sorted_vec()
    }

    /// Number of points within squared radius `r2` (inclusive).
    pub fn count_within(&self, q: &[f64], r2: f64) -> usize {
        let mut count = 0;
        self.count(&self.root, q, r2, &mut count);
        count
    }

    fn search(&self, node: &Node, q: &[f64], k: usize, heap: &mut BinaryHeap<Neighbor>) {
        match node {
            Node::Leaf { start, end } => {
                for &i in &self.order[*start..*end] {
                    let cand = Neighbor {
                        index: i,
                        dist2: squared_distance(q, self.points.point(i)),
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[*axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, k, heap);
                // `<=` keeps equal-distance candidates with lower indices reachable.
                if heap.len() < k || diff * diff <= heap.peek().unwrap().dist2 {
                    self.search(far, q, k, heap);
                }
            }
        }
    }

    fn count(&self, node: &Node, q: &[f64], r2: f64, count: &mut usize) {
        match node {
            Node::Leaf { start, end } => {
                *count += self.order[*start..*end]
                    .iter()
                    .filter(|&&i| squared_distance(q, self.points.point(i)) <= r2)
                    .count();
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[*axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.count(near, q, r2, count);
                if diff * diff <= r2 {
                    self.count(far, q, r2, count);
                }
            }
        }
    }
}

fn build_node(points: &PointSet, order: &mut [usize], start: usize, end: usize) -> Node {
    if end - start <= LEAF_SIZE {
        return Node::Leaf { start, end };
    }
    let slice = &mut order[start..end];
    let dim = points.dim();
    let axis = (0..dim)
        .map(|a| {
            let (lo, hi) = slice.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let x = points.point(i)[a];
                (lo.min(x), hi.max(x))
            });
            (a, hi - lo)
        })
        .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)))
        .map(|(a, _)| a)
        .unwrap_or(0);
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        points.point(a)[axis]
            .total_cmp(&points.point(b)[axis])
            .then(a.cmp(&b))
    });
    let value = points.point(slice[mid])[axis];
    // Points equal to the split value may sit on either side; the search
    // descends both sides whenever |diff| <= current radius, so this is exact.
    Node::Split {
        axis,
        value,
        left: Box::new(build_node(points, order, start, start + mid)),
        right: Box::new(build_node(points, order, start + mid, end)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn tree_matches_brute_force(
            dim in 1usize..6,
            raw in proptest::collection::vec(-3i32..3, 6..600),
            q in proptest::collection::vec(-4i32..4, 6),
            k in 1usize..8,
        ) {
            // Integer grids force many exact ties.
            let n = raw.len() / dim;
            let data: Vec<f64> = raw[..n * dim].iter().map(|&x| x as f64 * 0.5).collect();
            let pts = PointSet::new(data, dim);
            let tree = KdTree::build(&pts);
            let q: Vec<f64> = q[..dim].iter().map(|&x| x as f64 * 0.5).collect();
            prop_assert_eq!(tree.nearest(&q), pts.nearest_brute(&q));
            prop_assert_eq!(tree.knn(&q, k), pts.knn_brute(&q, k));
            let r2 = 1.25;
            let brute = (0..n).filter(|&i| squared_distance(&q, pts.point(i)) <= r2).count();
            prop_assert_eq!(tree.count_within(&q, r2), brute);
        }
    }
}
