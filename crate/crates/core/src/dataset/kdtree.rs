//! Euclidean kd-tree over concatenated (ε, σ̃) coordinates.
//!
//! The tree is only a candidate pre-filter: exactness in the (p,q)
//! geometry is restored by an exact scan over everything inside a
//! correctness radius, see [`crate::dataset::MaterialDataSet::nearest`].

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    k: usize,
    /// Point coordinates, permuted into tree order (len = n·k).
    coords: Vec<f64>,
    /// Original index of each permuted point.
    original: Vec<usize>,
    nodes: Vec<Node>,
    root: usize,
}

impl KdTree {
    /// `points[i]` is the `k`-dimensional coordinate vector of point `i`.
    pub fn build(points: &[Vec<f64>], k: usize) -> Self {
        let n = points.len();
        let mut original: Vec<usize> = (0..n).collect();
        let mut tree = KdTree { k, coords: Vec::new(), original: Vec::new(), nodes: Vec::new(), root: 0 };
        let root = tree.build_rec(points, &mut original, 0, n, 0);
        tree.root = root;
        // freeze permuted coordinates
        tree.coords = Vec::with_capacity(n * k);
        for &i in &original {
            tree.coords.extend_from_slice(&points[i]);
        }
        tree.original = original;
        tree
    }

    fn build_rec(
        &mut self,
        points: &[Vec<f64>],
        perm: &mut [usize],
        start: usize,
        end: usize,
        depth: usize,
    ) -> usize {
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return self.nodes.len() - 1;
        }
        let axis = depth % self.k;
        let mid = (start + end) / 2;
        perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis])
        });
        let value = points[perm[mid]][axis];
        let left = self.build_rec(points, perm, start, mid, depth + 1);
        let right = self.build_rec(points, perm, mid, end, depth + 1);
        self.nodes.push(Node::Split { axis, value, left, right });
        self.nodes.len() - 1
    }

    fn point(&self, slot: usize) -> &[f64] {
        &self.coords[slot * self.k..(slot + 1) * self.k]
    }

    fn sq_dist(&self, slot: usize, query: &[f64]) -> f64 {
        self.point(slot).iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Euclidean nearest point; returns (original index, squared distance).
    pub fn nearest_euclidean(&self, query: &[f64]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(self.root, query, &mut best);
        (self.original[best.0], best.1)
    }

    fn nearest_rec(&self, node: usize, query: &[f64], best: &mut (usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let d2 = self.sq_dist(slot, query);
                    if d2 < best.1 {
                        *best = (slot, d2);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let delta = query[axis] - value;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.nearest_rec(near, query, best);
                if delta * delta <= best.1 {
                    self.nearest_rec(far, query, best);
                }
            }
        }
    }

    /// Original indices of all points with Euclidean distance ≤ `radius`.
    pub fn within_radius(&self, query: &[f64], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.radius_rec(self.root, query, radius * radius, &mut out);
        out
    }

    fn radius_rec(&self, node: usize, query: &[f64], r2: f64, out: &mut Vec<usize>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    if self.sq_dist(slot, query) <= r2 {
                        out.push(self.original[slot]);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let delta = query[axis] - value;
                // the splitting hyperplane only separates when strictly
                // farther than the radius
                if delta <= 0.0 || delta * delta <= r2 {
                    self.radius_rec(left, query, r2, out);
                }
                if delta >= 0.0 || delta * delta <= r2 {
                    self.radius_rec(right, query, r2, out);
                }
            }
        }
    }
}
