//! A bucketed k-d tree for fixed-radius queries in moderate dimension.
//!
//! Points are stored contiguously (`dim` coordinates each). Internal nodes
//! split at the median of the widest coordinate. Queries track the squared
//! distance from the query to the current cell incrementally, one
//! coordinate offset at a time, which is a lower bound on the distance to
//! every point in the cell.

const BUCKET: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { dim: usize, value: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    points: Vec<f64>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    /// Builds a tree over `points.len() / dim` points.
    pub fn new(points: Vec<f64>, dim: usize) -> Self {
        assert!(dim > 0 && points.len().is_multiple_of(dim), "point buffer is not a multiple of dim");
        let count = points.len() / dim;
        let mut tree = KdTree { dim, points, order: (0..count).collect(), nodes: Vec::new() };
        if count > 0 {
            tree.build(0, count);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn point(&self, idx: usize) -> &[f64] {
        &self.points[idx * self.dim..(idx + 1) * self.dim]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= BUCKET {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let (split_dim, spread) = (0..self.dim)
            .map(|d| {
                let (lo, hi) = self.order[start..end].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &k| {
                    let v = self.points[k * self.dim + d];
                    (lo.min(v), hi.max(v))
                });
                (d, hi - lo)
            })
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        if spread <= 0.0 {
            // all points coincide
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        {
            let (dim, points) = (self.dim, &self.points);
            self.order[start..end]
                .select_nth_unstable_by(mid - start, |&a, &b| points[a * dim + split_dim].total_cmp(&points[b * dim + split_dim]));
        }
        let value = self.points[self.order[mid] * self.dim + split_dim];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split { dim: split_dim, value, left, right };
        id
    }

    /// Calls `visit(index, squared_distance)` for points within the query
    /// radius.
    ///
    /// Cells whose lower-bound squared distance exceeds `prune_r2` are
    /// skipped; points are reported when their squared distance is at most
    /// `accept_r2`. Equal radii give an exact range search.
    pub fn range(&self, query: &[f64], prune_r2: f64, accept_r2: f64, mut visit: impl FnMut(usize, f64)) {
        assert_eq!(query.len(), self.dim);
        if self.nodes.is_empty() {
            return;
        }
        let mut offsets = vec![0.0; self.dim];
        self.search(0, query, 0.0, &mut offsets, prune_r2, accept_r2, &mut visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        node: usize,
        query: &[f64],
        cell_r2: f64,
        offsets: &mut [f64],
        prune_r2: f64,
        accept_r2: f64,
        visit: &mut impl FnMut(usize, f64),
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &k in &self.order[start..end] {
                    let d2: f64 = self.point(k).iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 <= accept_r2 {
                        visit(k, d2);
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let diff = query[dim] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, cell_r2, offsets, prune_r2, accept_r2, visit);
                let old = offsets[dim];
                let far_r2 = cell_r2 - old * old + diff * diff;
                if far_r2 <= prune_r2 {
                    offsets[dim] = diff;
                    self.search(far, query, far_r2, offsets, prune_r2, accept_r2, visit);
                    offsets[dim] = old;
                }
            }
        }
    }
}
