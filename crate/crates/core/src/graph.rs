//! Pairwise-difference map `B(X) = XJ` over a weighted edge list, and the
//! Gaussian-kernel k-nearest-neighbor graph used for clustering.

use std::cmp::Ordering;

use ndarray::{Array2, ArrayView2};
use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};
use crate::model::{Edge, ProblemInstance};
use crate::par::{self, Execution};

/// Default neighbor count for the weight graph.
pub const DEFAULT_K: usize = 10;

/// Node-arc incidence structure: column `l` of `J` has `+1` at row `i` and
/// `−1` at row `j` for the `l`-th edge `(i, j)` in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMap {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl IncidenceMap {
    pub fn new(n_nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for w in edges.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidEdges(format!(
                    "edges must be strictly lexicographically increasing: {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&(i, j)) = edges.iter().find(|&&(i, j)| i >= j || j >= n_nodes) {
            return Err(Error::InvalidEdges(format!(
                "edge ({i}, {j}) invalid for {n_nodes} nodes"
            )));
        }
        Ok(IncidenceMap { n_nodes, edges })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Index `l(i, j)` of an edge, if present.
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.binary_search(&(i, j)).ok()
    }

    /// `B(X)`: column `l(i, j)` is `X[:, i] − X[:, j]`.
    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let d = x.nrows();
        let mut out = Array2::zeros((d, self.edges.len()));
        for k in 0..d {
            let xr = x.row(k);
            let mut or = out.row_mut(k);
            for (l, &(i, j)) in self.edges.iter().enumerate() {
                or[l] = xr[i] - xr[j];
            }
        }
        out
    }

    /// `B*(Z) = ZJᵀ`.
    pub fn adjoint(&self, z: ArrayView2<'_, f64>) -> Array2<f64> {
        let d = z.nrows();
        let mut out = Array2::zeros((d, self.n_nodes));
        for k in 0..d {
            let zr = z.row(k);
            let mut or = out.row_mut(k);
            for (l, &(i, j)) in self.edges.iter().enumerate() {
                or[i] += zr[l];
                or[j] -= zr[l];
            }
        }
        out
    }

    /// The `N × m` incidence matrix `J` in CSC form.
    pub fn matrix(&self) -> CsMat<f64> {
        let mut tri = TriMat::new((self.n_nodes, self.edges.len()));
        for (l, &(i, j)) in self.edges.iter().enumerate() {
            tri.add_triplet(i, l, 1.0);
            tri.add_triplet(j, l, -1.0);
        }
        tri.to_csc()
    }
}

fn sq_dist(a: ArrayView2<'_, f64>, p: usize, q: usize) -> f64 {
    a.column(p)
        .iter()
        .zip(a.column(q))
        .map(|(x, y)| (x - y).powi(2))
        .sum()
}

/// Exact k-NN graph with weights `exp(−½‖A_i − A_j‖²)`.
///
/// An undirected edge is kept when either endpoint lists the other among its
/// `k` nearest neighbors. Distance ties go to the smaller index.
pub fn build_knn_graph(a: ArrayView2<'_, f64>, k: usize) -> Result<ProblemInstance> {
    build_knn_graph_with(a, k, Execution::default())
}

pub fn build_knn_graph_with(
    a: ArrayView2<'_, f64>,
    k: usize,
    exec: Execution,
) -> Result<ProblemInstance> {
    let n = a.ncols();
    if n < 2 {
        return Err(Error::EmptyGraph(n));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "neighbor count k = {k} must satisfy 1 <= k < N = {n}"
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "data matrix contains non-finite values".into(),
        ));
    }
    let cols = a.as_standard_layout();
    let cols = cols.view();
    let neighbors: Vec<Vec<(usize, f64)>> = par::map_indices(exec, n, |q| {
        let mut cand: Vec<(f64, usize)> = (0..n)
            .filter(|&p| p != q)
            .map(|p| (sq_dist(cols, p, q), p))
            .collect();
        let by_dist = |x: &(f64, usize), y: &(f64, usize)| {
            x.0.partial_cmp(&y.0)
                .unwrap_or(Ordering::Equal)
                .then(x.1.cmp(&y.1))
        };
        if k < cand.len() {
            cand.select_nth_unstable_by(k - 1, by_dist);
            cand.truncate(k);
        }
        cand.into_iter().map(|(d2, p)| (p, d2)).collect()
    });

    let mut pairs: Vec<(usize, usize, f64)> = neighbors
        .iter()
        .enumerate()
        .flat_map(|(q, nb)| {
            nb.iter()
                .map(move |&(p, d2)| (q.min(p), q.max(p), d2))
        })
        .collect();
    pairs.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    pairs.dedup_by(|x, y| (x.0, x.1) == (y.0, y.1));

    let edges = pairs
        .into_iter()
        .map(|(i, j, d2)| Edge::new(i, j, (-0.5 * d2).exp()))
        .collect();
    ProblemInstance::new(a.to_owned(), edges, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn apply_and_adjoint_on_triangle() {
        let inc = IncidenceMap::new(3, vec![(0, 1), (0, 2), (1, 2)]).unwrap();
        let x = array![[0.0, 1.0, 5.0], [1.0, 1.0, 1.0]];
        let bx = inc.apply(x.view());
        assert_eq!(bx, array![[-1.0, -5.0, -4.0], [0.0, 0.0, 0.0]]);
        let z = array![[1.0, 2.0, 3.0]];
        assert_eq!(inc.adjoint(z.view()), array![[3.0, 2.0, -5.0]]);
        let j = inc.matrix().to_dense();
        for l in 0..3 {
            assert_eq!(j.column(l).sum(), 0.0);
            assert_eq!(j.column(l).iter().filter(|v| **v == 1.0).count(), 1);
            assert_eq!(j.column(l).iter().filter(|v| **v == -1.0).count(), 1);
        }
        assert_eq!(inc.edge_index(0, 2), Some(1));
        assert_eq!(inc.edge_index(2, 0), None);
    }

    #[test]
    fn knn_examples() {
        let two = array![[1.0, 1.0], [2.0, 2.0]];
        let inst = build_knn_graph(two.view(), 1).unwrap();
        assert_eq!(inst.n_blocks(), 1);
        assert_eq!(inst.weights(), &[1.0]);

        let line = array![[0.0, 1.0, 5.0]];
        let inst = build_knn_graph(line.view(), 1).unwrap();
        assert_eq!(inst.incidence().edges(), &[(0, 1), (1, 2)]);
        assert_eq!(inst.weights(), &[(-0.5f64).exp(), (-8.0f64).exp()]);

        let five = array![[0.0, 1.0, 3.0, 7.0, 8.0]];
        let inst = build_knn_graph(five.view(), 4).unwrap();
        assert_eq!(inst.n_blocks(), 10);
    }

    #[test]
    fn knn_errors() {
        let one = array![[1.0]];
        assert!(matches!(
            build_knn_graph(one.view(), 1),
            Err(Error::EmptyGraph(1))
        ));
        let two = array![[1.0, 2.0]];
        assert!(build_knn_graph(two.view(), 2).is_err());
        assert!(build_knn_graph(two.view(), 0).is_err());
    }

    #[test]
    fn knn_ties_prefer_smaller_index() {
        // node 1 is equidistant from 0 and 2
        let a = array![[0.0, 1.0, 2.0]];
        let inst = build_knn_graph(a.view(), 1).unwrap();
        assert_eq!(inst.incidence().edges(), &[(0, 1), (1, 2)]);
        let b = array![[0.0, 1.0, 2.0, 10.0]];
        let inst = build_knn_graph(b.view(), 1).unwrap();
        // 1 picks 0 over 2; 2 picks 1; 3 picks 2
        assert_eq!(inst.incidence().edges(), &[(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn knn_sequential_matches_parallel() {
        let a = Array2::from_shape_fn((3, 300), |(r, c)| ((r * 31 + c * 17) % 101) as f64 * 0.1);
        let s = build_knn_graph_with(a.view(), 5, Execution::Sequential).unwrap();
        let p = build_knn_graph_with(a.view(), 5, Execution::Parallel).unwrap();
        assert_eq!(s.incidence(), p.incidence());
        assert_eq!(s.weights(), p.weights());
    }
}
