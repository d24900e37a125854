use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::model::ProblemInstance;
use crate::union_find::UnionFind;

/// Cluster assignment at one `λ`: ids `0..num_clusters`, numbered by the
/// smallest member of each cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLabels {
    pub labels: Vec<usize>,
    pub num_clusters: usize,
    pub lambda: f64,
}

impl ClusterLabels {
    pub fn singletons(n: usize, lambda: f64) -> Self {
        ClusterLabels {
            labels: (0..n).collect(),
            num_clusters: n,
            lambda,
        }
    }
}

/// Points joined by an edge whose block `‖y_l‖ ≤ eps_hat` share a cluster.
pub fn extract_labels(
    inst: &ProblemInstance,
    y: ArrayView2<'_, f64>,
    eps_hat: f64,
    lambda: f64,
) -> ClusterLabels {
    let mut uf = UnionFind::new(inst.n_points());
    for (&(i, j), col) in inst.incidence().edges().iter().zip(y.axis_iter(Axis(1))) {
        if col.dot(&col).sqrt() <= eps_hat {
            uf.union(i, j);
        }
    }
    let (labels, num_clusters) = uf.labels();
    ClusterLabels {
        labels,
        num_clusters,
        lambda,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Edge;
    use ndarray::{array, Array2};

    #[test]
    fn zero_and_nonzero_blocks() {
        let inst = ProblemInstance::new(
            array![[0.0, 1.0, 5.0]],
            vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)],
            2.0,
        )
        .unwrap();
        let all = extract_labels(&inst, Array2::zeros((1, 2)).view(), 2e-16, 1.0);
        assert_eq!(all.num_clusters, 1);
        assert_eq!(all.labels, vec![0, 0, 0]);
        let none = extract_labels(&inst, array![[1.0, 1e-3]].view(), 2e-16, 1.0);
        assert_eq!(none.num_clusters, 3);
        let some = extract_labels(&inst, array![[1.0, 0.0]].view(), 2e-16, 1.0);
        assert_eq!(some.labels, vec![0, 1, 1]);
    }
}
