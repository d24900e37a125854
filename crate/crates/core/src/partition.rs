//! Index partition `(α, β, γ)` induced by a sieved edge set `I`, the reduced
//! problem over `(x_α, x_β, y_{I^c})`, and recovery of full-size iterates.
//!
//! For the incidence map the partition is constructive: the edges in `I`
//! split into connected components `N̂_1, …, N̂_s`; `α_i = min N̂_i`, the rest
//! of each component is `γ`, and untouched nodes form `β`. Eliminated nodes
//! copy their representative, `X_{:γ} = X_{:α} M_γα`.

use ndarray::{Array2, ArrayView2, Axis};
use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};
use crate::graph::IncidenceMap;
use crate::model::ProblemInstance;
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    /// Representative of component `c`.
    Alpha(usize),
    /// Untouched node at position `b` of `β`.
    Beta(usize),
    /// Position `g` of `γ`.
    Gamma(usize),
}

/// The dimension-reduction state for one sieved edge set.
#[derive(Debug, Clone)]
pub struct IndexPartition {
    index_set: Vec<usize>,
    in_index: Vec<bool>,
    alpha: Vec<usize>,
    beta: Vec<usize>,
    gamma: Vec<usize>,
    gamma_component: Vec<usize>,
    components: Vec<Vec<usize>>,
    roles: Vec<NodeRole>,
}

/// Normalizes `index_set` (sort, dedup) and checks it against `m` blocks.
pub fn normalize_index_set(mut index_set: Vec<usize>, m: usize) -> Result<Vec<usize>> {
    index_set.sort_unstable();
    index_set.dedup();
    if let Some(&bad) = index_set.last().filter(|&&l| l >= m) {
        return Err(Error::InvalidParameter(format!(
            "index {bad} out of range for {m} blocks"
        )));
    }
    Ok(index_set)
}

/// Builds the partition for edge set `index_set` via union-find.
pub fn build_partition(inc: &IncidenceMap, index_set: Vec<usize>) -> Result<IndexPartition> {
    let n = inc.n_nodes();
    let m = inc.n_edges();
    let index_set = normalize_index_set(index_set, m)?;
    let mut in_index = vec![false; m];
    let mut touched = vec![false; n];
    let mut uf = UnionFind::new(n);
    for &l in &index_set {
        in_index[l] = true;
        let (i, j) = inc.edges()[l];
        touched[i] = true;
        touched[j] = true;
        uf.union(i, j);
    }

    // components in order of their smallest member
    let mut comp_of_root = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut beta = Vec::new();
    for v in 0..n {
        if !touched[v] {
            beta.push(v);
            continue;
        }
        let r = uf.find(v);
        if comp_of_root[r] == usize::MAX {
            comp_of_root[r] = components.len();
            components.push(Vec::new());
        }
        components[comp_of_root[r]].push(v);
    }

    let mut roles = vec![NodeRole::Beta(0); n];
    for (b, &v) in beta.iter().enumerate() {
        roles[v] = NodeRole::Beta(b);
    }
    let alpha: Vec<usize> = components.iter().map(|c| c[0]).collect();
    for (c, &a) in alpha.iter().enumerate() {
        roles[a] = NodeRole::Alpha(c);
    }
    let mut gamma_nodes: Vec<(usize, usize)> = components
        .iter()
        .enumerate()
        .flat_map(|(c, nodes)| nodes[1..].iter().map(move |&v| (v, c)))
        .collect();
    gamma_nodes.sort_unstable();
    let gamma: Vec<usize> = gamma_nodes.iter().map(|&(v, _)| v).collect();
    let gamma_component: Vec<usize> = gamma_nodes.iter().map(|&(_, c)| c).collect();
    for (g, &v) in gamma.iter().enumerate() {
        roles[v] = NodeRole::Gamma(g);
    }

    Ok(IndexPartition {
        index_set,
        in_index,
        alpha,
        beta,
        gamma,
        gamma_component,
        components,
        roles,
    })
}

impl IndexPartition {
    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    pub fn contains(&self, l: usize) -> bool {
        self.in_index[l]
    }

    /// Complement `I^c` in ascending order.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.in_index.len())
            .filter(|&l| !self.in_index[l])
            .collect()
    }

    pub fn n_blocks(&self) -> usize {
        self.in_index.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.roles.len()
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    pub fn beta(&self) -> &[usize] {
        &self.beta
    }

    pub fn gamma(&self) -> &[usize] {
        &self.gamma
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    /// Component (equivalently, `α` position) of each `γ` node.
    pub fn gamma_component(&self) -> &[usize] {
        &self.gamma_component
    }

    pub fn role(&self, node: usize) -> NodeRole {
        self.roles[node]
    }

    /// Number of reduced nodes, `|α| + |β|`.
    pub fn reduced_nodes(&self) -> usize {
        self.alpha.len() + self.beta.len()
    }

    /// Reduced-variable index carrying `node`: `α` first, then `β`.
    pub fn reduced_index(&self, node: usize) -> usize {
        match self.roles[node] {
            NodeRole::Alpha(c) => c,
            NodeRole::Gamma(g) => self.gamma_component[g],
            NodeRole::Beta(b) => self.alpha.len() + b,
        }
    }

    /// Original node behind each reduced index.
    pub fn reduced_representatives(&self) -> Vec<usize> {
        self.alpha.iter().chain(&self.beta).copied().collect()
    }

    /// `M_γα` as a sparse `|α| × |γ|` 0/1 matrix.
    pub fn m_gamma_alpha(&self) -> CsMat<f64> {
        let mut tri = TriMat::new((self.alpha.len(), self.gamma.len()));
        for (g, &c) in self.gamma_component.iter().enumerate() {
            tri.add_triplet(c, g, 1.0);
        }
        tri.to_csc()
    }
}

/// `RP_λ(I)` for `f(x) = ½‖x − A‖²`: eliminating `x_γ` leaves
/// `φ(x) = ½ Σ_r n_r ‖x_r − ā_r‖² + c` with `n_r` the component size and
/// `ā_r` its centroid, plus `λ q` over the `I^c` blocks, subject to
/// `Ĥx = y_{I^c}`.
#[derive(Debug, Clone)]
pub struct ReducedProblem {
    lambda: f64,
    n_alpha: usize,
    multiplicity: Vec<f64>,
    centroid: Array2<f64>,
    constant: f64,
    edge_ids: Vec<usize>,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

pub fn reduce_problem(
    inst: &ProblemInstance,
    partition: &IndexPartition,
    lambda: f64,
) -> Result<ReducedProblem> {
    if partition.n_nodes() != inst.n_points() || partition.n_blocks() != inst.n_blocks() {
        return Err(Error::Partition(format!(
            "partition built for {} nodes / {} blocks, instance has {} / {}",
            partition.n_nodes(),
            partition.n_blocks(),
            inst.n_points(),
            inst.n_blocks()
        )));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    let d = inst.dim();
    let a = inst.data();
    let n_red = partition.reduced_nodes();
    let mut multiplicity = vec![0.0; n_red];
    let mut sums = Array2::<f64>::zeros((d, n_red));
    for v in 0..inst.n_points() {
        let r = partition.reduced_index(v);
        multiplicity[r] += 1.0;
        let mut col = sums.column_mut(r);
        col += &a.column(v);
    }
    let mut centroid = sums;
    for (r, mut col) in centroid.axis_iter_mut(Axis(1)).enumerate() {
        col /= multiplicity[r];
    }
    let mut constant = 0.0;
    for v in 0..inst.n_points() {
        let r = partition.reduced_index(v);
        constant += a
            .column(v)
            .iter()
            .zip(centroid.column(r))
            .map(|(x, c)| (x - c).powi(2))
            .sum::<f64>();
    }
    constant *= 0.5;

    let edge_ids = partition.complement();
    let all = inst.incidence().edges();
    let edges = edge_ids
        .iter()
        .map(|&l| {
            let (i, j) = all[l];
            (partition.reduced_index(i), partition.reduced_index(j))
        })
        .collect();
    let weights = edge_ids.iter().map(|&l| inst.weights()[l]).collect();
    Ok(ReducedProblem {
        lambda,
        n_alpha: partition.alpha().len(),
        multiplicity,
        centroid,
        constant,
        edge_ids,
        edges,
        weights,
    })
}

impl ReducedProblem {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.centroid.nrows()
    }

    pub fn n_nodes(&self) -> usize {
        self.multiplicity.len()
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_blocks(&self) -> usize {
        self.edges.len()
    }

    /// Diagonal of the Hessian of `φ` (identity on `β`).
    pub fn hessian_diag(&self) -> &[f64] {
        &self.multiplicity
    }

    pub fn centroid(&self) -> ArrayView2<'_, f64> {
        self.centroid.view()
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Original block indices of the reduced blocks (`I^c`, ascending).
    pub fn edge_ids(&self) -> &[usize] {
        &self.edge_ids
    }

    /// Reduced endpoints of each `I^c` edge; both ends coincide when the
    /// edge lies inside a component.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn smooth_value(&self, x: ArrayView2<'_, f64>) -> f64 {
        let mut v = self.constant;
        for (r, &n) in self.multiplicity.iter().enumerate() {
            let dev: f64 = x
                .column(r)
                .iter()
                .zip(self.centroid.column(r))
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            v += 0.5 * n * dev;
        }
        v
    }

    /// `Ĥx`.
    pub fn constraint_apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let d = x.nrows();
        let mut out = Array2::zeros((d, self.edges.len()));
        for k in 0..d {
            for (l, &(a, b)) in self.edges.iter().enumerate() {
                out[[k, l]] = x[[k, a]] - x[[k, b]];
            }
        }
        out
    }

    /// `Ĥᵀξ`.
    pub fn constraint_adjoint(&self, xi: ArrayView2<'_, f64>) -> Array2<f64> {
        let d = xi.nrows();
        let mut out = Array2::zeros((d, self.n_nodes()));
        for k in 0..d {
            for (l, &(a, b)) in self.edges.iter().enumerate() {
                out[[k, a]] += xi[[k, l]];
                out[[k, b]] -= xi[[k, l]];
            }
        }
        out
    }

    /// `φ(x) + λ q(Ĥx)`, equal to `F_λ` of the recovered full point.
    pub fn objective(&self, x: ArrayView2<'_, f64>) -> f64 {
        let hx = self.constraint_apply(x);
        let pen: f64 = hx
            .axis_iter(Axis(1))
            .zip(&self.weights)
            .map(|(c, w)| w * c.dot(&c).sqrt())
            .sum();
        self.smooth_value(x) + self.lambda * pen
    }

    /// Reduced dual value at `ξ` after projecting onto the dual balls.
    pub fn dual_value(&self, xi: ArrayView2<'_, f64>) -> f64 {
        let mut xp = xi.to_owned();
        for (l, mut col) in xp.axis_iter_mut(Axis(1)).enumerate() {
            let r = self.lambda * self.weights[l];
            let n = col.dot(&col).sqrt();
            if n > r {
                col *= if n > 0.0 { r / n } else { 0.0 };
            }
        }
        let g = self.constraint_adjoint(xp.view());
        let mut v = self.constant;
        for (r, &n) in self.multiplicity.iter().enumerate() {
            for k in 0..g.nrows() {
                let gk = g[[k, r]];
                v += gk * self.centroid[[k, r]] - 0.5 * gk * gk / n;
            }
        }
        v
    }

    /// Split of a reduced iterate into its `x_α` and `x_β` parts.
    pub fn split<'a>(&self, x: ArrayView2<'a, f64>) -> (ArrayView2<'a, f64>, ArrayView2<'a, f64>) {
        x.split_at(Axis(1), self.n_alpha)
    }
}

/// Embeds a reduced solution: `x̄_α = x̂_α`, `x̄_β = x̂_β`,
/// `x̄_γ = x̂_α M_γα`, `ȳ_{I^c} = ŷ`, `ȳ_I = 0`.
pub fn recover_primal(
    partition: &IndexPartition,
    x_red: ArrayView2<'_, f64>,
    y_red: ArrayView2<'_, f64>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let d = x_red.nrows();
    if x_red.ncols() != partition.reduced_nodes() {
        return Err(Error::shape(
            "recover_primal x",
            (d, partition.reduced_nodes()),
            x_red.dim(),
        ));
    }
    let comp = partition.complement();
    if y_red.dim() != (d, comp.len()) {
        return Err(Error::shape("recover_primal y", (d, comp.len()), y_red.dim()));
    }
    let n = partition.n_nodes();
    let mut x = Array2::zeros((d, n));
    for v in 0..n {
        let r = partition.reduced_index(v);
        x.column_mut(v).assign(&x_red.column(r));
    }
    let mut y = Array2::zeros((d, partition.n_blocks()));
    for (pos, &l) in comp.iter().enumerate() {
        y.column_mut(l).assign(&y_red.column(pos));
    }
    Ok((x, y))
}

/// Columns of a full-size `x` at the reduced representatives (`α`, then `β`).
pub fn restrict_nodes(partition: &IndexPartition, x: ArrayView2<'_, f64>) -> Array2<f64> {
    x.select(Axis(1), &partition.reduced_representatives())
}

/// The `I^c` blocks of a full-size block matrix.
pub fn restrict_blocks(partition: &IndexPartition, blocks: ArrayView2<'_, f64>) -> Array2<f64> {
    blocks.select(Axis(1), &partition.complement())
}
