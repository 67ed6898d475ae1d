//! Affinity and reconstruction-weight matrices on neighbourhoods.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{self, DenseMatrix, DenseVector, SparseMatrix};
use crate::report::SolverReport;

/// Per-node ordered neighbour lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodMap {
    lists: Vec<Vec<usize>>,
}

impl NeighborhoodMap {
    pub fn new(lists: Vec<Vec<usize>>) -> Result<Self> {
        let n = lists.len();
        for (i, list) in lists.iter().enumerate() {
            for &j in list {
                if j >= n {
                    return Err(Error::IndexOutOfRange { index: j, n });
                }
                if j == i {
                    return Err(Error::SelfLoop(i));
                }
            }
        }
        Ok(Self { lists })
    }

    /// `k` nearest rows of `x` by Euclidean distance; ties go to the lower
    /// node index.
    pub fn knn(x: &DenseMatrix, k: usize) -> Result<Self> {
        let n = x.nrows();
        if k == 0 || k >= n {
            return Err(Error::param("k", format!("neighbour count must lie in 1..{n}")));
        }
        let sq: Vec<f64> = x.row_iter().map(|r| r.norm_squared()).collect();
        let gram = x * x.transpose();
        let lists = (0..n)
            .map(|i| {
                let mut cand: Vec<(f64, usize)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| ((sq[i] + sq[j] - 2.0 * gram[(i, j)]).max(0.0), j))
                    .collect();
                cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                cand.truncate(k);
                cand.into_iter().map(|(_, j)| j).collect()
            })
            .collect();
        Ok(Self { lists })
    }

    pub fn from_graph(g: &Graph) -> Self {
        Self {
            lists: (0..g.node_count()).map(|i| g.neighbors(i).map(|(j, _)| j).collect()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.lists[i]
    }

    pub fn lists(&self) -> &[Vec<usize>] {
        &self.lists
    }
}

/// Sparse `n × n` weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub w: SparseMatrix,
    pub row_stochastic: bool,
}

impl WeightMatrix {
    pub fn matrix(&self) -> &SparseMatrix {
        &self.w
    }

    /// Row-normalizes a copy; empty rows stay empty.
    pub fn normalized(&self) -> WeightMatrix {
        let sums = self.w.row_sums();
        let inv: Vec<f64> = sums.iter().map(|&s| if s != 0.0 { 1.0 / s } else { 0.0 }).collect();
        WeightMatrix {
            w: self.w.scale(&inv, &vec![1.0; self.w.ncols()]),
            row_stochastic: true,
        }
    }
}

fn check_rows(x: &DenseMatrix, nbrs: &NeighborhoodMap) -> Result<()> {
    if x.nrows() != nbrs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows for {} neighbourhoods",
            x.nrows(),
            nbrs.len()
        )));
    }
    Ok(())
}

fn sq_distance(x: &DenseMatrix, i: usize, j: usize) -> f64 {
    x.row(i).iter().zip(x.row(j).iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Heat-kernel weights `exp(−‖x_i − x_j‖² / 4t)` on the neighbourhood support.
pub fn rbf_weights(x: &DenseMatrix, nbrs: &NeighborhoodMap, t: f64, normalize: bool) -> Result<WeightMatrix> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::param("t", "bandwidth must be finite and > 0"));
    }
    check_rows(x, nbrs)?;
    let n = nbrs.len();
    let mut triplets = Vec::new();
    for i in 0..n {
        for &j in nbrs.neighbors(i) {
            triplets.push((i, j, (-sq_distance(x, i, j) / (4.0 * t)).exp()));
        }
    }
    let wm = WeightMatrix {
        w: SparseMatrix::from_triplets(n, n, &triplets)?,
        row_stochastic: false,
    };
    Ok(if normalize { wm.normalized() } else { wm })
}

/// Attention weights `softmax_j(β · cos(z_i, z_j))` over each neighbourhood.
pub fn cosine_attention_weights(z: &DenseMatrix, nbrs: &NeighborhoodMap, beta: f64) -> Result<WeightMatrix> {
    if !beta.is_finite() {
        return Err(Error::param("beta", "must be finite"));
    }
    check_rows(z, nbrs)?;
    let n = nbrs.len();
    let norms: Vec<f64> = z.row_iter().map(|r| r.norm()).collect();
    let mut triplets = Vec::new();
    for i in 0..n {
        let list = nbrs.neighbors(i);
        if list.is_empty() {
            continue;
        }
        for &j in std::iter::once(&i).chain(list) {
            if norms[j] == 0.0 {
                return Err(Error::param("z", format!("embedding of node {j} has zero norm")));
            }
        }
        let logits: Vec<f64> = list
            .iter()
            .map(|&j| beta * z.row(i).dot(&z.row(j)) / (norms[i] * norms[j]))
            .collect();
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = exps.iter().sum();
        for (&j, e) in list.iter().zip(exps) {
            triplets.push((i, j, e / total));
        }
    }
    Ok(WeightMatrix {
        w: SparseMatrix::from_triplets(n, n, &triplets)?,
        row_stochastic: true,
    })
}

/// Local Gram matrix `G_jk = (x_i − x_j)ᵀ(x_i − x_k)` over the neighbours of `i`.
pub fn local_gram(x: &DenseMatrix, i: usize, neighbors: &[usize]) -> DenseMatrix {
    let k = neighbors.len();
    let diffs = DenseMatrix::from_fn(x.ncols(), k, |r, c| x[(i, r)] - x[(neighbors[c], r)]);
    diffs.transpose() * diffs
}

const GRAM_CONDITION_LIMIT: f64 = 1e10;
pub const DEFAULT_GRAM_REGULARIZATION: f64 = 1e-3;
pub const MAX_REGULARIZATION_ROUNDS: usize = 10;

fn condition_number(g: &DenseMatrix) -> f64 {
    let values = nalgebra::SymmetricEigen::new(g.clone()).eigenvalues;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Closed-form sum-to-one reconstruction weights for one node,
/// `w = G⁻¹e / eᵀG⁻¹e`, with `G ← G + ε·tr(G)·I` applied until `G` is
/// well conditioned.
pub fn lle_row_weights(g: &DenseMatrix, eps_reg: f64) -> Result<DenseVector> {
    let k = g.nrows();
    if k == 1 {
        return Ok(DenseVector::from_element(1, 1.0));
    }
    let trace = g.trace();
    if trace == 0.0 {
        // Every neighbour coincides with the node; all sum-to-one weights are
        // optimal and the uniform one has minimum norm.
        return Ok(DenseVector::from_element(k, 1.0 / k as f64));
    }
    let mut gram = g.clone();
    let mut rounds = 0;
    while condition_number(&gram) > GRAM_CONDITION_LIMIT {
        if rounds == MAX_REGULARIZATION_ROUNDS {
            return Err(Error::Singular(format!(
                "local Gram matrix still ill-conditioned after {rounds} regularization rounds"
            )));
        }
        for d in 0..k {
            gram[(d, d)] += eps_reg * trace;
        }
        rounds += 1;
    }
    let ones = DenseMatrix::from_element(k, 1, 1.0);
    let raw = linalg::solve_spd(&gram, &ones, "local Gram matrix")?;
    let total = raw.sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::Singular("local Gram system gave degenerate weights".into()));
    }
    Ok(raw.column(0) / total)
}

/// Locally-linear reconstruction weights (may be negative), one row per node.
pub fn lle_weights_closed_form(x: &DenseMatrix, nbrs: &NeighborhoodMap, eps_reg: f64) -> Result<WeightMatrix> {
    check_rows(x, nbrs)?;
    if !(eps_reg > 0.0) {
        return Err(Error::param("eps_reg", "must be > 0"));
    }
    let n = nbrs.len();
    let mut triplets = Vec::new();
    for i in 0..n {
        let list = nbrs.neighbors(i);
        if list.is_empty() {
            return Err(Error::param("nbrs", format!("node {i} has no neighbours")));
        }
        let w = lle_row_weights(&local_gram(x, i, list), eps_reg)?;
        triplets.extend(list.iter().zip(w.iter()).map(|(&j, &v)| (i, j, v)));
    }
    Ok(WeightMatrix {
        w: SparseMatrix::from_triplets(n, n, &triplets)?,
        row_stochastic: true,
    })
}

/// Objective minimized by the multiplicative update:
/// `½wᵀGw + (μ/2)(eᵀw)² − μ eᵀw`.
pub fn nmf_row_objective(g: &DenseMatrix, w: &DenseVector, mu: f64) -> f64 {
    let s = w.sum();
    0.5 * w.dot(&(g * w)) + 0.5 * mu * s * s - mu * s
}

/// Nonnegative reconstruction weights for one node by multiplicative updates.
///
/// Minimizes `½wᵀAw − μeᵀw` over `w ≥ 0` with `A = G + μeeᵀ`, using
/// `w_j ← w_j (μ + √(μ² + 4(A⁺w)_j(A⁻w)_j)) / (2(A⁺w)_j)` where `A⁺`, `A⁻`
/// are the positive and negative parts of `A`. When `A` has no negative
/// entries this is `w_j ← w_j μ / (Gw + μeeᵀw)_j`. The result is rescaled to
/// sum to one.
pub fn nmf_row_weights(g: &DenseMatrix, mu: f64, iters: usize, tol: f64) -> (DenseVector, SolverReport) {
    let k = g.nrows();
    let mut report = SolverReport::new(tol);
    let mut w = DenseVector::from_element(k, 1.0 / k as f64);
    if k == 1 {
        report.converged = true;
        return (DenseVector::from_element(1, 1.0), report);
    }
    let a = g.map(|v| v) + DenseMatrix::from_element(k, k, mu);
    let pos = a.map(|v| v.max(0.0));
    let neg = a.map(|v| (-v).max(0.0));
    for _ in 0..iters {
        let ap = &pos * &w;
        let an = &neg * &w;
        let mut change = 0.0_f64;
        let next = DenseVector::from_fn(k, |j, _| {
            if w[j] == 0.0 || ap[j] <= 0.0 {
                return w[j];
            }
            let factor = (mu + (mu * mu + 4.0 * ap[j] * an[j]).sqrt()) / (2.0 * ap[j]);
            let v = w[j] * factor;
            change = change.max((v - w[j]).abs() / w[j].abs().max(1e-300));
            v
        });
        w = next;
        report.record(nmf_row_objective(g, &w, mu), change);
        if change <= tol {
            report.converged = true;
            break;
        }
    }
    let total = w.sum();
    if total > 0.0 {
        w /= total;
    }
    (w, report)
}

/// Nonnegative, row-stochastic LLE weights from multiplicative updates.
/// The report concatenates the per-row histories; `converged` requires every
/// row to converge.
pub fn lle_weights_nmf(
    x: &DenseMatrix,
    nbrs: &NeighborhoodMap,
    mu: f64,
    iters: usize,
    tol: f64,
) -> Result<(WeightMatrix, SolverReport)> {
    check_rows(x, nbrs)?;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::param("mu", "must be finite and > 0"));
    }
    let n = nbrs.len();
    let mut triplets = Vec::new();
    let mut report = SolverReport::new(tol);
    report.converged = true;
    for i in 0..n {
        let list = nbrs.neighbors(i);
        if list.is_empty() {
            return Err(Error::param("nbrs", format!("node {i} has no neighbours")));
        }
        let (w, row) = nmf_row_weights(&local_gram(x, i, list), mu, iters, tol);
        report.converged &= row.converged;
        report.iterations += row.iterations;
        report.objective_history.extend(row.objective_history);
        report.residual_history.extend(row.residual_history);
        triplets.extend(list.iter().zip(w.iter()).map(|(&j, &v)| (i, j, v)));
    }
    Ok((
        WeightMatrix {
            w: SparseMatrix::from_triplets(n, n, &triplets)?,
            row_stochastic: true,
        },
        report,
    ))
}

/// Symmetric affinity `(|Z| + |Zᵀ|) / 2` from a self-representation matrix.
pub fn affinity_from_representation(z: &DenseMatrix) -> Result<WeightMatrix> {
    if z.nrows() != z.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "representation must be square, got {}x{}",
            z.nrows(),
            z.ncols()
        )));
    }
    let a = z.abs();
    let w = (&a + a.transpose()) * 0.5;
    Ok(WeightMatrix {
        w: SparseMatrix::from_dense(&w, 0.0),
        row_stochastic: false,
    })
}
