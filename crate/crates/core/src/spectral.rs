//! Eigenvalue machinery, spectral estimates, heat kernels, graph filters,
//! spectral embedding and k-means.

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, DegreeStats, Graph, LaplacianKind};
use crate::linalg::{self, DenseMatrix, SparseMatrix};
use crate::report::SolverReport;

/// Largest order accepted by [`heat_kernel`].
pub const HEAT_KERNEL_CAP: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit-norm eigenvector.
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Largest,
    /// Smallest eigenvalue on the orthogonal complement of the supplied null
    /// vector (the plain smallest eigenvalue when none is supplied).
    SmallestNonzero,
}

fn unit(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_out(v: &mut [f64], q: &[f64]) {
    let c = dot(v, q);
    v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
}

/// Extreme eigenpair of a sparse symmetric matrix.
///
/// Each step performs a Rayleigh-Ritz projection onto the span of the current
/// iterate, its residual and the previous search direction (a single-vector
/// locally optimal scheme), so only mat-vecs with `m` are needed. For
/// [`Which::SmallestNonzero`] every vector is kept orthogonal to `null_vector`.
/// Convergence means `‖Mv − λv‖₂ ≤ tol`; hitting `max_iter` is recorded in
/// the report rather than returned as an error.
pub fn extreme_eigen(
    m: &SparseMatrix,
    which: Which,
    null_vector: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<(EigenPair, SolverReport)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(format!("eigenproblem on {}x{} matrix", n, m.ncols())));
    }
    let scale = m.values().iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
    if !m.is_symmetric(1e-12 * scale) {
        return Err(Error::param("m", "matrix must be symmetric"));
    }
    if n == 0 {
        return Err(Error::param("m", "empty matrix"));
    }
    let sign = match which {
        Which::Largest => 1.0,
        Which::SmallestNonzero => -1.0,
    };
    let deflate = match (which, null_vector) {
        (Which::SmallestNonzero, Some(q)) => {
            if q.len() != n {
                return Err(Error::DimensionMismatch("null vector length".into()));
            }
            let mut q = q.to_vec();
            if unit(&mut q) == 0.0 {
                return Err(Error::param("null_vector", "must be non-zero"));
            }
            Some(q)
        }
        _ => None,
    };
    let apply = |v: &[f64]| -> Vec<f64> {
        let mut w = m.mul_vec(v);
        if sign < 0.0 {
            w.iter_mut().for_each(|x| *x = -*x);
        }
        w
    };
    let clean = |v: &mut Vec<f64>| {
        if let Some(q) = &deflate {
            project_out(v, q);
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_e16e);
    let mut x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    clean(&mut x);
    if unit(&mut x) == 0.0 {
        // n == 1 with deflation: nothing left to find.
        return Err(Error::param("m", "no eigenvector orthogonal to the null vector"));
    }
    let mut p: Option<Vec<f64>> = None;
    let mut report = SolverReport::new(tol);

    for _ in 0..max_iter {
        let ax = apply(&x);
        let lambda = dot(&x, &ax);
        let mut r: Vec<f64> = ax.iter().zip(&x).map(|(a, b)| a - lambda * b).collect();
        clean(&mut r);
        let res = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        report.record(sign * lambda, res);
        if res <= tol {
            report.converged = true;
            break;
        }

        // Orthonormal basis of span{x, r, p}.
        let mut basis = vec![x.clone()];
        for mut cand in std::iter::once(r).chain(p.take()) {
            clean(&mut cand);
            for _ in 0..2 {
                for b in &basis {
                    project_out(&mut cand, b);
                }
            }
            let norm = unit(&mut cand);
            if norm > 1e-14 && cand.iter().all(|v| v.is_finite()) {
                basis.push(cand);
            }
        }
        if basis.len() == 1 {
            report.converged = true;
            break;
        }
        let images: Vec<Vec<f64>> = basis.iter().map(|b| apply(b)).collect();
        let k = basis.len();
        let h = DenseMatrix::from_fn(k, k, |i, j| 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i])));
        let eig = SymmetricEigen::new(h);
        let top = (0..k)
            .max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
            .expect("non-empty basis");
        let y = eig.eigenvectors.column(top);
        let mut next = vec![0.0; n];
        let mut dir = vec![0.0; n];
        for (j, b) in basis.iter().enumerate() {
            for i in 0..n {
                next[i] += y[j] * b[i];
                if j > 0 {
                    dir[i] += y[j] * b[i];
                }
            }
        }
        clean(&mut next);
        unit(&mut next);
        unit(&mut dir);
        x = next;
        p = Some(dir);
    }

    let value = dot(&x, &m.mul_vec(&x));
    Ok((EigenPair { value, vector: x }, report))
}

/// Row/column-sum bounds on the spectral radius of a nonnegative matrix:
/// `max(min row, min col) ≤ ρ ≤ min(max row, max col)`.
pub fn spectral_radius_bounds(m: &DenseMatrix) -> Result<(f64, f64)> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch("spectral radius of a non-square matrix".into()));
    }
    if m.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::param("m", "entries must be finite and nonnegative"));
    }
    let rows: Vec<f64> = m.row_iter().map(|r| r.sum()).collect();
    let cols: Vec<f64> = m.column_iter().map(|c| c.sum()).collect();
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((min(&rows).max(min(&cols)), max(&rows).min(max(&cols))))
}

/// Degree-based estimate `2d̄ / (γ + d̄)` of the largest eigenvalue of the
/// self-loop augmented symmetric normalized Laplacian.
///
/// The estimate targets unweighted undirected graphs; callers should treat
/// results on weighted or directed graphs as indicative only.
pub fn lambda_max_estimate(stats: &DegreeStats, gamma: f64) -> f64 {
    2.0 * stats.mean_degree / (gamma + stats.mean_degree)
}

/// Measured largest eigenvalue of the symmetric normalized Laplacian on
/// `A + γI`.
pub fn lambda_max_measured(g: &Graph, gamma: f64, tol: f64, max_iter: usize) -> Result<(EigenPair, SolverReport)> {
    let l = graph::laplacian(g, LaplacianKind::sym_normalized(gamma))?;
    extreme_eigen(&l, Which::Largest, None, tol, max_iter)
}

/// Heat kernel `e^{−tL}` through a full eigendecomposition of `L`.
/// Dense output; limited to `n ≤ HEAT_KERNEL_CAP`.
pub fn heat_kernel(l: &SparseMatrix, t: f64) -> Result<DenseMatrix> {
    let n = l.nrows();
    if n > HEAT_KERNEL_CAP {
        return Err(Error::TooLarge { n, cap: HEAT_KERNEL_CAP });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param("t", "time must be finite and >= 0"));
    }
    if !l.is_symmetric(1e-12) {
        return Err(Error::param("l", "Laplacian must be symmetric"));
    }
    if t == 0.0 {
        return Ok(DenseMatrix::identity(n, n));
    }
    let (values, vectors) = linalg::symmetric_eigen(&l.to_dense())?;
    let mut scaled = vectors.clone();
    for (k, lambda) in values.iter().enumerate() {
        let f = (-t * lambda).exp();
        scaled.column_mut(k).scale_mut(f);
    }
    let k = &scaled * vectors.transpose();
    Ok((&k + k.transpose()) * 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterKind {
    /// `(I + ηL)^{-1}`
    AutoRegressive { eta: f64 },
    /// `I − ηL`
    Residual { eta: f64 },
    /// `(I − L)^k = Â^k`
    Renormalized { k: usize },
}

/// A graph filter together with the Laplacian it is built on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub laplacian: LaplacianKind,
}

impl FilterSpec {
    pub fn auto_regressive(eta: f64) -> Self {
        Self {
            kind: FilterKind::AutoRegressive { eta },
            laplacian: LaplacianKind::default(),
        }
    }

    pub fn residual(eta: f64) -> Self {
        Self {
            kind: FilterKind::Residual { eta },
            laplacian: LaplacianKind::default(),
        }
    }

    pub fn renormalized(k: usize) -> Self {
        Self {
            kind: FilterKind::Renormalized { k },
            laplacian: LaplacianKind::default(),
        }
    }

    pub fn with_laplacian(mut self, laplacian: LaplacianKind) -> Self {
        self.laplacian = laplacian;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            FilterKind::AutoRegressive { eta } | FilterKind::Residual { eta } => {
                if !(eta > 0.0) || !eta.is_finite() {
                    return Err(Error::param("eta", "must be finite and > 0"));
                }
            }
            FilterKind::Renormalized { .. } => {}
        }
        if !(self.laplacian.self_loop_gamma >= 0.0) {
            return Err(Error::param("gamma", "self-loop weight must be >= 0"));
        }
        Ok(())
    }

    /// Step count of the truncated AR series, `max(⌊4η⌋, 1)`.
    pub fn default_ar_steps(eta: f64) -> usize {
        ((4.0 * eta).floor() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyMode {
    Direct,
    /// Truncated Neumann series for the AR filter. `None` uses
    /// [`FilterSpec::default_ar_steps`]. Ignored by the other filters.
    Iterative { steps: Option<usize> },
}

/// Applies a graph filter to the signal matrix `x` (one column per signal).
pub fn apply_filter(
    g: &Graph,
    spec: &FilterSpec,
    x: &DenseMatrix,
    mode: ApplyMode,
) -> Result<(DenseMatrix, SolverReport)> {
    spec.validate()?;
    if x.nrows() != g.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "signal has {} rows for {} nodes",
            x.nrows(),
            g.node_count()
        )));
    }
    let l = graph::laplacian(g, spec.laplacian)?;
    let n = g.node_count();
    let mut report = SolverReport::new(0.0);
    let out = match (spec.kind, mode) {
        (FilterKind::AutoRegressive { eta }, ApplyMode::Direct) => {
            if n > linalg::DENSE_EIGEN_CAP {
                return Err(Error::TooLarge { n, cap: linalg::DENSE_EIGEN_CAP });
            }
            let system = SparseMatrix::identity(n).add_scaled(1.0, &l, eta).to_dense();
            let y = linalg::solve(&system, x, "I + ηL")?;
            report.converged = true;
            y
        }
        (FilterKind::AutoRegressive { eta }, ApplyMode::Iterative { steps }) => {
            let steps = steps.unwrap_or_else(|| FilterSpec::default_ar_steps(eta));
            let propagate = SparseMatrix::identity(n).add_scaled(1.0, &l, -1.0);
            let c = eta / (1.0 + eta);
            let mut acc = DenseMatrix::zeros(n, x.ncols());
            for _ in 0..steps {
                let next = x + propagate.mul_dense(&acc) * c;
                let delta = linalg::max_abs(&(&next - &acc));
                acc = next;
                report.record(delta, delta);
            }
            report.converged = true;
            acc / (1.0 + eta)
        }
        (FilterKind::Residual { eta }, _) => {
            let op = SparseMatrix::identity(n).add_scaled(1.0, &l, -eta);
            report.converged = true;
            op.mul_dense(x)
        }
        (FilterKind::Renormalized { k }, _) => {
            let op = SparseMatrix::identity(n).add_scaled(1.0, &l, -1.0);
            let mut y = x.clone();
            for _ in 0..k {
                let next = op.mul_dense(&y);
                let delta = linalg::max_abs(&(&next - &y));
                y = next;
                report.record(delta, delta);
            }
            report.converged = true;
            y
        }
    };
    Ok((out, report))
}

/// Largest per-column variance across rows of `(D^{-1}A)^k x`; shrinks to
/// zero on connected non-bipartite graphs as `k` grows.
pub fn deep_collapse_demo(g: &Graph, x: &DenseMatrix, k: usize) -> Result<f64> {
    if x.nrows() != g.node_count() {
        return Err(Error::DimensionMismatch("signal rows vs node count".into()));
    }
    let p = graph::transition_matrix(g, 0.0)?;
    let mut y = x.clone();
    for _ in 0..k {
        y = p.mul_dense(&y);
    }
    Ok(max_column_variance(&y))
}

pub(crate) fn max_column_variance(y: &DenseMatrix) -> f64 {
    let n = y.nrows() as f64;
    y.column_iter()
        .map(|c| {
            let mean = c.sum() / n;
            c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
        })
        .fold(0.0, f64::max)
}

/// Layer count `k` solving `d̄^k · n_l = n`, i.e. `log(n / n_l) / log d̄`.
pub fn optimal_depth(stats: &DegreeStats, n_labeled: usize, n: usize) -> Result<f64> {
    if !(stats.mean_degree > 1.0) {
        return Err(Error::param("mean_degree", "must exceed 1"));
    }
    if n_labeled == 0 || n_labeled > n {
        return Err(Error::param("n_labeled", "must lie in 1..=n"));
    }
    Ok((n as f64 / n_labeled as f64).ln() / stats.mean_degree.ln())
}

/// Laplacian-eigenmap embedding: eigenvectors 2..=m+1 (ascending eigenvalue)
/// of the symmetric normalized Laplacian, as columns of an `n × m` matrix.
pub fn spectral_embedding(g: &Graph, m: usize, allow_disconnected: bool) -> Result<DenseMatrix> {
    let n = g.node_count();
    if m == 0 || m >= n {
        return Err(Error::param("m", format!("target dimension must lie in 1..{n}")));
    }
    if !allow_disconnected && !g.is_connected() {
        return Err(Error::Disconnected("spectral embedding needs a connected graph".into()));
    }
    let l = graph::laplacian(g, LaplacianKind::sym_normalized(0.0))?;
    let (_, vectors) = linalg::symmetric_eigen(&l.to_dense())?;
    Ok(vectors.columns(1, m).clone_owned())
}

/// Normalized spectral clustering of a symmetric nonnegative affinity matrix:
/// the `k` leading eigenvectors of `D^{-1/2} W D^{-1/2}`, row-normalized, then
/// k-means. Zero-degree nodes embed at the origin.
pub fn spectral_clustering(w: &SparseMatrix, k: usize, seed: u64, restarts: usize) -> Result<Vec<usize>> {
    let n = w.nrows();
    if n != w.ncols() {
        return Err(Error::DimensionMismatch("affinity must be square".into()));
    }
    if k == 0 || k > n {
        return Err(Error::param("k", format!("cluster count must lie in 1..={n}")));
    }
    if w.values().iter().any(|&v| v < 0.0) {
        return Err(Error::param("w", "affinity must be nonnegative"));
    }
    let d = w.row_sums();
    let s: Vec<f64> = d.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 0.0 }).collect();
    let normalized = w.scale(&s, &s).to_dense();
    let (_, vectors) = linalg::symmetric_eigen(&normalized)?;
    // Leading eigenvectors of the normalized affinity are the trailing
    // columns in ascending order.
    let mut emb = vectors.columns(n - k, k).clone_owned();
    for mut row in emb.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    Ok(kmeans(&emb, k, seed, restarts)?.labels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub centroids: DenseMatrix,
}

const LLOYD_ITERATIONS: usize = 100;

fn sq_dist(points: &DenseMatrix, i: usize, centroids: &DenseMatrix, c: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(centroids.row(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Best-of-`restarts` Lloyd's algorithm on the rows of `points`.
///
/// Each restart seeds its first centre from the RNG and picks the rest by
/// farthest-point traversal. Assignment ties go to the lowest cluster index.
pub fn kmeans(points: &DenseMatrix, k: usize, seed: u64, restarts: usize) -> Result<KMeans> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::param("k", format!("cluster count must lie in 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeans> = None;
    for _ in 0..restarts.max(1) {
        let first = rng.random_range(0..n);
        let run = lloyd(points, k, first);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn lloyd(points: &DenseMatrix, k: usize, first: usize) -> KMeans {
    let (n, dim) = points.shape();
    let mut centroids = DenseMatrix::zeros(k, dim);
    centroids.set_row(0, &points.row(first));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centroids, 0)).collect();
    for c in 1..k {
        let mut pick = 0;
        for i in 1..n {
            if nearest[i] > nearest[pick] {
                pick = i;
            }
        }
        centroids.set_row(c, &points.row(pick));
        for i in 0..n {
            nearest[i] = nearest[i].min(sq_dist(points, i, &centroids, c));
        }
    }

    let mut labels = vec![usize::MAX; n];
    for _ in 0..LLOYD_ITERATIONS {
        let mut changed = false;
        for i in 0..n {
            let mut best = 0;
            let mut best_d = sq_dist(points, i, &centroids, 0);
            for c in 1..k {
                let d = sq_dist(points, i, &centroids, c);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = DenseMatrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let mut row = sums.row_mut(labels[i]);
            row += points.row(i);
            counts[labels[i]] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids.set_row(c, &(sums.row(c) / counts[c] as f64));
            }
        }
    }
    let inertia = (0..n).map(|i| sq_dist(points, i, &centroids, labels[i])).sum();
    KMeans {
        labels,
        inertia,
        centroids,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        build_graph(n, &edges, false).unwrap()
    }

    #[test]
    fn largest_of_diagonal() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 1.0)]).unwrap();
        let (pair, rep) = extreme_eigen(&m, Which::Largest, None, 1e-12, 100).unwrap();
        assert!(rep.converged);
        assert!((pair.value - 2.0).abs() < 1e-12);
        assert!((pair.vector[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_edge_normalized_laplacian_reaches_two() {
        let g = build_graph(2, &[(0, 1, 1.0)], false).unwrap();
        let l = graph::laplacian(&g, LaplacianKind::sym_normalized(0.0)).unwrap();
        let (pair, _) = extreme_eigen(&l, Which::Largest, None, 1e-12, 100).unwrap();
        assert!((pair.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn smallest_nonzero_on_cycle() {
        // Unnormalized cycle Laplacian: eigenvalues 2 − 2cos(2πj/n).
        let g = cycle(8);
        let l = graph::laplacian(&g, LaplacianKind::unnormalized()).unwrap();
        let null = graph::laplacian_null_vector(&g, LaplacianKind::unnormalized());
        let (pair, rep) = extreme_eigen(&l, Which::SmallestNonzero, Some(&null), 1e-10, 1000).unwrap();
        assert!(rep.converged);
        let want = 2.0 - 2.0 * (2.0 * std::f64::consts::PI / 8.0).cos();
        assert!((pair.value - want).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0)]).unwrap();
        assert!(extreme_eigen(&m, Which::Largest, None, 1e-9, 10).is_err());
    }

    #[test]
    fn radius_bounds_examples() {
        let stochastic = DenseMatrix::from_row_slice(2, 2, &[0.3, 0.7, 0.6, 0.4]);
        let (lo, hi) = spectral_radius_bounds(&stochastic).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        let nil = DenseMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        assert_eq!(spectral_radius_bounds(&nil).unwrap(), (0.0, 2.0));
        let neg = DenseMatrix::from_row_slice(1, 1, &[-1.0]);
        assert!(spectral_radius_bounds(&neg).is_err());
    }

    #[test]
    fn estimate_formula() {
        let stats = DegreeStats {
            mean_degree: 4.0,
            max_degree: 168.0,
            min_degree: 1.0,
            edge_end_count: 10858.0,
        };
        assert!((lambda_max_estimate(&stats, 1.0) - 1.6).abs() < 1e-15);
        let same = DegreeStats { mean_degree: 2.5, ..stats };
        assert_eq!(lambda_max_estimate(&same, 2.5), 1.0);
        let citeseer = DegreeStats { mean_degree: 2.7364, ..stats };
        assert!((lambda_max_estimate(&citeseer, 1.0) - 1.464_725).abs() < 1e-6);
    }

    #[test]
    fn depth_examples() {
        let stats = |d| DegreeStats {
            mean_degree: d,
            max_degree: d,
            min_degree: d,
            edge_end_count: 0.0,
        };
        assert!((optimal_depth(&stats(4.0), 140, 2708).unwrap() - 2.1365).abs() < 1e-3);
        assert_eq!(optimal_depth(&stats(3.0), 50, 50).unwrap(), 0.0);
        assert!((optimal_depth(&stats(2.0), 10, 40).unwrap() - 2.0).abs() < 1e-15);
        assert!(optimal_depth(&stats(1.0), 10, 40).is_err());
        assert!(optimal_depth(&stats(2.0), 0, 40).is_err());
    }

    #[test]
    fn heat_kernel_identity_and_cap() {
        let l = graph::laplacian(&cycle(5), LaplacianKind::unnormalized()).unwrap();
        assert_eq!(heat_kernel(&l, 0.0).unwrap(), DenseMatrix::identity(5, 5));
        assert!(heat_kernel(&l, -1.0).is_err());
        assert!(matches!(
            heat_kernel(&SparseMatrix::identity(HEAT_KERNEL_CAP + 1), 1.0),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn filters_with_trivial_parameters() {
        let g = cycle(6);
        let x = DenseMatrix::from_fn(6, 2, |i, j| (i * 3 + j) as f64);
        let (y, _) = apply_filter(&g, &FilterSpec::renormalized(0), &x, ApplyMode::Direct).unwrap();
        assert_eq!(y, x);
        let (y, _) = apply_filter(&g, &FilterSpec::auto_regressive(1e-12), &x, ApplyMode::Direct).unwrap();
        assert!((y - &x).amax() < 1e-9);
        assert!(apply_filter(&g, &FilterSpec::residual(0.0), &x, ApplyMode::Direct).is_err());
        assert_eq!(FilterSpec::default_ar_steps(2.0), 8);
        assert_eq!(FilterSpec::default_ar_steps(0.1), 1);
    }

    #[test]
    fn residual_eta_one_is_renormalized_adjacency() {
        let g = build_graph(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 0, 1.0), (0, 2, 1.0)], false)
            .unwrap();
        let x = DenseMatrix::from_fn(5, 3, |i, j| ((i + 1) * (j + 2)) as f64 * 0.1);
        let (y, _) = apply_filter(&g, &FilterSpec::residual(1.0), &x, ApplyMode::Direct).unwrap();
        let a_hat = graph::normalized_adjacency(&g, 1.0).unwrap();
        assert!((y - a_hat.mul_dense(&x)).amax() <= 1e-12);
    }

    #[test]
    fn collapse_at_zero_steps_is_variance() {
        let g = cycle(3);
        let x = DenseMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        assert!((deep_collapse_demo(&g, &x, 0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn embedding_path_antisymmetric() {
        let g = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)], false).unwrap();
        let e = spectral_embedding(&g, 1, false).unwrap();
        assert!((e[(0, 0)] + e[(2, 0)]).abs() < 1e-12);
        assert!(e[(1, 0)].abs() < 1e-12);
        let split = build_graph(4, &[(0, 1, 1.0), (2, 3, 1.0)], false).unwrap();
        assert!(matches!(spectral_embedding(&split, 1, false), Err(Error::Disconnected(_))));
        assert!(spectral_embedding(&split, 1, true).is_ok());
        assert!(spectral_embedding(&g, 3, false).is_err());
    }

    #[test]
    fn kmeans_simple_cases() {
        let pts = DenseMatrix::from_row_slice(4, 1, &[0.0, 0.1, 10.0, 10.1]);
        let km = kmeans(&pts, 2, 7, 3).unwrap();
        assert_eq!(km.labels[0], km.labels[1]);
        assert_eq!(km.labels[2], km.labels[3]);
        assert_ne!(km.labels[0], km.labels[2]);

        let same = DenseMatrix::from_element(5, 2, 3.0);
        let km = kmeans(&same, 2, 0, 2).unwrap();
        assert!(km.labels.iter().all(|&l| l == 0));
        assert_eq!(km.inertia, 0.0);
        assert!(kmeans(&same, 6, 0, 1).is_err());
    }
}
