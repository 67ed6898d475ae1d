//! Low-rank and sparse subspace recovery: LRR, robust PCA, SSC, matrix
//! completion, PCA and the affinity-based clustering pipeline.

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, DenseVector};
use crate::prox::{l21_shrink, soft_threshold_matrix, svt};
use crate::report::SolverReport;
use crate::spectral;
use crate::weights::affinity_from_representation;

/// Inexact ALM settings for [`lrr_alm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrrParams {
    pub lambda: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub rho_mu: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LrrParams {
    fn default() -> Self {
        Self {
            lambda: 10.0,
            mu0: 1e-2,
            mu_max: 1e6,
            rho_mu: 1.5,
            tol: 1e-7,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrrResult {
    pub z: DenseMatrix,
    pub e: DenseMatrix,
    pub report: SolverReport,
}

/// `min ‖J‖_* + λ‖E‖_{2,1}` subject to `X = XZ + E`, `Z = J`, by inexact ALM.
///
/// The objective series holds `‖J‖_* + λ‖E‖_{2,1}`; the residual series holds
/// `max(‖X − XZ − E‖_F, ‖Z − J‖_F)`.
pub fn lrr_alm(x: &DenseMatrix, params: &LrrParams) -> Result<LrrResult> {
    let LrrParams {
        lambda,
        mu0,
        mu_max,
        rho_mu,
        tol,
        max_iter,
    } = *params;
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", "must be > 0"));
    }
    if !(mu0 > 0.0) || mu_max < mu0 || !(rho_mu >= 1.0) {
        return Err(Error::param("mu", "need 0 < mu0 <= mu_max and rho_mu >= 1"));
    }
    let (d, n) = x.shape();
    let xtx = x.transpose() * x;
    let chol = (DenseMatrix::identity(n, n) + &xtx)
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("I + XᵀX".into()))?;
    let mut z = DenseMatrix::zeros(n, n);
    let mut e = DenseMatrix::zeros(d, n);
    let mut y1 = DenseMatrix::zeros(d, n);
    let mut y2 = DenseMatrix::zeros(n, n);
    let mut mu = mu0;
    let mut report = SolverReport::new(tol);
    for _ in 0..max_iter {
        let j = svt(&(&z + &y2 / mu), 1.0 / mu)?;
        let rhs = &xtx - x.transpose() * &e + &j + (x.transpose() * &y1 - &y2) / mu;
        z = chol.solve(&rhs);
        let xz = x * &z;
        e = l21_shrink(&(x - &xz + &y1 / mu), lambda / mu);
        let gap_x = x - &xz - &e;
        let gap_z = &z - &j;
        y1 += &gap_x * mu;
        y2 += &gap_z * mu;
        mu = (rho_mu * mu).min(mu_max);
        let objective = linalg::nuclear_norm(&j) + lambda * linalg::l21_norm(&e);
        let residual = gap_x.norm().max(gap_z.norm());
        if !objective.is_finite() || !residual.is_finite() {
            return Err(Error::NotConverged("LRR produced non-finite iterates".into()));
        }
        report.record(objective, residual);
        if residual <= tol {
            report.converged = true;
            break;
        }
    }
    Ok(LrrResult { z, e, report })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpcaResult {
    pub low_rank: DenseMatrix,
    pub sparse: DenseMatrix,
    pub report: SolverReport,
}

/// Default sparsity weight `1/√max(m, n)`.
pub fn rpca_default_rho(m: &DenseMatrix) -> f64 {
    1.0 / (m.nrows().max(m.ncols()).max(1) as f64).sqrt()
}

/// Robust principal component pursuit `min ‖L‖_* + ρ‖S‖₁` subject to
/// `M = L + S`, by scaled ADMM with fixed penalty `μ = mn / (4‖M‖₁)`.
///
/// Stops when both `‖M − L − S‖_F` and `μ‖S_k − S_{k−1}‖_F` are at most
/// `tol · max(1, ‖M‖_F)`.
pub fn rpca(m: &DenseMatrix, rho: f64, tol: f64, max_iter: usize) -> Result<RpcaResult> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::param("rho", "must be finite and > 0"));
    }
    let (r, c) = m.shape();
    let mut low_rank = DenseMatrix::zeros(r, c);
    let mut sparse = DenseMatrix::zeros(r, c);
    let mut report = SolverReport::new(tol);
    let l1 = linalg::l1_norm(m);
    if l1 == 0.0 {
        report.record(0.0, 0.0);
        report.converged = true;
        return Ok(RpcaResult {
            low_rank,
            sparse,
            report,
        });
    }
    let mu = (r * c) as f64 / (4.0 * l1);
    let scale = m.norm().max(1.0);
    let mut u = DenseMatrix::zeros(r, c);
    for _ in 0..max_iter {
        low_rank = svt(&(m - &sparse + &u), 1.0 / mu)?;
        let next = soft_threshold_matrix(&(m - &low_rank + &u), rho / mu);
        let dual = mu * (&next - &sparse).norm();
        sparse = next;
        let gap = m - &low_rank - &sparse;
        u += &gap;
        let primal = gap.norm();
        report.record(linalg::nuclear_norm(&low_rank) + rho * linalg::l1_norm(&sparse), primal);
        if primal <= tol * scale && dual <= tol * scale {
            report.converged = true;
            break;
        }
    }
    Ok(RpcaResult {
        low_rank,
        sparse,
        report,
    })
}

/// Sparse self-representation `min λ‖Z‖₁ + ½‖X − XZ‖²_F` with `diag(Z) = 0`,
/// by proximal gradient with step `1/ρ(XᵀX)`.
///
/// The diagonal is zeroed after every shrinkage step, which is the exact prox
/// of the penalty restricted to zero-diagonal matrices.
pub fn ssc(x: &DenseMatrix, lambda: f64, tol: f64, max_iter: usize) -> Result<(DenseMatrix, SolverReport)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::param("lambda", "must be finite and > 0"));
    }
    let n = x.ncols();
    let xtx = x.transpose() * x;
    let lip = linalg::psd_spectral_radius(&xtx, 1e-12, 10_000);
    let mut z = DenseMatrix::zeros(n, n);
    let mut report = SolverReport::new(tol);
    if lip == 0.0 {
        report.record(0.0, 0.0);
        report.converged = true;
        return Ok((z, report));
    }
    let step = (1.0 - 1e-9) / lip;
    let objective = |z: &DenseMatrix| 0.5 * (x - x * z).norm_squared() + lambda * linalg::l1_norm(z);
    for _ in 0..max_iter {
        let grad = &xtx * &z - &xtx;
        let mut next = soft_threshold_matrix(&(&z - grad * step), lambda * step);
        next.fill_diagonal(0.0);
        let gap = (&next - &z).norm();
        z = next;
        report.record(objective(&z), gap);
        if gap <= tol {
            report.converged = true;
            break;
        }
    }
    Ok((z, report))
}

/// Continuation schedule for the nuclear-norm weight, relative to the
/// spectral norm of the observed matrix: `λ_0 = start·‖P_Ω(A)‖₂`, shrinking
/// by `decay` per iteration down to `floor·‖P_Ω(A)‖₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSchedule {
    pub start: f64,
    pub decay: f64,
    pub floor: f64,
}

impl Default for LambdaSchedule {
    fn default() -> Self {
        Self {
            start: 0.5,
            decay: 0.8,
            floor: 1e-9,
        }
    }
}

/// Nuclear-norm matrix completion: monotone accelerated proximal gradient on
/// `½‖P_Ω(M − A)‖²_F + λ‖M‖_*` with λ continuation.
///
/// Converged means λ reached its floor, the step `‖M_{k+1} − M_k‖_F` fell to
/// `tol·‖A_Ω‖_F`, and every observed entry is reproduced within
/// `tol·‖A_Ω‖_F`.
pub fn matrix_complete(
    observed: &[(usize, usize, f64)],
    shape: (usize, usize),
    schedule: LambdaSchedule,
    tol: f64,
    max_iter: usize,
) -> Result<(DenseMatrix, SolverReport)> {
    let (rows, cols) = shape;
    if observed.is_empty() {
        return Err(Error::param("observed", "need at least one observed entry"));
    }
    if !(schedule.decay > 0.0 && schedule.decay < 1.0) || !(schedule.floor > 0.0) || schedule.start < schedule.floor {
        return Err(Error::param("schedule", "need 0 < floor <= start and decay in (0, 1)"));
    }
    let mut a = DenseMatrix::zeros(rows, cols);
    let mut mask = DenseMatrix::zeros(rows, cols);
    for &(i, j, v) in observed {
        if i >= rows || j >= cols {
            return Err(Error::IndexOutOfRange {
                index: if i >= rows { i } else { j },
                n: if i >= rows { rows } else { cols },
            });
        }
        if !v.is_finite() {
            return Err(Error::param("observed", "values must be finite"));
        }
        a[(i, j)] = v;
        mask[(i, j)] = 1.0;
    }
    let a_norm = a.norm();
    let spectral = linalg::Svd::new(&a).singular_values.first().copied().unwrap_or(0.0);
    let mut report = SolverReport::new(tol);
    if spectral == 0.0 {
        report.record(0.0, 0.0);
        report.converged = true;
        return Ok((a, report));
    }
    let floor = schedule.floor * spectral;
    let mut lambda = schedule.start * spectral;
    let objective = |m: &DenseMatrix, lambda: f64| -> f64 {
        0.5 * (m - &a).component_mul(&mask).norm_squared() + lambda * linalg::nuclear_norm(m)
    };
    let mut x = DenseMatrix::zeros(rows, cols);
    let mut y = x.clone();
    let mut t = 1.0_f64;
    for _ in 0..max_iter {
        // The gradient of the smooth part is 1-Lipschitz, so the step is 1.
        let grad = (&y - &a).component_mul(&mask);
        let cand = svt(&(&y - grad), lambda)?;
        let f_cand = objective(&cand, lambda);
        let f_x = objective(&x, lambda);
        let prev = x.clone();
        if f_cand <= f_x {
            x = cand.clone();
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = &x + (&cand - &x) * (t / t_next) + (&x - &prev) * ((t - 1.0) / t_next);
        t = t_next;
        let step = (&x - &prev).norm();
        report.record(f_cand.min(f_x), step);
        if lambda <= floor && step <= tol * a_norm {
            let fit = (&x - &a).component_mul(&mask).norm();
            if fit <= tol * a_norm {
                report.converged = true;
                break;
            }
        }
        lambda = (lambda * schedule.decay).max(floor);
    }
    Ok((x, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    /// `d × k`, orthonormal columns ordered by decreasing variance.
    pub basis: DenseMatrix,
    /// `k × n` coordinates of the centred samples.
    pub projections: DenseMatrix,
    pub mean: DenseVector,
    /// All `d` eigenvalues of the covariance `X_c X_cᵀ / n`, descending.
    pub eigenvalues: Vec<f64>,
}

/// PCA of the columns of `x` (`d × n`).
pub fn pca(x: &DenseMatrix, k: usize) -> Result<Pca> {
    let (d, n) = x.shape();
    if k == 0 || k > d.min(n) {
        return Err(Error::param("k", format!("component count must lie in 1..={}", d.min(n))));
    }
    let mean = x.column_mean();
    let mut centred = x.clone();
    for mut col in centred.column_iter_mut() {
        col -= &mean;
    }
    let cov = &centred * centred.transpose() / n as f64;
    let (values, vectors) = linalg::symmetric_eigen(&cov)?;
    let basis = DenseMatrix::from_fn(d, k, |r, c| vectors[(r, d - 1 - c)]);
    let projections = basis.transpose() * &centred;
    Ok(Pca {
        basis,
        projections,
        mean,
        eigenvalues: values.into_iter().rev().collect(),
    })
}

/// Self-representation method for [`subspace_cluster`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClusterMethod {
    Lrr(LrrParams),
    Ssc { lambda: f64, tol: f64, max_iter: usize },
}

/// `Z` from LRR or SSC, affinity `(|Z| + |Zᵀ|)/2`, then normalized spectral
/// clustering into `k` groups.
pub fn subspace_cluster(x: &DenseMatrix, method: ClusterMethod, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = x.ncols();
    if k == 0 || k > n {
        return Err(Error::param("k", format!("cluster count must lie in 1..={n}")));
    }
    if k == 1 {
        return Ok(vec![0; n]);
    }
    let z = match method {
        ClusterMethod::Lrr(params) => lrr_alm(x, &params)?.z,
        ClusterMethod::Ssc { lambda, tol, max_iter } => ssc(x, lambda, tol, max_iter)?.0,
    };
    let w = affinity_from_representation(&z)?;
    spectral::spectral_clustering(&w.w, k, seed, 10)
}

/// Largest class count accepted by [`clustering_accuracy`].
pub const ACCURACY_MAX_CLASSES: usize = 8;

/// Fraction of agreeing labels under the best one-to-one relabelling of
/// `pred`, found by trying every permutation.
pub fn clustering_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Ok(1.0);
    }
    let k = pred.iter().chain(truth).max().copied().unwrap_or(0) + 1;
    if k > ACCURACY_MAX_CLASSES {
        return Err(Error::param(
            "labels",
            format!("exhaustive matching supports at most {ACCURACY_MAX_CLASSES} classes"),
        ));
    }
    let mut counts = vec![vec![0usize; k]; k];
    for (&p, &t) in pred.iter().zip(truth) {
        counts[p][t] += 1;
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0;
    permute(&mut perm, 0, &mut |p| {
        let hits = (0..k).map(|c| counts[c][p[c]]).sum::<usize>();
        best = best.max(hits);
    });
    Ok(best as f64 / pred.len() as f64)
}

fn permute(items: &mut [usize], start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_inputs_give_zero_outputs() {
        let x = DenseMatrix::zeros(4, 5);
        let lrr = lrr_alm(&x, &LrrParams::default()).unwrap();
        assert_eq!(lrr.z.amax(), 0.0);
        assert_eq!(lrr.e.amax(), 0.0);
        let r = rpca(&x, 0.5, 1e-8, 100).unwrap();
        assert_eq!(r.low_rank.amax() + r.sparse.amax(), 0.0);
        let (z, _) = ssc(&x, 0.1, 1e-8, 100).unwrap();
        assert_eq!(z.amax(), 0.0);
    }

    #[test]
    fn rank_one_lrr_is_feasible() {
        let col = DenseVector::from_vec(vec![1.0, -2.0, 0.5]);
        let x = DenseMatrix::from_fn(3, 6, |r, _| col[r]);
        let out = lrr_alm(&x, &LrrParams::default()).unwrap();
        assert!(out.report.converged);
        assert!((&x - &x * &out.z - &out.e).norm() <= 1e-6);
        assert!(out.e.norm() < 1e-4);
    }

    #[test]
    fn completion_examples() {
        let a = DenseMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let all: Vec<_> = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (i, j, a[(i, j)])).collect();
        let (m, report) = matrix_complete(&all, (2, 2), LambdaSchedule::default(), 1e-8, 5000).unwrap();
        assert!(report.converged);
        assert!((m - &a).amax() < 1e-6);
        assert!(matrix_complete(&[], (2, 2), LambdaSchedule::default(), 1e-8, 10).is_err());
    }

    #[test]
    fn pca_line() {
        let x = DenseMatrix::from_row_slice(2, 4, &[1.0, -1.0, 2.0, -2.0, 1.0, -1.0, 2.0, -2.0]);
        let p = pca(&x, 1).unwrap();
        let dir = p.basis.column(0);
        assert!((dir[0].abs() - 0.5_f64.sqrt()).abs() < 1e-12);
        assert!((dir[0] - dir[1]).abs() < 1e-12);
        assert!(pca(&x, 3).is_err());
    }

    #[test]
    fn accuracy_matches_best_permutation() {
        assert_eq!(clustering_accuracy(&[1, 1, 0, 0], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(clustering_accuracy(&[0, 0, 0, 1], &[0, 0, 1, 1]).unwrap(), 0.75);
        assert_eq!(clustering_accuracy(&[2, 0, 1], &[0, 1, 2]).unwrap(), 1.0);
    }

    #[test]
    fn single_cluster() {
        let x = DenseMatrix::from_element(3, 5, 1.0);
        let labels = subspace_cluster(&x, ClusterMethod::Lrr(LrrParams::default()), 1, 0).unwrap();
        assert_eq!(labels, vec![0; 5]);
    }
}
