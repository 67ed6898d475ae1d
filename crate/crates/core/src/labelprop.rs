//! Label propagation and Gaussian CRF inference on weighted graphs.

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, DenseVector, SparseMatrix, Svd};
use crate::report::SolverReport;
use crate::weights::WeightMatrix;

pub const DEFAULT_ALPHA: f64 = 0.99;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;

const STOCHASTIC_SLACK: f64 = 1e-8;

/// One-hot label rows for labelled nodes, zero rows elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    y: DenseMatrix,
    labeled: Vec<bool>,
}

impl LabelMatrix {
    /// Builds from per-node optional class indices.
    pub fn from_labels(labels: &[Option<usize>], classes: usize) -> Result<Self> {
        let n = labels.len();
        let mut y = DenseMatrix::zeros(n, classes);
        for (i, l) in labels.iter().enumerate() {
            if let Some(c) = *l {
                if c >= classes {
                    return Err(Error::IndexOutOfRange { index: c, n: classes });
                }
                y[(i, c)] = 1.0;
            }
        }
        Ok(Self {
            y,
            labeled: labels.iter().map(Option::is_some).collect(),
        })
    }

    /// Labels `nodes` with the matching entries of `classes`; all others are
    /// unlabelled.
    pub fn from_subset(n: usize, classes: usize, nodes: &[usize], labels: &[usize]) -> Result<Self> {
        if nodes.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} nodes but {} labels",
                nodes.len(),
                labels.len()
            )));
        }
        let mut all = vec![None; n];
        for (&i, &c) in nodes.iter().zip(labels) {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            all[i] = Some(c);
        }
        Self::from_labels(&all, classes)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.y
    }

    pub fn labeled_mask(&self) -> &[bool] {
        &self.labeled
    }

    pub fn node_count(&self) -> usize {
        self.y.nrows()
    }

    pub fn class_count(&self) -> usize {
        self.y.ncols()
    }
}

/// Row-wise argmax; ties go to the lowest class index.
pub fn hard_labels(f: &DenseMatrix) -> Vec<usize> {
    f.row_iter()
        .map(|r| {
            let mut best = 0;
            for (c, &v) in r.iter().enumerate() {
                if v > r[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Divides every class column by its total mass, so that classes with more
/// propagated mass do not win by default. Columns without mass are left as is.
pub fn class_mass_normalize(f: &DenseMatrix) -> DenseMatrix {
    let mut out = f.clone();
    for mut col in out.column_iter_mut() {
        let total = col.sum();
        if total > 0.0 {
            col /= total;
        }
    }
    out
}

fn check_propagation(w: &SparseMatrix, y: &LabelMatrix, alpha: f64, contraction: bool) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::param("alpha", "must lie in [0, 1)"));
    }
    if w.nrows() != w.ncols() || w.nrows() != y.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "weights are {}x{}, labels have {} rows",
            w.nrows(),
            w.ncols(),
            y.node_count()
        )));
    }
    let worst = w.inf_norm();
    if contraction && worst > 1.0 + STOCHASTIC_SLACK {
        return Err(Error::param(
            "w",
            format!("largest absolute row sum is {worst}; propagation needs at most 1"),
        ));
    }
    Ok(())
}

/// Iterates `F ← αWF + (1−α)Y` from `F = Y` until the max-norm step is at
/// most `tol`.
pub fn lp_iterate(
    w: &WeightMatrix,
    y: &LabelMatrix,
    alpha: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(DenseMatrix, SolverReport)> {
    check_propagation(&w.w, y, alpha, true)?;
    let base = y.matrix() * (1.0 - alpha);
    let mut f = y.matrix().clone();
    let mut report = SolverReport::new(tol);
    for _ in 0..max_iter {
        let next = w.w.mul_dense(&f) * alpha + &base;
        let step = linalg::max_abs(&(&next - &f));
        f = next;
        report.record(step, step);
        if step <= tol {
            report.converged = true;
            break;
        }
    }
    Ok((f, report))
}

/// `F* = (1−α)(I − αW)⁻¹Y` by a dense LU solve.
///
/// Unlike [`lp_iterate`], `W` may have negative entries (as LLE weights do);
/// only `I − αW` has to be nonsingular.
pub fn lp_closed_form(w: &WeightMatrix, y: &LabelMatrix, alpha: f64) -> Result<DenseMatrix> {
    check_propagation(&w.w, y, alpha, false)?;
    let n = y.node_count();
    let system = DenseMatrix::identity(n, n) - w.w.to_dense() * alpha;
    Ok(linalg::solve(&system, y.matrix(), "label propagation system")? * (1.0 - alpha))
}

fn indices(mask: &[bool], value: bool) -> Vec<usize> {
    mask.iter().enumerate().filter(|(_, &m)| m == value).map(|(i, _)| i).collect()
}

/// Harmonic extension `y_u = (I − W_uu)⁻¹ W_ul y_l`.
///
/// `y_l` holds one row per labelled node, in node order. Returns one row per
/// unlabelled node, in node order.
pub fn harmonic_solution(w: &WeightMatrix, labeled_mask: &[bool], y_l: &DenseMatrix) -> Result<DenseMatrix> {
    let n = labeled_mask.len();
    if w.w.nrows() != n || w.w.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "weights are {}x{} for {n} nodes",
            w.w.nrows(),
            w.w.ncols()
        )));
    }
    let lab = indices(labeled_mask, true);
    let unl = indices(labeled_mask, false);
    if y_l.nrows() != lab.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} labelled nodes but {} label rows",
            lab.len(),
            y_l.nrows()
        )));
    }
    if unl.is_empty() {
        return Ok(DenseMatrix::zeros(0, y_l.ncols()));
    }
    check_reaches_labels(&w.w, labeled_mask)?;
    let w_uu = w.w.select(&unl, &unl);
    let w_ul = w.w.select(&unl, &lab);
    let system = DenseMatrix::identity(unl.len(), unl.len()) - w_uu;
    linalg::solve(&system, &(w_ul * y_l), "harmonic system")
}

/// Every unlabelled node must reach a labelled one along the support of `W`.
fn check_reaches_labels(w: &SparseMatrix, labeled: &[bool]) -> Result<()> {
    let n = labeled.len();
    // Walk backwards from the labelled set: i reaches j when w_ij ≠ 0.
    let wt = w.transpose();
    let mut seen = labeled.to_vec();
    let mut stack: Vec<usize> = indices(labeled, true);
    while let Some(j) = stack.pop() {
        for (i, v) in wt.row(j) {
            if v != 0.0 && !seen[i] {
                seen[i] = true;
                stack.push(i);
            }
        }
    }
    match (0..n).find(|&i| !seen[i]) {
        Some(i) => Err(Error::Disconnected(format!("node {i} has no path to a labelled node"))),
        None => Ok(()),
    }
}

/// Precision matrix of a Gaussian field split into observed (`y`) and latent
/// (`x`) coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedPrecision {
    q: DenseMatrix,
    observed: Vec<usize>,
    latent: Vec<usize>,
}

impl PartitionedPrecision {
    pub fn new(q: DenseMatrix, observed_mask: &[bool]) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() != observed_mask.len() {
            return Err(Error::DimensionMismatch(format!(
                "precision is {}x{} with a mask of length {}",
                q.nrows(),
                q.ncols(),
                observed_mask.len()
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("q", "entries must be finite"));
        }
        Ok(Self {
            q,
            observed: indices(observed_mask, true),
            latent: indices(observed_mask, false),
        })
    }

    /// `Q = I − W` for a weight matrix, the precision behind the harmonic
    /// solution.
    pub fn from_weights(w: &WeightMatrix, observed_mask: &[bool]) -> Result<Self> {
        let n = w.w.nrows();
        Self::new(DenseMatrix::identity(n, n) - w.w.to_dense(), observed_mask)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn latent(&self) -> &[usize] {
        &self.latent
    }

    pub fn is_symmetric(&self) -> bool {
        linalg::is_symmetric(&self.q, 1e-12)
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(rows.len(), cols.len(), |r, c| self.q[(rows[r], cols[c])])
    }

    pub fn q_xx(&self) -> DenseMatrix {
        self.block(&self.latent, &self.latent)
    }

    pub fn q_xy(&self) -> DenseMatrix {
        self.block(&self.latent, &self.observed)
    }

    pub fn q_yx(&self) -> DenseMatrix {
        self.block(&self.observed, &self.latent)
    }

    pub fn q_yy(&self) -> DenseMatrix {
        self.block(&self.observed, &self.observed)
    }
}

/// Conditional mean `E[x | y] = −Q_xx⁻¹ Q_xy y`.
///
/// A symmetric `Q_xx` must be positive definite. Non-symmetric precisions
/// such as `I − W` for a row-stochastic `W` are solved by LU.
pub fn crf_expectation(p: &PartitionedPrecision, y: &DenseMatrix) -> Result<DenseMatrix> {
    if y.nrows() != p.observed.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} observed coordinates but {} observation rows",
            p.observed.len(),
            y.nrows()
        )));
    }
    if p.latent.is_empty() {
        return Ok(DenseMatrix::zeros(0, y.ncols()));
    }
    let q_xx = p.q_xx();
    let rhs = -(p.q_xy() * y);
    if linalg::is_symmetric(&q_xx, 1e-12) {
        linalg::solve_spd(&q_xx, &rhs, "latent precision block")
    } else {
        linalg::solve(&q_xx, &rhs, "latent precision block")
    }
}

/// Prediction `−q_o⁻¹ q_on·y` for a node added after inference.
pub fn crf_inductive(q_o: f64, q_on: &[f64], y: &[f64]) -> Result<f64> {
    if q_o == 0.0 || !q_o.is_finite() {
        return Err(Error::param("q_o", "self-precision must be finite and non-zero"));
    }
    if q_on.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} couplings for {} values",
            q_on.len(),
            y.len()
        )));
    }
    Ok(-q_on.iter().zip(y).map(|(q, v)| q * v).sum::<f64>() / q_o)
}

/// Solution of a biased-state system: latent values and their bias.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasedStates {
    pub x: DenseVector,
    pub b_x: DenseVector,
    /// Euclidean residual of the solved block rows.
    pub residual: f64,
    /// Dimension of the null space of the solved block.
    pub null_dim: usize,
}

/// Solution of a biased-observation system.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasedObservations {
    pub x: DenseVector,
    pub y: DenseVector,
    pub b_y: DenseVector,
    pub residual: f64,
    pub null_dim: usize,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::param("lambda", "must lie in (0, 1)"))
    }
}

const RANK_TOL: f64 = 1e-12;

fn min_norm(m: &DenseMatrix, rhs: &DenseVector) -> (DenseVector, f64, usize) {
    let z = linalg::pseudo_inverse(m, RANK_TOL) * rhs;
    let residual = (m * &z - rhs).norm();
    let null_dim = m.ncols() - Svd::new(m).rank(RANK_TOL);
    (z, residual, null_dim)
}

/// Latent values `x` and state bias `b_x` with `y` held fixed.
///
/// Solves the `x` and `b_x` block rows of
/// `[(1−λ)Q_yy, (1−λ)Q_yx, 0; (1−λ)Q_xy, (1−λ)Q_xx + λI, −λI; 0, −λI, λI]·(y, x, b_x) = 0`
/// in the minimum-norm least-squares sense.
pub fn crf_biased_states(p: &PartitionedPrecision, lambda: f64, y: &DenseVector) -> Result<BiasedStates> {
    check_lambda(lambda)?;
    if y.len() != p.observed.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} observed coordinates but {} values",
            p.observed.len(),
            y.len()
        )));
    }
    let m = p.latent.len();
    let q_xx = p.q_xx() * (1.0 - lambda);
    let mut system = DenseMatrix::zeros(2 * m, 2 * m);
    for r in 0..m {
        for c in 0..m {
            system[(r, c)] = q_xx[(r, c)];
        }
        system[(r, r)] += lambda;
        system[(r, m + r)] = -lambda;
        system[(m + r, r)] = -lambda;
        system[(m + r, m + r)] = lambda;
    }
    let top = -(p.q_xy() * y) * (1.0 - lambda);
    let mut rhs = DenseVector::zeros(2 * m);
    rhs.rows_mut(0, m).copy_from(&top);
    let (z, residual, null_dim) = min_norm(&system, &rhs);
    Ok(BiasedStates {
        x: z.rows(0, m).into_owned(),
        b_x: z.rows(m, m).into_owned(),
        residual,
        null_dim,
    })
}

/// Observed values `y` and latent values `x` given an observed bias `b_y`.
///
/// Solves the `y` and `x` block rows of
/// `[(1−λ)Q_yy + λI, (1−λ)Q_yx, −λI; (1−λ)Q_xy, (1−λ)Q_xx, 0; −λI, 0, λI]·(y, x, b_y) = 0`
/// in the minimum-norm least-squares sense.
pub fn crf_biased_observations(p: &PartitionedPrecision, lambda: f64, b_y: &DenseVector) -> Result<BiasedObservations> {
    check_lambda(lambda)?;
    let k = p.observed.len();
    let m = p.latent.len();
    if b_y.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{k} observed coordinates but {} bias values",
            b_y.len()
        )));
    }
    // Unknowns ordered (y, x), matching the observed-then-latent layout.
    let order: Vec<usize> = p.observed.iter().chain(&p.latent).copied().collect();
    let mut system = DenseMatrix::from_fn(k + m, k + m, |r, c| (1.0 - lambda) * p.q[(order[r], order[c])]);
    for r in 0..k {
        system[(r, r)] += lambda;
    }
    let mut rhs = DenseVector::zeros(k + m);
    rhs.rows_mut(0, k).copy_from(&(b_y * lambda));
    let (z, residual, null_dim) = min_norm(&system, &rhs);
    Ok(BiasedObservations {
        y: z.rows(0, k).into_owned(),
        x: z.rows(k, m).into_owned(),
        b_y: b_y.clone(),
        residual,
        null_dim,
    })
}

/// Order of the graph energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyOrder {
    /// `½xᵀ(I − W)x`.
    Harmonic,
    /// `½‖(I − W)x‖²`.
    Biharmonic,
}

pub fn graph_energy(w: &WeightMatrix, x: &[f64], order: EnergyOrder) -> Result<f64> {
    if w.w.nrows() != x.len() || w.w.ncols() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "weights are {}x{}, vector has {} entries",
            w.w.nrows(),
            w.w.ncols(),
            x.len()
        )));
    }
    let wx = w.w.mul_vec(x);
    let lx: Vec<f64> = x.iter().zip(&wx).map(|(a, b)| a - b).collect();
    Ok(match order {
        EnergyOrder::Harmonic => 0.5 * x.iter().zip(&lx).map(|(a, b)| a * b).sum::<f64>(),
        EnergyOrder::Biharmonic => 0.5 * lx.iter().map(|v| v * v).sum::<f64>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weights(n: usize, entries: &[(usize, usize, f64)]) -> WeightMatrix {
        WeightMatrix {
            w: SparseMatrix::from_triplets(n, n, entries).unwrap(),
            row_stochastic: true,
        }
    }

    fn path(n: usize) -> WeightMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            let nbrs: Vec<usize> = [i.wrapping_sub(1), i + 1].into_iter().filter(|&j| j < n).collect();
            for &j in &nbrs {
                t.push((i, j, 1.0 / nbrs.len() as f64));
            }
        }
        weights(n, &t)
    }

    #[test]
    fn lp_two_node_hand_solve() {
        let w = weights(2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        let y = LabelMatrix::from_labels(&[Some(0), None], 2).unwrap();
        let f = lp_closed_form(&w, &y, 0.5).unwrap();
        assert!((f[(0, 0)] - 2.0 / 3.0).abs() < 1e-14);
        assert!((f[(1, 0)] - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(f[(0, 1)], 0.0);
        assert_eq!(hard_labels(&f)[0], 0);
        let (fi, report) = lp_iterate(&w, &y, 0.5, 1e-12, 1000).unwrap();
        assert!(report.converged);
        assert!(linalg::max_abs(&(fi - f)) < 1e-11);
    }

    #[test]
    fn lp_trivial_cases() {
        let w = weights(3, &[]);
        let y = LabelMatrix::from_labels(&[Some(1), None, Some(0)], 2).unwrap();
        let (f, _) = lp_iterate(&w, &y, 0.3, 1e-12, 10).unwrap();
        assert_eq!(f, y.matrix() * 0.7);
        let small = lp_closed_form(&path(3), &y, 1e-9).unwrap();
        assert!(linalg::max_abs(&(small - y.matrix())) < 1e-8);
        let empty = LabelMatrix::from_labels(&[None, None, None], 2).unwrap();
        assert_eq!(lp_closed_form(&path(3), &empty, 0.9).unwrap(), DenseMatrix::zeros(3, 2));
        assert!(lp_iterate(&w, &y, 1.0, 1e-8, 10).is_err());
        let heavy = weights(3, &[(0, 1, 2.0)]);
        assert!(lp_iterate(&heavy, &y, 0.5, 1e-8, 10).is_err());
        assert!(lp_closed_form(&heavy, &y, 0.5).is_ok());
    }

    #[test]
    fn harmonic_paths() {
        let y_l = DenseMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let three = harmonic_solution(&path(3), &[true, false, true], &y_l).unwrap();
        assert!((three[(0, 0)] - 0.5).abs() < 1e-15);
        let four = harmonic_solution(&path(4), &[true, false, false, true], &y_l).unwrap();
        assert!((four[(0, 0)] - 1.0 / 3.0).abs() < 1e-14);
        assert!((four[(1, 0)] - 2.0 / 3.0).abs() < 1e-14);
        let all = harmonic_solution(&path(2), &[true, true], &y_l).unwrap();
        assert_eq!(all.nrows(), 0);
    }

    #[test]
    fn harmonic_rejects_unreachable_nodes() {
        let w = weights(4, &[(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, 1.0)]);
        let y_l = DenseMatrix::from_row_slice(1, 1, &[1.0]);
        let err = harmonic_solution(&w, &[true, false, false, false], &y_l).unwrap_err();
        assert!(matches!(err, Error::Disconnected(_)));
    }

    #[test]
    fn expectation_examples() {
        let q = DenseMatrix::from_row_slice(2, 2, &[3.0, -1.0, -1.0, 2.0]);
        let p = PartitionedPrecision::new(q, &[true, false]).unwrap();
        let e = crf_expectation(&p, &DenseMatrix::from_element(1, 1, 4.0)).unwrap();
        assert!((e[(0, 0)] - 2.0).abs() < 1e-15);
        let diag = PartitionedPrecision::new(DenseMatrix::identity(3, 3), &[true, false, false]).unwrap();
        let zero = crf_expectation(&diag, &DenseMatrix::from_element(1, 1, 5.0)).unwrap();
        assert_eq!(zero, DenseMatrix::zeros(2, 1));
        let indefinite = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let p = PartitionedPrecision::new(indefinite, &[true, false]).unwrap();
        assert!(matches!(
            crf_expectation(&p, &DenseMatrix::zeros(1, 1)),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn expectation_matches_harmonic() {
        let w = path(4);
        let mask = [true, false, false, true];
        let y_l = DenseMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let p = PartitionedPrecision::from_weights(&w, &mask).unwrap();
        let e = crf_expectation(&p, &y_l).unwrap();
        let h = harmonic_solution(&w, &mask, &y_l).unwrap();
        assert!(linalg::max_abs(&(e - h)) < 1e-12);
    }

    #[test]
    fn inductive_examples() {
        assert_eq!(crf_inductive(2.0, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(crf_inductive(1.0, &[-1.0], &[7.5]).unwrap(), 7.5);
        assert!(crf_inductive(0.0, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn biased_states_limit_and_zero_coupling() {
        let q = DenseMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let p = PartitionedPrecision::new(q, &[true, false, false]).unwrap();
        let y = DenseVector::from_element(1, 3.0);
        let exact = crf_expectation(&p, &DenseMatrix::from_element(1, 1, 3.0)).unwrap();
        let s = crf_biased_states(&p, 1e-6, &y).unwrap();
        assert!((s.x.clone() - exact.column(0)).amax() < 1e-6);
        assert!(s.residual < 1e-9);
        assert_eq!(s.null_dim, 0);
        let decoupled = PartitionedPrecision::new(DenseMatrix::identity(3, 3), &[true, false, false]).unwrap();
        let s = crf_biased_states(&decoupled, 0.4, &y).unwrap();
        assert_eq!(s.x.amax(), 0.0);
        assert_eq!(s.b_x.amax(), 0.0);
        assert!(crf_biased_states(&p, 1.0, &y).is_err());
    }

    #[test]
    fn biased_observations_zero_coupling() {
        let p = PartitionedPrecision::new(DenseMatrix::identity(3, 3), &[true, false, false]).unwrap();
        let s = crf_biased_observations(&p, 0.5, &DenseVector::zeros(1)).unwrap();
        assert_eq!(s.x.amax(), 0.0);
        assert_eq!(s.y.amax(), 0.0);
    }

    #[test]
    fn energy_examples() {
        let w = weights(2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        assert_eq!(graph_energy(&w, &[1.0, -1.0], EnergyOrder::Harmonic).unwrap(), 2.0);
        assert_eq!(graph_energy(&w, &[3.0, 3.0], EnergyOrder::Harmonic).unwrap(), 0.0);
        assert_eq!(graph_energy(&w, &[3.0, 3.0], EnergyOrder::Biharmonic).unwrap(), 0.0);
        assert!(graph_energy(&w, &[1.0], EnergyOrder::Harmonic).is_err());
    }

    #[test]
    fn argmax_ties_prefer_lowest_class() {
        let f = DenseMatrix::from_row_slice(2, 3, &[0.2, 0.2, 0.1, 0.0, 0.5, 0.5]);
        assert_eq!(hard_labels(&f), vec![0, 1]);
    }
}
