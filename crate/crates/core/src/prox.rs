//! Proximal operators and first-order solvers for composite objectives
//! `‖AX − B‖²_F + P(X)`.

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, Svd};
use crate::report::SolverReport;

/// Scalar shrinkage `sign(x)·max(|x| − λ, 0)`.
pub fn soft_threshold(x: f64, lam: f64) -> f64 {
    if x > lam {
        x - lam
    } else if x < -lam {
        x + lam
    } else {
        0.0
    }
}

pub fn soft_threshold_matrix(x: &DenseMatrix, lam: f64) -> DenseMatrix {
    x.map(|v| soft_threshold(v, lam))
}

/// Singular value thresholding, the prox of `λ‖·‖_*`.
pub fn svt(a: &DenseMatrix, lam: f64) -> Result<DenseMatrix> {
    if lam == 0.0 {
        return Ok(a.clone());
    }
    let svd = Svd::new(a);
    if !svd.converged {
        return Err(Error::NotConverged(format!("Jacobi SVD of a {}x{} matrix", a.nrows(), a.ncols())));
    }
    Ok(svd.reconstruct_with(|s| (s - lam).max(0.0)))
}

/// Column-wise shrinkage, the prox of `λ‖·‖_{2,1}`.
pub fn l21_shrink(q: &DenseMatrix, lam: f64) -> DenseMatrix {
    let mut out = q.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm > lam {
            col *= (norm - lam) / norm;
        } else {
            col.fill(0.0);
        }
    }
    out
}

/// `t_0 = 1`, `t_{k+1} = (1 + √(1 + 4t_k²)) / 2`; returns `t_0..=t_k`.
pub fn nesterov_sequence(k: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(k + 1);
    t.push(1.0_f64);
    for i in 0..k {
        let prev = t[i];
        t.push((1.0 + (1.0 + 4.0 * prev * prev).sqrt()) / 2.0);
    }
    t
}

/// Non-smooth part of a composite objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    L1(f64),
    Nuclear(f64),
    L21(f64),
}

impl Penalty {
    pub fn weight(&self) -> f64 {
        match *self {
            Penalty::L1(l) | Penalty::Nuclear(l) | Penalty::L21(l) => l,
        }
    }

    pub fn value(&self, x: &DenseMatrix) -> f64 {
        match *self {
            Penalty::L1(l) => l * linalg::l1_norm(x),
            Penalty::Nuclear(l) => l * linalg::nuclear_norm(x),
            Penalty::L21(l) => l * linalg::l21_norm(x),
        }
    }

    /// `argmin_X step·P(X) + ½‖X − G‖²_F`.
    pub fn prox(&self, g: &DenseMatrix, step: f64) -> Result<DenseMatrix> {
        Ok(match *self {
            Penalty::L1(l) => soft_threshold_matrix(g, l * step),
            Penalty::Nuclear(l) => svt(g, l * step)?,
            Penalty::L21(l) => l21_shrink(g, l * step),
        })
    }
}

/// `min_X ‖AX − B‖²_F + P(X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxProblem {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub penalty: Penalty,
    /// Step `1/τ`; `None` uses `1/L_f` with `L_f = 2ρ(AᵀA)`.
    pub step: Option<f64>,
}

impl ProxProblem {
    pub fn new(a: DenseMatrix, b: DenseMatrix, penalty: Penalty) -> Result<Self> {
        if a.nrows() != b.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "A has {} rows, B has {}",
                a.nrows(),
                b.nrows()
            )));
        }
        let lam = penalty.weight();
        if !(lam >= 0.0) || !lam.is_finite() {
            return Err(Error::param("lambda", "penalty weight must be finite and >= 0"));
        }
        Ok(Self {
            a,
            b,
            penalty,
            step: None,
        })
    }

    pub fn with_step(mut self, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::param("step", "must be finite and > 0"));
        }
        self.step = Some(step);
        Ok(self)
    }

    pub fn smooth(&self, x: &DenseMatrix) -> f64 {
        (&self.a * x - &self.b).norm_squared()
    }

    pub fn gradient(&self, x: &DenseMatrix) -> DenseMatrix {
        self.a.transpose() * (&self.a * x - &self.b) * 2.0
    }

    pub fn objective(&self, x: &DenseMatrix) -> f64 {
        self.smooth(x) + self.penalty.value(x)
    }

    /// Lipschitz constant `2ρ(AᵀA)` of the gradient.
    pub fn lipschitz(&self) -> f64 {
        let ata = self.a.transpose() * &self.a;
        2.0 * linalg::psd_spectral_radius(&ata, 1e-12, 10_000)
    }

    fn resolved_step(&self) -> f64 {
        self.step.unwrap_or_else(|| {
            let l = self.lipschitz();
            // Power iteration approaches ρ from below; shave the step slightly.
            if l > 0.0 {
                (1.0 - 1e-9) / l
            } else {
                1.0
            }
        })
    }

    fn check_start(&self, x0: &DenseMatrix) -> Result<()> {
        if x0.nrows() != self.a.ncols() || x0.ncols() != self.b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "start is {}x{}, expected {}x{}",
                x0.nrows(),
                x0.ncols(),
                self.a.ncols(),
                self.b.ncols()
            )));
        }
        Ok(())
    }
}

const DIVERGENCE_SLACK: f64 = 1e-9;

/// Proximal gradient `X ← prox_{P/τ}(X − ∇f(X)/τ)`.
///
/// Stops when `‖X_{k+1} − X_k‖_F ≤ tol`. An objective increase beyond a
/// relative `1e-9` means the step is too long and is reported as
/// [`Error::Divergence`].
pub fn ista(prob: &ProxProblem, x0: &DenseMatrix, iters: usize, tol: f64) -> Result<(DenseMatrix, SolverReport)> {
    prob.check_start(x0)?;
    let step = prob.resolved_step();
    let mut x = x0.clone();
    let mut obj = prob.objective(&x);
    let mut report = SolverReport::new(tol);
    for k in 0..iters {
        let next = prob.penalty.prox(&(&x - prob.gradient(&x) * step), step)?;
        let gap = (&next - &x).norm();
        let next_obj = prob.objective(&next);
        if !next_obj.is_finite() || next_obj > obj + DIVERGENCE_SLACK * obj.abs().max(1.0) {
            return Err(Error::Divergence {
                iteration: k + 1,
                previous: obj,
                current: next_obj,
            });
        }
        x = next;
        obj = next_obj;
        report.record(obj, gap);
        if gap <= tol {
            report.converged = true;
            break;
        }
    }
    Ok((x, report))
}

/// Accelerated proximal gradient with the Nesterov sequence.
///
/// The objective is not monotone, so only a non-finite objective is treated
/// as divergence.
pub fn fista(prob: &ProxProblem, x0: &DenseMatrix, iters: usize, tol: f64) -> Result<(DenseMatrix, SolverReport)> {
    prob.check_start(x0)?;
    let step = prob.resolved_step();
    let mut x = x0.clone();
    let mut y = x0.clone();
    let mut t = 1.0_f64;
    let mut report = SolverReport::new(tol);
    for k in 0..iters {
        let next = prob.penalty.prox(&(&y - prob.gradient(&y) * step), step)?;
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let gap = (&next - &x).norm();
        y = &next + (&next - &x) * ((t - 1.0) / t_next);
        x = next;
        t = t_next;
        let obj = prob.objective(&x);
        if !obj.is_finite() {
            return Err(Error::Divergence {
                iteration: k + 1,
                previous: report.final_objective().unwrap_or(f64::NAN),
                current: obj,
            });
        }
        report.record(obj, gap);
        if gap <= tol {
            report.converged = true;
            break;
        }
    }
    Ok((x, report))
}

/// Result of a scaled-form ADMM run.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmOutput {
    pub x: DenseMatrix,
    pub z: DenseMatrix,
    /// Scaled dual variable.
    pub u: DenseMatrix,
    pub report: SolverReport,
}

/// Scaled-form ADMM for `min f(x) + g(z)` subject to `Ax + Bz = c`.
///
/// The oracles solve the two subproblems:
/// `x_step(v, ρ) = argmin_x f(x) + (ρ/2)‖Ax + v‖²` with `v = Bz − c + u`, and
/// `z_step(w, ρ) = argmin_z g(z) + (ρ/2)‖Bz + w‖²` with `w = Ax − c + u`.
/// Converges when the primal residual `‖Ax + Bz − c‖` and the dual residual
/// `‖ρAᵀB(z_{k+1} − z_k)‖` are both at most `tol`. The objective series holds
/// the primal residual and the residual series the dual one.
#[allow(clippy::too_many_arguments)]
pub fn admm<F, G>(
    mut x_step: F,
    mut z_step: G,
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    rho: f64,
    iters: usize,
    tol: f64,
) -> Result<AdmmOutput>
where
    F: FnMut(&DenseMatrix, f64) -> Result<DenseMatrix>,
    G: FnMut(&DenseMatrix, f64) -> Result<DenseMatrix>,
{
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::param("rho", "must be finite and > 0"));
    }
    if a.nrows() != c.nrows() || b.nrows() != c.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A, B and c have {}, {} and {} rows",
            a.nrows(),
            b.nrows(),
            c.nrows()
        )));
    }
    let k = c.ncols();
    let mut x = DenseMatrix::zeros(a.ncols(), k);
    let mut z = DenseMatrix::zeros(b.ncols(), k);
    let mut u = DenseMatrix::zeros(c.nrows(), k);
    let mut report = SolverReport::new(tol);
    let atb = a.transpose() * b;
    for _ in 0..iters {
        x = x_step(&(b * &z - c + &u), rho)?;
        let ax = a * &x;
        let z_next = z_step(&(&ax - c + &u), rho)?;
        let dual = (&atb * (&z_next - &z)).norm() * rho;
        z = z_next;
        let r = &ax + b * &z - c;
        u += &r;
        let primal = r.norm();
        if !primal.is_finite() || !dual.is_finite() {
            return Err(Error::NotConverged("ADMM produced non-finite residuals".into()));
        }
        report.record(primal, dual);
        if primal <= tol && dual <= tol {
            report.converged = true;
            break;
        }
    }
    Ok(AdmmOutput { x, z, u, report })
}

/// LASSO `min ‖Ax − b‖² + λ‖x‖₁` through [`admm`] with the split `x − z = 0`.
pub fn admm_lasso(
    a: &DenseMatrix,
    b: &DenseMatrix,
    lam: f64,
    rho: f64,
    iters: usize,
    tol: f64,
) -> Result<AdmmOutput> {
    if !(lam >= 0.0) {
        return Err(Error::param("lambda", "must be >= 0"));
    }
    let n = a.ncols();
    let system = a.transpose() * a * 2.0 + DenseMatrix::identity(n, n) * rho;
    let chol = system
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("ADMM LASSO system".into()))?;
    let atb2 = a.transpose() * b * 2.0;
    let eye = DenseMatrix::identity(n, n);
    admm(
        |v, rho| Ok(chol.solve(&(&atb2 - v * rho))),
        |w, rho| Ok(soft_threshold_matrix(w, lam / rho)),
        &eye,
        &(-&eye),
        &DenseMatrix::zeros(n, b.ncols()),
        rho,
        iters,
        tol,
    )
}

/// Tikhonov solution of `min ‖Ax − b‖² + λ‖L_reg x‖²`, computed as
/// `(AᵀA + LᵀL)⁻¹Aᵀb` with `L = √λ·L_reg`.
pub fn ridge(a: &DenseMatrix, b: &DenseMatrix, l_reg: &DenseMatrix, lam: f64) -> Result<DenseMatrix> {
    if !(lam >= 0.0) || !lam.is_finite() {
        return Err(Error::param("lambda", "must be finite and >= 0"));
    }
    if a.nrows() != b.nrows() || l_reg.ncols() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, b has {} rows, L has {} columns",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            l_reg.ncols()
        )));
    }
    let l = l_reg * lam.sqrt();
    let system = a.transpose() * a + l.transpose() * l;
    linalg::solve(&system, &(a.transpose() * b), "ridge normal equations")
}
