use crate::linalg::DenseMatrix;

const SWEEP_LIMIT: usize = 60;

/// Thin singular value decomposition `A = U diag(s) Vᵀ` computed by one-sided
/// (Hestenes) Jacobi rotations, which orthogonalize the columns of `A` and so
/// implicitly diagonalize `AᵀA`.
///
/// Singular values are sorted in descending order. For an `m × n` input,
/// `u` is `m × r`, `v` is `n × r` with `r = min(m, n)`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
    pub sweeps: usize,
    pub converged: bool,
}

impl Svd {
    pub fn new(a: &DenseMatrix) -> Self {
        if a.nrows() < a.ncols() {
            let t = Self::tall(&a.transpose());
            return Svd {
                u: t.v,
                singular_values: t.singular_values,
                v: t.u,
                sweeps: t.sweeps,
                converged: t.converged,
            };
        }
        Self::tall(a)
    }

    fn tall(a: &DenseMatrix) -> Self {
        let (m, n) = a.shape();
        let mut w = a.clone();
        let mut v = DenseMatrix::identity(n, n);
        // Orthogonality is judged to a few ulps times the column count;
        // demanding exactly eps makes rounding noise cycle forever.
        let eps = f64::EPSILON * (m.max(n) as f64);
        // Columns below this squared norm carry less than eps·‖A‖_F and are
        // left alone; rotating them only churns rounding noise.
        let negligible = (eps * a.norm()).powi(2);
        let mut sweeps = 0;
        let mut converged = n < 2;
        while !converged && sweeps < SWEEP_LIMIT {
            sweeps += 1;
            let mut rotated = false;
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                    for i in 0..m {
                        let (x, y) = (w[(i, p)], w[(i, q)]);
                        alpha += x * x;
                        beta += y * y;
                        gamma += x * y;
                    }
                    if gamma == 0.0 || alpha.min(beta) <= negligible || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let t = if zeta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..m {
                        let (x, y) = (w[(i, p)], w[(i, q)]);
                        w[(i, p)] = c * x - s * y;
                        w[(i, q)] = s * x + c * y;
                    }
                    for i in 0..n {
                        let (x, y) = (v[(i, p)], v[(i, q)]);
                        v[(i, p)] = c * x - s * y;
                        v[(i, q)] = s * x + c * y;
                    }
                }
            }
            converged = !rotated;
        }

        let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

        let mut u = DenseMatrix::zeros(m, n);
        let mut vs = DenseMatrix::zeros(n, n);
        let mut s = Vec::with_capacity(n);
        for (dst, &src) in order.iter().enumerate() {
            let sigma = norms[src];
            s.push(sigma);
            if sigma > 0.0 {
                u.set_column(dst, &(w.column(src) / sigma));
            }
            vs.set_column(dst, &v.column(src));
        }
        Svd {
            u,
            singular_values: s,
            v: vs,
            sweeps,
            converged,
        }
    }

    /// `Σ f(s_i) u_i v_iᵀ`, skipping terms where `f` returns zero.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.u.nrows(), self.v.nrows());
        for (k, &s) in self.singular_values.iter().enumerate() {
            let g = f(s);
            if g != 0.0 {
                out.ger(g, &self.u.column(k), &self.v.column(k), 1.0);
            }
        }
        out
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values
            .iter()
            .filter(|&&s| s > rel_tol * top && s > 0.0)
            .count()
    }
}

/// Moore-Penrose pseudo-inverse, discarding singular values below
/// `rel_tol · s_max`.
pub fn pseudo_inverse(a: &DenseMatrix, rel_tol: f64) -> DenseMatrix {
    let svd = Svd::new(a);
    let top = svd.singular_values.first().copied().unwrap_or(0.0);
    let mut out = DenseMatrix::zeros(a.ncols(), a.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > rel_tol * top && s > 0.0 {
            out.ger(1.0 / s, &svd.v.column(k), &svd.u.column(k), 1.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn reconstructs_tall_and_wide() {
        for (m, n) in [(6, 4), (4, 6), (5, 5), (1, 3), (3, 1)] {
            let a = random(m, n, (m * 10 + n) as u64);
            let svd = Svd::new(&a);
            assert!(svd.converged);
            let back = svd.reconstruct_with(|s| s);
            assert!((back - &a).amax() < 1e-12, "{m}x{n}");
            let r = m.min(n);
            let utu = svd.u.transpose() * &svd.u;
            let vtv = svd.v.transpose() * &svd.v;
            assert!((utu - DenseMatrix::identity(r, r)).amax() < 1e-12);
            assert!((vtv - DenseMatrix::identity(r, r)).amax() < 1e-12);
            assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn singular_values_match_nalgebra() {
        let a = random(7, 5, 3);
        let ours = Svd::new(&a).singular_values;
        let mut theirs: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
        theirs.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_deficient_and_zero() {
        let u = random(5, 1, 1);
        let v = random(1, 4, 2);
        let a = &u * &v;
        let svd = Svd::new(&a);
        assert_eq!(svd.rank(1e-10), 1);
        let z = Svd::new(&DenseMatrix::zeros(3, 2));
        assert_eq!(z.singular_values, vec![0.0, 0.0]);
    }

    #[test]
    fn pseudo_inverse_gives_min_norm_solution() {
        // x1 + x2 = 2 has minimum-norm solution (1, 1).
        let a = DenseMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let x = pseudo_inverse(&a, 1e-12) * DenseVector::from_vec(vec![2.0]);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }
}
