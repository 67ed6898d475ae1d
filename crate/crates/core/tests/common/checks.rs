//! Seeded checks shared by the property tests and the acceptance gate. Each
//! returns the worst error it saw against an independent oracle.

use lapssl::data::synth_union_of_subspaces;
use lapssl::gcn::*;
use lapssl::graph::{build_graph, laplacian, transition_matrix, Graph, LaplacianKind};
use lapssl::labelprop::*;
use lapssl::linalg::{symmetric_eigen, DenseVector};
use lapssl::prox::*;
use lapssl::spectral::{apply_filter, heat_kernel, ApplyMode, FilterSpec};
use lapssl::subspace::*;
use lapssl::weights::*;
use lapssl::DenseMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::random_matrix;

/// Connected weighted graph: a ring plus random chords.
pub fn random_connected_graph(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, (i + 1) % n, rng.random_range(0.5..2.0))).collect();
    for _ in 0..n {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.push((a, b, rng.random_range(0.1..2.0)));
        }
    }
    build_graph(n, &edges, false).unwrap()
}

pub fn cycle(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    build_graph(n, &edges, false).unwrap()
}

fn row_stochastic(g: &Graph) -> WeightMatrix {
    WeightMatrix {
        w: transition_matrix(g, 0.0).unwrap(),
        row_stochastic: true,
    }
}

/// Labelled mask with at least one labelled and one unlabelled node.
fn random_mask(n: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let labelled = rng.random_range(1..n);
    let mut mask = vec![false; n];
    order[..labelled].iter().for_each(|&i| mask[i] = true);
    mask
}

pub fn lp_iterate_vs_closed_form(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(5..25);
    let w = row_stochastic(&random_connected_graph(n, seed));
    let classes = rng.random_range(2..5);
    let mask = random_mask(n, &mut rng);
    let labels: Vec<Option<usize>> = mask.iter().map(|&m| m.then(|| rng.random_range(0..classes))).collect();
    let y = LabelMatrix::from_labels(&labels, classes).unwrap();
    let alpha = rng.random_range(0.05..0.95);
    let (iter, report) = lp_iterate(&w, &y, alpha, 1e-14, 100_000).unwrap();
    assert!(report.converged);
    let closed = lp_closed_form(&w, &y, alpha).unwrap();
    (iter - closed).amax()
}

pub fn harmonic_vs_crf(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4..25);
    let w = row_stochastic(&random_connected_graph(n, seed));
    let mask = random_mask(n, &mut rng);
    let labelled = mask.iter().filter(|&&m| m).count();
    let y_l = random_matrix(labelled, 2, seed ^ 1);
    let harmonic = harmonic_solution(&w, &mask, &y_l).unwrap();
    let crf = crf_expectation(&PartitionedPrecision::from_weights(&w, &mask).unwrap(), &y_l).unwrap();
    (harmonic - crf).amax()
}

/// Solves the equality-constrained QP `min ½wᵀGw s.t. eᵀw = 1` through its
/// KKT system.
fn kkt_weights(g: &DenseMatrix) -> DenseVector {
    let k = g.nrows();
    let mut kkt = DenseMatrix::zeros(k + 1, k + 1);
    kkt.view_mut((0, 0), (k, k)).copy_from(g);
    for j in 0..k {
        kkt[(j, k)] = 1.0;
        kkt[(k, j)] = 1.0;
    }
    let mut rhs = DenseVector::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = kkt.lu().solve(&rhs).unwrap();
    sol.rows(0, k).into_owned()
}

pub fn lle_vs_kkt(seed: u64) -> f64 {
    let x = random_matrix(12, 8, seed);
    let nbrs = NeighborhoodMap::knn(&x, 5).unwrap();
    let w = lle_weights_closed_form(&x, &nbrs, DEFAULT_GRAM_REGULARIZATION).unwrap();
    let mut worst = 0.0_f64;
    for i in 0..12 {
        let list = nbrs.neighbors(i);
        let oracle = kkt_weights(&local_gram(&x, i, list));
        for (c, &j) in list.iter().enumerate() {
            worst = worst.max((w.w.get(i, j) - oracle[c]).abs());
        }
    }
    worst
}

/// A node close to a convex combination of its neighbours, so the closed-form
/// weights are strictly positive. Returns the local Gram matrix.
fn interior_gram(seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let k = rng.random_range(3..6);
        let nbrs = random_matrix(k, 8, rng.random());
        let mix: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..1.5)).collect();
        let total: f64 = mix.iter().sum();
        let point = DenseMatrix::from_fn(1, 8, |_, d| {
            (0..k).map(|j| mix[j] / total * nbrs[(j, d)]).sum::<f64>() + rng.random_range(-0.05..0.05)
        });
        let mut x = point;
        x = x.insert_rows(1, k, 0.0);
        x.view_mut((1, 0), (k, 8)).copy_from(&nbrs);
        let list: Vec<usize> = (1..=k).collect();
        let g = local_gram(&x, 0, &list);
        if lle_row_weights(&g, DEFAULT_GRAM_REGULARIZATION).unwrap().min() > 0.05 {
            return g;
        }
    }
}

pub fn nmf_vs_closed_form(seed: u64) -> f64 {
    let g = interior_gram(seed);
    let closed = lle_row_weights(&g, DEFAULT_GRAM_REGULARIZATION).unwrap();
    let mu = g.trace() / g.nrows() as f64;
    let (nmf, _) = nmf_row_weights(&g, mu, 200_000, 1e-15);
    (nmf - closed).amax()
}

pub fn ar_iterative_vs_direct(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4..30);
    let g = random_connected_graph(n, seed);
    let eta = rng.random_range(0.2..3.0);
    let gamma = rng.random_range(0.0..2.0);
    let laplacian = if rng.random::<bool>() {
        LaplacianKind::sym_normalized(gamma)
    } else {
        LaplacianKind::random_walk(gamma)
    };
    let spec = FilterSpec::auto_regressive(eta).with_laplacian(laplacian);
    let x = random_matrix(n, 3, seed ^ 7);
    let (direct, _) = apply_filter(&g, &spec, &x, ApplyMode::Direct).unwrap();
    let (iter, _) = apply_filter(&g, &spec, &x, ApplyMode::Iterative { steps: Some(200) }).unwrap();
    (direct - iter).amax()
}

pub fn heat_semigroup(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_connected_graph(6, seed);
    let l = laplacian(&g, LaplacianKind::unnormalized()).unwrap();
    let (s, t) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
    let prod = heat_kernel(&l, s).unwrap() * heat_kernel(&l, t).unwrap();
    (prod - heat_kernel(&l, s + t).unwrap()).amax()
}

/// Distance of the normalized-Laplacian spectrum from `[0, 2]`; for cycles
/// also the gap between the top eigenvalue and 2 (even) or its absence (odd).
pub fn normalized_spectrum_violation(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..30);
    let mut worst = 0.0_f64;
    for (g, gamma) in [(random_connected_graph(n, seed), rng.random_range(0.0..1.0)), (cycle(n), 0.0)] {
        let l = laplacian(&g, LaplacianKind::sym_normalized(gamma)).unwrap().to_dense();
        let (values, _) = symmetric_eigen(&l).unwrap();
        for v in &values {
            worst = worst.max(-v).max(v - 2.0);
        }
        if gamma == 0.0 && g == cycle(n) {
            let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if n % 2 == 0 {
                worst = worst.max((top - 2.0).abs());
            } else if top > 2.0 - 1e-6 {
                worst = worst.max(1.0);
            }
        }
    }
    worst
}

fn col(v: &[f64]) -> DenseMatrix {
    DenseMatrix::from_column_slice(v.len(), 1, v)
}

/// Worst distance of ista, fista and ADMM from the minimizer `(1.5, 0)` of
/// `‖x − (2, 0.1)‖² + ‖x‖₁`.
pub fn analytic_lasso_error() -> f64 {
    let prob = ProxProblem::new(DenseMatrix::identity(2, 2), col(&[2.0, 0.1]), Penalty::L1(1.0)).unwrap();
    let x0 = DenseMatrix::zeros(2, 1);
    let target = col(&[1.5, 0.0]);
    let (xi, _) = ista(&prob, &x0, 10_000, 1e-12).unwrap();
    let (xf, _) = fista(&prob, &x0, 10_000, 1e-12).unwrap();
    let admm = admm_lasso(&DenseMatrix::identity(2, 2), &col(&[2.0, 0.1]), 1.0, 1.0, 10_000, 1e-10).unwrap();
    [xi, xf, admm.x].iter().map(|x| (x - &target).amax()).fold(0.0, f64::max)
}

/// Least-squares slope of `log(F(x_k) − F*)` against `log k` for FISTA on a
/// 30×50 LASSO, over `k ∈ [10, 200]`. `F*` comes from a long ADMM run.
pub fn fista_rate_slope() -> f64 {
    let a = random_matrix(30, 50, 21);
    let b = random_matrix(30, 1, 22);
    let lam = 0.5;
    let prob = ProxProblem::new(a.clone(), b.clone(), Penalty::L1(lam)).unwrap();
    let best = admm_lasso(&a, &b, lam, 1.0, 200_000, 1e-13).unwrap();
    let f_star = prob.objective(&best.z);
    let (_, report) = fista(&prob, &DenseMatrix::zeros(50, 1), 200, 0.0).unwrap();
    let points: Vec<(f64, f64)> = (10..=200)
        .map(|k| ((k as f64).ln(), (report.objective_history[k - 1] - f_star).max(1e-300).ln()))
        .collect();
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Largest amount by which a random perturbation of a prox output lowers
/// `½‖p − v‖² + λP(p)` (zero at an exact minimizer).
pub fn prox_optimality_violation(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_matrix(5, 4, seed) * 3.0;
    let lam = rng.random_range(0.1..2.0);
    let mut worst = 0.0_f64;
    for penalty in [Penalty::L1(lam), Penalty::Nuclear(lam), Penalty::L21(lam)] {
        let p = penalty.prox(&v, 1.0).unwrap();
        let f = |x: &DenseMatrix| 0.5 * (x - &v).norm_squared() + penalty.value(x);
        let base = f(&p);
        for trial in 0..50 {
            let scale = 10f64.powi(-(trial % 5));
            let q = &p + random_matrix(5, 4, seed * 1000 + trial as u64) * scale;
            worst = worst.max(base - f(&q));
        }
    }
    let scalar_lam = rng.random_range(0.0..2.0);
    for _ in 0..50 {
        let x = rng.random_range(-4.0..4.0);
        let p = soft_threshold(x, scalar_lam);
        let f = |y: f64| 0.5 * (y - x) * (y - x) + scalar_lam * y.abs();
        for d in [1e-6, 1e-3, 0.1, 1.0] {
            worst = worst.max(f(p) - f(p + d)).max(f(p) - f(p - d));
        }
    }
    worst
}

/// Worst relative error between analytic and central-difference GCN
/// gradients, over several operators and both decay scopes.
pub fn gcn_gradient_error() -> f64 {
    let g = build_graph(
        6,
        &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (2, 3, 0.5), (3, 4, 1.0), (4, 5, 2.0), (5, 3, 1.0)],
        false,
    )
    .unwrap();
    let specs = [
        (FilterSpec::renormalized(1), ApplyMode::Direct),
        (FilterSpec::renormalized(2), ApplyMode::Direct),
        (FilterSpec::residual(0.66), ApplyMode::Direct),
        (FilterSpec::auto_regressive(2.0), ApplyMode::Direct),
        (
            FilterSpec::auto_regressive(1.5).with_laplacian(LaplacianKind::random_walk(1.0)),
            ApplyMode::Direct,
        ),
        (FilterSpec::auto_regressive(0.5), ApplyMode::Iterative { steps: Some(40) }),
    ];
    let x = random_matrix(6, 4, 1);
    let labels = [0, 1, 2, 0, 1, 2];
    let y = DenseMatrix::from_fn(6, 3, |i, k| f64::from(u8::from(labels[i] == k)));
    let mask = [true, false, true, true, false, true];
    let mut worst = 0.0_f64;
    for scope in [DecayScope::FirstLayer, DecayScope::AllLayers] {
        let config = TrainConfig {
            weight_decay: 0.01,
            decay_scope: scope,
            ..TrainConfig::default()
        };
        for (spec, mode) in &specs {
            let p = propagation_matrix(&g, spec, *mode).unwrap();
            let mut model = GcnModel::glorot(4, 5, 3, *spec, 7);
            // Keep pre-activations away from the ReLU kink.
            model.theta1 = random_matrix(4, 5, 11) * 2.0;
            let grads = gcn_loss_and_grads(&model, &p, &x, &y, &mask, &config).unwrap();
            let eps = 1e-4;
            for layer in 0..2 {
                let shape = if layer == 0 { model.theta1.shape() } else { model.theta2.shape() };
                for r in 0..shape.0 {
                    for c in 0..shape.1 {
                        let loss_at = |delta: f64| {
                            let mut m = model.clone();
                            let t = if layer == 0 { &mut m.theta1 } else { &mut m.theta2 };
                            t[(r, c)] += delta;
                            gcn_loss_and_grads(&m, &p, &x, &y, &mask, &config).unwrap().loss
                        };
                        let numeric = (loss_at(eps) - loss_at(-eps)) / (2.0 * eps);
                        let analytic = if layer == 0 { grads.d_theta1[(r, c)] } else { grads.d_theta2[(r, c)] };
                        let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6);
                        worst = worst.max(rel);
                    }
                }
            }
        }
    }
    worst
}

/// Relative error of RPCA on a 20×20 rank-2 matrix with 5% ±1 spikes.
pub fn rpca_spike_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let low = random_matrix(20, 2, seed) * random_matrix(2, 20, seed + 100);
    let mut cells: Vec<usize> = (0..400).collect();
    cells.shuffle(&mut rng);
    let mut m = low.clone();
    for &c in &cells[..20] {
        m[(c % 20, c / 20)] += if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    let out = rpca(&m, rpca_default_rho(&m), 1e-9, 5000).unwrap();
    (&out.low_rank - &low).norm() / low.norm()
}

/// Relative error completing a 5×5 rank-1 matrix with five hidden entries.
/// Nuclear-norm minimization does not recover every such instance (seed 6
/// has a completion of smaller nuclear norm than the truth).
pub fn completion_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..5).map(|_| rng.random_range(0.5..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let v: Vec<f64> = (0..5).map(|_| rng.random_range(0.5..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let truth = DenseMatrix::from_fn(5, 5, |i, j| u[i] * v[j]);
    // One hidden entry per row and column, in random positions.
    let mut cols: Vec<usize> = (0..5).collect();
    cols.shuffle(&mut rng);
    let hidden: Vec<usize> = (0..5).map(|i| i * 5 + cols[i]).collect();
    let observed: Vec<_> = (0..25)
        .filter(|c| !hidden.contains(c))
        .map(|c| (c / 5, c % 5, truth[(c / 5, c % 5)]))
        .collect();
    let (m, _) = matrix_complete(&observed, (5, 5), LambdaSchedule::default(), 1e-8, 20_000).unwrap();
    (m - &truth).norm() / truth.norm()
}

/// Clustering accuracy on two independent 2-D subspaces of ℝ⁶, 20 points each.
pub fn subspace_clustering_accuracy(method: ClusterMethod, seed: u64) -> f64 {
    let (x, truth) = synth_union_of_subspaces(6, &[2, 2], 20, 0.0, false, seed).unwrap();
    let pred = subspace_cluster(&x, method, 2, seed).unwrap();
    clustering_accuracy(&pred, &truth).unwrap()
}

pub fn lrr_method() -> ClusterMethod {
    ClusterMethod::Lrr(LrrParams::default())
}

pub fn ssc_method() -> ClusterMethod {
    ClusterMethod::Ssc {
        lambda: 0.01,
        tol: 1e-8,
        max_iter: 5000,
    }
}
