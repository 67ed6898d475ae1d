use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use lapssl::data::{self, Dataset, MetricsRecord, SplitSpec};
use lapssl::gcn::{self, DecayScope, Net1Config, Net1Weights, Optimizer, TrainConfig};
use lapssl::graph::{self, Graph, LaplacianKind};
use lapssl::labelprop::{self, LabelMatrix, PartitionedPrecision};
use lapssl::spectral::{self, ApplyMode, FilterSpec};
use lapssl::subspace::{self, ClusterMethod, LambdaSchedule, LrrParams};
use lapssl::weights::WeightMatrix;
use lapssl::{DenseMatrix, SolverReport};

use crate::args::*;
use crate::output::{kv_table, write_json, Cell, Table};
use crate::Failure;

pub const DATA_DIR_VAR: &str = "LAPSSL_DATA_DIR";

struct Ctx {
    seed: u64,
    out: Option<PathBuf>,
}

impl Ctx {
    fn emit<T: Serialize>(&self, value: &T) -> Result<(), Failure> {
        write_json(value, self.out.as_deref())
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    if cli.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let ctx = Ctx {
        seed: cli.seed,
        out: cli.out,
    };
    match cli.command {
        Command::SpectralStats(a) => spectral_stats(&ctx, a),
        Command::Filter(a) => filter(&ctx, a),
        Command::Labelprop(a) => labelprop_cmd(&ctx, a),
        Command::Crf(a) => crf(&ctx, a),
        Command::TrainGcn(a) => train_gcn(&ctx, a),
        Command::EtaSweep(a) => eta_sweep(&ctx, a),
        Command::Net1(a) => net1(&ctx, a),
        Command::Lrr(a) => lrr(&ctx, a),
        Command::Ssc(a) => ssc(&ctx, a),
        Command::Rpca(a) => rpca(&ctx, a),
        Command::Complete(a) => complete(&ctx, a),
        Command::Cluster(a) => cluster(&ctx, a),
        Command::Synth(a) => synth(&ctx, a),
    }
}

fn data_path(flag: &Option<PathBuf>, file: &str, name: &str) -> Result<PathBuf, Failure> {
    if let Some(p) = flag {
        return Ok(p.clone());
    }
    match std::env::var_os(DATA_DIR_VAR) {
        Some(dir) => Ok(Path::new(&dir).join(file)),
        None => Err(Failure::Usage(format!(
            "no dataset given: pass --{name} or set {DATA_DIR_VAR}"
        ))),
    }
}

fn load_dataset(a: &DataArgs) -> Result<Dataset, Failure> {
    let content = data_path(&a.content, "cora.content", "content")?;
    let cites = data_path(&a.cites, "cora.cites", "cites")?;
    let mut ds = data::load_cora(&content, &cites)
        .map_err(|e| Failure::Runtime(format!("loading {} / {}: {e}", content.display(), cites.display())))?;
    let spec = SplitSpec {
        per_class_train: a.per_class_train,
        val: a.val,
        test: a.test,
        seed: a.split_seed,
    };
    let split = data::make_split(&ds.labels, ds.class_count(), &spec)?;
    ds.set_split(split);
    if a.row_normalize {
        ds.row_normalize();
    }
    Ok(ds)
}

/// Graph from --edges, or the dataset graph when no edge list is given.
fn load_graph(a: &GraphArgs) -> Result<(Graph, Option<Dataset>), Failure> {
    match &a.edges {
        Some(path) => Ok((graph::read_edge_list(path, a.nodes, false)?, None)),
        None => {
            let ds = load_dataset(&a.data)?;
            Ok((ds.graph.clone(), Some(ds)))
        }
    }
}

fn filter_spec(a: &FilterSpecArgs) -> Result<(FilterSpec, ApplyMode), Failure> {
    let mut spec = match a.filter {
        FilterName::Ar => FilterSpec::auto_regressive(a.eta),
        FilterName::Residual => FilterSpec::residual(a.eta),
        FilterName::Rnm => FilterSpec::renormalized(a.k),
    };
    spec = spec.with_laplacian(laplacian_kind(a.laplacian, a.gamma));
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let mode = match a.mode {
        ModeName::Direct => ApplyMode::Direct,
        ModeName::Iterative => ApplyMode::Iterative { steps: a.steps },
    };
    Ok((spec, mode))
}

fn laplacian_kind(name: LaplacianName, gamma: f64) -> LaplacianKind {
    match name {
        LaplacianName::Sym => LaplacianKind::sym_normalized(gamma),
        LaplacianName::Rw => LaplacianKind::random_walk(gamma),
        LaplacianName::Unnormalized => LaplacianKind::unnormalized(),
    }
}

fn train_config(a: &TrainArgs, epochs: usize, seed: u64) -> Result<TrainConfig, Failure> {
    let config = TrainConfig {
        lr: a.lr,
        weight_decay: a.weight_decay,
        decay_scope: match a.decay_scope {
            DecayScopeName::First => DecayScope::FirstLayer,
            DecayScopeName::All => DecayScope::AllLayers,
        },
        dropout: a.dropout,
        hidden: a.hidden,
        epochs,
        seed,
        optimizer: match a.optimizer {
            OptimizerName::Adam => Optimizer::Adam,
            OptimizerName::Sgd => Optimizer::Sgd,
        },
    };
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(config)
}

fn to_object(value: Value) -> serde_json::Map<String, Value> {
    match value {
        Value::Object(m) => m,
        _ => serde_json::Map::new(),
    }
}

fn rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn report_json(r: &SolverReport) -> Value {
    json!({
        "iterations": r.iterations,
        "converged": r.converged,
        "tolerance": r.tolerance_used,
        "final_objective": r.final_objective(),
        "final_residual": r.final_residual(),
    })
}

fn read_matrix(path: &Path) -> Result<DenseMatrix, Failure> {
    data::read_dense_csv(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

/// Lines `node value` with whitespace separation; blank lines and `#`
/// comments are skipped.
fn read_pairs<T: std::str::FromStr>(path: &Path) -> Result<Vec<(usize, T)>, Failure>
where
    T::Err: std::fmt::Display,
{
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| Failure::Runtime(format!("{} line {}: {msg}", path.display(), lineno + 1));
        let mut it = line.split_whitespace();
        let (Some(node), Some(value), None) = (it.next(), it.next(), it.next()) else {
            return Err(bad("expected `node value`".into()));
        };
        let node = node.parse::<usize>().map_err(|e| bad(format!("bad node {node:?}: {e}")))?;
        let value = value.parse::<T>().map_err(|e| bad(format!("bad value {value:?}: {e}")))?;
        out.push((node, value));
    }
    Ok(out)
}

fn spectral_stats(ctx: &Ctx, a: SpectralStatsArgs) -> Result<(), Failure> {
    let (g, ds) = load_graph(&a.graph)?;
    let stats = graph::degree_stats(&g);
    let (pair, report) = spectral::lambda_max_measured(&g, a.gamma, a.tol, a.max_iter)?;
    let estimate = spectral::lambda_max_estimate(&stats, a.gamma);
    let rel_gap = (estimate - pair.value).abs() / pair.value;
    let mut pairs: Vec<(&str, Cell)> = vec![("nodes", g.node_count().into())];
    if let Some(ds) = &ds {
        pairs.push(("features", ds.feature_dim().into()));
        pairs.push(("classes", ds.class_count().into()));
        pairs.push(("labeled", ds.train.iter().filter(|&&t| t).count().into()));
    }
    pairs.extend([
        ("edge_end_count", stats.edge_end_count.into()),
        ("mean_degree", stats.mean_degree.into()),
        ("max_degree", stats.max_degree.into()),
        ("min_degree", stats.min_degree.into()),
        ("gamma", a.gamma.into()),
        ("lambda_max_measured", pair.value.into()),
        ("lambda_max_estimate", estimate.into()),
        ("relative_gap", rel_gap.into()),
    ]);
    kv_table(pairs).print();
    let mut out = json!({
        "nodes": g.node_count(),
        "edge_end_count": stats.edge_end_count,
        "mean_degree": stats.mean_degree,
        "max_degree": stats.max_degree,
        "min_degree": stats.min_degree,
        "gamma": a.gamma,
        "lambda_max_measured": pair.value,
        "lambda_max_estimate": estimate,
        "relative_gap": rel_gap,
        "solver": report_json(&report),
        "seed": ctx.seed,
    });
    if let Some(ds) = &ds {
        out["features"] = json!(ds.feature_dim());
        out["classes"] = json!(ds.class_count());
        out["labeled"] = json!(ds.train.iter().filter(|&&t| t).count());
    }
    ctx.emit(&out)
}

fn filter(ctx: &Ctx, a: FilterArgs) -> Result<(), Failure> {
    let (g, ds) = load_graph(&a.graph)?;
    let x = match (&a.features, &ds) {
        (Some(path), _) => read_matrix(path)?,
        (None, Some(ds)) => ds.features.clone(),
        (None, None) => return Err(Failure::Usage("--features is required with --edges".into())),
    };
    let (spec, mode) = filter_spec(&a.spec)?;
    let (y, report) = spectral::apply_filter(&g, &spec, &x, mode)?;
    if let Some(path) = &a.csv {
        data::write_dense_csv(&y, path)?;
    }
    kv_table(vec![
        ("rows", y.nrows().into()),
        ("cols", y.ncols().into()),
        ("output_norm", y.norm().into()),
        ("iterations", report.iterations.into()),
    ])
    .print();
    ctx.emit(&json!({
        "spec": spec,
        "rows": y.nrows(),
        "cols": y.ncols(),
        "output_norm": y.norm(),
        "solver": report_json(&report),
        "seed": ctx.seed,
    }))
}

fn seed_labels(labels: &Option<PathBuf>, n: usize, ds: &Option<Dataset>) -> Result<LabelMatrix, Failure> {
    match (labels, ds) {
        (Some(path), _) => {
            let pairs: Vec<(usize, usize)> = read_pairs(path)?;
            let classes = pairs.iter().map(|&(_, c)| c + 1).max().unwrap_or(0);
            let mut all = vec![None; n];
            for (i, c) in pairs {
                if i >= n {
                    return Err(Failure::Runtime(format!("label for node {i} but the graph has {n} nodes")));
                }
                all[i] = Some(c);
            }
            Ok(LabelMatrix::from_labels(&all, classes)?)
        }
        (None, Some(ds)) => Ok(ds.train_labels()?),
        (None, None) => Err(Failure::Usage("--labels is required with --edges".into())),
    }
}

fn labelprop_cmd(ctx: &Ctx, a: LabelpropArgs) -> Result<(), Failure> {
    let (g, ds) = load_graph(&a.graph)?;
    let n = g.node_count();
    let y = seed_labels(&a.labels, n, &ds)?;
    let w = WeightMatrix {
        w: graph::transition_matrix(&g, 0.0)?,
        row_stochastic: true,
    };
    let (scores, report) = match a.method {
        LpMethod::Iterate => {
            let (f, r) = labelprop::lp_iterate(&w, &y, a.alpha, a.tol, a.max_iter)?;
            (f, Some(r))
        }
        LpMethod::Closed => (labelprop::lp_closed_form(&w, &y, a.alpha)?, None),
        LpMethod::Harmonic => {
            let mask = y.labeled_mask().to_vec();
            let y_l = DenseMatrix::from_fn(mask.iter().filter(|&&m| m).count(), y.class_count(), |r, c| {
                let i = mask.iter().enumerate().filter(|(_, &m)| m).nth(r).map(|(i, _)| i).unwrap_or(0);
                y.matrix()[(i, c)]
            });
            let f_u = labelprop::harmonic_solution(&w, &mask, &y_l)?;
            let mut f = y.matrix().clone();
            for (r, i) in (0..n).filter(|&i| !mask[i]).enumerate() {
                f.set_row(i, &f_u.row(r));
            }
            (f, None)
        }
    };
    let pred = labelprop::hard_labels(&scores);
    let mut pairs: Vec<(&str, Cell)> = vec![("nodes", n.into()), ("classes", y.class_count().into())];
    let mut out = json!({ "predictions": pred, "seed": ctx.seed });
    if let Some(ds) = &ds {
        let acc = gcn::masked_accuracy(&pred, &ds.labels, &ds.test);
        pairs.push(("test_accuracy", acc.into()));
        out["test_accuracy"] = json!(acc);
    }
    if let Some(r) = &report {
        pairs.push(("iterations", r.iterations.into()));
        out["solver"] = report_json(r);
    }
    kv_table(pairs).print();
    ctx.emit(&out)
}

fn crf(ctx: &Ctx, a: CrfArgs) -> Result<(), Failure> {
    let (g, _) = load_graph(&a.graph)?;
    let n = g.node_count();
    let values: Vec<(usize, f64)> = read_pairs(&a.values)?;
    let mut mask = vec![false; n];
    let mut known = vec![0.0; n];
    for &(i, v) in &values {
        if i >= n {
            return Err(Failure::Runtime(format!("value for node {i} but the graph has {n} nodes")));
        }
        mask[i] = true;
        known[i] = v;
    }
    let w = WeightMatrix {
        w: graph::transition_matrix(&g, 0.0)?,
        row_stochastic: true,
    };
    let p = PartitionedPrecision::from_weights(&w, &mask)?;
    let y = DenseMatrix::from_fn(p.observed().len(), 1, |r, _| known[p.observed()[r]]);
    let x = labelprop::crf_expectation(&p, &y)?;
    let mut full = known.clone();
    for (r, &i) in p.latent().iter().enumerate() {
        full[i] = x[(r, 0)];
    }
    let mut t = Table::new(&["node", "value", "observed"]);
    for (i, v) in full.iter().enumerate() {
        t.row(vec![i.into(), (*v).into(), (if mask[i] { "yes" } else { "no" }).into()]);
    }
    t.print();
    ctx.emit(&json!({ "values": full, "observed": mask, "seed": ctx.seed }))
}

fn metrics_table(rows: &[(&str, &gcn::Accuracy)]) {
    let mut t = Table::new(&["model", "train", "val", "test"]);
    for (name, acc) in rows {
        t.row(vec![(*name).into(), acc.train.into(), acc.val.into(), acc.test.into()]);
    }
    t.print();
}

fn train_gcn(ctx: &Ctx, a: TrainGcnArgs) -> Result<(), Failure> {
    let ds = load_dataset(&a.data)?;
    let (spec, mode) = filter_spec(&a.spec)?;
    let config = train_config(&a.train, a.epochs, ctx.seed)?;
    let p = gcn::propagation_matrix(&ds.graph, &spec, mode)?;
    let (model, metrics) = gcn::train_gcn_with(&ds, &spec, &p, &config)?;
    if let Some(path) = &a.checkpoint {
        gcn::save_checkpoint(&model, path)?;
    }
    metrics_table(&[("gcn", &metrics.accuracy)]);
    let record = MetricsRecord {
        accuracy: metrics.accuracy,
        loss_curve: metrics.loss_curve,
        config: to_object(json!({ "train": config, "filter": spec, "split_seed": a.data.split_seed })),
        seed: ctx.seed,
        best_epoch: metrics.best_epoch,
    };
    ctx.emit(&record)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.is_empty() {
        f64::NAN
    } else if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn eta_sweep(ctx: &Ctx, a: EtaSweepArgs) -> Result<(), Failure> {
    if a.etas.is_empty() || a.seeds == 0 {
        return Err(Failure::Usage("need at least one η and one seed".into()));
    }
    let ds = load_dataset(&a.data)?;
    let laplacian = laplacian_kind(a.laplacian, a.gamma);
    let mut table = Table::new(&["eta", "median_test", "min_test", "max_test"]);
    let mut results = Vec::new();
    for &eta in &a.etas {
        let spec = match a.filter {
            SweepFilter::Ar => FilterSpec::auto_regressive(eta),
            SweepFilter::Residual => FilterSpec::residual(eta),
        }
        .with_laplacian(laplacian);
        spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        let p = gcn::default_propagation(&ds.graph, &spec)?;
        let mut accs = Vec::new();
        for s in 0..a.seeds {
            let config = train_config(&a.train, a.epochs, ctx.seed + s)?;
            let (_, metrics) = gcn::train_gcn_with(&ds, &spec, &p, &config)?;
            accs.push(metrics.accuracy.test);
        }
        let med = median(&accs);
        let lo = accs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = accs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        table.row(vec![eta.into(), med.into(), lo.into(), hi.into()]);
        results.push(json!({ "eta": eta, "test_accuracy": accs, "median": med }));
    }
    table.print();
    ctx.emit(&json!({
        "filter": match a.filter { SweepFilter::Ar => "ar", SweepFilter::Residual => "residual" },
        "laplacian": laplacian,
        "epochs": a.epochs,
        "seeds": (0..a.seeds).map(|s| ctx.seed + s).collect::<Vec<_>>(),
        "results": results,
    }))
}

fn net1(ctx: &Ctx, a: Net1Args) -> Result<(), Failure> {
    let ds = load_dataset(&a.data)?;
    let (spec, mode) = filter_spec(&a.spec)?;
    let config = train_config(&a.train, a.epochs, ctx.seed)?;
    let net1_config = Net1Config {
        knn_k: a.knn_k,
        lp_alpha: a.lp_alpha,
        weights: match a.weights {
            WeightsName::Nonnegative => Net1Weights::Nonnegative,
            WeightsName::ClosedForm => Net1Weights::ClosedForm,
        },
        class_mass_normalization: !a.no_class_mass_norm,
        ..Net1Config::default()
    };
    let p = gcn::propagation_matrix(&ds.graph, &spec, mode)?;
    let (model, metrics) = gcn::train_gcn_with(&ds, &spec, &p, &config)?;
    let out = gcn::net1_from_model(&ds, &model, &p, &net1_config)?;
    metrics_table(&[("gcn", &metrics.accuracy), ("net1", &out.accuracy)]);
    let record = MetricsRecord {
        accuracy: out.accuracy,
        loss_curve: metrics.loss_curve,
        config: to_object(json!({
            "train": config,
            "filter": spec,
            "net1": net1_config,
            "gcn_accuracy": metrics.accuracy,
            "split_seed": a.data.split_seed,
        })),
        seed: ctx.seed,
        best_epoch: metrics.best_epoch,
    };
    ctx.emit(&record)
}

fn lrr(ctx: &Ctx, a: LrrArgs) -> Result<(), Failure> {
    let x = read_matrix(&a.input)?;
    let params = LrrParams {
        lambda: a.lambda,
        tol: a.tol,
        max_iter: a.max_iter,
        ..LrrParams::default()
    };
    let r = subspace::lrr_alm(&x, &params)?;
    kv_table(vec![
        ("samples", x.ncols().into()),
        ("iterations", r.report.iterations.into()),
        ("converged", r.report.converged.to_string().into()),
        ("nuclear_norm_z", lapssl::linalg::nuclear_norm(&r.z).into()),
        ("l21_norm_e", lapssl::linalg::l21_norm(&r.e).into()),
    ])
    .print();
    ctx.emit(&json!({ "z": rows(&r.z), "e": rows(&r.e), "solver": report_json(&r.report), "seed": ctx.seed }))
}

fn ssc(ctx: &Ctx, a: SscArgs) -> Result<(), Failure> {
    let x = read_matrix(&a.input)?;
    let (z, report) = subspace::ssc(&x, a.lambda, a.tol, a.max_iter)?;
    kv_table(vec![
        ("samples", x.ncols().into()),
        ("iterations", report.iterations.into()),
        ("converged", report.converged.to_string().into()),
        ("l1_norm_z", lapssl::linalg::l1_norm(&z).into()),
    ])
    .print();
    ctx.emit(&json!({ "z": rows(&z), "solver": report_json(&report), "seed": ctx.seed }))
}

fn rpca(ctx: &Ctx, a: RpcaArgs) -> Result<(), Failure> {
    let m = read_matrix(&a.input)?;
    let rho = a.rho.unwrap_or_else(|| subspace::rpca_default_rho(&m));
    let r = subspace::rpca(&m, rho, a.tol, a.max_iter)?;
    kv_table(vec![
        ("rho", rho.into()),
        ("iterations", r.report.iterations.into()),
        ("converged", r.report.converged.to_string().into()),
        ("nuclear_norm_l", lapssl::linalg::nuclear_norm(&r.low_rank).into()),
        ("l1_norm_s", lapssl::linalg::l1_norm(&r.sparse).into()),
    ])
    .print();
    ctx.emit(&json!({
        "rho": rho,
        "low_rank": rows(&r.low_rank),
        "sparse": rows(&r.sparse),
        "solver": report_json(&r.report),
        "seed": ctx.seed,
    }))
}

fn complete(ctx: &Ctx, a: CompleteArgs) -> Result<(), Failure> {
    let m = read_matrix(&a.input)?;
    let mut observed = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v.is_nan() {
                continue;
            }
            observed.push((i, j, v));
        }
    }
    let (x, report) = subspace::matrix_complete(&observed, m.shape(), LambdaSchedule::default(), a.tol, a.max_iter)?;
    if let Some(path) = &a.csv {
        data::write_dense_csv(&x, path)?;
    }
    kv_table(vec![
        ("observed", observed.len().into()),
        ("iterations", report.iterations.into()),
        ("converged", report.converged.to_string().into()),
        ("nuclear_norm", lapssl::linalg::nuclear_norm(&x).into()),
    ])
    .print();
    ctx.emit(&json!({ "completed": rows(&x), "solver": report_json(&report), "seed": ctx.seed }))
}

fn read_labels(path: &Path) -> Result<Vec<usize>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<usize>()
                .map_err(|e| Failure::Runtime(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn cluster(ctx: &Ctx, a: ClusterArgs) -> Result<(), Failure> {
    let x = read_matrix(&a.input)?;
    let method = match a.method {
        ClusterMethodName::Lrr => ClusterMethod::Lrr(LrrParams {
            lambda: a.lambda.unwrap_or(LrrParams::default().lambda),
            ..LrrParams::default()
        }),
        ClusterMethodName::Ssc => ClusterMethod::Ssc {
            lambda: a.lambda.unwrap_or(0.01),
            tol: 1e-8,
            max_iter: 5000,
        },
    };
    let labels = subspace::subspace_cluster(&x, method, a.k, ctx.seed)?;
    let mut pairs: Vec<(&str, Cell)> = vec![("samples", labels.len().into()), ("clusters", a.k.into())];
    let mut out = json!({ "labels": labels, "seed": ctx.seed });
    if let Some(path) = &a.truth {
        let truth = read_labels(path)?;
        let acc = subspace::clustering_accuracy(&labels, &truth)?;
        pairs.push(("accuracy", acc.into()));
        out["accuracy"] = json!(acc);
    }
    kv_table(pairs).print();
    ctx.emit(&out)
}

fn write_labels(labels: &[usize], path: &Path) -> Result<(), Failure> {
    let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn synth(ctx: &Ctx, a: SynthArgs) -> Result<(), Failure> {
    let labels = match a.kind {
        SynthKind::Subspaces => {
            let (x, labels) = data::synth_union_of_subspaces(
                a.dims,
                &a.subspace_dims,
                a.points_per,
                a.noise,
                a.orthogonal,
                ctx.seed,
            )?;
            if let Some(path) = &a.data_out {
                data::write_dense_csv(&x, path)?;
            }
            kv_table(vec![("rows", x.nrows().into()), ("samples", x.ncols().into())]).print();
            labels
        }
        SynthKind::Sbm => {
            let (g, labels) = data::synth_sbm(&a.blocks, a.p_in, a.p_out, ctx.seed)?;
            if let Some(path) = &a.data_out {
                std::fs::write(path, graph::write_edge_list(&g))?;
            }
            kv_table(vec![("nodes", g.node_count().into()), ("edges", g.edges().len().into())]).print();
            labels
        }
    };
    if let Some(path) = &a.labels_out {
        write_labels(&labels, path)?;
    }
    ctx.emit(&json!({ "labels": labels, "seed": ctx.seed }))
}
