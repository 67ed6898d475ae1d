//! Datasets, splits, synthetic generators and result files.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcn::Accuracy;
use crate::graph::{build_graph, Graph};
use crate::labelprop::LabelMatrix;
use crate::linalg::DenseMatrix;

/// Node-classification dataset: features, labels, graph and split masks.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// `n × d`
    pub features: DenseMatrix,
    /// Class index per node.
    pub labels: Vec<usize>,
    pub graph: Graph,
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
    pub class_names: Vec<String>,
    /// Original identifier per node, in node order.
    pub node_ids: Vec<String>,
}

impl Dataset {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn one_hot(&self) -> DenseMatrix {
        let mut y = DenseMatrix::zeros(self.node_count(), self.class_count());
        for (i, &c) in self.labels.iter().enumerate() {
            y[(i, c)] = 1.0;
        }
        y
    }

    /// Label matrix revealing only the training nodes.
    pub fn train_labels(&self) -> Result<LabelMatrix> {
        let labels: Vec<Option<usize>> = self
            .labels
            .iter()
            .zip(&self.train)
            .map(|(&c, &t)| t.then_some(c))
            .collect();
        LabelMatrix::from_labels(&labels, self.class_count())
    }

    pub fn set_split(&mut self, split: Split) {
        self.train = split.train;
        self.val = split.val;
        self.test = split.test;
    }

    /// Scales every nonzero feature row to unit sum.
    pub fn row_normalize(&mut self) {
        for mut row in self.features.row_iter_mut() {
            let s = row.sum();
            if s != 0.0 {
                row /= s;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub per_class_train: usize,
    pub val: usize,
    pub test: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            per_class_train: 20,
            val: 500,
            test: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
}

/// Samples `per_class_train` training nodes from every class, then validation
/// and test nodes from the shuffled remainder.
pub fn make_split(labels: &[usize], classes: usize, spec: &SplitSpec) -> Result<Split> {
    if spec.per_class_train == 0 {
        return Err(Error::param("per_class_train", "must be > 0"));
    }
    let n = labels.len();
    let mut by_class = vec![Vec::new(); classes];
    for (i, &c) in labels.iter().enumerate() {
        if c >= classes {
            return Err(Error::IndexOutOfRange { index: c, n: classes });
        }
        by_class[c].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train = vec![false; n];
    for (c, members) in by_class.iter_mut().enumerate() {
        if members.len() < spec.per_class_train {
            return Err(Error::param(
                "per_class_train",
                format!("class {c} has {} nodes, fewer than {}", members.len(), spec.per_class_train),
            ));
        }
        members.shuffle(&mut rng);
        for &i in &members[..spec.per_class_train] {
            train[i] = true;
        }
    }
    let mut rest: Vec<usize> = (0..n).filter(|&i| !train[i]).collect();
    if spec.val + spec.test > rest.len() {
        return Err(Error::param(
            "val/test",
            format!("{} + {} exceeds the {} nodes left after training", spec.val, spec.test, rest.len()),
        ));
    }
    rest.shuffle(&mut rng);
    let mut val = vec![false; n];
    let mut test = vec![false; n];
    for &i in &rest[..spec.val] {
        val[i] = true;
    }
    for &i in &rest[spec.val..spec.val + spec.test] {
        test[i] = true;
    }
    Ok(Split { train, val, test })
}

struct ContentRow<'a> {
    id: &'a str,
    features: Vec<f64>,
    label: &'a str,
}

fn sort_ids(ids: &mut [&str]) {
    if ids.iter().all(|s| s.parse::<u64>().is_ok()) {
        ids.sort_by_key(|s| s.parse::<u64>().expect("checked numeric"));
    } else {
        ids.sort_unstable();
    }
}

/// Parses Cora-format `content` and `cites` text. Nodes are ordered by
/// ascending id (numerically when all ids are integers), classes by name.
/// Self-citations are dropped; repeated citations add up. The split is the
/// default [`SplitSpec`].
pub fn parse_cora(content: &str, cites: &str) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut width = None;
    for (lineno, line) in content.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 3 {
            return Err(Error::parse(lineno + 1, format!("expected id, features and label, found {} fields", fields.len())));
        }
        let d = fields.len() - 2;
        match width {
            None => width = Some(d),
            Some(w) if w != d => {
                return Err(Error::parse(lineno + 1, format!("expected {} features, found {d}", w)));
            }
            _ => {}
        }
        let features = fields[1..=d]
            .iter()
            .map(|t| match *t {
                "0" => Ok(0.0),
                "1" => Ok(1.0),
                other => Err(Error::parse(lineno + 1, format!("non-binary feature {other:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(ContentRow {
            id: fields[0],
            features,
            label: fields[d + 1],
        });
    }
    let d = width.ok_or_else(|| Error::Format("content file has no rows".into()))?;

    let mut ids: Vec<&str> = rows.iter().map(|r| r.id).collect();
    sort_ids(&mut ids);
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Format(format!("duplicate node id {:?}", w[0])));
    }
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut class_names: Vec<&str> = rows.iter().map(|r| r.label).collect();
    class_names.sort_unstable();
    class_names.dedup();
    let class_index: HashMap<&str, usize> = class_names.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    let n = rows.len();
    let mut features = DenseMatrix::zeros(n, d);
    let mut labels = vec![0; n];
    for row in &rows {
        let i = index[row.id];
        for (j, &v) in row.features.iter().enumerate() {
            features[(i, j)] = v;
        }
        labels[i] = class_index[row.label];
    }

    let mut edges = Vec::new();
    for (lineno, line) in cites.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 2 {
            return Err(Error::parse(lineno + 1, format!("expected 2 fields, found {}", fields.len())));
        }
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| Error::parse(lineno + 1, format!("unknown node id {s:?}")))
        };
        let (a, b) = (lookup(fields[0])?, lookup(fields[1])?);
        if a != b {
            edges.push((a, b, 1.0));
        }
    }
    let graph = build_graph(n, &edges, false)?;
    let classes = class_names.len();
    let split = make_split(&labels, classes, &SplitSpec::default()).unwrap_or(Split {
        train: vec![false; n],
        val: vec![false; n],
        test: vec![false; n],
    });
    let mut dataset = Dataset {
        features,
        labels,
        graph,
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
        class_names: class_names.into_iter().map(String::from).collect(),
        node_ids: ids.into_iter().map(String::from).collect(),
    };
    dataset.set_split(split);
    Ok(dataset)
}

/// Reads `cora.content` and `cora.cites` style files; see [`parse_cora`].
/// When the default split is infeasible for the data the masks are empty.
pub fn load_cora(content_path: impl AsRef<Path>, cites_path: impl AsRef<Path>) -> Result<Dataset> {
    let content = std::fs::read_to_string(content_path)?;
    let cites = std::fs::read_to_string(cites_path)?;
    parse_cora(&content, &cites)
}

/// Random orthonormal `dims × k` basis.
fn orthonormal_basis(dims: usize, k: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let g = DenseMatrix::from_fn(dims, k, |_, _| StandardNormal.sample(rng));
    g.qr().q()
}

/// Points drawn from a union of linear subspaces, one per entry of
/// `subspace_dims`, as the columns of a `dims × N` matrix. Coefficients are
/// uniform on `[−1, 1]`; Gaussian noise of standard deviation `noise_sigma` is
/// added. With `orthogonal` the subspaces are mutually orthogonal.
pub fn synth_union_of_subspaces(
    dims: usize,
    subspace_dims: &[usize],
    points_per: usize,
    noise_sigma: f64,
    orthogonal: bool,
    seed: u64,
) -> Result<(DenseMatrix, Vec<usize>)> {
    if subspace_dims.is_empty() || points_per == 0 {
        return Err(Error::param("subspace_dims", "need at least one subspace and one point"));
    }
    if let Some(&k) = subspace_dims.iter().find(|&&k| k == 0 || k >= dims) {
        return Err(Error::param("subspace_dims", format!("dimension {k} must lie in [1, {dims})")));
    }
    let total: usize = subspace_dims.iter().sum();
    if orthogonal && total > dims {
        return Err(Error::param(
            "subspace_dims",
            format!("{total} orthogonal directions do not fit in {dims} dimensions"),
        ));
    }
    if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
        return Err(Error::param("noise_sigma", "must be finite and >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bases: Vec<DenseMatrix> = if orthogonal {
        let all = orthonormal_basis(dims, total, &mut rng);
        let mut start = 0;
        subspace_dims
            .iter()
            .map(|&k| {
                let b = all.columns(start, k).into_owned();
                start += k;
                b
            })
            .collect()
    } else {
        subspace_dims.iter().map(|&k| orthonormal_basis(dims, k, &mut rng)).collect()
    };
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::param("noise_sigma", e.to_string()))?;
    let n = subspace_dims.len() * points_per;
    let mut x = DenseMatrix::zeros(dims, n);
    let mut labels = Vec::with_capacity(n);
    for (s, basis) in bases.iter().enumerate() {
        for p in 0..points_per {
            let coef = DenseMatrix::from_fn(basis.ncols(), 1, |_, _| rng.random_range(-1.0..=1.0));
            let mut col = basis * coef;
            if noise_sigma > 0.0 {
                col.apply(|v| *v += noise.sample(&mut rng));
            }
            x.set_column(s * points_per + p, &col.column(0));
            labels.push(s);
        }
    }
    Ok((x, labels))
}

/// Stochastic block model: each pair in the same block is joined with
/// probability `p_in`, pairs across blocks with `p_out`. Labels are block
/// indices.
pub fn synth_sbm(block_sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<(Graph, Vec<usize>)> {
    if !(0.0 <= p_out && p_out < p_in && p_in <= 1.0) {
        return Err(Error::param("p_in/p_out", "need 0 <= p_out < p_in <= 1"));
    }
    let labels: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    let n = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if labels[i] == labels[j] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    Ok((build_graph(n, &edges, false)?, labels))
}

/// Contents of a metrics file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsRecord {
    pub accuracy: Accuracy,
    pub loss_curve: Vec<f64>,
    pub config: serde_json::Map<String, serde_json::Value>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_epoch: Option<usize>,
}

pub fn metrics_to_json(record: &MetricsRecord) -> Result<String> {
    Ok(serde_json::to_string_pretty(record)?)
}

pub fn metrics_from_json(text: &str) -> Result<MetricsRecord> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_metrics(record: &MetricsRecord, path: impl AsRef<Path>) -> Result<()> {
    let mut text = metrics_to_json(record)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_metrics(path: impl AsRef<Path>) -> Result<MetricsRecord> {
    metrics_from_json(&std::fs::read_to_string(path)?)
}

/// Parses comma-separated rows of numbers into a dense matrix. Blank lines
/// are skipped; all rows must have the same length.
pub fn parse_dense_csv(text: &str) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse(lineno + 1, format!("bad number {t:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    lineno + 1,
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    Ok(DenseMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Full-precision comma-separated rendering; parses back exactly.
pub fn dense_to_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn read_dense_csv(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_dense_csv(&std::fs::read_to_string(path)?)
}

pub fn write_dense_csv(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, dense_to_csv(m))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONTENT: &str = "35\t1\t0\t0\tB\n7\t0\t1\t1\tA\n100\t1\t1\t0\tA\n";
    const CITES: &str = "35\t7\n100\t7\n7\t7\n";

    #[test]
    fn cora_canonical_order() {
        let d = parse_cora(CONTENT, CITES).unwrap();
        assert_eq!(d.node_ids, ["7", "35", "100"]);
        assert_eq!(d.class_names, ["A", "B"]);
        assert_eq!(d.labels, [0, 1, 0]);
        assert_eq!(d.features.row(0).iter().copied().collect::<Vec<_>>(), [0.0, 1.0, 1.0]);
        assert_eq!(d.graph.degrees(), [2.0, 1.0, 1.0]);
    }

    #[test]
    fn cora_errors_name_lines() {
        let err = parse_cora("1\t0\t1\tA\n2\t0\tA\n", "").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_cora(CONTENT, "35\t7\n35\t99\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse_cora("1\t2\tA\n", "").is_err());
    }

    #[test]
    fn split_counts() {
        let labels: Vec<usize> = (0..300).map(|i| i % 3).collect();
        let spec = SplitSpec {
            per_class_train: 5,
            val: 50,
            test: 100,
            seed: 4,
        };
        let s = make_split(&labels, 3, &spec).unwrap();
        assert_eq!(s.train.iter().filter(|&&t| t).count(), 15);
        assert_eq!(s.val.iter().filter(|&&t| t).count(), 50);
        assert_eq!(s.test.iter().filter(|&&t| t).count(), 100);
        assert!((0..300).all(|i| u8::from(s.train[i]) + u8::from(s.val[i]) + u8::from(s.test[i]) <= 1));
        assert_eq!(s, make_split(&labels, 3, &spec).unwrap());
        assert!(make_split(&labels, 3, &SplitSpec { per_class_train: 0, ..spec }).is_err());
        assert!(make_split(&labels, 3, &SplitSpec { test: 1000, ..spec }).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = DenseMatrix::from_row_slice(2, 2, &[0.1, -2.0, 1e-300, 3.5]);
        assert_eq!(parse_dense_csv(&dense_to_csv(&m)).unwrap(), m);
        assert!(parse_dense_csv("1,2\n3\n").is_err());
    }

    #[test]
    fn sbm_extremes() {
        let (g, labels) = synth_sbm(&[3, 4], 1.0, 0.0, 1).unwrap();
        assert_eq!(g.edges().len(), 3 + 6);
        assert_eq!(g.components(), labels);
        assert!(synth_sbm(&[3], 0.2, 0.5, 1).is_err());
    }
}
