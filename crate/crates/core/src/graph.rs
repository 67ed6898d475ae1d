//! Sparse graphs, Laplacians, and the classical iterative graph algorithms
//! (PageRank, Weisfeiler-Lehman refinement, Bellman-Ford).

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::report::SolverReport;

/// A weighted graph stored as a CSR adjacency matrix.
///
/// Undirected graphs keep an exactly symmetric adjacency. The base edge list
/// never contains self-loops; augmentation happens inside [`laplacian`].
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    directed: bool,
    adjacency: SparseMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianForm {
    /// `D − A`
    Unnormalized,
    /// `I − D^{-1/2} A D^{-1/2}`
    SymNormalized,
    /// `I − D^{-1} A`
    RandomWalk,
}

/// Laplacian variant together with the self-loop weight `γ` added to the
/// adjacency (`Ã = A + γI`) before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacianKind {
    pub form: LaplacianForm,
    pub self_loop_gamma: f64,
}

impl LaplacianKind {
    pub fn unnormalized() -> Self {
        Self {
            form: LaplacianForm::Unnormalized,
            self_loop_gamma: 0.0,
        }
    }

    pub fn sym_normalized(gamma: f64) -> Self {
        Self {
            form: LaplacianForm::SymNormalized,
            self_loop_gamma: gamma,
        }
    }

    pub fn random_walk(gamma: f64) -> Self {
        Self {
            form: LaplacianForm::RandomWalk,
            self_loop_gamma: gamma,
        }
    }
}

impl Default for LaplacianKind {
    fn default() -> Self {
        Self::sym_normalized(1.0)
    }
}

/// Degree summary of the unaugmented graph. Degrees are weighted row sums, so
/// merged duplicate edges count with their multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub mean_degree: f64,
    pub max_degree: f64,
    pub min_degree: f64,
    pub edge_end_count: f64,
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn adjacency(&self) -> &SparseMatrix {
        &self.adjacency
    }

    /// True when any stored weight differs from 1.
    pub fn is_weighted(&self) -> bool {
        self.adjacency.values().iter().any(|&w| w != 1.0)
    }

    /// Weighted out-degrees (row sums of the adjacency).
    pub fn degrees(&self) -> Vec<f64> {
        self.adjacency.row_sums()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adjacency.row(i)
    }

    /// Edges as `(i, j, w)`; undirected edges are reported once with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.adjacency
            .triplets()
            .filter(|&(i, j, _)| self.directed || i < j)
            .collect()
    }

    /// Connected components (weak connectivity for directed graphs), as a
    /// component id per node numbered in order of first appearance.
    pub fn components(&self) -> Vec<usize> {
        let sym = if self.directed {
            Some(self.adjacency.add_scaled(1.0, &self.adjacency.transpose(), 1.0))
        } else {
            None
        };
        let adj = sym.as_ref().unwrap_or(&self.adjacency);
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for (v, _) in adj.row(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Two-colourability of the (undirected view of the) graph.
    pub fn is_bipartite(&self) -> bool {
        let mut side = vec![u8::MAX; self.n];
        for s in 0..self.n {
            if side[s] != u8::MAX {
                continue;
            }
            side[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for (v, _) in self.adjacency.row(u) {
                    if side[v] == u8::MAX {
                        side[v] = 1 - side[u];
                        queue.push_back(v);
                    } else if side[v] == side[u] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Builds a graph from an edge list. Duplicate edges are merged by summing
/// their weights; undirected input is symmetrized.
pub fn build_graph(n: usize, edges: &[(usize, usize, f64)], directed: bool) -> Result<Graph> {
    let mut triplets = Vec::with_capacity(edges.len() * if directed { 1 } else { 2 });
    for &(i, j, w) in edges {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, n });
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::NegativeWeight { i, j, weight: w });
        }
        triplets.push((i, j, w));
        if !directed {
            triplets.push((j, i, w));
        }
    }
    Ok(Graph {
        n,
        directed,
        adjacency: SparseMatrix::from_triplets(n, n, &triplets)?,
    })
}

pub fn degree_stats(g: &Graph) -> DegreeStats {
    let degrees = g.degrees();
    let total: f64 = degrees.iter().sum();
    let (min, max) = degrees
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    let n = g.node_count();
    DegreeStats {
        mean_degree: if n == 0 { 0.0 } else { total / n as f64 },
        max_degree: if n == 0 { 0.0 } else { max },
        min_degree: if n == 0 { 0.0 } else { min },
        edge_end_count: total,
    }
}

/// Augmented adjacency `Ã = A + γI` and its degrees.
pub(crate) fn augmented(g: &Graph, gamma: f64) -> (SparseMatrix, Vec<f64>) {
    let a = if gamma != 0.0 {
        g.adjacency.add_scaled(1.0, &SparseMatrix::identity(g.n), gamma)
    } else {
        g.adjacency.clone()
    };
    let d = a.row_sums();
    (a, d)
}

fn checked_degrees(degrees: &[f64]) -> Result<()> {
    match degrees.iter().position(|&d| !(d > 0.0)) {
        Some(i) => Err(Error::ZeroDegree(i)),
        None => Ok(()),
    }
}

/// Renormalized propagation matrix `Â = D̃^{-1/2} Ã D̃^{-1/2}`.
pub fn normalized_adjacency(g: &Graph, gamma: f64) -> Result<SparseMatrix> {
    let (a, d) = augmented(g, gamma);
    checked_degrees(&d)?;
    let s: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    Ok(a.scale(&s, &s))
}

/// Random-walk transition matrix `D̃^{-1} Ã`.
pub fn transition_matrix(g: &Graph, gamma: f64) -> Result<SparseMatrix> {
    let (a, d) = augmented(g, gamma);
    checked_degrees(&d)?;
    let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    Ok(a.scale(&inv, &vec![1.0; g.n]))
}

pub fn laplacian(g: &Graph, kind: LaplacianKind) -> Result<SparseMatrix> {
    if !(kind.self_loop_gamma >= 0.0) {
        return Err(Error::param("gamma", "self-loop weight must be >= 0"));
    }
    let eye = SparseMatrix::identity(g.n);
    match kind.form {
        LaplacianForm::Unnormalized => {
            // The self-loop cancels in D̃ − Ã.
            let d = g.degrees();
            let deg = SparseMatrix::from_triplets(
                g.n,
                g.n,
                &d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect::<Vec<_>>(),
            )?;
            Ok(deg.add_scaled(1.0, &g.adjacency, -1.0))
        }
        LaplacianForm::SymNormalized => {
            Ok(eye.add_scaled(1.0, &normalized_adjacency(g, kind.self_loop_gamma)?, -1.0))
        }
        LaplacianForm::RandomWalk => {
            Ok(eye.add_scaled(1.0, &transition_matrix(g, kind.self_loop_gamma)?, -1.0))
        }
    }
}

/// A vector spanning the null space of the Laplacian on a connected graph:
/// `e` for `D − A` and `I − D^{-1}A`, `D̃^{1/2} e` for the symmetric form.
pub fn laplacian_null_vector(g: &Graph, kind: LaplacianKind) -> Vec<f64> {
    match kind.form {
        LaplacianForm::Unnormalized | LaplacianForm::RandomWalk => vec![1.0; g.n],
        LaplacianForm::SymNormalized => augmented(g, kind.self_loop_gamma)
            .1
            .iter()
            .map(|d| d.sqrt())
            .collect(),
    }
}

/// PageRank by power iteration on
/// `h_u = (1−α)/N + α Σ_{v→u} w_vu h_v / d_v`.
///
/// Dangling nodes (zero out-degree) spread their mass uniformly over all
/// nodes. Non-convergence is reported, not raised.
pub fn pagerank(g: &Graph, alpha: f64, tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolverReport)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", "damping factor must lie in (0, 1)"));
    }
    let n = g.n;
    let mut report = SolverReport::new(tol);
    if n == 0 {
        report.converged = true;
        return Ok((Vec::new(), report));
    }
    let degrees = g.degrees();
    let incoming = g.adjacency.transpose();
    let mut h = vec![1.0 / n as f64; n];
    for _ in 0..max_iter {
        let dangling: f64 = h
            .iter()
            .zip(&degrees)
            .filter(|(_, &d)| d == 0.0)
            .map(|(v, _)| v)
            .sum();
        let base = (1.0 - alpha) / n as f64 + alpha * dangling / n as f64;
        let next: Vec<f64> = (0..n)
            .map(|u| {
                base + alpha
                    * incoming
                        .row(u)
                        .map(|(v, w)| w * h[v] / degrees[v])
                        .sum::<f64>()
            })
            .collect();
        let diff: f64 = next.iter().zip(&h).map(|(a, b)| (a - b).abs()).sum();
        h = next;
        report.record(diff, diff);
        if diff <= tol {
            report.converged = true;
            break;
        }
    }
    Ok((h, report))
}

/// One-dimensional Weisfeiler-Lehman colour refinement on a single graph.
///
/// Returns `rounds + 1` colourings; entry 0 is the initial colouring.
pub fn wl_refine(g: &Graph, init_colors: &[usize], rounds: usize) -> Result<Vec<Vec<usize>>> {
    Ok(wl_refine_many(&[g], &[init_colors.to_vec()], rounds)?.remove(0))
}

/// Weisfeiler-Lehman refinement over several graphs sharing one colour
/// dictionary, so identical refinement histories map to identical colours in
/// every graph.
///
/// Each round maps the signature `(own colour, sorted neighbour colours)` to a
/// fresh integer; signatures are numbered in sorted order, which makes the
/// result independent of node order.
pub fn wl_refine_many(
    graphs: &[&Graph],
    init_colors: &[Vec<usize>],
    rounds: usize,
) -> Result<Vec<Vec<Vec<usize>>>> {
    if graphs.len() != init_colors.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} graphs but {} initial colourings",
            graphs.len(),
            init_colors.len()
        )));
    }
    for (g, c) in graphs.iter().zip(init_colors) {
        if c.len() != g.n {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} nodes but {} initial colours",
                g.n,
                c.len()
            )));
        }
    }
    let mut history: Vec<Vec<Vec<usize>>> = init_colors.iter().map(|c| vec![c.clone()]).collect();
    for _ in 0..rounds {
        let signatures: Vec<Vec<(usize, Vec<usize>)>> = graphs
            .iter()
            .zip(&history)
            .map(|(g, h)| {
                let current = h.last().expect("history starts non-empty");
                (0..g.n)
                    .map(|u| {
                        let mut nb: Vec<usize> = g.neighbors(u).map(|(v, _)| current[v]).collect();
                        nb.sort_unstable();
                        (current[u], nb)
                    })
                    .collect()
            })
            .collect();
        let mut dictionary: BTreeMap<&(usize, Vec<usize>), usize> = BTreeMap::new();
        for sig in signatures.iter().flatten() {
            dictionary.insert(sig, 0);
        }
        for (id, slot) in dictionary.values_mut().enumerate() {
            *slot = id;
        }
        for (h, sigs) in history.iter_mut().zip(&signatures) {
            h.push(sigs.iter().map(|s| dictionary[s]).collect());
        }
    }
    Ok(history)
}

/// Single-source shortest paths by Bellman-Ford relaxation. Unreachable
/// nodes get `f64::INFINITY`.
pub fn bellman_ford(g: &Graph, source: usize) -> Result<Vec<f64>> {
    if source >= g.n {
        return Err(Error::IndexOutOfRange {
            index: source,
            n: g.n,
        });
    }
    let mut dist = vec![f64::INFINITY; g.n];
    dist[source] = 0.0;
    for _ in 1..g.n.max(2) {
        let mut changed = false;
        for (u, v, w) in g.adjacency.triplets() {
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(dist)
}

/// Parses the `i<TAB>j[<TAB>w]` edge-list format (0-based, weight defaults to
/// 1). Blank lines and lines starting with `#` are skipped.
pub fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(Error::parse(
                lineno + 1,
                format!("expected 2 or 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let index = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::parse(lineno + 1, format!("bad node index {s:?}: {e}")))
        };
        let i = index(fields[0])?;
        let j = index(fields[1])?;
        let w = match fields.get(2) {
            Some(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(lineno + 1, format!("bad weight {s:?}: {e}")))?,
            None => 1.0,
        };
        edges.push((i, j, w));
    }
    Ok(edges)
}

/// Reads an edge-list file; the node count is one past the largest index
/// unless `n` is given.
pub fn read_edge_list(path: impl AsRef<Path>, n: Option<usize>, directed: bool) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    let edges = parse_edge_list(&text)?;
    let inferred = edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0);
    build_graph(n.unwrap_or(inferred), &edges, directed)
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for (i, j, w) in g.edges() {
        if w == 1.0 {
            out.push_str(&format!("{i}\t{j}\n"));
        } else {
            out.push_str(&format!("{i}\t{j}\t{w}\n"));
        }
    }
    out
}
