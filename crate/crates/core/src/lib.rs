//! Graph-based semi-supervised learning and subspace learning.
//!
//! The crate is organised around a handful of numeric building blocks:
//!
//! - [`graph`]: sparse graphs, degree statistics, Laplacians and the classical
//!   iterative graph algorithms (PageRank, WL colour refinement, Bellman-Ford).
//! - [`spectral`]: extreme eigenpairs, spectral estimates, heat kernels, graph
//!   filters, spectral embedding and k-means.
//! - [`weights`]: affinity construction (RBF, cosine attention, LLE weights).
//! - [`labelprop`]: label propagation and Gaussian CRF inference.
//! - [`prox`]: proximal operators and first-order solvers.
//! - [`subspace`]: LRR, robust PCA, SSC, matrix completion, PCA.
//! - [`gcn`]: a two-layer GCN with hand-written gradients and the
//!   GCN → LLE → label propagation pipeline.
//! - [`data`]: Cora ingestion, splits, synthetic generators, metrics files.

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod gcn;
pub mod graph;
pub mod labelprop;
pub mod linalg;
pub mod prox;
pub mod report;
pub mod spectral;
pub mod subspace;
pub mod weights;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, SparseMatrix};
pub use report::SolverReport;
