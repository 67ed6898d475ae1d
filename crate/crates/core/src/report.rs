use serde::{Deserialize, Serialize};

/// Convergence record returned by every iterative solver.
///
/// `objective_history` and `residual_history` both hold one entry per
/// iteration. Fixed-point iterations that have no natural objective record
/// their residual in both series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub objective_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub tolerance_used: f64,
}

impl SolverReport {
    pub fn new(tolerance: f64) -> Self {
        Self {
            iterations: 0,
            objective_history: Vec::new(),
            residual_history: Vec::new(),
            converged: false,
            tolerance_used: tolerance,
        }
    }

    pub fn record(&mut self, objective: f64, residual: f64) {
        self.iterations += 1;
        self.objective_history.push(objective);
        self.residual_history.push(residual);
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.objective_history.last().copied()
    }
}
