//! Numerical solvers for the scaled linear wave equation and the nonlinear
//! transition equation, plus the Bohmian diagnostic fields that certify the
//! closed forms.

mod polar;
mod residuals;
mod solver;

pub use polar::{polar_decompose, PolarFields};
pub use residuals::{bohmian_force_check, equation_residuals, ResidualReport};
pub use solver::{map_transition_to_scaled, solve_scaled, solve_transition, Solution, SolveReport};

use crate::params::Grid;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error("epsilon = 0: the classical limit has no linear wave equation; use the analytic module")]
    EpsilonZero,
    #[error("epsilon = {0} below solver floor 1e-3: transition equation ill-conditioned")]
    EpsilonBelowFloor(f64),
    #[error("non-finite field value detected at step {step} (t = {time})")]
    NonFiniteDetected { step: usize, time: f64 },
    #[error("nonlinear iteration failed to converge within {max_iter} iterations at t = {time}")]
    NonlinearDivergence { max_iter: usize, time: f64 },
    #[error("phase unwrap failed: jump of {jump} rad between nodes {at} and {}", at + 1)]
    PhaseUnwrapFailure { at: usize, jump: f64 },
    #[error("carrier gauge requires a free or linear potential")]
    CarrierUnsupported,
    #[error("sample time {0} is not a step multiple of dt")]
    BadSampleTime(f64),
    #[error("initial field grid does not match solver grid")]
    GridMismatch,
}

/// Boundary handling: a hard box (exactly norm-preserving) or an absorbing
/// mask ramped over `width` near each wall for long-time runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Box,
    DampedEdges { width: f64, strength: f64 },
}

/// Solver configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: Grid,
    pub dt: f64,
    pub boundary: Boundary,
    pub nonlinear_max_iter: usize,
    pub nonlinear_tol: f64,
    /// Amplitude below which the nonlinear curvature term is masked.
    pub amplitude_floor: f64,
    /// Remove a uniform carrier of this initial canonical momentum before
    /// stepping (free/linear only). Keeps the envelope slow so the packet
    /// drift is resolved far below the bare-scheme dispersion error.
    pub carrier: Option<f64>,
}

impl SolverConfig {
    pub fn new(grid: Grid, dt: f64) -> Self {
        assert!(dt > 0.0, "dt must be positive");
        SolverConfig {
            grid,
            dt,
            boundary: Boundary::Box,
            nonlinear_max_iter: 50,
            nonlinear_tol: 1e-10,
            amplitude_floor: 1e-12,
            carrier: None,
        }
    }

    pub fn with_carrier(mut self, p_c0: f64) -> Self {
        self.carrier = Some(p_c0);
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// Explicit-scheme advisory dt <= dx^2 m / hbar~. The implicit stepper is
    /// stable regardless; the ratio is recorded in the solve report.
    pub fn stability_advisory_dt(&self, params: &crate::params::ModelParams) -> f64 {
        self.grid.dx() * self.grid.dx() * params.mass() / params.hbar_tilde()
    }
}
