//! Dissipative quantum-classical transition dynamics in the Caldirola-Kanai
//! model.
//!
//! The engine covers four layers:
//! - [`params`]: validated parameter, potential, and field types;
//! - [`analytic`]: closed-form Gaussian packet evolution for free, linear,
//!   and underdamped harmonic potentials, with propagators and the
//!   momentum-space transform;
//! - [`pde`]: Crank-Nicolson solvers for the scaled linear wave equation and
//!   the nonlinear transition equation, plus Bohmian diagnostics;
//! - [`trajectories`] and [`stats`]: Born-rule ensembles integrated along the
//!   velocity field, arrival-time and actual-momentum statistics.
//!
//! Every closed form has an independent numerical cross-check path: kernels
//! against quadrature, widths against the solvers, trajectories against
//! guidance integration.

pub mod analytic;
pub mod numeric;
pub mod params;
pub mod pde;
pub mod stats;
pub mod trajectories;

pub use params::{
    scaled_planck, validate, CoreError, GaussianSpec, Grid, ModelParams, Potential, System,
    WaveField,
};
