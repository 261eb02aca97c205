//! Exact closed-form solutions: classical paths, complex widths,
//! wavefunctions, densities and currents, velocity fields, scaled
//! trajectories, the propagators for all three potentials, and the
//! momentum-space transform.

mod momentum;
mod path;
mod propagator;
mod trajectory;
mod wave;
mod width;

pub use momentum::{momentum_transform, MomentumField};
pub use path::{classical_path, ClassicalPath};
pub use propagator::{
    propagate_packet, propagator_free, propagator_harmonic, propagator_linear,
};
pub use trajectory::{localization_point, scaled_trajectory, trajectory_distance};
pub use wave::{
    auto_grid, density_current_closed, density_current_field, grid_tail_mass,
    initial_packet, transition_initial_packet, velocity_field, wavefunction, wavefunction_at,
};
pub use width::{
    aux_functions, complex_width, dressing_factor, dressing_factor_dt, harmonic_coefficients,
    sigma_momentum, ComplexWidth, HarmonicCoefficients, MomentumWidth,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("epsilon = 0 has no wavefunction; use the closed-form density/trajectory routes")]
    EpsilonZero,
    #[error("operation requires friction (gamma > 0)")]
    RequiresFriction,
    #[error("operation requires a {0} potential")]
    UnsupportedPotential(&'static str),
    #[error("propagator undefined at t = 0")]
    ZeroTime,
    #[error("harmonic propagator singular near sin(omega t) = 0 at t = {0}; use the closed-form wavefunction")]
    CausticTime(f64),
}
