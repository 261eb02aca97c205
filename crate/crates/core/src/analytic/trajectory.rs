//! Scaled trajectories in closed form: classical path plus dressing term.

use super::path::classical_path;
use super::width::{complex_width, dressing_factor};
use super::AnalyticError;
use crate::params::{GaussianSpec, ModelParams, Potential, System};

/// x(x_init, t) = x_t + (x_init - x0) * Theta(t). A particle seeded at the
/// packet center stays on the classical path forever.
pub fn scaled_trajectory(system: &System, x_init: f64, t: f64) -> f64 {
    let path = classical_path(system, t);
    path.position + (x_init - system.packet().x0()) * dressing_factor(system, t)
}

/// Final resting point of a freely propagating particle in a viscid medium.
pub fn localization_point(system: &System, x_init: f64) -> Result<f64, AnalyticError> {
    match *system.potential() {
        Potential::Free => {}
        _ => return Err(AnalyticError::UnsupportedPotential("free")),
    }
    let p = system.params();
    if p.gamma() == 0.0 {
        return Err(AnalyticError::RequiresFriction);
    }
    let g = system.packet();
    let ht = p.hbar_tilde();
    let k = ht * ht / (4.0 * p.mass() * p.mass() * g.sigma0().powi(4) * p.gamma() * p.gamma());
    Ok(g.x0() + g.p0() / (p.mass() * p.gamma()) + (x_init - g.x0()) * (1.0 + k).sqrt())
}

/// Separation of two trajectories: (x1 - x2) * sigma_t / sigma0.
/// The width ratio is potential-independent for zero and constant force.
pub fn trajectory_distance(
    packet: &GaussianSpec,
    params: &ModelParams,
    x1_init: f64,
    x2_init: f64,
    t: f64,
) -> f64 {
    let system = System::new(*params, Potential::Free, *packet).expect("validated params");
    (x1_init - x2_init) * complex_width(&system, t).sigma / packet.sigma0()
}
