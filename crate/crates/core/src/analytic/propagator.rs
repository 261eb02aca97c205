//! Propagators of the scaled equation for the three solvable potentials, and
//! quadrature of a kernel against the initial packet.
//!
//! All kernels carry hbar~ in place of hbar.

use num_complex::Complex64;

use super::wave::initial_packet;
use super::AnalyticError;
use crate::numeric::{decay_ratio, decay_ratio2, growth_ratio2, sinh_quartic};
use crate::params::{Grid, ModelParams, Potential, System};

const CAUSTIC_TOL: f64 = 1e-9;

/// Free kernel: sqrt(m/(2 pi i hbar~ tau)) exp(i m (x-x')^2 / (2 hbar~ tau)),
/// tau = (1 - e^{-gamma t})/gamma. gamma -> 0 recovers the textbook kernel.
pub fn propagator_free(
    params: &ModelParams,
    x: f64,
    x_prime: f64,
    t: f64,
) -> Result<Complex64, AnalyticError> {
    if t <= 0.0 {
        return Err(AnalyticError::ZeroTime);
    }
    let ht = params.hbar_tilde();
    let tau = decay_ratio(params.gamma(), t);
    let m = params.mass();
    let pref = (Complex64::new(0.0, -1.0) * m / (2.0 * std::f64::consts::PI * ht * tau)).sqrt();
    let d = x - x_prime;
    Ok(pref * Complex64::new(0.0, 0.5 * m * d * d / (ht * tau)).exp())
}

/// Constant-force kernel: a pure phase factor times the free kernel.
pub fn propagator_linear(
    params: &ModelParams,
    a: f64,
    x: f64,
    x_prime: f64,
    t: f64,
) -> Result<Complex64, AnalyticError> {
    if t <= 0.0 {
        return Err(AnalyticError::ZeroTime);
    }
    let ht = params.hbar_tilde();
    let m = params.mass();
    let tau = decay_ratio(params.gamma(), t);
    // (e^{gt} - gt - 1)/(g(1-e^{-gt})), (e^{-gt} + gt - 1)/(g(1-e^{-gt})),
    // (e^{gt} + e^{-gt} - g^2 t^2 - 2)/(g^3 (1-e^{-gt}))
    let h1 = growth_ratio2(params.gamma(), t) / tau;
    let h2 = decay_ratio2(params.gamma(), t) / tau;
    let h3 = sinh_quartic(params.gamma(), t) / tau;
    let phase = -m * a / ht * (x * h1 + x_prime * h2) - 0.5 * m * a * a / ht * h3;
    Ok(Complex64::new(0.0, phase).exp() * propagator_free(params, x, x_prime, t)?)
}

/// Damped-oscillator kernel with omega = sqrt(omega0^2 - gamma^2/4). The
/// square-root branch advances by -pi/2 across every caustic, which keeps the
/// kernel consistent with the continuously evolved wavefunction.
pub fn propagator_harmonic(
    params: &ModelParams,
    omega0: f64,
    x: f64,
    x_prime: f64,
    t: f64,
) -> Result<Complex64, AnalyticError> {
    if t <= 0.0 {
        return Err(AnalyticError::ZeroTime);
    }
    let gamma = params.gamma();
    let omega = (omega0 * omega0 - 0.25 * gamma * gamma).sqrt();
    let sn = (omega * t).sin();
    if sn.abs() < CAUSTIC_TOL {
        return Err(AnalyticError::CausticTime(t));
    }
    let ht = params.hbar_tilde();
    let m = params.mass();
    let egt = (gamma * t).exp();
    let amp = (m * omega * (0.5 * gamma * t).exp()
        / (2.0 * std::f64::consts::PI * ht * sn.abs()))
    .sqrt();
    let caustics = (omega * t / std::f64::consts::PI).floor();
    let branch = -std::f64::consts::FRAC_PI_4 - std::f64::consts::FRAC_PI_2 * caustics;
    let phase = 0.25 * m * gamma / ht * (x_prime * x_prime - x * x * egt)
        + 0.5 * m * omega / (ht * sn)
            * ((x * x * egt + x_prime * x_prime) * (omega * t).cos()
                - 2.0 * x * x_prime * (0.5 * gamma * t).exp());
    Ok(amp * Complex64::new(0.0, phase + branch).exp())
}

/// psi(x, t) by Simpson quadrature of the kernel against the initial packet.
/// An independent numerical route to the closed-form wavefunction.
pub fn propagate_packet(system: &System, x: f64, t: f64) -> Result<Complex64, AnalyticError> {
    let g = system.packet();
    let half_span = 14.0 * g.sigma0();
    // resolve the kernel chirp: phase ~ m (x-x')^2/(2 hbar~ tau)
    let ht = system.params().hbar_tilde();
    let tau = decay_ratio(system.params().gamma(), t).max(1e-6);
    let k_max = system.params().mass() * (x - g.x0() + half_span).abs().max(half_span) / (ht * tau)
        + g.p0().abs() / ht;
    let n = ((k_max * 2.0 * half_span / 3.0) as usize).clamp(4000, 400_000);
    let grid = Grid::new(g.x0() - half_span, g.x0() + half_span, 2 * n + 1).expect("quad grid");
    let psi0 = initial_packet(system, &grid)?;
    let kernel: Vec<Complex64> = match *system.potential() {
        Potential::Free => grid
            .points()
            .map(|xp| propagator_free(system.params(), x, xp, t))
            .collect::<Result<_, _>>()?,
        Potential::Linear { a } => grid
            .points()
            .map(|xp| propagator_linear(system.params(), a, x, xp, t))
            .collect::<Result<_, _>>()?,
        Potential::Harmonic { omega0 } => grid
            .points()
            .map(|xp| propagator_harmonic(system.params(), omega0, x, xp, t))
            .collect::<Result<_, _>>()?,
    };
    // composite Simpson over the product
    let re = simpson_indexed(grid.n_points(), grid.dx(), |i| (kernel[i] * psi0.values[i]).re);
    let im = simpson_indexed(grid.n_points(), grid.dx(), |i| (kernel[i] * psi0.values[i]).im);
    Ok(Complex64::new(re, im))
}

fn simpson_indexed<F: Fn(usize) -> f64>(n: usize, h: f64, f: F) -> f64 {
    debug_assert!(n % 2 == 1);
    let mut s = f(0) + f(n - 1);
    for i in 1..n - 1 {
        s += if i % 2 == 1 { 4.0 * f(i) } else { 2.0 * f(i) };
    }
    s * h / 3.0
}
