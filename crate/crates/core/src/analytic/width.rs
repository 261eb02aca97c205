//! Complex packet widths, the harmonic dressing coefficients, and the widths
//! of the actual-momentum distribution.

use num_complex::Complex64;

use super::path::harmonic_envelopes;
use crate::numeric::decay_ratio;
use crate::params::{Potential, System};

/// Complex width s_t; its modulus is the packet width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexWidth {
    pub time: f64,
    pub s: Complex64,
    /// sigma_t = |s_t|
    pub sigma: f64,
    /// analytic d sigma_t / dt
    pub dsigma_dt: f64,
}

/// epsilon hbar^2 / (4 m^2 sigma0^4), the spreading rate constant.
fn spread_k(system: &System) -> f64 {
    let p = system.params();
    let s0 = system.packet().sigma0();
    let ht = p.hbar_tilde();
    ht * ht / (4.0 * p.mass() * p.mass() * s0.powi(4))
}

pub fn complex_width(system: &System, t: f64) -> ComplexWidth {
    let p = system.params();
    let s0 = system.packet().sigma0();
    let gamma = p.gamma();
    match *system.potential() {
        // s_t identical for zero and constant force
        Potential::Free | Potential::Linear { .. } => {
            let tau = decay_ratio(gamma, t);
            let k = spread_k(system);
            let s = s0 * Complex64::new(1.0, k.sqrt() * tau);
            let sigma = s0 * (1.0 + k * tau * tau).sqrt();
            let dsigma_dt = s0 * s0 * k * tau * (-gamma * t).exp() / sigma;
            ComplexWidth { time: t, s, sigma, dsigma_dt }
        }
        Potential::Harmonic { omega0 } => {
            let (omega, env_c, env_s) = harmonic_envelopes(gamma, omega0, t);
            let b = p.hbar_tilde() / (2.0 * p.mass() * s0 * s0);
            let decay = (-0.5 * gamma * t).exp();
            let s = s0 * decay * Complex64::new(env_c, b * env_s);
            let w = env_c * env_c + b * b * env_s * env_s;
            let sigma = s0 * decay * w.sqrt();
            // W' = 2 C C' + 2 D D' with C' = -w sin + (g/2) cos, D' = b cos
            let (sn, cs) = (omega * t).sin_cos();
            let dc = -omega * sn + 0.5 * gamma * cs;
            let dw = 2.0 * env_c * dc + 2.0 * (b * env_s) * (b * cs);
            let dsigma_dt = if sigma > 0.0 {
                0.5 * s0 * s0 * decay * decay * (dw - gamma * w) / sigma
            } else {
                f64::NAN // classical caustic: width vanishes, derivative jumps
            };
            ComplexWidth { time: t, s, sigma, dsigma_dt }
        }
    }
}

/// Harmonic dressing quantities at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicCoefficients {
    /// effective frequency sqrt(omega0^2 - gamma^2/4)
    pub omega: f64,
    /// Gaussian exponent coefficient of (x - x_t)^2
    pub alpha: Complex64,
    /// global phase action
    pub eta: f64,
    /// logarithmic stretch rate of the deviation from the classical path
    pub theta: f64,
    /// accumulated stretch factor Theta(t) = exp(int_0^t theta)
    pub big_theta: f64,
}

/// theta(t) for the harmonic case in a form regular at sin(wt) = 0.
/// For epsilon > 0 it equals d ln sigma_t / dt everywhere; for epsilon = 0 it
/// has the genuine classical-caustic poles.
pub(crate) fn harmonic_theta(system: &System, omega0: f64, t: f64) -> f64 {
    let p = system.params();
    let s0 = system.packet().sigma0();
    let gamma = p.gamma();
    let b = p.hbar_tilde() / (2.0 * p.mass() * s0 * s0);
    let (omega, env_c, env_s) = harmonic_envelopes(gamma, omega0, t);
    let (u, c) = (omega * t).sin_cos();
    let w = env_c * env_c + b * b * env_s * env_s;
    (-0.5 * gamma * (w + 1.0) - omega * c * u
        + gamma * c * c
        + (0.25 * gamma * gamma + b * b) / omega * c * u)
        / w
}

/// Signed dressing factor Theta(t) multiplying (x_init - x0).
///
/// For epsilon > 0 this is sigma_t/sigma0 for every potential. In the
/// classical harmonic limit the width ratio picks up a sign and trajectories
/// funnel through the caustics.
pub fn dressing_factor(system: &System, t: f64) -> f64 {
    if system.params().epsilon() == 0.0 {
        match *system.potential() {
            Potential::Free | Potential::Linear { .. } => 1.0,
            Potential::Harmonic { omega0 } => {
                let gamma = system.params().gamma();
                let (_, env_c, _) = harmonic_envelopes(gamma, omega0, t);
                (-0.5 * gamma * t).exp() * env_c
            }
        }
    } else {
        complex_width(system, t).sigma / system.packet().sigma0()
    }
}

/// Time derivative of the dressing factor (closed form, regular everywhere).
pub fn dressing_factor_dt(system: &System, t: f64) -> f64 {
    if system.params().epsilon() == 0.0 {
        match *system.potential() {
            Potential::Free | Potential::Linear { .. } => 0.0,
            Potential::Harmonic { omega0 } => {
                // d/dt [e^{-gt/2} C] = -e^{-gt/2} (omega0^2/omega) sin(wt)
                let gamma = system.params().gamma();
                let (omega, _, env_s) = harmonic_envelopes(gamma, omega0, t);
                let _ = omega;
                -(-0.5 * gamma * t).exp() * omega0 * omega0 * env_s
            }
        }
    } else {
        complex_width(system, t).dsigma_dt / system.packet().sigma0()
    }
}

pub fn harmonic_coefficients(system: &System, t: f64) -> Option<HarmonicCoefficients> {
    let omega0 = match *system.potential() {
        Potential::Harmonic { omega0 } => omega0,
        _ => return None,
    };
    let p = system.params();
    let gamma = p.gamma();
    let omega = (omega0 * omega0 - 0.25 * gamma * gamma).sqrt();
    let w = complex_width(system, t);
    let theta = harmonic_theta(system, omega0, t);
    // alpha_t = -1/(4 sigma^2) + i (m/2 hbar~) e^{gamma t} theta; its real part
    // carries the density width and the imaginary part the velocity shear.
    let alpha = Complex64::new(
        -0.25 / (w.sigma * w.sigma),
        0.5 * p.mass() / p.hbar_tilde() * (gamma * t).exp() * theta,
    );
    let g = system.packet();
    let (x0, p0, m) = (g.x0(), g.p0(), p.mass());
    let (sn, _) = (omega * t).sin_cos();
    let sin2 = (2.0 * omega * t).sin();
    let eta = 0.25
        * m
        * (sin2 / omega * (p0 * p0 / (m * m) - omega0 * omega0 * x0 * x0)
            - (sn / omega).powi(2)
                * (gamma * (p0 / m + 0.5 * gamma * x0).powi(2)
                    + 4.0 * omega * omega * x0 * (p0 / m + 0.25 * gamma * x0)));
    Some(HarmonicCoefficients { omega, alpha, eta, theta, big_theta: dressing_factor(system, t) })
}

/// Width of the actual-momentum distribution, plus the time-independent
/// canonical width hbar~/(2 sigma0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumWidth {
    pub time: f64,
    /// Sigma_t, spread of m * xdot over the ensemble
    pub actual: f64,
    /// hbar~ / (2 sigma0)
    pub canonical: f64,
}

pub fn sigma_momentum(system: &System, t: f64) -> MomentumWidth {
    let p = system.params();
    let s0 = system.packet().sigma0();
    let canonical = p.hbar_tilde() / (2.0 * s0);
    let m = p.mass();
    let actual = match *system.potential() {
        Potential::Free | Potential::Linear { .. } => {
            // epsilon hbar^2 tau e^{-gamma t} / (4 m sigma0^2 sigma_t)
            let w = complex_width(system, t);
            m * w.dsigma_dt
        }
        Potential::Harmonic { .. } => m * s0 * dressing_factor_dt(system, t).abs(),
    };
    MomentumWidth { time: t, actual, canonical }
}

/// The bookkeeping pair (g, f) of the trajectory dressing. Identically
/// (1, 1) wherever the packet width never vanishes; in the classical
/// harmonic regime both flip sign with the width ratio.
pub fn aux_functions(system: &System, t: f64) -> (f64, f64) {
    let s = dressing_factor(system, t).signum();
    (s, s)
}
