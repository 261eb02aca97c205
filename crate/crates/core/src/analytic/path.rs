//! Classical trajectories of the damped equation of motion
//! m x'' + m gamma x' + V'(x) = 0 and the action accumulated along them.

use crate::numeric::{action_kernel3, cosh2_ratio, decay_ratio, decay_ratio2, growth_ratio};
use crate::params::{Potential, System};

/// Center-of-packet classical state at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalPath {
    pub time: f64,
    /// x_t
    pub position: f64,
    /// p_t = m dx_t/dt (kinematic momentum)
    pub momentum: f64,
    /// integral of (kinetic - potential) e^{gamma t'} dt' from 0 to t
    pub action: f64,
}

/// Underdamped oscillator helper: effective frequency and the two
/// trigonometric envelopes cos(wt) + (g/2w) sin(wt) and sin(wt)/w.
pub(crate) fn harmonic_envelopes(gamma: f64, omega0: f64, t: f64) -> (f64, f64, f64) {
    let omega = (omega0 * omega0 - 0.25 * gamma * gamma).sqrt();
    let (s, c) = (omega * t).sin_cos();
    (omega, c + 0.5 * gamma * s / omega, s / omega)
}

pub fn classical_path(system: &System, t: f64) -> ClassicalPath {
    let p = system.params();
    let g = system.packet();
    let (m, gamma) = (p.mass(), p.gamma());
    let (x0, p0) = (g.x0(), g.p0());
    match *system.potential() {
        Potential::Free => {
            let tau = decay_ratio(gamma, t);
            let x_t = x0 + p0 / m * tau;
            let p_t = p0 * (-gamma * t).exp();
            // action reduces to the kinetic integral
            let action = p0 * p0 / (2.0 * m) * tau;
            ClassicalPath { time: t, position: x_t, momentum: p_t, action }
        }
        Potential::Linear { a } => {
            let tau = decay_ratio(gamma, t);
            let x_t = x0 + p0 / m * tau - a * decay_ratio2(gamma, t);
            let p_t = p0 * (-gamma * t).exp() - m * a * tau;
            let action = p0 * p0 / (2.0 * m) * tau
                - a * (p0 * cosh2_ratio(gamma, t) + m * x0 * growth_ratio(gamma, t))
                + 0.5 * a * a * m * action_kernel3(gamma, t);
            ClassicalPath { time: t, position: x_t, momentum: p_t, action }
        }
        Potential::Harmonic { omega0 } => {
            let (omega, env_c, env_s) = harmonic_envelopes(gamma, omega0, t);
            let decay = (-0.5 * gamma * t).exp();
            let x_t = decay * (x0 * env_c + p0 / m * env_s);
            let cos_m = (omega * t).cos() - 0.5 * gamma * env_s;
            let p_t = decay * (-m * omega0 * omega0 * x0 * env_s + p0 * cos_m);
            // For V with 2V = x V' the Lagrangian integrates by parts to a
            // pure boundary term.
            let action = 0.5 * (x_t * p_t * (gamma * t).exp() - x0 * p0);
            ClassicalPath { time: t, position: x_t, momentum: p_t, action }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{GaussianSpec, ModelParams, Potential, System};

    fn sys(gamma: f64, eps: f64, pot: Potential) -> System {
        System::new(
            ModelParams::new(1.0, 1.0, gamma, eps).unwrap(),
            pot,
            GaussianSpec::new(1.0, -10.0, 5.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn free_frictionless_path() {
        let s = sys(0.0, 1.0, Potential::Free);
        for &t in &[0.0, 0.5, 2.0, 10.0] {
            let c = classical_path(&s, t);
            assert!((c.position - (-10.0 + 5.0 * t)).abs() < 1e-12);
            assert!((c.momentum - 5.0).abs() < 1e-12);
            assert!((c.action - 12.5 * t).abs() < 1e-10);
        }
    }

    #[test]
    fn free_viscid_path_value() {
        // x_t = -10 + 50 (1 - e^{-0.2}) at gamma = 0.1, t = 2
        let s = sys(0.1, 1.0, Potential::Free);
        let c = classical_path(&s, 2.0);
        let expect = -10.0 + 50.0 * (1.0 - (-0.2f64).exp());
        assert!((c.position - expect).abs() < 1e-12);
        assert!((c.position - (-0.936537653899)).abs() < 1e-9);
    }

    #[test]
    fn free_viscid_long_time_limit() {
        let s = sys(0.1, 1.0, Potential::Free);
        let c = classical_path(&s, 400.0);
        assert!((c.position - 40.0).abs() < 1e-9); // x0 + p0/(m gamma)
        assert!(c.momentum.abs() < 1e-12);
    }

    #[test]
    fn initial_conditions_hold() {
        for pot in [
            Potential::Free,
            Potential::Linear { a: -0.5 },
            Potential::Harmonic { omega0: 0.5 },
        ] {
            let s = sys(0.15, 0.5, pot);
            let c = classical_path(&s, 0.0);
            assert!((c.position - -10.0).abs() < 1e-14);
            assert!((c.momentum - 5.0).abs() < 1e-14);
            assert!(c.action.abs() < 1e-13);
        }
    }

    #[test]
    fn momentum_is_mass_times_velocity() {
        // finite-difference check of p_t = m dx/dt
        let h = 1e-5;
        for pot in [
            Potential::Free,
            Potential::Linear { a: 0.3 },
            Potential::Harmonic { omega0: 0.7 },
        ] {
            let s = sys(0.2, 1.0, pot);
            for &t in &[0.4, 1.7, 6.0] {
                let v = (classical_path(&s, t + h).position - classical_path(&s, t - h).position)
                    / (2.0 * h);
                let p = classical_path(&s, t).momentum;
                assert!((p - v).abs() < 1e-8, "{pot:?} t={t}: p={p} v={v}");
            }
        }
    }
}
