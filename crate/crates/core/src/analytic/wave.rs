//! Closed-form wavefunctions, densities, currents, and the velocity field.

use num_complex::Complex64;
use statrs::function::erf::erfc;

use super::path::{classical_path, harmonic_envelopes};
use super::width::{complex_width, dressing_factor, dressing_factor_dt, harmonic_coefficients};
use super::AnalyticError;
use crate::params::{CoreError, Grid, Potential, System, WaveField};

const QUARTER_LOG_2PI: f64 = 0.25;

/// Continuous argument of s_t. The direction of s_t winds monotonically, so
/// for the oscillator the branch is fixed by counting half-turns of
/// (C + i b S), which crosses the real axis exactly at omega t = k pi.
fn continuous_arg_s(system: &System, t: f64) -> f64 {
    match *system.potential() {
        Potential::Free | Potential::Linear { .. } => {
            let s = complex_width(system, t).s;
            s.im.atan2(s.re)
        }
        Potential::Harmonic { omega0 } => {
            let p = system.params();
            let (omega, env_c, env_s) = harmonic_envelopes(p.gamma(), omega0, t);
            let b = p.hbar_tilde() / (2.0 * p.mass() * system.packet().sigma0().powi(2));
            let k = (omega * t / std::f64::consts::PI).floor();
            let flip = if (k as i64) % 2 == 0 { 1.0 } else { -1.0 };
            k * std::f64::consts::PI + (flip * b * env_s).atan2(flip * env_c)
        }
    }
}

/// Global phase action: classical action for free/linear, the oscillator
/// phase function for harmonic.
fn phase_action(system: &System, t: f64) -> f64 {
    match *system.potential() {
        Potential::Free | Potential::Linear { .. } => classical_path(system, t).action,
        Potential::Harmonic { .. } => harmonic_coefficients(system, t).unwrap().eta,
    }
}

/// theta(t): rate of the dressing stretch, equal to d ln sigma_t/dt for
/// epsilon > 0. Classical harmonic caustics make it blow up at epsilon = 0.
fn theta(system: &System, t: f64) -> f64 {
    if system.params().epsilon() == 0.0 {
        let d = dressing_factor(system, t);
        dressing_factor_dt(system, t) / d
    } else {
        let w = complex_width(system, t);
        w.dsigma_dt / w.sigma
    }
}

/// Evaluate the time-evolved Gaussian packet at one point.
pub fn wavefunction_at(system: &System, x: f64, t: f64) -> Result<Complex64, AnalyticError> {
    let p = system.params();
    if p.epsilon() == 0.0 {
        return Err(AnalyticError::EpsilonZero);
    }
    let ht = p.hbar_tilde();
    let path = classical_path(system, t);
    let w = complex_width(system, t);
    let th = theta(system, t);
    let alpha = Complex64::new(-0.25 / (w.sigma * w.sigma), 0.5 * p.mass() / ht * (p.gamma() * t).exp() * th);
    let p_c = path.momentum * (p.gamma() * t).exp();
    let pref_mod = (2.0 * std::f64::consts::PI).powf(-QUARTER_LOG_2PI) / w.sigma.sqrt();
    let pref_arg = -0.5 * continuous_arg_s(system, t);
    let d = x - path.position;
    let exponent = alpha * d * d
        + Complex64::i() * (p_c * d / ht + phase_action(system, t) / ht + pref_arg);
    Ok(pref_mod * exponent.exp())
}

/// The packet sampled on a grid.
pub fn wavefunction(system: &System, grid: &Grid, t: f64) -> Result<WaveField, AnalyticError> {
    let values = grid
        .points()
        .map(|x| wavefunction_at(system, x, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WaveField::new(*grid, values, t))
}

/// The initial packet of the scaled equation (phase slope p0/hbar~).
pub fn initial_packet(system: &System, grid: &Grid) -> Result<WaveField, AnalyticError> {
    wavefunction(system, grid, 0.0)
}

/// The initial packet of the nonlinear transition equation: same density,
/// but the momentum phase carries the bare hbar.
pub fn transition_initial_packet(system: &System, grid: &Grid) -> WaveField {
    let g = system.packet();
    let hbar = system.params().hbar();
    let norm = (2.0 * std::f64::consts::PI * g.sigma0() * g.sigma0()).powf(-0.25);
    let values = grid
        .points()
        .map(|x| {
            let d = x - g.x0();
            norm * Complex64::new(-d * d / (4.0 * g.sigma0() * g.sigma0()), g.p0() * d / hbar)
                .exp()
        })
        .collect();
    WaveField::new(*grid, values, 0.0)
}

/// Probability density and current at one point from the closed forms.
/// Well-defined for every epsilon including the classical limit.
pub fn density_current_closed(system: &System, x: f64, t: f64) -> (f64, f64) {
    let path = classical_path(system, t);
    let sigma = if system.params().epsilon() == 0.0 {
        // classical width: constant for free/linear, |Theta| sigma0 harmonic
        dressing_factor(system, t).abs() * system.packet().sigma0()
    } else {
        complex_width(system, t).sigma
    };
    let d = x - path.position;
    let rho = (-0.5 * d * d / (sigma * sigma)).exp()
        / (2.0 * std::f64::consts::PI * sigma * sigma).sqrt();
    let v = velocity_field(system, x, t);
    (rho, v * rho)
}

/// Scaled velocity field v(x, t) = theta(t) (x - x_t) + p_t/m.
pub fn velocity_field(system: &System, x: f64, t: f64) -> f64 {
    let path = classical_path(system, t);
    let stretch = if system.params().epsilon() == 0.0 {
        match *system.potential() {
            Potential::Free | Potential::Linear { .. } => 0.0,
            Potential::Harmonic { .. } => {
                dressing_factor_dt(system, t) / dressing_factor(system, t)
            }
        }
    } else {
        theta(system, t)
    };
    stretch * (x - path.position) + path.momentum / system.params().mass()
}

/// Density and current of a sampled field: rho = |psi|^2 and
/// j = (hbar~/m) Im(psi* dpsi/dx) e^{-gamma t} with centered differences.
pub fn density_current_field(
    field: &WaveField,
    params: &crate::params::ModelParams,
) -> (Vec<f64>, Vec<f64>) {
    let n = field.values.len();
    let dx = field.grid.dx();
    let factor = params.hbar_tilde() / params.mass() * (-params.gamma() * field.time).exp();
    let rho: Vec<f64> = field.values.iter().map(|v| v.norm_sqr()).collect();
    let mut j = vec![0.0; n];
    for i in 0..n {
        let dpsi = if i == 0 {
            (field.values[1] - field.values[0]) / dx
        } else if i == n - 1 {
            (field.values[n - 1] - field.values[n - 2]) / dx
        } else {
            (field.values[i + 1] - field.values[i - 1]) / (2.0 * dx)
        };
        j[i] = factor * (field.values[i].conj() * dpsi).im;
    }
    (rho, j)
}

/// Probability mass of the analytic packet lying outside the grid.
pub fn grid_tail_mass(system: &System, grid: &Grid, t: f64) -> f64 {
    let path = classical_path(system, t);
    let sigma = if system.params().epsilon() == 0.0 {
        dressing_factor(system, t).abs() * system.packet().sigma0()
    } else {
        complex_width(system, t).sigma
    };
    let sqrt2 = std::f64::consts::SQRT_2;
    0.5 * erfc((path.position - grid.x_min()) / (sigma * sqrt2))
        + 0.5 * erfc((grid.x_max() - path.position) / (sigma * sqrt2))
}

/// Grid spanning the classical path over [0, t_end] padded by
/// `pad_sigmas` times the largest width, at spacing `dx`.
pub fn auto_grid(system: &System, t_end: f64, dx: f64, pad_sigmas: f64) -> Result<Grid, CoreError> {
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut sig_max: f64 = 0.0;
    let n_scan = 800;
    for i in 0..=n_scan {
        let t = t_end * i as f64 / n_scan as f64;
        let c = classical_path(system, t);
        x_lo = x_lo.min(c.position);
        x_hi = x_hi.max(c.position);
        sig_max = sig_max.max(complex_width(system, t).sigma);
    }
    let lo = x_lo - pad_sigmas * sig_max;
    let span = x_hi + pad_sigmas * sig_max - lo;
    let n = (span / dx).ceil() as usize + 1;
    Grid::new(lo, lo + (n - 1) as f64 * dx, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{GaussianSpec, ModelParams};

    fn sys(gamma: f64, eps: f64, pot: Potential) -> System {
        System::new(
            ModelParams::new(1.0, 1.0, gamma, eps).unwrap(),
            pot,
            GaussianSpec::new(1.0, -10.0, 5.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn initial_packet_matches_gaussian() {
        let s = sys(0.1, 1.0, Potential::Free);
        let grid = Grid::new(-20.0, 0.0, 2001).unwrap();
        let f = wavefunction(&s, &grid, 0.0).unwrap();
        let norm = (2.0 * std::f64::consts::PI).powf(-0.25);
        let mut max_dev: f64 = 0.0;
        for (i, x) in grid.points().enumerate() {
            let expect = norm
                * Complex64::new(-(x + 10.0) * (x + 10.0) / 4.0, 5.0 * (x + 10.0)).exp();
            max_dev = max_dev.max((f.values[i] - expect).norm());
        }
        assert!(max_dev < 1e-12, "max deviation {max_dev}");
    }

    #[test]
    fn normalization_on_adequate_grid() {
        for pot in [Potential::Free, Potential::Linear { a: -0.5 }] {
            let s = sys(0.1, 0.5, pot);
            let grid = auto_grid(&s, 5.0, 0.01, 8.0).unwrap();
            for &t in &[0.0, 2.0, 5.0] {
                let f = wavefunction(&s, &grid, t).unwrap();
                assert!((f.norm_sq() - 1.0).abs() < 1e-8, "{pot:?} t={t}");
                assert!(grid_tail_mass(&s, &grid, t) < 1e-10);
            }
        }
    }

    #[test]
    fn epsilon_zero_has_no_wavefunction() {
        let s = sys(0.1, 0.0, Potential::Free);
        let grid = Grid::new(-20.0, 20.0, 101).unwrap();
        assert!(matches!(wavefunction(&s, &grid, 1.0), Err(AnalyticError::EpsilonZero)));
    }

    #[test]
    fn current_at_center_rides_classical_path() {
        for pot in [Potential::Free, Potential::Linear { a: -0.5 }] {
            let s = sys(0.1, 1.0, pot);
            for &t in &[0.5, 2.0] {
                let c = classical_path(&s, t);
                let (rho, j) = density_current_closed(&s, c.position, t);
                assert!((j - rho * c.momentum).abs() < 1e-14);
                assert!((velocity_field(&s, c.position, t) - c.momentum).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn classical_free_current_is_drift_times_density() {
        let s = sys(0.0, 0.0, Potential::Free);
        for &x in &[-12.0, -10.0, -7.5] {
            let (rho, j) = density_current_closed(&s, x, 1.3);
            assert!((j - 5.0 * rho).abs() < 1e-14);
        }
        // viscid classical: v = p0 e^{-gamma t}/m everywhere
        let s = sys(0.1, 0.0, Potential::Free);
        let v = velocity_field(&s, -3.0, 2.0);
        assert!((v - 5.0 * (-0.2f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn harmonic_velocity_field_flat_at_t0() {
        let s = System::new(
            ModelParams::new(1.0, 1.0, 0.1, 1.0).unwrap(),
            Potential::Harmonic { omega0: 0.5 },
            GaussianSpec::new(1.0, 1.0, 0.0).unwrap(),
        )
        .unwrap();
        for &x in &[-2.0, 0.0, 1.0, 3.0] {
            assert!(velocity_field(&s, x, 0.0).abs() < 1e-12);
        }
    }

    #[test]
    fn field_current_matches_closed_current() {
        // centered differences carry an O((k dx)^2/6) derivative error, so
        // the tolerance tracks the grid
        let s = sys(0.1, 0.5, Potential::Linear { a: -0.5 });
        let grid = auto_grid(&s, 2.0, 0.001, 8.0).unwrap();
        let f = wavefunction(&s, &grid, 2.0).unwrap();
        let (rho, j) = density_current_field(&f, s.params());
        let mut max_dev: f64 = 0.0;
        for (i, x) in grid.points().enumerate() {
            let (rc, jc) = density_current_closed(&s, x, 2.0);
            if rc > 1e-8 {
                max_dev = max_dev.max((rho[i] - rc).abs().max((j[i] - jc).abs()));
            }
        }
        assert!(max_dev < 2.5e-5, "max deviation {max_dev}");
    }

    #[test]
    fn continuity_residual_refines_at_second_order() {
        // finite-difference residual d rho/dt + dj/dx of the closed forms
        let s = sys(0.1, 1.0, Potential::Free);
        let res = |h: f64| -> f64 {
            let t = 1.5;
            let mut worst: f64 = 0.0;
            for k in -40..=40 {
                let x = classical_path(&s, t).position + k as f64 * 0.1;
                let (rp, _) = density_current_closed(&s, x, t + h);
                let (rm, _) = density_current_closed(&s, x, t - h);
                let (_, jp) = density_current_closed(&s, x + h, t);
                let (_, jm) = density_current_closed(&s, x - h, t);
                worst = worst.max(((rp - rm) / (2.0 * h) + (jp - jm) / (2.0 * h)).abs());
            }
            worst
        };
        let (r1, r2) = (res(1e-3), res(5e-4));
        let order = (r1 / r2).log2();
        assert!(order > 1.9, "observed order {order} ({r1} -> {r2})");
    }
}
