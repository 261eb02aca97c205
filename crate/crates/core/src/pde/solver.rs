//! Crank-Nicolson stepping with midpoint coefficient evaluation for the
//! scaled linear equation and the nonlinear transition equation.
//!
//! Both equations share one stepper:
//!
//!   i he d/dt chi = -(he^2/2m) e^{-gt} chi''  - i (he^2 k_c(t)/m) e^{-gt} chi'
//!                   + [V(x) e^{gt} + W_nl(x)] chi
//!
//! where he is the governing constant (hbar~ for the scaled equation, bare
//! hbar for the transition one). With the optional carrier gauge the packet
//! is evolved in a frame co-moving with the canonical momentum; the linear
//! potential term then cancels exactly and only the slow envelope is stepped.
//! The matrix stays Hermitian tridiagonal, so the box-bounded step is
//! exactly norm-preserving.

use num_complex::Complex64;

use super::polar::unwrap_phase;
use super::{Boundary, PdeError, SolverConfig};
use crate::numeric::{decay_ratio, decay_ratio2, growth_ratio, sinh_ratio3};
use crate::params::{ModelParams, Potential, System, WaveField};

/// Time-sampled solver output plus run diagnostics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub fields: Vec<WaveField>,
    pub report: SolveReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    /// Largest |norm(t+dt) - norm(t)| over all steps.
    pub max_norm_drift: f64,
    /// Largest fixed-point iteration count (1 for the linear equation).
    pub max_nonlinear_iters: usize,
    /// Nodes where the nonlinear term was masked below the amplitude floor.
    pub floor_events: usize,
    /// Explicit-scheme advisory step for reference.
    pub advisory_dt: f64,
}

struct Carrier {
    p_c0: f64,
    accel: f64, // linear-potential acceleration, 0 for free
}

impl Carrier {
    /// canonical momentum p_c(t) = p_c0 - m a (e^{gt}-1)/g
    fn p_c(&self, m: f64, gamma: f64, t: f64) -> f64 {
        self.p_c0 - m * self.accel * growth_ratio(gamma, t)
    }

    /// accumulated scalar phase (1/(2 m he)) int p_c^2 e^{-gs} ds
    fn phase(&self, m: f64, gamma: f64, he: f64, t: f64) -> f64 {
        let ma = m * self.accel;
        (self.p_c0 * self.p_c0 * decay_ratio(gamma, t)
            - 2.0 * self.p_c0 * ma * decay_ratio2(gamma, t)
            + ma * ma * sinh_ratio3(gamma, t))
            / (2.0 * m * he)
    }
}

struct Stepper<'a> {
    config: &'a SolverConfig,
    params: &'a ModelParams,
    potential: Potential,
    /// governing constant: hbar~ (scaled) or hbar (transition)
    he: f64,
    /// (1 - eps) hbar^2 / (2m) for the transition equation, else 0
    nl_coeff: f64,
    carrier: Option<Carrier>,
}

impl<'a> Stepper<'a> {
    fn run(&self, initial: &WaveField, sample_times: &[f64]) -> Result<Solution, PdeError> {
        let grid = &self.config.grid;
        if initial.grid != *grid {
            return Err(PdeError::GridMismatch);
        }
        let dt = self.config.dt;
        let n = grid.n_points();
        let dx = grid.dx();
        let m = self.params.mass();
        let gamma = self.params.gamma();

        // map sample times onto step indices
        let mut sample_steps = Vec::with_capacity(sample_times.len());
        for &t in sample_times {
            let k = (t / dt).round();
            if (t - k * dt).abs() > 1e-9 * t.abs().max(1.0) {
                return Err(PdeError::BadSampleTime(t));
            }
            sample_steps.push(k as usize);
        }
        let last_step = sample_steps.iter().copied().max().unwrap_or(0);

        // gauge the initial field
        let mut chi: Vec<Complex64> = initial.values.clone();
        if let Some(c) = &self.carrier {
            let k0 = c.p_c(m, gamma, 0.0) / self.he;
            for (i, v) in chi.iter_mut().enumerate() {
                let ph = -k0 * grid.x(i);
                *v *= Complex64::new(ph.cos(), ph.sin());
            }
        }

        let edge_mask = self.edge_mask();
        let mut fields = Vec::with_capacity(sample_steps.len());
        let mut report = SolveReport {
            max_norm_drift: 0.0,
            max_nonlinear_iters: 1,
            floor_events: 0,
            advisory_dt: self.config.stability_advisory_dt(self.params),
        };
        let mut emit = |step: usize, chi: &[Complex64], report: &SolveReport| {
            let _ = report;
            for (si, &s) in sample_steps.iter().enumerate() {
                if s == step && fields.len() <= si {
                    fields.push(self.ungauge(chi, step as f64 * dt));
                }
            }
        };
        emit(0, &chi, &report);

        let mut diag = vec![Complex64::new(0.0, 0.0); n];
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); n];
        let mut potential_row = vec![0.0; n];
        let mut curvature = vec![0.0; n];

        for step in 0..last_step {
            let t_mid = (step as f64 + 0.5) * dt;
            let decay = (-gamma * t_mid).exp();
            let kappa = self.he * decay / (2.0 * m * dx * dx);
            let beta = match &self.carrier {
                Some(c) => c.p_c(m, gamma, t_mid) * decay / (2.0 * m * dx),
                None => 0.0,
            };
            // potential row (zero when the carrier gauge cancels it)
            match (&self.carrier, self.potential) {
                (Some(_), _) => potential_row.iter_mut().for_each(|v| *v = 0.0),
                (None, pot) => {
                    let grow = (gamma * t_mid).exp();
                    for (i, v) in potential_row.iter_mut().enumerate() {
                        *v = pot.value(m, grid.x(i)) * grow / self.he;
                    }
                }
            }

            let lam = 0.5 * dt;
            let up = Complex64::new(lam * beta, -lam * kappa);
            let lo = Complex64::new(-lam * beta, -lam * kappa);
            let norm_before = norm_sq(&chi, dx);

            let mut iters = 1;
            let mut prev_iterate: Option<Vec<Complex64>> = None;
            loop {
                // frozen-amplitude curvature term at the step midpoint
                if self.nl_coeff != 0.0 {
                    let floor = self.config.amplitude_floor;
                    for i in 0..n {
                        let amp_mid = |j: usize| -> f64 {
                            let old = chi[j].norm();
                            match &prev_iterate {
                                Some(p) => 0.5 * (old + p[j].norm()),
                                None => old,
                            }
                        };
                        if i == 0 || i == n - 1 {
                            curvature[i] = 0.0;
                            continue;
                        }
                        let r = amp_mid(i);
                        if r < floor {
                            curvature[i] = 0.0;
                            report.floor_events += 1;
                            continue;
                        }
                        curvature[i] =
                            (amp_mid(i + 1) - 2.0 * r + amp_mid(i - 1)) / (dx * dx * r);
                    }
                }

                for i in 0..n {
                    let mut h_diag = 2.0 * kappa + potential_row[i];
                    if self.nl_coeff != 0.0 {
                        h_diag += self.nl_coeff * decay * curvature[i] / self.he;
                    }
                    diag[i] = Complex64::new(1.0, lam * h_diag);
                    // B = conj-structure: 1 - i lam H
                    let b_diag = Complex64::new(1.0, -lam * h_diag);
                    let mut acc = b_diag * chi[i];
                    if i > 0 {
                        acc -= lo * chi[i - 1];
                    }
                    if i < n - 1 {
                        acc -= up * chi[i + 1];
                    }
                    rhs[i] = acc;
                }
                thomas(&diag, lo, up, &rhs, &mut next, &mut scratch);

                if self.nl_coeff == 0.0 {
                    break;
                }
                if let Some(prev) = &prev_iterate {
                    let mut diff = 0.0;
                    for i in 0..n {
                        diff += (next[i] - prev[i]).norm_sqr();
                    }
                    if (diff * dx).sqrt() < self.config.nonlinear_tol {
                        break;
                    }
                }
                iters += 1;
                if iters > self.config.nonlinear_max_iter {
                    return Err(PdeError::NonlinearDivergence {
                        max_iter: self.config.nonlinear_max_iter,
                        time: t_mid,
                    });
                }
                prev_iterate = Some(next.clone());
            }
            report.max_nonlinear_iters = report.max_nonlinear_iters.max(iters);
            std::mem::swap(&mut chi, &mut next);

            if let Some(mask) = &edge_mask {
                for (v, &w) in chi.iter_mut().zip(mask) {
                    *v *= w;
                }
            }
            if matches!(self.config.boundary, Boundary::Box) {
                let drift = (norm_sq(&chi, dx) - norm_before).abs();
                report.max_norm_drift = report.max_norm_drift.max(drift);
            }
            if step % 128 == 0 && !chi.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
                return Err(PdeError::NonFiniteDetected { step, time: (step + 1) as f64 * dt });
            }
            emit(step + 1, &chi, &report);
        }
        if !chi.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(PdeError::NonFiniteDetected { step: last_step, time: last_step as f64 * dt });
        }
        Ok(Solution { fields, report })
    }

    fn ungauge(&self, chi: &[Complex64], t: f64) -> WaveField {
        let grid = self.config.grid;
        let values = match &self.carrier {
            None => chi.to_vec(),
            Some(c) => {
                let m = self.params.mass();
                let gamma = self.params.gamma();
                let k = c.p_c(m, gamma, t) / self.he;
                let phi = c.phase(m, gamma, self.he, t);
                chi.iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let ph = k * grid.x(i) - phi;
                        v * Complex64::new(ph.cos(), ph.sin())
                    })
                    .collect()
            }
        };
        WaveField::new(grid, values, t)
    }

    fn edge_mask(&self) -> Option<Vec<f64>> {
        match self.config.boundary {
            Boundary::Box => None,
            Boundary::DampedEdges { width, strength } => {
                let grid = &self.config.grid;
                let mask = grid
                    .points()
                    .map(|x| {
                        let d = (x - grid.x_min()).min(grid.x_max() - x);
                        if d >= width {
                            1.0
                        } else {
                            let s = (width - d) / width;
                            (-strength * self.config.dt * s * s).exp()
                        }
                    })
                    .collect();
                Some(mask)
            }
        }
    }
}

fn norm_sq(v: &[Complex64], dx: f64) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx
}

/// Complex tridiagonal solve with constant off-diagonals (Thomas algorithm).
fn thomas(
    diag: &[Complex64],
    lo: Complex64,
    up: Complex64,
    rhs: &[Complex64],
    out: &mut [Complex64],
    scratch: &mut [Complex64],
) {
    let n = diag.len();
    scratch[0] = up / diag[0];
    out[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - lo * scratch[i - 1];
        scratch[i] = up / den;
        out[i] = (rhs[i] - lo * out[i - 1]) / den;
    }
    for i in (0..n - 1).rev() {
        let t = scratch[i] * out[i + 1];
        out[i] = out[i] - t;
    }
}

fn check_carrier(config: &SolverConfig, potential: &Potential) -> Result<Option<Carrier>, PdeError> {
    match (config.carrier, potential) {
        (None, _) => Ok(None),
        (Some(p_c0), Potential::Free) => Ok(Some(Carrier { p_c0, accel: 0.0 })),
        (Some(p_c0), Potential::Linear { a }) => Ok(Some(Carrier { p_c0, accel: *a })),
        (Some(_), Potential::Harmonic { .. }) => Err(PdeError::CarrierUnsupported),
    }
}

/// Propagate the scaled linear equation. Requires epsilon > 0.
pub fn solve_scaled(
    config: &SolverConfig,
    system: &System,
    initial: &WaveField,
    sample_times: &[f64],
) -> Result<Solution, PdeError> {
    if system.params().epsilon() == 0.0 {
        return Err(PdeError::EpsilonZero);
    }
    let stepper = Stepper {
        config,
        params: system.params(),
        potential: *system.potential(),
        he: system.params().hbar_tilde(),
        nl_coeff: 0.0,
        carrier: check_carrier(config, system.potential())?,
    };
    stepper.run(initial, sample_times)
}

/// Propagate the nonlinear transition equation, resolving the
/// amplitude-curvature term by frozen-amplitude fixed-point iteration each
/// implicit step. Requires epsilon >= 1e-3.
pub fn solve_transition(
    config: &SolverConfig,
    system: &System,
    initial: &WaveField,
    sample_times: &[f64],
) -> Result<Solution, PdeError> {
    let eps = system.params().epsilon();
    if eps == 0.0 {
        return Err(PdeError::EpsilonZero);
    }
    if eps < 1e-3 {
        return Err(PdeError::EpsilonBelowFloor(eps));
    }
    let hbar = system.params().hbar();
    let stepper = Stepper {
        config,
        params: system.params(),
        potential: *system.potential(),
        he: hbar,
        nl_coeff: (1.0 - eps) * hbar * hbar / (2.0 * system.params().mass()),
        carrier: check_carrier(config, system.potential())?,
    };
    stepper.run(initial, sample_times)
}

/// Map a transition-equation field onto the scaled-equation field:
/// psi~ = psi_eps exp[(i/hbar)(1/sqrt(eps) - 1) S_eps], with S_eps read off
/// the unwrapped phase of psi_eps.
pub fn map_transition_to_scaled(
    field: &WaveField,
    params: &ModelParams,
) -> Result<WaveField, PdeError> {
    let eps = params.epsilon();
    if eps == 0.0 {
        return Err(PdeError::EpsilonZero);
    }
    if eps == 1.0 {
        return Ok(field.clone());
    }
    let max_amp = field.values.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let phases = unwrap_phase(&field.values, 1e-10 * max_amp)?;
    let factor = 1.0 / eps.sqrt() - 1.0;
    let values = field
        .values
        .iter()
        .zip(&phases)
        .map(|(v, &ph)| v * Complex64::new(0.0, factor * ph).exp())
        .collect();
    Ok(WaveField::new(field.grid, values, field.time))
}
