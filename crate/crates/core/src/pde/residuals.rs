//! Discrete residuals of the continuity and Hamilton-Jacobi equations, and
//! the Newton-law check along trajectories. All residuals are diagnostics;
//! they certify that fields and trajectories satisfy the dynamics they claim.

use super::polar::PolarFields;
use crate::params::{ModelParams, Potential};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// L2 norm of d rho/dt + d j/dx at the middle sample
    pub continuity: f64,
    /// L2 norm of dS/dt + (dS/dx)^2 e^{-gt}/2m + V e^{gt} + Q e^{-gt}
    pub hamilton_jacobi: f64,
    /// same without the Q term (the classical equation)
    pub classical_hamilton_jacobi: f64,
}

/// Centered-difference residuals at the middle of >= 3 uniformly spaced
/// samples, in the density-weighted L2 norm sqrt(int res^2 rho dx / int rho
/// dx). The weighting keeps far-tail nodes, where any numerical field loses
/// all relative accuracy, from polluting a convergence study.
pub fn equation_residuals(
    polars: &[PolarFields],
    params: &ModelParams,
    potential: &Potential,
) -> ResidualReport {
    assert!(polars.len() >= 3, "need at least 3 consecutive time samples");
    let mid = polars.len() / 2;
    let (prev, cur, next) = (&polars[mid - 1], &polars[mid], &polars[mid + 1]);
    let dt = next.time - cur.time;
    assert!(
        ((cur.time - prev.time) - dt).abs() < 1e-9 * dt.abs().max(1e-12),
        "samples must be uniformly spaced"
    );
    let grid = cur.grid;
    let n = grid.n_points();
    let dx = grid.dx();
    let m = params.mass();
    let gamma = params.gamma();
    let decay = (-gamma * cur.time).exp();
    let grow = (gamma * cur.time).exp();

    // Bulk region: below ~1e-2 of the peak amplitude the relative accuracy
    // of any numerically evolved field is too poor for phase-sensitive
    // diagnostics. The excluded probability mass is < 1e-8.
    let r_max = cur.r.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = 1e-2 * r_max;

    // current j = rho (dS/dx) e^{-gt} / m on the middle sample
    let mut j = vec![0.0; n];
    for i in 1..n - 1 {
        let ds = (cur.s[i + 1] - cur.s[i - 1]) / (2.0 * dx);
        j[i] = cur.r[i] * cur.r[i] * ds * decay / m;
    }

    let mut cont_sq = 0.0;
    let mut hj_sq = 0.0;
    let mut chj_sq = 0.0;
    let mut weight = 0.0;
    for i in 2..n - 2 {
        if cur.r[i] <= cutoff {
            continue;
        }
        let rho = cur.r[i] * cur.r[i];
        weight += rho;
        let drho_dt =
            (next.r[i] * next.r[i] - prev.r[i] * prev.r[i]) / (2.0 * dt);
        let dj_dx = (j[i + 1] - j[i - 1]) / (2.0 * dx);
        let cont = drho_dt + dj_dx;
        cont_sq += cont * cont * rho;

        let ds_dt = (next.s[i] - prev.s[i]) / (2.0 * dt);
        let ds_dx = (cur.s[i + 1] - cur.s[i - 1]) / (2.0 * dx);
        let v = potential.value(m, grid.x(i));
        let classical = ds_dt + ds_dx * ds_dx * decay / (2.0 * m) + v * grow;
        let hj = classical + cur.q[i] * decay;
        hj_sq += hj * hj * rho;
        chj_sq += classical * classical * rho;
    }
    ResidualReport {
        continuity: (cont_sq / weight).sqrt(),
        hamilton_jacobi: (hj_sq / weight).sqrt(),
        classical_hamilton_jacobi: (chj_sq / weight).sqrt(),
    }
}

/// Max |m x'' + m gamma x' + V'(x) + e^{-gt} dQ/dx| along a trajectory whose
/// samples align with the polar-field samples.
pub fn bohmian_force_check(
    polars: &[PolarFields],
    params: &ModelParams,
    potential: &Potential,
    times: &[f64],
    positions: &[f64],
) -> f64 {
    assert!(polars.len() >= 3 && polars.len() == times.len() && times.len() == positions.len());
    for (p, &t) in polars.iter().zip(times) {
        assert!((p.time - t).abs() < 1e-9 * t.abs().max(1e-12), "trajectory/field time mismatch");
    }
    let dt = times[1] - times[0];
    let m = params.mass();
    let gamma = params.gamma();
    let mut worst: f64 = 0.0;
    for k in 1..times.len() - 1 {
        let xk = positions[k];
        let xdd = (positions[k + 1] - 2.0 * xk + positions[k - 1]) / (dt * dt);
        let xd = (positions[k + 1] - positions[k - 1]) / (2.0 * dt);
        let dq_dx = interp_gradient(&polars[k], xk);
        let res = m * xdd
            + m * gamma * xd
            + potential.gradient(m, xk)
            + (-gamma * times[k]).exp() * dq_dx;
        worst = worst.max(res.abs());
    }
    worst
}

/// dQ/dx at x by centered differences on the grid and linear interpolation.
fn interp_gradient(polar: &PolarFields, x: f64) -> f64 {
    let grid = polar.grid;
    let n = grid.n_points();
    let dx = grid.dx();
    let grad = |i: usize| -> f64 {
        if i == 0 || i >= n - 1 {
            0.0
        } else {
            (polar.q[i + 1] - polar.q[i - 1]) / (2.0 * dx)
        }
    };
    let f = ((x - grid.x_min()) / dx).clamp(0.0, (n - 1) as f64);
    let i = (f.floor() as usize).min(n - 2);
    let w = f - i as f64;
    grad(i) * (1.0 - w) + grad(i + 1) * w
}
