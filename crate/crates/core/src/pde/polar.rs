//! Polar decomposition psi = R exp(i S / hbar~) with grid phase unwrapping,
//! and the curvature (quantum) potential.

use num_complex::Complex64;

use super::PdeError;
use crate::params::{Grid, ModelParams, WaveField};

/// Amplitude, unwrapped phase action, and quantum potential on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarFields {
    pub grid: Grid,
    pub time: f64,
    /// R = |psi| >= 0
    pub r: Vec<f64>,
    /// S = hbar~ * unwrapped arg psi
    pub s: Vec<f64>,
    /// Q = -(hbar~^2/2m) R''/R, masked to 0 below the amplitude floor
    pub q: Vec<f64>,
}

/// Unwrap arg(values) by nearest-branch continuation outward from the global
/// amplitude maximum. Nodes below `floor` inherit the neighboring branch;
/// above it a jump of pi or more is an error.
pub(crate) fn unwrap_phase(values: &[Complex64], floor: f64) -> Result<Vec<f64>, PdeError> {
    let n = values.len();
    let raw: Vec<f64> = values.iter().map(|v| v.im.atan2(v.re)).collect();
    let amps: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let anchor = amps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut out = vec![0.0; n];
    out[anchor] = raw[anchor];
    let wrap = |d: f64| -> f64 {
        let mut d = d % std::f64::consts::TAU;
        if d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        } else if d <= -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        d
    };
    for i in anchor + 1..n {
        let d = wrap(raw[i] - raw[i - 1]);
        if d.abs() >= std::f64::consts::PI * (1.0 - 1e-9) && amps[i] > floor && amps[i - 1] > floor
        {
            return Err(PdeError::PhaseUnwrapFailure { at: i - 1, jump: d });
        }
        out[i] = out[i - 1] + d;
    }
    for i in (0..anchor).rev() {
        let d = wrap(raw[i] - raw[i + 1]);
        if d.abs() >= std::f64::consts::PI * (1.0 - 1e-9) && amps[i] > floor && amps[i + 1] > floor
        {
            return Err(PdeError::PhaseUnwrapFailure { at: i, jump: d });
        }
        out[i] = out[i + 1] + d;
    }
    Ok(out)
}

pub fn polar_decompose(
    field: &WaveField,
    params: &ModelParams,
    amplitude_floor: f64,
) -> Result<PolarFields, PdeError> {
    let ht = params.hbar_tilde();
    let dx = field.grid.dx();
    let n = field.values.len();
    let r: Vec<f64> = field.values.iter().map(|v| v.norm()).collect();
    let phases = unwrap_phase(&field.values, amplitude_floor)?;
    let s: Vec<f64> = phases.iter().map(|p| ht * p).collect();
    let mut q = vec![0.0; n];
    let c = -ht * ht / (2.0 * params.mass());
    for i in 1..n - 1 {
        if r[i] > amplitude_floor {
            q[i] = c * (r[i + 1] - 2.0 * r[i] + r[i - 1]) / (dx * dx * r[i]);
        }
    }
    Ok(PolarFields { grid: field.grid, time: field.time, r, s, q })
}
