//! Momentum-space transform of a sampled field.
//!
//! phi(p, t) = (2 pi hbar~)^{-1/2} integral dx e^{-i p x / hbar~} psi(x, t),
//! evaluated on the conjugate grid p_n = (n - N/2) * 2 pi hbar~ / (N dx) so
//! that the discrete Parseval identity holds exactly.

use num_complex::Complex64;

use crate::params::{ModelParams, WaveField};

/// Momentum-space samples on a uniform conjugate grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumField {
    pub p: Vec<f64>,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl MomentumField {
    pub fn dp(&self) -> f64 {
        self.p[1] - self.p[0]
    }

    /// sum |phi|^2 dp
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dp()
    }

    pub fn mean_p(&self) -> f64 {
        let den: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        let num: f64 = self
            .values
            .iter()
            .zip(&self.p)
            .map(|(v, p)| v.norm_sqr() * p)
            .sum();
        num / den
    }

    pub fn std_p(&self) -> f64 {
        let mean = self.mean_p();
        let den: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        let num: f64 = self
            .values
            .iter()
            .zip(&self.p)
            .map(|(v, p)| v.norm_sqr() * (p - mean) * (p - mean))
            .sum();
        (num / den).sqrt()
    }
}

pub fn momentum_transform(field: &WaveField, params: &ModelParams) -> MomentumField {
    let ht = params.hbar_tilde();
    let n = field.grid.n_points();
    let dx = field.grid.dx();
    let dp = 2.0 * std::f64::consts::PI * ht / (n as f64 * dx);
    let p0 = -(n as f64 / 2.0).floor() * dp;
    let scale = dx / (2.0 * std::f64::consts::PI * ht).sqrt();
    let mut p = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let pj = p0 + j as f64 * dp;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in field.values.iter().enumerate() {
            let phase = -pj * field.grid.x(k) / ht;
            acc += v * Complex64::new(phase.cos(), phase.sin());
        }
        p.push(pj);
        values.push(acc * scale);
    }
    MomentumField { p, values, time: field.time }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{auto_grid, wavefunction};
    use crate::params::{GaussianSpec, ModelParams, Potential, System};

    fn sys(gamma: f64, eps: f64) -> System {
        System::new(
            ModelParams::new(1.0, 1.0, gamma, eps).unwrap(),
            Potential::Free,
            GaussianSpec::new(1.0, -10.0, 5.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn parseval_and_gaussian_shape() {
        let s = sys(0.1, 1.0);
        let grid = auto_grid(&s, 2.0, 0.02, 8.0).unwrap();
        let f = wavefunction(&s, &grid, 2.0).unwrap();
        let phi = momentum_transform(&f, s.params());
        assert!((phi.norm_sq() - f.norm_sq()).abs() < 1e-10);
        assert!((phi.mean_p() - 5.0).abs() < 1e-6);
        assert!((phi.std_p() - 0.5).abs() < 1e-4);
    }

    #[test]
    fn canonical_width_independent_of_time_and_friction() {
        for &(gamma, t) in &[(0.0, 0.0f64), (0.0, 3.0), (0.2, 3.0)] {
            let s = sys(gamma, 0.5);
            let grid = auto_grid(&s, t.max(0.5), 0.02, 8.0).unwrap();
            let f = wavefunction(&s, &grid, t).unwrap();
            let phi = momentum_transform(&f, s.params());
            let expect = s.params().hbar_tilde() / 2.0;
            assert!(
                (phi.std_p() - expect).abs() / expect < 5e-3,
                "gamma={gamma} t={t}: {} vs {expect}",
                phi.std_p()
            );
        }
    }

    #[test]
    fn matches_analytic_transform_of_initial_packet() {
        // |phi(p,0)|^2 is N(p0, (hbar~/2 sigma0)^2); check pointwise modulus
        let s = sys(0.0, 1.0);
        let grid = auto_grid(&s, 0.1, 0.01, 10.0).unwrap();
        let f = wavefunction(&s, &grid, 0.0).unwrap();
        let phi = momentum_transform(&f, s.params());
        let sp = 0.5f64;
        let mut worst: f64 = 0.0;
        for (j, &pj) in phi.p.iter().enumerate() {
            if (pj - 5.0).abs() < 3.0 {
                let expect =
                    (2.0 * std::f64::consts::PI * sp * sp).powf(-0.25)
                        * (-(pj - 5.0) * (pj - 5.0) / (4.0 * sp * sp)).exp();
                worst = worst.max((phi.values[j].norm() - expect).abs() / expect);
            }
        }
        assert!(worst < 1e-6, "worst rel deviation {worst}");
    }
}
