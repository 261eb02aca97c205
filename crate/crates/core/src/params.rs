//! Shared parameter, potential, and state types.
//!
//! Everything here is validated on construction and immutable afterwards, so
//! values can be shared freely across threads. Units are caller-chosen natural
//! units; nothing in the engine rescales.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("mass must be positive, got {0}")]
    NonPositiveMass(f64),
    #[error("hbar must be positive, got {0}")]
    NonPositiveHbar(f64),
    #[error("friction gamma must be non-negative, got {0}")]
    NegativeGamma(f64),
    #[error("epsilon must lie in [0, 1], got {0}")]
    EpsilonOutOfRange(f64),
    #[error("harmonic frequency omega0 must be positive, got {0}")]
    NonPositiveOmega(f64),
    #[error("overdamped oscillator unsupported: omega0 = {omega0} <= gamma/2 = {half_gamma}")]
    OverdampedUnsupported { omega0: f64, half_gamma: f64 },
    #[error("initial width sigma0 must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("grid needs x_min < x_max and at least 2 points: [{x_min}, {x_max}] n={n_points}")]
    InvalidGrid { x_min: f64, x_max: f64, n_points: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Scaled Planck constant hbar*sqrt(epsilon). epsilon = 1 recovers hbar,
/// epsilon = 0 the classical limit.
pub fn scaled_planck(hbar: f64, epsilon: f64) -> f64 {
    debug_assert!(hbar > 0.0 && (0.0..=1.0).contains(&epsilon));
    hbar * epsilon.sqrt()
}

/// Mass, Planck constant, friction and quantumness degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelParams", into = "RawModelParams")]
pub struct ModelParams {
    mass: f64,
    hbar: f64,
    gamma: f64,
    epsilon: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawModelParams {
    mass: f64,
    hbar: f64,
    gamma: f64,
    epsilon: f64,
}

impl TryFrom<RawModelParams> for ModelParams {
    type Error = CoreError;
    fn try_from(r: RawModelParams) -> Result<Self, CoreError> {
        ModelParams::new(r.mass, r.hbar, r.gamma, r.epsilon)
    }
}

impl From<ModelParams> for RawModelParams {
    fn from(p: ModelParams) -> Self {
        RawModelParams { mass: p.mass, hbar: p.hbar, gamma: p.gamma, epsilon: p.epsilon }
    }
}

impl ModelParams {
    pub fn new(mass: f64, hbar: f64, gamma: f64, epsilon: f64) -> Result<Self, CoreError> {
        if !mass.is_finite() || !hbar.is_finite() || !gamma.is_finite() || !epsilon.is_finite() {
            return Err(CoreError::NonFinite("ModelParams"));
        }
        if mass <= 0.0 {
            return Err(CoreError::NonPositiveMass(mass));
        }
        if hbar <= 0.0 {
            return Err(CoreError::NonPositiveHbar(hbar));
        }
        if gamma < 0.0 {
            return Err(CoreError::NegativeGamma(gamma));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(CoreError::EpsilonOutOfRange(epsilon));
        }
        Ok(ModelParams { mass, hbar, gamma, epsilon })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// hbar * sqrt(epsilon)
    pub fn hbar_tilde(&self) -> f64 {
        scaled_planck(self.hbar, self.epsilon)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self, CoreError> {
        ModelParams::new(self.mass, self.hbar, gamma, self.epsilon)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, CoreError> {
        ModelParams::new(self.mass, self.hbar, self.gamma, epsilon)
    }
}

/// The three solvable external potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Potential {
    Free,
    /// V(x) = m a x with constant acceleration a of either sign.
    Linear { a: f64 },
    /// V(x) = m omega0^2 x^2 / 2, underdamped only (omega0 > gamma/2).
    Harmonic { omega0: f64 },
}

impl Potential {
    /// dV/dx at `x`, per unit of the configured mass times nothing: full V'(x).
    pub fn gradient(&self, mass: f64, x: f64) -> f64 {
        match *self {
            Potential::Free => 0.0,
            Potential::Linear { a } => mass * a,
            Potential::Harmonic { omega0 } => mass * omega0 * omega0 * x,
        }
    }

    pub fn value(&self, mass: f64, x: f64) -> f64 {
        match *self {
            Potential::Free => 0.0,
            Potential::Linear { a } => mass * a * x,
            Potential::Harmonic { omega0 } => 0.5 * mass * omega0 * omega0 * x * x,
        }
    }
}

/// Initial Gaussian packet: width sigma0, center x0, mean momentum p0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGaussianSpec", into = "RawGaussianSpec")]
pub struct GaussianSpec {
    sigma0: f64,
    x0: f64,
    p0: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawGaussianSpec {
    sigma0: f64,
    x0: f64,
    p0: f64,
}

impl TryFrom<RawGaussianSpec> for GaussianSpec {
    type Error = CoreError;
    fn try_from(r: RawGaussianSpec) -> Result<Self, CoreError> {
        GaussianSpec::new(r.sigma0, r.x0, r.p0)
    }
}

impl From<GaussianSpec> for RawGaussianSpec {
    fn from(g: GaussianSpec) -> Self {
        RawGaussianSpec { sigma0: g.sigma0, x0: g.x0, p0: g.p0 }
    }
}

impl GaussianSpec {
    pub fn new(sigma0: f64, x0: f64, p0: f64) -> Result<Self, CoreError> {
        if !sigma0.is_finite() || !x0.is_finite() || !p0.is_finite() {
            return Err(CoreError::NonFinite("GaussianSpec"));
        }
        if sigma0 <= 0.0 {
            return Err(CoreError::NonPositiveSigma(sigma0));
        }
        Ok(GaussianSpec { sigma0, x0, p0 })
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }
}

/// Uniform spatial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl TryFrom<RawGrid> for Grid {
    type Error = CoreError;
    fn try_from(r: RawGrid) -> Result<Self, CoreError> {
        Grid::new(r.x_min, r.x_max, r.n_points)
    }
}

impl From<Grid> for RawGrid {
    fn from(g: Grid) -> Self {
        RawGrid { x_min: g.x_min, x_max: g.x_max, n_points: g.n_points }
    }
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self, CoreError> {
        if !x_min.is_finite() || !x_max.is_finite() || x_min >= x_max || n_points < 2 {
            return Err(CoreError::InvalidGrid { x_min, x_max, n_points });
        }
        Ok(Grid { x_min, x_max, n_points })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Nearest node index to `x` (clamped to the grid).
    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.dx()).round();
        (i.max(0.0) as usize).min(self.n_points - 1)
    }
}

/// Complex wavefunction samples on a uniform grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl WaveField {
    pub fn new(grid: Grid, values: Vec<Complex64>, time: f64) -> Self {
        assert_eq!(grid.n_points(), values.len(), "grid/value length mismatch");
        WaveField { grid, values, time }
    }

    /// Discrete norm integral sum(|psi|^2) dx.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sq().sqrt();
        if n > 0.0 {
            let inv = 1.0 / n;
            for v in &mut self.values {
                *v *= inv;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Grid expectation value of x over |psi|^2, normalized by the discrete norm.
    pub fn expectation_x(&self) -> f64 {
        let dx = self.grid.dx();
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let w = v.norm_sqr();
            num += self.grid.x(i) * w;
            den += w;
        }
        let _ = dx;
        num / den
    }

    /// Standard deviation of x over |psi|^2.
    pub fn width_x(&self) -> f64 {
        let mean = self.expectation_x();
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let w = v.norm_sqr();
            let d = self.grid.x(i) - mean;
            num += d * d * w;
            den += w;
        }
        (num / den).sqrt()
    }

    /// L2 distance between moduli: sqrt(sum (|a|-|b|)^2 dx).
    pub fn modulus_l2_distance(&self, other: &WaveField) -> f64 {
        assert_eq!(self.grid, other.grid);
        let dx = self.grid.dx();
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let d = a.norm() - b.norm();
                d * d
            })
            .sum();
        (s * dx).sqrt()
    }

    /// L2 distance between densities |a|^2 vs |b|^2.
    pub fn density_l2_distance(&self, other: &WaveField) -> f64 {
        assert_eq!(self.grid, other.grid);
        let dx = self.grid.dx();
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let d = a.norm_sqr() - b.norm_sqr();
                d * d
            })
            .sum();
        (s * dx).sqrt()
    }
}

/// Validate a (params, potential) pair; rejects the overdamped oscillator.
pub fn validate(params: &ModelParams, potential: &Potential) -> Result<(), CoreError> {
    match *potential {
        Potential::Free | Potential::Linear { .. } => Ok(()),
        Potential::Harmonic { omega0 } => {
            if omega0 <= 0.0 {
                Err(CoreError::NonPositiveOmega(omega0))
            } else if omega0 <= params.gamma() / 2.0 {
                Err(CoreError::OverdampedUnsupported { omega0, half_gamma: params.gamma() / 2.0 })
            } else {
                Ok(())
            }
        }
    }
}

/// A validated (params, potential, packet) triple; the input to every
/// closed-form operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct System {
    params: ModelParams,
    potential: Potential,
    packet: GaussianSpec,
}

impl System {
    pub fn new(
        params: ModelParams,
        potential: Potential,
        packet: GaussianSpec,
    ) -> Result<Self, CoreError> {
        validate(&params, &potential)?;
        Ok(System { params, potential, packet })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn packet(&self) -> &GaussianSpec {
        &self.packet
    }
}
