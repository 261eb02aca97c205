//! Arrival-time and actual-momentum distributions, from the current-density
//! route and the trajectory route.

use thiserror::Error;

use crate::analytic::{classical_path, density_current_closed, sigma_momentum};
use crate::numeric::adaptive_simpson;
use crate::params::{GaussianSpec, ModelParams, Potential, System};
use crate::trajectories::TrajectoryEnsemble;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("no probability current reaches the detector (integral {0:.3e})")]
    ZeroFlux(f64),
    #[error("no trajectory reaches the detector")]
    ZeroArrivals,
    #[error("all-arrive mode but only a fraction {arriving:.6} arrives")]
    NotAllArrived { arriving: f64 },
    #[error("{count} trajectories end undetermined: extend t_end")]
    UndeterminedArrivals { count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrivalMode {
    AllArrive,
    Renormalized,
}

/// Normalized arrival-time density at a detector, with its first moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalDistribution {
    pub detector: f64,
    pub mode: ArrivalMode,
    /// sampled times (uniform grid for the current route, bin centers for
    /// the trajectory route)
    pub times: Vec<f64>,
    /// normalized density at `times`
    pub density: Vec<f64>,
    /// normalization before renormalizing: integral of |j| over the window,
    /// or the arriving weight fraction
    pub raw_norm: f64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
}

impl ArrivalDistribution {
    /// Time of the sampled density maximum.
    pub fn peak_time(&self) -> f64 {
        let mut best = 0;
        for (i, &d) in self.density.iter().enumerate() {
            if d > self.density[best] {
                best = i;
            }
        }
        self.times[best]
    }

    /// Full width at half maximum of the sampled density, by linear
    /// interpolation of the half-level crossings around the peak.
    pub fn fwhm(&self) -> f64 {
        let mut best = 0;
        for (i, &d) in self.density.iter().enumerate() {
            if d > self.density[best] {
                best = i;
            }
        }
        let half = 0.5 * self.density[best];
        let cross = |i0: usize, i1: usize| -> f64 {
            let (d0, d1) = (self.density[i0], self.density[i1]);
            let f = (half - d0) / (d1 - d0);
            self.times[i0] + f * (self.times[i1] - self.times[i0])
        };
        let mut left = self.times[0];
        for i in (1..=best).rev() {
            if self.density[i - 1] < half && self.density[i] >= half {
                left = cross(i - 1, i);
                break;
            }
        }
        let mut right = *self.times.last().unwrap();
        for i in best..self.density.len() - 1 {
            if self.density[i] >= half && self.density[i + 1] < half {
                right = cross(i, i + 1);
                break;
            }
        }
        right - left
    }
}

/// |j(X, t)| from the closed-form current.
fn abs_current(system: &System, detector: f64, t: f64) -> f64 {
    density_current_closed(system, detector, t).1.abs()
}

/// Truncation horizon: windows of unit length are scanned until three in a
/// row stay below 1e-14 of the running peak. Dissipative currents decay
/// exponentially, so the bound gamma-scales the cap.
fn truncation_horizon(system: &System, detector: f64) -> f64 {
    let gamma = system.params().gamma();
    let t_cap = if gamma > 0.0 { (14.0 * std::f64::consts::LN_10 / gamma + 20.0).min(4000.0) } else { 600.0 };
    let mut peak = 0.0f64;
    let mut quiet = 0u32;
    let mut t = 0.0;
    while t < t_cap {
        let mut wmax = 0.0f64;
        for i in 0..20 {
            wmax = wmax.max(abs_current(system, detector, t + i as f64 / 20.0));
        }
        peak = peak.max(wmax);
        if peak > 0.0 && wmax < 1e-14 * peak {
            quiet += 1;
            if quiet >= 3 {
                return t + 1.0;
            }
        } else {
            quiet = 0;
        }
        t += 1.0;
    }
    t_cap
}

/// Integrate f piecewise between sign changes of j(X, .) so the kink of |j|
/// never lands inside a Simpson panel.
fn integrate_piecewise<F: Fn(f64) -> f64>(
    system: &System,
    detector: f64,
    t_max: f64,
    f: &F,
) -> f64 {
    let j = |t: f64| density_current_closed(system, detector, t).1;
    let n_scan = 4000;
    let mut breaks = vec![0.0];
    let mut prev = j(0.0);
    for i in 1..=n_scan {
        let t = t_max * i as f64 / n_scan as f64;
        let cur = j(t);
        if prev != 0.0 && cur != 0.0 && prev.signum() != cur.signum() {
            // bisect the sign change
            let (mut a, mut b) = (t - t_max / n_scan as f64, t);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if j(m).signum() == prev.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            breaks.push(0.5 * (a + b));
        }
        prev = cur;
    }
    breaks.push(t_max);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            total += adaptive_simpson(f, w[0], w[1], 1e-13);
        }
    }
    total
}

/// Intrinsic arrival-time distribution Pi_X(t) = |j(X,t)| / int |j(X,t')| dt'
/// from the closed-form current, sampled on a uniform grid of `n_samples`.
pub fn arrival_distribution_current(
    system: &System,
    detector: f64,
    mode: ArrivalMode,
    n_samples: usize,
) -> Result<ArrivalDistribution, StatsError> {
    let t_max = truncation_horizon(system, detector);
    let aj = |t: f64| abs_current(system, detector, t);
    let z = integrate_piecewise(system, detector, t_max, &aj);
    if z < 1e-12 {
        return Err(StatsError::ZeroFlux(z));
    }
    if mode == ArrivalMode::AllArrive && z < 0.99 {
        return Err(StatsError::NotAllArrived { arriving: z });
    }
    let mean = integrate_piecewise(system, detector, t_max, &|t| t * aj(t)) / z;
    let variance =
        integrate_piecewise(system, detector, t_max, &|t| (t - mean).powi(2) * aj(t)) / z;
    let m3 = integrate_piecewise(system, detector, t_max, &|t| (t - mean).powi(3) * aj(t)) / z;
    let n = n_samples.max(2);
    // sample out to where the density has decayed; keep the grid tight around
    // the bulk so CSV output resolves the peak
    let t_plot = (mean + 12.0 * variance.sqrt()).min(t_max);
    let times: Vec<f64> = (0..n).map(|i| t_plot * i as f64 / (n - 1) as f64).collect();
    let density: Vec<f64> = times.iter().map(|&t| aj(t) / z).collect();
    Ok(ArrivalDistribution {
        detector,
        mode,
        times,
        density,
        raw_norm: z,
        mean,
        variance,
        skewness: m3 / variance.powf(1.5),
    })
}

fn crossing_of_particle(
    times: &[f64],
    xs: &[f64],
    detector: f64,
) -> Option<f64> {
    if xs[0] == detector {
        return Some(times[0]);
    }
    let s0 = (xs[0] - detector).signum();
    for k in 1..xs.len() {
        let d = xs[k] - detector;
        if d == 0.0 {
            return Some(times[k]);
        }
        if d.signum() != s0 {
            let frac = (detector - xs[k - 1]) / (xs[k] - xs[k - 1]);
            return Some(times[k - 1] + frac * (times[k] - times[k - 1]));
        }
    }
    None
}

/// Weighted moments of (value, weight) pairs; weights need not be normalized.
fn weighted_moments(values: &[f64], weights: &[f64]) -> (f64, f64, f64) {
    let wsum: f64 = weights.iter().sum();
    let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / wsum;
    let var = values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * (v - mean) * (v - mean))
        .sum::<f64>()
        / wsum;
    let m3 = values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * (v - mean).powi(3))
        .sum::<f64>()
        / wsum;
    (mean, var, if var > 0.0 { m3 / var.powf(1.5) } else { 0.0 })
}

fn weighted_quantile(sorted: &[(f64, f64)], wsum: f64, q: f64) -> f64 {
    let target = q * wsum;
    let mut acc = 0.0;
    for &(v, w) in sorted {
        acc += w;
        if acc >= target {
            return v;
        }
    }
    sorted.last().map(|&(v, _)| v).unwrap_or(0.0)
}

/// Freedman-Diaconis bin count for weighted samples.
fn fd_bins(values: &[f64], weights: &[f64]) -> usize {
    let mut pairs: Vec<(f64, f64)> =
        values.iter().cloned().zip(weights.iter().cloned()).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let wsum: f64 = weights.iter().sum();
    let iqr = weighted_quantile(&pairs, wsum, 0.75) - weighted_quantile(&pairs, wsum, 0.25);
    let lo = pairs.first().unwrap().0;
    let hi = pairs.last().unwrap().0;
    if iqr <= 0.0 || hi <= lo {
        return 1;
    }
    let h = 2.0 * iqr / (values.len() as f64).cbrt();
    (((hi - lo) / h).ceil() as usize).clamp(1, 100_000)
}

/// Histogram-route arrival distribution and weighted mean arrival time.
/// `system` supplies the reachability bound separating "never arrives" from
/// "not yet arrived".
pub fn arrival_distribution_trajectories(
    ensemble: &TrajectoryEnsemble,
    detector: f64,
    mode: ArrivalMode,
    system: Option<&System>,
    bins: Option<usize>,
) -> Result<ArrivalDistribution, StatsError> {
    use crate::trajectories::{first_crossing_time, CrossingOutcome, Trajectory};
    let mut arrivals: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut undetermined = 0usize;
    let mut missed_weight = 0.0;
    for (i, xs) in ensemble.positions.iter().enumerate() {
        match crossing_of_particle(&ensemble.times, xs, detector) {
            Some(t) => {
                arrivals.push(t);
                weights.push(ensemble.weights[i]);
            }
            None => {
                // distinguish "never" from "not yet" when possible
                let traj = Trajectory {
                    times: ensemble.times.clone(),
                    positions: xs.clone(),
                    velocities: ensemble.velocities[i].clone(),
                };
                match first_crossing_time(&traj, detector, system) {
                    CrossingOutcome::NeverReaches => missed_weight += ensemble.weights[i],
                    CrossingOutcome::Undetermined => undetermined += 1,
                    CrossingOutcome::Crossed(_) => unreachable!("scan above found no crossing"),
                }
            }
        }
    }
    if arrivals.is_empty() {
        return Err(StatsError::ZeroArrivals);
    }
    let arriving: f64 = weights.iter().sum();
    match mode {
        ArrivalMode::AllArrive => {
            if undetermined > 0 {
                return Err(StatsError::UndeterminedArrivals { count: undetermined });
            }
            if missed_weight > 1e-12 || arriving < 0.99 {
                return Err(StatsError::NotAllArrived { arriving });
            }
        }
        ArrivalMode::Renormalized => {
            if undetermined > 0 {
                return Err(StatsError::UndeterminedArrivals { count: undetermined });
            }
        }
    }
    let (mean, variance, skewness) = weighted_moments(&arrivals, &weights);
    let n_bins = bins.unwrap_or_else(|| fd_bins(&arrivals, &weights));
    let lo = arrivals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = arrivals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / n_bins as f64).max(1e-300);
    let mut mass = vec![0.0; n_bins];
    for (&t, &w) in arrivals.iter().zip(&weights) {
        let b = (((t - lo) / width) as usize).min(n_bins - 1);
        mass[b] += w / arriving;
    }
    let times: Vec<f64> = (0..n_bins).map(|b| lo + (b as f64 + 0.5) * width).collect();
    let density: Vec<f64> = mass.iter().map(|m| m / width).collect();
    Ok(ArrivalDistribution {
        detector,
        mode,
        times,
        density,
        raw_norm: arriving,
        mean,
        variance,
        skewness,
    })
}

/// Mean arrival times over a (gamma, epsilon, acceleration) grid from the
/// current route. `None` marks unreachable cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub gammas: Vec<f64>,
    /// (epsilon, acceleration) per column
    pub columns: Vec<(f64, f64)>,
    /// means[row][col], row indexes gamma
    pub means: Vec<Vec<Option<f64>>>,
}

impl SweepTable {
    pub fn column_non_decreasing_in_gamma(&self, col: usize) -> bool {
        let mut prev = f64::NEG_INFINITY;
        for row in &self.means {
            if let Some(v) = row[col] {
                if v < prev - 1e-9 {
                    return false;
                }
                prev = v;
            }
        }
        true
    }
}

pub fn mean_arrival_sweep(
    params_base: &ModelParams,
    packet: &GaussianSpec,
    detector: f64,
    gammas: &[f64],
    epsilons: &[f64],
    accelerations: &[f64],
) -> SweepTable {
    let mut columns = Vec::new();
    for &a in accelerations {
        for &eps in epsilons {
            columns.push((eps, a));
        }
    }
    let mut means = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let mut row = Vec::with_capacity(columns.len());
        for &(eps, a) in &columns {
            let params = ModelParams::new(params_base.mass(), params_base.hbar(), gamma, eps)
                .expect("sweep params");
            let potential =
                if a == 0.0 { Potential::Free } else { Potential::Linear { a } };
            let system = System::new(params, potential, *packet).expect("sweep system");
            let cell =
                arrival_distribution_current(&system, detector, ArrivalMode::Renormalized, 2)
                    .ok()
                    .map(|d| d.mean);
            row.push(cell);
        }
        means.push(row);
    }
    SweepTable { gammas: gammas.to_vec(), columns, means }
}

/// Actual-momentum distribution: an exact delta descriptor in the classical
/// limit, a Gaussian (p_t, Sigma_t) otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentumDistribution {
    Delta { center: f64, time: f64 },
    Gaussian { center: f64, width: f64, time: f64 },
    Histogram { edges: Vec<f64>, masses: Vec<f64>, mean: f64, std: f64, time: f64 },
}

pub fn momentum_distribution(system: &System, t: f64) -> MomentumDistribution {
    let path = classical_path(system, t);
    if system.params().epsilon() == 0.0 {
        MomentumDistribution::Delta { center: path.momentum, time: t }
    } else {
        MomentumDistribution::Gaussian {
            center: path.momentum,
            width: sigma_momentum(system, t).actual,
            time: t,
        }
    }
}

/// Weighted histogram of m * v_i at one sampled time, Freedman-Diaconis
/// binning unless overridden.
pub fn momentum_histogram_from_ensemble(
    ensemble: &TrajectoryEnsemble,
    params: &ModelParams,
    time_index: usize,
    bins: Option<usize>,
) -> MomentumDistribution {
    let time = ensemble.times[time_index];
    let momenta: Vec<f64> =
        ensemble.velocities.iter().map(|v| params.mass() * v[time_index]).collect();
    let (mean, var, _) = weighted_moments(&momenta, &ensemble.weights);
    let n_bins = bins.unwrap_or_else(|| fd_bins(&momenta, &ensemble.weights));
    let lo = momenta.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = momenta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-300);
    let width = span / n_bins as f64;
    let wsum: f64 = ensemble.weights.iter().sum();
    let mut masses = vec![0.0; n_bins];
    for (&p, &w) in momenta.iter().zip(&ensemble.weights) {
        let b = (((p - lo) / width) as usize).min(n_bins - 1);
        masses[b] += w / wsum;
    }
    let edges: Vec<f64> = (0..=n_bins).map(|b| lo + b as f64 * width).collect();
    MomentumDistribution::Histogram { edges, masses, mean, std: var.sqrt(), time }
}
