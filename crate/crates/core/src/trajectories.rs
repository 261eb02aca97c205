//! Born-rule ensembles, guidance-equation integration, and structural checks
//! (ordering, spacing, crossing times) against the closed forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::analytic::velocity_field;
use crate::params::{GaussianSpec, Grid, ModelParams, Potential, System, WaveField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("trajectory left the field domain at x = {x}, t = {t}")]
    LeftDomain { x: f64, t: f64 },
    #[error("field sampler needs at least 2 uniformly spaced time samples")]
    BadFieldSampling,
}

/// How initial positions are drawn from the Born density.
#[derive(Debug, Clone, PartialEq)]
pub enum Seeding {
    /// n symmetric midpoint quantiles of N(x0, sigma0^2); equal weights.
    EquispacedQuantiles,
    /// Explicit offsets from x0 in units of sigma0 (figure seeds); weights
    /// proportional to the local density.
    FixedOffsets(Vec<f64>),
    /// n pseudo-random draws with a fixed seed.
    RandomNormal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub n_particles: usize,
    pub seeding: Seeding,
    pub rng_seed: u64,
}

impl EnsembleSpec {
    pub fn quantiles(n: usize) -> Self {
        EnsembleSpec { n_particles: n, seeding: Seeding::EquispacedQuantiles, rng_seed: 0 }
    }

    pub fn offsets(offsets: &[f64]) -> Self {
        EnsembleSpec {
            n_particles: offsets.len(),
            seeding: Seeding::FixedOffsets(offsets.to_vec()),
            rng_seed: 0,
        }
    }
}

/// Initial positions and Born weights (weights sum to 1).
pub fn seed_ensemble(spec: &EnsembleSpec, packet: &GaussianSpec) -> (Vec<f64>, Vec<f64>) {
    match &spec.seeding {
        Seeding::EquispacedQuantiles => {
            let n = spec.n_particles;
            let normal = Normal::new(packet.x0(), packet.sigma0()).unwrap();
            let positions: Vec<f64> =
                (0..n).map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64)).collect();
            (positions, vec![1.0 / n as f64; n])
        }
        Seeding::FixedOffsets(offsets) => {
            let positions: Vec<f64> =
                offsets.iter().map(|k| packet.x0() + k * packet.sigma0()).collect();
            let rho = |x: f64| {
                let d = (x - packet.x0()) / packet.sigma0();
                (-0.5 * d * d).exp()
            };
            let mut weights: Vec<f64> = Vec::with_capacity(positions.len());
            for (i, &x) in positions.iter().enumerate() {
                let span = if positions.len() == 1 {
                    1.0
                } else if i == 0 {
                    positions[1] - positions[0]
                } else if i == positions.len() - 1 {
                    positions[i] - positions[i - 1]
                } else {
                    0.5 * (positions[i + 1] - positions[i - 1])
                };
                weights.push(rho(x) * span.abs());
            }
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            (positions, weights)
        }
        Seeding::RandomNormal => {
            let n = spec.n_particles;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
            let normal = Normal::new(packet.x0(), packet.sigma0()).unwrap();
            let positions: Vec<f64> = (0..n)
                .map(|_| {
                    let u: f64 = rng.gen_range(1e-12..1.0 - 1e-12);
                    normal.inverse_cdf(u)
                })
                .collect();
            (positions, vec![1.0 / n as f64; n])
        }
    }
}

/// Velocity fields sampled from a solver run, interpolated linearly in x and
/// cubically (Catmull-Rom) in t.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    grid: Grid,
    times: Vec<f64>,
    velocity: Vec<Vec<f64>>,
}

impl FieldSampler {
    pub fn from_fields(
        fields: &[WaveField],
        params: &ModelParams,
    ) -> Result<FieldSampler, TrajectoryError> {
        if fields.len() < 2 {
            return Err(TrajectoryError::BadFieldSampling);
        }
        let dt = fields[1].time - fields[0].time;
        for w in fields.windows(2) {
            if ((w[1].time - w[0].time) - dt).abs() > 1e-9 * dt.abs().max(1e-12) {
                return Err(TrajectoryError::BadFieldSampling);
            }
        }
        let grid = fields[0].grid;
        let velocity = fields
            .iter()
            .map(|f| {
                let (rho, j) = crate::analytic::density_current_field(f, params);
                let n = rho.len();
                let mut v = vec![0.0; n];
                // fill bulk, then extend across near-zero tails
                let mut last_valid: Option<f64> = None;
                for i in 0..n {
                    if rho[i] > 1e-30 {
                        v[i] = j[i] / rho[i];
                        last_valid = Some(v[i]);
                    } else if let Some(lv) = last_valid {
                        v[i] = lv;
                    }
                }
                if let Some(first) = v.iter().position(|&x| x != 0.0) {
                    for i in 0..first {
                        v[i] = v[first];
                    }
                }
                v
            })
            .collect();
        Ok(FieldSampler { grid, times: fields.iter().map(|f| f.time).collect(), velocity })
    }

    pub fn dx(&self) -> f64 {
        self.grid.dx()
    }

    fn v_at_slice(&self, k: usize, x: f64) -> Result<f64, TrajectoryError> {
        if !self.grid.contains(x) {
            return Err(TrajectoryError::LeftDomain { x, t: self.times[k] });
        }
        let f = (x - self.grid.x_min()) / self.grid.dx();
        let i = (f.floor() as usize).min(self.grid.n_points() - 2);
        let w = f - i as f64;
        Ok(self.velocity[k][i] * (1.0 - w) + self.velocity[k][i + 1] * w)
    }

    pub fn velocity_at(&self, x: f64, t: f64) -> Result<f64, TrajectoryError> {
        let n = self.times.len();
        let dt = self.times[1] - self.times[0];
        let s = ((t - self.times[0]) / dt).clamp(0.0, (n - 1) as f64);
        let k = (s.floor() as usize).min(n - 2);
        let u = s - k as f64;
        // Catmull-Rom over the four surrounding slices, clamped at the ends
        let km = k.saturating_sub(1);
        let kp = (k + 2).min(n - 1);
        let (p0, p1, p2, p3) = (
            self.v_at_slice(km, x)?,
            self.v_at_slice(k, x)?,
            self.v_at_slice(k + 1, x)?,
            self.v_at_slice(kp, x)?,
        );
        let u2 = u * u;
        let u3 = u2 * u;
        Ok(0.5
            * ((2.0 * p1)
                + (-p0 + p2) * u
                + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u2
                + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u3))
    }
}

/// Where the velocities come from.
pub enum VelocitySource<'a> {
    Analytic(&'a System),
    Field(&'a FieldSampler),
}

/// One integrated trajectory sampled on the caller's time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

/// Integrate the guidance equation with classic fourth-order Runge-Kutta.
///
/// In the classical limit the velocity field degenerates at the oscillator
/// caustics, so epsilon = 0 integrates the equivalent Newtonian form
/// (x' = v, m v' = -m gamma v - V'(x)), which every classical particle obeys
/// with the common launch velocity p0/m.
pub fn integrate_guidance(
    source: &VelocitySource,
    x_init: f64,
    t_grid: &[f64],
) -> Result<Trajectory, TrajectoryError> {
    match source {
        VelocitySource::Analytic(system) if system.params().epsilon() == 0.0 => {
            Ok(integrate_newton(system, x_init, t_grid))
        }
        VelocitySource::Analytic(system) => {
            let f = |x: f64, t: f64| -> Result<f64, TrajectoryError> {
                Ok(velocity_field(system, x, t))
            };
            integrate_rk4(&f, x_init, t_grid, None)
        }
        VelocitySource::Field(sampler) => {
            let f = |x: f64, t: f64| sampler.velocity_at(x, t);
            integrate_rk4(&f, x_init, t_grid, Some(sampler.dx()))
        }
    }
}

fn integrate_rk4<F: Fn(f64, f64) -> Result<f64, TrajectoryError>>(
    f: &F,
    x_init: f64,
    t_grid: &[f64],
    field_dx: Option<f64>,
) -> Result<Trajectory, TrajectoryError> {
    let mut positions = Vec::with_capacity(t_grid.len());
    let mut velocities = Vec::with_capacity(t_grid.len());
    let mut x = x_init;
    positions.push(x);
    velocities.push(f(x, t_grid[0])?);
    for w in t_grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let h_full = t1 - t0;
        // sub-step when a grid-sampled field would be skipped over
        let n_sub = match field_dx {
            Some(dx) => {
                let v0 = f(x, t0)?.abs();
                ((v0 * h_full / (0.5 * dx)).ceil() as usize).clamp(1, 10_000)
            }
            None => 1,
        };
        let h = h_full / n_sub as f64;
        for s in 0..n_sub {
            let t = t0 + s as f64 * h;
            let k1 = f(x, t)?;
            let k2 = f(x + 0.5 * h * k1, t + 0.5 * h)?;
            let k3 = f(x + 0.5 * h * k2, t + 0.5 * h)?;
            let k4 = f(x + h * k3, t + h)?;
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        positions.push(x);
        velocities.push(f(x, t1)?);
    }
    Ok(Trajectory { times: t_grid.to_vec(), positions, velocities })
}

fn integrate_newton(system: &System, x_init: f64, t_grid: &[f64]) -> Trajectory {
    let m = system.params().mass();
    let gamma = system.params().gamma();
    let pot = *system.potential();
    let acc = |x: f64, v: f64| -> f64 { -gamma * v - pot.gradient(m, x) / m };
    let mut x = x_init;
    let mut v = system.packet().p0() / m;
    let mut positions = vec![x];
    let mut velocities = vec![v];
    for w in t_grid.windows(2) {
        let h = w[1] - w[0];
        let (k1x, k1v) = (v, acc(x, v));
        let (k2x, k2v) = (v + 0.5 * h * k1v, acc(x + 0.5 * h * k1x, v + 0.5 * h * k1v));
        let (k3x, k3v) = (v + 0.5 * h * k2v, acc(x + 0.5 * h * k2x, v + 0.5 * h * k2v));
        let (k4x, k4v) = (v + h * k3v, acc(x + h * k3x, v + h * k3v));
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        positions.push(x);
        velocities.push(v);
    }
    Trajectory { times: t_grid.to_vec(), positions, velocities }
}

/// Set of trajectories with Born weights; positions\[i\]\[k\] is particle i at
/// time index k.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub initial_positions: Vec<f64>,
    pub weights: Vec<f64>,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

pub fn build_ensemble(
    spec: &EnsembleSpec,
    source: &VelocitySource,
    packet: &GaussianSpec,
    t_grid: &[f64],
) -> Result<TrajectoryEnsemble, TrajectoryError> {
    let (initial_positions, weights) = seed_ensemble(spec, packet);
    let mut positions = Vec::with_capacity(initial_positions.len());
    let mut velocities = Vec::with_capacity(initial_positions.len());
    for &x0 in &initial_positions {
        let traj = integrate_guidance(source, x0, t_grid)?;
        positions.push(traj.positions);
        velocities.push(traj.velocities);
    }
    Ok(TrajectoryEnsemble {
        initial_positions,
        weights,
        times: t_grid.to_vec(),
        positions,
        velocities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncrossingReport {
    pub ordering_preserved: bool,
    pub min_gap: f64,
    pub min_gap_time: f64,
}

/// Verify that the initial ordering of particles persists at every sampled
/// time; report the smallest adjacent gap seen.
pub fn check_noncrossing(ensemble: &TrajectoryEnsemble) -> NoncrossingReport {
    assert!(ensemble.positions.len() >= 2, "need at least two trajectories");
    let n = ensemble.positions.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        ensemble.initial_positions[a].partial_cmp(&ensemble.initial_positions[b]).unwrap()
    });
    let mut preserved = true;
    let mut min_gap = f64::INFINITY;
    let mut min_gap_time = 0.0;
    for (k, &t) in ensemble.times.iter().enumerate() {
        for w in order.windows(2) {
            let gap = ensemble.positions[w[1]][k] - ensemble.positions[w[0]][k];
            if gap < 0.0 {
                preserved = false;
            }
            if gap < min_gap {
                min_gap = gap;
                min_gap_time = t;
            }
        }
    }
    NoncrossingReport { ordering_preserved: preserved, min_gap, min_gap_time }
}

/// Outcome of a detector-crossing search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossingOutcome {
    Crossed(f64),
    /// The analytic reachability bound excludes any future crossing.
    NeverReaches,
    /// Not crossed within the sampled window and the bound cannot exclude it:
    /// extend the window.
    Undetermined,
}

/// First time x(t) = X by sign-change bracketing and linear interpolation.
/// `system` (when given) supplies the free-viscid reachability bound that
/// separates "never arrives" from "not yet arrived".
pub fn first_crossing_time(
    trajectory: &Trajectory,
    detector: f64,
    system: Option<&System>,
) -> CrossingOutcome {
    let xs = &trajectory.positions;
    let ts = &trajectory.times;
    if xs[0] == detector {
        return CrossingOutcome::Crossed(ts[0]);
    }
    let s0 = (xs[0] - detector).signum();
    for k in 1..xs.len() {
        let d = xs[k] - detector;
        if d == 0.0 {
            return CrossingOutcome::Crossed(ts[k]);
        }
        if d.signum() != s0 {
            let frac = (detector - xs[k - 1]) / (xs[k] - xs[k - 1]);
            return CrossingOutcome::Crossed(ts[k - 1] + frac * (ts[k] - ts[k - 1]));
        }
    }
    // not crossed in the window
    if let Some(sys) = system {
        if let Some(sup) = free_viscid_future_sup(sys, xs[0], *ts.last().unwrap()) {
            // packet moving right toward the detector
            if xs[0] < detector && sup < detector {
                return CrossingOutcome::NeverReaches;
            }
        }
    }
    CrossingOutcome::Undetermined
}

/// Supremum of a free viscid trajectory over (t_end, infinity). In terms of
/// tau = (1 - e^{-gamma t})/gamma the path is x0 + (p0/m) tau + d0 sqrt(1 +
/// k tau^2), so the future extremum sits either at tau -> 1/gamma or at the
/// single interior stationary point.
fn free_viscid_future_sup(system: &System, x_init: f64, t_end: f64) -> Option<f64> {
    match system.potential() {
        Potential::Free => {}
        _ => return None,
    }
    let p = system.params();
    let gamma = p.gamma();
    if gamma <= 0.0 {
        return None;
    }
    let g = system.packet();
    let (m, p0) = (p.mass(), g.p0());
    let d0 = x_init - g.x0();
    let ht = p.hbar_tilde();
    let k = ht * ht / (4.0 * m * m * g.sigma0().powi(4));
    let x_of_tau = |tau: f64| g.x0() + p0 / m * tau + d0 * (1.0 + k * tau * tau).sqrt();
    let tau_end = crate::numeric::decay_ratio(gamma, t_end);
    let tau_inf = 1.0 / gamma;
    let mut sup = x_of_tau(tau_inf);
    // stationary point: p0/m + d0 k tau / sqrt(1 + k tau^2) = 0
    let v0 = p0 / m;
    if k > 0.0 && d0 * v0 < 0.0 && d0 * d0 * k > v0 * v0 {
        let tau_star = (v0 * v0 / (k * (d0 * d0 * k - v0 * v0))).sqrt();
        if tau_star > tau_end && tau_star < tau_inf {
            sup = sup.max(x_of_tau(tau_star));
        }
    }
    Some(sup)
}
