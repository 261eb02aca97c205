//! Solver cross-checks: closed-form tracking, the transition/scaled/phase-map
//! equivalence triangle, residual refinement, and the Newton-law diagnostic.

use num_complex::Complex64;

use cktraj_core::analytic::{
    auto_grid, classical_path, initial_packet, transition_initial_packet, wavefunction,
};
use cktraj_core::params::{GaussianSpec, ModelParams, Potential, System, WaveField};
use cktraj_core::pde::{
    bohmian_force_check, equation_residuals, map_transition_to_scaled, polar_decompose,
    solve_scaled, solve_transition, PolarFields, SolverConfig,
};
use cktraj_core::trajectories::{integrate_guidance, VelocitySource};

fn paper_free(gamma: f64, eps: f64) -> System {
    System::new(
        ModelParams::new(1.0, 1.0, gamma, eps).unwrap(),
        Potential::Free,
        GaussianSpec::new(1.0, -10.0, 5.0).unwrap(),
    )
    .unwrap()
}

fn paper_harmonic(gamma: f64, eps: f64) -> System {
    System::new(
        ModelParams::new(1.0, 1.0, gamma, eps).unwrap(),
        Potential::Harmonic { omega0: 0.5 },
        GaussianSpec::new(1.0, 1.0, 0.0).unwrap(),
    )
    .unwrap()
}

#[test]
fn solver_expectation_tracks_classical_path_to_t20() {
    let s = paper_free(0.1, 1.0);
    let grid = auto_grid(&s, 20.0, 0.005, 8.0).unwrap();
    let cfg = SolverConfig::new(grid, 1e-3).with_carrier(5.0);
    let f0 = initial_packet(&s, &grid).unwrap();
    let sol = solve_scaled(&cfg, &s, &f0, &[5.0, 10.0, 20.0]).unwrap();
    for f in &sol.fields {
        let c = classical_path(&s, f.time);
        assert!(
            (f.expectation_x() - c.position).abs() < 1e-4,
            "t={}: <x> = {} vs {}",
            f.time,
            f.expectation_x(),
            c.position
        );
    }
    assert!(sol.report.max_norm_drift < 1e-10);
}

#[test]
fn harmonic_modulus_matches_closed_form() {
    let s = paper_harmonic(0.1, 1.0);
    let grid = auto_grid(&s, 5.0, 0.01, 8.0).unwrap();
    let cfg = SolverConfig::new(grid, 1e-3);
    let f0 = initial_packet(&s, &grid).unwrap();
    let sol = solve_scaled(&cfg, &s, &f0, &[1.0, 2.0, 5.0]).unwrap();
    for f in &sol.fields {
        let reference = wavefunction(&s, &grid, f.time).unwrap();
        let err = f.modulus_l2_distance(&reference);
        assert!(err < 1e-4, "t={}: L2 {err}", f.time);
    }
}

/// Discrete residual of the scaled linear equation applied to a mapped field
/// triple: i ht (psi_{k+1} - psi_{k-1})/(2 dt) - H psi_k.
fn scaled_equation_residual(
    fields: &[WaveField; 3],
    system: &System,
) -> f64 {
    let p = system.params();
    let ht = p.hbar_tilde();
    let grid = fields[1].grid;
    let dx = grid.dx();
    let dt = fields[1].time - fields[0].time;
    let t = fields[1].time;
    let decay = (-p.gamma() * t).exp();
    let grow = (p.gamma() * t).exp();
    let n = grid.n_points();
    let mut sum = 0.0;
    for i in 1..n - 1 {
        let dpsi_dt = (fields[2].values[i] - fields[0].values[i]) / (2.0 * dt);
        let lap = (fields[1].values[i + 1] - 2.0 * fields[1].values[i]
            + fields[1].values[i - 1])
            / (dx * dx);
        let h_psi = -ht * ht / (2.0 * p.mass()) * decay * lap
            + system.potential().value(p.mass(), grid.x(i)) * grow * fields[1].values[i];
        let res = Complex64::new(0.0, ht) * dpsi_dt - h_psi;
        sum += res.norm_sqr();
    }
    (sum * dx).sqrt()
}

#[test]
fn transition_equivalence_triangle_at_half_epsilon() {
    // transition and scaled densities agree; the phase map closes the loop
    let s = paper_free(0.1, 0.5);
    let grid = auto_grid(&s, 2.0, 0.01, 8.0).unwrap();
    let dt = 1e-3;
    let cfg = SolverConfig::new(grid, dt).with_carrier(5.0);

    let scaled0 = initial_packet(&s, &grid).unwrap();
    let scaled = solve_scaled(&cfg, &s, &scaled0, &[2.0 - dt, 2.0, 2.0 + dt]).unwrap();

    let trans0 = transition_initial_packet(&s, &grid);
    let trans = solve_transition(&cfg, &s, &trans0, &[2.0 - dt, 2.0, 2.0 + dt]).unwrap();
    assert!(trans.report.max_nonlinear_iters <= 8, "iters {}", trans.report.max_nonlinear_iters);

    // equal moduli
    let d = trans.fields[1].density_l2_distance(&scaled.fields[1]);
    assert!(d < 1e-4, "density L2 {d}");

    // phase check: arg(psi_eps)/sqrt(eps) = arg(psi~) + const over the bulk
    // (polar_decompose returns hbar~ times the unwrapped argument)
    let pe = polar_decompose(&trans.fields[1], s.params(), 1e-12).unwrap();
    let ps = polar_decompose(&scaled.fields[1], s.params(), 1e-12).unwrap();
    let ht = s.params().hbar_tilde();
    let sqrt_eps = s.params().epsilon().sqrt();
    let anchor = grid.nearest(classical_path(&s, 2.0).position);
    let arg_e = |i: usize| pe.s[i] / ht / sqrt_eps;
    let arg_s = |i: usize| ps.s[i] / ht;
    let offset = arg_e(anchor) - arg_s(anchor);
    let r_max = pe.r.iter().cloned().fold(0.0f64, f64::max);
    let mut worst: f64 = 0.0;
    for i in 0..grid.n_points() {
        if pe.r[i] > 1e-2 * r_max {
            worst = worst.max((arg_e(i) - arg_s(i) - offset).abs());
        }
    }
    assert!(worst < 1e-3, "phase map deviation {worst} rad");

    // mapped field satisfies the scaled equation and matches the scaled run
    let mapped: Vec<WaveField> = trans
        .fields
        .iter()
        .map(|f| map_transition_to_scaled(f, s.params()).unwrap())
        .collect();
    let res = scaled_equation_residual(
        &[mapped[0].clone(), mapped[1].clone(), mapped[2].clone()],
        &s,
    );
    assert!(res < 1e-3, "scaled-equation residual of mapped field {res}");

    // moduli of the mapped field equal the scaled solution
    let dl2 = mapped[1].modulus_l2_distance(&scaled.fields[1]);
    assert!(dl2 < 1e-3, "mapped modulus L2 {dl2}");
}

fn polar_series(
    system: &System,
    grid_dx: f64,
    dt: f64,
    t_center: f64,
    carrier: Option<f64>,
) -> (Vec<PolarFields>, Vec<f64>) {
    let s = system;
    let grid = auto_grid(s, t_center + 10.0 * dt, grid_dx, 8.0).unwrap();
    let mut cfg = SolverConfig::new(grid, dt);
    if let Some(c) = carrier {
        cfg = cfg.with_carrier(c);
    }
    let f0 = initial_packet(s, &grid).unwrap();
    let times: Vec<f64> = (-1..=1).map(|k| t_center + k as f64 * dt).collect();
    let sol = solve_scaled(&cfg, s, &f0, &times).unwrap();
    let polars: Vec<PolarFields> = sol
        .fields
        .iter()
        .map(|f| polar_decompose(f, s.params(), 1e-12).unwrap())
        .collect();
    (polars, times)
}

#[test]
fn residuals_refine_at_second_order() {
    let s = paper_harmonic(0.1, 1.0);
    let mut cont = Vec::new();
    let mut hj = Vec::new();
    for (dx, dt) in [(0.04, 4e-3), (0.02, 2e-3), (0.01, 1e-3)] {
        let (polars, _) = polar_series(&s, dx, dt, 1.0, None);
        let rep = equation_residuals(&polars, s.params(), s.potential());
        cont.push(rep.continuity);
        hj.push(rep.hamilton_jacobi);
    }
    let order_cont = (cont[0] / cont[2]).log2() / 2.0;
    let order_hj = (hj[0] / hj[2]).log2() / 2.0;
    assert!(order_cont > 1.9, "continuity orders {cont:?} -> {order_cont}");
    assert!(order_hj > 1.9, "hj orders {hj:?} -> {order_hj}");
}

#[test]
fn residuals_of_sampled_closed_form_limited_by_discretization() {
    // the analytic wavefunction sampled on the grid shows the same
    // second-order residual decay as solver output
    let s = paper_free(0.1, 1.0);
    let mut cont = Vec::new();
    for (dx, dt) in [(0.04, 4e-3), (0.02, 2e-3)] {
        let grid = auto_grid(&s, 1.1, dx, 8.0).unwrap();
        let polars: Vec<PolarFields> = (-1..=1)
            .map(|k| {
                let f = wavefunction(&s, &grid, 1.0 + k as f64 * dt).unwrap();
                polar_decompose(&f, s.params(), 1e-12).unwrap()
            })
            .collect();
        let rep = equation_residuals(&polars, s.params(), s.potential());
        cont.push(rep.continuity);
        // classical HJ residual must NOT vanish: the quantum potential term
        // is doing real work here
        assert!(rep.hamilton_jacobi < 0.1 * rep.classical_hamilton_jacobi);
    }
    let order = (cont[0] / cont[1]).log2();
    assert!(order > 1.9, "continuity {cont:?} -> order {order}");
}

#[test]
fn newton_law_along_trajectories() {
    // center trajectory: the quantum-force gradient vanishes by symmetry
    let s = paper_free(0.1, 1.0);
    let dt = 1e-3;
    let (polars, times) = polar_series(&s, 0.01, dt, 2.0, Some(5.0));
    let tgrid: Vec<f64> = times.clone();
    let center = integrate_guidance(&VelocitySource::Analytic(&s), -10.0, &tgrid).unwrap();
    let dev = bohmian_force_check(
        &polars,
        s.params(),
        s.potential(),
        &times,
        &center.positions,
    );
    assert!(dev < 1e-4, "center deviation {dev}");

    // off-center trajectory converges under refinement
    let mut devs = Vec::new();
    for (dx, dt) in [(0.02, 2e-3), (0.01, 1e-3)] {
        let (polars, times) = polar_series(&s, dx, dt, 2.0, Some(5.0));
        let traj = integrate_guidance(&VelocitySource::Analytic(&s), -8.5, &times).unwrap();
        devs.push(bohmian_force_check(
            &polars,
            s.params(),
            s.potential(),
            &times,
            &traj.positions,
        ));
    }
    assert!(devs[1] < devs[0], "should decrease under refinement: {devs:?}");
    assert!(devs[1] < 1e-2, "off-center deviation {devs:?}");
}

#[test]
fn propagator_consistency_with_solver() {
    // solve_scaled equals kernel quadrature within combined tolerance
    for (s, carrier, t) in [
        (paper_free(0.1, 1.0), Some(5.0), 2.0),
        (paper_free(0.2, 0.5), Some(5.0), 1.0),
        (paper_harmonic(0.1, 1.0), None, 2.0),
    ] {
        let grid = auto_grid(&s, t, 0.01, 8.0).unwrap();
        let mut cfg = SolverConfig::new(grid, 1e-3);
        if let Some(c) = carrier {
            cfg = cfg.with_carrier(c);
        }
        let f0 = initial_packet(&s, &grid).unwrap();
        let sol = solve_scaled(&cfg, &s, &f0, &[t]).unwrap();
        let xt = classical_path(&s, t).position;
        let mut worst: f64 = 0.0;
        for k in [-1.0, 0.0, 1.0] {
            let i = grid.nearest(xt + k);
            let quad = cktraj_core::analytic::propagate_packet(&s, grid.x(i), t).unwrap();
            worst = worst.max((sol.fields[0].values[i] - quad).norm());
        }
        assert!(worst < 1e-4, "{:?}: worst pointwise |diff| {worst}", s.potential());
    }
}

#[test]
fn linear_potential_solver_matches_closed_form() {
    let s = System::new(
        ModelParams::new(1.0, 1.0, 0.2, 0.5).unwrap(),
        Potential::Linear { a: -0.5 },
        GaussianSpec::new(1.0, -10.0, 5.0).unwrap(),
    )
    .unwrap();
    let grid = auto_grid(&s, 2.0, 0.01, 8.0).unwrap();
    let cfg = SolverConfig::new(grid, 1e-3).with_carrier(5.0);
    let f0 = initial_packet(&s, &grid).unwrap();
    let sol = solve_scaled(&cfg, &s, &f0, &[2.0]).unwrap();
    let reference = wavefunction(&s, &grid, 2.0).unwrap();
    let err = sol.fields[0].modulus_l2_distance(&reference);
    assert!(err < 1e-4, "modulus L2 {err}");
}
