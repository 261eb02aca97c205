//! Numerically stable building blocks for the damped-motion closed forms.
//!
//! Every friction expression of the form (1 - e^{-gamma t})/gamma and its
//! higher-order relatives cancels catastrophically as gamma*t -> 0, so each
//! gets a dedicated helper that switches to a Taylor series below a small
//! threshold. The thresholds are chosen so the truncation error sits below
//! double-precision roundoff at the crossover.

/// (1 - e^{-g t}) / g, with the g -> 0 limit t.
pub fn decay_ratio(gamma: f64, t: f64) -> f64 {
    if gamma == 0.0 {
        t
    } else {
        -(-gamma * t).exp_m1() / gamma
    }
}

/// (g t - 1 + e^{-g t}) / g^2, with the g -> 0 limit t^2/2.
pub fn decay_ratio2(gamma: f64, t: f64) -> f64 {
    let u = gamma * t;
    if u.abs() < 1e-2 {
        t * t * (0.5 - u / 6.0 + u * u / 24.0 - u * u * u / 120.0 + u * u * u * u / 720.0)
    } else {
        (u - 1.0 + (-u).exp()) / (gamma * gamma)
    }
}

/// (e^{g t} - g t - 1) / g^2, with the g -> 0 limit t^2/2.
pub fn growth_ratio2(gamma: f64, t: f64) -> f64 {
    let u = gamma * t;
    if u.abs() < 1e-2 {
        t * t * (0.5 + u / 6.0 + u * u / 24.0 + u * u * u / 120.0 + u * u * u * u / 720.0)
    } else {
        (u.exp() - u - 1.0) / (gamma * gamma)
    }
}

/// (e^{g t} - 1) / g, with the g -> 0 limit t.
pub fn growth_ratio(gamma: f64, t: f64) -> f64 {
    if gamma == 0.0 {
        t
    } else {
        (gamma * t).exp_m1() / gamma
    }
}

/// (e^{g t} + e^{-g t} - 2) / g^2 = 4 sinh^2(g t / 2) / g^2; limit t^2.
pub fn cosh2_ratio(gamma: f64, t: f64) -> f64 {
    if gamma == 0.0 {
        t * t
    } else {
        let s = (gamma * t / 2.0).sinh();
        4.0 * s * s / (gamma * gamma)
    }
}

/// (e^{g t} + e^{-g t} - 2 - g^2 t^2) / g^4 = (4 sinh^2(g t/2) - g^2 t^2)/g^4;
/// limit t^4/12.
pub fn sinh_quartic(gamma: f64, t: f64) -> f64 {
    let u = gamma * t;
    if u.abs() < 5e-2 {
        let u2 = u * u;
        t.powi(4) * (1.0 / 12.0 + u2 / 360.0 + u2 * u2 / 20160.0)
    } else {
        let s = (u / 2.0).sinh();
        (4.0 * s * s - u * u) / (gamma.powi(4))
    }
}

/// 2 (sinh(g t) - g t) / g^3 = (e^{g t} - e^{-g t} - 2 g t)/g^3; limit t^3/3.
pub fn sinh_ratio3(gamma: f64, t: f64) -> f64 {
    let u = gamma * t;
    if u.abs() < 1e-1 {
        let u2 = u * u;
        t * t * t * (1.0 / 3.0 + u2 / 60.0 + u2 * u2 / 2520.0)
    } else {
        2.0 * (u.sinh() - u) / (gamma * gamma * gamma)
    }
}

/// (4 + (2 g t - 3) e^{g t} - e^{-g t}) / g^3, the a^2 kernel of the damped
/// linear-potential action; limit 2 t^3 / 3.
pub fn action_kernel3(gamma: f64, t: f64) -> f64 {
    let u = gamma * t;
    if u.abs() < 1e-2 {
        let t3 = t * t * t;
        t3 * (2.0 / 3.0
            + u / 6.0
            + u * u / 15.0
            + u * u * u / 90.0
            + u * u * u * u / 420.0
            + u * u * u * u * u / 3360.0)
    } else {
        (4.0 + (2.0 * u - 3.0) * u.exp() - (-u).exp()) / (gamma * gamma * gamma)
    }
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Composite Simpson on a fixed number of panels (n_panels even intervals).
pub fn simpson_fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n_panels: usize) -> f64 {
    let n = if n_panels % 2 == 0 { n_panels } else { n_panels + 1 };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_match_direct_at_moderate_gamma() {
        let (g, t) = (0.3, 2.5);
        let u = g * t;
        assert!((decay_ratio(g, t) - (1.0 - (-u).exp()) / g).abs() < 1e-14);
        assert!((decay_ratio2(g, t) - (u - 1.0 + (-u).exp()) / (g * g)).abs() < 1e-14);
        assert!((growth_ratio2(g, t) - (u.exp() - u - 1.0) / (g * g)).abs() < 1e-13);
        assert!((cosh2_ratio(g, t) - (u.exp() + (-u).exp() - 2.0) / (g * g)).abs() < 1e-12);
        assert!(
            (action_kernel3(g, t) - (4.0 + (2.0 * u - 3.0) * u.exp() - (-u).exp()) / g.powi(3))
                .abs()
                < 1e-11
        );
    }

    #[test]
    fn ratios_reduce_smoothly_to_frictionless_limit() {
        let t = 3.7;
        for &g in &[1e-12, 1e-10, 1e-8] {
            assert!((decay_ratio(g, t) / t - 1.0).abs() < 1e-6 * (1.0 + g * t));
            assert!((decay_ratio2(g, t) / (t * t / 2.0) - 1.0).abs() < 1e-6);
            assert!((growth_ratio2(g, t) / (t * t / 2.0) - 1.0).abs() < 1e-6);
            assert!((cosh2_ratio(g, t) / (t * t) - 1.0).abs() < 1e-6);
            assert!((sinh_ratio3(g, t) / (t * t * t / 3.0) - 1.0).abs() < 1e-6);
            assert!((sinh_quartic(g, t) / (t.powi(4) / 12.0) - 1.0).abs() < 1e-6);
            assert!((action_kernel3(g, t) / (2.0 * t * t * t / 3.0) - 1.0).abs() < 1e-6);
        }
        assert_eq!(decay_ratio(0.0, t), t);
        assert_eq!(growth_ratio(0.0, t), t);
    }

    #[test]
    fn series_and_direct_agree_at_crossover() {
        // straddle each threshold and compare against f128-free reference via
        // the opposite branch at slightly larger u
        let t = 1.0;
        for &g in &[9e-3f64, 1.1e-2] {
            let u = g * t;
            let direct = (u - 1.0 + (-u).exp()) / (g * g);
            assert!((decay_ratio2(g, t) - direct).abs() / direct < 1e-9);
        }
        for &g in &[4.9e-2, 5.1e-2] {
            let u: f64 = g * t;
            let s = (u / 2.0).sinh();
            let direct = (4.0 * s * s - u * u) / g.powi(4);
            assert!((sinh_quartic(g, t) - direct).abs() / direct < 1e-9);
        }
    }

    #[test]
    fn simpson_integrates_gaussian() {
        let f = |x: f64| (-x * x / 2.0).exp();
        let v = adaptive_simpson(&f, -10.0, 10.0, 1e-12);
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
        let w = simpson_fixed(&f, -10.0, 10.0, 2000);
        assert!((w - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }
}
