//! Closed-form reference solution.
//!
//! With `q = -1/2` and `k = sqrt(2)` the profile equations admit the exact
//! round-sphere solution `phi(t) = sqrt(2) sin(t/sqrt(2))`, `f = 0` (the
//! fixed-point pair of constant curvature 1/2). It collapses at
//! `t = pi sqrt(2)` and is the independent yardstick for the seed, the
//! integrator and the geometry formulas.

use std::f64::consts::{PI, SQRT_2};

/// Family parameter of the exact solution.
pub const BRF_Q: f64 = -0.5;

/// First zero of the profile, `pi sqrt(2)`.
pub fn brf_collapse_time() -> f64 {
    PI * SQRT_2
}

pub fn brf_phi(t: f64) -> f64 {
    SQRT_2 * (t / SQRT_2).sin()
}

pub fn brf_dphi(t: f64) -> f64 {
    (t / SQRT_2).cos()
}

pub fn brf_ddphi(t: f64) -> f64 {
    -(t / SQRT_2).sin() / SQRT_2
}

/// Coefficient of `t^(2m)` in `phi/t = sin(t/sqrt(2)) / (t/sqrt(2))`,
/// i.e. `(-1)^m / (2^m (2m+1)!)`, generated by a stable ratio recurrence.
pub fn brf_a_coeff(m: usize) -> f64 {
    let mut c = 1.0;
    for j in 1..=m {
        c = -c / (2.0 * (2 * j) as f64 * (2 * j + 1) as f64);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_solves_the_profile_equations() {
        for t in [0.3, 1.0, 2.5, 4.0] {
            let phi = brf_phi(t);
            let dphi = brf_dphi(t);
            let ddphi = brf_ddphi(t);
            // phi'' = (1 - phi'^2)/phi - phi e^0 with f = 0.
            let rhs = (1.0 - dphi * dphi) / phi - phi;
            assert!((ddphi - rhs).abs() < 1e-14);
            assert!((ddphi + phi / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn leading_coefficients() {
        assert_eq!(brf_a_coeff(0), 1.0);
        assert!((brf_a_coeff(1) + 1.0 / 12.0).abs() < 1e-18);
        assert!((brf_a_coeff(2) - 1.0 / 480.0).abs() < 1e-18);
    }
}
