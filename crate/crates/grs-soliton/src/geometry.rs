//! Derived geometric quantities along the profile: sectional curvatures,
//! Ricci components, torsion norms, and residuals of the soliton equations.
//!
//! Curvatures come from the analytic formulas with `phi''` taken from the
//! right-hand side, never from numerical differentiation of samples. Limits
//! at `t = 0` are taken on the seed series, which is exact to high order
//! there.

use crate::integrator::{rhs, IntegratorError, SolitonState};
use crate::seed::{curvature_series, SeedExpansion};
use crate::series::SeriesError;

/// Pointwise geometric data of the metric `dt^2 + phi^2 dsigma^2` with
/// torsion `H = (h/t^2) vol` and potential `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample {
    pub t: f64,
    /// Sectional curvature of planes containing the radial direction,
    /// `-phi''/phi`.
    pub k_rad: f64,
    /// Sectional curvature of the orbit spheres, `(1 - phi'^2)/phi^2`.
    pub k_tan: f64,
    /// `Ric(xi, xi)` in the unit radial frame, `-2 phi''/phi`.
    pub ric_rr: f64,
    /// Orbit-direction Ricci in a unit frame, `(1 - phi'^2 - phi phi'')/phi^2`.
    pub ric_tt: f64,
    /// Torsion coefficient `h = k phi^2 e^f`.
    pub h: f64,
    /// `|H|^2 = 6 h^2 / phi^4`.
    pub norm_h2: f64,
    /// Density of `H` against the euclidean volume form, `h/t^2`.
    pub h_density: f64,
    /// Scalar curvature, `2 (2 k_rad + k_tan)`.
    pub scal: f64,
}

/// Evaluates the derived geometry at a state; `phi''` comes from the
/// right-hand side.
pub fn geometry_at(state: &SolitonState, k: f64) -> Result<GeometrySample, IntegratorError> {
    let d = rhs(state, k)?;
    let phi = state.phi;
    let k_rad = -d.ddphi / phi;
    let k_tan = crate::integrator::one_minus_sq(state.dphi) / (phi * phi);
    // identically torsion-free when k = 0
    let h = if k == 0.0 { 0.0 } else { k * phi * phi * state.f.exp() };
    Ok(GeometrySample {
        t: state.t,
        k_rad,
        k_tan,
        ric_rr: -2.0 * d.ddphi / phi,
        ric_tt: k_rad + k_tan,
        h,
        norm_h2: 6.0 * h * h / (phi * phi * phi * phi),
        h_density: h / (state.t * state.t),
        scal: 2.0 * (2.0 * k_rad + k_tan),
    })
}

/// Residuals of the two soliton equations
///
/// ```text
/// 1 - phi'^2 - phi phi'' = -phi phi' f' + c^2 e^{2f} phi^2,
/// -2 phi phi''           = -f'' phi^2 + c^2 e^{2f} phi^2,
/// ```
///
/// with the second derivatives supplied by the caller. Substituting the
/// right-hand side makes both vanish identically; the point of the explicit
/// form is to validate independently reconstructed second derivatives
/// (finite differences over a CSV, for instance), where the residual
/// measures the reconstruction error.
pub fn soliton_residual_given(
    state: &SolitonState,
    k: f64,
    ddphi: f64,
    ddf: f64,
) -> (f64, f64) {
    let c2 = k * k / 2.0;
    let phi = state.phi;
    let e2f = (2.0 * state.f).exp();
    let r1 = (crate::integrator::one_minus_sq(state.dphi) - phi * ddphi)
        - (-phi * state.dphi * state.df + c2 * e2f * phi * phi);
    let r2 = -2.0 * phi * ddphi - (-ddf * phi * phi + c2 * e2f * phi * phi);
    (r1, r2)
}

/// [`soliton_residual_given`] with the second derivatives taken from the
/// right-hand side; zero up to rounding by construction.
pub fn soliton_residual(state: &SolitonState, k: f64) -> Result<(f64, f64), IntegratorError> {
    let d = rhs(state, k)?;
    Ok(soliton_residual_given(state, k, d.ddphi, d.ddf))
}

/// Limits of `-K_rad` and `-K_tan` as `t -> 0`, both equal to the family
/// parameter `q`.
///
/// Richardson extrapolation over seed-series evaluations at `eps`, `eps/2`,
/// `eps/4`; the curvature series are even in `t`, so each level removes two
/// orders.
pub fn curvature_limit_q(seed: &SeedExpansion, eps: f64) -> Result<(f64, f64), SeriesError> {
    let (k_rad, k_tan) = curvature_series(seed)?;
    let richardson = |s: &crate::series::TruncSeries| {
        let v0 = s.eval_horner(eps);
        let v1 = s.eval_horner(eps / 2.0);
        let v2 = s.eval_horner(eps / 4.0);
        let r1 = (4.0 * v1 - v0) / 3.0;
        let r2 = (4.0 * v2 - v1) / 3.0;
        (16.0 * r2 - r1) / 15.0
    };
    Ok((-richardson(&k_rad), -richardson(&k_tan)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::seed::{compute_seed, eval_seed, SolitonParams, K_BRYANT, K_TORSION};

    fn brf_state(t: f64) -> SolitonState {
        SolitonState { t, phi: oracle::brf_phi(t), dphi: oracle::brf_dphi(t), f: 0.0, df: 0.0 }
    }

    #[test]
    fn constant_curvature_along_the_closed_form() {
        for t in [0.4, 1.0, 2.0, 4.0] {
            let g = geometry_at(&brf_state(t), K_TORSION).unwrap();
            assert!((g.k_rad - 0.5).abs() < 1e-13, "k_rad at t = {t}");
            assert!((g.k_tan - 0.5).abs() < 1e-13, "k_tan at t = {t}");
            assert!((g.norm_h2 - 12.0).abs() < 1e-12, "normH2 at t = {t}");
            let phi = oracle::brf_phi(t);
            assert!((g.h - K_TORSION * phi * phi).abs() < 1e-13);
            // ric = K_rad + K_tan on orbit directions, 2 K_rad radially.
            assert!((g.ric_rr - 1.0).abs() < 1e-12);
            assert!((g.ric_tt - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_values_at_the_origin() {
        for q in [-47.0 / 12.0, -4.0] {
            let seed = compute_seed(&SolitonParams::from_q(q)).unwrap();
            let state = eval_seed(&seed, 1e-5);
            let g = geometry_at(&state, K_TORSION).unwrap();
            assert!((g.norm_h2 - 12.0).abs() < 1e-6, "normH2 -> 12, got {}", g.norm_h2);
            assert!(
                (g.h_density - K_TORSION).abs() < 1e-6,
                "h/t^2 -> sqrt(2), got {}",
                g.h_density
            );
        }
    }

    #[test]
    fn bryant_mode_has_no_torsion() {
        let seed = compute_seed(&SolitonParams::from_q(-4.0).with_k(K_BRYANT)).unwrap();
        for t in [1e-3, 0.1, 0.3] {
            let state = eval_seed(&seed, t);
            let g = geometry_at(&state, K_BRYANT).unwrap();
            assert_eq!(g.h, 0.0);
            assert_eq!(g.norm_h2, 0.0);
            assert_eq!(g.h_density, 0.0);
        }
    }

    #[test]
    fn scal_is_the_curvature_trace() {
        let seed = compute_seed(&SolitonParams::from_q(-47.0 / 12.0)).unwrap();
        for t in [1e-3, 0.2, 0.4] {
            let g = geometry_at(&eval_seed(&seed, t), K_TORSION).unwrap();
            assert_eq!(g.scal - (4.0 * g.k_rad + 2.0 * g.k_tan), 0.0);
            // Cross-check against the Ricci trace.
            let trace = g.ric_rr + 2.0 * g.ric_tt;
            assert!((g.scal - trace).abs() <= 1e-12 * trace.abs().max(1.0));
        }
    }

    #[test]
    fn residual_vanishes_on_the_rhs() {
        // The seed series for this q converges only out to t ~ 0.7; stay
        // well inside.
        let seed = compute_seed(&SolitonParams::from_q(-47.0 / 12.0)).unwrap();
        for t in [1e-3, 0.01, 0.05] {
            let state = eval_seed(&seed, t);
            let (r1, r2) = soliton_residual(&state, K_TORSION).unwrap();
            assert!(r1.abs() <= 1e-13, "r1 = {r1:e} at t = {t}");
            assert!(r2.abs() <= 1e-13, "r2 = {r2:e} at t = {t}");
        }
    }

    #[test]
    fn residual_detects_finite_difference_error() {
        // Second derivatives from central differences carry O(h^2) error,
        // and the residual must scale accordingly.
        let seed = compute_seed(&SolitonParams::from_q(-47.0 / 12.0)).unwrap();
        let t = 0.25;
        let resid_fd = |h_fd: f64| {
            let sm = eval_seed(&seed, t - h_fd);
            let s0 = eval_seed(&seed, t);
            let sp = eval_seed(&seed, t + h_fd);
            let ddphi = (sp.phi - 2.0 * s0.phi + sm.phi) / (h_fd * h_fd);
            let ddf = (sp.f - 2.0 * s0.f + sm.f) / (h_fd * h_fd);
            let (r1, r2) = soliton_residual_given(&s0, K_TORSION, ddphi, ddf);
            r1.abs().max(r2.abs())
        };
        let r_coarse = resid_fd(1e-2);
        let r_fine = resid_fd(1e-3);
        assert!(r_coarse > 1e-8, "coarse FD residual visible: {r_coarse:e}");
        let order = (r_coarse / r_fine).log10();
        assert!((order - 2.0).abs() < 0.4, "measured FD order {order}");
    }

    #[test]
    fn residual_detects_corrupted_state() {
        let seed = compute_seed(&SolitonParams::from_q(-47.0 / 12.0)).unwrap();
        let state = eval_seed(&seed, 0.3);
        let d = rhs(&state, K_TORSION).unwrap();
        let mut corrupted = state;
        corrupted.dphi += 1e-3;
        let (r1, r2) = soliton_residual_given(&corrupted, K_TORSION, d.ddphi, d.ddf);
        assert!(r1.abs().max(r2.abs()) >= 1e-4, "residual {r1:e}, {r2:e}");
    }

    #[test]
    fn curvature_limits_recover_q() {
        for q in [-47.0 / 12.0, -4.0] {
            let params = SolitonParams::from_q(q);
            let seed = compute_seed(&params).unwrap();
            let (q_rad, q_tan) = curvature_limit_q(&seed, params.eps_handoff).unwrap();
            assert!((q_rad - q).abs() <= 1e-8, "q from K_rad: {q_rad}");
            assert!((q_tan - q).abs() <= 1e-8, "q from K_tan: {q_tan}");
            assert!((q_rad - q_tan).abs() <= 1e-10, "limits differ: {:e}", q_rad - q_tan);
        }
    }

    #[test]
    fn curvature_limits_constant_curvature_mode() {
        let params = SolitonParams::from_q(oracle::BRF_Q);
        let seed = compute_seed(&params).unwrap();
        let (q_rad, q_tan) = curvature_limit_q(&seed, params.eps_handoff).unwrap();
        assert!((q_rad + 0.5).abs() <= 1e-8);
        assert!((q_tan + 0.5).abs() <= 1e-8);
    }
}
