//! Independent cross-check in autonomous phase variables.
//!
//! The substitution `x = phi'`, `y = 2 phi' - f' phi`, `z = e^f phi` with the
//! parameter `r = ∫ dt/phi` turns the profile system into the first-order
//! autonomous system
//!
//! ```text
//! dx/dr = x^2 - x y + 1 - c^2 z^2,
//! dy/dr = x (y - 2x) - c^2 z^2,
//! dz/dr = (3x - y) z,
//! ```
//!
//! carrying `phi^2` alongside (`d(phi^2)/dr = 2 x phi^2`) because the
//! algebraic constraint
//!
//! ```text
//! 2 x^2 - y^2 + c^2 z^2 + 2 = (6q + 5 c^2) phi^2
//! ```
//!
//! needs it. Integrating this system and comparing against the transformed
//! profile run exercises a completely different formulation of the same
//! dynamics; agreement is a strong correctness check on both.
//!
//! `r` is anchored to zero at the handoff point; the singular end
//! `r -> -infinity` at `t = 0` is never touched.

use crate::integrator::{GridSpec, SolitonState, Termination, Trajectory};
use crate::rk::{self, Stop};
use crate::seed::{eval_seed, SeedExpansion, SolitonParams, SeedError};
use crate::integrator::IntegratorError;

/// A point of the phase orbit at parameter `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub r: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub phi_sq: f64,
}

/// Maps a profile state to phase variables. The `r` coordinate is not
/// derivable from a single state and is left at zero; callers anchoring an
/// orbit assign it from the reparametrization.
pub fn to_phase(state: &SolitonState) -> PhaseState {
    PhaseState {
        r: 0.0,
        x: state.dphi,
        y: 2.0 * state.dphi - state.df * state.phi,
        z: state.f.exp() * state.phi,
        phi_sq: state.phi * state.phi,
    }
}

/// Right-hand side of the autonomous system; `c2 = k^2/2` scales the
/// torsion terms (the torsion-free mode drops them while keeping `z`).
pub fn phase_rhs(state: &PhaseState, c2: f64) -> [f64; 4] {
    let PhaseState { x, y, z, phi_sq, .. } = *state;
    [
        x * x - x * y + 1.0 - c2 * z * z,
        x * (y - 2.0 * x) - c2 * z * z,
        (3.0 * x - y) * z,
        2.0 * x * phi_sq,
    ]
}

/// Value of the algebraic constraint
/// `2x^2 - y^2 + c^2 z^2 + 2 - (6q + 5c^2) phi^2`; zero along exact orbits.
pub fn constraint_residual(state: &PhaseState, params: &SolitonParams) -> f64 {
    let c2 = params.c2();
    2.0 * state.x * state.x - state.y * state.y + c2 * state.z * state.z + 2.0
        - params.conserved_target() * state.phi_sq
}

#[derive(Debug, Clone)]
pub struct PhaseTrajectory {
    pub params: SolitonParams,
    pub samples: Vec<PhaseState>,
    pub termination: Termination,
}

/// Profile run carrying the reparametrization `r(t) = ∫_eps^t ds/phi(s)`
/// as a fifth integrated component; returns the sampled trajectory and the
/// `r` value at each sample.
pub fn profile_with_r(
    params: &SolitonParams,
    seed: &SeedExpansion,
    t_samples: &[f64],
) -> Result<(Trajectory, Vec<f64>), IntegratorError> {
    params.validate().map_err(SeedError::from)?;
    let eps = params.eps_handoff;
    let start = eval_seed(seed, eps);
    let c2 = params.c2();

    let mut grid: Vec<f64> = Vec::with_capacity(t_samples.len() + 1);
    if t_samples.first().map_or(true, |&t| t > eps) {
        grid.push(eps);
    }
    grid.extend_from_slice(t_samples);

    let run = rk::integrate_adaptive(
        |_, y: &[f64; 5]| {
            let d = crate::integrator::rhs_array(&[y[0], y[1], y[2], y[3]], c2);
            [d[0], d[1], d[2], d[3], 1.0 / y[0]]
        },
        eps,
        params.t_max,
        [start.phi, start.dphi, start.f, start.df, 0.0],
        &grid,
        Some(rk::EventSpec { component: 0, floor: (0.5 * start.phi).min(1e-5) }),
        &rk::Options { abs_tol: params.abs_tol, rel_tol: params.rel_tol, h_max: f64::INFINITY },
    );

    let mut samples = Vec::with_capacity(run.samples.len());
    let mut r_values = Vec::with_capacity(run.samples.len());
    for &(t, y) in &run.samples {
        samples.push(SolitonState { t, phi: y[0], dphi: y[1], f: y[2], df: y[3] });
        r_values.push(y[4]);
    }
    let termination = match run.stop {
        Stop::ReachedEnd => Termination::ReachedTMax,
        Stop::Event(t) => Termination::OrbitCollapse(t),
        Stop::StepUnderflow(t) => Termination::StepUnderflow(t),
        Stop::NonFinite(t) => Termination::NonFinite(t),
    };
    Ok((
        Trajectory { params: params.clone(), samples, termination, error_estimate: run.error_accum[0] },
        r_values,
    ))
}

/// Absolute floor of the phase leg's error weights; the departure
/// components start around `eps^2` and are controlled relatively.
const PHASE_ABS_TOL: f64 = 1e-20;

/// Departure state `(p, s, w, v) = (x - 1, y - 2, ln z, ln phi^2)` at `t`,
/// with `p` and `s` evaluated through exact parity shifts of the seed
/// series; both vanish to second order, so forming them from rounded
/// `(x, y)` would lose all relative accuracy.
fn departure_start(seed: &SeedExpansion, t: f64) -> [f64; 4] {
    let phi_series = seed.a_series.shift_up(1);
    let dphi_series = phi_series.differentiate();
    let one = crate::series::TruncSeries::constant(1.0, dphi_series.order());
    let p_sh = dphi_series.sub(&one).shift_down(2).expect("phi' - 1 has a double zero");
    let df_series = seed.f_series.differentiate();
    let fphi_sh = df_series
        .mul(&phi_series)
        .shift_down(2)
        .expect("f' phi has a double zero");

    let tt = t * t;
    let p = tt * p_sh.eval_horner(t);
    let s = 2.0 * p - tt * fphi_sh.eval_horner(t);
    let phi = t * seed.a_series.eval_horner(t);
    let f = seed.f_series.eval_horner(t);
    [p, s, f + phi.ln(), 2.0 * phi.ln()]
}

/// Integrates the phase system from the transformed handoff state at
/// `r = 0`, recording the requested `r` samples.
///
/// The handoff state sits exponentially close to the hyperbolic stationary
/// point `(1, 2, 0)` (unstable rates 2 and 1 in `r`), so absolute errors
/// seeded early grow like `e^{2r} = (t/eps)^2` until the orbit departs. The
/// stepper therefore works in the departure chart
/// `(x - 1, y - 2, ln z, ln phi^2)`, where mixed error control is
/// effectively relative to the distance from the stationary point and the
/// amplification acts on proportionally small errors.
pub fn integrate_phase(
    params: &SolitonParams,
    seed: &SeedExpansion,
    r_end: f64,
    r_samples: &[f64],
) -> Result<PhaseTrajectory, IntegratorError> {
    params.validate().map_err(SeedError::from)?;
    let c2 = params.c2();
    let run = rk::integrate_adaptive(
        |_, y: &[f64; 4]| {
            let [p, s, w, _] = *y;
            let zsq = c2 * (2.0 * w).exp();
            [
                p * p - s - p * s - zsq,
                s - 2.0 * p + p * s - 2.0 * p * p - zsq,
                1.0 + 3.0 * p - s,
                2.0 + 2.0 * p,
            ]
        },
        0.0,
        r_end,
        departure_start(seed, params.eps_handoff),
        r_samples,
        None,
        &rk::Options {
            abs_tol: PHASE_ABS_TOL,
            rel_tol: (params.rel_tol * 1e-3).max(1e-14),
            h_max: f64::INFINITY,
        },
    );
    let samples = run
        .samples
        .iter()
        .map(|&(r, y)| PhaseState {
            r,
            x: 1.0 + y[0],
            y: 2.0 + y[1],
            z: y[2].exp(),
            phi_sq: y[3].exp(),
        })
        .collect();
    let termination = match run.stop {
        Stop::ReachedEnd => Termination::ReachedTMax,
        Stop::Event(r) => Termination::OrbitCollapse(r),
        Stop::StepUnderflow(r) => Termination::StepUnderflow(r),
        Stop::NonFinite(r) => Termination::NonFinite(r),
    };
    Ok(PhaseTrajectory { params: params.clone(), samples, termination })
}

/// Outcome of the dual-formulation consistency check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCheck {
    /// Max over samples of the `(x, y, z)` componentwise deviation between
    /// the transformed profile and the phase integration.
    pub max_component_dev: f64,
    /// Max relative deviation of the carried `phi^2`.
    pub max_phi_sq_rel_dev: f64,
    /// Max of the algebraic constraint residual along the phase run.
    pub max_constraint_drift: f64,
}

/// Runs both formulations over `[eps, t_max]` and compares them after the
/// `r(t)` reparametrization.
pub fn cross_validate(
    params: &SolitonParams,
    seed: &SeedExpansion,
    t_samples: &[f64],
) -> Result<CrossCheck, IntegratorError> {
    let (profile, r_values) = profile_with_r(params, seed, t_samples)?;
    let r_end = *r_values.last().expect("profile run has samples");
    let phase = integrate_phase(params, seed, r_end, &r_values)?;

    let mut max_dev: f64 = 0.0;
    let mut max_phi_sq: f64 = 0.0;
    let mut max_drift: f64 = 0.0;
    for (state, ph) in profile.samples.iter().zip(&phase.samples) {
        let direct = to_phase(state);
        max_dev = max_dev
            .max((direct.x - ph.x).abs())
            .max((direct.y - ph.y).abs())
            .max((direct.z - ph.z).abs());
        max_phi_sq =
            max_phi_sq.max((direct.phi_sq - ph.phi_sq).abs() / direct.phi_sq.max(1.0));
        max_drift = max_drift.max(constraint_residual(ph, params).abs());
    }
    Ok(CrossCheck {
        max_component_dev: max_dev,
        max_phi_sq_rel_dev: max_phi_sq,
        max_constraint_drift: max_drift,
    })
}

/// Default cross-validation grid: log-spaced, sparse enough not to throttle
/// the stepper.
pub fn default_cross_grid(params: &SolitonParams) -> Vec<f64> {
    GridSpec::Log(64).points(params.eps_handoff, params.t_max)
}
