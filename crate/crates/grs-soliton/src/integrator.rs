//! Adaptive integration of the profile equations from the handoff point.
//!
//! The series seed owns `[0, eps]`; integration starts at `t = eps` and
//! never touches the singular origin, where the `1/phi` and `1/phi^2` terms
//! blow up. Collapse of the orbit spheres (`phi = 0`) is detected by sign
//! change and bisection on dense output.

use crate::rk::{self, Stop};
use crate::seed::{eval_seed, SeedExpansion, SolitonParams, SeedError};
use thiserror::Error;

/// A point on the profile curve: `(t, phi, phi', f, f')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonState {
    pub t: f64,
    pub phi: f64,
    pub dphi: f64,
    pub f: f64,
    pub df: f64,
}

/// First and second derivatives returned by the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub dphi: f64,
    pub ddphi: f64,
    pub df: f64,
    pub ddf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    ReachedTMax,
    /// `phi` reached zero at the recorded time (legitimate for the exact
    /// round-sphere orbit and for parameters outside the theorem range).
    OrbitCollapse(f64),
    StepUnderflow(f64),
    NonFinite(f64),
}

impl Termination {
    pub fn reached_t_max(&self) -> bool {
        matches!(self, Termination::ReachedTMax)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("right-hand side needs phi > 0, got phi = {phi} at t = {t}")]
    OrbitCollapsed { t: f64, phi: f64 },
    #[error("seed was computed for q = {seed_q}, c2 = {seed_c2}, params have q = {q}, c2 = {c2}")]
    SeedMismatch { seed_q: f64, seed_c2: f64, q: f64, c2: f64 },
    #[error(transparent)]
    Seed(#[from] SeedError),
}

/// Sampled solution of one profile run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: SolitonParams,
    /// States at strictly increasing `t`, the first at `t = eps` from the seed.
    pub samples: Vec<SolitonState>,
    pub termination: Termination,
    /// Accumulated embedded error estimate for the `phi` component; a
    /// first-order bound on the global error at `t_max`.
    pub error_estimate: f64,
}

impl Trajectory {
    pub fn last(&self) -> &SolitonState {
        self.samples.last().expect("a trajectory holds at least the handoff sample")
    }
}

/// Sample grid specification over `[eps, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    Linear(usize),
    Log(usize),
}

impl GridSpec {
    pub fn points(&self, eps: f64, t_max: f64) -> Vec<f64> {
        match *self {
            GridSpec::Linear(n) => {
                let n = n.max(2);
                let mut grid: Vec<f64> = (0..n)
                    .map(|i| eps + (t_max - eps) * i as f64 / (n - 1) as f64)
                    .collect();
                grid[0] = eps;
                grid[n - 1] = t_max;
                grid
            }
            GridSpec::Log(n) => {
                let n = n.max(2);
                let ratio = (t_max / eps).ln();
                let mut grid: Vec<f64> = (0..n)
                    .map(|i| eps * (ratio * i as f64 / (n - 1) as f64).exp())
                    .collect();
                grid[0] = eps;
                grid[n - 1] = t_max;
                grid
            }
        }
    }
}

pub const DEFAULT_GRID: GridSpec = GridSpec::Log(512);

/// `1 - x^2` in factored form. Near `|x| = 1` the subtraction is exact
/// (Sterbenz), so the result carries relative instead of absolute rounding
/// error; the `1/phi^2` terms would otherwise amplify the absolute error
/// without bound near the origin and near collapse.
#[inline]
pub(crate) fn one_minus_sq(x: f64) -> f64 {
    (1.0 - x) * (1.0 + x)
}

pub(crate) fn rhs_array(y: &[f64; 4], c2: f64) -> [f64; 4] {
    let [phi, dphi, f, df] = *y;
    let e2f = (2.0 * f).exp(); // underflows to 0 for large negative f
    let s = one_minus_sq(dphi) / phi;
    [
        dphi,
        s + dphi * df - c2 * phi * e2f,
        df,
        2.0 * s / phi + 2.0 * (dphi / phi) * df - c2 * e2f,
    ]
}

/// Right-hand side of the profile system at a state:
///
/// ```text
/// phi'' = (1 - phi'^2)/phi + phi' f' - (k^2/2) phi e^{2f},
/// f''   = 2 (1 - phi'^2)/phi^2 + 2 (phi'/phi) f' - (k^2/2) e^{2f},
/// ```
///
/// The `k = 0` mode drops the `e^{2f}` terms. The outputs satisfy
/// `phi f'' - 2 phi'' = (k^2/2) phi e^{2f}` identically.
pub fn rhs(state: &SolitonState, k: f64) -> Result<Derivatives, IntegratorError> {
    if state.phi <= 0.0 {
        return Err(IntegratorError::OrbitCollapsed { t: state.t, phi: state.phi });
    }
    let c2 = k * k / 2.0;
    let d = rhs_array(&[state.phi, state.dphi, state.f, state.df], c2);
    Ok(Derivatives { dphi: d[0], ddphi: d[1], df: d[2], ddf: d[3] })
}

fn check_seed(params: &SolitonParams, seed: &SeedExpansion) -> Result<(), IntegratorError> {
    if seed.q != params.q || seed.c2 != params.c2() {
        return Err(IntegratorError::SeedMismatch {
            seed_q: seed.q,
            seed_c2: seed.c2,
            q: params.q,
            c2: params.c2(),
        });
    }
    Ok(())
}

/// Integrates the profile from the handoff state at `eps` to `t_max`,
/// recording states on the default sample grid.
pub fn integrate(params: &SolitonParams, seed: &SeedExpansion) -> Result<Trajectory, IntegratorError> {
    integrate_sampled(params, seed, &DEFAULT_GRID.points(params.eps_handoff, params.t_max))
}

/// As [`integrate`], with a caller-provided ascending sample grid inside
/// `[eps, t_max]`. The handoff point is always included as the first sample.
pub fn integrate_sampled(
    params: &SolitonParams,
    seed: &SeedExpansion,
    sample_points: &[f64],
) -> Result<Trajectory, IntegratorError> {
    params.validate().map_err(SeedError::from)?;
    check_seed(params, seed)?;
    let eps = params.eps_handoff;
    debug_assert!(sample_points.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(sample_points.iter().all(|&t| t >= eps && t <= params.t_max));

    let mut grid: Vec<f64> = Vec::with_capacity(sample_points.len() + 1);
    if sample_points.first().map_or(true, |&t| t > eps) {
        grid.push(eps);
    }
    grid.extend_from_slice(sample_points);

    let start = eval_seed(seed, eps);
    let y0 = [start.phi, start.dphi, start.f, start.df];
    let c2 = params.c2();

    // The right-hand side carries 1/phi^2 terms whose rounding noise blows
    // up as phi -> 0, so collapse is detected at a small positive floor and
    // the root extrapolated from there.
    let floor = (0.5 * start.phi).min(1e-5);
    let run = rk::integrate_adaptive(
        |_, y: &[f64; 4]| rhs_array(y, c2),
        eps,
        params.t_max,
        y0,
        &grid,
        Some(rk::EventSpec { component: 0, floor }),
        &rk::Options { abs_tol: params.abs_tol, rel_tol: params.rel_tol, h_max: f64::INFINITY },
    );

    let samples = run
        .samples
        .iter()
        .map(|&(t, y)| SolitonState { t, phi: y[0], dphi: y[1], f: y[2], df: y[3] })
        .collect();
    let termination = match run.stop {
        Stop::ReachedEnd => Termination::ReachedTMax,
        Stop::Event(t) => Termination::OrbitCollapse(t),
        Stop::StepUnderflow(t) => Termination::StepUnderflow(t),
        Stop::NonFinite(t) => Termination::NonFinite(t),
    };

    Ok(Trajectory {
        params: params.clone(),
        samples,
        termination,
        error_estimate: run.error_accum[0],
    })
}
