//! Shared adaptive stepping engine.
//!
//! Dormand-Prince 5(4) embedded pair (FSAL) with PI step-size control,
//! mixed absolute/relative error weighting per component, fourth-order dense
//! output for event localization, and exact landing on requested sample
//! points. Used by both the profile integration in `t` and the phase-space
//! integration in `r`.

// Butcher tableau (Hairer, Norsett & Wanner, dopri5).
const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// PI controller settings (classical dopri5 values).
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_SHRINK_MAX: f64 = 5.0; // at most /5 per step
const FAC_GROW_MAX: f64 = 0.1; // at most x10 per step

/// Controller step sizes below `UNDERFLOW_REL * max(|t|, 1)` abort the run.
const UNDERFLOW_REL: f64 = 1e-14;

/// Bisection width for event localization.
const EVENT_T_TOL: f64 = 1e-10;

const MAX_STEPS: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// Reached the end of the integration span.
    ReachedEnd,
    /// The watched component crossed zero. The location is bisected on the
    /// dense output to [`EVENT_T_TOL`], then Newton-polished on
    /// interpolation-free re-integrations of the bracketing step.
    Event(f64),
    /// The controller drove the step size below the underflow floor.
    StepUnderflow(f64),
    /// The right-hand side produced non-finite values that rejection could
    /// not recover from.
    NonFinite(f64),
}

pub struct Options {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_max: f64,
}

/// Zero-crossing watch on one state component.
///
/// The stop fires when the component drops to `floor` (not to zero): a
/// right-hand side that is singular where the component vanishes cannot be
/// stepped right up to the root, but it is still accurate at a small
/// positive floor, from which the root is a controlled Newton extrapolation
/// away. Use `floor = 0` for regular right-hand sides.
#[derive(Debug, Clone, Copy)]
pub struct EventSpec {
    pub component: usize,
    pub floor: f64,
}

pub struct Integration<const N: usize> {
    /// States recorded at the requested sample points, in order.
    pub samples: Vec<(f64, [f64; N])>,
    /// Final accepted point (the event location when `stop` is `Event`).
    pub t_end: f64,
    pub y_end: [f64; N],
    pub stop: Stop,
    pub accepted: usize,
    pub rejected: usize,
    /// Per-component sum of |embedded error estimate| over accepted steps; a
    /// first-order accumulation bound on the global error.
    pub error_accum: [f64; N],
}

fn stage<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Dense-output evaluation on the last accepted step.
struct Dense<const N: usize> {
    cont: [[f64; N]; 5],
    t0: f64,
    h: f64,
}

impl<const N: usize> Dense<N> {
    fn new(t0: f64, h: f64, y0: &[f64; N], y1: &[f64; N], k: &[[f64; N]; 7]) -> Self {
        let mut cont = [[0.0; N]; 5];
        for i in 0..N {
            let ydiff = y1[i] - y0[i];
            let bspl = h * k[0][i] - ydiff;
            cont[0][i] = y0[i];
            cont[1][i] = ydiff;
            cont[2][i] = bspl;
            cont[3][i] = ydiff - h * k[6][i] - bspl;
            cont[4][i] = h
                * (D1 * k[0][i]
                    + D3 * k[2][i]
                    + D4 * k[3][i]
                    + D5 * k[4][i]
                    + D6 * k[5][i]
                    + D7 * k[6][i]);
        }
        Dense { cont, t0, h }
    }

    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.cont[0][i]
                + theta
                    * (self.cont[1][i]
                        + theta1
                            * (self.cont[2][i]
                                + theta * (self.cont[3][i] + theta1 * self.cont[4][i])));
        }
        out
    }
}

/// Initial step-size heuristic (Hairer's `hinit`).
fn initial_step<const N: usize, F>(
    rhs: &F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    direction_span: f64,
    opts: &Options,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y0[i].abs();
        dnf += (f0[i] / sc) * (f0[i] / sc);
        dny += (y0[i] / sc) * (y0[i] / sc);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(opts.h_max).min(direction_span);

    let y1 = stage(y0, h, &[(1.0, f0)]);
    let f1 = rhs(t0 + h, &y1);
    let mut der2 = 0.0;
    for i in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y0[i].abs();
        der2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    h.min(h1).min(opts.h_max).max(1e-308)
}

/// Drives the integration from `t0` to `t_end` (forward), recording states
/// at `sample_points` (strictly increasing, inside `[t0, t_end]`). Each
/// sample point is landed on exactly rather than interpolated. When `event`
/// is given and the watched component reaches its floor at an accepted step
/// endpoint, the zero of the component is localized and the run stops there.
pub fn integrate_adaptive<const N: usize, F>(
    rhs: F,
    t0: f64,
    t_end: f64,
    y0: [f64; N],
    sample_points: &[f64],
    event: Option<EventSpec>,
    opts: &Options,
) -> Integration<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    assert!(t_end > t0, "integration span must be forward");
    debug_assert!(sample_points.windows(2).all(|w| w[0] < w[1]));

    let mut samples = Vec::with_capacity(sample_points.len());
    let mut next_sample = 0usize;
    while next_sample < sample_points.len() && sample_points[next_sample] <= t0 {
        samples.push((t0, y0));
        next_sample += 1;
    }

    let mut t = t0;
    let mut y = y0;
    let mut k: [[f64; N]; 7] = [[0.0; N]; 7];
    k[0] = rhs(t, &y);

    let mut h = initial_step(&rhs, t, &y, &k[0], t_end - t0, opts);
    let mut facold: f64 = 1e-4;
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut error_accum = [0.0; N];
    let mut last_bad_nonfinite = false;

    for _ in 0..MAX_STEPS {
        if h < UNDERFLOW_REL * t.abs().max(1.0) {
            // Safety net: if the controller crept up to the zero of the
            // watched component anyway, classify the stop as the crossing.
            if let Some(ev) = event {
                let c = ev.component;
                let slope = rhs(t, &y)[c];
                if y[c] > 0.0 && slope < 0.0 {
                    let t_x = t - y[c] / slope;
                    if t_x - t <= 1e-6 * t.abs().max(1.0) {
                        return Integration {
                            samples,
                            t_end: t_x,
                            y_end: y,
                            stop: Stop::Event(t_x),
                            accepted,
                            rejected,
                            error_accum,
                        };
                    }
                }
            }
            let stop = if last_bad_nonfinite {
                Stop::NonFinite(t)
            } else {
                Stop::StepUnderflow(t)
            };
            return Integration { samples, t_end: t, y_end: y, stop, accepted, rejected, error_accum };
        }

        // Land exactly on the next pending target (sample point or span end).
        let target = if next_sample < sample_points.len() {
            sample_points[next_sample].min(t_end)
        } else {
            t_end
        };
        let mut h_step = h.min(opts.h_max);
        let mut clipped = false;
        if t + h_step >= target {
            h_step = target - t;
            clipped = true;
        }

        let k1 = k[0];
        let y2 = stage(&y, h_step, &[(A21, &k1)]);
        k[1] = rhs(t + C2 * h_step, &y2);
        let k2 = k[1];
        let y3 = stage(&y, h_step, &[(A31, &k1), (A32, &k2)]);
        k[2] = rhs(t + C3 * h_step, &y3);
        let k3 = k[2];
        let y4 = stage(&y, h_step, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        k[3] = rhs(t + C4 * h_step, &y4);
        let k4 = k[3];
        let y5 = stage(&y, h_step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        k[4] = rhs(t + C5 * h_step, &y5);
        let k5 = k[4];
        let y6 = stage(&y, h_step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        k[5] = rhs(t + h_step, &y6);
        let k6 = k[5];
        let y_new = stage(&y, h_step, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        k[6] = rhs(t + h_step, &y_new);
        let k7 = k[6];

        let mut err: f64 = 0.0;
        let mut err_components = [0.0; N];
        for i in 0..N {
            let e = h_step
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            err_components[i] = e.abs();
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / N as f64).sqrt();

        if !err.is_finite() {
            last_bad_nonfinite = true;
            rejected += 1;
            h = h_step * 0.25;
            continue;
        }
        last_bad_nonfinite = false;

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            // Accepted.
            let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(FAC_GROW_MAX, FAC_SHRINK_MAX);
            facold = err.max(1e-4);
            let t_new = if clipped { target } else { t + h_step };
            for i in 0..N {
                error_accum[i] += err_components[i];
            }
            accepted += 1;

            if let Some(ev) = event {
                let c = ev.component;
                if y_new[c] <= ev.floor && y[c] > ev.floor {
                    let dense = Dense::new(t, h_step, &y, &y_new, &k);
                    let (t_b, y_b) = bisect_event(&ev, &dense, t, t_new);
                    let (t_ev, y_ev) = refine_event(&rhs, &ev, t, &y, t_b, y_b, t_new, opts);
                    return Integration {
                        samples,
                        t_end: t_ev,
                        y_end: y_ev,
                        stop: Stop::Event(t_ev),
                        accepted,
                        rejected,
                        error_accum,
                    };
                }
            }

            t = t_new;
            y = y_new;
            k[0] = k7; // FSAL

            while next_sample < sample_points.len() && sample_points[next_sample] <= t {
                samples.push((t, y));
                next_sample += 1;
            }
            if t >= t_end {
                return Integration {
                    samples,
                    t_end: t,
                    y_end: y,
                    stop: Stop::ReachedEnd,
                    accepted,
                    rejected,
                    error_accum,
                };
            }

            h = h_step / fac;
        } else {
            rejected += 1;
            h = h_step / (fac11 / SAFETY).min(FAC_SHRINK_MAX);
        }
    }

    Integration {
        samples,
        t_end: t,
        y_end: y,
        stop: Stop::StepUnderflow(t),
        accepted,
        rejected,
        error_accum,
    }
}

fn bisect_event<const N: usize>(
    ev: &EventSpec,
    dense: &Dense<N>,
    t_lo: f64,
    t_hi: f64,
) -> (f64, [f64; N]) {
    let mut lo = t_lo;
    let mut hi = t_hi;
    while hi - lo > EVENT_T_TOL {
        let mid = 0.5 * (lo + hi);
        if dense.eval(mid)[ev.component] > ev.floor {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (hi, dense.eval(hi))
}

/// Polishes the dense-output floor crossing on interpolation-free states
/// (the bracketing step re-integrated from its start), then extrapolates the
/// final Newton step from the floor to the zero of the component. All
/// integrations stay on the trustworthy side of the floor.
///
/// Takes the RHS dynamically so the nested `integrate_adaptive` call closes
/// over a single closure type per `N` instead of recursing in the type system.
#[allow(clippy::too_many_arguments)]
fn refine_event<const N: usize>(
    rhs: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    ev: &EventSpec,
    t_start: f64,
    y_start: &[f64; N],
    t_guess: f64,
    y_guess: [f64; N],
    t_hi: f64,
    opts: &Options,
) -> (f64, [f64; N]) {
    let c = ev.component;
    let mut t_star = t_guess;
    let mut y_star = y_guess;
    let mut slope = f64::NAN;
    for _ in 0..3 {
        if t_star <= t_start {
            break;
        }
        let sub = integrate_adaptive(
            |tt, yy: &[f64; N]| rhs(tt, yy),
            t_start,
            t_star,
            *y_start,
            &[],
            None,
            opts,
        );
        if sub.stop != Stop::ReachedEnd {
            break;
        }
        y_star = sub.y_end;
        slope = rhs(t_star, &y_star)[c];
        let delta = (ev.floor - y_star[c]) / slope;
        if !delta.is_finite() {
            break;
        }
        let t_next = (t_star + delta).clamp(t_start, t_hi);
        let converged = (t_next - t_star).abs() <= 1e-13 * t_star.abs().max(1.0);
        t_star = t_next;
        if converged {
            break;
        }
    }
    // Remaining distance from the floor down to zero.
    if ev.floor > 0.0 && slope.is_finite() && slope < 0.0 {
        let t_zero = t_star - y_star[c] / slope;
        if t_zero > t_star && t_zero.is_finite() {
            return (t_zero, y_star);
        }
    }
    (t_star, y_star)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(tol: f64) -> Options {
        Options { abs_tol: tol, rel_tol: tol, h_max: f64::INFINITY }
    }

    #[test]
    fn exponential_decay() {
        let run = integrate_adaptive(
            |_, y: &[f64; 1]| [-y[0]],
            0.0,
            5.0,
            [1.0],
            &[1.0, 2.5, 5.0],
            None,
            &opts(1e-10),
        );
        assert_eq!(run.stop, Stop::ReachedEnd);
        assert_eq!(run.samples.len(), 3);
        for (t, y) in &run.samples {
            assert!((y[0] - (-t).exp()).abs() < 1e-10, "t = {t}");
        }
        // Samples are landed on exactly.
        assert_eq!(run.samples[0].0, 1.0);
        assert_eq!(run.samples[1].0, 2.5);
    }

    #[test]
    fn harmonic_oscillator_event() {
        // y'' = -y from (0, 1): first zero of y at t = pi/2.
        let run = integrate_adaptive(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            10.0,
            [1.0, 0.0],
            &[],
            Some(EventSpec { component: 0, floor: 0.0 }),
            &opts(1e-12),
        );
        match run.stop {
            Stop::Event(t) => assert!(
                (t - std::f64::consts::FRAC_PI_2).abs() < 1e-10,
                "zero found at {t}"
            ),
            other => panic!("expected event, got {other:?}"),
        }
    }

    #[test]
    fn tolerance_controls_error() {
        let endpoint = |tol: f64| {
            let run = integrate_adaptive(
                |t: f64, y: &[f64; 1]| [t.cos() * y[0] / (1.0 + y[0] * y[0])],
                0.0,
                8.0,
                [0.7],
                &[],
                None,
                &opts(tol),
            );
            run.y_end[0]
        };
        let coarse = endpoint(1e-6);
        let fine = endpoint(1e-12);
        assert!((coarse - fine).abs() < 1e-5);
        assert!((coarse - fine).abs() > 0.0);
    }

    #[test]
    fn nonfinite_rhs_reported() {
        // Blows up in finite time: y' = y^2 from y(0) = 1 diverges at t = 1.
        let run = integrate_adaptive(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            0.0,
            2.0,
            [1.0],
            &[],
            None,
            &opts(1e-10),
        );
        match run.stop {
            Stop::NonFinite(t) | Stop::StepUnderflow(t) => {
                assert!((t - 1.0).abs() < 1e-3, "stopped at {t}");
            }
            other => panic!("expected failure near t = 1, got {other:?}"),
        }
    }
}
