//! Formal power-series solution of the profile equations at the singular
//! origin `t = 0`.
//!
//! Writing `phi(t) = t a(t)` with `a` even, `a(0) = 1` and `f` even,
//! `f(0) = 0` turns the singular system into a recursion on the even Taylor
//! coefficients: the pair of degree-(2n+2) coefficients solves a 2x2 linear
//! system `L_{2n} u = d_{2n}` whose matrix is invertible for `n >= 1`. The
//! level `n = 0` matrix is singular; that degree of freedom is the family
//! parameter `q = phi'''(0)`, injected directly as `a''(0) = q/3`,
//! `f''(0) = 2q + c^2` with `c^2 = k^2/2`.

use crate::integrator::SolitonState;
use crate::series::{SeriesError, TruncSeries};
use thiserror::Error;

/// Completeness threshold: the long-time theorems hold for `q < -35/12`.
pub const Q_CRITICAL: f64 = -35.0 / 12.0;

/// Torsion constant of the generalized (non-zero `H`) mode, `k = sqrt(2)`.
pub const K_TORSION: f64 = std::f64::consts::SQRT_2;

/// Torsion constant of the classical steady Ricci-soliton mode.
pub const K_BRYANT: f64 = 0.0;

pub const DEFAULT_SERIES_ORDER: usize = 24;
pub const DEFAULT_EPS_HANDOFF: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_T_MAX: f64 = 100.0;

/// Determinants at or below this are treated as singular in the recursion.
const L_MATRIX_MIN_DET: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("k must be 0 or sqrt(2), got {0}")]
    InvalidTorsion(f64),
    #[error("eps_handoff must lie in (0, 0.1], got {0}")]
    InvalidHandoff(f64),
    #[error("series order must be at least 2, got {0}")]
    OrderTooSmall(usize),
    #[error("tolerances must be positive, got abs={abs}, rel={rel}")]
    InvalidTolerance { abs: f64, rel: f64 },
    #[error("t_max ({t_max}) must exceed eps_handoff ({eps})")]
    InvalidSpan { t_max: f64, eps: f64 },
    #[error("ell = {ell} is inconsistent with q = {q}")]
    InconsistentEll { ell: f64, q: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeedError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    /// A level matrix with `n >= 1` came out singular. The determinant is
    /// positive for every such level, so this signals a broken build.
    #[error("singular level matrix L_{level} (det = {det:e})")]
    SingularLevel { level: usize, det: f64 },
}

/// Family parameter, torsion mode and solver settings for one profile run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonParams {
    /// Family parameter `q = phi'''(0)`.
    pub q: f64,
    /// When set, `q = -35/12 - exp(-ell)`.
    pub ell: Option<f64>,
    /// Torsion constant, `sqrt(2)` (generalized mode) or `0` (Ricci-soliton mode).
    pub k: f64,
    /// Inclusive truncation degree of the seed series.
    pub series_order: usize,
    /// Handoff point: the series owns `[0, eps]`, the integrator `[eps, t_max]`.
    pub eps_handoff: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub t_max: f64,
}

impl SolitonParams {
    pub fn from_q(q: f64) -> Self {
        SolitonParams {
            q,
            ell: None,
            k: K_TORSION,
            series_order: DEFAULT_SERIES_ORDER,
            eps_handoff: DEFAULT_EPS_HANDOFF,
            abs_tol: DEFAULT_TOL,
            rel_tol: DEFAULT_TOL,
            t_max: DEFAULT_T_MAX,
        }
    }

    /// Family member `q_ell = -35/12 - exp(-ell)`, always below the
    /// completeness threshold.
    pub fn from_ell(ell: f64) -> Self {
        let mut params = Self::from_q(q_of_ell(ell));
        params.ell = Some(ell);
        params
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps_handoff = eps;
        self
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.series_order = order;
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    /// Coefficient of the `e^{2f}` terms in the profile equations: `c^2 = k^2/2`.
    pub fn c2(&self) -> f64 {
        self.k * self.k / 2.0
    }

    /// Value of the conserved quantity along the profile: `6q + 5c^2`.
    pub fn conserved_target(&self) -> f64 {
        6.0 * self.q + 5.0 * self.c2()
    }

    /// True when the completeness and positivity theorems apply
    /// (`q < -35/12`, non-zero torsion).
    pub fn in_theorem_regime(&self) -> bool {
        self.k != 0.0 && self.q < Q_CRITICAL
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.k != 0.0 && self.k != K_TORSION {
            return Err(ParamError::InvalidTorsion(self.k));
        }
        if !(self.eps_handoff > 0.0 && self.eps_handoff <= 0.1) {
            return Err(ParamError::InvalidHandoff(self.eps_handoff));
        }
        if self.series_order < 2 {
            return Err(ParamError::OrderTooSmall(self.series_order));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(ParamError::InvalidTolerance { abs: self.abs_tol, rel: self.rel_tol });
        }
        if self.t_max <= self.eps_handoff {
            return Err(ParamError::InvalidSpan { t_max: self.t_max, eps: self.eps_handoff });
        }
        if let Some(ell) = self.ell {
            if (self.q - q_of_ell(ell)).abs() > 1e-12 * (1.0 + self.q.abs()) {
                return Err(ParamError::InconsistentEll { ell, q: self.q });
            }
        }
        Ok(())
    }
}

pub fn q_of_ell(ell: f64) -> f64 {
    Q_CRITICAL - (-ell).exp()
}

/// Inverse of [`q_of_ell`]; defined for `q < -35/12`.
pub fn ell_of_q(q: f64) -> Option<f64> {
    if q < Q_CRITICAL {
        Some(-(Q_CRITICAL - q).ln())
    } else {
        None
    }
}

/// The paired even series `(a, f)` with `phi = t a`, carrying the parameter
/// and the truncation order.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedExpansion {
    pub a_series: TruncSeries,
    pub f_series: TruncSeries,
    pub q: f64,
    /// `k^2/2` of the parameters the seed was computed for.
    pub c2: f64,
    /// Inclusive truncation degree of both series.
    pub order: usize,
}

/// The level matrix `L_{2n} = I - dA/(2(n+1)(2n+1)) - (dB/dQ)/(2n+1)`, with
/// `dA = [[-2,0],[-4,0]]` and `dB/dQ = [[-4,1],[-4,2]]` at the initial point.
pub fn l_matrix(n: usize) -> [[f64; 2]; 2] {
    let nf = n as f64;
    let r1 = 1.0 / ((nf + 1.0) * (2.0 * nf + 1.0));
    let r2 = 1.0 / (2.0 * nf + 1.0);
    [
        [1.0 + r1 + 4.0 * r2, -r2],
        [2.0 * r1 + 4.0 * r2, 1.0 - 2.0 * r2],
    ]
}

/// Right-hand sides of the `(a, f)` form of the profile equations, as series:
///
/// ```text
/// a'' = A1/t^2 + B1/t + C1,    f'' = A2/t^2 + B2/t + C2,
/// ```
///
/// with `A = ((1-a^2)/a, 2(1-a^2)/a^2)`, `B = (af' - 4a', 2(f' - 2a'/a))` and
/// `C = (a'f' - a'^2/a - c^2 a e^{2f}, 2(a'/a)f' - 2a'^2/a^2 - c^2 e^{2f})`.
struct RhsSeries {
    a1: TruncSeries,
    a2: TruncSeries,
    b1: TruncSeries,
    b2: TruncSeries,
    c1: TruncSeries,
    c2: TruncSeries,
}

fn rhs_series(a: &TruncSeries, f: &TruncSeries, c2: f64) -> Result<RhsSeries, SeriesError> {
    let inv_a = a.reciprocal()?;
    let inv_a_sq = inv_a.mul(&inv_a);
    let num = TruncSeries::constant(1.0, a.order()).sub(&a.mul(a));
    let da = a.differentiate();
    let df = f.differentiate();
    let da_sq = da.mul(&da);
    let e2f = f.scale(2.0).exp_series()?;
    Ok(RhsSeries {
        a1: num.mul(&inv_a),
        a2: num.mul(&inv_a_sq).scale(2.0),
        b1: a.mul(&df).sub(&da.scale(4.0)),
        b2: df.sub(&da.mul(&inv_a).scale(2.0)).scale(2.0),
        c1: da
            .mul(&df)
            .sub(&da_sq.mul(&inv_a))
            .sub(&a.mul(&e2f).scale(c2)),
        c2: da
            .mul(&inv_a)
            .mul(&df)
            .scale(2.0)
            .sub(&da_sq.mul(&inv_a_sq).scale(2.0))
            .sub(&e2f.scale(c2)),
    })
}

/// Computes the even formal solution for the given parameters.
///
/// Level `n = 0` is set from the free parameter (`a''(0) = q/3`,
/// `f''(0) = 2q + c^2`); every later level solves `L_{2n} u = d_{2n}` where
/// `d_{2n}` comes from truncated-series composition of the right-hand sides
/// with the still-unknown top coefficients set to zero.
pub fn compute_seed(params: &SolitonParams) -> Result<SeedExpansion, SeedError> {
    params.validate()?;
    let order = params.series_order;
    let c2 = params.c2();
    let q = params.q;

    let mut alpha = vec![0.0; order + 1];
    let mut gamma = vec![0.0; order + 1];
    alpha[0] = 1.0;
    alpha[2] = q / 6.0;
    gamma[2] = (2.0 * q + c2) / 2.0;

    let mut level = 1;
    while 2 * level + 2 <= order {
        let m = 2 * level + 2;
        let a = TruncSeries::from_coeffs(alpha[..=m].to_vec());
        let f = TruncSeries::from_coeffs(gamma[..=m].to_vec());
        let rhs = rhs_series(&a, &f, c2)?;
        let denom = (m * (m - 1)) as f64;
        let d1 = (rhs.a1.coeff(m) + rhs.b1.coeff(m - 1) + rhs.c1.coeff(m - 2)) / denom;
        let d2 = (rhs.a2.coeff(m) + rhs.b2.coeff(m - 1) + rhs.c2.coeff(m - 2)) / denom;

        let l = l_matrix(level);
        let det = l[0][0] * l[1][1] - l[0][1] * l[1][0];
        if det <= L_MATRIX_MIN_DET {
            return Err(SeedError::SingularLevel { level, det });
        }
        alpha[m] = (d1 * l[1][1] - d2 * l[0][1]) / det;
        gamma[m] = (l[0][0] * d2 - l[1][0] * d1) / det;
        level += 1;
    }

    Ok(SeedExpansion {
        a_series: TruncSeries::from_coeffs(alpha),
        f_series: TruncSeries::from_coeffs(gamma),
        q,
        c2,
        order,
    })
}

/// Evaluates the seed at `t`, returning the handoff state
/// `(t, phi = t a, phi' = a + t a', f, f')`.
pub fn eval_seed(seed: &SeedExpansion, t: f64) -> SolitonState {
    let a = seed.a_series.eval_horner(t);
    let da = seed.a_series.differentiate().eval_horner(t);
    let f = seed.f_series.eval_horner(t);
    let df = seed.f_series.differentiate().eval_horner(t);
    SolitonState {
        t,
        phi: t * a,
        dphi: a + t * da,
        f,
        df,
    }
}

/// Residuals of the two profile equations at `t`, evaluated from the series.
///
/// Both vanish to the truncation order of the seed; the second component
/// carries the lower order (the `1/t^2` terms of the `f` equation).
///
/// The singular quotients are evaluated through exact parity shifts —
/// `(1 - phi'^2)` and `f'` vanish to second and first order with exactly
/// zero low coefficients — so no catastrophic cancellation enters and the
/// result is rounding-limited, not evaluation-limited.
pub fn seed_residual(seed: &SeedExpansion, t: f64) -> (f64, f64) {
    let a_series = &seed.a_series;
    let inv_a = a_series.reciprocal().expect("seed has a(0) = 1");
    let da_series = a_series.differentiate();
    let phi_series = a_series.shift_up(1);
    let dphi_series = phi_series.differentiate();
    let ddphi_series = dphi_series.differentiate();
    let df_series = seed.f_series.differentiate();
    let ddf_series = df_series.differentiate();

    // (1 - phi'^2) / t^2, a regular even series.
    let w2 = TruncSeries::constant(1.0, dphi_series.order())
        .sub(&dphi_series.mul(&dphi_series))
        .shift_down(2)
        .expect("1 - phi'^2 has a double zero");

    let a = a_series.eval_horner(t);
    let inv_a_t = inv_a.eval_horner(t);
    let dphi = dphi_series.eval_horner(t);
    let ddphi = ddphi_series.eval_horner(t);
    let f = seed.f_series.eval_horner(t);
    let df = df_series.eval_horner(t);
    let ddf = ddf_series.eval_horner(t);
    let w2_t = w2.eval_horner(t);
    // f'/t, regular since f' is odd.
    let df_over_t = df_series.shift_down(1).expect("f' is odd").eval_horner(t);
    let da_over_a = da_series.mul(&inv_a).eval_horner(t);

    let phi = t * a;
    let e2f = (2.0 * f).exp();

    // (1 - phi'^2)/phi = t * w2 / a, (1 - phi'^2)/phi^2 = w2 / a^2,
    // phi'/phi = 1/t + a'/a.
    let r_phi = ddphi - (t * w2_t * inv_a_t + dphi * df - seed.c2 * phi * e2f);
    let r_f = ddf
        - (2.0 * w2_t * inv_a_t * inv_a_t + 2.0 * (df_over_t + da_over_a * df)
            - seed.c2 * e2f);
    (r_phi, r_f)
}

/// Radial and orbit sectional curvatures as series in `t`:
/// `K_rad = -phi''/phi`, `K_tan = (1 - phi'^2)/phi^2`.
///
/// Both are computed by exact low-order shifts (the numerators vanish to
/// second order by parity), so evaluation near `t = 0` involves no
/// cancellation.
pub fn curvature_series(seed: &SeedExpansion) -> Result<(TruncSeries, TruncSeries), SeriesError> {
    let a = &seed.a_series;
    let inv_a = a.reciprocal()?;
    let phi = a.shift_up(1);
    let dphi = phi.differentiate();
    let ddphi = dphi.differentiate();

    // phi'' is odd: phi''/ (t a) = (phi''/t) / a.
    let k_rad = ddphi.shift_down(1)?.mul(&inv_a).scale(-1.0);

    // 1 - phi'^2 is even with a double zero: (1 - phi'^2)/t^2 / a^2.
    let num = TruncSeries::constant(1.0, dphi.order()).sub(&dphi.mul(&dphi));
    let inv_a_sq = inv_a.mul(&inv_a);
    let k_tan = num.shift_down(2)?.mul(&inv_a_sq);
    Ok((k_rad, k_tan))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    #[test]
    fn l_matrix_level_zero_is_singular() {
        let l = l_matrix(0);
        assert_eq!(l, [[6.0, -1.0], [6.0, -1.0]]);
        assert_eq!(l[0][0] * l[1][1] - l[0][1] * l[1][0], 0.0);
    }

    #[test]
    fn l_matrix_level_one() {
        let l = l_matrix(1);
        assert!((l[0][0] - 2.5).abs() < 1e-15);
        assert!((l[0][1] + 1.0 / 3.0).abs() < 1e-15);
        assert!((l[1][0] - 5.0 / 3.0).abs() < 1e-15);
        assert!((l[1][1] - 1.0 / 3.0).abs() < 1e-15);
        let det = l[0][0] * l[1][1] - l[0][1] * l[1][0];
        assert!((det - 25.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn l_matrix_tends_to_identity() {
        let l = l_matrix(4000);
        assert!((l[0][0] - 1.0).abs() < 2e-3);
        assert!(l[0][1].abs() < 2e-4);
        assert!(l[1][0].abs() < 2e-3);
        assert!((l[1][1] - 1.0).abs() < 2e-3);
    }

    #[test]
    fn l_matrix_determinants_positive() {
        for n in 1..=64 {
            let l = l_matrix(n);
            let det = l[0][0] * l[1][1] - l[0][1] * l[1][0];
            assert!(det > 0.0, "det L_{} = {}", 2 * n, det);
        }
    }

    #[test]
    fn brf_seed_matches_closed_form_coefficients() {
        let params = SolitonParams::from_q(oracle::BRF_Q);
        let seed = compute_seed(&params).unwrap();
        for m in 0..=12 {
            let expect = oracle::brf_a_coeff(m);
            let got = seed.a_series.coeff(2 * m);
            assert!(
                (got - expect).abs() <= 1e-12,
                "a[{}]: got {got:e}, expected {expect:e}",
                2 * m
            );
        }
        for n in 0..=seed.order {
            assert!(
                seed.f_series.coeff(n).abs() <= 1e-12,
                "f[{n}] = {:e}",
                seed.f_series.coeff(n)
            );
        }
    }

    #[test]
    fn seed_series_are_even() {
        for q in [-0.5, -47.0 / 12.0, -4.0, 1.5] {
            let seed = compute_seed(&SolitonParams::from_q(q)).unwrap();
            assert!(seed.a_series.is_even());
            assert!(seed.f_series.is_even());
        }
    }

    #[test]
    fn quadratic_coefficients_carry_the_parameter() {
        let q = -47.0 / 12.0;
        let seed = compute_seed(&SolitonParams::from_q(q)).unwrap();
        assert!((seed.a_series.coeff(2) - q / 6.0).abs() < 1e-15);
        assert!((seed.a_series.coeff(2) + 47.0 / 72.0).abs() < 1e-15);
        assert!((seed.f_series.coeff(2) - (2.0 * q + 1.0) / 2.0).abs() < 1e-15);

        // Bryant mode: f''(0) = 2q.
        let seed = compute_seed(&SolitonParams::from_q(q).with_k(K_BRYANT)).unwrap();
        assert!((seed.f_series.coeff(2) - q).abs() < 1e-15);
    }

    #[test]
    fn fifth_derivative_at_origin_brf() {
        let seed = compute_seed(&SolitonParams::from_q(oracle::BRF_Q)).unwrap();
        // phi = t a, so phi^(5)(0) = 5! * a[4].
        let phi5 = 120.0 * seed.a_series.coeff(4);
        assert!((phi5 - 0.25).abs() < 1e-14, "phi^(5)(0) = {phi5}");
    }

    #[test]
    fn eval_seed_brf_matches_closed_form() {
        let seed = compute_seed(&SolitonParams::from_q(oracle::BRF_Q)).unwrap();
        let t = 1e-3;
        let state = eval_seed(&seed, t);
        let exact = oracle::brf_phi(t);
        assert!((state.phi - exact).abs() <= 1e-15 * exact.abs());
        assert!((state.dphi - oracle::brf_dphi(t)).abs() <= 1e-15);
        assert!(state.f.abs() <= 1e-18);
        assert!(state.df.abs() <= 1e-18);
    }

    #[test]
    fn eval_seed_boundary_limits() {
        for q in [-0.5, -47.0 / 12.0, -4.0] {
            let seed = compute_seed(&SolitonParams::from_q(q)).unwrap();
            let state = eval_seed(&seed, 1e-8);
            assert!((state.dphi - 1.0).abs() < 1e-14);
            assert!(state.f.abs() < 1e-14);
            assert!(state.df.abs() < 1e-7);
        }
    }

    #[test]
    fn eval_seed_leading_f_term() {
        let q = -47.0 / 12.0;
        let seed = compute_seed(&SolitonParams::from_q(q)).unwrap();
        let t = 1e-3;
        let state = eval_seed(&seed, t);
        let leading = 0.5 * (2.0 * q + 1.0) * t * t;
        assert!((state.f / leading - 1.0).abs() < 1e-5);
    }

    #[test]
    fn brf_residual_vanishes() {
        let seed = compute_seed(&SolitonParams::from_q(oracle::BRF_Q)).unwrap();
        let (r_phi, r_f) = seed_residual(&seed, 1e-3);
        assert!(r_phi.abs() <= 1e-12, "r_phi = {r_phi:e}");
        assert!(r_f.abs() <= 1e-12, "r_f = {r_f:e}");
    }

    #[test]
    fn residual_at_handoff_regression() {
        let seed = compute_seed(&SolitonParams::from_q(-47.0 / 12.0)).unwrap();
        let (r_phi, r_f) = seed_residual(&seed, 1e-3);
        // Spec bound 1e-10; observed values are rounding-limited (~1e-13).
        assert!(r_phi.abs() <= 1e-10, "r_phi = {r_phi:e}");
        assert!(r_f.abs() <= 1e-10, "r_f = {r_f:e}");
    }

    #[test]
    fn residual_order_of_accuracy() {
        // With an odd truncation degree N the last stored even degree is N-1
        // and the first missing one is N+1; the f-equation residual then
        // scales as t^(N-1) through its 1/t^2 terms.
        let order = 9;
        for q in [-47.0 / 12.0, -4.0] {
            let seed =
                compute_seed(&SolitonParams::from_q(q).with_order(order)).unwrap();
            let t1 = 0.4;
            let t2 = 0.04;
            let (_, r1) = seed_residual(&seed, t1);
            let (_, r2) = seed_residual(&seed, t2);
            let exponent = (r1.abs() / r2.abs()).log10();
            let expected = (order - 1) as f64;
            assert!(
                (exponent - expected).abs() <= 0.5,
                "q = {q}: measured exponent {exponent}, expected {expected}"
            );
        }
    }

    #[test]
    fn param_validation() {
        let mut p = SolitonParams::from_q(-4.0);
        p.k = 1.0;
        assert!(matches!(p.validate(), Err(ParamError::InvalidTorsion(_))));

        let mut p = SolitonParams::from_q(-4.0);
        p.eps_handoff = 0.5;
        assert!(matches!(p.validate(), Err(ParamError::InvalidHandoff(_))));

        let p = SolitonParams::from_q(-4.0).with_t_max(1e-4);
        assert!(matches!(p.validate(), Err(ParamError::InvalidSpan { .. })));

        let p = SolitonParams::from_ell(0.0);
        assert!((p.q + 47.0 / 12.0).abs() < 1e-14);
        assert!(p.in_theorem_regime());
        assert!(p.validate().is_ok());
        assert!((ell_of_q(p.q).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn curvature_series_constant_for_brf() {
        let seed = compute_seed(&SolitonParams::from_q(oracle::BRF_Q)).unwrap();
        let (k_rad, k_tan) = curvature_series(&seed).unwrap();
        // Constant curvature 1/2 at every evaluation point.
        for t in [1e-3, 0.1, 0.5] {
            assert!((k_rad.eval_horner(t) - 0.5).abs() < 1e-12);
            assert!((k_tan.eval_horner(t) - 0.5).abs() < 1e-12);
        }
    }
}
