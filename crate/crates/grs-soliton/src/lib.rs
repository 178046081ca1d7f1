//! Numerical construction and certification of the one-parameter family of
//! rotationally invariant, complete, steady generalized Ricci solitons on
//! R^3.
//!
//! The metric ansatz `g = dt^2 + phi(t)^2 dsigma^2` with torsion 3-form
//! `H = k phi^2 e^f / t^2 vol` and potential `f(t)` reduces the soliton
//! equations to a second-order system for `(phi, f)` that is singular at the
//! origin. The pipeline:
//!
//! * [`series`] / [`seed`] — solve the singular origin by a formal even
//!   power series in the `a = phi/t` variables, parametrized by
//!   `q = phi'''(0)`;
//! * [`integrator`] — hand off at `t = eps` to an adaptive embedded
//!   Runge-Kutta pair and integrate the profile outward;
//! * [`geometry`] — curvatures, torsion norms and soliton-equation residuals
//!   along the run;
//! * [`invariants`] — conservation-law drift monitors, the qualitative
//!   property suite and the long-time asymptotics fits;
//! * [`phase`] — an independent first-order `(x, y, z)` integration in the
//!   arclength-of-log parameter `r`, cross-validated against the profile;
//! * [`cli`] — the `solve` / `verify` / `family` commands, CSV trajectories
//!   and JSON reports.

pub mod geometry;
pub mod integrator;
pub mod invariants;
pub mod oracle;
pub mod phase;
pub mod rk;
pub mod seed;
pub mod series;
