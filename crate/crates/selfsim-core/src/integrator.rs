//! Adaptive explicit Runge-Kutta stepping for two-component systems.
//!
//! A Dormand-Prince 5(4) embedded pair drives every integration in this
//! crate. The right-hand sides involved are non-stiff away from machine
//! scale (the radial drift term only forces step sizes down to `O(1/r)`),
//! so an explicit pair with a conventional error controller is adequate
//! and keeps the stepping fully deterministic.

use thiserror::Error;

/// Two-component state vector.
pub type State2 = [f64; 2];

/// Step-size controller bounds and tolerances.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

/// The controller could not advance: the accepted step size collapsed
/// to the rounding floor at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("step size underflow at t = {t} (h = {h})")]
pub struct StepSizeUnderflow {
    pub t: f64,
    pub h: f64,
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus fourth-order weights (error estimator), using the
// embedded fourth-order weights b* = (5179/57600, 0, 7571/16695, 393/640,
// -92097/339200, 187/2100, 1/40).
const E1: f64 = B1 - 5179.0 / 57600.0;
const E3: f64 = B3 - 7571.0 / 16695.0;
const E4: f64 = B4 - 393.0 / 640.0;
const E5: f64 = B5 + 92097.0 / 339200.0;
const E6: f64 = B6 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

/// One trial step of size `h` from `(t, y)`. Returns the fifth-order
/// solution and the componentwise difference against the embedded
/// fourth-order solution.
pub fn dp45_step<F>(f: &F, t: f64, y: State2, h: f64) -> (State2, State2)
where
    F: Fn(f64, State2) -> State2,
{
    let k1 = f(t, y);
    let k2 = f(
        t + C2 * h,
        [y[0] + h * A21 * k1[0], y[1] + h * A21 * k1[1]],
    );
    let k3 = f(
        t + C3 * h,
        [
            y[0] + h * (A31 * k1[0] + A32 * k2[0]),
            y[1] + h * (A31 * k1[1] + A32 * k2[1]),
        ],
    );
    let k4 = f(
        t + C4 * h,
        [
            y[0] + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
            y[1] + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]),
        ],
    );
    let k5 = f(
        t + C5 * h,
        [
            y[0] + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
            y[1] + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]),
        ],
    );
    let k6 = f(
        t + h,
        [
            y[0] + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
            y[1] + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]),
        ],
    );
    let y5 = [
        y[0] + h * (B1 * k1[0] + B3 * k3[0] + B4 * k4[0] + B5 * k5[0] + B6 * k6[0]),
        y[1] + h * (B1 * k1[1] + B3 * k3[1] + B4 * k4[1] + B5 * k5[1] + B6 * k6[1]),
    ];
    let k7 = f(t + h, y5);
    let err = [
        h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] + E7 * k7[0]),
        h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] + E7 * k7[1]),
    ];
    (y5, err)
}

/// Scaled max-norm of the embedded error estimate. An accepted step has
/// norm `<= 1`.
pub fn error_norm(tol: Tolerances, y0: State2, y1: State2, err: State2) -> f64 {
    let mut norm: f64 = 0.0;
    for i in 0..2 {
        let scale = tol.abs + tol.rel * y0[i].abs().max(y1[i].abs());
        norm = norm.max((err[i] / scale).abs());
    }
    norm
}

/// Step-size update factor for an error norm, clamped to `[0.2, 5.0]`
/// (growth additionally capped at `1.0` right after a rejection).
pub fn step_factor(err_norm: f64, just_rejected: bool) -> f64 {
    let raw = if err_norm == 0.0 {
        5.0
    } else {
        0.9 * err_norm.powf(-0.2)
    };
    let hi = if just_rejected { 1.0 } else { 5.0 };
    raw.clamp(0.2, hi)
}

/// Smallest meaningful step at `t`: a few units in the last place, with
/// an absolute floor for `t` near zero.
pub fn min_step(t: f64) -> f64 {
    (f64::EPSILON * t.abs()).max(1e-300) * 8.0
}

/// Advance from `(t0, y0)` exactly to `t1 > t0` without recording
/// intermediate states. Used by event refinement, which repeatedly
/// re-integrates short spans.
pub fn integrate_to<F>(
    f: &F,
    t0: f64,
    y0: State2,
    t1: f64,
    tol: Tolerances,
    h_init: f64,
) -> Result<State2, StepSizeUnderflow>
where
    F: Fn(f64, State2) -> State2,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = h_init.max(min_step(t0)).min(t1 - t0);
    let mut rejected = false;
    while t < t1 {
        if h < min_step(t) {
            return Err(StepSizeUnderflow { t, h });
        }
        let clipped = h.min(t1 - t);
        let (y_new, err) = dp45_step(f, t, y, clipped);
        let norm = error_norm(tol, y, y_new, err);
        if norm <= 1.0 {
            t += clipped;
            y = y_new;
            h = clipped * step_factor(norm, rejected);
            rejected = false;
        } else {
            h = clipped * step_factor(norm, true);
            rejected = true;
        }
    }
    Ok(y)
}
