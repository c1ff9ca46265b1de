//! Logarithmic phase-plane form of the profile equation.
//!
//! With `tau = ln r` and a decay rate `d`, the substitution
//!
//! ```text
//! y(tau) = r^d w(r),        Y(tau) = -r^{(d+1)(p-1)} z(r),
//! ```
//!
//! where `z = |w'|^{p-2} w'` is the flux variable, turns the profile
//! equation into the planar system
//!
//! ```text
//! y'  = d y - G(Y),
//! Y'  = (p-1)(d - eta) Y + e^{m tau} (alpha y - G(Y))
//!       + e^{(m - d(q-1)) tau} |y|^{q-1} y,        m = (p-2) d + p,
//! G(Y) = sign(Y) |Y|^{1/(p-1)}.
//! ```
//!
//! At the natural rate `d = delta = p/(2-p)` (for `p < 2`) the exponent
//! `m` vanishes, the gradient part becomes autonomous, and the only
//! remaining `tau`-dependence is the absorption source
//! `e^{-delta(q-1) tau} |y|^{q-1} y`, which dies out as `tau` grows.
//! Dropping it leaves the autonomous limit system whose stationary
//! points and invariant regions organise the possible tails of `w`.

use serde::Serialize;

use crate::exponents::{position, Params, Position, RegimeError};
use crate::profile::ProfileState;
use crate::signed_pow;

/// A point of the phase plane at log-radius `tau`, carrying the rate `d`
/// used by the substitution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub tau: f64,
    pub y: f64,
    /// Rescaled negative flux `Y = -r^{(d+1)(p-1)} z`.
    #[serde(rename = "Y")]
    pub yy: f64,
    pub d: f64,
}

/// Map a radial state to the phase plane at rate `d`. Requires `r > 0`.
pub fn to_phase_d(state: &ProfileState, params: &Params, d: f64) -> PhaseState {
    debug_assert!(state.r > 0.0, "phase substitution needs r > 0");
    let tau = state.r.ln();
    PhaseState {
        tau,
        y: state.r.powf(d) * state.w,
        yy: -state.r.powf((d + 1.0) * (params.p - 1.0)) * state.z,
        d,
    }
}

impl PhaseState {
    /// Invert the substitution back to radial variables.
    pub fn to_profile(&self, params: &Params) -> ProfileState {
        let r = self.tau.exp();
        ProfileState {
            r,
            w: r.powf(-self.d) * self.y,
            z: -r.powf(-(self.d + 1.0) * (params.p - 1.0)) * self.yy,
        }
    }
}

/// Right-hand side of the phase system at general rate `d`, source terms
/// included.
pub fn nonautonomous_rhs(state: &PhaseState, params: &Params) -> [f64; 2] {
    let d = state.d;
    let g = signed_pow(state.yy, 1.0 / (params.p - 1.0));
    let m = (params.p - 2.0) * d + params.p;
    let dy = d * state.y - g;
    let dyy = (params.p - 1.0) * (d - params.eta()) * state.yy
        + (m * state.tau).exp() * (params.alpha * state.y - g)
        + ((m - d * (params.q - 1.0)) * state.tau).exp() * signed_pow(state.y, params.q);
    [dy, dyy]
}

/// Right-hand side of the autonomous limit system at `d = delta`
/// (absorption source dropped). Requires `p < 2`.
pub fn autonomous_rhs(y: f64, yy: f64, params: &Params) -> Result<[f64; 2], RegimeError> {
    let delta = require_finite_delta(params)?;
    let g = signed_pow(yy, 1.0 / (params.p - 1.0));
    Ok([
        delta * y - g,
        (delta - params.n) * yy + params.alpha * y - g,
    ])
}

fn require_finite_delta(params: &Params) -> Result<f64, RegimeError> {
    if position(params.p, 2.0) == Position::Below {
        Ok(params.delta())
    } else {
        Err(RegimeError::EllUndefined)
    }
}

/// Stationary points of the autonomous system: the origin always, and the
/// symmetric pair `(+-ell, +-(delta ell)^{p-1})` exactly when `p < 2` and
/// `(delta - N)(delta - alpha) > 0`.
#[derive(Debug, Clone, Serialize)]
pub struct StationarySet {
    /// `[y, Y]` coordinates: `[0, 0]` first, then the positive and the
    /// negative nontrivial point when they exist.
    pub points: Vec<[f64; 2]>,
}

/// Compute the stationary set. The `p < 2` guard is explicit: at `p = 2`
/// the sentinel `delta = +inf` would otherwise make the sign product
/// `delta (delta - N)(delta - alpha)` evaluate as `+inf` and fabricate
/// nontrivial points.
pub fn stationary_points(params: &Params) -> StationarySet {
    let mut points = vec![[0.0, 0.0]];
    if position(params.p, 2.0) == Position::Below {
        if let Ok(ell) = crate::exponents::ell_constant(params) {
            let yy = (params.delta() * ell).powf(params.p - 1.0);
            points.push([ell, yy]);
            points.push([-ell, -yy]);
        }
    }
    StationarySet { points }
}

/// Curvature quotient
/// `H(y, Y) = (delta y - G(Y)) / (|delta y|^{p-2} delta y - Y)`,
/// extended by continuity to `|delta y|^{2-p} / (p-1)` on the diagonal
/// `Y = |delta y|^{p-2} delta y`. Requires `p < 2`. `H >= 0` everywhere,
/// and `H >= (|delta y|^{2-p} + |Y|^{(2-p)/(p-1)}) / 2`.
pub fn h_function(y: f64, yy: f64, params: &Params) -> Result<f64, RegimeError> {
    let delta = require_finite_delta(params)?;
    let u = delta * y;
    let t = signed_pow(u, params.p - 1.0);
    let h = if (t - yy).abs() <= 1e-12 * (u.abs().powf(params.p - 1.0) + yy.abs()) {
        u.abs().powf(2.0 - params.p) / (params.p - 1.0)
    } else {
        (u - signed_pow(yy, 1.0 / (params.p - 1.0))) / (t - yy)
    };
    debug_assert!(
        h >= 0.5 * (u.abs().powf(2.0 - params.p) + yy.abs().powf((2.0 - params.p) / (params.p - 1.0)))
            - 1e-9 * (1.0 + h.abs()),
        "curvature quotient fell below its lower bound at y={y}, Y={yy}"
    );
    Ok(h)
}

/// Membership in the contraction region `S = { H < 2 delta - N }`.
pub fn in_s(y: f64, yy: f64, params: &Params) -> Result<bool, RegimeError> {
    let delta = require_finite_delta(params)?;
    Ok(h_function(y, yy, params)? < 2.0 * delta - params.n)
}
