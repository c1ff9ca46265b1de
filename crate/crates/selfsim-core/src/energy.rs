//! Energy and moment diagnostics along radial and phase trajectories.
//!
//! Radial diagnostics:
//!
//! - the natural energy
//!   `E = |z|^{p'}/p' + alpha w^2/2 + |w|^{q+1}/(q+1)`, nonincreasing in
//!   `r` with `E' = -(N-1)/r |w'|^p - r (w')^2`;
//! - the flux moments `J_N = r^N w + r^{N-1} z` and
//!   `J_alpha = r^{alpha - N} J_N`, whose derivatives close in `(w, z)`
//!   and make `J_alpha` converge to the slow-decay amplitude `L`;
//! - a three-parameter family of weighted functionals
//!   `V_{lambda, sigma, e}` whose derivative splits into five signed
//!   terms; specific `(lambda, sigma, e)` choices make every term
//!   nonpositive and yield positivity proofs, so the five terms are
//!   exposed individually.
//!
//! Phase diagnostics (for `p < 2`, at rate `d = delta`):
//!
//! - a Lyapunov pair: the autonomous part `Wcal(y, Y)` and the full
//!   `W = Wcal + e^{-delta(q-1) tau} |y|^{q+1}/(q+1)`, with
//!   `W' = U - delta (q-1)/(q+1) e^{-delta(q-1) tau} |y|^{q+1}` where the
//!   sign of `U` is controlled by the contraction region of
//!   [`crate::phase::h_function`];
//! - the compensated functional `Psi(tau) = W(tau) - (tail integral)`,
//!   monotone whenever `U <= 0` along the run.

use serde::Serialize;
use thiserror::Error;

use crate::exponents::{position, Params, Position};
use crate::phase::{in_s, to_phase_d, PhaseState};
use crate::profile::{PhaseTrajectory, ProfileState};
use crate::signed_pow;

/// One diagnostic row. Phase-plane entries (`wcal`, `w_lyap`, `u`,
/// `in_s`) are `NaN`/`false` when `p >= 2`, and `psi` is `NaN` unless
/// filled by [`psi_function`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergySample {
    pub r: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "J_N")]
    pub j_n: f64,
    #[serde(rename = "J_alpha")]
    pub j_alpha: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "Wcal")]
    pub wcal: f64,
    #[serde(rename = "W")]
    pub w_lyap: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub in_s: bool,
    #[serde(rename = "Psi")]
    pub psi: f64,
}

/// Errors of the phase-plane diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("Lyapunov diagnostics require p < 2 (got p = {p})")]
    RequiresFastDiffusion { p: f64 },
    #[error("Lyapunov diagnostics require the phase rate d = delta = {expected} (got {got})")]
    WrongRate { got: f64, expected: f64 },
    #[error(
        "horizon too short: tail bound {bound:.3e} exceeds requested accuracy {accuracy:.3e}"
    )]
    InsufficientHorizon { bound: f64, accuracy: f64 },
    #[error("trajectory has no samples")]
    Empty,
}

/// Energy `E(r) = |z|^{p'}/p' + alpha w^2/2 + |w|^{q+1}/(q+1)`.
pub fn energy_e(state: &ProfileState, params: &Params) -> f64 {
    let pp = params.p_prime();
    state.z.abs().powf(pp) / pp
        + params.alpha * state.w * state.w / 2.0
        + state.w.abs().powf(params.q + 1.0) / (params.q + 1.0)
}

/// Energy at the origin, `E(0) = alpha a^2/2 + |a|^{q+1}/(q+1)`.
pub fn energy_e0(a: f64, params: &Params) -> f64 {
    params.alpha * a * a / 2.0 + a.abs().powf(params.q + 1.0) / (params.q + 1.0)
}

/// Exact derivative `dE/dr = -(N-1)/r |w'|^p - r (w')^2` (note
/// `|w'|^p = |z|^{p'}`).
pub fn de_dr(state: &ProfileState, params: &Params) -> f64 {
    let wp = state.wprime(params);
    -(params.n - 1.0) / state.r * state.z.abs().powf(params.p_prime()) - state.r * wp * wp
}

/// Flux moments and their exact derivatives.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FluxMoments {
    pub j_n: f64,
    pub j_alpha: f64,
    pub dj_n: f64,
    pub dj_alpha: f64,
}

/// `J_N = r^N w + r^{N-1} z` and `J_alpha = r^{alpha-N} J_N`, with
/// `J_N' = r^{N-1} (N - alpha - |w|^{q-1}) w` and
/// `J_alpha' = r^{alpha-1} ((alpha - N) z / r - |w|^{q-1} w)`.
pub fn flux_moments(state: &ProfileState, params: &Params) -> FluxMoments {
    let (r, w, z) = (state.r, state.w, state.z);
    let n = params.n;
    let wq1 = w.abs().powf(params.q - 1.0);
    FluxMoments {
        j_n: r.powf(n) * w + r.powf(n - 1.0) * z,
        j_alpha: r.powf(params.alpha) * w + r.powf(params.alpha - 1.0) * z,
        dj_n: r.powf(n - 1.0) * (n - params.alpha - wq1) * w,
        dj_alpha: r.powf(params.alpha - 1.0) * ((params.alpha - n) * z / r - wq1 * w),
    }
}

/// A weighted functional value together with its derivative and the five
/// signed terms composing it (`dv = r^{lambda-1} * (sum of terms)`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeightedSample {
    pub v: f64,
    pub dv: f64,
    pub terms: [f64; 5],
}

/// The functional
/// `V = r^lambda (|w'|^p/p' + |w|^{q+1}/(q+1) + e w^2/2 + sigma w z / r)`
/// and its derivative, split as `r^{1-lambda} V' =`
///
/// ```text
///   - (N - 1 - sigma - lambda/p') |w'|^p                 [term 1]
///   - (sigma - lambda/(q+1)) |w|^{q+1}                   [term 2]
///   + sigma (lambda - N) w z / r                         [term 3]
///   - (r w' + (sigma - e + alpha) w / 2)^2               [term 4]
///   - (sigma alpha - e lambda/2 - (sigma+alpha-e)^2/4) w^2. [term 5]
/// ```
///
/// `(lambda, sigma, e) = (0, 0, alpha)` reproduces the energy `E`.
pub fn pps_v(
    state: &ProfileState,
    params: &Params,
    lambda: f64,
    sigma: f64,
    e: f64,
) -> WeightedSample {
    let (r, w, z) = (state.r, state.w, state.z);
    let pp = params.p_prime();
    let wp = state.wprime(params);
    let wp_p = z.abs().powf(pp); // |w'|^p
    let wq1 = w.abs().powf(params.q + 1.0);
    let v = r.powf(lambda) * (wp_p / pp + wq1 / (params.q + 1.0) + e * w * w / 2.0 + sigma * w * z / r);
    let terms = [
        -(params.n - 1.0 - sigma - lambda / pp) * wp_p,
        -(sigma - lambda / (params.q + 1.0)) * wq1,
        sigma * (lambda - params.n) * w * z / r,
        -(r * wp + (sigma - e + params.alpha) * w / 2.0).powi(2),
        -(sigma * params.alpha - e * lambda / 2.0 - (sigma + params.alpha - e).powi(2) / 4.0)
            * w
            * w,
    ];
    WeightedSample {
        v,
        dv: r.powf(lambda - 1.0) * terms.iter().sum::<f64>(),
        terms,
    }
}

/// Lyapunov values at a phase point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LyapunovSample {
    /// Autonomous part `Wcal`.
    pub wcal: f64,
    /// Full functional `W = Wcal + e^{-delta(q-1) tau} |y|^{q+1}/(q+1)`.
    pub w: f64,
    /// Derivative contribution
    /// `U = (2 delta - N - H) (delta y - G(Y)) (|delta y|^{p-2} delta y - Y)`,
    /// evaluated in the product form that stays finite on the diagonal.
    pub u: f64,
}

fn check_phase_rate(state: &PhaseState, params: &Params) -> Result<f64, EnergyError> {
    if position(params.p, 2.0) != Position::Below {
        return Err(EnergyError::RequiresFastDiffusion { p: params.p });
    }
    let delta = params.delta();
    if (state.d - delta).abs() > 1e-9 * delta.max(1.0) {
        return Err(EnergyError::WrongRate {
            got: state.d,
            expected: delta,
        });
    }
    Ok(delta)
}

/// Lyapunov functional
/// `Wcal = (2 delta - N) delta^{p-1} |y|^p / p + |Y|^{p'}/p' - delta y Y
///  + (alpha - delta) y^2 / 2` and companions at a phase point.
pub fn lyapunov_w(state: &PhaseState, params: &Params) -> Result<LyapunovSample, EnergyError> {
    let delta = check_phase_rate(state, params)?;
    let (y, yy) = (state.y, state.yy);
    let pp = params.p_prime();
    let wcal = (2.0 * delta - params.n) * delta.powf(params.p - 1.0) * y.abs().powf(params.p)
        / params.p
        + yy.abs().powf(pp) / pp
        - delta * y * yy
        + (params.alpha - delta) * y * y / 2.0;
    let source = (-delta * (params.q - 1.0) * state.tau).exp() * y.abs().powf(params.q + 1.0)
        / (params.q + 1.0);
    // U = (2 delta - N) (dy)(dt) - (dy)^2 with dy = delta y - G(Y) and
    // dt = |delta y|^{p-2} delta y - Y; equivalent to the quotient form
    // with H substituted, but finite on the diagonal dt = 0.
    let dy = delta * y - signed_pow(yy, 1.0 / (params.p - 1.0));
    let dt = signed_pow(delta * y, params.p - 1.0) - yy;
    let u = (2.0 * delta - params.n) * dy * dt - dy * dy;
    Ok(LyapunovSample {
        wcal,
        w: wcal + source,
        u,
    })
}

/// The compensated functional `Psi` along a phase trajectory, with its
/// tail bound.
#[derive(Debug, Clone, Serialize)]
pub struct PsiSeries {
    /// `(tau, Psi(tau))` at every sample.
    pub points: Vec<(f64, f64)>,
    /// Bound on the neglected integral beyond the horizon.
    pub tail_bound: f64,
}

/// Compute `Psi(tau) = W(tau) - delta(q-1)/(q+1) *
/// int_tau^inf e^{-delta(q-1) s} |y(s)|^{q+1} ds` along the trajectory,
/// replacing the integral beyond the horizon by zero. The neglected tail
/// is bounded by `sup |y|^{q+1} e^{-delta(q-1) tau_end} / (q+1)` (the
/// supremum estimated over the last quarter of the run); if that bound
/// exceeds `accuracy` the horizon is insufficient.
pub fn psi_function(
    traj: &PhaseTrajectory,
    params: &Params,
    accuracy: f64,
) -> Result<PsiSeries, EnergyError> {
    let n = traj.samples.len();
    if n == 0 {
        return Err(EnergyError::Empty);
    }
    let first = &traj.samples[0];
    let delta = check_phase_rate(first, params)?;
    let kappa = delta * (params.q - 1.0);
    let tau_end = traj.samples[n - 1].tau;

    let sup_tail = traj.samples[(3 * n / 4).min(n - 1)..]
        .iter()
        .map(|s| s.y.abs())
        .fold(0.0_f64, f64::max);
    let tail_bound = sup_tail.powf(params.q + 1.0) * (-kappa * tau_end).exp() / (params.q + 1.0);
    if tail_bound > accuracy {
        return Err(EnergyError::InsufficientHorizon {
            bound: tail_bound,
            accuracy,
        });
    }

    // suffix trapezoid of f(s) = e^{-kappa s} |y|^{q+1}
    let f: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| (-kappa * s.tau).exp() * s.y.abs().powf(params.q + 1.0))
        .collect();
    let mut suffix = vec![0.0; n];
    for i in (0..n - 1).rev() {
        let dt = traj.samples[i + 1].tau - traj.samples[i].tau;
        suffix[i] = suffix[i + 1] + 0.5 * (f[i] + f[i + 1]) * dt;
    }

    let mut points = Vec::with_capacity(n);
    for (i, s) in traj.samples.iter().enumerate() {
        let w = lyapunov_w(s, params)?.w;
        points.push((s.tau, w - kappa / (params.q + 1.0) * suffix[i]));
    }
    Ok(PsiSeries { points, tail_bound })
}

/// Assemble a full diagnostic row at a radial state. `weights` selects
/// the `(lambda, sigma, e)` of the reported `V` column; phase-plane
/// entries are filled only for `p < 2`.
pub fn diagnostic_sample(
    state: &ProfileState,
    params: &Params,
    weights: (f64, f64, f64),
) -> EnergySample {
    let fm = flux_moments(state, params);
    let ws = pps_v(state, params, weights.0, weights.1, weights.2);
    let (wcal, w_lyap, u, s_flag) = if position(params.p, 2.0) == Position::Below {
        let ph = to_phase_d(state, params, params.delta());
        let l = lyapunov_w(&ph, params).expect("p < 2 checked");
        let flag = in_s(ph.y, ph.yy, params).expect("p < 2 checked");
        (l.wcal, l.w, l.u, flag)
    } else {
        (f64::NAN, f64::NAN, f64::NAN, false)
    };
    EnergySample {
        r: state.r,
        e: energy_e(state, params),
        j_n: fm.j_n,
        j_alpha: fm.j_alpha,
        v: ws.v,
        wcal,
        w_lyap,
        u,
        in_s: s_flag,
        psi: f64::NAN,
    }
}
