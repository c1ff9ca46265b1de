//! Tail classification of profiles.
//!
//! Given a solved trajectory, the classifier answers: does `r^alpha w`
//! converge to a nonzero amplitude `L` (slow decay), and if not, which
//! of the faster tails is present? The taxonomy for `p < 2` is read off
//! the scaled variable `y = r^delta w` in the logarithmic window at the
//! end of the run:
//!
//! - `|y| -> ell > 0` (`fast_delta`),
//! - `|w| r^eta -> c > 0` (`fast_eta`),
//! - `|y| (ln r)^{(N+1)/2} -> varrho` at the borderline `p = p1`
//!   (`fast_log_p1`),
//! - `|y| (ln r)^{-1/(2-p)} -> eta_bar` at the borderline
//!   `alpha = delta` (`fast_log_delta_eq_alpha`),
//! - persistent sign changes with stabilising log-period
//!   (`oscillatory`),
//! - for `p > 2`, exact landing on `w = 0` (`fast_compact_support`).
//!
//! Anything that fits none of these within its residual gate stays
//! `undetermined` — in particular every fast tail at exactly `p = 2`,
//! whose Gaussian-type decay has no algebraic scaling and is out of
//! scope here.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::exponents::{
    expansion_constants, position, ExpansionBranch, Params, Position, RegimeError, Section,
};
use crate::profile::{
    solve_profile, FullSolution, IntegratorControls, ProfileError, Termination, Trajectory,
};

/// Decay class of a profile tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    SlowDecay,
    FastCompactSupport,
    FastDelta,
    FastEta,
    FastLogP1,
    FastLogDeltaEqAlpha,
    Oscillatory,
    Undetermined,
}

impl fmt::Display for DecayClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DecayClass::SlowDecay => "slow_decay",
            DecayClass::FastCompactSupport => "fast_compact_support",
            DecayClass::FastDelta => "fast_delta",
            DecayClass::FastEta => "fast_eta",
            DecayClass::FastLogP1 => "fast_log_p1",
            DecayClass::FastLogDeltaEqAlpha => "fast_log_delta_eq_alpha",
            DecayClass::Oscillatory => "oscillatory",
            DecayClass::Undetermined => "undetermined",
        };
        f.write_str(s)
    }
}

/// A fitted tail constant over a trailing log-window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Fit {
    /// Fitted limit constant.
    pub constant: f64,
    /// Relative drift `max |v - mean| / |mean|` of the scaled quantity
    /// over the window; small residual means the candidate matches.
    pub residual: f64,
    /// `[tau_lo, tau_hi]` of the window.
    pub window: [f64; 2],
}

/// Classification result for one initial value.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub a: f64,
    /// Slow-decay amplitude estimate (sign included); `None` outside the
    /// slow-decay section or when the horizon is too short to estimate.
    #[serde(rename = "L")]
    pub l: Option<f64>,
    /// Rigorous-style error bound on `L` from the flux-moment tail.
    #[serde(rename = "L_err")]
    pub l_err: Option<f64>,
    pub class: DecayClass,
    pub n_zeros: usize,
    /// The zero count may be an undercount: the run ended less than two
    /// last inter-zero gaps after the final zero.
    pub censored: bool,
    /// `fast_delta` only: `r^delta w` stays in a band around `ell`
    /// without settling (bounded, no limit).
    pub no_limit: bool,
    pub fits: BTreeMap<String, Fit>,
    pub termination: Termination,
}

/// Classifier errors (solver preconditions, wrong section, or horizons
/// too short to say anything).
#[derive(Debug, Clone, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("L estimation applies only in the slow-decay section")]
    WrongSection,
    #[error("horizon too short: {0}")]
    Horizon(String),
    #[error("expansion check needs a positive amplitude: {0}")]
    Amplitude(#[from] RegimeError),
    #[error("trajectory has no samples")]
    Empty,
}

const LN10: f64 = std::f64::consts::LN_10;
/// Residual gate for accepting a tail fit.
const FIT_GATE: f64 = 0.10;
/// Dominance factor required between best and second-best candidate.
const DOMINANCE: f64 = 2.0;
/// Settling gate for certifying a slow-decay amplitude: the window fit
/// of `r^alpha w` over the last decade must drift by less than this
/// fraction of its mean. A genuine settled amplitude drifts at the size
/// of its first correction term (typically below 1e-2); a fast tail
/// passing through small values drifts by several times its mean.
const SLOW_SETTLE_GATE: f64 = 0.5;

/// Estimate the slow-decay amplitude `L = lim r^alpha w` from the flux
/// moment `J_alpha`, with an error bound from power-law fits of the two
/// pieces of `|J_alpha'|` over the last decade. Falls back to the spread
/// of `r^alpha w` itself when the power-law fits are unusable.
pub fn estimate_l(traj: &Trajectory, params: &Params) -> Result<(f64, f64), ClassifyError> {
    if params.section() != Section::S3 {
        return Err(ClassifyError::WrongSection);
    }
    let last = traj.samples.last().ok_or(ClassifyError::Empty)?;
    let r_end = last.r;
    if r_end < 10.0 {
        return Err(ClassifyError::Horizon(format!(
            "r_end = {r_end} < 10, too short to estimate a tail amplitude"
        )));
    }
    let tail: Vec<_> = traj
        .samples
        .iter()
        .filter(|s| s.r >= r_end / 10.0)
        .collect();
    if tail.len() < 5 {
        return Err(ClassifyError::Horizon(
            "fewer than 5 samples in the last decade".into(),
        ));
    }

    let mut l = r_end.powf(params.alpha) * last.w + r_end.powf(params.alpha - 1.0) * last.z;

    // |J_alpha'| <= |alpha - N| r^{alpha-2} |z| + r^{alpha-1} |w|^q
    let piece1: Vec<(f64, f64)> = tail
        .iter()
        .map(|s| {
            (
                s.r,
                (params.alpha - params.n).abs() * s.r.powf(params.alpha - 2.0) * s.z.abs(),
            )
        })
        .collect();
    let piece2: Vec<(f64, f64)> = tail
        .iter()
        .map(|s| (s.r, s.r.powf(params.alpha - 1.0) * s.w.abs().powf(params.q)))
        .collect();

    let err = match (power_law_tail(&piece1, r_end), power_law_tail(&piece2, r_end)) {
        (Some(t1), Some(t2)) => {
            // refine L by the signed remainder when its sign is constant
            let signed: Vec<(f64, f64)> = tail
                .iter()
                .map(|s| {
                    let dj = s.r.powf(params.alpha - 1.0)
                        * ((params.alpha - params.n) * s.z / s.r
                            - s.w.abs().powf(params.q - 1.0) * s.w);
                    (s.r, dj)
                })
                .collect();
            let all_pos = signed.iter().all(|&(_, v)| v > 0.0);
            let all_neg = signed.iter().all(|&(_, v)| v < 0.0);
            if all_pos || all_neg {
                let magnitudes: Vec<(f64, f64)> =
                    signed.iter().map(|&(r, v)| (r, v.abs())).collect();
                if let Some(t) = power_law_tail(&magnitudes, r_end) {
                    l += if all_pos { t } else { -t };
                }
            }
            t1 + t2
        }
        _ => {
            // fallback: direct spread of r^alpha w over the window
            let vals: Vec<f64> = tail.iter().map(|s| s.r.powf(params.alpha) * s.w).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let spread = vals.iter().fold(0.0_f64, |m, v| m.max((v - mean).abs()));
            l = mean;
            spread + (vals.last().unwrap() - mean).abs()
        }
    };
    Ok((l, err))
}

/// Least-squares power law `v ~ C r^{-m}` through positive points; when
/// `m > 1.05` returns the tail integral `C r_end^{1-m} / (m - 1)`.
fn power_law_tail(points: &[(f64, f64)], r_end: f64) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, v)| v > 1e-300)
        .map(|&(r, v)| (r.ln(), v.ln()))
        .collect();
    if logs.len() < points.len() / 2 || logs.len() < 5 {
        // more than half the window underflowed: the piece is negligible
        return if logs.len() < 5 { Some(0.0) } else { None };
    }
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let m = -slope;
    if m <= 1.05 {
        return None;
    }
    let c = intercept.exp();
    Some(c * r_end.powf(1.0 - m) / (m - 1.0))
}

/// Zero count with a censoring flag: the count is flagged when the run
/// ended less than two last inter-zero log-gaps past the final zero (more
/// crossings may lie just beyond the horizon).
pub fn count_zeros(traj: &Trajectory) -> (usize, bool) {
    let n = traj.zeros.len();
    let censored = match traj.termination {
        Termination::CompactSupport { .. } => false,
        _ => {
            if n >= 2 {
                let tau_end = traj.samples.last().map(|s| s.r.ln()).unwrap_or(0.0);
                let t1 = traj.zeros[n - 1].r.ln();
                let t0 = traj.zeros[n - 2].r.ln();
                tau_end - t1 < 2.0 * (t1 - t0)
            } else {
                false
            }
        }
    };
    (n, censored)
}

/// Scaled tail points `(tau, y = r^delta w)` over the last decade of the
/// run (`p < 2` only; uses phase samples directly when present).
fn tail_points(sol: &FullSolution) -> Vec<(f64, f64)> {
    let params = &sol.params;
    if let Some(phase) = &sol.phase {
        let tau_end = match phase.samples.last() {
            Some(s) => s.tau,
            None => return Vec::new(),
        };
        phase
            .samples
            .iter()
            .filter(|s| s.tau >= tau_end - LN10)
            .map(|s| (s.tau, s.y))
            .collect()
    } else {
        let delta = params.delta();
        let r_end = match sol.traj.samples.last() {
            Some(s) => s.r,
            None => return Vec::new(),
        };
        sol.traj
            .samples
            .iter()
            .filter(|s| s.r >= r_end / 10.0 && s.r > 0.0)
            .map(|s| (s.r.ln(), s.r.powf(delta) * s.w))
            .collect()
    }
}

fn window_fit<F>(points: &[(f64, f64)], transform: F) -> Option<Fit>
where
    F: Fn(f64, f64) -> f64,
{
    if points.len() < 8 {
        return None;
    }
    let vals: Vec<f64> = points.iter().map(|&(t, y)| transform(t, y)).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    if !mean.is_finite() {
        return None;
    }
    let dev = vals.iter().fold(0.0_f64, |m, v| m.max((v - mean).abs()));
    let residual = dev / mean.abs().max(1e-300);
    Some(Fit {
        constant: mean,
        residual,
        window: [points[0].0, points[points.len() - 1].0],
    })
}

/// Oscillation gate: at least 12 zeros and the last five inter-zero
/// log-gaps within 20% of each other.
fn oscillatory_gate(traj: &Trajectory) -> Option<Fit> {
    if traj.zeros.len() < 12 {
        return None;
    }
    let taus: Vec<f64> = traj.zeros.iter().rev().take(6).map(|z| z.r.ln()).collect();
    let gaps: Vec<f64> = taus.windows(2).map(|w| w[0] - w[1]).collect();
    let max = gaps.iter().cloned().fold(f64::MIN, f64::max);
    let min = gaps.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 || (max - min) / min >= 0.2 {
        return None;
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    Some(Fit {
        constant: mean,
        residual: (max - min) / mean,
        window: [*taus.last().unwrap(), taus[0]],
    })
}

/// Classify a solved profile.
pub fn classify_solution(sol: &FullSolution) -> Result<DecayReport, ClassifyError> {
    let params = &sol.params;
    let traj = &sol.traj;
    let (n_zeros, censored) = count_zeros(traj);
    let mut fits: BTreeMap<String, Fit> = BTreeMap::new();
    let mut no_limit = false;

    let last = traj.samples.last().ok_or(ClassifyError::Empty)?;
    let r_end = last.r;

    // Slow decay first: a settled nonzero amplitude wins.
    let mut l = None;
    let mut l_err = None;
    if params.section() == Section::S3 && r_end >= 100.0 {
        if let Ok((lv, le)) = estimate_l(traj, params) {
            l = Some(lv);
            l_err = Some(le);
            // Credibility floor: integration noise of size abs_tol near
            // the horizon is amplified to r^alpha abs_tol in the weighted
            // variable, and a noise-seeded tail is indistinguishable from
            // a genuine tiny amplitude. Refuse to certify below that.
            let floor =
                100.0 * sol.controls.abs_tol * r_end.powf(params.alpha) * sol.a.abs().max(1.0);
            let pts: Vec<(f64, f64)> = traj
                .samples
                .iter()
                .filter(|s| s.r >= r_end / 10.0)
                .map(|s| (s.r.ln(), s.r.powf(params.alpha) * s.w))
                .collect();
            let settle = window_fit(&pts, |_t, v| v);
            if let Some(fit) = settle {
                fits.insert("slow_alpha".into(), fit);
            }
            // Certify only an amplitude that is above both error scales
            // *and* has settled: at a finite horizon a fast tail still
            // carries a small nonzero weighted mean, but one that drifts
            // across the window instead of settling.
            let settled = settle.is_some_and(|f| f.residual <= SLOW_SETTLE_GATE);
            if lv.abs() > le.max(floor) && settled {
                return Ok(DecayReport {
                    a: sol.a,
                    l,
                    l_err,
                    class: DecayClass::SlowDecay,
                    n_zeros,
                    censored,
                    no_limit,
                    fits,
                    termination: traj.termination,
                });
            }
        }
    }

    let class = match position(params.p, 2.0) {
        Position::Above => match traj.termination {
            Termination::CompactSupport { .. } => DecayClass::FastCompactSupport,
            _ => DecayClass::Undetermined,
        },
        Position::Equal => DecayClass::Undetermined,
        Position::Below => {
            if let Some(osc) = oscillatory_gate(traj) {
                fits.insert("oscillation_period".into(), osc);
                DecayClass::Oscillatory
            } else {
                let pts = tail_points(sol);
                let delta = params.delta();
                let eta = params.eta();
                let n = params.n;
                let p = params.p;

                // Candidate scaled quantities that must settle to a
                // positive constant for their class.
                let mut candidates: Vec<(&str, Box<dyn Fn(f64, f64) -> f64>)> = Vec::new();
                let vs_p1 = position(p, params.p1());
                let a_vs_d = position(params.alpha, delta);
                match params.section() {
                    Section::S3 => match vs_p1 {
                        Position::Above => {
                            candidates.push(("delta", Box::new(|_t, y: f64| y.abs())));
                        }
                        Position::Below => {
                            candidates.push((
                                "eta",
                                Box::new(move |t: f64, y: f64| y.abs() * ((delta - eta) * t).exp()),
                            ));
                        }
                        Position::Equal => {
                            let e = (n + 1.0) / 2.0;
                            candidates.push((
                                "log_p1",
                                Box::new(move |t: f64, y: f64| y.abs() * t.powf(e)),
                            ));
                        }
                    },
                    Section::S4 => {
                        let d_vs_n = position(delta, n);
                        if d_vs_n == Position::Below {
                            if a_vs_d == Position::Above {
                                candidates.push(("delta", Box::new(|_t, y: f64| y.abs())));
                                candidates.push((
                                    "eta",
                                    Box::new(move |t: f64, y: f64| {
                                        y.abs() * ((delta - eta) * t).exp()
                                    }),
                                ));
                            } else {
                                // alpha = delta < N: logarithmic correction
                                let e = 1.0 / (2.0 - p);
                                candidates.push((
                                    "log_delta_eq_alpha",
                                    Box::new(move |t: f64, y: f64| y.abs() * t.powf(-e)),
                                ));
                                candidates.push((
                                    "eta",
                                    Box::new(move |t: f64, y: f64| {
                                        y.abs() * ((delta - eta) * t).exp()
                                    }),
                                ));
                            }
                        } else if d_vs_n == Position::Equal && a_vs_d == Position::Equal {
                            // alpha = delta = N: plain r^{-N} amplitude
                            candidates.push(("delta", Box::new(|_t, y: f64| y.abs())));
                        }
                        // N <= delta < alpha: oscillation expected; no
                        // settling candidate to offer.
                    }
                }

                let mut fitted: Vec<(&str, Fit)> = Vec::new();
                for (name, transform) in &candidates {
                    if let Some(fit) = window_fit(&pts, transform) {
                        fits.insert((*name).into(), fit);
                        fitted.push((name, fit));
                    }
                }
                fitted.sort_by(|a, b| a.1.residual.partial_cmp(&b.1.residual).unwrap());

                let winner = match fitted.as_slice() {
                    [] => None,
                    [(name, fit)] => (fit.residual < FIT_GATE).then_some(*name),
                    [(name, best), (_, second), ..] => (best.residual < FIT_GATE
                        && best.residual * DOMINANCE <= second.residual)
                        .then_some(*name),
                };

                match winner {
                    Some("delta") => DecayClass::FastDelta,
                    Some("eta") => DecayClass::FastEta,
                    Some("log_p1") => DecayClass::FastLogP1,
                    Some("log_delta_eq_alpha") => DecayClass::FastLogDeltaEqAlpha,
                    Some(_) => DecayClass::Undetermined,
                    None => {
                        // bounded-without-limit detection around ell
                        let band = band_around_ell(&pts, params);
                        if let Some(fit) = band {
                            fits.insert("delta_band".into(), fit);
                            no_limit = true;
                            DecayClass::FastDelta
                        } else {
                            DecayClass::Undetermined
                        }
                    }
                }
            }
        }
    };

    Ok(DecayReport {
        a: sol.a,
        l,
        l_err,
        class,
        n_zeros,
        censored,
        no_limit,
        fits,
        termination: traj.termination,
    })
}

/// Bounded-no-limit detection: `|y|` stays in a positive band that
/// brackets `ell` without settling (possible only for `p2 < p` in the
/// mixed range `delta < min(alpha, N)`).
fn band_around_ell(pts: &[(f64, f64)], params: &Params) -> Option<Fit> {
    if params.section() != Section::S4 || position(params.p, params.p2()) != Position::Above {
        return None;
    }
    let ell = crate::exponents::ell_constant(params).ok()?;
    if pts.len() < 8 {
        return None;
    }
    let vals: Vec<f64> = pts.iter().map(|&(_, y)| y.abs()).collect();
    let max = vals.iter().cloned().fold(f64::MIN, f64::max);
    let min = vals.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 || !(min <= ell && ell <= max) {
        return None;
    }
    Some(Fit {
        constant: 0.5 * (min + max),
        residual: (max - min) / (max + min),
        window: [pts[0].0, pts[pts.len() - 1].0],
    })
}

/// Solve and classify one initial value.
pub fn classify_decay(
    a: f64,
    params: &Params,
    controls: &IntegratorControls,
) -> Result<DecayReport, ClassifyError> {
    let sol = solve_profile(a, params, controls)?;
    classify_solution(&sol)
}

/// Largest `r^gamma |w|` over samples with `r >= r_min` (envelope
/// constant for uniform-bound checks).
pub fn sup_scaled_tail(traj: &Trajectory, gamma: f64, r_min: f64) -> f64 {
    traj.samples
        .iter()
        .filter(|s| s.r >= r_min)
        .map(|s| s.r.powf(gamma) * s.w.abs())
        .fold(0.0, f64::max)
}

/// Result of checking the slow-decay tail expansion against a run.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionCheck {
    pub branch: ExpansionBranch,
    /// Rate of the leading correction term.
    pub rate: f64,
    /// Predicted coefficient (`K`, `K + M`, or `M` by branch).
    pub expected: f64,
    /// Fitted mean of `r^rate (r^alpha w - L)` over the window.
    pub fitted: f64,
    pub rel_err: f64,
    /// `|r^{alpha+1} w' + alpha L| / (alpha L)` at the end of the run.
    pub drift_residual: f64,
    pub window: [f64; 2],
}

/// Fit the first correction of the slow-decay expansion
/// `w = r^{-alpha} (L + c r^{-rate} + ...)` over the last decade and
/// compare with the predicted coefficient.
pub fn verify_expansion(
    traj: &Trajectory,
    l: f64,
    params: &Params,
) -> Result<ExpansionCheck, ClassifyError> {
    let consts = expansion_constants(params, l)?;
    let last = traj.samples.last().ok_or(ClassifyError::Empty)?;
    let r_end = last.r;
    if r_end < 100.0 {
        return Err(ClassifyError::Horizon(format!(
            "r_end = {r_end} < 100: no tail decade to fit"
        )));
    }
    // guard against cancellation: keep samples where the correction is
    // well above the integration accuracy
    let floor = 1e3 * 1e-9 * l.abs().max(1.0);
    let pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|s| s.r >= r_end / 10.0)
        .filter_map(|s| {
            let u = s.r.powf(params.alpha) * s.w - l;
            (u.abs() > floor).then(|| (s.r.ln(), s.r.powf(consts.leading_rate) * u))
        })
        .collect();
    let fit = window_fit(&pts, |_t, v| v).ok_or_else(|| {
        ClassifyError::Horizon("too few usable samples in the expansion window".into())
    })?;
    let expected = consts.leading_coeff;
    let rel_err = (fit.constant - expected).abs() / expected.abs().max(1e-12);
    let wp = last.wprime(params);
    let drift_residual =
        (r_end.powf(params.alpha + 1.0) * wp + params.alpha * l).abs() / (params.alpha * l).abs();
    Ok(ExpansionCheck {
        branch: consts.branch,
        rate: consts.leading_rate,
        expected,
        fitted: fit.constant,
        rel_err,
        drift_residual,
        window: fit.window,
    })
}
