//! Initial value problem for the radial profile and its adaptive solvers.
//!
//! The profile equation is integrated in flux form: with
//! `z = |w'|^{p-2} w'` (so `w' = G(z) = sign(z) |z|^{1/(p-1)}`),
//!
//! ```text
//! w' = G(z),
//! z' = -(N-1)/r z - r G(z) - alpha w - |w|^{q-1} w,
//! ```
//!
//! started from a two-term series at a small radius `r0 > 0` (the origin
//! itself is a removable singularity of the first equation only; the
//! `(N-1)/r` term forces a positive startup radius).
//!
//! Two drivers are provided. [`integrate_profile`] works in the radial
//! variables and is reliable while `|w|` stays well above the rounding
//! floor. For `p < 2`, decaying tails cross that floor long before the
//! qualitative behaviour has settled; [`integrate_log_phase`] continues
//! in the logarithmic phase plane of [`crate::phase`], where all regimes
//! of interest stay `O(1)`-`O(100)` out to `tau = ln r ~ 35`.
//! [`solve_profile`] chains the two and merges the results.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::{position, InvalidParam, Params, Position};
use crate::integrator::{
    dp45_step, error_norm, integrate_to, min_step, step_factor, StepSizeUnderflow, Tolerances,
};
use crate::phase::{nonautonomous_rhs, to_phase_d, PhaseState};
use crate::signed_pow;

/// Radius at which [`solve_profile`] hands a `p < 2` run over to the
/// logarithmic phase plane (when the requested horizon lies beyond it).
pub const HANDOFF_R: f64 = 10.0;

/// Radial state: radius, profile value, and flux `z = |w'|^{p-2} w'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileState {
    pub r: f64,
    pub w: f64,
    pub z: f64,
}

impl ProfileState {
    /// Recover `w' = sign(z) |z|^{1/(p-1)}`.
    pub fn wprime(&self, params: &Params) -> f64 {
        signed_pow(self.z, 1.0 / (params.p - 1.0))
    }
}

/// Accuracy and horizon controls for the profile solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorControls {
    /// Startup radius; `None` picks `1e-4 * min(1, |a|^{(1-q)/p})`, which
    /// keeps the neglected series remainder below the step tolerances for
    /// any initial height.
    pub r0: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Radial horizon (also the phase horizon, as `tau_max = ln r_max`).
    pub r_max: f64,
    /// Work bound; exceeding it terminates with [`Termination::StepFailure`].
    pub max_steps: usize,
    /// Relative width to which zero crossings are refined, and the
    /// clustering width below which crossings merge.
    pub event_tol: f64,
    /// Compact-support gate (for `p > 2`): the run stops once
    /// `|w| <= support_tol |a|` while the flux carries the local edge
    /// signature `|z| ~ r |w|`. Near a support radius `R` the leading
    /// balance `z' = -r G(z)` integrates to `|z| / |w| -> R` for every
    /// `p > 2`, so the gate accepts ratios within a factor of four.
    pub support_tol: f64,
}

impl Default for IntegratorControls {
    fn default() -> Self {
        IntegratorControls {
            r0: None,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            r_max: 1e3,
            max_steps: 4_000_000,
            event_tol: 1e-9,
            support_tol: 1e-5,
        }
    }
}

impl IntegratorControls {
    /// Check positivity/finiteness of every control.
    pub fn validate(&self) -> Result<(), InvalidParam> {
        fn fail(field: &'static str, message: &str) -> InvalidParam {
            InvalidParam {
                field,
                message: message.to_owned(),
            }
        }
        if let Some(r0) = self.r0 {
            if !r0.is_finite() || r0 <= 0.0 {
                return Err(fail("r0", "r0 must be a finite number > 0"));
            }
            if r0 >= self.r_max {
                return Err(fail("r0", "r0 must be below r_max"));
            }
        }
        if !self.rel_tol.is_finite() || self.rel_tol <= 0.0 {
            return Err(fail("rel_tol", "rel_tol must be a finite number > 0"));
        }
        if !self.abs_tol.is_finite() || self.abs_tol <= 0.0 {
            return Err(fail("abs_tol", "abs_tol must be a finite number > 0"));
        }
        if !self.r_max.is_finite() || self.r_max <= 0.0 {
            return Err(fail("r_max", "r_max must be a finite number > 0"));
        }
        if self.max_steps == 0 {
            return Err(fail("max_steps", "max_steps must be positive"));
        }
        if !self.event_tol.is_finite() || self.event_tol <= 0.0 {
            return Err(fail("event_tol", "event_tol must be a finite number > 0"));
        }
        if !self.support_tol.is_finite() || self.support_tol <= 0.0 {
            return Err(fail("support_tol", "support_tol must be a finite number > 0"));
        }
        Ok(())
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel: self.rel_tol,
            abs: self.abs_tol,
        }
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// The requested horizon was reached.
    ReachedRmax,
    /// `p > 2` only: the state entered the compact-support dead zone.
    CompactSupport { r_support: f64 },
    /// The step size collapsed or the work bound `max_steps` was hit;
    /// everything up to `r` is still valid.
    StepFailure { r: f64 },
}

/// A sign change of `w`, refined to `event_tol`; `dir` is the sign of `w`
/// on the right of the crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroCrossing {
    pub r: f64,
    pub dir: i8,
}

/// A sign change of `y(tau)` in the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseCrossing {
    pub tau: f64,
    pub dir: i8,
}

/// Result of a radial integration: one sample per accepted step, the
/// refined zeros of `w`, the zeros of `w'` (located by sample
/// interpolation), and the termination cause.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub a: f64,
    pub samples: Vec<ProfileState>,
    pub zeros: Vec<ZeroCrossing>,
    pub wprime_zeros: Vec<f64>,
    pub termination: Termination,
}

/// Result of a phase-plane integration at rate `d`.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseTrajectory {
    pub d: f64,
    pub samples: Vec<PhaseState>,
    pub zeros: Vec<PhaseCrossing>,
    /// `tau` positions where `Y` (hence `w'`) changes sign.
    pub yy_zeros: Vec<f64>,
    pub termination: Termination,
}

/// Errors of the profile solvers. Step-size collapse during the main
/// drive is *not* an error (it is reported as
/// [`Termination::StepFailure`] with the partial data); these are
/// precondition failures.
#[derive(Debug, Clone, Error)]
pub enum ProfileError {
    #[error("invalid integrator controls: {0}")]
    InvalidControls(#[from] InvalidParam),
    #[error("initial value a must be nonzero and finite (got {a}); a = 0 gives w identically 0")]
    TrivialInitial { a: f64 },
    #[error("startup radius r0 = {r0} must be a finite number > 0")]
    InvalidStartup { r0: f64 },
    #[error("right-hand side is singular at r = 0")]
    SingularRadius,
    #[error("phase handoff must use the rate d = delta = {expected} (got {got})")]
    WrongHandoffRate { got: f64, expected: f64 },
    #[error("phase continuation requires p < 2 (got p = {p})")]
    PhaseRequiresFastDiffusion { p: f64 },
    #[error("zero refinement failed: {0}")]
    EventRefinement(StepSizeUnderflow),
}

/// Default startup radius for initial height `a`.
pub fn default_r0(a: f64, params: &Params) -> f64 {
    1e-4 * 1.0_f64.min(a.abs().powf((1.0 - params.q) / params.p))
}

/// Two-term series start at radius `r0`: with
/// `mu(a) = (alpha a + sign(a) |a|^q) / N`,
///
/// ```text
/// z(r0) = -mu r0,        w(r0) = a - sign(mu) |mu|^{1/(p-1)} r0^{p'} / p'.
/// ```
pub fn series_start(a: f64, params: &Params, r0: f64) -> Result<ProfileState, ProfileError> {
    if a == 0.0 || !a.is_finite() {
        return Err(ProfileError::TrivialInitial { a });
    }
    if !r0.is_finite() || r0 <= 0.0 {
        return Err(ProfileError::InvalidStartup { r0 });
    }
    let mu = (params.alpha * a + signed_pow(a, params.q)) / params.n;
    let pp = params.p_prime();
    Ok(ProfileState {
        r: r0,
        w: a - signed_pow(mu, 1.0 / (params.p - 1.0)) * r0.powf(pp) / pp,
        z: -mu * r0,
    })
}

/// Profile right-hand side `(w', z')` at a radial state. Errors at `r <= 0`.
pub fn rhs(state: &ProfileState, params: &Params) -> Result<(f64, f64), ProfileError> {
    if state.r <= 0.0 {
        return Err(ProfileError::SingularRadius);
    }
    let d = rhs_raw(state.r, [state.w, state.z], params);
    Ok((d[0], d[1]))
}

#[inline]
fn rhs_raw(r: f64, wz: [f64; 2], params: &Params) -> [f64; 2] {
    let wp = signed_pow(wz[1], 1.0 / (params.p - 1.0));
    [
        wp,
        -(params.n - 1.0) / r * wz[1] - r * wp - params.alpha * wz[0] - signed_pow(wz[0], params.q),
    ]
}

/// Sign with a dead band: `0` while `|x| <= band`.
#[inline]
fn banded_sign(x: f64, band: f64) -> i8 {
    if x > band {
        1
    } else if x < -band {
        -1
    } else {
        0
    }
}

/// Refine a sign change of component `comp` to relative width
/// `event_tol` by bisection, re-integrating from the left anchor state.
fn refine_crossing<F>(
    f: &F,
    mut lo_t: f64,
    mut lo_y: [f64; 2],
    mut hi_t: f64,
    sign_left: i8,
    band: f64,
    comp: usize,
    event_tol: f64,
    tol: Tolerances,
) -> Result<f64, ProfileError>
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
{
    let mut guard = 0;
    while hi_t - lo_t > event_tol * lo_t.abs().max(1.0) && guard < 200 {
        guard += 1;
        let mid = 0.5 * (lo_t + hi_t);
        let y_mid = integrate_to(f, lo_t, lo_y, mid, tol, (hi_t - lo_t) * 0.25)
            .map_err(ProfileError::EventRefinement)?;
        if banded_sign(y_mid[comp], band) == sign_left {
            lo_t = mid;
            lo_y = y_mid;
        } else {
            hi_t = mid;
        }
    }
    Ok(0.5 * (lo_t + hi_t))
}

/// Collapse crossings closer than `event_tol` (relative): a cluster with
/// no net sign change disappears, otherwise it is replaced by its mean.
fn merge_crossings(zeros: Vec<ZeroCrossing>, event_tol: f64) -> Vec<ZeroCrossing> {
    let mut merged: Vec<ZeroCrossing> = Vec::with_capacity(zeros.len());
    let mut i = 0;
    while i < zeros.len() {
        let mut j = i + 1;
        while j < zeros.len()
            && zeros[j].r - zeros[j - 1].r <= event_tol * zeros[j].r.abs().max(1.0)
        {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            let mean = zeros[i..j].iter().map(|c| c.r).sum::<f64>() / (j - i) as f64;
            merged.push(ZeroCrossing {
                r: mean,
                dir: zeros[j - 1].dir,
            });
        }
        i = j;
    }
    merged
}

/// Integrate the profile from `w(0) = a` up to `controls.r_max` in the
/// radial variables.
pub fn integrate_profile(
    a: f64,
    params: &Params,
    controls: &IntegratorControls,
) -> Result<Trajectory, ProfileError> {
    controls.validate()?;
    let r0 = controls.r0.unwrap_or_else(|| default_r0(a, params));
    let start = series_start(a, params, r0)?;
    let f = |r: f64, wz: [f64; 2]| rhs_raw(r, wz, params);
    let tol = controls.tolerances();
    let degenerate_slope = position(params.p, 2.0) == Position::Above;

    let mut samples = vec![start];
    let mut zeros: Vec<ZeroCrossing> = Vec::new();
    let mut wprime_zeros: Vec<f64> = Vec::new();

    let band = controls.abs_tol * a.abs().max(1.0);
    let mut last_signed: Option<(f64, [f64; 2], i8)> = {
        let s = banded_sign(start.w, band);
        (s != 0).then_some((start.r, [start.w, start.z], s))
    };
    let mut last_z: (f64, f64) = (start.r, start.z);

    let mut t = start.r;
    let mut y = [start.w, start.z];
    let mut h = r0 * 1e-2;
    let mut rejected = false;
    let mut steps = 0usize;
    let support_w = controls.support_tol * a.abs();

    // Reduced tail dynamics for p > 2. On a decaying tail the flux is
    // algebraically slaved to the drive F = alpha w + |w|^{q-1} w through
    // r G(z) + F ~ 0, and the relaxation rate towards that manifold,
    // r |z|^{(2-p)/(p-1)} / (p-1), grows without bound as z -> 0. No
    // explicit step survives that, so once the state verifiably sits on
    // the manifold the run continues with w' = -F/r and z reconstructed
    // from the balance.
    let mut slaved = false;
    let f_reduced = |r: f64, wz: [f64; 2]| {
        let drive = params.alpha * wz[0] + signed_pow(wz[0], params.q);
        [-drive / r, 0.0]
    };
    let slaved_z = |r: f64, w: f64| {
        let drive = params.alpha * w + signed_pow(w, params.q);
        signed_pow(-drive / r, params.p - 1.0)
    };
    // The support edge carries the signature |z| ~ r |w| (the leading
    // balance z' = -r G(z) makes both vanish with the same power of the
    // distance to the edge, ratio -> R); a slow tail instead has
    // |z| ~ (alpha |w| / r)^{p-1} << r |w|. Requiring the ratio keeps
    // low-amplitude slow tails from being mistaken for a support edge.
    let edge_gate = |r: f64, wz: [f64; 2]| {
        wz[0].abs() <= support_w && wz[1].abs() <= 4.0 * r * support_w
            && wz[1].abs() >= 0.25 * r * wz[0].abs()
    };
    // Where the state has died inside the support noise zone, a step
    // collapse is the expected signature of the non-Lipschitz edge, not
    // an integration failure.
    let edge_rescue = |r: f64, wz: [f64; 2]| {
        let loose = (100.0 * support_w).max(1e-6 * a.abs());
        wz[0].abs() <= loose && wz[1].abs() <= 4.0 * r * loose
    };

    let termination = loop {
        if t >= controls.r_max {
            break Termination::ReachedRmax;
        }
        if steps >= controls.max_steps || h < min_step(t) {
            if degenerate_slope && !slaved && edge_rescue(t, y) {
                break Termination::CompactSupport { r_support: t };
            }
            break Termination::StepFailure { r: t };
        }
        let clipped = h.min(controls.r_max - t);
        let (y_new, err) = if slaved {
            dp45_step(&f_reduced, t, y, clipped)
        } else {
            dp45_step(&f, t, y, clipped)
        };
        let norm = error_norm(tol, y, y_new, err);
        steps += 1;
        if norm > 1.0 {
            h = clipped * step_factor(norm, true);
            rejected = true;
            continue;
        }
        let t_new = t + clipped;
        let mut y_new = y_new;
        if slaved {
            y_new[1] = slaved_z(t_new, y_new[0]);
        }

        // w' zeros: linear interpolation between accepted samples.
        if last_z.1 != 0.0 && y_new[1] != 0.0 && (last_z.1 > 0.0) != (y_new[1] > 0.0) {
            let frac = last_z.1 / (last_z.1 - y_new[1]);
            wprime_zeros.push(last_z.0 + frac * (t_new - last_z.0));
        }
        last_z = (t_new, y_new[1]);

        // w zeros: dead-banded sign tracking with bisection refinement.
        let s_new = banded_sign(y_new[0], band);
        if s_new != 0 {
            if let Some((ra, ya, sa)) = last_signed {
                if sa != s_new {
                    let r_zero = refine_crossing(
                        &f,
                        ra,
                        ya,
                        t_new,
                        sa,
                        band,
                        0,
                        controls.event_tol,
                        tol,
                    )?;
                    zeros.push(ZeroCrossing {
                        r: r_zero,
                        dir: s_new,
                    });
                }
            }
            last_signed = Some((t_new, y_new, s_new));
        }

        t = t_new;
        y = y_new;
        samples.push(ProfileState {
            r: t,
            w: y[0],
            z: y[1],
        });
        h = clipped * step_factor(norm, rejected);
        rejected = false;

        if degenerate_slope && !slaved {
            if edge_gate(t, y) {
                // Extrapolate the edge radius from the local power law
                // w ~ C (R - r)^{(p-1)/(p-2)}.
                let g = signed_pow(y[1], 1.0 / (params.p - 1.0)).abs();
                let r_support = if g > 0.0 {
                    t + (params.p - 1.0) / (params.p - 2.0) * y[0].abs() / g
                } else {
                    t
                };
                break Termination::CompactSupport { r_support };
            }
            let drive = params.alpha * y[0] + signed_pow(y[0], params.q);
            let g = signed_pow(y[1], 1.0 / (params.p - 1.0));
            if t >= 5.0
                && y[0].abs() > 10.0 * band
                && y[0] * y[1] <= 0.0
                && y[1].abs() <= 1e-4 * a.abs().max(1.0).powf(params.p - 1.0)
                && (t * g + drive).abs() <= 0.02 * drive.abs()
            {
                slaved = true;
                y[1] = slaved_z(t, y[0]);
                last_z = (t, y[1]);
            }
        }
    };

    Ok(Trajectory {
        a,
        samples,
        zeros: merge_crossings(zeros, controls.event_tol),
        wprime_zeros,
        termination,
    })
}

/// Continue a `p < 2` run in the logarithmic phase plane from a handoff
/// state (produced by [`to_phase_d`] at rate `d = delta`) up to
/// `tau_max`.
pub fn integrate_log_phase(
    handoff: PhaseState,
    params: &Params,
    tau_max: f64,
    controls: &IntegratorControls,
) -> Result<PhaseTrajectory, ProfileError> {
    controls.validate()?;
    if position(params.p, 2.0) != Position::Below {
        return Err(ProfileError::PhaseRequiresFastDiffusion { p: params.p });
    }
    let delta = params.delta();
    if (handoff.d - delta).abs() > 1e-9 * delta.max(1.0) {
        return Err(ProfileError::WrongHandoffRate {
            got: handoff.d,
            expected: delta,
        });
    }
    let f = |tau: f64, s: [f64; 2]| {
        nonautonomous_rhs(
            &PhaseState {
                tau,
                y: s[0],
                yy: s[1],
                d: delta,
            },
            params,
        )
    };
    let tol = controls.tolerances();

    let mut samples = vec![PhaseState { d: delta, ..handoff }];
    let mut zeros: Vec<PhaseCrossing> = Vec::new();
    let mut yy_zeros: Vec<f64> = Vec::new();

    let mut y_scale: f64 = handoff.y.abs().max(1.0);
    let band_of = |scale: f64| controls.abs_tol + 10.0 * controls.rel_tol * scale;
    let mut last_signed: Option<(f64, [f64; 2], i8)> = {
        let s = banded_sign(handoff.y, band_of(y_scale));
        (s != 0).then_some((handoff.tau, [handoff.y, handoff.yy], s))
    };
    let mut last_yy = (handoff.tau, handoff.yy);

    let mut t = handoff.tau;
    let mut y = [handoff.y, handoff.yy];
    let mut h = 1e-3;
    let mut rejected = false;
    let mut steps = 0usize;

    let termination = loop {
        if t >= tau_max {
            break Termination::ReachedRmax;
        }
        if steps >= controls.max_steps {
            break Termination::StepFailure { r: t.exp() };
        }
        if h < min_step(t) {
            break Termination::StepFailure { r: t.exp() };
        }
        let clipped = h.min(tau_max - t);
        let (y_new, err) = dp45_step(&f, t, y, clipped);
        let norm = error_norm(tol, y, y_new, err);
        steps += 1;
        if norm > 1.0 {
            h = clipped * step_factor(norm, true);
            rejected = true;
            continue;
        }
        let t_new = t + clipped;
        y_scale = y_scale.max(y_new[0].abs());

        if last_yy.1 != 0.0 && y_new[1] != 0.0 && (last_yy.1 > 0.0) != (y_new[1] > 0.0) {
            let frac = last_yy.1 / (last_yy.1 - y_new[1]);
            yy_zeros.push(last_yy.0 + frac * (t_new - last_yy.0));
        }
        last_yy = (t_new, y_new[1]);

        let band = band_of(y_scale);
        let s_new = banded_sign(y_new[0], band);
        if s_new != 0 {
            if let Some((ta, ya, sa)) = last_signed {
                if sa != s_new {
                    let tau_zero = refine_crossing(
                        &f,
                        ta,
                        ya,
                        t_new,
                        sa,
                        band,
                        0,
                        controls.event_tol,
                        tol,
                    )?;
                    zeros.push(PhaseCrossing {
                        tau: tau_zero,
                        dir: s_new,
                    });
                }
            }
            last_signed = Some((t_new, y_new, s_new));
        }

        t = t_new;
        y = y_new;
        samples.push(PhaseState {
            tau: t,
            y: y[0],
            yy: y[1],
            d: delta,
        });
        h = clipped * step_factor(norm, rejected);
        rejected = false;
    };

    Ok(PhaseTrajectory {
        d: delta,
        samples,
        zeros,
        yy_zeros,
        termination,
    })
}

/// A complete solve: the merged radial trajectory (phase samples mapped
/// back to radial variables when a handoff happened), plus the raw phase
/// continuation for diagnostics that live in the phase plane.
#[derive(Debug, Clone)]
pub struct FullSolution {
    pub a: f64,
    pub params: Params,
    /// The controls the solve ran with (classification derives its
    /// amplitude credibility floor from them).
    pub controls: IntegratorControls,
    pub traj: Trajectory,
    /// Radius at which the run switched to the phase plane, if it did.
    pub handoff_r: Option<f64>,
    pub phase: Option<PhaseTrajectory>,
}

/// Solve the profile out to `controls.r_max`, switching to the phase
/// plane at [`HANDOFF_R`] when `p < 2` and the horizon warrants it.
pub fn solve_profile(
    a: f64,
    params: &Params,
    controls: &IntegratorControls,
) -> Result<FullSolution, ProfileError> {
    controls.validate()?;
    let use_phase = position(params.p, 2.0) == Position::Below
        && controls.r_max > 10.0 * HANDOFF_R
        && controls.r0.map_or(HANDOFF_R * 1e-3, |r| r) < HANDOFF_R;
    if !use_phase {
        let traj = integrate_profile(a, params, controls)?;
        return Ok(FullSolution {
            a,
            params: *params,
            controls: *controls,
            traj,
            handoff_r: None,
            phase: None,
        });
    }

    let stage1 = IntegratorControls {
        r_max: HANDOFF_R,
        ..*controls
    };
    let mut traj = integrate_profile(a, params, &stage1)?;
    if traj.termination != Termination::ReachedRmax {
        return Ok(FullSolution {
            a,
            params: *params,
            controls: *controls,
            traj,
            handoff_r: None,
            phase: None,
        });
    }

    let last = *traj.samples.last().expect("nonempty trajectory");
    let handoff = to_phase_d(&last, params, params.delta());
    let ptraj = integrate_log_phase(handoff, params, controls.r_max.ln(), controls)?;

    for s in ptraj.samples.iter().skip(1) {
        traj.samples.push(s.to_profile(params));
    }
    traj.zeros.extend(ptraj.zeros.iter().map(|c| ZeroCrossing {
        r: c.tau.exp(),
        dir: c.dir,
    }));
    traj.wprime_zeros
        .extend(ptraj.yy_zeros.iter().map(|tau| tau.exp()));
    traj.termination = ptraj.termination;

    Ok(FullSolution {
        a,
        params: *params,
        controls: *controls,
        traj,
        handoff_r: Some(last.r),
        phase: Some(ptraj),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(n: f64, p: f64, q: f64, alpha: f64) -> Params {
        Params::new(n, p, q, alpha).unwrap()
    }

    #[test]
    fn series_start_examples() {
        // frozen: (N, p, q, alpha) = (1, 1.5, 3, 0.6), a = 1:
        // mu = 1.6, z(r0) = -1.6 r0, w(r0) = 1 - 2.56 r0^3 / 3.
        let p = params(1.0, 1.5, 3.0, 0.6);
        let r0 = 1e-3;
        let s = series_start(1.0, &p, r0).unwrap();
        assert_relative_eq!(s.z, -1.6e-3, max_relative = 1e-14);
        assert_relative_eq!(s.w, 1.0 - 2.56 * r0.powi(3) / 3.0, max_relative = 1e-14);

        // frozen: (3, 2, 3, 1), a = 1: mu = 2/3, w(r0) = 1 - r0^2 / 3.
        let p = params(3.0, 2.0, 3.0, 1.0);
        let s = series_start(1.0, &p, r0).unwrap();
        assert_relative_eq!(s.z, -2.0 / 3.0 * r0, max_relative = 1e-14);
        assert_relative_eq!(s.w, 1.0 - r0 * r0 / 3.0, max_relative = 1e-12);

        // odd symmetry of the startup
        let s_pos = series_start(2.0, &p, r0).unwrap();
        let s_neg = series_start(-2.0, &p, r0).unwrap();
        assert_relative_eq!(s_pos.w, -s_neg.w, max_relative = 1e-14);
        assert_relative_eq!(s_pos.z, -s_neg.z, max_relative = 1e-14);

        assert!(series_start(0.0, &p, r0).is_err());
        assert!(series_start(1.0, &p, 0.0).is_err());
    }

    #[test]
    fn startup_consistency_under_r0_refinement() {
        // The answer at r = 1 must not depend on the startup radius.
        let p = params(3.0, 2.0, 3.0, 1.0);
        let run = |r0: f64| {
            let c = IntegratorControls {
                r0: Some(r0),
                r_max: 1.0,
                ..Default::default()
            };
            let t = integrate_profile(1.0, &p, &c).unwrap();
            *t.samples.last().unwrap()
        };
        let coarse = run(1e-3);
        let fine = run(1e-5);
        assert_relative_eq!(coarse.w, fine.w, max_relative = 1e-7);
        assert_relative_eq!(coarse.z, fine.z, max_relative = 1e-6);
    }

    #[test]
    fn bounded_by_initial_height() {
        let p = params(1.0, 1.5, 3.0, 2.9);
        let c = IntegratorControls {
            r_max: 50.0,
            ..Default::default()
        };
        let t = integrate_profile(1.0, &p, &c).unwrap();
        assert_eq!(t.termination, Termination::ReachedRmax);
        assert!(t.samples.iter().all(|s| s.w.abs() <= 1.0 + 1e-9));
    }

    #[test]
    fn zero_guaranteed_case_finds_zeros() {
        // (1, 1.5, 3, 2.9): at least one isolated zero for every a.
        let p = params(1.0, 1.5, 3.0, 2.9);
        let c = IntegratorControls {
            r_max: 50.0,
            ..Default::default()
        };
        for a in [0.5, 1.0, 2.0] {
            let t = integrate_profile(a, &p, &c).unwrap();
            assert!(!t.zeros.is_empty(), "no zero found for a = {a}");
            // first crossing of a positive profile goes downward
            assert_eq!(t.zeros[0].dir, -1);
        }
    }

    #[test]
    fn odd_symmetry_of_full_run() {
        let p = params(1.0, 1.5, 3.0, 2.9);
        let c = IntegratorControls {
            r_max: 20.0,
            ..Default::default()
        };
        let tp = integrate_profile(1.0, &p, &c).unwrap();
        let tn = integrate_profile(-1.0, &p, &c).unwrap();
        assert_eq!(tp.zeros.len(), tn.zeros.len());
        for (zp, zn) in tp.zeros.iter().zip(&tn.zeros) {
            assert_relative_eq!(zp.r, zn.r, max_relative = 1e-6);
            assert_eq!(zp.dir, -zn.dir);
        }
        let lp = tp.samples.last().unwrap();
        let ln_ = tn.samples.last().unwrap();
        assert_relative_eq!(lp.w, -ln_.w, max_relative = 1e-6, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_slow_tail_rides_the_slaved_manifold() {
        // p = 3 > 2, generic start: the tail decays slowly and the flux
        // must relax onto z = -|F/r|^{p-1} with F = alpha w + |w|^{q-1} w,
        // which is what lets the run reach the full horizon at all.
        let p = params(3.0, 3.0, 4.0, 1.5);
        let c = IntegratorControls::default();
        let t = integrate_profile(1.0, &p, &c).unwrap();
        assert_eq!(t.termination, Termination::ReachedRmax);
        assert!(t.zeros.is_empty());
        let last = t.samples.last().unwrap();
        assert_relative_eq!(last.r, 1e3, max_relative = 1e-12);
        assert!(last.w > 0.0);
        let drive = p.alpha * last.w + last.w.powf(p.q);
        let z_manifold = -(drive / last.r).powf(p.p - 1.0);
        assert_relative_eq!(last.z, z_manifold, max_relative = 1e-6);
    }

    #[test]
    fn phase_handoff_matches_direct_radial_run() {
        // Same run computed radially to r = 100 and via a handoff at
        // r = 10 followed by the phase continuation to tau = ln 100.
        let p = params(1.0, 1.5, 3.0, 0.6);
        let direct = {
            let c = IntegratorControls {
                r_max: 100.0,
                ..Default::default()
            };
            let t = integrate_profile(1.0, &p, &c).unwrap();
            *t.samples.last().unwrap()
        };
        assert_relative_eq!(direct.r, 100.0, max_relative = 1e-12);
        let chained = {
            let c = IntegratorControls {
                r_max: HANDOFF_R,
                ..Default::default()
            };
            let t = integrate_profile(1.0, &p, &c).unwrap();
            let hand = to_phase_d(t.samples.last().unwrap(), &p, p.delta());
            let pt = integrate_log_phase(hand, &p, 100.0_f64.ln(), &c).unwrap();
            pt.samples.last().unwrap().to_profile(&p)
        };
        assert_relative_eq!(chained.r, 100.0, max_relative = 1e-12);
        assert_relative_eq!(chained.w, direct.w, max_relative = 1e-5);
        assert_relative_eq!(chained.z, direct.z, max_relative = 1e-4);
    }

    #[test]
    fn solve_merges_phase_zeros() {
        // Oscillatory S4 case: many zeros, most beyond the handoff radius.
        let p = params(1.0, 1.5, 3.0, 3.5);
        let c = IntegratorControls {
            r_max: 1e3,
            ..Default::default()
        };
        let s = solve_profile(1.0, &p, &c).unwrap();
        assert!(s.handoff_r.is_some());
        assert!(s.traj.zeros.len() >= 5, "zeros: {}", s.traj.zeros.len());
        let rs: Vec<f64> = s.traj.zeros.iter().map(|z| z.r).collect();
        assert!(rs.windows(2).all(|w| w[0] < w[1]), "zeros must be sorted");
    }

    #[test]
    fn rejects_bad_controls() {
        let p = params(3.0, 2.0, 3.0, 1.0);
        let c = IntegratorControls {
            rel_tol: -1.0,
            ..Default::default()
        };
        assert!(matches!(
            integrate_profile(1.0, &p, &c),
            Err(ProfileError::InvalidControls(_))
        ));
        assert!(matches!(
            integrate_profile(0.0, &p, &IntegratorControls::default()),
            Err(ProfileError::TrivialInitial { .. })
        ));
    }
}
