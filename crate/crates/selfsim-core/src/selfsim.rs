//! Space-time reconstruction from a profile.
//!
//! When `alpha` equals the self-similar rate `alpha0 = p/(q+1-p)`, a
//! profile `w` generates a solution of the evolution problem via
//!
//! ```text
//! u(t, x) = (beta0 t)^{-1/(q-1)} w(xi),   xi = (beta0 t)^{-1/beta0} |x|,
//! ```
//!
//! with `beta0 = (q-1) alpha0`. Its Lebesgue norms scale in closed form,
//! `||u(t)||_s = (beta0 t)^{N/(s beta0) - 1/(q-1)} ||w||_s`, so the norm
//! at any time follows from one radial integral of the profile. The
//! radial integral needs a tail: it is supplied by the decay class of
//! the profile (exactly zero beyond the support radius, a power law for
//! the algebraic classes, zero for tails that already sit at rounding
//! level).

use serde::Serialize;
use thiserror::Error;

use crate::classify::{classify_solution, ClassifyError, DecayClass, DecayReport};
use crate::exponents::{position, Params, Position};
use crate::profile::{solve_profile, IntegratorControls, ProfileError, Trajectory};
use crate::signed_pow;

/// Floor of the negligible-tail gate; see
/// [`SelfSimilarSolution::endpoint_negligible`].
pub const NEGLIGIBLE_TAIL: f64 = 1e-25;

/// Errors of reconstruction and norm evaluation.
#[derive(Debug, Clone, Error)]
pub enum SelfSimError {
    #[error(
        "self-similar reconstruction requires alpha = alpha0 = p/(q+1-p) (alpha = {alpha}, alpha0 = {alpha0})"
    )]
    AlphaMismatch { alpha: f64, alpha0: f64 },
    #[error("time must be a finite number > 0 (got {t})")]
    BadTime { t: f64 },
    #[error("norm order s must be a finite number >= 1 (got {s})")]
    BadOrder { s: f64 },
    #[error("the {class} tail makes the order-{s} norm divergent (needs s * rate > N)")]
    DivergentNorm { class: DecayClass, s: f64 },
    #[error("cannot extrapolate a {class} tail with non-negligible endpoint")]
    Extrapolation { class: DecayClass },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Surface measure factor `omega_N = 2 pi^{N/2} / Gamma(N/2)` of the
/// unit sphere in dimension `N` (real `N >= 1`).
pub fn omega_n(n: f64) -> f64 {
    2.0 * std::f64::consts::PI.powf(n / 2.0) / libm::tgamma(n / 2.0)
}

/// A profile solved at the self-similar rate, ready to evaluate
/// `u(t, x)` and its norms.
#[derive(Debug, Clone, Serialize)]
pub struct SelfSimilarSolution {
    pub params: Params,
    pub a: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub profile: Trajectory,
    pub report: DecayReport,
    /// Controls the profile was solved with; the tail gates scale with
    /// their tolerances.
    pub controls: IntegratorControls,
}

impl SelfSimilarSolution {
    /// Solve and classify the profile at initial height `a`. Fails
    /// unless `alpha` sits on the self-similar rate.
    pub fn build(
        a: f64,
        params: &Params,
        controls: &IntegratorControls,
    ) -> Result<Self, SelfSimError> {
        let alpha0 = params.alpha0();
        if position(params.alpha, alpha0) != Position::Equal {
            return Err(SelfSimError::AlphaMismatch {
                alpha: params.alpha,
                alpha0,
            });
        }
        let sol = solve_profile(a, params, controls)?;
        let report = classify_solution(&sol)?;
        Ok(SelfSimilarSolution {
            params: *params,
            a,
            alpha0,
            beta0: params.beta0(),
            profile: sol.traj,
            report,
            controls: *controls,
        })
    }

    fn r_first(&self) -> f64 {
        self.profile.samples.first().map(|s| s.r).unwrap_or(0.0)
    }

    fn r_end(&self) -> f64 {
        self.profile.samples.last().map(|s| s.r).unwrap_or(0.0)
    }

    /// An endpoint below the integration noise scale carries no tail
    /// information; such a tail integrates as exactly zero (its true
    /// magnitude is below resolution, e.g. a faster-than-algebraic tail
    /// that underflowed the absolute tolerance mid-run).
    fn endpoint_negligible(&self) -> bool {
        let gate = (1e3 * self.controls.abs_tol * self.a.abs().max(1.0))
            .max(NEGLIGIBLE_TAIL * self.a.abs());
        self.profile
            .samples
            .last()
            .map(|s| s.w.abs() < gate)
            .unwrap_or(true)
    }

    /// Tail description beyond the horizon: `w ~ sign * c * g(r)` with
    /// `g` a power law (possibly log-corrected). Returns
    /// `(c_signed, rate, log_exponent)` meaning
    /// `w ~ c_signed r^{-rate} (ln r)^{log_exponent}`, or `None` for an
    /// identically-zero tail.
    fn tail_model(&self) -> Result<Option<(f64, f64, f64)>, SelfSimError> {
        let params = &self.params;
        let sign = self
            .profile
            .samples
            .last()
            .map(|s| if s.w < 0.0 { -1.0 } else { 1.0 })
            .unwrap_or(1.0);
        let fitted = |name: &str| self.report.fits.get(name).map(|f| f.constant);
        match self.report.class {
            DecayClass::FastCompactSupport => Ok(None),
            DecayClass::SlowDecay => {
                let l = self.report.l.unwrap_or(0.0);
                Ok(Some((l, params.alpha, 0.0)))
            }
            DecayClass::FastDelta => {
                if self.report.no_limit {
                    return Err(SelfSimError::Extrapolation {
                        class: self.report.class,
                    });
                }
                let c = fitted("delta").unwrap_or(0.0);
                Ok(Some((sign * c, params.delta(), 0.0)))
            }
            DecayClass::FastEta => {
                let c = fitted("eta").unwrap_or(0.0);
                Ok(Some((sign * c, params.eta(), 0.0)))
            }
            DecayClass::FastLogP1 => {
                let c = fitted("log_p1").unwrap_or(0.0);
                Ok(Some((sign * c, params.n, -(params.n + 1.0) / 2.0)))
            }
            DecayClass::FastLogDeltaEqAlpha => {
                let c = fitted("log_delta_eq_alpha").unwrap_or(0.0);
                Ok(Some((sign * c, params.delta(), 1.0 / (2.0 - params.p))))
            }
            DecayClass::Oscillatory | DecayClass::Undetermined => {
                if self.endpoint_negligible() {
                    Ok(None)
                } else {
                    Err(SelfSimError::Extrapolation {
                        class: self.report.class,
                    })
                }
            }
        }
    }

    /// Evaluate the profile at any radius: series below the first
    /// sample, cubic Hermite interpolation through the stored samples,
    /// class-based tail beyond the horizon.
    pub fn profile_value(&self, r: f64) -> Result<f64, SelfSimError> {
        let params = &self.params;
        if r <= 0.0 {
            return Ok(self.a);
        }
        let r_first = self.r_first();
        if r < r_first {
            let mu = (params.alpha * self.a + signed_pow(self.a, params.q)) / params.n;
            let pp = params.p_prime();
            return Ok(self.a - signed_pow(mu, 1.0 / (params.p - 1.0)) * r.powf(pp) / pp);
        }
        if r <= self.r_end() {
            let samples = &self.profile.samples;
            let idx = samples.partition_point(|s| s.r < r);
            if idx == 0 {
                return Ok(samples[0].w);
            }
            let s0 = &samples[idx - 1];
            let s1 = &samples[idx.min(samples.len() - 1)];
            if s1.r == s0.r {
                return Ok(s0.w);
            }
            let h = s1.r - s0.r;
            let t = (r - s0.r) / h;
            let (m0, m1) = (s0.wprime(params) * h, s1.wprime(params) * h);
            let t2 = t * t;
            let t3 = t2 * t;
            return Ok((2.0 * t3 - 3.0 * t2 + 1.0) * s0.w
                + (t3 - 2.0 * t2 + t) * m0
                + (-2.0 * t3 + 3.0 * t2) * s1.w
                + (t3 - t2) * m1);
        }
        match self.tail_model()? {
            None => Ok(0.0),
            Some((c, rate, log_exp)) => {
                let mut v = c * r.powf(-rate);
                if log_exp != 0.0 {
                    v *= r.ln().powf(log_exp);
                }
                Ok(v)
            }
        }
    }

    /// Evaluate `u(t, x)` at time `t > 0` and radius `|x| = rho`.
    pub fn reconstruct_u(&self, t: f64, rho: f64) -> Result<f64, SelfSimError> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(SelfSimError::BadTime { t });
        }
        let bt = self.beta0 * t;
        let xi = bt.powf(-1.0 / self.beta0) * rho.abs();
        Ok(bt.powf(-1.0 / (self.params.q - 1.0)) * self.profile_value(xi)?)
    }

    /// Radial Lebesgue norm of the profile,
    /// `||w||_s = (omega_N int_0^inf |w|^s r^{N-1} dr)^{1/s}`.
    pub fn w_norm(&self, s: f64) -> Result<f64, SelfSimError> {
        if !(s >= 1.0) || !s.is_finite() {
            return Err(SelfSimError::BadOrder { s });
        }
        let params = &self.params;
        let n = params.n;
        let samples = &self.profile.samples;
        if samples.is_empty() {
            return Ok(0.0);
        }

        // head [0, r_first]: w is flat at a to O(r_first^{p'})
        let r_first = self.r_first();
        let mut integral = self.a.abs().powf(s) * r_first.powf(n) / n;

        // body: trapezoid over the samples
        for pair in samples.windows(2) {
            let f0 = pair[0].w.abs().powf(s) * pair[0].r.powf(n - 1.0);
            let f1 = pair[1].w.abs().powf(s) * pair[1].r.powf(n - 1.0);
            integral += 0.5 * (f0 + f1) * (pair[1].r - pair[0].r);
        }

        // tail beyond the horizon
        let r_end = self.r_end();
        match self.tail_model()? {
            None => {}
            Some((c, rate, log_exp)) => {
                let kappa = s * rate - n;
                if c != 0.0 {
                    if kappa <= 1e-9 {
                        return Err(SelfSimError::DivergentNorm {
                            class: self.report.class,
                            s,
                        });
                    }
                    if log_exp == 0.0 {
                        integral += c.abs().powf(s) * r_end.powf(-kappa) / kappa;
                    } else {
                        // int_{r_end}^inf r^{n-1-s*rate} (ln r)^{s*log_exp} dr
                        // via u = ln r: int e^{-kappa u} u^{s*log_exp} du
                        let power = s * log_exp;
                        let u0 = r_end.ln();
                        let span = (80.0 + power.abs() * 20.0) / kappa;
                        let steps = 20_000;
                        let du = span / steps as f64;
                        let g = |u: f64| (-kappa * (u - u0)).exp() * u.powf(power);
                        let mut acc = 0.5 * (g(u0) + g(u0 + span));
                        for i in 1..steps {
                            acc += g(u0 + i as f64 * du);
                        }
                        integral += c.abs().powf(s) * r_end.powf(-kappa) * acc * du;
                    }
                }
            }
        }
        Ok((omega_n(n) * integral).powf(1.0 / s))
    }

    /// Closed-form time scaling of the solution norm,
    /// `||u(t)||_s = (beta0 t)^{N/(s beta0) - 1/(q-1)} ||w||_s`.
    pub fn norm_scaling(&self, s: f64, t: f64) -> Result<f64, SelfSimError> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(SelfSimError::BadTime { t });
        }
        let e = self.params.n / (s * self.beta0) - 1.0 / (self.params.q - 1.0);
        Ok((self.beta0 * t).powf(e) * self.w_norm(s)?)
    }
}
