//! Algorithms for radial profiles `w(r)` solving
//!
//! ```text
//! (|w'|^{p-2} w')' + (N-1)/r |w'|^{p-2} w' + r w' + alpha w + |w|^{q-1} w = 0,
//! w(0) = a,  w'(0) = 0,
//! ```
//!
//! on `(0, infinity)`. Profiles of this equation generate self-similar
//! solutions `u(t, x)` of a diffusion-absorption PDE; the large-`r`
//! behaviour of `w` (slow algebraic decay, fast decay, compact support, or
//! oscillation) decides which. This crate provides:
//!
//! - [`exponents`]: parameter validation, the critical exponents and
//!   closed-form constants that organise the parameter plane, and a
//!   qualitative regime classifier;
//! - [`profile`]: series startup near `r = 0`, adaptive integration of the
//!   profile equation in `r`, and a logarithmic phase-plane continuation
//!   that tracks decaying profiles far beyond the reach of the radial
//!   variables;
//! - [`phase`]: the substitution `w = e^{-d tau} y(tau)`, `tau = ln r`,
//!   its autonomous limit system, stationary points, and the curvature
//!   function separating contracting from expanding flow;
//! - [`energy`]: energy and weighted-moment diagnostics (monotone energy,
//!   flux moments, a family of weighted functionals with term-by-term
//!   derivatives, and a Lyapunov function for the phase system);
//! - [`classify`]: tail fits and the decay taxonomy, producing a
//!   [`DecayReport`] per initial value;
//! - [`shooting`]: sweeps over the initial value `a`, bisection for
//!   fast-decaying profiles, and sign-change thresholds;
//! - [`selfsim`]: reconstruction of the space-time solution from a profile
//!   and closed-form time scaling of its Lebesgue norms.

pub mod classify;
pub mod energy;
pub mod exponents;
pub mod integrator;
pub mod phase;
pub mod profile;
pub mod selfsim;
pub mod shooting;

pub use classify::{classify_decay, DecayClass, DecayReport, Fit};
pub use energy::{energy_e, EnergySample};
pub use exponents::{
    classify_regime, compute_exponents, Exponents, Params, Position, Regime, Section,
};
pub use phase::{PhaseState, StationarySet};
pub use profile::{
    integrate_profile, solve_profile, FullSolution, IntegratorControls, ProfileState,
    Termination, Trajectory,
};
pub use selfsim::SelfSimilarSolution;
pub use shooting::{
    bisect_fast_decay, find_min_zero_threshold, sweep_grid, sweep_initial_values, FastDecayResult,
    ShootError, SweepRow, ThresholdResult,
};

/// `sign(x) |x|^e`, the signed power used throughout the flux variable
/// changes. Returns `0` for `x == 0` (also when `e == 0`).
#[inline]
pub fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}
