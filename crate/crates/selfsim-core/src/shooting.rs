//! Shooting over the initial height `a`.
//!
//! The map `a -> w(.; a)` is continuous, odd, and organises profiles into
//! bands: small `a` keeps `w` positive (when `alpha < N`), larger `a`
//! produces sign changes, and the boundaries between "no further zero"
//! and "one more zero" carry fast-decaying profiles. This module sweeps
//! grids of `a`, bisects the positivity boundary to locate a
//! fast-decaying profile, and finds the smallest `a` reaching a given
//! zero count.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classify::{classify_decay, ClassifyError, DecayClass};
use crate::exponents::Params;
use crate::profile::{solve_profile, IntegratorControls, ProfileError};

/// One sweep result row.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub a: f64,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    #[serde(rename = "L_err")]
    pub l_err: Option<f64>,
    pub n_zeros: usize,
    pub censored: bool,
    pub class: DecayClass,
}

/// Errors of the bisection drivers.
#[derive(Debug, Clone, Error)]
pub enum ShootError {
    #[error("invalid bracket: need 0 < a_lo < a_hi (got [{a_lo}, {a_hi}])")]
    BadBracket { a_lo: f64, a_hi: f64 },
    #[error("tol must be a finite number > 0 (got {tol})")]
    BadTol { tol: f64 },
    #[error(
        "bracket does not straddle the boundary: {lo_zeros} zeros at a = {a_lo}, {hi_zeros} zeros at a = {a_hi}"
    )]
    NotStraddling {
        a_lo: f64,
        a_hi: f64,
        lo_zeros: usize,
        hi_zeros: usize,
    },
    #[error("no a in (0, {a_max}] reaches {needed} zeros within the horizon (max seen: {seen})")]
    ThresholdNotFound {
        a_max: f64,
        needed: usize,
        seen: usize,
    },
    #[error("zero count at the smallest scanned a = {a} already exceeds the target")]
    ThresholdAtZero { a: f64 },
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Build a sweep grid of `steps` points covering `[a_min, a_max]`
/// inclusively, linearly or logarithmically spaced.
pub fn sweep_grid(a_min: f64, a_max: f64, steps: usize, log_spaced: bool) -> Vec<f64> {
    if steps <= 1 {
        return vec![a_min];
    }
    (0..steps)
        .map(|i| {
            let f = i as f64 / (steps - 1) as f64;
            if log_spaced {
                (a_min.ln() + f * (a_max.ln() - a_min.ln())).exp()
            } else {
                a_min + f * (a_max - a_min)
            }
        })
        .collect()
}

/// Classify every initial value of the grid in parallel. Rows never
/// abort the sweep: a failed solve is recorded as `undetermined` with no
/// amplitude. `a = 0` gets the exact trivial row. Output order matches
/// the input grid regardless of thread count.
pub fn sweep_initial_values(
    params: &Params,
    a_values: &[f64],
    controls: &IntegratorControls,
) -> Vec<SweepRow> {
    a_values
        .par_iter()
        .map(|&a| {
            if a == 0.0 {
                return SweepRow {
                    a,
                    l: Some(0.0),
                    l_err: Some(0.0),
                    n_zeros: 0,
                    censored: false,
                    class: DecayClass::Undetermined,
                };
            }
            match classify_decay(a, params, controls) {
                Ok(rep) => SweepRow {
                    a,
                    l: rep.l,
                    l_err: rep.l_err,
                    n_zeros: rep.n_zeros,
                    censored: rep.censored,
                    class: rep.class,
                },
                Err(_) => SweepRow {
                    a,
                    l: None,
                    l_err: None,
                    n_zeros: 0,
                    censored: true,
                    class: DecayClass::Undetermined,
                },
            }
        })
        .collect()
}

fn zero_count(a: f64, params: &Params, controls: &IntegratorControls) -> Result<usize, ShootError> {
    Ok(solve_profile(a, params, controls)?.traj.zeros.len())
}

/// Result of bisecting the positivity boundary.
#[derive(Debug, Clone, Serialize)]
pub struct FastDecayResult {
    /// Final zero-free endpoint of the bracket: the side whose profile
    /// stays positive, carrying the vanishing amplitude.
    pub a_star: f64,
    /// Final bracket `(zero-free side, sign-changing side)`.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Every bracket visited, from the input `(a_lo, a_hi)` through each
    /// halving, ending with the final bracket.
    pub history: Vec<(f64, f64)>,
    /// Classification at `a_star`.
    pub report: crate::classify::DecayReport,
}

/// Bisect on "the profile has a sign change" over `[a_lo, a_hi]` until
/// the bracket is narrower than `tol` (absolute). Requires the profile
/// at `a_lo` to be positive throughout and the one at `a_hi` to change
/// sign.
pub fn bisect_fast_decay(
    params: &Params,
    a_lo: f64,
    a_hi: f64,
    tol: f64,
    controls: &IntegratorControls,
) -> Result<FastDecayResult, ShootError> {
    if !(a_lo > 0.0) || !(a_hi > a_lo) || !a_hi.is_finite() {
        return Err(ShootError::BadBracket { a_lo, a_hi });
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(ShootError::BadTol { tol });
    }
    let lo_zeros = zero_count(a_lo, params, controls)?;
    let hi_zeros = zero_count(a_hi, params, controls)?;
    if lo_zeros != 0 || hi_zeros == 0 {
        return Err(ShootError::NotStraddling {
            a_lo,
            a_hi,
            lo_zeros,
            hi_zeros,
        });
    }
    let (mut lo, mut hi) = (a_lo, a_hi);
    let mut iterations = 0;
    let mut history = vec![(lo, hi)];
    while hi - lo > tol && iterations < 200 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if zero_count(mid, params, controls)? == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
        history.push((lo, hi));
    }
    let report = classify_decay(lo, params, controls)?;
    Ok(FastDecayResult {
        a_star: lo,
        bracket: (lo, hi),
        iterations,
        history,
        report,
    })
}

/// Result of locating the smallest initial value with a given zero count.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdResult {
    /// Upper bracket end: smallest located `a` whose profile has at
    /// least `m + 1` zeros (the infimum lies within the internal
    /// tolerance below it).
    pub a_bar: f64,
    /// Target count `m` (the threshold bounds `{a : N(a) >= m + 1}`).
    pub m: usize,
    /// Classification just below the threshold (expected: `m` zeros,
    /// vanishing amplitude).
    pub report: crate::classify::DecayReport,
    /// The coarse scan `(a, zero count)` used to seed the bisection.
    pub scan: Vec<(f64, usize)>,
}

/// Find `a_bar(m) = inf { a > 0 : the profile at a has >= m + 1 zeros }`
/// by a 64-point scan of `(0, a_max]` followed by bisection to an
/// absolute width of `1e-8 * max(1, a_max)`.
pub fn find_min_zero_threshold(
    params: &Params,
    m: usize,
    a_max: f64,
    controls: &IntegratorControls,
) -> Result<ThresholdResult, ShootError> {
    if !(a_max > 0.0) || !a_max.is_finite() {
        return Err(ShootError::BadBracket {
            a_lo: 0.0,
            a_hi: a_max,
        });
    }
    const SCAN: usize = 64;
    let grid: Vec<f64> = (1..=SCAN).map(|i| a_max * i as f64 / SCAN as f64).collect();
    let counts: Vec<usize> = grid
        .par_iter()
        .map(|&a| zero_count(a, params, controls).unwrap_or(0))
        .collect();
    let scan: Vec<(f64, usize)> = grid.iter().cloned().zip(counts.iter().cloned()).collect();

    let needed = m + 1;
    let hit = counts.iter().position(|&c| c >= needed);
    let Some(idx) = hit else {
        return Err(ShootError::ThresholdNotFound {
            a_max,
            needed,
            seen: counts.into_iter().max().unwrap_or(0),
        });
    };
    let (mut lo, mut hi) = if idx == 0 {
        // already above threshold at the first grid point: probe a tiny a
        let probe = grid[0] * 1e-6;
        if zero_count(probe, params, controls)? >= needed {
            return Err(ShootError::ThresholdAtZero { a: probe });
        }
        (probe, grid[0])
    } else {
        (grid[idx - 1], grid[idx])
    };

    let tol = 1e-8 * a_max.max(1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if zero_count(mid, params, controls)? >= needed {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let report = classify_decay(lo, params, controls)?;
    Ok(ThresholdResult {
        a_bar: hi,
        m,
        report,
        scan,
    })
}
