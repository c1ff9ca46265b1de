//! Parameters, critical exponents, closed-form constants, and regime
//! classification.
//!
//! The parameter plane `(N, p, q, alpha)` is organised by a handful of
//! exponents (`p1`, `p2`, `q1`, `q*`, `delta`, `eta`, `alpha0`, `beta0`)
//! and closed-form constants (`alpha*`, `ell`, `varrho`). Everything here
//! is pure arithmetic; boundary cases are decided with a fixed relative
//! tolerance so that callers sitting numerically on a threshold land on
//! the closed side deterministically.

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

/// Relative tolerance for comparisons against regime boundaries. A value
/// within this relative distance of a threshold is treated as exactly on
/// the threshold.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Three-way result of a toleranced comparison against a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    Below,
    Equal,
    Above,
}

/// Compare `x` against `threshold` with relative tolerance
/// [`BOUNDARY_TOL`]. An infinite threshold puts every finite `x` strictly
/// below (resp. above) it.
pub fn position(x: f64, threshold: f64) -> Position {
    if threshold.is_infinite() {
        return if x == threshold {
            Position::Equal
        } else if threshold > 0.0 {
            Position::Below
        } else {
            Position::Above
        };
    }
    let scale = x.abs().max(threshold.abs()).max(1.0e-300);
    if (x - threshold).abs() <= BOUNDARY_TOL * scale {
        Position::Equal
    } else if x < threshold {
        Position::Below
    } else {
        Position::Above
    }
}

/// Problem parameters: dimension `N >= 1` (treated as a real number),
/// diffusion exponent `p > 1`, absorption exponent `q > 1`, and linear
/// rate `alpha > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(rename = "N")]
    pub n: f64,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
}

/// A rejected parameter value, carrying the offending field name so that
/// command-line frontends can report it in machine-readable form.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("invalid parameter {field}: {message}")]
pub struct InvalidParam {
    pub field: &'static str,
    pub message: String,
}

impl Params {
    /// Validate and build a parameter set.
    pub fn new(n: f64, p: f64, q: f64, alpha: f64) -> Result<Self, InvalidParam> {
        let params = Params { n, p, q, alpha };
        params.validate()?;
        Ok(params)
    }

    /// Check the admissibility constraints `N >= 1`, `p > 1`, `q > 1`,
    /// `alpha > 0` (all finite).
    pub fn validate(&self) -> Result<(), InvalidParam> {
        fn fail(field: &'static str, message: &str) -> InvalidParam {
            InvalidParam {
                field,
                message: message.to_owned(),
            }
        }
        if !self.n.is_finite() || self.n < 1.0 {
            return Err(fail("N", "N must be a finite number >= 1"));
        }
        if !self.p.is_finite() || self.p <= 1.0 {
            return Err(fail("p", "p must be a finite number > 1"));
        }
        if !self.q.is_finite() || self.q <= 1.0 {
            return Err(fail("q", "q must be a finite number > 1"));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(fail("alpha", "alpha must be a finite number > 0"));
        }
        Ok(())
    }

    /// Conjugate exponent `p' = p / (p - 1)`.
    #[inline]
    pub fn p_prime(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Decay exponent `delta = p / (2 - p)`, signed: positive for
    /// `p < 2`, negative for `p > 2`, and `+inf` exactly at `p = 2`
    /// (within [`BOUNDARY_TOL`]).
    #[inline]
    pub fn delta(&self) -> f64 {
        if position(self.p, 2.0) == Position::Equal {
            f64::INFINITY
        } else {
            self.p / (2.0 - self.p)
        }
    }

    /// Linear-tail exponent `eta = (N - p) / (p - 1)`.
    #[inline]
    pub fn eta(&self) -> f64 {
        (self.n - self.p) / (self.p - 1.0)
    }

    /// Self-similar decay rate `alpha0 = p / (q + 1 - p)`.
    #[inline]
    pub fn alpha0(&self) -> f64 {
        self.p / (self.q + 1.0 - self.p)
    }

    /// Self-similar spatial rate `beta0 = (q - 1) alpha0`.
    #[inline]
    pub fn beta0(&self) -> f64 {
        (self.q - 1.0) * self.alpha0()
    }

    /// Lower diffusion threshold `p1 = 2N / (N + 1)`.
    #[inline]
    pub fn p1(&self) -> f64 {
        2.0 * self.n / (self.n + 1.0)
    }

    /// Lower diffusion threshold `p2 = 2N / (N + 2)`.
    #[inline]
    pub fn p2(&self) -> f64 {
        2.0 * self.n / (self.n + 2.0)
    }

    /// Absorption threshold `q1 = p - 1 + p / N`.
    #[inline]
    pub fn q1(&self) -> f64 {
        self.p - 1.0 + self.p / self.n
    }

    /// Sobolev-type threshold `q* = (N(p - 1) + p) / (N - p)` for
    /// `N > p`, `+inf` otherwise.
    #[inline]
    pub fn q_star(&self) -> f64 {
        if position(self.n, self.p) == Position::Above {
            (self.n * (self.p - 1.0) + self.p) / (self.n - self.p)
        } else {
            f64::INFINITY
        }
    }

    /// Which side of the structural split the parameters fall on:
    /// [`Section::S3`] when `(2 - p) alpha < p` (always for `p >= 2`),
    /// [`Section::S4`] when `p < 2` and `alpha >= delta` (closed at
    /// `alpha = delta`).
    pub fn section(&self) -> Section {
        if position(self.p, 2.0) != Position::Below {
            Section::S3
        } else if position(self.alpha, self.delta()) == Position::Below {
            Section::S3
        } else {
            Section::S4
        }
    }
}

fn serialize_extended<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn serialize_opt_extended<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize_extended(v, s),
        None => s.serialize_none(),
    }
}

/// The critical exponents and closed-form constants attached to a
/// parameter set. Optional entries are present exactly when their
/// defining condition holds. Infinite values serialize as the strings
/// `"inf"` / `"-inf"` (JSON numbers cannot carry infinities).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Exponents {
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub q_star: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub delta: f64,
    pub eta: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub p_prime: f64,
    /// Boundary rate `alpha*`; present iff `p2 < p < 2`.
    #[serde(serialize_with = "serialize_opt_extended")]
    pub alpha_star: Option<f64>,
    /// Fast-decay amplitude `ell`; present iff `p < 2` and
    /// `(delta - N)(delta - alpha) > 0`.
    #[serde(serialize_with = "serialize_opt_extended")]
    pub ell: Option<f64>,
    /// Logarithmic-decay amplitude `varrho`; present iff `p = p1` and
    /// `alpha < N`.
    #[serde(serialize_with = "serialize_opt_extended")]
    pub varrho: Option<f64>,
}

/// A requested constant is undefined for the given parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegimeError {
    #[error("alpha_star is defined only for p2 < p < 2 (p = {p}, p2 = {p2})")]
    AlphaStarUndefined { p: f64, p2: f64 },
    #[error("ell is defined only for p < 2 with (delta - N)(delta - alpha) > 0")]
    EllUndefined,
    #[error("varrho is defined only for p = 2N/(N+1) and alpha < N")]
    VarrhoUndefined,
    #[error("expansion constants require L > 0 (got L = {l})")]
    NonpositiveAmplitude { l: f64 },
    #[error("expansion constants require (2 - p) alpha < p (slow-decay range)")]
    ExpansionUndefined,
}

/// Boundary rate `alpha* = delta + delta (N - delta) / ((p-1)(2 delta - N))`,
/// defined for `p2 < p < 2`.
pub fn alpha_star(params: &Params) -> Result<f64, RegimeError> {
    let p2 = params.p2();
    if position(params.p, p2) != Position::Above || position(params.p, 2.0) != Position::Below {
        return Err(RegimeError::AlphaStarUndefined { p: params.p, p2 });
    }
    let d = params.delta();
    let n = params.n;
    Ok(d + d * (n - d) / ((params.p - 1.0) * (2.0 * d - n)))
}

/// Fast-decay amplitude
/// `ell = (delta^{p-1} (delta - N) / (delta - alpha))^{1/(2-p)}`,
/// defined for `p < 2` when `(delta - N)(delta - alpha) > 0`.
pub fn ell_constant(params: &Params) -> Result<f64, RegimeError> {
    if position(params.p, 2.0) != Position::Below {
        return Err(RegimeError::EllUndefined);
    }
    let d = params.delta();
    let vs_n = position(d, params.n);
    let vs_alpha = position(d, params.alpha);
    let both_above = vs_n == Position::Above && vs_alpha == Position::Above;
    let both_below = vs_n == Position::Below && vs_alpha == Position::Below;
    if !(both_above || both_below) {
        return Err(RegimeError::EllUndefined);
    }
    let base = d.powf(params.p - 1.0) * (d - params.n) / (d - params.alpha);
    Ok(base.powf(1.0 / (2.0 - params.p)))
}

/// Logarithmic-decay amplitude
/// `varrho = (1/N) (N(N-1) / (2(N - alpha)))^{(N+1)/2}`,
/// defined at `p = p1 = 2N/(N+1)` for `alpha < N`.
pub fn varrho_constant(params: &Params) -> Result<f64, RegimeError> {
    if position(params.p, params.p1()) != Position::Equal
        || position(params.alpha, params.n) != Position::Below
    {
        return Err(RegimeError::VarrhoUndefined);
    }
    let n = params.n;
    Ok((n * (n - 1.0) / (2.0 * (n - params.alpha))).powf((n + 1.0) / 2.0) / n)
}

/// Mixed-decay amplitude
/// `eta_bar = ((2 - p) delta^{p-1} (N - delta))^{1/(2-p)}`,
/// defined for `p < 2` with `delta < N` (the `alpha = delta` borderline).
pub fn eta_bar_constant(params: &Params) -> Result<f64, RegimeError> {
    if position(params.p, 2.0) != Position::Below {
        return Err(RegimeError::EllUndefined);
    }
    let d = params.delta();
    if position(d, params.n) != Position::Below {
        return Err(RegimeError::EllUndefined);
    }
    let base = (2.0 - params.p) * d.powf(params.p - 1.0) * (params.n - d);
    Ok(base.powf(1.0 / (2.0 - params.p)))
}

/// Rate-dependent absorption threshold `q*_alpha` solving
/// `1/(q*_alpha + 1) = (N-1)/(2 alpha) - 1/p'`; defined (positive) iff
/// `alpha < (N-1) p' / 2`.
pub fn q_star_alpha(params: &Params) -> Option<f64> {
    let bound = (params.n - 1.0) * params.p_prime() / 2.0;
    if position(params.alpha, bound) != Position::Below {
        return None;
    }
    let inv = (params.n - 1.0) / (2.0 * params.alpha) - 1.0 / params.p_prime();
    Some(1.0 / inv - 1.0)
}

/// Compute every exponent and optional constant for a parameter set.
pub fn compute_exponents(params: &Params) -> Exponents {
    Exponents {
        p1: params.p1(),
        p2: params.p2(),
        q1: params.q1(),
        q_star: params.q_star(),
        delta: params.delta(),
        eta: params.eta(),
        alpha0: params.alpha0(),
        beta0: params.beta0(),
        p_prime: params.p_prime(),
        alpha_star: alpha_star(params).ok(),
        ell: ell_constant(params).ok(),
        varrho: varrho_constant(params).ok(),
    }
}

/// Which coefficient carries the first-order correction in the
/// slow-decay tail expansion `w = r^{-alpha} (L + c r^{-nu} + ...)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionBranch {
    /// `(q + 1 - p) alpha > p`: the gradient correction `K r^{-k}` leads.
    KDominant,
    /// `(q + 1 - p) alpha = p`: resonance, coefficient `K + M` at rate `k`.
    Resonant,
    /// `(q + 1 - p) alpha < p`: the absorption correction
    /// `M r^{-alpha(q-1)}` leads.
    MDominant,
}

/// First-order tail-expansion data for a slow-decaying profile with
/// amplitude `L`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpansionConstants {
    /// Gradient correction rate `k = p - (2 - p) alpha` (positive in the
    /// slow-decay range).
    pub k: f64,
    /// Gradient correction coefficient
    /// `K = (alpha(p-1) - (N-p)) (alpha L)^{1/(p-1)} / k`.
    pub big_k: f64,
    /// Absorption correction coefficient `M = L^q / (alpha (q - 1))`,
    /// carried at rate `alpha (q - 1)`.
    pub big_m: f64,
    /// Which correction leads.
    pub branch: ExpansionBranch,
    /// The leading correction rate: `k`, `k` (= `alpha(q-1)`), or
    /// `alpha(q-1)` according to the branch.
    pub leading_rate: f64,
    /// The coefficient multiplying `r^{-leading_rate}`: `K`, `K + M`, or
    /// `M` according to the branch.
    pub leading_coeff: f64,
}

/// Constants of the slow-decay tail expansion. Requires `L > 0` and the
/// slow-decay rate condition `(2 - p) alpha < p`.
pub fn expansion_constants(params: &Params, l: f64) -> Result<ExpansionConstants, RegimeError> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(RegimeError::NonpositiveAmplitude { l });
    }
    let k = params.p - (2.0 - params.p) * params.alpha;
    if !(k > 0.0) {
        return Err(RegimeError::ExpansionUndefined);
    }
    let big_k = (params.alpha * (params.p - 1.0) - (params.n - params.p))
        * (params.alpha * l).powf(1.0 / (params.p - 1.0))
        / k;
    let big_m = l.powf(params.q) / (params.alpha * (params.q - 1.0));
    let rate_m = params.alpha * (params.q - 1.0);
    let (branch, leading_rate, leading_coeff) =
        match position((params.q + 1.0 - params.p) * params.alpha, params.p) {
            Position::Above => (ExpansionBranch::KDominant, k, big_k),
            Position::Equal => (ExpansionBranch::Resonant, k, big_k + big_m),
            Position::Below => (ExpansionBranch::MDominant, rate_m, big_m),
        };
    Ok(ExpansionConstants {
        k,
        big_k,
        big_m,
        branch,
        leading_rate,
        leading_coeff,
    })
}

/// Structural section of the parameter plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Section {
    /// `(2 - p) alpha < p`: decaying tails are possible.
    S3,
    /// `p < 2` and `alpha >= delta`: the linear term dominates every tail.
    S4,
}

/// Absorption strength relative to the thresholds `q1` and `q*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QBand {
    AtMostQ1,
    BetweenQ1AndQStar,
    AtLeastQStar,
}

/// Position of `alpha` relative to each organising threshold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AlphaBand {
    pub vs_delta: Position,
    pub vs_eta: Position,
    pub vs_n: Position,
    /// Present iff `alpha*` is defined (`p2 < p < 2`).
    pub vs_alpha_star: Option<Position>,
    /// Position relative to `(N - 1) p' / 2`.
    pub vs_half_np: Position,
}

/// Qualitative classification of a parameter set: section, absorption
/// band, rate band, and coarse predictions about profile behaviour.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Regime {
    pub section: Section,
    pub q_band: QBand,
    pub alpha_band: AlphaBand,
    /// Every profile with `a > 0` stays positive (sufficient conditions).
    pub positivity_guaranteed: bool,
    /// Every profile has at least one isolated zero (sufficient
    /// conditions: `p1 < p` and `N <= alpha`).
    pub zero_guaranteed: bool,
    /// Profiles are expected to oscillate forever: guaranteed in the
    /// section-S4 range `N <= delta <= alpha` (excluding
    /// `delta = N = alpha`), heuristic near the S3 boundary.
    pub oscillation_expected: bool,
}

/// Classify the parameter set into its regime.
pub fn classify_regime(params: &Params) -> Regime {
    let section = params.section();
    let d = params.delta();
    let q_band = match position(params.q, params.q1()) {
        Position::Below | Position::Equal => QBand::AtMostQ1,
        Position::Above => match position(params.q, params.q_star()) {
            Position::Above | Position::Equal => QBand::AtLeastQStar,
            Position::Below => QBand::BetweenQ1AndQStar,
        },
    };
    let alpha_band = AlphaBand {
        vs_delta: position(params.alpha, d),
        vs_eta: position(params.alpha, params.eta()),
        vs_n: position(params.alpha, params.n),
        vs_alpha_star: alpha_star(params).ok().map(|s| position(params.alpha, s)),
        vs_half_np: position(params.alpha, (params.n - 1.0) * params.p_prime() / 2.0),
    };

    let vs_p2 = position(params.p, params.p2());
    let q_ge_star = matches!(
        position(params.q, params.q_star()),
        Position::Above | Position::Equal
    );
    // Sufficient positivity conditions (all require section S3):
    // (i)  p2 < p, alpha <= N/2, q >= q*;
    // (ii) p <= p2;
    // (iii) p2 < p, N/2 < alpha < (N-1)p'/2, q >= q*_alpha.
    let alpha_vs_half_n = position(params.alpha, params.n / 2.0);
    let pos_i = vs_p2 == Position::Above && alpha_vs_half_n != Position::Above && q_ge_star;
    let pos_ii = vs_p2 != Position::Above;
    let pos_iii = vs_p2 == Position::Above
        && alpha_vs_half_n == Position::Above
        && q_star_alpha(params).is_some_and(|qsa| {
            matches!(position(params.q, qsa), Position::Above | Position::Equal)
        });
    let positivity_guaranteed = section == Section::S3 && (pos_i || pos_ii || pos_iii);

    let zero_guaranteed = position(params.p, params.p1()) == Position::Above
        && position(params.alpha, params.n) != Position::Below;

    let oscillation_expected = match section {
        Section::S4 => {
            let d_vs_n = position(d, params.n);
            let a_vs_d = position(params.alpha, d);
            // N <= delta <= alpha, excluding the corner delta = N = alpha.
            d_vs_n != Position::Below && !(d_vs_n == Position::Equal && a_vs_d == Position::Equal)
        }
        Section::S3 => {
            // Heuristic: close to the S4 boundary from below, above every
            // positivity threshold.
            position(params.p, 2.0) == Position::Below
                && params.alpha >= 0.95 * d
                && position(params.alpha, params.n) == Position::Above
                && alpha_star(params)
                    .map(|s| position(params.alpha, s) == Position::Above)
                    .unwrap_or(true)
        }
    };

    Regime {
        section,
        q_band,
        alpha_band,
        positivity_guaranteed,
        zero_guaranteed,
        oscillation_expected,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(n: f64, p: f64, q: f64, alpha: f64) -> Params {
        Params::new(n, p, q, alpha).unwrap()
    }

    #[test]
    fn validation_rejects_bad_fields() {
        assert_eq!(Params::new(0.5, 2.0, 3.0, 1.0).unwrap_err().field, "N");
        assert_eq!(Params::new(3.0, 1.0, 3.0, 1.0).unwrap_err().field, "p");
        assert_eq!(Params::new(3.0, 2.0, 1.0, 1.0).unwrap_err().field, "q");
        assert_eq!(Params::new(3.0, 2.0, 3.0, 0.0).unwrap_err().field, "alpha");
        assert_eq!(
            Params::new(3.0, f64::NAN, 3.0, 1.0).unwrap_err().field,
            "p"
        );
        assert!(Params::new(1.0, 1.5, 3.0, 0.6).is_ok());
    }

    #[test]
    fn exponents_heat_case() {
        // N = 3, p = 2, q = 3, alpha = 1
        let e = compute_exponents(&params(3.0, 2.0, 3.0, 1.0));
        assert_relative_eq!(e.p1, 1.5);
        assert_relative_eq!(e.p2, 1.2);
        assert_relative_eq!(e.q1, 5.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(e.q_star, 5.0);
        assert_eq!(e.delta, f64::INFINITY);
        assert_relative_eq!(e.eta, 1.0);
        assert_relative_eq!(e.alpha0, 1.0);
        assert_relative_eq!(e.beta0, 2.0);
        assert_relative_eq!(e.p_prime, 2.0);
        assert!(e.alpha_star.is_none());
        assert!(e.ell.is_none());
        assert!(e.varrho.is_none());
    }

    #[test]
    fn exponents_fast_diffusion_case() {
        // N = 1, p = 1.5, q = 3, alpha = 0.6
        let e = compute_exponents(&params(1.0, 1.5, 3.0, 0.6));
        assert_relative_eq!(e.p1, 1.0);
        assert_relative_eq!(e.p2, 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(e.q1, 2.0);
        assert_eq!(e.q_star, f64::INFINITY);
        assert_relative_eq!(e.delta, 3.0);
        assert_relative_eq!(e.eta, -1.0);
        assert_relative_eq!(e.alpha0, 0.6, max_relative = 1e-15);
        assert_relative_eq!(e.beta0, 1.2, max_relative = 1e-15);
        // ell = 25/12, alpha* = 0.6 (frozen closed-form values)
        assert_relative_eq!(e.ell.unwrap(), 25.0 / 12.0, max_relative = 1e-12);
        assert_relative_eq!(e.alpha_star.unwrap(), 0.6, max_relative = 1e-12);
        assert!(e.varrho.is_none());
    }

    #[test]
    fn ell_undefined_cases() {
        // p > 2: never defined, even though the sign product could look right.
        assert!(ell_constant(&params(3.0, 3.0, 4.0, 1.5)).is_err());
        // p = 2 sentinel: delta = +inf must not slip through the product.
        assert!(ell_constant(&params(3.0, 2.0, 3.0, 1.0)).is_err());
        // alpha above delta while N sits below it: product negative.
        assert!(ell_constant(&params(1.0, 1.5, 3.0, 3.5)).is_err());
        // delta below both N and alpha: both factors negative, so the
        // product is positive and ell exists: (sqrt(3) * (-2) / (-1))^2.
        let e = ell_constant(&params(5.0, 1.5, 3.0, 4.0)).unwrap();
        assert_relative_eq!(e, 12.0, max_relative = 1e-12);
    }

    #[test]
    fn alpha_star_values() {
        assert_relative_eq!(
            alpha_star(&params(1.0, 1.5, 3.0, 1.0)).unwrap(),
            0.6,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            alpha_star(&params(3.0, 1.5, 3.0, 1.0)).unwrap(),
            3.0,
            max_relative = 1e-12
        );
        // frozen: alpha*(N=2, p=1.6) = 16/9
        assert_relative_eq!(
            alpha_star(&params(2.0, 1.6, 3.0, 1.0)).unwrap(),
            16.0 / 9.0,
            max_relative = 1e-12
        );
        assert!(alpha_star(&params(3.0, 2.0, 3.0, 1.0)).is_err());
        assert!(alpha_star(&params(3.0, 1.1, 3.0, 1.0)).is_err());
    }

    #[test]
    fn varrho_values() {
        // p1(2) = 4/3; frozen: varrho(2, alpha=1) = 1/2,
        // varrho(2, alpha=1.5) = sqrt(2), varrho(3, alpha=1) = 3/4.
        assert_relative_eq!(
            varrho_constant(&params(2.0, 4.0 / 3.0, 3.0, 1.0)).unwrap(),
            0.5,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            varrho_constant(&params(2.0, 4.0 / 3.0, 3.0, 1.5)).unwrap(),
            std::f64::consts::SQRT_2,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            varrho_constant(&params(3.0, 1.5, 3.0, 1.0)).unwrap(),
            0.75,
            max_relative = 1e-12
        );
        // off the critical p, or alpha >= N: undefined
        assert!(varrho_constant(&params(2.0, 1.5, 3.0, 1.0)).is_err());
        assert!(varrho_constant(&params(2.0, 4.0 / 3.0, 3.0, 2.0)).is_err());
    }

    #[test]
    fn eta_bar_value() {
        // frozen: eta_bar(N=3, p=1.4) = 0.3820186003550241
        let v = eta_bar_constant(&params(3.0, 1.4, 3.0, 7.0 / 3.0)).unwrap();
        assert_relative_eq!(v, 0.3820186003550241, max_relative = 1e-12);
        assert!(eta_bar_constant(&params(1.0, 1.5, 3.0, 3.0)).is_err()); // delta > N
    }

    #[test]
    fn q_star_alpha_values() {
        // frozen: q*_alpha(3, 2, 1.6) = 7; at alpha = 1.2, q*_alpha = 2.
        let p = params(3.0, 2.0, 5.0, 1.6);
        assert_relative_eq!(q_star_alpha(&p).unwrap(), 7.0, max_relative = 1e-12);
        let p = params(3.0, 2.0, 5.0, 1.2);
        assert_relative_eq!(q_star_alpha(&p).unwrap(), 2.0, max_relative = 1e-12);
        // boundary (N-1)p'/2 = 2 at (3,2): undefined at and above
        assert!(q_star_alpha(&params(3.0, 2.0, 5.0, 2.0)).is_none());
        assert!(q_star_alpha(&params(3.0, 2.0, 5.0, 2.5)).is_none());
        // N = 1: threshold is 0, never defined
        assert!(q_star_alpha(&params(1.0, 1.5, 3.0, 0.5)).is_none());
    }

    #[test]
    fn expansion_constants_cases() {
        // frozen: (3, 2, 3, 1, L=1) -> k=2, K=0, M=1/2, resonant branch
        let c = expansion_constants(&params(3.0, 2.0, 3.0, 1.0), 1.0).unwrap();
        assert_relative_eq!(c.k, 2.0);
        assert_relative_eq!(c.big_k, 0.0);
        assert_relative_eq!(c.big_m, 0.5);
        assert_eq!(c.branch, ExpansionBranch::Resonant);
        assert_relative_eq!(c.leading_coeff, 0.5);
        assert_relative_eq!(c.leading_rate, 2.0);

        // frozen: (1, 1.5, 3, 0.5, L=2) -> k=1.25, K=0.6, M=8, M-dominant
        let c = expansion_constants(&params(1.0, 1.5, 3.0, 0.5), 2.0).unwrap();
        assert_relative_eq!(c.k, 1.25);
        assert_relative_eq!(c.big_k, 0.6, max_relative = 1e-12);
        assert_relative_eq!(c.big_m, 8.0);
        assert_eq!(c.branch, ExpansionBranch::MDominant);
        assert_relative_eq!(c.leading_rate, 1.0); // alpha (q-1) = 0.5 * 2

        // frozen: (3, 2, 4, 1, L=1) -> K-dominant, M = 1/3
        let c = expansion_constants(&params(3.0, 2.0, 4.0, 1.0), 1.0).unwrap();
        assert_eq!(c.branch, ExpansionBranch::KDominant);
        assert_relative_eq!(c.big_m, 1.0 / 3.0, max_relative = 1e-15);

        assert!(expansion_constants(&params(3.0, 2.0, 3.0, 1.0), 0.0).is_err());
        assert!(expansion_constants(&params(3.0, 2.0, 3.0, 1.0), -1.0).is_err());
        // S4-type rates: (2-p) alpha >= p
        assert!(expansion_constants(&params(1.0, 1.5, 3.0, 3.5), 1.0).is_err());
    }

    #[test]
    fn section_split() {
        assert_eq!(params(3.0, 2.0, 3.0, 1.0).section(), Section::S3);
        assert_eq!(params(3.0, 3.0, 3.0, 10.0).section(), Section::S3);
        assert_eq!(params(1.0, 1.5, 3.0, 2.9).section(), Section::S3);
        assert_eq!(params(1.0, 1.5, 3.0, 3.0).section(), Section::S4); // closed at alpha = delta
        assert_eq!(params(1.0, 1.5, 3.0, 3.5).section(), Section::S4);
        assert_eq!(params(3.0, 1.4, 3.0, 7.0 / 3.0).section(), Section::S4);
    }

    #[test]
    fn regime_examples() {
        // (3, 2, 5, 1): positivity via branch (i) (p2 < p, alpha <= N/2, q >= q*)
        let r = classify_regime(&params(3.0, 2.0, 5.0, 1.0));
        assert_eq!(r.section, Section::S3);
        assert!(r.positivity_guaranteed);
        assert!(!r.zero_guaranteed);
        assert_eq!(r.q_band, QBand::AtLeastQStar);

        // (1, 1.5, 3, 2.9): zero guaranteed (p1 = 1 < p, alpha >= N = 1)
        let r = classify_regime(&params(1.0, 1.5, 3.0, 2.9));
        assert_eq!(r.section, Section::S3);
        assert!(r.zero_guaranteed);
        assert!(!r.positivity_guaranteed);

        // (1, 1.5, 3, 2.99): heuristic oscillation flag near the S4 boundary
        let r = classify_regime(&params(1.0, 1.5, 3.0, 2.99));
        assert!(r.oscillation_expected);

        // (1, 1.5, 3, 3.5): S4 with delta = 3 in [N, alpha] -> oscillation
        let r = classify_regime(&params(1.0, 1.5, 3.0, 3.5));
        assert_eq!(r.section, Section::S4);
        assert!(r.oscillation_expected);

        // (3, 1.4, 3, 7/3): S4 with delta = 7/3 < N = 3 -> no oscillation
        let r = classify_regime(&params(3.0, 1.4, 3.0, 7.0 / 3.0));
        assert_eq!(r.section, Section::S4);
        assert!(!r.oscillation_expected);
        assert_eq!(r.alpha_band.vs_delta, Position::Equal);

        // positivity branch (iii): (3, 2, 8, 1.6), q*_alpha = 7 <= 8
        let r = classify_regime(&params(3.0, 2.0, 8.0, 1.6));
        assert!(r.positivity_guaranteed);
        // same alpha but q below q*_alpha: not guaranteed
        let r = classify_regime(&params(3.0, 2.0, 6.0, 1.6));
        assert!(!r.positivity_guaranteed);
        // positivity branch (ii): p <= p2
        let r = classify_regime(&params(3.0, 1.1, 3.0, 0.5));
        assert!(r.positivity_guaranteed);
    }

    #[test]
    fn position_tolerances() {
        assert_eq!(position(1.0, 1.0 + 1e-15), Position::Equal);
        assert_eq!(position(1.0, 1.0 + 1e-9), Position::Below);
        assert_eq!(position(5.0, f64::INFINITY), Position::Below);
        assert_eq!(position(0.5, 0.0), Position::Above);
        // f64 arithmetic: 1.4/0.6 == 7/3 bit-for-bit, so alpha = 7/3 sits
        // exactly on delta for p = 1.4.
        assert_eq!(position(7.0 / 3.0, 1.4 / (2.0 - 1.4)), Position::Equal);
    }

    #[test]
    fn extended_serialization() {
        let e = compute_exponents(&params(3.0, 2.0, 3.0, 1.0));
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["q_star"], serde_json::json!(5.0));
        assert_eq!(json["delta"], serde_json::json!("inf"));
        assert!(json["ell"].is_null());
    }
}
