//! One function per subcommand: run the computation and render the
//! output document. All validation errors name the offending field; all
//! solver refusals surface as numerical errors.

use selfsim_core::classify::classify_decay;
use selfsim_core::energy::{diagnostic_sample, energy_e, lyapunov_w};
use selfsim_core::exponents::{compute_exponents, position, Position};
use selfsim_core::phase::{in_s, to_phase_d};
use selfsim_core::profile::{solve_profile, Termination, Trajectory};
use selfsim_core::selfsim::SelfSimilarSolution;
use selfsim_core::shooting::{
    bisect_fast_decay, find_min_zero_threshold, sweep_grid, sweep_initial_values,
};
use selfsim_core::DecayClass;

use crate::config::{CliError, EffectiveConfig};
use crate::output::{csv_document, fmt_f64, json_document};

fn to_json<T: serde::Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("core types serialize")
}

fn termination_footer(t: &Termination) -> String {
    match t {
        Termination::ReachedRmax => "# termination: reached_rmax".to_string(),
        Termination::CompactSupport { r_support } => {
            format!("# termination: compact_support r_support={}", fmt_f64(*r_support))
        }
        Termination::StepFailure { r } => {
            format!("# termination: step_failure r={}", fmt_f64(*r))
        }
    }
}

fn zero_footers(traj: &Trajectory) -> Vec<String> {
    traj.zeros
        .iter()
        .map(|c| {
            let dir = if c.dir >= 0 { "+1" } else { "-1" };
            format!("# zero r={} dir={}", fmt_f64(c.r), dir)
        })
        .collect()
}

/// `constants`: the exponent table as JSON.
pub fn run_constants(config: &EffectiveConfig) -> Result<String, CliError> {
    let exponents = compute_exponents(&config.params);
    Ok(json_document(
        config,
        vec![("exponents", to_json(&exponents))],
    ))
}

/// `integrate`: the radial trajectory as CSV `r,w,wprime,z,E` with zero
/// and termination footers.
pub fn run_integrate(config: &EffectiveConfig, a: f64) -> Result<String, CliError> {
    let params = &config.params;
    let sol = solve_profile(a, params, &config.controls)?;
    let rows = sol
        .traj
        .samples
        .iter()
        .map(|s| {
            format!(
                "{},{},{},{},{}",
                fmt_f64(s.r),
                fmt_f64(s.w),
                fmt_f64(s.wprime(params)),
                fmt_f64(s.z),
                fmt_f64(energy_e(s, params))
            )
        })
        .collect();
    let mut footers = zero_footers(&sol.traj);
    footers.push(termination_footer(&sol.traj.termination));
    Ok(csv_document(config, "r,w,wprime,z,E", rows, footers))
}

/// `phase`: the trajectory mapped to the log plane at rate `d`, as CSV
/// `tau,y,Y,W,in_S`. `W` is defined only on the natural rate (`p < 2`,
/// `d = delta`); `in_S` whenever `p < 2`. Undefined cells render as
/// `NaN` / `false`.
pub fn run_phase(config: &EffectiveConfig, a: f64, d: f64) -> Result<String, CliError> {
    let params = &config.params;
    let sol = solve_profile(a, params, &config.controls)?;
    let fast_diffusion = position(params.p, 2.0) == Position::Below;
    let natural_rate =
        fast_diffusion && (d - params.delta()).abs() <= 1e-9 * params.delta().max(1.0);
    let mut rows = Vec::with_capacity(sol.traj.samples.len());
    for s in &sol.traj.samples {
        let ps = to_phase_d(s, params, d);
        let w = if natural_rate {
            lyapunov_w(&ps, params)
                .map(|l| l.w)
                .unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        let inside = if fast_diffusion {
            in_s(ps.y, ps.yy, params).unwrap_or(false)
        } else {
            false
        };
        rows.push(format!(
            "{},{},{},{},{}",
            fmt_f64(ps.tau),
            fmt_f64(ps.y),
            fmt_f64(ps.yy),
            fmt_f64(w),
            inside
        ));
    }
    let footers = vec![termination_footer(&sol.traj.termination)];
    Ok(csv_document(config, "tau,y,Y,W,in_S", rows, footers))
}

/// `diagnose`: energy and moment diagnostics per accepted step, as CSV
/// `r,E,J_N,J_alpha,V,W,U,in_S`. The `V` column uses the configured
/// numeric weights `(lambda, sigma, e)`.
pub fn run_diagnose(
    config: &EffectiveConfig,
    a: f64,
    weights: (f64, f64, f64),
) -> Result<String, CliError> {
    let params = &config.params;
    let sol = solve_profile(a, params, &config.controls)?;
    let rows = sol
        .traj
        .samples
        .iter()
        .map(|s| {
            let d = diagnostic_sample(s, params, weights);
            format!(
                "{},{},{},{},{},{},{},{}",
                fmt_f64(d.r),
                fmt_f64(d.e),
                fmt_f64(d.j_n),
                fmt_f64(d.j_alpha),
                fmt_f64(d.v),
                fmt_f64(d.w_lyap),
                fmt_f64(d.u),
                d.in_s
            )
        })
        .collect();
    let footers = vec![termination_footer(&sol.traj.termination)];
    Ok(csv_document(
        config,
        "r,E,J_N,J_alpha,V,W,U,in_S",
        rows,
        footers,
    ))
}

/// `classify`: the decay report as JSON. With `strict`, an undetermined
/// class is a numerical failure.
pub fn run_classify(config: &EffectiveConfig, a: f64, strict: bool) -> Result<String, CliError> {
    let report = classify_decay(a, &config.params, &config.controls)?;
    if strict && report.class == DecayClass::Undetermined {
        return Err(CliError::numerical(format!(
            "class is undetermined at a = {} but strict mode requires a determinate class",
            fmt_f64(a)
        )));
    }
    Ok(json_document(config, vec![("report", to_json(&report))]))
}

/// `sweep`: classify a grid of initial heights, as CSV
/// `a,L,L_err,n_zeros,class`. Cells without an amplitude estimate are
/// empty.
pub fn run_sweep(
    config: &EffectiveConfig,
    a_min: f64,
    a_max: f64,
    steps: usize,
    log_spaced: bool,
) -> Result<String, CliError> {
    let grid = sweep_grid(a_min, a_max, steps, log_spaced);
    let rows = sweep_initial_values(&config.params, &grid, &config.controls);
    let lines = rows
        .iter()
        .map(|row| {
            let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
            format!(
                "{},{},{},{},{}",
                fmt_f64(row.a),
                opt(row.l),
                opt(row.l_err),
                row.n_zeros,
                row.class
            )
        })
        .collect();
    Ok(csv_document(
        config,
        "a,L,L_err,n_zeros,class",
        lines,
        Vec::new(),
    ))
}

/// `find-fast`: bisect the positivity boundary, as JSON with the final
/// bracket, the full bracket history, and the classification at the
/// boundary.
pub fn run_find_fast(
    config: &EffectiveConfig,
    a_lo: f64,
    a_hi: f64,
    tol: f64,
) -> Result<String, CliError> {
    let result = bisect_fast_decay(&config.params, a_lo, a_hi, tol, &config.controls)?;
    Ok(json_document(
        config,
        vec![
            ("class", to_json(&result.report.class)),
            ("result", to_json(&result)),
        ],
    ))
}

/// `find-zeros`: smallest initial height whose profile has at least
/// `m + 1` zeros, as JSON with the scan and the classification just
/// below the threshold.
pub fn run_find_zeros(config: &EffectiveConfig, m: usize, a_max: f64) -> Result<String, CliError> {
    let result = find_min_zero_threshold(&config.params, m, a_max, &config.controls)?;
    Ok(json_document(
        config,
        vec![
            ("class", to_json(&result.report.class)),
            ("result", to_json(&result)),
        ],
    ))
}

/// `reconstruct`: the space-time solution on a `(t, x)` grid, as CSV
/// `t,x,u`. When a norm order `s` is configured, one footer per time
/// reports the scaled Lebesgue norm.
pub fn run_reconstruct(
    config: &EffectiveConfig,
    a: f64,
    times: &[f64],
    x_min: f64,
    x_max: f64,
    x_steps: usize,
    s_order: Option<f64>,
) -> Result<String, CliError> {
    let sol = SelfSimilarSolution::build(a, &config.params, &config.controls)?;
    let mut rows = Vec::with_capacity(times.len() * x_steps);
    for &t in times {
        for i in 0..x_steps {
            let x = if x_steps <= 1 {
                x_min
            } else {
                x_min + (x_max - x_min) * i as f64 / (x_steps - 1) as f64
            };
            let u = sol.reconstruct_u(t, x)?;
            rows.push(format!("{},{},{}", fmt_f64(t), fmt_f64(x), fmt_f64(u)));
        }
    }
    let mut footers = Vec::new();
    if let Some(s) = s_order {
        for &t in times {
            let value = sol.norm_scaling(s, t)?;
            footers.push(format!(
                "# norm s={} t={} value={}",
                fmt_f64(s),
                fmt_f64(t),
                fmt_f64(value)
            ));
        }
    }
    Ok(csv_document(config, "t,x,u", rows, footers))
}

/// Shared validation for the sweep grid fields.
pub fn validate_sweep_grid(
    a_min: f64,
    a_max: f64,
    steps: usize,
    log_spaced: bool,
) -> Result<(), CliError> {
    crate::config::finite(a_min, "a_min")?;
    crate::config::finite(a_max, "a_max")?;
    if a_max < a_min {
        return Err(CliError::invalid(
            "a_max",
            format!("a_max must be >= a_min (got {a_max} < {a_min})"),
        ));
    }
    if steps == 0 {
        return Err(CliError::invalid("steps", "steps must be at least 1"));
    }
    if log_spaced && !(a_min > 0.0) {
        return Err(CliError::invalid(
            "a_min",
            "log-spaced grids need a_min > 0",
        ));
    }
    Ok(())
}

/// Shared validation for the reconstruction grid fields.
pub fn validate_reconstruct_grid(
    times: &[f64],
    x_min: f64,
    x_max: f64,
    x_steps: usize,
) -> Result<(), CliError> {
    if times.is_empty() {
        return Err(CliError::invalid("t", "at least one time is required"));
    }
    for &t in times {
        if !(t > 0.0) || !t.is_finite() {
            return Err(CliError::invalid(
                "t",
                format!("times must be finite numbers > 0 (got {t})"),
            ));
        }
    }
    crate::config::finite(x_min, "x_min")?;
    crate::config::finite(x_max, "x_max")?;
    if x_min < 0.0 {
        return Err(CliError::invalid(
            "x_min",
            format!("x_min is a radius and must be >= 0 (got {x_min})"),
        ));
    }
    if x_max < x_min {
        return Err(CliError::invalid(
            "x_max",
            format!("x_max must be >= x_min (got {x_max} < {x_min})"),
        ));
    }
    if x_steps == 0 {
        return Err(CliError::invalid("x_steps", "x_steps must be at least 1"));
    }
    Ok(())
}
