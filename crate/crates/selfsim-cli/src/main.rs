//! `selfsim` — command-line front end for the radial-profile solver.
//!
//! Nine subcommands: `constants`, `integrate`, `phase`, `diagnose`,
//! `classify`, `sweep`, `find-fast`, `find-zeros`, `reconstruct`.
//! Configuration comes from flags and/or a JSON config file (flags
//! win). Documents embed the effective configuration and a format
//! version, and are byte-identical across runs and thread counts.
//! Exit codes: 0 success, 1 numerical failure, 2 invalid configuration
//! (with a machine-readable JSON error on standard error).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{
    finite, merge, require, resolve_controls, resolve_params, CliError, EffectiveConfig,
    FileConfig, OutputFormat, RateSpec,
};
use selfsim_core::{IntegratorControls, Params};

#[derive(Debug, Parser)]
#[command(
    name = "selfsim",
    version,
    about = "Radial profiles of a diffusion-absorption equation: solve, classify, and reconstruct"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand: config file, problem parameters,
/// integrator controls, and output routing.
#[derive(Debug, Clone, Args)]
struct CommonOpts {
    /// JSON config file mirroring the embedded run configuration;
    /// explicit flags override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Spatial dimension N >= 1 (real).
    #[arg(long = "N", value_name = "REAL", allow_hyphen_values = true)]
    n: Option<f64>,
    /// Diffusion exponent p > 1.
    #[arg(long, value_name = "REAL", allow_hyphen_values = true)]
    p: Option<f64>,
    /// Absorption exponent q > 1.
    #[arg(long, value_name = "REAL", allow_hyphen_values = true)]
    q: Option<f64>,
    /// Linear rate alpha > 0.
    #[arg(long, value_name = "REAL", allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Startup radius (default: chosen from a).
    #[arg(long, value_name = "REAL")]
    r0: Option<f64>,
    /// Relative step tolerance (default 1e-9).
    #[arg(long, value_name = "REAL")]
    rel_tol: Option<f64>,
    /// Absolute step tolerance (default 1e-12).
    #[arg(long, value_name = "REAL")]
    abs_tol: Option<f64>,
    /// Radial horizon (default 1e3).
    #[arg(long, value_name = "REAL")]
    r_max: Option<f64>,
    /// Work bound on accepted + rejected steps (default 4000000).
    #[arg(long, value_name = "INT")]
    max_steps: Option<usize>,
    /// Relative width of zero refinement (default 1e-9).
    #[arg(long, value_name = "REAL")]
    event_tol: Option<f64>,
    /// Compact-support stopping gate, p > 2 only (default 1e-5).
    #[arg(long, value_name = "REAL")]
    support_tol: Option<f64>,
    /// Write the document to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Output format; each command has a fixed one (tables: csv,
    /// summaries: json), so this is a consistency check.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the critical exponents and closed-form constants as JSON.
    Constants {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Integrate the radial profile; CSV `r,w,wprime,z,E` with zero and
    /// termination footers.
    Integrate {
        #[command(flatten)]
        common: CommonOpts,
        /// Initial height w(0) = a (nonzero).
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
    },
    /// Map the run into the logarithmic phase plane; CSV `tau,y,Y,W,in_S`.
    Phase {
        #[command(flatten)]
        common: CommonOpts,
        /// Initial height w(0) = a (nonzero).
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        /// Substitution rate: delta | eta | alpha | N | <number>
        /// (default delta).
        #[arg(long, value_parser = RateSpec::parse, allow_hyphen_values = true)]
        d: Option<RateSpec>,
    },
    /// Energy and moment diagnostics per step; CSV
    /// `r,E,J_N,J_alpha,V,W,U,in_S`.
    Diagnose {
        #[command(flatten)]
        common: CommonOpts,
        /// Initial height w(0) = a (nonzero).
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        /// Weight lambda of the V column, numeric only (default 0).
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        /// Weight sigma of the V column, numeric only (default 0).
        #[arg(long, allow_hyphen_values = true)]
        sigma: Option<f64>,
        /// Weight e of the V column, numeric only (default alpha, which
        /// makes V coincide with the energy E).
        #[arg(long, allow_hyphen_values = true)]
        e: Option<f64>,
    },
    /// Solve one initial height and print the decay report as JSON.
    Classify {
        #[command(flatten)]
        common: CommonOpts,
        /// Initial height w(0) = a (nonzero).
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        /// Fail (exit 1) when the class comes back undetermined.
        #[arg(long)]
        strict: bool,
    },
    /// Classify a grid of initial heights; CSV `a,L,L_err,n_zeros,class`.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Smallest initial height (default 0.1).
        #[arg(long, allow_hyphen_values = true)]
        a_min: Option<f64>,
        /// Largest initial height (default 10).
        #[arg(long, allow_hyphen_values = true)]
        a_max: Option<f64>,
        /// Number of grid points, endpoints included (default 100).
        #[arg(long)]
        steps: Option<usize>,
        /// Logarithmic grid spacing (requires a_min > 0).
        #[arg(long)]
        log_spaced: bool,
    },
    /// Bisect the positivity boundary of the initial height; JSON
    /// summary with the full bracket history.
    FindFast {
        #[command(flatten)]
        common: CommonOpts,
        /// Lower bracket end (profile stays positive there).
        #[arg(long, allow_hyphen_values = true)]
        a_lo: Option<f64>,
        /// Upper bracket end (profile changes sign there).
        #[arg(long, allow_hyphen_values = true)]
        a_hi: Option<f64>,
        /// Final bracket width (default 1e-8).
        #[arg(long, allow_hyphen_values = true)]
        tol: Option<f64>,
    },
    /// Find the smallest initial height whose profile has at least m+1
    /// zeros; JSON summary with the scan.
    FindZeros {
        #[command(flatten)]
        common: CommonOpts,
        /// Target zero count m (default 0).
        #[arg(long)]
        m: Option<usize>,
        /// Search ceiling on a (default 10).
        #[arg(long)]
        a_max: Option<f64>,
    },
    /// Evaluate the space-time solution u(t, x) on a grid; CSV `t,x,u`.
    Reconstruct {
        #[command(flatten)]
        common: CommonOpts,
        /// Initial height w(0) = a (nonzero).
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        /// Times t > 0, comma-separated or repeated (default 1).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t: Option<Vec<f64>>,
        /// Smallest radius |x| (default 0).
        #[arg(long, allow_hyphen_values = true)]
        x_min: Option<f64>,
        /// Largest radius |x| (default 10).
        #[arg(long, allow_hyphen_values = true)]
        x_max: Option<f64>,
        /// Number of radii, endpoints included (default 101).
        #[arg(long)]
        x_steps: Option<usize>,
        /// Also report the order-s Lebesgue norm of u(t) as footer
        /// lines (s >= 1).
        #[arg(long)]
        s: Option<f64>,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_stderr_json());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run() -> Result<(), CliError> {
    let cli = parse_argv()?;
    init_thread_pool()?;
    let (document, output) = dispatch(cli.command)?;
    match output {
        Some(path) => std::fs::write(&path, document.as_bytes())?,
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(document.as_bytes())?;
        }
    }
    Ok(())
}

/// Parse the command line, mapping clap errors to the machine-readable
/// invalid-config discipline. Help and version print normally.
fn parse_argv() -> Result<Cli, CliError> {
    Cli::try_parse().map_err(|err| {
        use clap::error::{ContextKind, ErrorKind};
        if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            let _ = err.print();
            std::process::exit(0);
        }
        let field = err
            .get(ContextKind::InvalidArg)
            .map(|v| {
                v.to_string()
                    .trim_start_matches('-')
                    .split([' ', '='])
                    .next()
                    .unwrap_or("argv")
                    .to_string()
            })
            .unwrap_or_else(|| "argv".to_string());
        CliError::invalid(field, err.to_string())
    })
}

/// Apply `SELFSIM_THREADS` (a cap on sweep parallelism) to the global
/// thread pool before any parallel work starts.
fn init_thread_pool() -> Result<(), CliError> {
    let text = match std::env::var("SELFSIM_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(CliError::invalid("SELFSIM_THREADS", e.to_string())),
        Ok(text) => text,
    };
    let threads: usize = text.trim().parse().map_err(|_| {
        CliError::invalid(
            "SELFSIM_THREADS",
            format!("expected a positive integer (got {text:?})"),
        )
    })?;
    if threads == 0 {
        return Err(CliError::invalid(
            "SELFSIM_THREADS",
            "expected a positive integer (got 0)",
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::numerical(format!("thread pool: {e}")))
}

/// Common inputs after merging flags with the config file.
struct Resolved {
    params: Params,
    controls: IntegratorControls,
    file: FileConfig,
    output: Option<PathBuf>,
    format: OutputFormat,
}

fn resolve_common(common: &CommonOpts, natural: OutputFormat) -> Result<Resolved, CliError> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let params = resolve_params(common.n, common.p, common.q, common.alpha, file.params.as_ref())?;
    let controls = resolve_controls(
        common.r0,
        common.rel_tol,
        common.abs_tol,
        common.r_max,
        common.max_steps,
        common.event_tol,
        common.support_tol,
        file.controls.as_ref(),
    )?;
    let format = merge(common.format, file.format).unwrap_or(natural);
    if format != natural {
        return Err(CliError::invalid(
            "format",
            format!("this command emits {natural} (got {format})"),
        ));
    }
    let output = common.output.clone().or_else(|| file.output.clone());
    Ok(Resolved {
        params,
        controls,
        file,
        output,
        format,
    })
}

impl Resolved {
    fn effective(&self, command: &'static str) -> EffectiveConfig {
        EffectiveConfig::new(
            command,
            self.format,
            self.params,
            self.controls,
            self.output.as_deref(),
        )
    }
}

fn dispatch(command: Command) -> Result<(String, Option<PathBuf>), CliError> {
    match command {
        Command::Constants { common } => {
            let r = resolve_common(&common, OutputFormat::Json)?;
            let cfg = r.effective("constants");
            Ok((commands::run_constants(&cfg)?, r.output))
        }
        Command::Integrate { common, a } => {
            let r = resolve_common(&common, OutputFormat::Csv)?;
            let a = finite(require(merge(a, r.file.a), "a")?, "a")?;
            let mut cfg = r.effective("integrate");
            cfg.a = Some(a);
            Ok((commands::run_integrate(&cfg, a)?, r.output))
        }
        Command::Phase { common, a, d } => {
            let r = resolve_common(&common, OutputFormat::Csv)?;
            let a = finite(require(merge(a, r.file.a), "a")?, "a")?;
            let rate = merge(d, r.file.d).unwrap_or(RateSpec::Delta);
            let d = rate.resolve(&r.params)?;
            let mut cfg = r.effective("phase");
            cfg.a = Some(a);
            cfg.d = Some(d);
            Ok((commands::run_phase(&cfg, a, d)?, r.output))
        }
        Command::Diagnose {
            common,
            a,
            lambda,
            sigma,
            e,
        } => {
            let r = resolve_common(&common, OutputFormat::Csv)?;
            let a = finite(require(merge(a, r.file.a), "a")?, "a")?;
            let lambda = finite(merge(lambda, r.file.lambda).unwrap_or(0.0), "lambda")?;
            let sigma = finite(merge(sigma, r.file.sigma).unwrap_or(0.0), "sigma")?;
            let e = finite(merge(e, r.file.e).unwrap_or(r.params.alpha), "e")?;
            let mut cfg = r.effective("diagnose");
            cfg.a = Some(a);
            cfg.lambda = Some(lambda);
            cfg.sigma = Some(sigma);
            cfg.e = Some(e);
            Ok((commands::run_diagnose(&cfg, a, (lambda, sigma, e))?, r.output))
        }
        Command::Classify { common, a, strict } => {
            let r = resolve_common(&common, OutputFormat::Json)?;
            let a = finite(require(merge(a, r.file.a), "a")?, "a")?;
            let strict = strict || r.file.strict.unwrap_or(false);
            let mut cfg = r.effective("classify");
            cfg.a = Some(a);
            cfg.strict = Some(strict);
            Ok((commands::run_classify(&cfg, a, strict)?, r.output))
        }
        Command::Sweep {
            common,
            a_min,
            a_max,
            steps,
            log_spaced,
        } => {
            let r = resolve_common(&common, OutputFormat::Csv)?;
            let a_min = merge(a_min, r.file.a_min).unwrap_or(0.1);
            let a_max = merge(a_max, r.file.a_max).unwrap_or(10.0);
            let steps = merge(steps, r.file.steps).unwrap_or(100);
            let log_spaced = log_spaced || r.file.log_spaced.unwrap_or(false);
            commands::validate_sweep_grid(a_min, a_max, steps, log_spaced)?;
            let mut cfg = r.effective("sweep");
            cfg.a_min = Some(a_min);
            cfg.a_max = Some(a_max);
            cfg.steps = Some(steps);
            cfg.log_spaced = Some(log_spaced);
            Ok((
                commands::run_sweep(&cfg, a_min, a_max, steps, log_spaced)?,
                r.output,
            ))
        }
        Command::FindFast {
            common,
            a_lo,
            a_hi,
            tol,
        } => {
            let r = resolve_common(&common, OutputFormat::Json)?;
            let a_lo = finite(require(merge(a_lo, r.file.a_lo), "a_lo")?, "a_lo")?;
            let a_hi = finite(require(merge(a_hi, r.file.a_hi), "a_hi")?, "a_hi")?;
            let tol = finite(merge(tol, r.file.tol).unwrap_or(1e-8), "tol")?;
            let mut cfg = r.effective("find-fast");
            cfg.a_lo = Some(a_lo);
            cfg.a_hi = Some(a_hi);
            cfg.tol = Some(tol);
            Ok((commands::run_find_fast(&cfg, a_lo, a_hi, tol)?, r.output))
        }
        Command::FindZeros { common, m, a_max } => {
            let r = resolve_common(&common, OutputFormat::Json)?;
            let m = merge(m, r.file.m).unwrap_or(0);
            let a_max = finite(merge(a_max, r.file.a_max).unwrap_or(10.0), "a_max")?;
            let mut cfg = r.effective("find-zeros");
            cfg.m = Some(m);
            cfg.a_max = Some(a_max);
            Ok((commands::run_find_zeros(&cfg, m, a_max)?, r.output))
        }
        Command::Reconstruct {
            common,
            a,
            t,
            x_min,
            x_max,
            x_steps,
            s,
        } => {
            let r = resolve_common(&common, OutputFormat::Csv)?;
            let a = finite(require(merge(a, r.file.a), "a")?, "a")?;
            let times = t.or_else(|| r.file.t.clone()).unwrap_or_else(|| vec![1.0]);
            let x_min = merge(x_min, r.file.x_min).unwrap_or(0.0);
            let x_max = merge(x_max, r.file.x_max).unwrap_or(10.0);
            let x_steps = merge(x_steps, r.file.x_steps).unwrap_or(101);
            let s = merge(s, r.file.s);
            commands::validate_reconstruct_grid(&times, x_min, x_max, x_steps)?;
            let mut cfg = r.effective("reconstruct");
            cfg.a = Some(a);
            cfg.t = Some(times.clone());
            cfg.x_min = Some(x_min);
            cfg.x_max = Some(x_max);
            cfg.x_steps = Some(x_steps);
            cfg.s = s;
            Ok((
                commands::run_reconstruct(&cfg, a, &times, x_min, x_max, x_steps, s)?,
                r.output,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
