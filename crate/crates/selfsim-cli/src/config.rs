//! Run configuration: the JSON config-file mirror, flag merging, field
//! validation, and the effective (fully resolved) configuration that
//! every output document embeds.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize, Serializer};
use selfsim_core::classify::ClassifyError;
use selfsim_core::exponents::InvalidParam;
use selfsim_core::profile::ProfileError;
use selfsim_core::selfsim::SelfSimError;
use selfsim_core::shooting::ShootError;
use selfsim_core::{IntegratorControls, Params};

/// Exit disciplines: invalid configuration (exit 2), numerical failure
/// (exit 1), and I/O failure (exit 1). Every variant renders as a
/// single-line JSON object on standard error.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Invalid { field: String, message: String },
    Numerical { message: String },
    Io { message: String },
}

impl CliError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError::Numerical {
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid { .. } => 2,
            CliError::Numerical { .. } | CliError::Io { .. } => 1,
        }
    }

    /// Machine-readable single-line JSON for standard error.
    pub fn to_stderr_json(&self) -> String {
        let value = match self {
            CliError::Invalid { field, message } => serde_json::json!({
                "error": "invalid_config",
                "field": field,
                "message": message,
            }),
            CliError::Numerical { message } => serde_json::json!({
                "error": "numerical",
                "message": message,
            }),
            CliError::Io { message } => serde_json::json!({
                "error": "io",
                "message": message,
            }),
        };
        serde_json::to_string(&value).expect("plain strings always serialize")
    }
}

impl From<InvalidParam> for CliError {
    fn from(e: InvalidParam) -> Self {
        CliError::Invalid {
            field: e.field.to_string(),
            message: e.to_string(),
        }
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::InvalidControls(ip) => ip.into(),
            ProfileError::TrivialInitial { .. } => CliError::invalid("a", e.to_string()),
            ProfileError::InvalidStartup { .. } => CliError::invalid("r0", e.to_string()),
            other => CliError::numerical(other.to_string()),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::Profile(p) => p.into(),
            other => CliError::numerical(other.to_string()),
        }
    }
}

impl From<ShootError> for CliError {
    fn from(e: ShootError) -> Self {
        match e {
            ShootError::BadBracket { a_lo, .. } => {
                let field = if !(a_lo > 0.0) { "a_lo" } else { "a_hi" };
                CliError::invalid(field, e.to_string())
            }
            ShootError::BadTol { .. } => CliError::invalid("tol", e.to_string()),
            ShootError::Classify(c) => c.into(),
            ShootError::Profile(p) => p.into(),
            other => CliError::numerical(other.to_string()),
        }
    }
}

impl From<SelfSimError> for CliError {
    fn from(e: SelfSimError) -> Self {
        match e {
            SelfSimError::AlphaMismatch { .. } => CliError::invalid("alpha", e.to_string()),
            SelfSimError::BadTime { .. } => CliError::invalid("t", e.to_string()),
            SelfSimError::BadOrder { .. } => CliError::invalid("s", e.to_string()),
            SelfSimError::Profile(p) => p.into(),
            SelfSimError::Classify(c) => c.into(),
            other => CliError::numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io {
            message: e.to_string(),
        }
    }
}

/// Output serialization format. Each command has a fixed natural format
/// (tables are CSV, summaries are JSON); passing the other one is a
/// configuration error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

/// Phase-substitution rate: one of the named exponents or a user value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSpec {
    Delta,
    Eta,
    Alpha,
    DimN,
    User(f64),
}

impl RateSpec {
    /// Accepts `delta`, `eta`, `alpha`, `N`, or a decimal number.
    pub fn parse(text: &str) -> Result<Self, String> {
        match text.trim() {
            "delta" => Ok(RateSpec::Delta),
            "eta" => Ok(RateSpec::Eta),
            "alpha" => Ok(RateSpec::Alpha),
            "N" => Ok(RateSpec::DimN),
            other => other.parse::<f64>().map(RateSpec::User).map_err(|_| {
                format!("expected one of delta, eta, alpha, N, or a number (got {other:?})")
            }),
        }
    }

    /// The numeric rate for a given parameter set. Fails when the named
    /// exponent is not finite there (`delta` at `p >= 2`) or a user
    /// value is not finite.
    pub fn resolve(&self, params: &Params) -> Result<f64, CliError> {
        let d = match self {
            RateSpec::Delta => params.delta(),
            RateSpec::Eta => params.eta(),
            RateSpec::Alpha => params.alpha,
            RateSpec::DimN => params.n,
            RateSpec::User(v) => *v,
        };
        if d.is_finite() {
            Ok(d)
        } else {
            Err(CliError::invalid(
                "d",
                format!("rate {self} is not finite for these parameters (got {d})"),
            ))
        }
    }
}

impl fmt::Display for RateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateSpec::Delta => f.write_str("delta"),
            RateSpec::Eta => f.write_str("eta"),
            RateSpec::Alpha => f.write_str("alpha"),
            RateSpec::DimN => f.write_str("N"),
            RateSpec::User(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for RateSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RateSpec::User(v) => s.serialize_f64(*v),
            named => s.serialize_str(&named.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for RateSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(RateSpec::User(v)),
            Raw::Name(s) => RateSpec::parse(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Partial parameter set from a config file; command-line flags override
/// member-wise.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsPatch {
    #[serde(rename = "N")]
    pub n: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub alpha: Option<f64>,
}

/// Partial integrator controls from a config file; missing fields fall
/// back to the defaults after flag overrides.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlsPatch {
    pub r0: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub r_max: Option<f64>,
    pub max_steps: Option<usize>,
    pub event_tol: Option<f64>,
    pub support_tol: Option<f64>,
}

/// The JSON config-file schema: every run-configuration field, all
/// optional. Field names mirror the effective configuration embedded in
/// outputs, so an embedded config is itself a valid config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    /// Accepted and ignored: embedded configs carry the command name.
    pub command: Option<String>,
    /// Accepted and ignored: embedded configs carry the format version.
    pub format_version: Option<u32>,
    pub params: Option<ParamsPatch>,
    pub controls: Option<ControlsPatch>,
    pub a: Option<f64>,
    pub d: Option<RateSpec>,
    pub lambda: Option<f64>,
    pub sigma: Option<f64>,
    pub e: Option<f64>,
    pub strict: Option<bool>,
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub steps: Option<usize>,
    pub log_spaced: Option<bool>,
    pub a_lo: Option<f64>,
    pub a_hi: Option<f64>,
    pub tol: Option<f64>,
    pub m: Option<usize>,
    pub s: Option<f64>,
    pub t: Option<Vec<f64>>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub x_steps: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl FileConfig {
    /// Load and parse a config file; errors name the `config` field (or
    /// quote the offending key, via the parser message).
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::invalid("config", format!("cannot read {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::invalid("config", format!("invalid config {}: {e}", path.display()))
        })
    }
}

/// The fully resolved run configuration. Every output document embeds
/// one, and feeding it back through `--config` reproduces the run.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveConfig {
    pub command: &'static str,
    pub format: OutputFormat,
    pub params: Params,
    pub controls: IntegratorControls,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_spaced: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_steps: Option<usize>,
}

impl EffectiveConfig {
    /// A bare configuration with every command-specific field unset.
    pub fn new(
        command: &'static str,
        format: OutputFormat,
        params: Params,
        controls: IntegratorControls,
        output: Option<&Path>,
    ) -> Self {
        EffectiveConfig {
            command,
            format,
            params,
            controls,
            output: output.map(|p| p.display().to_string()),
            a: None,
            d: None,
            lambda: None,
            sigma: None,
            e: None,
            strict: None,
            a_min: None,
            a_max: None,
            steps: None,
            log_spaced: None,
            a_lo: None,
            a_hi: None,
            tol: None,
            m: None,
            s: None,
            t: None,
            x_min: None,
            x_max: None,
            x_steps: None,
        }
    }
}

/// Merge precedence for a single field: flag, then config file, then an
/// optional default.
pub fn merge<T: Copy>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// A required field after merging; the error names it.
pub fn require<T: Copy>(value: Option<T>, field: &'static str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::invalid(field, format!("{field} is required")))
}

/// A finite f64 field; the error names it.
pub fn finite(value: f64, field: &'static str) -> Result<f64, CliError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::invalid(
            field,
            format!("{field} must be a finite number (got {value})"),
        ))
    }
}

/// Resolve the parameter set from flags and file; every field required.
pub fn resolve_params(
    flag_n: Option<f64>,
    flag_p: Option<f64>,
    flag_q: Option<f64>,
    flag_alpha: Option<f64>,
    file: Option<&ParamsPatch>,
) -> Result<Params, CliError> {
    let patch = file.copied().unwrap_or_default();
    let n = require(merge(flag_n, patch.n), "N")?;
    let p = require(merge(flag_p, patch.p), "p")?;
    let q = require(merge(flag_q, patch.q), "q")?;
    let alpha = require(merge(flag_alpha, patch.alpha), "alpha")?;
    Ok(Params::new(n, p, q, alpha)?)
}

/// Resolve integrator controls from flags, file, and defaults.
#[allow(clippy::too_many_arguments)]
pub fn resolve_controls(
    flag_r0: Option<f64>,
    flag_rel_tol: Option<f64>,
    flag_abs_tol: Option<f64>,
    flag_r_max: Option<f64>,
    flag_max_steps: Option<usize>,
    flag_event_tol: Option<f64>,
    flag_support_tol: Option<f64>,
    file: Option<&ControlsPatch>,
) -> Result<IntegratorControls, CliError> {
    let patch = file.copied().unwrap_or_default();
    let defaults = IntegratorControls::default();
    let controls = IntegratorControls {
        r0: merge(flag_r0, patch.r0),
        rel_tol: merge(flag_rel_tol, patch.rel_tol).unwrap_or(defaults.rel_tol),
        abs_tol: merge(flag_abs_tol, patch.abs_tol).unwrap_or(defaults.abs_tol),
        r_max: merge(flag_r_max, patch.r_max).unwrap_or(defaults.r_max),
        max_steps: merge(flag_max_steps, patch.max_steps).unwrap_or(defaults.max_steps),
        event_tol: merge(flag_event_tol, patch.event_tol).unwrap_or(defaults.event_tol),
        support_tol: merge(flag_support_tol, patch.support_tol).unwrap_or(defaults.support_tol),
    };
    controls.validate()?;
    Ok(controls)
}
