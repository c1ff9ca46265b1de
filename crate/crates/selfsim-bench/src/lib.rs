//! Shared fixtures for the pipeline benchmarks in `benches/`.

use selfsim_core::{IntegratorControls, Params};

/// Parameters whose profile keeps a slowly decaying positive tail; the
/// radial integrator runs the whole span without a log-plane handoff.
pub fn slow_tail_params() -> Params {
    Params::new(3.0, 2.0, 3.0, 1.0).expect("valid parameters")
}

/// Fast-diffusion parameters (`p < 2`) that trigger the log-plane
/// continuation once the radial leg reaches the handoff radius.
pub fn fast_diffusion_params() -> Params {
    Params::new(1.0, 1.5, 3.0, 0.6).expect("valid parameters")
}

/// Default integrator controls capped at the given radius.
pub fn controls_to(r_max: f64) -> IntegratorControls {
    IntegratorControls {
        r_max,
        ..IntegratorControls::default()
    }
}
