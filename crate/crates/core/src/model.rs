//! Generative-model and loss parameters, their validation, and the derived
//! scale quantities every threshold formula is written in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the two-groups equicorrelated observation model.
///
/// Each of the `m` coordinates carries a latent Bernoulli(`p`) indicator; its
/// effect is N(0, `sigma0_sq`) under the null and N(0, `sigma0_sq + tau_sq`)
/// under the alternative. Observation noise is equicorrelated Gaussian with
/// variance `sigma_eps_sq` and common correlation `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub m: usize,
    pub p: f64,
    pub sigma_eps_sq: f64,
    pub rho: f64,
    pub sigma0_sq: f64,
    pub tau_sq: f64,
}

/// Losses for the two error kinds: `delta0` for a false rejection of a null,
/// `delta_a` for a false acceptance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParams {
    pub delta0: f64,
    pub delta_a: f64,
}

impl LossParams {
    /// Unit losses: every error costs 1.
    pub fn unit() -> Self {
        Self {
            delta0: 1.0,
            delta_a: 1.0,
        }
    }
}

/// The working scale quantities:
///
/// * `sigma_sq`  — null marginal variance of the independent component,
///   sigma_eps_sq * (1 - rho) + sigma0_sq;
/// * `u`         — signal-to-null variance ratio tau_sq / sigma_sq;
/// * `f`         — prior odds of a null, (1 - p) / p;
/// * `delta`     — loss ratio delta0 / delta_a;
/// * `v`         — u * f^2 * delta^2, the sparsity scale whose logarithm sets
///   every asymptotic cutoff.
///
/// `v` is stored rather than recomputed so a single canonical value feeds
/// `log v` everywhere downstream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    pub sigma_sq: f64,
    pub u: f64,
    pub f: f64,
    pub delta: f64,
    pub v: f64,
}

impl DerivedScales {
    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }
}

/// Outcome of parameter validation: either OK or the full list of violated
/// invariants, one message per field.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the model invariants alone (used where no losses are in play, e.g.
/// data generation).
pub fn validate_model(params: &ModelParams) -> ValidationReport {
    let mut violations = Vec::new();
    if params.m < 1 {
        violations.push("m must be >= 1".to_string());
    }
    if !(params.p > 0.0 && params.p < 1.0) {
        violations.push(format!("p must lie in (0,1), got {}", params.p));
    }
    if !(params.sigma_eps_sq > 0.0 && params.sigma_eps_sq.is_finite()) {
        violations.push(format!(
            "sigma_eps_sq must be > 0, got {}",
            params.sigma_eps_sq
        ));
    }
    if !(params.rho >= 0.0 && params.rho < 1.0) {
        violations.push(format!("rho must lie in [0,1), got {}", params.rho));
    }
    if !(params.sigma0_sq >= 0.0 && params.sigma0_sq.is_finite()) {
        violations.push(format!("sigma0_sq must be >= 0, got {}", params.sigma0_sq));
    }
    if !(params.tau_sq > 0.0 && params.tau_sq.is_finite()) {
        violations.push(format!("tau_sq must be > 0, got {}", params.tau_sq));
    }
    ValidationReport { violations }
}

/// Check the loss invariants alone.
pub fn validate_losses(losses: &LossParams) -> ValidationReport {
    let mut violations = Vec::new();
    if !(losses.delta0 > 0.0 && losses.delta0.is_finite()) {
        violations.push(format!("delta0 must be > 0, got {}", losses.delta0));
    }
    if !(losses.delta_a > 0.0 && losses.delta_a.is_finite()) {
        violations.push(format!("delta_a must be > 0, got {}", losses.delta_a));
    }
    ValidationReport { violations }
}

/// Check every invariant of `params` and `losses`, reporting all violations
/// rather than stopping at the first.
pub fn validate_params(params: &ModelParams, losses: &LossParams) -> ValidationReport {
    let mut violations = validate_model(params).violations;
    violations.extend(validate_losses(losses).violations);
    ValidationReport { violations }
}

/// Compute the derived scales, validating the inputs first.
///
/// The model depends on the correlation only through the reduced noise
/// variance sigma_eps_sq * (1 - rho); requiring rho < 1 keeps sigma_sq
/// strictly positive.
pub fn derive_scales(params: &ModelParams, losses: &LossParams) -> Result<DerivedScales> {
    let report = validate_params(params, losses);
    if !report.is_ok() {
        return Err(Error::InvalidParams(report.violations));
    }
    let sigma_sq = params.sigma_eps_sq * (1.0 - params.rho) + params.sigma0_sq;
    let u = params.tau_sq / sigma_sq;
    let f = (1.0 - params.p) / params.p;
    let delta = losses.delta0 / losses.delta_a;
    let v = u * f * f * delta * delta;
    let scales = DerivedScales {
        sigma_sq,
        u,
        f,
        delta,
        v,
    };
    for (name, value) in [
        ("sigma_sq", sigma_sq),
        ("u", u),
        ("f", f),
        ("delta", delta),
        ("v", v),
    ] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Domain(format!(
                "derived scale {name} must be finite and positive, got {value}"
            )));
        }
    }
    Ok(scales)
}
