//! Sparse multiple testing for equicorrelated Gaussian test statistics.
//!
//! The observation vector is a two-groups Gaussian mixture observed through
//! equicorrelated noise. Because such noise splits into independent
//! coordinates plus one shared component, centering the observations removes
//! the shared part, and fixed cutoffs on the standardized centered
//! statistics recover the behavior of the ideal independent-coordinate
//! rules. This crate provides:
//!
//! * [`numerics`] — normal CDF/quantile kernels and guarded bisection;
//! * [`model`] — parameter records, validation, and derived scales;
//! * [`synth`] — seeded data generation through the decomposition, plus
//!   empirical moment checks;
//! * [`thresholds`] — the Bayes-oracle, BFDR, GW, Bonferroni, and BH rules;
//! * [`risk`] — closed-form error rates and Bayes risk, confusion counts,
//!   and Monte Carlo risk/FDR/FWER estimation;
//! * [`asymptotics`] — parameter sequences toward the sparse limits and
//!   numeric checkers for the optimality conditions along them.

pub mod asymptotics;
pub mod error;
pub mod model;
pub mod numerics;
pub mod risk;
pub mod synth;
pub mod thresholds;

pub use asymptotics::{
    build_sequence, check_abos_conditions, check_abos_conditions_with, check_assumption1,
    check_bfdr_conditions, risk_ratio_curve, AbosConditionsReport, AlphaRule, Assumption1Report,
    BfdrConditionsReport, CheckConfig, McSettings, Regime, RegimeSpec, RiskRatioPoint,
    SequencePoint, Verdict,
};
pub use error::{Error, Result};
pub use model::{
    derive_scales, validate_losses, validate_model, validate_params, DerivedScales, LossParams,
    ModelParams, ValidationReport,
};
pub use numerics::{
    bisect, std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf, KahanSum,
    Probability, RootBracket,
};
pub use risk::{
    bayes_risk_fixed, error_rates, evaluate_rejections, monte_carlo_metrics, optimal_risk,
    type_errors, ConfusionCounts, ErrorRates, McRule, RiskSummary,
};
pub use synth::{center, empirical_moments, generate, point_master, Dataset, MomentReport, Seed};
pub use thresholds::{
    bfdr_of_threshold, bfdr_threshold, bh_random_threshold, bh_reject, bonferroni_expansion,
    bonferroni_threshold, fixed_threshold_reject, gw_threshold, oracle_cutoff, RejectionSet,
    ThresholdResult, ThresholdRule,
};
