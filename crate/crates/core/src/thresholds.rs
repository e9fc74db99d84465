//! Rejection rules on standardized centered statistics: the Bayes-oracle
//! cutoff, the implicit BFDR and GW thresholds, Bonferroni (exact and
//! large-m expansion), and Benjamini-Hochberg in both its step-up and
//! random-threshold forms.
//!
//! Every cutoff lives on the standardized squared scale (statistic / sigma)^2
//! with sigma_sq = sigma_eps_sq * (1 - rho) + sigma0_sq, so rules compose
//! without unit bugs. Implicit equations are solved by guarded bisection:
//! the tail-ratio objectives are monotone but flat, and bracketing is
//! unconditionally safe where Newton is not.

use crate::error::{Error, Result};
use crate::model::DerivedScales;
use crate::numerics::{
    bisect, expand_bracket_upper, std_normal_quantile, std_normal_sf, Probability, RootBracket,
};

/// Absolute bisection tolerance for the implicit threshold equations.
pub const IMPLICIT_TOL: f64 = 1e-12;
/// Residual bound the implicit solvers must meet on success.
pub const RESIDUAL_TOL: f64 = 1e-10;

const BRACKET_START_HI: f64 = 10.0;
const MAX_DOUBLINGS: u32 = 60;
const MAX_BISECT_ITER: usize = 300;

/// Which rule produced a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    Oracle,
    BfdrFixed,
    Gw,
    BonferroniExact,
    BonferroniExpansion,
    BhRandom,
}

impl std::fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ThresholdRule::Oracle => "oracle",
            ThresholdRule::BfdrFixed => "bfdr_fixed",
            ThresholdRule::Gw => "gw",
            ThresholdRule::BonferroniExact => "bonferroni_exact",
            ThresholdRule::BonferroniExpansion => "bonferroni_expansion",
            ThresholdRule::BhRandom => "bh_random",
        };
        f.write_str(s)
    }
}

/// A named rule with its squared cutoff on the standardized scale.
///
/// `always_reject` is set exactly when `c_sq < 0`: a negative squared cutoff
/// is a legitimate state (the non-sparse regime) meaning every hypothesis is
/// rejected, not an error. `solver_residual` is the absolute equation
/// residual for implicit rules and 0 for closed forms.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ThresholdResult {
    pub rule: ThresholdRule,
    pub c_sq: f64,
    pub always_reject: bool,
    pub solver_residual: f64,
}

impl ThresholdResult {
    fn closed_form(rule: ThresholdRule, c_sq: f64) -> Self {
        Self {
            rule,
            c_sq,
            always_reject: c_sq < 0.0,
            solver_residual: 0.0,
        }
    }

    pub fn csv_header() -> &'static str {
        "rule,c_sq,always_reject,solver_residual"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.rule, self.c_sq, self.always_reject, self.solver_residual
        )
    }
}

/// Boolean rejection decisions for one dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectionSet {
    pub rejected: Vec<bool>,
    pub count: usize,
}

impl RejectionSet {
    pub fn from_flags(rejected: Vec<bool>) -> Self {
        let count = rejected.iter().filter(|&&r| r).count();
        Self { rejected, count }
    }
}

fn check_alpha_open_interval(alpha: Probability) -> Result<f64> {
    let a = alpha.value();
    if a <= 0.0 || a >= 1.0 {
        return Err(Error::Domain(format!(
            "alpha must lie strictly in (0,1), got {a}"
        )));
    }
    Ok(a)
}

/// The Bayes-oracle squared cutoff
/// c^2 = (1 + 1/u) * (log v + log(1 + 1/u)).
///
/// Equivalent to thresholding the two-normal likelihood ratio at the prior
/// odds times the loss ratio; negative values flag the always-reject state.
pub fn oracle_cutoff(scales: &DerivedScales) -> ThresholdResult {
    let inv_u = 1.0 / scales.u;
    let c_sq = (1.0 + inv_u) * (scales.v.ln() + (1.0 + inv_u).ln());
    ThresholdResult::closed_form(ThresholdRule::Oracle, c_sq)
}

/// Reject coordinate i exactly when (u_centered_i / sigma)^2 >= c_sq.
/// A negative `c_sq` therefore rejects everything.
pub fn fixed_threshold_reject(u_centered: &[f64], sigma: f64, c_sq: f64) -> Result<RejectionSet> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
    }
    let flags = u_centered
        .iter()
        .map(|&ui| {
            let s = ui / sigma;
            s * s >= c_sq
        })
        .collect();
    Ok(RejectionSet::from_flags(flags))
}

/// Tail ratio (1 - Phi(c)) / (1 - Phi(c / sqrt(u + 1))), strictly decreasing
/// in c from 1 at c = 0.
fn tail_ratio(c: f64, u: f64) -> f64 {
    std_normal_sf(c) / std_normal_sf(c / (u + 1.0).sqrt())
}

/// Solve the fixed-threshold BFDR equation
/// (1 - Phi(c)) / (1 - Phi(c / sqrt(u+1))) = r_alpha / f, r_alpha = alpha/(1-alpha).
///
/// The left side equals 1 at c = 0 and decreases, so a positive root exists
/// exactly when r_alpha / f < 1.
pub fn bfdr_threshold(alpha: Probability, scales: &DerivedScales) -> Result<ThresholdResult> {
    let a = check_alpha_open_interval(alpha)?;
    let r_alpha = a / (1.0 - a);
    let target = r_alpha / scales.f;
    if target >= 1.0 {
        return Err(Error::NoSolution(format!(
            "r_alpha/f = {target} >= 1: the tail ratio starts at 1 and decreases, so no positive BFDR cutoff exists"
        )));
    }
    let u = scales.u;
    let h = |c: f64| tail_ratio(c, u) - target;
    let hi = expand_bracket_upper(&h, 0.0, BRACKET_START_HI, MAX_DOUBLINGS)?;
    let bracket = RootBracket::new(0.0, hi, IMPLICIT_TOL, MAX_BISECT_ITER)?;
    let root = bisect(h, &bracket)?;
    Ok(ThresholdResult {
        rule: ThresholdRule::BfdrFixed,
        c_sq: root * root,
        always_reject: false,
        solver_residual: h(root).abs(),
    })
}

/// Bayesian FDR of the fixed-threshold rule at cutoff c:
/// (1-p) t1 / ((1-p) t1 + p (1 - t2)) with t1 = 2(1 - Phi(c)) and
/// 1 - t2 = 2(1 - Phi(c / sqrt(u+1))).
pub fn bfdr_of_threshold(c: f64, u: f64, p: Probability) -> Result<Probability> {
    if c.is_nan() || c < 0.0 {
        return Err(Error::Domain(format!("cutoff c must be >= 0, got {c}")));
    }
    if !u.is_finite() || u < 0.0 {
        return Err(Error::Domain(format!("u must be >= 0, got {u}")));
    }
    let p = p.value();
    let t1 = 2.0 * std_normal_sf(c);
    let one_minus_t2 = 2.0 * std_normal_sf(c / (u + 1.0).sqrt());
    let denom = (1.0 - p) * t1 + p * one_minus_t2;
    if denom == 0.0 {
        return Err(Error::Domain(format!(
            "both tails underflow at c = {c}; the BFDR is indeterminate"
        )));
    }
    Probability::new((1.0 - p) * t1 / denom)
}

/// Solve the fixed-point approximation of the BH threshold:
/// (1 - Phi(c)) / ((1-p)(1 - Phi(c)) + p (1 - Phi(c / sqrt(u+1)))) = alpha.
///
/// The left side equals 1 at c = 0 and decreases toward 0, so bracketing
/// locates the root whenever one exists numerically.
pub fn gw_threshold(
    alpha: Probability,
    scales: &DerivedScales,
    p: Probability,
) -> Result<ThresholdResult> {
    let a = check_alpha_open_interval(alpha)?;
    let p = p.value();
    if scales.u.is_nan() || scales.u <= 0.0 {
        return Err(Error::Domain(format!(
            "gw_threshold requires u > 0, got {}",
            scales.u
        )));
    }
    let u = scales.u;
    let h = move |c: f64| {
        let t = std_normal_sf(c);
        let t_alt = std_normal_sf(c / (u + 1.0).sqrt());
        t / ((1.0 - p) * t + p * t_alt) - a
    };
    let hi = expand_bracket_upper(&h, 0.0, BRACKET_START_HI, MAX_DOUBLINGS)?;
    let bracket = RootBracket::new(0.0, hi, IMPLICIT_TOL, MAX_BISECT_ITER)?;
    let root = bisect(h, &bracket)?;
    Ok(ThresholdResult {
        rule: ThresholdRule::Gw,
        c_sq: root * root,
        always_reject: false,
        solver_residual: h(root).abs(),
    })
}

/// Exact Bonferroni cutoff: c = Phi^{-1}(1 - alpha / (2m)).
///
/// Evaluated through the lower tail as -Phi^{-1}(alpha / (2m)), which keeps
/// full relative precision for large m.
pub fn bonferroni_threshold(alpha: Probability, m: usize) -> Result<ThresholdResult> {
    let a = check_alpha_open_interval(alpha)?;
    if m < 1 {
        return Err(Error::Domain("bonferroni_threshold requires m >= 1".into()));
    }
    let tail = a / (2.0 * m as f64);
    if tail >= 1.0 {
        return Err(Error::Domain(format!("alpha/(2m) = {tail} must be < 1")));
    }
    let c = -std_normal_quantile(Probability::new(tail)?)?;
    Ok(ThresholdResult::closed_form(
        ThresholdRule::BonferroniExact,
        c * c,
    ))
}

/// Three-term large-m expansion of the Bonferroni squared cutoff:
/// c^2 = 2 log(m/alpha) - log(2 log(m/alpha)) + log(2/pi).
pub fn bonferroni_expansion(alpha: Probability, m: usize) -> Result<ThresholdResult> {
    let a = check_alpha_open_interval(alpha)?;
    if m < 1 {
        return Err(Error::Domain("bonferroni_expansion requires m >= 1".into()));
    }
    let big_l = (m as f64 / a).ln();
    if 2.0 * big_l <= 1.0 {
        return Err(Error::Domain(format!(
            "bonferroni_expansion requires 2 log(m/alpha) > 1, got {}",
            2.0 * big_l
        )));
    }
    let c_sq = 2.0 * big_l - (2.0 * big_l).ln() + (2.0 / std::f64::consts::PI).ln();
    Ok(ThresholdResult::closed_form(
        ThresholdRule::BonferroniExpansion,
        c_sq,
    ))
}

fn two_sided_p_values(u_centered: &[f64], sigma: f64) -> Vec<f64> {
    u_centered
        .iter()
        .map(|&ui| 2.0 * std_normal_sf((ui / sigma).abs()))
        .collect()
}

/// Benjamini-Hochberg step-up on two-sided p-values from the null
/// N(0, sigma^2) marginal: k = max{ i : p_(i) <= i alpha / m }, rejecting
/// every hypothesis with p <= p_(k). Ties at p_(k) are rejected together.
pub fn bh_reject(u_centered: &[f64], sigma: f64, alpha: Probability) -> Result<RejectionSet> {
    let a = check_alpha_open_interval(alpha)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
    }
    let m = u_centered.len();
    let p_values = two_sided_p_values(u_centered, sigma);
    let mut sorted = p_values.clone();
    sorted.sort_by(|x, y| x.total_cmp(y));
    let mut threshold_p = None;
    for (idx, &pv) in sorted.iter().enumerate() {
        if pv <= (idx + 1) as f64 * a / m as f64 {
            threshold_p = Some(pv);
        }
    }
    let flags = match threshold_p {
        None => vec![false; m],
        Some(tp) => p_values.iter().map(|&pv| pv <= tp).collect(),
    };
    Ok(RejectionSet::from_flags(flags))
}

/// The BH random threshold c_BH = min(c_Bon, c~_BH), with
/// c~_BH = inf{ y : 2(1 - Phi(y)) / (1 - F^_m(y)) <= alpha } and
/// 1 - F^_m(y) the fraction of standardized statistics with |.| >= y.
///
/// Thresholding the standardized statistics at the returned cutoff
/// reproduces the step-up rejection set exactly: between consecutive
/// distinct order statistics the empirical tail count is constant, so the
/// infimum lands at t_k = Phi^{-1}(1 - alpha n_k / (2m)) for the largest
/// distinct value w_k with t_k <= w_k, and t_k lies in (w_{k+1}, w_k].
pub fn bh_random_threshold(
    u_centered: &[f64],
    sigma: f64,
    alpha: Probability,
) -> Result<ThresholdResult> {
    let a = check_alpha_open_interval(alpha)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
    }
    let m = u_centered.len();
    if m == 0 {
        return Err(Error::Domain(
            "bh_random_threshold requires at least one statistic".into(),
        ));
    }
    let mut abs_stats: Vec<f64> = u_centered.iter().map(|&ui| (ui / sigma).abs()).collect();
    abs_stats.sort_by(|x, y| y.total_cmp(x));

    // Distinct values descending, with n_k = #{ |s| >= w_k } cumulative.
    let mut candidate: Option<(f64, f64)> = None; // (t_k, w_k) for the largest feasible k
    let mut idx = 0;
    while idx < m {
        let w = abs_stats[idx];
        let mut end = idx + 1;
        while end < m && abs_stats[end] == w {
            end += 1;
        }
        let n_k = end as f64;
        let t_k = -std_normal_quantile(Probability::new(a * n_k / (2.0 * m as f64))?)?;
        if t_k <= w {
            candidate = Some((t_k, w));
        }
        idx = end;
    }

    let c_bon = {
        let r = bonferroni_threshold(alpha, m)?;
        r.c_sq.sqrt()
    };
    let c_bh = match candidate {
        // Clamp guards the one boundary where roundoff in the quantile could
        // push t_k just above w_k; mathematically t_k <= w_k here.
        Some((t_k, w_k)) => t_k.min(w_k).min(c_bon),
        None => c_bon,
    };
    Ok(ThresholdResult {
        rule: ThresholdRule::BhRandom,
        c_sq: c_bh * c_bh,
        always_reject: false,
        solver_residual: 0.0,
    })
}
