//! Error probabilities and Bayes risk of fixed-threshold rules in closed
//! form, realized confusion counts, and Monte Carlo risk/FDR/FWER estimation
//! for every rule.
//!
//! The risk functional is the additive expected loss
//! m * ((1-p) delta0 t1 + p delta_a t2); optimality statements are ratios of
//! this quantity between a rule and the oracle cutoff.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{derive_scales, LossParams, ModelParams};
use crate::numerics::{std_normal_sf, KahanSum, Probability};
use crate::synth::{generate, Seed};
use crate::thresholds::{
    bfdr_threshold, bh_reject, bonferroni_threshold, fixed_threshold_reject, gw_threshold,
    oracle_cutoff, RejectionSet,
};

/// Per-coordinate error probabilities of a fixed-threshold rule at cutoff c:
/// type I `t1 = 2(1 - Phi(c))`, type II `t2 = 2 Phi(c / sqrt(u+1)) - 1`, and
/// the Bayesian FDR they imply at mixing proportion p.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ErrorRates {
    pub t1: f64,
    pub t2: f64,
    pub bfdr: f64,
}

/// (t1, t2) at cutoff `c >= 0` and variance ratio `u >= 0`. `c = +inf` is
/// allowed and denotes the never-reject rule.
///
/// Both values are computed from upper tails (t2 as 1 - 2(1 - Phi(...))) so
/// nothing cancels for large c.
pub fn type_errors(c: f64, u: f64) -> Result<(f64, f64)> {
    if c.is_nan() || c < 0.0 {
        return Err(Error::Domain(format!("cutoff c must be >= 0, got {c}")));
    }
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("u must be finite and >= 0, got {u}")));
    }
    let t1 = 2.0 * std_normal_sf(c);
    let t2 = 1.0 - 2.0 * std_normal_sf(c / (u + 1.0).sqrt());
    Ok((t1, t2))
}

/// Full error-rate record including the implied BFDR.
pub fn error_rates(c: f64, u: f64, p: Probability) -> Result<ErrorRates> {
    let (t1, t2) = type_errors(c, u)?;
    let p = p.value();
    let denom = (1.0 - p) * t1 + p * (1.0 - t2);
    if denom == 0.0 {
        return Err(Error::Domain(format!(
            "both tails underflow at c = {c}; the BFDR is indeterminate"
        )));
    }
    Ok(ErrorRates {
        t1,
        t2,
        bfdr: (1.0 - p) * t1 / denom,
    })
}

/// Expected loss of the fixed-threshold rule with squared cutoff `c_sq`:
/// m ((1-p) delta0 t1 + p delta_a t2). A negative `c_sq` is the always-reject
/// rule, whose risk is m (1-p) delta0 exactly.
pub fn bayes_risk_fixed(c_sq: f64, params: &ModelParams, losses: &LossParams) -> Result<f64> {
    let scales = derive_scales(params, losses)?;
    let m = params.m as f64;
    if c_sq.is_nan() {
        return Err(Error::Domain("c_sq must not be NaN".into()));
    }
    if c_sq < 0.0 {
        return Ok(m * (1.0 - params.p) * losses.delta0);
    }
    let (t1, t2) = type_errors(c_sq.sqrt(), scales.u)?;
    Ok(m * ((1.0 - params.p) * losses.delta0 * t1 + params.p * losses.delta_a * t2))
}

/// Risk of the Bayes-oracle cutoff — the minimum over fixed thresholds.
pub fn optimal_risk(params: &ModelParams, losses: &LossParams) -> Result<f64> {
    let scales = derive_scales(params, losses)?;
    bayes_risk_fixed(oracle_cutoff(&scales).c_sq, params, losses)
}

/// Realized confusion counts of one rejection set against the latent
/// indicator vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ConfusionCounts {
    pub v_false_rejections: usize,
    pub t_false_acceptances: usize,
    pub r_rejections: usize,
    pub m: usize,
}

pub fn evaluate_rejections(rejections: &RejectionSet, theta: &[bool]) -> Result<ConfusionCounts> {
    if rejections.rejected.len() != theta.len() {
        return Err(Error::Domain(format!(
            "rejection vector length {} does not match theta length {}",
            rejections.rejected.len(),
            theta.len()
        )));
    }
    let mut v = 0;
    let mut t = 0;
    for (&rej, &sig) in rejections.rejected.iter().zip(theta) {
        if rej && !sig {
            v += 1;
        }
        if !rej && sig {
            t += 1;
        }
    }
    Ok(ConfusionCounts {
        v_false_rejections: v,
        t_false_acceptances: t,
        r_rejections: rejections.count,
        m: theta.len(),
    })
}

/// Rules that can be applied to data in a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McRule {
    Oracle,
    BfdrFixed,
    Gw,
    Bonferroni,
    Bh,
}

impl McRule {
    pub const ALL: [McRule; 5] = [
        McRule::Oracle,
        McRule::BfdrFixed,
        McRule::Gw,
        McRule::Bonferroni,
        McRule::Bh,
    ];

    pub fn needs_alpha(self) -> bool {
        !matches!(self, McRule::Oracle)
    }
}

impl std::fmt::Display for McRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            McRule::Oracle => "oracle",
            McRule::BfdrFixed => "bfdr_fixed",
            McRule::Gw => "gw",
            McRule::Bonferroni => "bonferroni",
            McRule::Bh => "bh",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for McRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(McRule::Oracle),
            "bfdr_fixed" => Ok(McRule::BfdrFixed),
            "gw" => Ok(McRule::Gw),
            "bonferroni" => Ok(McRule::Bonferroni),
            "bh" => Ok(McRule::Bh),
            other => Err(Error::Domain(format!(
                "unknown rule '{other}' (expected oracle|bfdr_fixed|gw|bonferroni|bh)"
            ))),
        }
    }
}

/// Monte Carlo estimates for one rule on one configuration.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RiskSummary {
    pub rule: McRule,
    pub m: usize,
    pub p: f64,
    pub u: f64,
    pub v: f64,
    pub alpha: Option<f64>,
    pub risk: f64,
    pub mc_se_risk: f64,
    pub fdr: f64,
    pub fwer: f64,
    pub n_replicates: usize,
}

impl RiskSummary {
    pub fn csv_header() -> &'static str {
        "rule,m,p,u,v,alpha,risk,risk_se,fdr,fwer,n_replicates"
    }

    pub fn to_csv_row(&self) -> String {
        let alpha = self.alpha.map(|a| a.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.rule,
            self.m,
            self.p,
            self.u,
            self.v,
            alpha,
            self.risk,
            self.mc_se_risk,
            self.fdr,
            self.fwer,
            self.n_replicates
        )
    }
}

/// Estimate risk, FDR, and FWER of `rule` over `n_replicates` seeded
/// datasets. Replicate r reads stream r of `master_seed`; replicates are
/// evaluated in parallel and reduced in index order, so the result does not
/// depend on the thread count.
pub fn monte_carlo_metrics(
    params: &ModelParams,
    losses: &LossParams,
    rule: McRule,
    alpha: Option<Probability>,
    n_replicates: usize,
    master_seed: u64,
) -> Result<RiskSummary> {
    if n_replicates < 2 {
        return Err(Error::Domain(format!(
            "monte_carlo_metrics requires n_replicates >= 2, got {n_replicates}"
        )));
    }
    let scales = derive_scales(params, losses)?;
    if rule.needs_alpha() && alpha.is_none() {
        return Err(Error::Domain(format!("rule {rule} requires alpha")));
    }
    let sigma = scales.sigma();
    // Fixed-cutoff rules solve their threshold once; BH re-runs per dataset.
    let fixed_c_sq = match rule {
        McRule::Oracle => Some(oracle_cutoff(&scales).c_sq),
        McRule::BfdrFixed => Some(bfdr_threshold(alpha.unwrap(), &scales)?.c_sq),
        McRule::Gw => {
            Some(gw_threshold(alpha.unwrap(), &scales, Probability::new(params.p)?)?.c_sq)
        }
        McRule::Bonferroni => Some(bonferroni_threshold(alpha.unwrap(), params.m)?.c_sq),
        McRule::Bh => None,
    };

    let per_rep: Vec<Result<(f64, f64, bool)>> = (0..n_replicates)
        .into_par_iter()
        .map(|r| {
            let ds = generate(params, Seed::new(master_seed, r as u64))?;
            let rejections = match fixed_c_sq {
                Some(c_sq) => fixed_threshold_reject(&ds.u_centered, sigma, c_sq)?,
                None => bh_reject(&ds.u_centered, sigma, alpha.unwrap())?,
            };
            let counts = evaluate_rejections(&rejections, &ds.theta)?;
            let loss = losses.delta0 * counts.v_false_rejections as f64
                + losses.delta_a * counts.t_false_acceptances as f64;
            let fdp = counts.v_false_rejections as f64 / (counts.r_rejections.max(1)) as f64;
            Ok((loss, fdp, counts.v_false_rejections >= 1))
        })
        .collect();

    let n = n_replicates as f64;
    let mut loss_sum = KahanSum::new();
    let mut loss_sq_sum = KahanSum::new();
    let mut fdp_sum = KahanSum::new();
    let mut fwer_count = 0usize;
    for r in per_rep {
        let (loss, fdp, any_false) = r?;
        loss_sum.add(loss);
        loss_sq_sum.add(loss * loss);
        fdp_sum.add(fdp);
        if any_false {
            fwer_count += 1;
        }
    }
    let risk = loss_sum.total() / n;
    let loss_var = ((loss_sq_sum.total() - n * risk * risk) / (n - 1.0)).max(0.0);
    Ok(RiskSummary {
        rule,
        m: params.m,
        p: params.p,
        u: scales.u,
        v: scales.v,
        alpha: alpha.map(|a| a.value()),
        risk,
        mc_se_risk: (loss_var / n).sqrt(),
        fdr: fdp_sum.total() / n,
        fwer: fwer_count as f64 / n,
        n_replicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thresholds::bfdr_of_threshold;

    fn prob(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    fn params(m: usize, p: f64, tau_sq: f64) -> ModelParams {
        ModelParams {
            m,
            p,
            sigma_eps_sq: 1.0,
            rho: 0.5,
            sigma0_sq: 0.5,
            tau_sq,
        }
    }

    #[test]
    fn type_errors_boundary() {
        let (t1, t2) = type_errors(0.0, 7.0).unwrap();
        assert_eq!(t1, 1.0);
        assert_eq!(t2, 0.0);
    }

    #[test]
    fn type_errors_at_five_percent_cutoff() {
        // tail oracle: 2(1 - Phi(1.959964)) = 0.049999998192884809
        let (t1, _) = type_errors(1.959964, 3.0).unwrap();
        assert!((t1 - 0.05).abs() <= 1e-6);
        assert!((t1 - 0.04999999819288481).abs() <= 1e-13);
    }

    #[test]
    fn type_errors_degenerate_u() {
        for c in [0.3, 1.0, 2.5] {
            let (t1, t2) = type_errors(c, 0.0).unwrap();
            assert!((t2 - (1.0 - t1)).abs() <= 1e-15);
        }
    }

    #[test]
    fn type_errors_rejects_bad_input() {
        assert!(type_errors(-1.0, 1.0).is_err());
        assert!(type_errors(f64::NAN, 1.0).is_err());
        assert!(type_errors(1.0, -0.5).is_err());
    }

    #[test]
    fn rates_monotone_in_cutoff() {
        // t1 and 1 - t2 fall as c grows, and so does the implied BFDR.
        for &(u, p) in &[(1.0, 0.3), (4.0, 0.05), (24.0, 0.01), (99.0, 0.001)] {
            let mut last = error_rates(0.0, u, prob(p)).unwrap();
            let mut c = 0.1;
            while c <= 10.0 {
                let er = error_rates(c, u, prob(p)).unwrap();
                assert!(er.t1 < last.t1);
                assert!(1.0 - er.t2 < 1.0 - last.t2);
                assert!(er.bfdr < last.bfdr, "bfdr rose at c = {c}, u = {u}");
                last = er;
                c += 0.1;
            }
        }
    }

    #[test]
    fn near_degenerate_u_sends_oracle_to_loss_favored_boundary() {
        // When the alternative is indistinguishable (u ~ 0), the oracle
        // cutoff runs to whichever boundary the prior odds times loss ratio
        // favors, and the flagged state prices the risk accordingly.
        let losses = LossParams::unit();
        // f delta < 1: rejecting everything is optimal.
        let reject_all = ModelParams {
            m: 100,
            p: 0.7,
            sigma_eps_sq: 1.0,
            rho: 0.0,
            sigma0_sq: 0.0,
            tau_sq: 1e-12,
        };
        let scales = derive_scales(&reject_all, &losses).unwrap();
        let cut = oracle_cutoff(&scales);
        assert!(cut.always_reject);
        let risk = bayes_risk_fixed(cut.c_sq, &reject_all, &losses).unwrap();
        assert_eq!(risk, 100.0 * (1.0 - 0.7) * 1.0);

        // f delta > 1: never rejecting is optimal; the cutoff blows up and
        // the risk approaches m p delta_a.
        let keep_all = ModelParams {
            p: 0.3,
            ..reject_all
        };
        let scales = derive_scales(&keep_all, &losses).unwrap();
        let cut = oracle_cutoff(&scales);
        assert!(!cut.always_reject);
        let risk = bayes_risk_fixed(cut.c_sq, &keep_all, &losses).unwrap();
        assert!((risk - 100.0 * 0.3).abs() <= 1e-9);
    }

    #[test]
    fn error_rates_recompose_bfdr() {
        // The composed BFDR must agree with the threshold module's own
        // formula route.
        for &(c, u, p) in &[(2.5, 24.0, 0.01), (1.0, 4.0, 0.3), (3.5, 99.0, 0.001)] {
            let er = error_rates(c, u, prob(p)).unwrap();
            let direct = bfdr_of_threshold(c, u, prob(p)).unwrap().value();
            assert!((er.bfdr - direct).abs() <= 1e-15);
            assert!((er.t1 - 2.0 * std_normal_sf(c)).abs() <= 1e-16);
        }
    }

    #[test]
    fn risk_boundary_values() {
        let p = params(1000, 0.01, 4.0);
        let losses = LossParams {
            delta0: 2.0,
            delta_a: 3.0,
        };
        // always-reject: m (1-p) delta0
        let r = bayes_risk_fixed(-0.5, &p, &losses).unwrap();
        assert_eq!(r, 1000.0 * (1.0 - 0.01) * 2.0);
        // never-reject: m p delta_a
        let r = bayes_risk_fixed(f64::INFINITY, &p, &losses).unwrap();
        assert_eq!(r, 1000.0 * (0.01 * 3.0));
    }

    #[test]
    fn risk_decomposition_identity() {
        let p = params(500, 0.05, 9.0);
        let losses = LossParams {
            delta0: 1.3,
            delta_a: 0.7,
        };
        let scales = derive_scales(&p, &losses).unwrap();
        for c_sq in [0.5, 2.0, 7.0, 15.0] {
            let direct = bayes_risk_fixed(c_sq, &p, &losses).unwrap();
            let (t1, t2) = type_errors(c_sq.sqrt(), scales.u).unwrap();
            let recomposed =
                500.0 * ((1.0 - 0.05) * losses.delta0 * t1 + 0.05 * losses.delta_a * t2);
            assert_eq!(direct, recomposed);
        }
    }

    #[test]
    fn oracle_cutoff_minimizes_risk_on_grid() {
        let p = params(200, 0.02, 16.0);
        let losses = LossParams {
            delta0: 1.0,
            delta_a: 2.0,
        };
        let scales = derive_scales(&p, &losses).unwrap();
        let c_star = oracle_cutoff(&scales).c_sq;
        let best = bayes_risk_fixed(c_star, &p, &losses).unwrap();
        for k in 0..200 {
            let c_sq = c_star * (0.5 + k as f64 / 200.0);
            let risk = bayes_risk_fixed(c_sq, &p, &losses).unwrap();
            assert!(
                risk >= best * (1.0 - 1e-12),
                "c_sq = {c_sq} beats the oracle"
            );
        }
    }

    #[test]
    fn optimal_risk_scales_with_losses() {
        let p = params(100, 0.05, 9.0);
        let a = optimal_risk(
            &p,
            &LossParams {
                delta0: 1.0,
                delta_a: 1.0,
            },
        )
        .unwrap();
        let b = optimal_risk(
            &p,
            &LossParams {
                delta0: 3.0,
                delta_a: 3.0,
            },
        )
        .unwrap();
        assert!((b / a - 3.0).abs() <= 1e-12);
    }

    #[test]
    fn confusion_counts_enumeration() {
        let rej = RejectionSet::from_flags(vec![true, true, false, false]);
        let theta = [true, false, true, false];
        let c = evaluate_rejections(&rej, &theta).unwrap();
        assert_eq!(c.v_false_rejections, 1);
        assert_eq!(c.t_false_acceptances, 1);
        assert_eq!(c.r_rejections, 2);

        let perfect = RejectionSet::from_flags(theta.to_vec());
        let c = evaluate_rejections(&perfect, &theta).unwrap();
        assert_eq!((c.v_false_rejections, c.t_false_acceptances), (0, 0));

        let all = RejectionSet::from_flags(vec![true; 4]);
        let none_true = [false; 4];
        let c = evaluate_rejections(&all, &none_true).unwrap();
        assert_eq!(c.v_false_rejections, 4);
        assert_eq!(c.t_false_acceptances, 0);

        assert!(evaluate_rejections(&all, &[true; 3]).is_err());
    }

    #[test]
    fn bonferroni_controls_fwer_in_monte_carlo() {
        // Mostly-null configuration: estimated FWER <= alpha + 3 se.
        let p = ModelParams {
            m: 100,
            p: 0.001,
            sigma_eps_sq: 1.0,
            rho: 0.3,
            sigma0_sq: 0.0,
            tau_sq: 4.0,
        };
        let s = monte_carlo_metrics(
            &p,
            &LossParams::unit(),
            McRule::Bonferroni,
            Some(prob(0.05)),
            4000,
            101,
        )
        .unwrap();
        let se = (0.05f64 * 0.95 / 4000.0).sqrt();
        assert!(s.fwer <= 0.05 + 3.0 * se, "FWER = {}", s.fwer);
    }

    #[test]
    fn oracle_monte_carlo_matches_closed_form() {
        let p = ModelParams {
            m: 1000,
            p: 0.01,
            sigma_eps_sq: 1.0,
            rho: 0.0,
            sigma0_sq: 0.0,
            tau_sq: 99.0,
        };
        let losses = LossParams::unit();
        let s = monte_carlo_metrics(&p, &losses, McRule::Oracle, None, 100_000, 7).unwrap();
        let closed = optimal_risk(&p, &losses).unwrap();
        assert!(
            (s.risk - closed).abs() <= 3.0 * s.mc_se_risk,
            "MC risk {} vs closed form {} (se {})",
            s.risk,
            closed,
            s.mc_se_risk
        );
    }

    #[test]
    fn empirical_type_errors_match_closed_form_on_latents() {
        // Fixed threshold applied to the latent z: realized t1/t2 must match
        // the formulas within 3 Monte Carlo standard errors.
        let p = params(400, 0.1, 9.0);
        let losses = LossParams::unit();
        let scales = derive_scales(&p, &losses).unwrap();
        let c_sq = oracle_cutoff(&scales).c_sq;
        let sigma = scales.sigma();
        let (t1, t2) = type_errors(c_sq.sqrt(), scales.u).unwrap();
        let n = 2000usize;
        let (mut v_rate, mut t_rate) = (KahanSum::new(), KahanSum::new());
        let (mut nulls, mut signals) = (0usize, 0usize);
        for r in 0..n {
            let ds = generate(&p, Seed::new(55, r as u64)).unwrap();
            let rej = fixed_threshold_reject(&ds.z, sigma, c_sq).unwrap();
            let counts = evaluate_rejections(&rej, &ds.theta).unwrap();
            let n_sig = ds.theta.iter().filter(|&&t| t).count();
            nulls += 400 - n_sig;
            signals += n_sig;
            v_rate.add(counts.v_false_rejections as f64);
            t_rate.add(counts.t_false_acceptances as f64);
        }
        let t1_hat = v_rate.total() / nulls as f64;
        let t2_hat = t_rate.total() / signals as f64;
        let se1 = (t1 * (1.0 - t1) / nulls as f64).sqrt();
        let se2 = (t2 * (1.0 - t2) / signals as f64).sqrt();
        assert!(
            (t1_hat - t1).abs() <= 3.0 * se1,
            "t1_hat {t1_hat} vs t1 {t1}"
        );
        assert!(
            (t2_hat - t2).abs() <= 3.0 * se2,
            "t2_hat {t2_hat} vs t2 {t2}"
        );
    }

    #[test]
    fn monte_carlo_minimal_replicates() {
        let p = params(20, 0.1, 4.0);
        let s = monte_carlo_metrics(&p, &LossParams::unit(), McRule::Bh, Some(prob(0.05)), 2, 3)
            .unwrap();
        assert!(s.risk.is_finite());
        assert!(s.mc_se_risk.is_finite());
        assert!(
            monte_carlo_metrics(&p, &LossParams::unit(), McRule::Bh, Some(prob(0.05)), 1, 3)
                .is_err()
        );
    }

    #[test]
    fn monte_carlo_requires_alpha_for_data_rules() {
        let p = params(20, 0.1, 4.0);
        assert!(monte_carlo_metrics(&p, &LossParams::unit(), McRule::Bh, None, 10, 3).is_err());
        assert!(monte_carlo_metrics(&p, &LossParams::unit(), McRule::Oracle, None, 10, 3).is_ok());
    }

    #[test]
    fn monte_carlo_deterministic_across_runs() {
        let p = params(50, 0.1, 4.0);
        let a = monte_carlo_metrics(&p, &LossParams::unit(), McRule::Bh, Some(prob(0.05)), 50, 9)
            .unwrap();
        let b = monte_carlo_metrics(&p, &LossParams::unit(), McRule::Bh, Some(prob(0.05)), 50, 9)
            .unwrap();
        assert_eq!(a.risk.to_bits(), b.risk.to_bits());
        assert_eq!(a.fdr.to_bits(), b.fdr.to_bits());
        assert_eq!(a.fwer.to_bits(), b.fwer.to_bits());
    }

    #[test]
    fn rule_names_round_trip() {
        for rule in McRule::ALL {
            let s = rule.to_string();
            assert_eq!(s.parse::<McRule>().unwrap(), rule);
        }
        assert!("storey".parse::<McRule>().is_err());
    }
}
