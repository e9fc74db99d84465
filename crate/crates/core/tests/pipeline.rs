//! End-to-end library scenarios across module boundaries.

use abos::asymptotics::{build_sequence, AlphaRule, Regime, RegimeSpec};
use abos::risk::{monte_carlo_metrics, McRule};
use abos::synth::{generate, Seed};
use abos::thresholds::{bh_reject, fixed_threshold_reject, oracle_cutoff};
use abos::{derive_scales, evaluate_rejections, LossParams, ModelParams, Probability};

fn sparse_params(m: usize) -> ModelParams {
    ModelParams {
        m,
        p: 0.02,
        sigma_eps_sq: 1.0,
        rho: 0.6,
        sigma0_sq: 0.0,
        tau_sq: 12.0,
    }
}

#[test]
fn bh_controls_empirical_fdr() {
    let params = sparse_params(500);
    let losses = LossParams::unit();
    let summary = monte_carlo_metrics(
        &params,
        &losses,
        McRule::Bh,
        Some(Probability::new(0.05).unwrap()),
        2000,
        2024,
    )
    .unwrap();
    // BH bounds FDR by alpha * (fraction of true nulls) under independence;
    // the centered statistics are close enough for a 3-se budget.
    let se = summary.fdr.max(0.01) / (2000.0f64).sqrt();
    assert!(
        summary.fdr <= 0.05 + 3.0 * se,
        "empirical FDR = {}",
        summary.fdr
    );
}

#[test]
fn oracle_has_lowest_monte_carlo_risk() {
    let params = sparse_params(300);
    let losses = LossParams::unit();
    let alpha = Some(Probability::new(0.05).unwrap());
    let oracle = monte_carlo_metrics(&params, &losses, McRule::Oracle, None, 3000, 99).unwrap();
    for rule in [
        McRule::BfdrFixed,
        McRule::Gw,
        McRule::Bonferroni,
        McRule::Bh,
    ] {
        let other = monte_carlo_metrics(&params, &losses, rule, alpha, 3000, 99).unwrap();
        let slack = 3.0 * (oracle.mc_se_risk.powi(2) + other.mc_se_risk.powi(2)).sqrt();
        assert!(
            oracle.risk <= other.risk + slack,
            "{rule}: oracle risk {} vs {} (slack {slack})",
            oracle.risk,
            other.risk
        );
    }
}

#[test]
fn centered_and_latent_decisions_agree_for_most_coordinates() {
    let params = sparse_params(2000);
    let losses = LossParams::unit();
    let scales = derive_scales(&params, &losses).unwrap();
    let c_sq = oracle_cutoff(&scales).c_sq;
    let sigma = scales.sigma();
    let ds = generate(&params, Seed::new(1, 0)).unwrap();
    let centered = fixed_threshold_reject(&ds.u_centered, sigma, c_sq).unwrap();
    let latent = fixed_threshold_reject(&ds.z, sigma, c_sq).unwrap();
    let disagreements = centered
        .rejected
        .iter()
        .zip(&latent.rejected)
        .filter(|(a, b)| a != b)
        .count();
    assert!(
        disagreements <= 3,
        "{disagreements} disagreements at m = 2000"
    );

    // Confusion counting is consistent between the two views.
    let cc = evaluate_rejections(&centered, &ds.theta).unwrap();
    assert!(cc.r_rejections == centered.count);
}

#[test]
fn sequence_points_feed_every_rule() {
    let spec = RegimeSpec {
        regime: Regime::ExtremeSparse,
        s: Some(2.0),
        c_p: None,
        c_limit: 1.5,
        delta: 2.0,
        alpha: AlphaRule::Constant(0.1),
        m_grid: vec![200, 2000],
        sigma_eps_sq: 2.0,
        rho: 0.3,
        sigma0_sq: 0.5,
    };
    let points = build_sequence(&spec).unwrap();
    for pt in &points {
        let ds = generate(&pt.params, Seed::new(3, 0)).unwrap();
        let sigma = pt.scales.sigma();
        let bh = bh_reject(&ds.u_centered, sigma, Probability::new(pt.alpha).unwrap()).unwrap();
        let counts = evaluate_rejections(&bh, &ds.theta).unwrap();
        assert!(counts.r_rejections <= pt.m);
        assert!((pt.scales.delta - 2.0).abs() < 1e-12);
    }
}
