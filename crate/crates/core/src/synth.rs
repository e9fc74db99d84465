//! Seeded generation of observation vectors through the equicorrelation
//! decomposition, centering, and empirical moment checks.
//!
//! An equicorrelated Gaussian noise vector splits into independent
//! coordinates plus one shared component: X_i = Z_i + Q with
//! Z_i ~ N(mu_i, sigma_eps_sq * (1 - rho)) independent and
//! Q ~ N(0, sigma_eps_sq * rho) independent of Z. Generation always goes
//! through this split — never through an m x m covariance factorization — so
//! the cost is O(m) and the structural identity x = z + q holds exactly in
//! the produced data.
//!
//! # Reproducibility
//!
//! Randomness comes from ChaCha8 keyed by a master seed, with one stream per
//! replicate: replicate `r` of master seed `s` reads stream `r` of
//! `ChaCha8Rng::seed_from_u64(s)`. Streams are independent, so replicates may
//! be produced concurrently in any order without changing any result.
//! Multi-point sweeps derive one sub-master per point via [`point_master`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{validate_model, ModelParams};
use crate::numerics::KahanSum;

/// Reproducibility token: a master seed plus the stream index used for one
/// dataset. Identical (params, seed) always reproduce a bit-identical
/// [`Dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// Fixed mixing function giving each sweep point its own master seed, so
/// replicate streams never collide across points.
pub fn point_master(master: u64, point: u64) -> u64 {
    master ^ point.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One realization of the model with full latent provenance: the indicator
/// vector, effects, independent components, shared component, observations,
/// and centered statistics. Latents are kept because oracle risk evaluation
/// needs `theta` and the centered-vs-latent comparison needs `z`.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub theta: Vec<bool>,
    pub mu: Vec<f64>,
    pub z: Vec<f64>,
    pub q: f64,
    pub x: Vec<f64>,
    pub u_centered: Vec<f64>,
    pub seed: Seed,
}

impl Dataset {
    pub fn m(&self) -> usize {
        self.x.len()
    }

    /// CSV dump, one row per coordinate: `index,theta,mu,z,x,u`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "index,theta,mu,z,x,u")?;
        for i in 0..self.m() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                i,
                u8::from(self.theta[i]),
                self.mu[i],
                self.z[i],
                self.x[i],
                self.u_centered[i]
            )?;
        }
        Ok(())
    }
}

/// Draw one dataset. Per coordinate the order is theta_i, mu_i, noise_i; the
/// shared component is drawn last, and only when rho > 0 (at rho = 0 its law
/// is the point mass at zero, so q = 0 exactly and x = z bitwise).
pub fn generate(params: &ModelParams, seed: Seed) -> Result<Dataset> {
    let report = validate_model(params);
    if !report.is_ok() {
        return Err(Error::InvalidParams(report.violations));
    }
    let m = params.m;
    let mut rng = seed.rng();

    let sd_null = params.sigma0_sq.sqrt();
    let sd_alt = (params.sigma0_sq + params.tau_sq).sqrt();
    let sd_noise = (params.sigma_eps_sq * (1.0 - params.rho)).sqrt();

    let mut theta = Vec::with_capacity(m);
    let mut mu = Vec::with_capacity(m);
    let mut z = Vec::with_capacity(m);
    for _ in 0..m {
        let t = rng.random_bool(params.p);
        let effect_draw: f64 = StandardNormal.sample(&mut rng);
        let noise_draw: f64 = StandardNormal.sample(&mut rng);
        let mu_i = if t {
            sd_alt * effect_draw
        } else {
            sd_null * effect_draw
        };
        theta.push(t);
        mu.push(mu_i);
        z.push(mu_i + sd_noise * noise_draw);
    }
    let q = if params.rho > 0.0 {
        let draw: f64 = StandardNormal.sample(&mut rng);
        (params.sigma_eps_sq * params.rho).sqrt() * draw
    } else {
        0.0
    };
    let x: Vec<f64> = z.iter().map(|zi| zi + q).collect();
    let u_centered = center(&x)?;
    Ok(Dataset {
        theta,
        mu,
        z,
        q,
        x,
        u_centered,
        seed,
    })
}

/// Subtract the arithmetic mean from every entry.
pub fn center(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::Domain("center requires a non-empty vector".into()));
    }
    let mut acc = KahanSum::new();
    for &v in x {
        acc.add(v);
    }
    let mean = acc.total() / x.len() as f64;
    Ok(x.iter().map(|v| v - mean).collect())
}

/// Pooled first and second moments of one tracked coordinate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CoordMoments {
    pub index: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub var: f64,
    pub var_se: f64,
}

/// Pooled covariance of one tracked pair.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PairMoments {
    pub i: usize,
    pub j: usize,
    pub cov: f64,
    pub cov_se: f64,
}

/// Deviations of pooled sample moments from the model's marginal law:
/// Var(X_i) = sigma0_sq + p * tau_sq + sigma_eps_sq and
/// Cov(X_i, X_j) = sigma_eps_sq * rho. Per-coordinate and per-pair values are
/// retained alongside the worst-case deviations so callers can compare each
/// one against its own Monte Carlo standard error.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentReport {
    pub mean_abs_dev: f64,
    pub var_dev: f64,
    pub offdiag_cov_dev: f64,
    pub n_replicates: usize,
    pub var_target: f64,
    pub cov_target: f64,
    pub coords: Vec<CoordMoments>,
    pub pairs: Vec<PairMoments>,
}

/// Estimate marginal moments over `n_replicates` independent datasets.
/// Replicate `r` uses stream `r` of `master_seed`; the result is independent
/// of evaluation order.
pub fn empirical_moments(
    params: &ModelParams,
    n_replicates: usize,
    tracked_pairs: &[(usize, usize)],
    master_seed: u64,
) -> Result<MomentReport> {
    if n_replicates < 2 {
        return Err(Error::Domain(format!(
            "empirical_moments requires n_replicates >= 2, got {n_replicates}"
        )));
    }
    for &(i, j) in tracked_pairs {
        if i >= params.m || j >= params.m || i == j {
            return Err(Error::Domain(format!(
                "tracked pair ({i}, {j}) invalid for m = {}",
                params.m
            )));
        }
    }
    let mut coords: Vec<usize> = tracked_pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    coords.sort_unstable();
    coords.dedup();
    let coord_pos: std::collections::HashMap<usize, usize> =
        coords.iter().enumerate().map(|(k, &c)| (c, k)).collect();

    // One row of tracked values per replicate: coordinate values, their
    // squares, then pair products. Rows come back in replicate order, so the
    // reduction below is scheduling-independent.
    let n_coords = coords.len();
    let rows: Vec<Result<Vec<f64>>> = (0..n_replicates)
        .into_par_iter()
        .map(|r| {
            let ds = generate(params, Seed::new(master_seed, r as u64))?;
            let mut row = Vec::with_capacity(2 * n_coords + tracked_pairs.len());
            for &c in &coords {
                row.push(ds.x[c]);
            }
            for &c in &coords {
                row.push(ds.x[c] * ds.x[c]);
            }
            for &(i, j) in tracked_pairs {
                row.push(ds.x[i] * ds.x[j]);
            }
            Ok(row)
        })
        .collect();

    let n = n_replicates as f64;
    let width = 2 * n_coords + tracked_pairs.len();
    let mut sums = vec![KahanSum::new(); width];
    let mut sq_sums = vec![KahanSum::new(); width];
    for row in rows {
        let row = row?;
        for (k, &v) in row.iter().enumerate() {
            sums[k].add(v);
            sq_sums[k].add(v * v);
        }
    }
    let mean = |k: usize| sums[k].total() / n;
    // Sample variance of the k-th tracked column; the standard error of a
    // column's mean is sqrt(column_var / n).
    let column_var = |k: usize| {
        let mu = mean(k);
        ((sq_sums[k].total() - n * mu * mu) / (n - 1.0)).max(0.0)
    };

    let coord_moments: Vec<CoordMoments> = coords
        .iter()
        .enumerate()
        .map(|(k, &index)| {
            let mu = mean(k);
            let sq_col = n_coords + k;
            let var = (sums[sq_col].total() - n * mu * mu) / (n - 1.0);
            CoordMoments {
                index,
                mean: mu,
                mean_se: (column_var(k) / n).sqrt(),
                var,
                var_se: (column_var(sq_col) / n).sqrt(),
            }
        })
        .collect();

    let pair_moments: Vec<PairMoments> = tracked_pairs
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let col = 2 * n_coords + k;
            let mi = mean(coord_pos[&i]);
            let mj = mean(coord_pos[&j]);
            let cov = (sums[col].total() - n * mi * mj) / (n - 1.0);
            PairMoments {
                i,
                j,
                cov,
                cov_se: (column_var(col) / n).sqrt(),
            }
        })
        .collect();

    let var_target = params.sigma0_sq + params.p * params.tau_sq + params.sigma_eps_sq;
    let cov_target = params.sigma_eps_sq * params.rho;
    let mean_abs_dev = coord_moments
        .iter()
        .map(|c| c.mean.abs())
        .fold(0.0, f64::max);
    let var_dev = coord_moments
        .iter()
        .map(|c| (c.var - var_target).abs())
        .fold(0.0, f64::max);
    let offdiag_cov_dev = pair_moments
        .iter()
        .map(|p| (p.cov - cov_target).abs())
        .fold(0.0, f64::max);

    Ok(MomentReport {
        mean_abs_dev,
        var_dev,
        offdiag_cov_dev,
        n_replicates,
        var_target,
        cov_target,
        coords: coord_moments,
        pairs: pair_moments,
    })
}
