//! Bayesian Gibbs sampler for the spatial-autoregressive probit
//! `y* = rho W y* + X beta + eps`, `eps ~ N(0, I)`, `y = 1{y* >= 0}`.
//! Latents are drawn coordinate-wise from truncated normals under the
//! joint precision `(I - rho W)'(I - rho W)`; beta comes from its
//! conjugate normal conditional; rho is drawn by griddy Gibbs from its
//! conditional with beta integrated out (flat-prior collapse), using the
//! precomputed log-determinant grid. Collapsing beta removes the
//! beta-scale/rho random-walk coupling that makes plain Metropolis mix
//! slowly here. A Metropolis step is kept for configurations that pin
//! rho away from the grid.

use super::weights::SpatialWeights;
use crate::error::{Error, Result};
use crate::stats::quantile;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub draws: usize,
    pub burn_in: usize,
    /// Grid resolution of the griddy-Gibbs rho step.
    pub rho_grid_points: usize,
    /// Prior variance of each beta coordinate (diffuse normal prior).
    pub beta_prior_var: f64,
    /// Pin rho (used by the rho = 0 oracle checks).
    pub fix_rho: Option<f64>,
    /// Starting value of the rho chain.
    pub init_rho: f64,
    /// Keep the post-burn-in draws in the fit for auditing.
    pub keep_draws: bool,
    /// Proceed on a rank-deficient design instead of erroring. The proper
    /// normal prior keeps the posterior well-defined; coefficients inside
    /// the collinear span are then prior-identified (wide, insignificant)
    /// while the rest are unaffected. Needed for worlds with so few
    /// markets that the out-vertex-level columns cannot be independent.
    pub allow_collinear: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            draws: 2000,
            burn_in: 500,
            rho_grid_points: 200,
            beta_prior_var: 100.0,
            fix_rho: None,
            init_rho: 0.0,
            keep_draws: false,
            allow_collinear: false,
        }
    }
}

/// Posterior summaries of one window's fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SarProbitFit {
    pub coef_names: Vec<String>,
    pub beta_mean: Vec<f64>,
    pub beta_sd: Vec<f64>,
    pub beta_ci: Vec<(f64, f64)>,
    pub beta_significant: Vec<bool>,
    pub rho_mean: f64,
    pub rho_sd: f64,
    pub rho_ci: (f64, f64),
    pub rho_significant: bool,
    pub draws: usize,
    pub burn_in: usize,
    pub acceptance_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_draws: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_draws: Option<Vec<f64>>,
}

const RHO_BOUND: f64 = 0.995;

/// Standard normal truncated to [alpha, inf): plain rejection when the
/// bound is loose, exponential tilting otherwise.
fn truncnorm_lower<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    if alpha < 0.5 {
        loop {
            let z: f64 = StandardNormal.sample(rng);
            if z >= alpha {
                return z;
            }
        }
    } else {
        let lambda = 0.5 * (alpha + (alpha * alpha + 4.0).sqrt());
        loop {
            let e: f64 = rng.random::<f64>();
            let z = alpha - (1.0 - e).ln() / lambda;
            let u: f64 = rng.random();
            if u <= (-(z - lambda) * (z - lambda) / 2.0).exp() {
                return z;
            }
        }
    }
}

/// Draw from N(mean, sd^2) truncated to [0, inf) when `positive`, else to
/// (-inf, 0).
fn truncnorm<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64, positive: bool) -> f64 {
    if positive {
        mean + sd * truncnorm_lower(rng, -mean / sd)
    } else {
        mean - sd * truncnorm_lower(rng, mean / sd)
    }
}

/// Greedy Gram-Schmidt rank check that names the offending columns.
pub(crate) fn check_full_rank(x: &DMatrix<f64>, names: &[String]) -> Result<()> {
    let n = x.nrows();
    let k = x.ncols();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut bad = Vec::new();
    for j in 0..k {
        let mut v = DVector::from_iterator(n, x.column(j).iter().copied());
        let norm0 = v.norm();
        if norm0 <= 1e-12 {
            bad.push(names.get(j).cloned().unwrap_or_else(|| format!("col{j}")));
            continue;
        }
        for b in &basis {
            let proj = b.dot(&v);
            v -= b * proj;
        }
        if v.norm() <= 1e-9 * norm0.max(1.0) {
            bad.push(names.get(j).cloned().unwrap_or_else(|| format!("col{j}")));
        } else {
            let norm = v.norm();
            basis.push(v / norm);
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::RankDeficient(bad))
    }
}

/// Gibbs sampler for the SAR probit. `y` holds 0/1 indicators, `x` the
/// design matrix in pair order, `w` the spatial weights over the same
/// order.
pub fn fit_sar_probit<R: Rng + ?Sized>(
    y: &[f64],
    x: &DMatrix<f64>,
    coef_names: &[String],
    w: &SpatialWeights,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<SarProbitFit> {
    let n = y.len();
    let k = x.ncols();
    if x.nrows() != n || w.n_pairs() != n {
        return Err(Error::Validation(format!(
            "dimension mismatch: y has {n} rows, X has {}, W has {}",
            x.nrows(),
            w.n_pairs()
        )));
    }
    if let Err(e) = check_full_rank(x, coef_names) {
        if !cfg.allow_collinear {
            return Err(e);
        }
    }
    let grid_points = cfg.rho_grid_points.max(50);
    let rho_grid: Vec<f64> = (0..grid_points)
        .map(|i| -RHO_BOUND + 2.0 * RHO_BOUND * i as f64 / (grid_points - 1) as f64)
        .collect();
    let log_dets: Vec<f64> = rho_grid.iter().map(|&r| w.log_det(r)).collect();
    let w_dense = w.dense();
    let w_sq = w.squared();

    // conjugate pieces for beta
    let xt = x.transpose();
    let mut a_beta = &xt * x;
    for j in 0..k {
        a_beta[(j, j)] += 1.0 / cfg.beta_prior_var;
    }
    let chol_beta = Cholesky::new(a_beta)
        .ok_or_else(|| Error::RankDeficient(vec!["X'X not positive definite".into()]))?;

    let mut beta = DVector::<f64>::zeros(k);
    let mut rho = cfg.fix_rho.unwrap_or(cfg.init_rho.clamp(-RHO_BOUND, RHO_BOUND));
    let mut y_star = DVector::<f64>::from_iterator(
        n,
        y.iter().map(|&v| if v > 0.5 { 0.7 } else { -0.7 }),
    );

    // precision P(rho) = (I - rho W)'(I - rho W) = I - 2 rho W + rho^2 W^2
    // for symmetric W, assembled densely per rho update
    let assemble_p = |rho: f64| -> DMatrix<f64> {
        let mut p = DMatrix::<f64>::zeros(n, n);
        let rho2 = rho * rho;
        for c in 0..n {
            for r in 0..n {
                p[(r, c)] = rho2 * w_sq[(r, c)] - 2.0 * rho * w_dense[(r, c)];
            }
            p[(c, c)] += 1.0;
        }
        p
    };
    let mut p = assemble_p(rho);

    let total = cfg.burn_in + cfg.draws;
    let mut beta_draws: Vec<Vec<f64>> = Vec::with_capacity(cfg.draws);
    let mut rho_draws: Vec<f64> = Vec::with_capacity(cfg.draws);
    let mut mu = DVector::<f64>::zeros(n);
    let mut wy = DVector::<f64>::zeros(n);
    let cell = rho_grid[1] - rho_grid[0];

    for sweep in 0..total {
        // mu = (I - rho W)^{-1} X beta via the eigendecomposition of W
        let xb = x * &beta;
        let q = w.eigenvectors();
        let lam = w.eigenvalues();
        let tmp = q.transpose() * &xb;
        let scaled = DVector::from_iterator(
            n,
            tmp.iter().zip(lam.iter()).map(|(v, l)| v / (1.0 - rho * l)),
        );
        mu.copy_from(&(q * scaled));

        // latent sweep: v = P (y* - mu), maintained incrementally
        let mut v = &p * &(&y_star - &mu);
        for i in 0..n {
            let pii = p[(i, i)];
            let delta_i = y_star[i] - mu[i];
            let m_i = mu[i] - (v[i] - pii * delta_i) / pii;
            let sd_i = (1.0 / pii).sqrt();
            let newval = truncnorm(rng, m_i, sd_i, y[i] > 0.5);
            let delta = newval - y_star[i];
            if delta != 0.0 {
                y_star[i] = newval;
                // v += P[:, i] * delta
                for r in 0..n {
                    v[r] += p[(r, i)] * delta;
                }
            }
        }

        // beta | y*, rho
        w.matvec(y_star.as_slice(), wy.as_mut_slice());
        let z = &y_star - &wy * rho;
        let rhs = &xt * &z;
        let mean_beta = chol_beta.solve(&rhs);
        let noise = DVector::from_iterator(k, (0..k).map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            g
        }));
        let corr = chol_beta.l().transpose().solve_upper_triangular(&noise).ok_or_else(
            || Error::Overflow("triangular solve failed in beta draw".into()),
        )?;
        beta = mean_beta + corr;

        // rho | y* (beta integrated out under its normal prior):
        // pi(rho | y*) ∝ |A(rho)| exp(-S(rho)/2) with
        // S(rho) = ||A y*||^2 - b(rho)' G^-1 b(rho), b(rho) = X' A y*,
        // G = X'X + I/tau^2; S is an exact quadratic in rho.
        if cfg.fix_rho.is_none() {
            let b0 = &xt * &y_star;
            let b1 = &xt * &wy;
            let g0 = chol_beta.solve(&b0);
            let g1 = chol_beta.solve(&b1);
            let s_const = y_star.dot(&y_star) - b0.dot(&g0);
            let s_lin = y_star.dot(&wy) - b0.dot(&g1);
            let s_quad = wy.dot(&wy) - b1.dot(&g1);
            let mut best = f64::NEG_INFINITY;
            let logw: Vec<f64> = rho_grid
                .iter()
                .zip(&log_dets)
                .map(|(&r, &ld)| {
                    let lw = ld - 0.5 * (s_const - 2.0 * r * s_lin + r * r * s_quad);
                    if lw > best {
                        best = lw;
                    }
                    lw
                })
                .collect();
            let weights: Vec<f64> = logw.iter().map(|lw| (lw - best).exp()).collect();
            let total_w: f64 = weights.iter().sum();
            let mut u: f64 = rng.random::<f64>() * total_w;
            let mut idx = grid_points - 1;
            for (i, wgt) in weights.iter().enumerate() {
                if u <= *wgt {
                    idx = i;
                    break;
                }
                u -= *wgt;
            }
            let jitter: f64 = (rng.random::<f64>() - 0.5) * cell;
            rho = (rho_grid[idx] + jitter).clamp(-RHO_BOUND, RHO_BOUND);
            p = assemble_p(rho);
        }

        if sweep >= cfg.burn_in {
            beta_draws.push(beta.as_slice().to_vec());
            rho_draws.push(rho);
        }
    }

    let summarize = |draws: &[f64]| -> (f64, f64, (f64, f64)) {
        let mean = crate::stats::mean(draws);
        let sd = crate::stats::sample_variance(draws).sqrt();
        let ci = (quantile(draws, 0.025), quantile(draws, 0.975));
        (mean, sd, ci)
    };
    let mut beta_mean = Vec::with_capacity(k);
    let mut beta_sd = Vec::with_capacity(k);
    let mut beta_ci = Vec::with_capacity(k);
    let mut beta_significant = Vec::with_capacity(k);
    for j in 0..k {
        let col: Vec<f64> = beta_draws.iter().map(|d| d[j]).collect();
        let (m, s, ci) = summarize(&col);
        beta_mean.push(m);
        beta_sd.push(s);
        beta_ci.push(ci);
        beta_significant.push(ci.0 > 0.0 || ci.1 < 0.0);
    }
    let (rho_mean, rho_sd, rho_ci) = summarize(&rho_draws);
    let rho_significant = rho_ci.0 > 0.0 || rho_ci.1 < 0.0;
    // griddy Gibbs draws from the exact conditional, so every rho update
    // is an acceptance
    let acceptance_rate = if cfg.fix_rho.is_none() { 1.0 } else { 0.0 };
    Ok(SarProbitFit {
        coef_names: coef_names.to_vec(),
        beta_mean,
        beta_sd,
        beta_ci,
        beta_significant,
        rho_mean,
        rho_sd,
        rho_ci,
        rho_significant,
        draws: cfg.draws,
        burn_in: cfg.burn_in,
        acceptance_rate,
        beta_draws: if cfg.keep_draws { Some(beta_draws) } else { None },
        rho_draws: if cfg.keep_draws { Some(rho_draws) } else { None },
    })
}
