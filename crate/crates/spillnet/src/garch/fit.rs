//! Joint one-step estimation. All parameters (mean, variance,
//! distribution) are maximized together with a quasi-Newton search over a
//! smooth unconstrained reparametrization, from a fixed table of
//! moment-based starting points.

use super::likelihood::{log_likelihood, ModelParams};
use super::{ArfimaSpec, FilterFit, GarchFamily, GarchSpec, JohnsonSuParams};
use crate::error::{Error, Result};
use crate::stats::{mean, minimize_bfgs, variance};
use serde::{Deserialize, Serialize};

/// Orders of one candidate model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelOrders {
    pub p: usize,
    pub q: usize,
    pub d_free: bool,
    pub family: GarchFamily,
    pub r: usize,
    pub s: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitConfig {
    /// Number of deterministic multi-starts.
    pub starts: usize,
    pub max_iter: usize,
    /// Convergence tolerance on the relative log-likelihood change.
    pub rel_tol: f64,
    /// Truncation of the fractional-differencing expansion.
    pub frac_trunc: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            starts: 5,
            max_iter: 200,
            rel_tol: 1e-8,
            frac_trunc: 1000,
        }
    }
}

/// Smooth bijection from an unconstrained vector onto the feasible
/// parameter set of one model. Positivity via exp, stationarity and
/// invertibility of the ARMA polynomials via partial autocorrelations,
/// GARCH persistence via a logistic normalization that keeps the relevant
/// sum below one.
struct Transform {
    orders: ModelOrders,
}

fn pacf_to_ar(kappa: &[f64]) -> Vec<f64> {
    let m = kappa.len();
    let mut phi = vec![0.0; m];
    let mut prev = vec![0.0; m];
    for j in 0..m {
        phi[j] = kappa[j];
        for i in 0..j {
            phi[i] = prev[i] - kappa[j] * prev[j - 1 - i];
        }
        prev[..=j].copy_from_slice(&phi[..=j]);
    }
    phi
}

/// Logistic normalization: maps raw logits to positive weights whose sum
/// stays below `cap`.
fn logits_to_simplex(raw: &[f64], cap: f64) -> Vec<f64> {
    let denom: f64 = 1.0 + raw.iter().map(|u| u.exp()).sum::<f64>();
    raw.iter().map(|u| cap * u.exp() / denom).collect()
}

fn simplex_logits(targets: &[f64], cap: f64) -> Vec<f64> {
    let total: f64 = targets.iter().sum();
    assert!(total < cap, "start targets exceed persistence cap");
    targets
        .iter()
        .map(|&a| ((a / cap) / (1.0 - total / cap)).ln())
        .collect()
}

fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

const PERSISTENCE_CAP: f64 = 0.999;
const LAMBDA_BOUND: f64 = 5.0;

impl Transform {
    fn new(orders: ModelOrders) -> Self {
        Transform { orders }
    }

    fn dim(&self) -> usize {
        let o = &self.orders;
        let family = match o.family {
            GarchFamily::Garch => 1 + o.r + o.s,
            GarchFamily::Gjr | GarchFamily::Egarch => 1 + 2 * o.r + o.s,
            GarchFamily::Aparch => 2 + 2 * o.r + o.s,
        };
        1 + o.p + o.q + usize::from(o.d_free) + family + 2
    }

    fn to_natural(&self, u: &[f64]) -> ModelParams {
        let o = &self.orders;
        debug_assert_eq!(u.len(), self.dim());
        let mut idx = 0;
        let mut take = |n: usize| {
            let s = &u[idx..idx + n];
            idx += n;
            s
        };
        let mu = take(1)[0];
        let phi_pacf: Vec<f64> = take(o.p).iter().map(|v| v.tanh()).collect();
        let theta_pacf: Vec<f64> = take(o.q).iter().map(|v| v.tanh()).collect();
        let phi = pacf_to_ar(&phi_pacf);
        let theta: Vec<f64> = pacf_to_ar(&theta_pacf).iter().map(|v| -v).collect();
        let d = if o.d_free {
            0.499 * take(1)[0].tanh()
        } else {
            0.0
        };
        let garch = match o.family {
            GarchFamily::Garch => {
                let omega = take(1)[0].exp();
                let weights = logits_to_simplex(take(o.r + o.s), PERSISTENCE_CAP);
                GarchSpec {
                    family: o.family,
                    r: o.r,
                    s: o.s,
                    omega,
                    alpha: weights[..o.r].to_vec(),
                    gamma: vec![],
                    beta: weights[o.r..].to_vec(),
                    delta: None,
                }
            }
            GarchFamily::Gjr => {
                let omega = take(1)[0].exp();
                let weights = logits_to_simplex(take(2 * o.r + o.s), PERSISTENCE_CAP);
                let alpha = weights[..o.r].to_vec();
                let gamma: Vec<f64> = weights[o.r..2 * o.r].iter().map(|h| 2.0 * h).collect();
                GarchSpec {
                    family: o.family,
                    r: o.r,
                    s: o.s,
                    omega,
                    alpha,
                    gamma,
                    beta: weights[2 * o.r..].to_vec(),
                    delta: None,
                }
            }
            GarchFamily::Egarch => {
                let omega = take(1)[0];
                let alpha = take(o.r).to_vec();
                let gamma = take(o.r).to_vec();
                let beta = logits_to_simplex(take(o.s), PERSISTENCE_CAP);
                GarchSpec {
                    family: o.family,
                    r: o.r,
                    s: o.s,
                    omega,
                    alpha,
                    gamma,
                    beta,
                    delta: None,
                }
            }
            GarchFamily::Aparch => {
                let omega = take(1)[0].exp();
                let delta = 0.25 + 3.75 * sigmoid(take(1)[0]);
                let gamma: Vec<f64> = take(o.r).iter().map(|v| 0.98 * v.tanh()).collect();
                let weights = logits_to_simplex(take(o.r + o.s), PERSISTENCE_CAP);
                GarchSpec {
                    family: o.family,
                    r: o.r,
                    s: o.s,
                    omega,
                    alpha: weights[..o.r].to_vec(),
                    gamma,
                    beta: weights[o.r..].to_vec(),
                    delta: Some(delta),
                }
            }
        };
        let lambda = LAMBDA_BOUND * (take(1)[0] / LAMBDA_BOUND).tanh();
        let zeta = (3.5 * take(1)[0].tanh() - 1.0).exp();
        ModelParams {
            arfima: ArfimaSpec {
                p: o.p,
                q: o.q,
                d,
                mu,
                phi,
                theta,
            },
            garch,
            dist: JohnsonSuParams { lambda, zeta },
        }
    }

    /// Deterministic moment-based starting points in transformed space.
    fn starting_points(&self, returns: &[f64], n_starts: usize) -> Vec<Vec<f64>> {
        let o = &self.orders;
        let mu0 = mean(returns);
        let var0 = variance(returns).max(1e-12);
        // (arch weight, garch weight, zeta, lambda) per start
        let table: [(f64, f64, f64, f64); 5] = [
            (0.08, 0.82, 0.5, 0.0),
            (0.05, 0.90, 0.25, 0.0),
            (0.15, 0.70, 1.0, -0.3),
            (0.02, 0.95, 0.5, 0.3),
            (0.10, 0.60, 2.0, 0.0),
        ];
        let split = |total: f64, n: usize| -> Vec<f64> {
            match n {
                1 => vec![total],
                _ => {
                    let mut v = vec![total * 0.8];
                    let rest = total * 0.2 / (n - 1) as f64;
                    v.extend(std::iter::repeat(rest).take(n - 1));
                    v
                }
            }
        };
        (0..n_starts.max(1).min(table.len()))
            .map(|i| {
                let (a, b, zeta0, lambda0) = table[i];
                let mut u = vec![mu0];
                u.extend(std::iter::repeat(0.0).take(o.p + o.q));
                if o.d_free {
                    u.push((0.1f64 / 0.499).atanh());
                }
                match o.family {
                    GarchFamily::Garch => {
                        u.push((var0 * (1.0 - a - b)).max(1e-14).ln());
                        let mut targets = split(a, o.r);
                        targets.extend(split(b, o.s));
                        u.extend(simplex_logits(&targets, PERSISTENCE_CAP));
                    }
                    GarchFamily::Gjr => {
                        u.push((var0 * (1.0 - a - b - 0.05)).max(1e-14).ln());
                        let mut targets = split(a, o.r);
                        targets.extend(split(0.025, o.r)); // gamma/2
                        targets.extend(split(b, o.s));
                        u.extend(simplex_logits(&targets, PERSISTENCE_CAP));
                    }
                    GarchFamily::Egarch => {
                        let bsum = (a + b).min(0.97);
                        u.push(var0.ln() * (1.0 - bsum));
                        u.extend(std::iter::repeat(-0.05).take(o.r)); // sign effect
                        u.extend(std::iter::repeat(0.15).take(o.r)); // magnitude effect
                        u.extend(simplex_logits(&split(bsum, o.s), PERSISTENCE_CAP));
                    }
                    GarchFamily::Aparch => {
                        u.push((var0 * (1.0 - a - b)).max(1e-14).ln());
                        u.push(-0.1335); // delta = 2
                        u.extend(std::iter::repeat((0.1f64 / 0.98).atanh()).take(o.r));
                        let mut targets = split(a, o.r);
                        targets.extend(split(b, o.s));
                        u.extend(simplex_logits(&targets, PERSISTENCE_CAP));
                    }
                }
                // lambda and zeta
                u.push(lambda0);
                u.push(((zeta0.ln() + 1.0) / 3.5).clamp(-0.999, 0.999).atanh());
                u
            })
            .collect()
    }

    fn param_count(&self) -> usize {
        self.dim()
    }
}

/// Fit one candidate model by joint maximum likelihood with deterministic
/// multi-starts. Fails when no start converges to a finite optimum.
pub fn fit_model(returns: &[f64], orders: ModelOrders, cfg: &FitConfig) -> Result<FilterFit> {
    if returns.len() < 100 {
        return Err(Error::InsufficientSample(format!(
            "need at least 100 observations to fit, got {}",
            returns.len()
        )));
    }
    let var0 = variance(returns);
    if !(var0 > 0.0) || !var0.is_finite() {
        return Err(Error::FitFailed(
            "degenerate variance: series is constant".into(),
        ));
    }
    let transform = Transform::new(orders);
    let objective = |u: &[f64]| {
        let params = transform.to_natural(u);
        match log_likelihood(&params, returns, cfg.frac_trunc) {
            Ok((ll, _, _)) => -ll,
            Err(_) => f64::INFINITY,
        }
    };
    let mut best: Option<crate::stats::MinimizeResult> = None;
    for start in transform.starting_points(returns, cfg.starts) {
        let res = minimize_bfgs(&objective, &start, cfg.max_iter, cfg.rel_tol);
        if res.converged && res.f.is_finite() {
            let better = match &best {
                Some(b) => res.f < b.f,
                None => true,
            };
            if better {
                best = Some(res);
            }
        }
    }
    let best = best.ok_or_else(|| {
        Error::FitFailed(format!(
            "no start converged for arfima({},{})-{}({},{})",
            orders.p,
            orders.q,
            orders.family.name(),
            orders.r,
            orders.s
        ))
    })?;
    let params = transform.to_natural(&best.x);
    let (ll, eps, sigma2) = log_likelihood(&params, returns, cfg.frac_trunc)?;
    let k = transform.param_count();
    let t = returns.len() as f64;
    let std_residuals: Vec<f64> = eps
        .iter()
        .zip(&sigma2)
        .map(|(e, s2)| e / s2.sqrt())
        .collect();
    Ok(FilterFit {
        arfima: params.arfima,
        garch: params.garch,
        dist: params.dist,
        loglik: ll,
        bic: k as f64 * t.ln() - 2.0 * ll,
        n_params: k,
        std_residuals,
        diag_pvalues: None,
    })
}
