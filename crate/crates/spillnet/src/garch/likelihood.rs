use super::fracdiff::frac_diff;
use super::johnson_su::JsuStd;
use super::recursion::variance_path;
use super::{ArfimaSpec, GarchSpec};
use crate::error::{Error, Result};
use crate::stats::variance;

/// Natural-space parameters of the joint model.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub arfima: ArfimaSpec,
    pub garch: GarchSpec,
    pub dist: super::JohnsonSuParams,
}

/// Innovations of the mean equation: `z_t = r_t - mu` is fractionally
/// differenced when `d != 0`, then the ARMA recursion is run with zero
/// pre-sample values.
pub fn mean_residuals(arfima: &ArfimaSpec, returns: &[f64], frac_trunc: usize) -> Vec<f64> {
    let z: Vec<f64> = returns.iter().map(|r| r - arfima.mu).collect();
    let u = if arfima.d != 0.0 {
        frac_diff(&z, arfima.d, frac_trunc)
    } else {
        z
    };
    let n = u.len();
    let mut eps = Vec::with_capacity(n);
    for t in 0..n {
        let mut e = u[t];
        for (i, &phi) in arfima.phi.iter().enumerate() {
            let lag = i + 1;
            if t >= lag {
                e -= phi * u[t - lag];
            }
        }
        for (j, &theta) in arfima.theta.iter().enumerate() {
            let lag = j + 1;
            if t >= lag {
                e -= theta * eps[t - lag];
            }
        }
        eps.push(e);
    }
    eps
}

/// Joint log-likelihood of the ARFIMA-GARCH-Johnson-SU model on `returns`.
/// Returns the log-likelihood together with the residual and
/// conditional-variance paths.
pub fn log_likelihood(
    params: &ModelParams,
    returns: &[f64],
    frac_trunc: usize,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let jsu = JsuStd::new(&params.dist)?;
    let eps = mean_residuals(&params.arfima, returns, frac_trunc);
    let sigma0_sq = variance(&eps).max(1e-12);
    let sigma2 = variance_path(&params.garch, &eps, sigma0_sq, jsu.expected_abs())?;
    let mut ll = 0.0;
    for (e, s2) in eps.iter().zip(&sigma2) {
        let sd = s2.sqrt();
        ll += jsu.logpdf(e / sd) - 0.5 * s2.ln();
    }
    if !ll.is_finite() {
        return Err(Error::Overflow("log-likelihood not finite".into()));
    }
    Ok((ll, eps, sigma2))
}
