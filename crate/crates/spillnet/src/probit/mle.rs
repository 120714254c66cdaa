//! Plain (non-spatial) probit by Fisher-scoring maximum likelihood. Serves
//! as the independent oracle for the Gibbs sampler's rho = 0 behavior.

use super::sar::check_full_rank;
use crate::error::{Error, Result};
use crate::stats::{normal_cdf, normal_pdf};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbitFit {
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    /// Perfect or quasi-perfect separation detected (estimates diverge).
    pub separated: bool,
}

pub fn fit_standard_probit(
    y: &[f64],
    x: &DMatrix<f64>,
    names: &[String],
) -> Result<ProbitFit> {
    let n = y.len();
    let k = x.ncols();
    if x.nrows() != n {
        return Err(Error::Validation(format!(
            "X has {} rows but y has {n}",
            x.nrows()
        )));
    }
    check_full_rank(x, names)?;
    let mut beta = DVector::<f64>::zeros(k);
    let mut loglik = f64::NEG_INFINITY;
    let mut separated = false;
    let mut iterations = 0;
    let mut info = DMatrix::<f64>::zeros(k, k);
    for iter in 0..200 {
        iterations = iter + 1;
        let eta = x * &beta;
        let mut score = DVector::<f64>::zeros(k);
        info.fill(0.0);
        let mut ll = 0.0;
        for t in 0..n {
            let e = eta[t];
            let phi = normal_pdf(e);
            let cdf = normal_cdf(e).clamp(1e-300, 1.0 - 1e-16);
            let onemcdf = (1.0 - cdf).max(1e-300);
            ll += if y[t] > 0.5 { cdf.ln() } else { onemcdf.ln() };
            let resid = if y[t] > 0.5 { phi / cdf } else { -phi / onemcdf };
            let wt = phi * phi / (cdf * onemcdf);
            for a in 0..k {
                score[a] += x[(t, a)] * resid;
                for b in a..k {
                    info[(a, b)] += x[(t, a)] * x[(t, b)] * wt;
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                info[(a, b)] = info[(b, a)];
            }
        }
        let chol = nalgebra::Cholesky::new(info.clone()).ok_or_else(|| {
            Error::Overflow("information matrix not positive definite".into())
        })?;
        let step = chol.solve(&score);
        beta += &step;
        if beta.norm() > 1e3 || eta.amax() > 37.0 {
            separated = true;
            break;
        }
        let improved = ll - loglik;
        loglik = ll;
        if iter > 0 && improved.abs() < 1e-10 * (1.0 + ll.abs()) {
            break;
        }
    }
    let se = if separated {
        vec![f64::INFINITY; k]
    } else {
        let chol = nalgebra::Cholesky::new(info)
            .ok_or_else(|| Error::Overflow("information matrix not positive definite".into()))?;
        let inv = chol.inverse();
        (0..k).map(|j| inv[(j, j)].sqrt()).collect()
    };
    Ok(ProbitFit {
        coef: beta.as_slice().to_vec(),
        se,
        loglik,
        iterations,
        separated,
    })
}
