use super::{GarchFamily, GarchSpec};
use crate::error::{Error, Result};

/// Conditional-variance recursion for all supported families.
///
/// Pre-sample squared shocks and variances are seeded with `sigma0_sq`;
/// the EGARCH/APARCH asymmetry terms use neutral pre-sample values.
/// `e_abs` is the expected absolute standardized innovation used by the
/// EGARCH magnitude centering.
pub fn variance_path(
    spec: &GarchSpec,
    eps: &[f64],
    sigma0_sq: f64,
    e_abs: f64,
) -> Result<Vec<f64>> {
    if !(sigma0_sq > 0.0) || !sigma0_sq.is_finite() {
        return Err(Error::ParamDomain(format!(
            "seed variance must be positive and finite, got {sigma0_sq}"
        )));
    }
    let n = eps.len();
    let mut sigma2 = Vec::with_capacity(n);
    match spec.family {
        GarchFamily::Garch | GarchFamily::Gjr => {
            let gjr = spec.family == GarchFamily::Gjr;
            for t in 0..n {
                let mut v = spec.omega;
                for (k, &a) in spec.alpha.iter().enumerate() {
                    let lag = k + 1;
                    if t >= lag {
                        let e = eps[t - lag];
                        let mut coeff = a;
                        if gjr && e < 0.0 {
                            coeff += spec.gamma[k];
                        }
                        v += coeff * e * e;
                    } else {
                        // pre-sample shock: expected indicator 1/2
                        let mut coeff = a;
                        if gjr {
                            coeff += 0.5 * spec.gamma[k];
                        }
                        v += coeff * sigma0_sq;
                    }
                }
                for (l, &b) in spec.beta.iter().enumerate() {
                    let lag = l + 1;
                    v += b * if t >= lag { sigma2[t - lag] } else { sigma0_sq };
                }
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Overflow(format!(
                        "variance recursion produced {v} at t={t}"
                    )));
                }
                sigma2.push(v);
            }
        }
        GarchFamily::Egarch => {
            let log_seed = sigma0_sq.ln();
            let mut log_sigma2 = Vec::with_capacity(n);
            for t in 0..n {
                let mut v = spec.omega;
                for (k, &a) in spec.alpha.iter().enumerate() {
                    let lag = k + 1;
                    if t >= lag {
                        let eta = eps[t - lag] / sigma2[t - lag].sqrt();
                        v += a * eta + spec.gamma[k] * (eta.abs() - e_abs);
                    }
                }
                for (l, &b) in spec.beta.iter().enumerate() {
                    let lag = l + 1;
                    v += b * if t >= lag { log_sigma2[t - lag] } else { log_seed };
                }
                if !v.is_finite() || v.abs() > 80.0 {
                    return Err(Error::Overflow(format!(
                        "log-variance recursion produced {v} at t={t}"
                    )));
                }
                log_sigma2.push(v);
                sigma2.push(v.exp());
            }
        }
        GarchFamily::Aparch => {
            let delta = spec
                .delta
                .ok_or_else(|| Error::ParamDomain("APARCH requires delta".into()))?;
            let seed_pow = sigma0_sq.powf(delta / 2.0);
            let mut s_pow = Vec::with_capacity(n);
            for t in 0..n {
                let mut v = spec.omega;
                for (k, &a) in spec.alpha.iter().enumerate() {
                    let lag = k + 1;
                    if t >= lag {
                        let e = eps[t - lag];
                        v += a * (e.abs() - spec.gamma[k] * e).powf(delta);
                    } else {
                        v += a * seed_pow;
                    }
                }
                for (l, &b) in spec.beta.iter().enumerate() {
                    let lag = l + 1;
                    v += b * if t >= lag { s_pow[t - lag] } else { seed_pow };
                }
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Overflow(format!(
                        "power-variance recursion produced {v} at t={t}"
                    )));
                }
                s_pow.push(v);
                let s2 = v.powf(2.0 / delta);
                if !s2.is_finite() || !(s2 > 0.0) {
                    return Err(Error::Overflow(format!("sigma^2 not finite at t={t}")));
                }
                sigma2.push(s2);
            }
        }
    }
    Ok(sigma2)
}

/// Public variance-path operation. For the EGARCH magnitude centering this
/// entry point uses the Gaussian expected absolute innovation
/// `sqrt(2/pi)`; the likelihood path recomputes it under the fitted
/// Johnson-SU parameters.
pub fn garch_variance_path(spec: &GarchSpec, eps: &[f64], sigma0_sq: f64) -> Result<Vec<f64>> {
    spec.validate()?;
    variance_path(
        spec,
        eps,
        sigma0_sq,
        (2.0 / std::f64::consts::PI).sqrt(),
    )
}
