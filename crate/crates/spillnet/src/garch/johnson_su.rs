//! Johnson-SU innovation distribution.
//!
//! The raw variable is `X = sinh(lambda + zeta * Z)` with `Z` standard
//! normal, density `f(x) = (2*pi)^(-1/2) * J * exp(-z^2/2)` where
//! `z = (asinh(x) - lambda) / zeta` and `J = 1/(zeta * sqrt(x^2 + 1))`.
//! `lambda` controls skewness; `zeta > 0` controls the tails (small values
//! approach the normal after standardization). Because the innovation of
//! the filter must have mean 0 and variance 1, everything here works on
//! the location/scale-standardized version `eta = (X - m) / s` with `m`
//! and `s` the analytic raw mean and standard deviation.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JohnsonSuParams {
    pub lambda: f64,
    pub zeta: f64,
}

impl JohnsonSuParams {
    pub fn new(lambda: f64, zeta: f64) -> Result<Self> {
        if !(zeta > 0.0) || !zeta.is_finite() || !lambda.is_finite() {
            return Err(Error::ParamDomain(format!(
                "Johnson-SU requires finite lambda and zeta > 0, got lambda={lambda}, zeta={zeta}"
            )));
        }
        Ok(JohnsonSuParams { lambda, zeta })
    }

    /// Mean of the raw (unstandardized) variable.
    pub fn raw_mean(&self) -> f64 {
        let w_sqrt = (0.5 * self.zeta * self.zeta).exp();
        w_sqrt * self.lambda.sinh()
    }

    /// Variance of the raw variable: (w-1)(w cosh(2 lambda) + 1)/2.
    pub fn raw_variance(&self) -> f64 {
        let z2 = self.zeta * self.zeta;
        let w = z2.exp();
        0.5 * z2.exp_m1() * (w * (2.0 * self.lambda).cosh() + 1.0)
    }
}

/// Precomputed constants for repeated standardized-density evaluation.
#[derive(Debug, Clone, Copy)]
pub struct JsuStd {
    lambda: f64,
    zeta: f64,
    m: f64,
    s: f64,
    log_const: f64,
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

impl JsuStd {
    pub fn new(p: &JohnsonSuParams) -> Result<Self> {
        if !(p.zeta > 0.0) {
            return Err(Error::ParamDomain(format!(
                "Johnson-SU requires zeta > 0, got {}",
                p.zeta
            )));
        }
        let m = p.raw_mean();
        let v = p.raw_variance();
        if !(v > 0.0) || !v.is_finite() || !m.is_finite() {
            return Err(Error::ParamDomain(
                "Johnson-SU moments not finite for these parameters".into(),
            ));
        }
        let s = v.sqrt();
        Ok(JsuStd {
            lambda: p.lambda,
            zeta: p.zeta,
            m,
            s,
            log_const: s.ln() - p.zeta.ln() - HALF_LN_2PI,
        })
    }

    /// Log density of the standardized innovation at `y`.
    #[inline]
    pub fn logpdf(&self, y: f64) -> f64 {
        let x = self.m + self.s * y;
        let z = (x.asinh() - self.lambda) / self.zeta;
        self.log_const - 0.5 * (x * x + 1.0).ln() - 0.5 * z * z
    }

    pub fn mean_raw(&self) -> f64 {
        self.m
    }

    pub fn sd_raw(&self) -> f64 {
        self.s
    }

    /// Expected absolute value of the standardized innovation, by composite
    /// Simpson quadrature of |eta(z)| against the normal weight. The
    /// integrand has a kink where eta crosses zero, so the quadrature is
    /// split there and each side is smooth.
    pub fn expected_abs(&self) -> f64 {
        let f = |z: f64| {
            let eta = ((self.lambda + self.zeta * z).sinh() - self.m) / self.s;
            eta.abs() * (-0.5 * z * z).exp()
        };
        let kink = (self.m.asinh() - self.lambda) / self.zeta;
        let simpson = |a: f64, b: f64, n: usize| -> f64 {
            if b <= a {
                return 0.0;
            }
            let h = (b - a) / n as f64;
            let mut acc = f(a) + f(b);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(a + i as f64 * h);
            }
            acc * h / 3.0
        };
        let lo = -10.0f64;
        let hi = 10.0f64;
        let split = kink.clamp(lo, hi);
        (simpson(lo, split, 400) + simpson(split, hi, 400))
            / (2.0 * std::f64::consts::PI).sqrt()
    }

    /// Draw one standardized innovation.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        ((self.lambda + self.zeta * z).sinh() - self.m) / self.s
    }
}

/// Log of the standardized Johnson-SU density. Errors when `zeta <= 0`.
pub fn johnson_su_logpdf(y: f64, params: &JohnsonSuParams) -> Result<f64> {
    Ok(JsuStd::new(params)?.logpdf(y))
}

/// Analytic gradient of the standardized log density with respect to
/// `(y, lambda, zeta)`.
pub fn johnson_su_logpdf_grad(y: f64, params: &JohnsonSuParams) -> Result<(f64, f64, f64)> {
    let p = *params;
    let st = JsuStd::new(&p)?;
    let (lambda, zeta) = (p.lambda, p.zeta);
    let z2 = zeta * zeta;
    let w = z2.exp();
    let w_sqrt = (0.5 * z2).exp();
    let m = st.m;
    let s = st.s;

    let dm_dl = w_sqrt * lambda.cosh();
    let dm_dz = zeta * w_sqrt * lambda.sinh();
    let v = s * s;
    let dv_dl = z2.exp_m1() * w * (2.0 * lambda).sinh();
    let dv_dz = zeta * w * ((2.0 * w - 1.0) * (2.0 * lambda).cosh() + 1.0);
    let ds_dl = dv_dl / (2.0 * s);
    let ds_dz = dv_dz / (2.0 * s);

    let x = m + s * y;
    let z = (x.asinh() - lambda) / zeta;
    let dx_dl = dm_dl + y * ds_dl;
    let dx_dz = dm_dz + y * ds_dz;
    let dz_dx = 1.0 / (zeta * (x * x + 1.0).sqrt());

    let dldx_part = -x / (x * x + 1.0);
    let d_dy = (dldx_part - z * dz_dx) * s;
    let d_dl = ds_dl / s + dldx_part * dx_dl - z * (dz_dx * dx_dl - 1.0 / zeta);
    let d_dz = ds_dz / s - 1.0 / zeta + dldx_part * dx_dz - z * (dz_dx * dx_dz - z / zeta);
    let _ = v;
    Ok((d_dy, d_dl, d_dz))
}
