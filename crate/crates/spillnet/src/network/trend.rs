//! Linear time-trend test with HAC standard errors: quadratic-spectral
//! kernel and the automatic bandwidth rule of the plug-in procedure
//! (lag-selection parameter floor(4 (n/100)^(2/25)), exponent 1/5).

use crate::stats::t_two_sided_p;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrendTest {
    pub slope: f64,
    pub intercept: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub bandwidth: f64,
    /// Set when the series is (numerically) constant and the variance
    /// estimate degenerates.
    pub degenerate: bool,
}

fn qs_kernel(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let z = 6.0 * std::f64::consts::PI * x / 5.0;
    25.0 / (12.0 * std::f64::consts::PI.powi(2) * x * x) * ((z.sin() / z) - z.cos())
}

/// OLS of `series` on (1, t) with HAC slope inference.
pub fn hac_trend_test(series: &[f64]) -> TrendTest {
    let n = series.len();
    assert!(n >= 10, "trend test needs at least 10 observations");
    let nf = n as f64;
    let tbar = (nf - 1.0) / 2.0;
    let ybar = crate::stats::mean(series);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (t, &y) in series.iter().enumerate() {
        let xt = t as f64 - tbar;
        sxx += xt * xt;
        sxy += xt * (y - ybar);
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * tbar;
    // per-observation scores of the two regressors
    let resid: Vec<f64> = series
        .iter()
        .enumerate()
        .map(|(t, &y)| y - intercept - slope * t as f64)
        .collect();
    let ss_resid: f64 = resid.iter().map(|r| r * r).sum();
    if ss_resid <= 1e-24 * (1.0 + ybar * ybar) * nf {
        // perfect fit: no residual variance. A nonzero slope is then
        // detected with certainty; a constant series has nothing to test.
        let flat = slope.abs() < 1e-12 * (1.0 + ybar.abs());
        return TrendTest {
            slope,
            intercept,
            t_stat: if flat { 0.0 } else { f64::INFINITY * slope.signum() },
            p_value: if flat { 1.0 } else { 0.0 },
            bandwidth: 0.0,
            degenerate: true,
        };
    }
    let scores: Vec<[f64; 2]> = resid
        .iter()
        .enumerate()
        .map(|(t, &u)| [u, t as f64 * u])
        .collect();
    // automatic bandwidth from the slope scores
    let f: Vec<f64> = scores.iter().map(|s| s[1]).collect();
    let n0 = (4.0 * (nf / 100.0).powf(2.0 / 25.0)).floor() as usize;
    let sigma = |j: usize| -> f64 {
        let mut acc = 0.0;
        for t in j..n {
            acc += f[t] * f[t - j];
        }
        acc / nf
    };
    let s0_base = sigma(0);
    let mut s0 = s0_base;
    let mut s2 = 0.0;
    for j in 1..=n0.min(n - 1) {
        let sj = sigma(j);
        s0 += 2.0 * sj;
        s2 += 2.0 * (j * j) as f64 * sj;
    }
    let bandwidth = if s0.abs() > 1e-300 {
        1.3221 * ((s2 / s0).powi(2) * nf).powf(0.2)
    } else {
        nf.powf(0.2)
    };
    // HAC covariance of the score sums (quadratic spectral has unbounded
    // support; sum all available lags)
    let mut omega = [[0.0f64; 2]; 2];
    for j in 0..n {
        let w = if j == 0 {
            1.0
        } else {
            qs_kernel(j as f64 / bandwidth)
        };
        if j > 0 && w.abs() < 1e-12 {
            continue;
        }
        let mut gamma = [[0.0f64; 2]; 2];
        for t in j..n {
            for a in 0..2 {
                for b in 0..2 {
                    gamma[a][b] += scores[t][a] * scores[t - j][b];
                }
            }
        }
        for row in gamma.iter_mut() {
            for v in row.iter_mut() {
                *v /= nf;
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                omega[a][b] += if j == 0 {
                    gamma[a][b]
                } else {
                    w * (gamma[a][b] + gamma[b][a])
                };
            }
        }
    }
    // sandwich: (X'X)^-1 (n Omega) (X'X)^-1, slope entry
    let sum_t: f64 = (0..n).map(|t| t as f64).sum();
    let sum_t2: f64 = (0..n).map(|t| (t * t) as f64).sum();
    let xtx = [[nf, sum_t], [sum_t, sum_t2]];
    let det = xtx[0][0] * xtx[1][1] - xtx[0][1] * xtx[1][0];
    let inv = [
        [xtx[1][1] / det, -xtx[0][1] / det],
        [-xtx[1][0] / det, xtx[0][0] / det],
    ];
    let mut middle = [[0.0f64; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            middle[a][b] = nf * omega[a][b];
        }
    }
    let mut v_slope = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            v_slope += inv[1][a] * middle[a][b] * inv[b][1];
        }
    }
    if !(v_slope > 0.0) {
        return TrendTest {
            slope,
            intercept,
            t_stat: 0.0,
            p_value: 1.0,
            bandwidth,
            degenerate: true,
        };
    }
    let se = v_slope.sqrt();
    let t_stat = slope / se;
    let p_value = t_two_sided_p(t_stat, nf - 2.0);
    TrendTest {
        slope,
        intercept,
        t_stat,
        p_value,
        bandwidth,
        degenerate: false,
    }
}
