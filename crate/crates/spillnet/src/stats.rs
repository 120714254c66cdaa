//! Small numerical helpers shared across modules: normal distribution
//! wrappers, sample moments, quantiles, and a quasi-Newton minimizer.

use once_cell::sync::Lazy;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

static STD_NORMAL: Lazy<Normal> = Lazy::new(|| Normal::new(0.0, 1.0).unwrap());

pub fn normal_cdf(x: f64) -> f64 {
    STD_NORMAL.cdf(x)
}

/// Upper-tail probability 1 - Phi(x), computed via the complementary
/// branch to keep precision far in the tail.
pub fn normal_sf(x: f64) -> f64 {
    STD_NORMAL.sf(x)
}

pub fn normal_quantile(p: f64) -> f64 {
    STD_NORMAL.inverse_cdf(p)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Two-sided p-value from a t statistic with `df` degrees of freedom.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    2.0 * dist.sf(t.abs())
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance (divides by n).
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Sample variance (divides by n - 1).
pub fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Empirical quantile with linear interpolation on a sorted copy.
pub fn quantile(x: &[f64], q: f64) -> f64 {
    assert!(!x.is_empty());
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        v[lo]
    } else {
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    }
}

pub fn median(x: &[f64]) -> f64 {
    quantile(x, 0.5)
}

/// Result of [`minimize_bfgs`].
#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// BFGS minimizer with numerical central-difference gradients and a
/// backtracking Armijo line search. Works in an unconstrained space;
/// callers bound their parameters via smooth transforms. Convergence is
/// declared on the relative change of the objective.
pub fn minimize_bfgs<F>(f: &F, x0: &[f64], max_iter: usize, rel_tol: f64) -> MinimizeResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return MinimizeResult {
            x,
            f: fx,
            iterations: 0,
            converged: false,
        };
    }
    let mut grad = num_gradient(f, &x, fx);
    // inverse Hessian approximation, dense row-major
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    let mut converged = false;
    let mut iter = 0;
    while iter < max_iter {
        iter += 1;
        // direction d = -H g
        let mut d = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += h[i * n + j] * grad[j];
            }
            d[i] = -s;
        }
        let mut slope: f64 = d.iter().zip(&grad).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            // reset to steepest descent if curvature information went bad
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] = if i == j { 1.0 } else { 0.0 };
                }
                d[i] = -grad[i];
            }
            slope = -grad.iter().map(|g| g * g).sum::<f64>();
            if slope == 0.0 {
                converged = true;
                break;
            }
        }
        // backtracking line search
        let mut step = 1.0;
        let mut x_new = vec![0.0; n];
        let mut f_new = f64::INFINITY;
        let mut ok = false;
        for _ in 0..40 {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            f_new = f(&x_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if !ok {
            break;
        }
        let g_new = num_gradient(f, &x_new, f_new);
        // BFGS update of the inverse Hessian
        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let yv: Vec<f64> = (0..n).map(|i| g_new[i] - grad[i]).collect();
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            // H <- (I - rho s y') H (I - rho y s') + rho s s'
            let mut hy = vec![0.0; n];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += h[i * n + j] * yv[j];
                }
                hy[i] = acc;
            }
            let yhy: f64 = yv.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += rho * rho * yhy * s[i] * s[j] + rho * s[i] * s[j]
                        - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        let rel = (fx - f_new).abs() / (fx.abs() + 1.0);
        x = x_new;
        fx = f_new;
        grad = g_new;
        if rel < rel_tol {
            converged = true;
            break;
        }
    }
    MinimizeResult {
        x,
        f: fx,
        iterations: iter,
        converged,
    }
}

fn num_gradient<F>(f: &F, x: &[f64], fx: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut xp = x.to_vec();
    for i in 0..n {
        let h = 1e-5 * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = if fp.is_finite() && fm.is_finite() {
            (fp - fm) / (2.0 * h)
        } else if fp.is_finite() {
            (fp - fx) / h
        } else if fm.is_finite() {
            (fx - fm) / h
        } else {
            0.0
        };
    }
    g
}
