//! Log-determinant portmanteau diagnostic with Monte-Carlo critical
//! values. The statistic is `-T/(m+1) * ln det(R_m)` where `R_m` is the
//! (m+1) x (m+1) Toeplitz matrix of sample autocorrelations up to lag m;
//! whiteness pushes the determinant towards 1 and the statistic towards 0.
//! P-values come from simulated i.i.d. Gaussian series of the same length,
//! cached per (length, lags, kind, reps, seed) so repeated fits reuse one
//! null table.

use crate::error::{Error, Result};
use crate::seeding::rng_for;
use nalgebra::DMatrix;
use once_cell::sync::Lazy;
use rand_distr::{Distribution, StandardNormal};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Whether the test runs on the series itself or on its squares
/// (conditional-heteroscedasticity check).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PortmanteauKind {
    Levels,
    Squares,
}

fn autocorrelations(x: &[f64], m: usize) -> Result<Vec<f64>> {
    let n = x.len();
    let mu = crate::stats::mean(x);
    let denom: f64 = x.iter().map(|v| (v - mu) * (v - mu)).sum();
    if denom <= 0.0 {
        return Err(Error::StatisticUndefined(
            "zero variance in portmanteau input".into(),
        ));
    }
    let mut out = Vec::with_capacity(m);
    for k in 1..=m {
        let mut acc = 0.0;
        for t in k..n {
            acc += (x[t] - mu) * (x[t - k] - mu);
        }
        out.push(acc / denom);
    }
    Ok(out)
}

/// The raw statistic on `x` with autocorrelations up to `lags`.
pub fn logdet_statistic(x: &[f64], lags: usize) -> Result<f64> {
    let n = x.len();
    if lags >= n / 4 {
        return Err(Error::InsufficientSample(format!(
            "portmanteau needs lags < length/4 (lags={lags}, length={n})"
        )));
    }
    let r = autocorrelations(x, lags)?;
    let m = lags + 1;
    let mut mat = DMatrix::<f64>::identity(m, m);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                mat[(i, j)] = r[i.abs_diff(j) - 1];
            }
        }
    }
    let chol = nalgebra::Cholesky::new(mat).ok_or_else(|| {
        Error::StatisticUndefined("autocorrelation matrix is not positive definite".into())
    })?;
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    Ok(-(n as f64) / (m as f64) * log_det)
}

type NullKey = (usize, usize, PortmanteauKind, usize, u64);

static NULL_CACHE: Lazy<Mutex<HashMap<NullKey, Arc<Vec<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn null_distribution(
    len: usize,
    lags: usize,
    kind: PortmanteauKind,
    reps: usize,
    seed: u64,
) -> Arc<Vec<f64>> {
    let key = (len, lags, kind, reps, seed);
    if let Some(hit) = NULL_CACHE.lock().unwrap().get(&key) {
        return hit.clone();
    }
    let mut rng = rng_for(seed, &format!("portmanteau-null/{len}/{lags}/{kind:?}/{reps}"));
    let mut draws = Vec::with_capacity(reps);
    let mut buf = vec![0.0; len];
    for _ in 0..reps {
        for v in buf.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = match kind {
                PortmanteauKind::Levels => z,
                PortmanteauKind::Squares => z * z,
            };
        }
        // i.i.d. input: the statistic is a.s. defined
        draws.push(logdet_statistic(&buf, lags).expect("null draw"));
    }
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let arc = Arc::new(draws);
    NULL_CACHE.lock().unwrap().insert(key, arc.clone());
    arc
}

/// Monte-Carlo p-value of the log-determinant portmanteau test. For
/// `Squares` the statistic is computed on `x_t^2` and judged against a
/// null table built from squared i.i.d. Gaussians.
pub fn logdet_portmanteau_test(
    x: &[f64],
    lags: usize,
    mc_reps: usize,
    kind: PortmanteauKind,
    seed: u64,
) -> Result<f64> {
    let stat = match kind {
        PortmanteauKind::Levels => logdet_statistic(x, lags)?,
        PortmanteauKind::Squares => {
            let squares: Vec<f64> = x.iter().map(|v| v * v).collect();
            logdet_statistic(&squares, lags)?
        }
    };
    let null = null_distribution(x.len(), lags, kind, mc_reps, seed);
    // sorted null: count of draws >= stat
    let idx = null.partition_point(|v| *v < stat);
    let exceed = null.len() - idx;
    Ok((1.0 + exceed as f64) / (null.len() as f64 + 1.0))
}
