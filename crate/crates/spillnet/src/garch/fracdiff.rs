//! Fractional differencing `(1 - L)^d` via the truncated binomial
//! expansion with coefficients `pi_0 = 1`, `pi_k = pi_{k-1} (k - 1 - d) / k`.

/// Apply `(1 - L)^d` to `z`, truncating the expansion at lag
/// `min(t, trunc)` for the element at index `t`.
pub fn frac_diff(z: &[f64], d: f64, trunc: usize) -> Vec<f64> {
    if d == 0.0 {
        return z.to_vec();
    }
    let max_lag = trunc.min(z.len().saturating_sub(1));
    let mut pi = Vec::with_capacity(max_lag + 1);
    pi.push(1.0);
    for k in 1..=max_lag {
        let prev = pi[k - 1];
        pi.push(prev * (k as f64 - 1.0 - d) / k as f64);
    }
    let mut out = Vec::with_capacity(z.len());
    for t in 0..z.len() {
        let kmax = t.min(max_lag);
        let mut acc = 0.0;
        for k in 0..=kmax {
            acc += pi[k] * z[t - k];
        }
        out.push(acc);
    }
    out
}
