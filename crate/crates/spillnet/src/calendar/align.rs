use super::returns::weekend_only_gap;
use super::{MarketSpec, PriceSeries};
use crate::error::{Error, Result};
use chrono::NaiveDate;
use std::collections::BTreeMap;

/// Per-date relation between the two closing instants, from the point of
/// view of the out (causing) market.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairRegime {
    /// Out closes strictly later than in: the out return of date t can only
    /// explain the in return of date t+1.
    OutLater,
    /// Out closes strictly earlier: the out return of date t already
    /// explains the in return of the same date.
    OutEarlier,
    /// Time-zone-adjusted closes coincide; the contemporaneous lag is
    /// admissible.
    Simultaneous,
}

/// A pair of equal-length aligned series. The arrays are laid out so that
/// the lag-k cross term `sum_t in[t] * out[t-k]` realizes the correct
/// calendar pairing for every admissible lag `k >= k_start`:
///
/// * out closes later on date t  -> the most recent past out return is the
///   previous date's, reached at lag 1 with the out values in place;
/// * out closes earlier on date t -> the same-date out return is already
///   past, so the out array is advanced one position and the same-date
///   pairing is again reached at lag 1;
/// * closes coincide on every date -> nothing is advanced and lag 0 (the
///   contemporaneous term) is admissible, `k_start = 0`.
#[derive(Debug, Clone)]
pub struct AlignedPair {
    pub out_market: String,
    pub in_market: String,
    /// Dates of the in-side observations.
    pub dates: Vec<NaiveDate>,
    pub r_out: Vec<f64>,
    pub r_in: Vec<f64>,
    /// Minimum admissible cross-lag per date; 0 only where the adjusted
    /// closes coincide.
    pub k_min: Vec<u8>,
    /// First lag of the test statistic: 0 iff every date is simultaneous.
    pub k_start: u8,
    /// Dates where the pair regime differs from the previous date (DST or
    /// closing-hour changes).
    pub regime_breaks: Vec<NaiveDate>,
    pub regimes: Vec<PairRegime>,
}

impl AlignedPair {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

fn regime_on(out: &MarketSpec, in_: &MarketSpec, date: NaiveDate) -> Result<PairRegime> {
    let t_out = out.utc_close_instant(date)?;
    let t_in = in_.utc_close_instant(date)?;
    Ok(match t_out.cmp(&t_in) {
        std::cmp::Ordering::Greater => PairRegime::OutLater,
        std::cmp::Ordering::Less => PairRegime::OutEarlier,
        std::cmp::Ordering::Equal => PairRegime::Simultaneous,
    })
}

/// Align two dated value series (already on return scale) for the ordered
/// pair out -> in. Performs list-wise deletion to the common dates and the
/// per-date regime assignment described on [`AlignedPair`].
pub fn align_values(
    out: &MarketSpec,
    in_: &MarketSpec,
    out_values: &[(NaiveDate, f64)],
    in_values: &[(NaiveDate, f64)],
) -> Result<AlignedPair> {
    let in_map: BTreeMap<NaiveDate, f64> = in_values.iter().copied().collect();
    let mut dates = Vec::new();
    let mut v_out = Vec::new();
    let mut v_in = Vec::new();
    for (d, vo) in out_values {
        if let Some(vi) = in_map.get(d) {
            dates.push(*d);
            v_out.push(*vo);
            v_in.push(*vi);
        }
    }
    if dates.is_empty() {
        return Err(Error::NoCommonDates(out.id.clone(), in_.id.clone()));
    }
    let n = dates.len();
    let mut regimes = Vec::with_capacity(n);
    for &d in &dates {
        regimes.push(regime_on(out, in_, d)?);
    }
    let all_simultaneous = regimes.iter().all(|r| *r == PairRegime::Simultaneous);
    let k_start = if all_simultaneous { 0 } else { 1 };
    let k_min: Vec<u8> = regimes
        .iter()
        .map(|r| if *r == PairRegime::Simultaneous { 0 } else { 1 })
        .collect();
    let mut regime_breaks = Vec::new();
    for t in 1..n {
        if regimes[t] != regimes[t - 1] {
            regime_breaks.push(dates[t]);
        }
    }
    // Re-index the out series so lag k_start realizes the most recent
    // past-or-simultaneous pairing (see type-level comment).
    let r_out: Vec<f64> = if k_start == 0 {
        v_out.clone()
    } else {
        (0..n)
            .map(|t| {
                if t + 1 < n && regimes[t + 1] != PairRegime::OutLater {
                    v_out[t + 1]
                } else {
                    v_out[t]
                }
            })
            .collect()
    };
    Ok(AlignedPair {
        out_market: out.id.clone(),
        in_market: in_.id.clone(),
        dates,
        r_out,
        r_in: v_in,
        k_min,
        k_start,
        regime_breaks,
        regimes,
    })
}

/// Full three-step return alignment for a price pair: list-wise deletion of
/// dates where either market did not trade, joint log returns with the
/// weekend/holiday retention rule, then the per-date lag regime.
pub fn align_pair(
    p_out: &PriceSeries,
    p_in: &PriceSeries,
    out: &MarketSpec,
    in_: &MarketSpec,
) -> Result<AlignedPair> {
    let in_map: BTreeMap<NaiveDate, f64> = p_in.observations().iter().copied().collect();
    let mut joint: Vec<(NaiveDate, f64, f64)> = Vec::new();
    for (d, po) in p_out.observations() {
        if let Some(pi) = in_map.get(d) {
            joint.push((*d, *po, *pi));
        }
    }
    if joint.len() < 2 {
        return Err(Error::NoCommonDates(out.id.clone(), in_.id.clone()));
    }
    let mut out_returns = Vec::new();
    let mut in_returns = Vec::new();
    for w in joint.windows(2) {
        let (d0, po0, pi0) = w[0];
        let (d1, po1, pi1) = w[1];
        if weekend_only_gap(d0, d1) {
            out_returns.push((d1, (po1 / po0).ln()));
            in_returns.push((d1, (pi1 / pi0).ln()));
        }
    }
    align_values(out, in_, &out_returns, &in_returns)
}

/// Alignment of two standardized-residual series (list-wise deletion plus
/// regime assignment; the return-retention rule was applied upstream when
/// the returns were built).
pub fn align_residual_pair(
    out: &MarketSpec,
    in_: &MarketSpec,
    s_out: &[(NaiveDate, f64)],
    s_in: &[(NaiveDate, f64)],
) -> Result<AlignedPair> {
    align_values(out, in_, s_out, s_in)
}
