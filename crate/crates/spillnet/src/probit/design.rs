//! Edge-level design matrices. All covariates describe the out-vertex
//! market, evaluated as of the last day of the rolling window; window
//! returns are standardized over the pooled full sample of
//! (market, window) values so coefficients are comparable across markets.

use super::DESIGN_COLUMNS;
use crate::calendar::{
    compute_log_returns, temporal_distance, Classification, PriceSeries, Registry,
};
use crate::error::{Error, Result};
use crate::network::SpilloverNetwork;
use crate::windows::{Month, Window};
use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Raw covariate inputs per market (sorted by date).
#[derive(Debug, Clone, Default)]
pub struct CovariatePanel {
    pub equity_close: BTreeMap<String, Vec<(NaiveDate, f64)>>,
    pub fx_rate: BTreeMap<String, Vec<(NaiveDate, f64)>>,
    pub market_cap: BTreeMap<String, Vec<(NaiveDate, f64)>>,
    pub mc_to_gdp: BTreeMap<String, Vec<(NaiveDate, f64)>>,
}

/// Per-(market, window) covariate values after full-sample standardization
/// of the return fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowCovariates {
    pub rows: BTreeMap<(String, Month), CovariateRow>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CovariateRow {
    pub equity_return: f64,
    pub equity_volatility: f64,
    pub fx_return: f64,
    pub fx_volatility: f64,
    pub log_market_cap: f64,
    pub mc_to_gdp: f64,
}

fn daily_returns(series: &[(NaiveDate, f64)], market: &str) -> Result<Vec<(NaiveDate, f64)>> {
    let ps = PriceSeries::new(market, series.to_vec())?;
    Ok(compute_log_returns(&ps)?.points)
}

/// Standardize per market over its own full sample (mean 0, variance 1).
fn standardize_per_market(returns: &mut BTreeMap<String, Vec<(NaiveDate, f64)>>) {
    for series in returns.values_mut() {
        let vals: Vec<f64> = series.iter().map(|(_, v)| *v).collect();
        let m = crate::stats::mean(&vals);
        let sd = crate::stats::variance(&vals).sqrt();
        if sd > 0.0 {
            for (_, v) in series.iter_mut() {
                *v = (*v - m) / sd;
            }
        }
    }
}

/// Step-function lookup: most recent value at or before `date`.
fn step_value(series: &[(NaiveDate, f64)], date: NaiveDate) -> Option<f64> {
    let idx = series.partition_point(|(d, _)| *d <= date);
    if idx == 0 {
        None
    } else {
        Some(series[idx - 1].1)
    }
}

/// Compute every (market, window) covariate row. Missing pieces are
/// collected and reported together.
pub fn window_covariates(
    panel: &CovariatePanel,
    windows: &[Window],
    markets: &[String],
) -> Result<WindowCovariates> {
    let mut equity_ret: BTreeMap<String, Vec<(NaiveDate, f64)>> = BTreeMap::new();
    let mut fx_ret: BTreeMap<String, Vec<(NaiveDate, f64)>> = BTreeMap::new();
    let mut missing: Vec<String> = Vec::new();
    for id in markets {
        match panel.equity_close.get(id) {
            Some(series) if series.len() >= 2 => {
                equity_ret.insert(id.clone(), daily_returns(series, id)?);
            }
            _ => missing.push(format!("{id}: equity_close")),
        }
        match panel.fx_rate.get(id) {
            Some(series) if series.len() >= 2 => {
                fx_ret.insert(id.clone(), daily_returns(series, id)?);
            }
            _ => missing.push(format!("{id}: fx_rate_usd")),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingCovariates(missing));
    }
    // raw window returns (sums of daily log returns inside the window)
    let window_sum = |ret: &[(NaiveDate, f64)], w: &Window| -> Option<(f64, f64, usize)> {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let mut count = 0;
        for (d, v) in ret {
            if w.contains(*d) {
                sum += v;
                sumsq += v * v;
                count += 1;
            }
        }
        if count == 0 {
            None
        } else {
            Some((sum, sumsq, count))
        }
    };
    // realized volatilities use per-market standardized daily returns
    let mut equity_std = equity_ret.clone();
    let mut fx_std = fx_ret.clone();
    standardize_per_market(&mut equity_std);
    standardize_per_market(&mut fx_std);

    struct RawRow {
        equity_return: f64,
        equity_volatility: f64,
        fx_return: f64,
        fx_volatility: f64,
        log_market_cap: f64,
        mc_to_gdp: f64,
    }
    let mut raw: BTreeMap<(String, Month), RawRow> = BTreeMap::new();
    for w in windows {
        for id in markets {
            let mut local_missing = Vec::new();
            let eq = window_sum(&equity_ret[id], w);
            let fx = window_sum(&fx_ret[id], w);
            let eq_rv = window_sum(&equity_std[id], w);
            let fx_rv = window_sum(&fx_std[id], w);
            if eq.is_none() {
                local_missing.push(format!("{id}: equity returns in window {}", w.end));
            }
            if fx.is_none() {
                local_missing.push(format!("{id}: fx returns in window {}", w.end));
            }
            // averaged logs of the step-function levels over window dates
            let log_avg = |series: Option<&Vec<(NaiveDate, f64)>>,
                           grid: &[(NaiveDate, f64)],
                           what: &str,
                           local_missing: &mut Vec<String>|
             -> f64 {
                let Some(series) = series else {
                    local_missing.push(format!("{id}: {what}"));
                    return f64::NAN;
                };
                let mut acc = 0.0;
                let mut count = 0;
                for (d, _) in grid {
                    if w.contains(*d) {
                        match step_value(series, *d) {
                            Some(v) if v > 0.0 => {
                                acc += v.ln();
                                count += 1;
                            }
                            _ => {
                                local_missing
                                    .push(format!("{id}: {what} at {d} in window {}", w.end));
                                return f64::NAN;
                            }
                        }
                    }
                }
                if count == 0 {
                    local_missing.push(format!("{id}: {what} in window {}", w.end));
                    f64::NAN
                } else {
                    acc / count as f64
                }
            };
            let grid = &equity_ret[id];
            let log_mcap = log_avg(
                panel.market_cap.get(id),
                grid,
                "market_cap_usd",
                &mut local_missing,
            );
            let log_mc_gdp = log_avg(
                panel.mc_to_gdp.get(id),
                grid,
                "mc_to_gdp",
                &mut local_missing,
            );
            if !local_missing.is_empty() {
                missing.extend(local_missing);
                continue;
            }
            let (eq_sum, _, _) = eq.unwrap();
            let (fx_sum, _, _) = fx.unwrap();
            let (_, eq_rv_sq, eq_rv_n) = eq_rv.unwrap();
            let (_, fx_rv_sq, fx_rv_n) = fx_rv.unwrap();
            raw.insert(
                (id.clone(), w.end),
                RawRow {
                    equity_return: eq_sum,
                    equity_volatility: (eq_rv_sq / eq_rv_n as f64).sqrt(),
                    fx_return: fx_sum,
                    fx_volatility: (fx_rv_sq / fx_rv_n as f64).sqrt(),
                    log_market_cap: log_mcap,
                    mc_to_gdp: log_mc_gdp,
                },
            );
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingCovariates(missing));
    }
    // pooled standardization of the window returns
    let eq_vals: Vec<f64> = raw.values().map(|r| r.equity_return).collect();
    let fx_vals: Vec<f64> = raw.values().map(|r| r.fx_return).collect();
    let (eq_m, eq_s) = (
        crate::stats::mean(&eq_vals),
        crate::stats::variance(&eq_vals).sqrt(),
    );
    let (fx_m, fx_s) = (
        crate::stats::mean(&fx_vals),
        crate::stats::variance(&fx_vals).sqrt(),
    );
    let eq_s = if eq_s > 0.0 { eq_s } else { 1.0 };
    let fx_s = if fx_s > 0.0 { fx_s } else { 1.0 };
    let rows = raw
        .into_iter()
        .map(|(key, r)| {
            (
                key,
                CovariateRow {
                    equity_return: (r.equity_return - eq_m) / eq_s,
                    equity_volatility: r.equity_volatility,
                    fx_return: (r.fx_return - fx_m) / fx_s,
                    fx_volatility: r.fx_volatility,
                    log_market_cap: r.log_market_cap,
                    mc_to_gdp: r.mc_to_gdp,
                },
            )
        })
        .collect();
    Ok(WindowCovariates { rows })
}

/// Edge-level panel for one window: y stacks the network's edge indicators
/// over all ordered pairs in lexicographic (out, in) order, X the
/// out-vertex covariates, pair dummies and temporal distances.
#[derive(Debug, Clone)]
pub struct EdgePanel {
    pub window_end: Month,
    pub pairs: Vec<(String, String)>,
    pub y: Vec<f64>,
    pub x: DMatrix<f64>,
    pub column_names: Vec<String>,
}

pub fn build_design(
    network: &SpilloverNetwork,
    covariates: &WindowCovariates,
    registry: &Registry,
    us_reference: &str,
) -> Result<EdgePanel> {
    let ids = &network.vertices;
    let n = ids.len();
    if n < 3 {
        return Err(Error::Validation(
            "design needs at least 3 markets".into(),
        ));
    }
    let window_end = network.window_end;
    let end_date = window_end.last_day();
    let us = registry
        .get(us_reference)
        .ok_or_else(|| Error::Validation(format!("reference market {us_reference} not in registry")))?;
    let mut missing = Vec::new();
    for id in ids {
        if !registry.contains_key(id) {
            missing.push(format!("{id}: registry entry"));
        }
        if !covariates.rows.contains_key(&(id.clone(), window_end)) {
            missing.push(format!("{id}: covariates in window {window_end}"));
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingCovariates(missing));
    }
    let n_rows = n * (n - 1);
    let mut pairs = Vec::with_capacity(n_rows);
    let mut y = Vec::with_capacity(n_rows);
    let mut x = DMatrix::<f64>::zeros(n_rows, DESIGN_COLUMNS.len());
    let mut row = 0;
    for (oi, out_id) in ids.iter().enumerate() {
        let out_spec = &registry[out_id];
        let cov = &covariates.rows[&(out_id.clone(), window_end)];
        let dist_us = temporal_distance(out_spec, us, end_date)?.hours;
        for (ii, in_id) in ids.iter().enumerate() {
            if oi == ii {
                continue;
            }
            let in_spec = &registry[in_id];
            pairs.push((out_id.clone(), in_id.clone()));
            y.push(if network.has_edge(oi, ii) { 1.0 } else { 0.0 });
            let dist = temporal_distance(out_spec, in_spec, end_date)?.hours;
            let dev_frontier = (out_spec.classification == Classification::Developed
                && in_spec.classification == Classification::Frontier)
                as usize as f64;
            let dev_emerging = (out_spec.classification == Classification::Developed
                && in_spec.classification == Classification::Emerging)
                as usize as f64;
            let cols = [
                1.0,
                cov.equity_return,
                cov.equity_volatility,
                cov.fx_return,
                cov.fx_volatility,
                cov.log_market_cap,
                cov.mc_to_gdp,
                dev_frontier,
                dev_emerging,
                dist,
                dist_us,
            ];
            for (c, v) in cols.iter().enumerate() {
                x[(row, c)] = *v;
            }
            row += 1;
        }
    }
    Ok(EdgePanel {
        window_end,
        pairs,
        y,
        x,
        column_names: DESIGN_COLUMNS.iter().map(|s| s.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::{CloseChange, MarketSpec, TzRule};
    use chrono::{Datelike, Duration, NaiveTime};

    fn market(id: &str, class: Classification, close_h: u32) -> MarketSpec {
        MarketSpec {
            id: id.into(),
            name: id.into(),
            classification: class,
            tz_rules: (2005..=2010)
                .map(|year| TzRule {
                    year,
                    std_offset_minutes: 0,
                    dst_start: None,
                    dst_end: None,
                    dst_offset_minutes: None,
                })
                .collect(),
            close_schedule: vec![CloseChange {
                effective: NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(),
                close: NaiveTime::from_hms_opt(close_h, 0, 0).unwrap(),
            }],
        }
    }

    fn weekdays(n: usize) -> Vec<NaiveDate> {
        let mut out = Vec::new();
        let mut d = NaiveDate::from_ymd_opt(2006, 1, 2).unwrap();
        while out.len() < n {
            match d.weekday() {
                chrono::Weekday::Sat | chrono::Weekday::Sun => {}
                _ => out.push(d),
            }
            d += Duration::days(1);
        }
        out
    }

    fn toy_panel(ids: &[&str]) -> CovariatePanel {
        let dates = weekdays(300);
        let mut panel = CovariatePanel::default();
        for (k, id) in ids.iter().enumerate() {
            let eq: Vec<(NaiveDate, f64)> = dates
                .iter()
                .enumerate()
                .map(|(t, d)| (*d, 100.0 * (1.0 + 0.001 * ((t + k) as f64).sin()).powi(t as i32 % 7 + 1)))
                .collect();
            let fx: Vec<(NaiveDate, f64)> = dates
                .iter()
                .enumerate()
                .map(|(t, d)| (*d, 1.0 + 0.01 * ((t * (k + 2)) as f64).cos().abs()))
                .collect();
            let mcap = vec![
                (NaiveDate::from_ymd_opt(2005, 12, 31).unwrap(), 1e12 * (k + 1) as f64),
                (NaiveDate::from_ymd_opt(2006, 12, 31).unwrap(), 1.1e12 * (k + 1) as f64),
            ];
            let mcgdp = vec![(NaiveDate::from_ymd_opt(2005, 12, 31).unwrap(), 120.0 + k as f64)];
            panel.equity_close.insert(id.to_string(), eq);
            panel.fx_rate.insert(id.to_string(), fx);
            panel.market_cap.insert(id.to_string(), mcap);
            panel.mc_to_gdp.insert(id.to_string(), mcgdp);
        }
        panel
    }

    fn toy_registry() -> Registry {
        let mut reg = Registry::new();
        reg.insert("AA".into(), market("AA", Classification::Developed, 8));
        reg.insert("BB".into(), market("BB", Classification::Emerging, 12));
        reg.insert("CC".into(), market("CC", Classification::Frontier, 16));
        reg.insert("US".into(), market("US", Classification::Developed, 21));
        reg
    }

    fn toy_windows() -> Vec<Window> {
        vec![
            Window { end: Month::new(2006, 12), window_months: 12 },
            Window { end: Month::new(2007, 1), window_months: 12 },
        ]
    }

    #[test]
    fn design_has_n_times_n_minus_one_rows() {
        let reg = toy_registry();
        let ids: Vec<String> = reg.keys().cloned().collect();
        let panel = toy_panel(&["AA", "BB", "CC", "US"]);
        let windows = toy_windows();
        let cov = window_covariates(&panel, &windows, &ids).unwrap();
        let mut network = SpilloverNetwork::new(Month::new(2006, 12), ids.clone());
        network.add_edge(0, 1);
        let design = build_design(&network, &cov, &reg, "US").unwrap();
        assert_eq!(design.y.len(), 12);
        assert_eq!(design.x.nrows(), 12);
        assert_eq!(design.x.ncols(), 11);
        assert_eq!(design.y.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn us_rows_have_zero_distance_to_us() {
        let reg = toy_registry();
        let ids: Vec<String> = reg.keys().cloned().collect();
        let panel = toy_panel(&["AA", "BB", "CC", "US"]);
        let cov = window_covariates(&panel, &toy_windows(), &ids).unwrap();
        let network = SpilloverNetwork::new(Month::new(2006, 12), ids);
        let design = build_design(&network, &cov, &reg, "US").unwrap();
        let us_dist_col = 10;
        for (row, (out, _)) in design.pairs.iter().enumerate() {
            if out == "US" {
                assert_eq!(design.x[(row, us_dist_col)], 0.0);
            } else {
                assert!(design.x[(row, us_dist_col)] > 0.0);
            }
        }
    }

    #[test]
    fn dummies_follow_classifications() {
        let reg = toy_registry();
        let ids: Vec<String> = reg.keys().cloned().collect();
        let panel = toy_panel(&["AA", "BB", "CC", "US"]);
        let cov = window_covariates(&panel, &toy_windows(), &ids).unwrap();
        let network = SpilloverNetwork::new(Month::new(2006, 12), ids);
        let design = build_design(&network, &cov, &reg, "US").unwrap();
        for (row, (out, in_)) in design.pairs.iter().enumerate() {
            let f = design.x[(row, 7)];
            let e = design.x[(row, 8)];
            let out_dev = matches!(reg[out].classification, Classification::Developed);
            let in_frontier = matches!(reg[in_].classification, Classification::Frontier);
            let in_emerging = matches!(reg[in_].classification, Classification::Emerging);
            assert_eq!(f, (out_dev && in_frontier) as usize as f64);
            assert_eq!(e, (out_dev && in_emerging) as usize as f64);
            if out == "AA" && in_ == "US" {
                assert_eq!(f + e, 0.0, "developed->developed pair must have zero dummies");
            }
        }
    }

    #[test]
    fn pooled_standardization_is_exact() {
        let reg = toy_registry();
        let ids: Vec<String> = reg.keys().cloned().collect();
        let panel = toy_panel(&["AA", "BB", "CC", "US"]);
        let cov = window_covariates(&panel, &toy_windows(), &ids).unwrap();
        let eq: Vec<f64> = cov.rows.values().map(|r| r.equity_return).collect();
        let fx: Vec<f64> = cov.rows.values().map(|r| r.fx_return).collect();
        assert!(crate::stats::mean(&eq).abs() < 1e-10);
        assert!((crate::stats::variance(&eq) - 1.0).abs() < 1e-10);
        assert!(crate::stats::mean(&fx).abs() < 1e-10);
        assert!((crate::stats::variance(&fx) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn missing_covariates_are_listed() {
        let reg = toy_registry();
        let ids: Vec<String> = reg.keys().cloned().collect();
        let mut panel = toy_panel(&["AA", "BB", "CC", "US"]);
        panel.market_cap.remove("BB");
        let err = window_covariates(&panel, &toy_windows(), &ids);
        match err {
            Err(Error::MissingCovariates(list)) => {
                assert!(list.iter().any(|s| s.contains("BB") && s.contains("market_cap")));
            }
            other => panic!("expected missing covariates, got {other:?}"),
        }
    }
}
