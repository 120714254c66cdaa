//! Synthetic multi-market worlds with planted causal structure. Planted
//! dependence is injected at the standardized-innovation level so the
//! filtering stage cannot remove it; innovations are wrapped in per-market
//! GARCH volatility and exponentiated into prices. The emitted registry,
//! price and covariate files use exactly the formats the pipeline
//! consumes.

use crate::calendar::{Classification, CloseChange, MarketSpec, PriceSeries, Registry, TzRule};
use crate::error::{Error, Result};
use crate::garch::{GarchSpec, JohnsonSuParams, JsuStd};
use crate::network::SpilloverNetwork;
use crate::probit::CovariatePanel;
use crate::seeding::rng_for;
use chrono::{Datelike, Duration, NaiveDate, NaiveTime};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Daylight-saving template applied year by year (month/day boundaries;
/// a start month after the end month wraps the year, southern style).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DstTemplate {
    pub start_month: u32,
    pub start_day: u32,
    pub end_month: u32,
    pub end_day: u32,
    pub shift_minutes: i32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticMarket {
    pub id: String,
    pub classification: Classification,
    /// Standard-time UTC offset.
    pub std_offset_minutes: i32,
    /// Local closing time "HH:MM".
    pub close: String,
    #[serde(default)]
    pub dst: Option<DstTemplate>,
    /// Optional closing-hour change: date and new local "HH:MM".
    #[serde(default)]
    pub close_change: Option<(NaiveDate, String)>,
    /// Weekday holidays per calendar year (randomly placed).
    #[serde(default)]
    pub holidays_per_year: usize,
    pub garch_omega: f64,
    pub garch_alpha: f64,
    pub garch_beta: f64,
    pub jsu_lambda: f64,
    pub jsu_zeta: f64,
    /// Daily drift of log returns.
    #[serde(default)]
    pub mu: f64,
}

/// A planted directed spillover: the in-market's innovation at date t
/// loads on the out-market's innovation at date t - lag (calendar trading
/// days on the weekday grid).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedEdge {
    pub out_id: String,
    pub in_id: String,
    pub coupling: f64,
    pub lag: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorldConfig {
    pub markets: Vec<SyntheticMarket>,
    /// Planted spillovers; empty for a null world.
    #[serde(default)]
    pub edges: Vec<PlantedEdge>,
    pub start_date: NaiveDate,
    pub n_weekdays: usize,
    pub seed: u64,
}

/// Ground truth stored alongside the generated data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorldTruth {
    pub edges: Vec<PlantedEdge>,
    pub seed: u64,
}

pub struct GeneratedWorld {
    pub registry: Registry,
    pub prices: BTreeMap<String, PriceSeries>,
    pub covariates: CovariatePanel,
    pub truth: WorldTruth,
}

fn parse_hm(s: &str) -> Result<NaiveTime> {
    NaiveTime::parse_from_str(s, "%H:%M")
        .map_err(|e| Error::Config(format!("bad close time '{s}': {e}")))
}

fn market_spec(m: &SyntheticMarket, years: std::ops::RangeInclusive<i32>) -> Result<MarketSpec> {
    let mut close_schedule = vec![CloseChange {
        effective: NaiveDate::from_ymd_opt(1990, 1, 1).unwrap(),
        close: parse_hm(&m.close)?,
    }];
    if let Some((date, ref new_close)) = m.close_change {
        close_schedule.push(CloseChange {
            effective: date,
            close: parse_hm(new_close)?,
        });
    }
    let tz_rules = years
        .map(|year| {
            let (dst_start, dst_end, dst_offset_minutes) = match &m.dst {
                Some(d) => (
                    NaiveDate::from_ymd_opt(year, d.start_month, d.start_day),
                    NaiveDate::from_ymd_opt(year, d.end_month, d.end_day),
                    Some(m.std_offset_minutes + d.shift_minutes),
                ),
                None => (None, None, None),
            };
            TzRule {
                year,
                std_offset_minutes: m.std_offset_minutes,
                dst_start,
                dst_end,
                dst_offset_minutes,
            }
        })
        .collect();
    let spec = MarketSpec {
        id: m.id.clone(),
        name: m.id.clone(),
        classification: m.classification,
        tz_rules,
        close_schedule,
    };
    spec.validate()?;
    Ok(spec)
}

fn weekday_grid(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        match d.weekday() {
            chrono::Weekday::Sat | chrono::Weekday::Sun => {}
            _ => out.push(d),
        }
        d += Duration::days(1);
    }
    out
}

/// Generate a world. Validates that every planted edge's lag is feasible
/// against the synthetic calendar on every date (a lag-0 edge requires the
/// out market to close at or before the in market throughout).
pub fn gen_world(cfg: &WorldConfig) -> Result<GeneratedWorld> {
    if cfg.markets.len() < 2 {
        return Err(Error::Config("world needs at least 2 markets".into()));
    }
    let dates = weekday_grid(cfg.start_date, cfg.n_weekdays);
    let last = *dates.last().unwrap();
    let years = (cfg.start_date.year() - 1)..=(last.year() + 1);
    let mut registry = Registry::new();
    for m in &cfg.markets {
        if registry
            .insert(m.id.clone(), market_spec(m, years.clone())?)
            .is_some()
        {
            return Err(Error::Config(format!("duplicate market id {}", m.id)));
        }
    }
    let by_id: BTreeMap<&str, &SyntheticMarket> =
        cfg.markets.iter().map(|m| (m.id.as_str(), m)).collect();
    for e in &cfg.edges {
        if !by_id.contains_key(e.out_id.as_str()) || !by_id.contains_key(e.in_id.as_str()) {
            return Err(Error::Config(format!(
                "planted edge {}->{} references unknown market",
                e.out_id, e.in_id
            )));
        }
        if e.out_id == e.in_id {
            return Err(Error::Config("planted loops are not allowed".into()));
        }
        if e.lag == 0 {
            let out_spec = &registry[&e.out_id];
            let in_spec = &registry[&e.in_id];
            for &d in &dates {
                if out_spec.utc_close_instant(d)? > in_spec.utc_close_instant(d)? {
                    return Err(Error::Config(format!(
                        "planted edge {}->{} with lag 0 is infeasible on {d}: \
                         the out market closes later",
                        e.out_id, e.in_id
                    )));
                }
            }
        }
    }
    // innovations with planted cross-lag dependence, built date by date in
    // close-time order so same-date couplings see realized values
    let t_len = dates.len();
    let mut innovations: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut base: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for m in &cfg.markets {
        let dist = JohnsonSuParams::new(m.jsu_lambda, m.jsu_zeta)?;
        let jsu = JsuStd::new(&dist)?;
        let mut rng = rng_for(cfg.seed, &format!("world/innovations/{}", m.id));
        let draws: Vec<f64> = (0..t_len).map(|_| jsu.sample(&mut rng)).collect();
        base.insert(m.id.as_str(), draws);
        innovations.insert(m.id.as_str(), vec![0.0; t_len]);
    }
    let in_edges: BTreeMap<&str, Vec<&PlantedEdge>> = {
        let mut map: BTreeMap<&str, Vec<&PlantedEdge>> = BTreeMap::new();
        for e in &cfg.edges {
            map.entry(e.in_id.as_str()).or_default().push(e);
        }
        map
    };
    for (t, &date) in dates.iter().enumerate() {
        let mut order: Vec<&SyntheticMarket> = cfg.markets.iter().collect();
        order.sort_by_key(|m| registry[&m.id].utc_close_instant(date).ok());
        for m in &order {
            let mut value = base[m.id.as_str()][t];
            let mut load = 1.0;
            if let Some(edges) = in_edges.get(m.id.as_str()) {
                for e in edges {
                    if t >= e.lag {
                        let source = innovations[e.out_id.as_str()][t - e.lag];
                        value += e.coupling * source;
                        load += e.coupling * e.coupling;
                    }
                }
            }
            innovations.get_mut(m.id.as_str()).unwrap()[t] = value / load.sqrt();
        }
    }
    // wrap in GARCH volatility, cumulate into prices, drop holidays
    let mut prices = BTreeMap::new();
    let mut covariates = CovariatePanel::default();
    for m in &cfg.markets {
        let spec = GarchSpec {
            family: crate::garch::GarchFamily::Garch,
            r: 1,
            s: 1,
            omega: m.garch_omega,
            alpha: vec![m.garch_alpha],
            gamma: vec![],
            beta: vec![m.garch_beta],
            delta: None,
        };
        spec.validate()?;
        let eta = &innovations[m.id.as_str()];
        let mut sigma2 = m.garch_omega / (1.0 - m.garch_alpha - m.garch_beta);
        let mut level = 100.0f64.ln();
        let mut holidays: BTreeSet<NaiveDate> = BTreeSet::new();
        let mut hol_rng = rng_for(cfg.seed, &format!("world/holidays/{}", m.id));
        let mut year_dates: BTreeMap<i32, Vec<NaiveDate>> = BTreeMap::new();
        for &d in &dates {
            year_dates.entry(d.year()).or_default().push(d);
        }
        for (_, ds) in year_dates {
            for _ in 0..m.holidays_per_year {
                let idx = hol_rng.random_range(0..ds.len());
                holidays.insert(ds[idx]);
            }
        }
        let mut rows = Vec::with_capacity(t_len);
        for (t, &date) in dates.iter().enumerate() {
            let eps = sigma2.sqrt() * eta[t];
            level += m.mu + eps;
            sigma2 = m.garch_omega + m.garch_alpha * eps * eps + m.garch_beta * sigma2;
            if !holidays.contains(&date) {
                rows.push((date, level.exp()));
            }
        }
        let series = PriceSeries::new(m.id.clone(), rows.clone())?;
        // FX rate: independent slow random walk around 1..100
        let mut fx_rng = rng_for(cfg.seed, &format!("world/fx/{}", m.id));
        let mut fx_level = (1.0 + 9.0 * fx_rng.random::<f64>()).ln();
        let fx_rows: Vec<(NaiveDate, f64)> = dates
            .iter()
            .map(|&d| {
                let z: f64 = StandardNormal.sample(&mut fx_rng);
                fx_level += 0.004 * z;
                (d, fx_level.exp())
            })
            .collect();
        // annual market cap (USD) and cap-to-GDP (percent) step series
        let mut ann_rng = rng_for(cfg.seed, &format!("world/annual/{}", m.id));
        let mut mcap = 1e11 * (1.0 + 9.0 * ann_rng.random::<f64>());
        let mut mc_gdp = 40.0 + 260.0 * ann_rng.random::<f64>();
        let mut mcap_rows = Vec::new();
        let mut gdp_rows = Vec::new();
        for year in cfg.start_date.year() - 1..=last.year() {
            let stamp = NaiveDate::from_ymd_opt(year, 12, 31).unwrap();
            mcap_rows.push((stamp, mcap));
            gdp_rows.push((stamp, mc_gdp));
            mcap *= 1.0 + 0.1 * (ann_rng.random::<f64>() - 0.4);
            mc_gdp *= 1.0 + 0.08 * (ann_rng.random::<f64>() - 0.45);
        }
        covariates
            .equity_close
            .insert(m.id.clone(), rows);
        covariates.fx_rate.insert(m.id.clone(), fx_rows);
        covariates.market_cap.insert(m.id.clone(), mcap_rows);
        covariates.mc_to_gdp.insert(m.id.clone(), gdp_rows);
        prices.insert(m.id.clone(), series);
    }
    Ok(GeneratedWorld {
        registry,
        prices,
        covariates,
        truth: WorldTruth {
            edges: cfg.edges.clone(),
            seed: cfg.seed,
        },
    })
}

/// Precision/recall of recovered networks against the planted adjacency.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryScore {
    pub per_window: Vec<WindowScore>,
    pub pooled: Score,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowScore {
    pub window_end: crate::windows::Month,
    pub score: Score,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Score {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    /// Undefined (None) when nothing was detected.
    pub precision: Option<f64>,
    pub recall: f64,
    pub false_positive_rate: f64,
}

fn score_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Score {
    Score {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        true_negatives: tn,
        precision: if tp + fp > 0 {
            Some(tp as f64 / (tp + fp) as f64)
        } else {
            None
        },
        recall: if tp + fn_ > 0 {
            tp as f64 / (tp + fn_) as f64
        } else {
            1.0
        },
        false_positive_rate: if fp + tn > 0 {
            fp as f64 / (fp + tn) as f64
        } else {
            0.0
        },
    }
}

pub fn recovery_score(networks: &[SpilloverNetwork], truth: &[PlantedEdge]) -> RecoveryScore {
    let truth_set: BTreeSet<(String, String)> = truth
        .iter()
        .map(|e| (e.out_id.clone(), e.in_id.clone()))
        .collect();
    let mut per_window = Vec::with_capacity(networks.len());
    let (mut tp, mut fp, mut fn_, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for net in networks {
        let detected = net.edge_ids();
        let n = net.n_vertices();
        let total_pairs = n * (n - 1);
        let w_tp = detected.iter().filter(|e| truth_set.contains(*e)).count();
        let w_fp = detected.len() - w_tp;
        let w_fn = truth_set.len() - w_tp;
        let w_tn = total_pairs - detected.len() - w_fn;
        per_window.push(WindowScore {
            window_end: net.window_end,
            score: score_counts(w_tp, w_fp, w_fn, w_tn),
        });
        tp += w_tp;
        fp += w_fp;
        fn_ += w_fn;
        tn += w_tn;
    }
    RecoveryScore {
        per_window,
        pooled: score_counts(tp, fp, fn_, tn),
    }
}
