use super::kernel_test::{bonferroni_level, pair_test, CausalityConfig, PairTestResult};
use crate::calendar::{align_residual_pair, Registry};
use crate::error::{Error, Result};
use crate::network::SpilloverNetwork;
use crate::windows::Window;
use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A pair that produced no test, with the reason it was skipped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkippedPair {
    pub out_id: String,
    pub in_id: String,
    pub reason: String,
}

/// Everything the network stage emits for one window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkBuildInputs {
    pub network: SpilloverNetwork,
    pub tests: Vec<PairTestResult>,
    pub skipped: Vec<SkippedPair>,
    pub level: f64,
}

pub enum PairOutcome {
    Tested(PairTestResult),
    Skipped(SkippedPair),
}

/// Build the spillover network of one window: re-align every ordered pair
/// of standardized-residual series inside the window, run the causality
/// test with the pair's calendar regime, and keep edges whose one-sided
/// p-value beats the Bonferroni level. Pairs with fewer than 2M+1 aligned
/// observations are recorded as skipped, not silently dropped.
pub fn build_window_network(
    residuals: &BTreeMap<String, Vec<(NaiveDate, f64)>>,
    window: &Window,
    registry: &Registry,
    cfg: &CausalityConfig,
) -> Result<NetworkBuildInputs> {
    let ids: Vec<String> = residuals.keys().cloned().collect();
    let n = ids.len();
    if n < 2 {
        return Err(Error::Validation(
            "need at least two markets to build a network".into(),
        ));
    }
    for id in &ids {
        if !registry.contains_key(id) {
            return Err(Error::Validation(format!("market {id} missing from registry")));
        }
    }
    let start = window.start_date();
    let end = window.end_date();
    let windowed: BTreeMap<&str, Vec<(NaiveDate, f64)>> = residuals
        .iter()
        .map(|(id, series)| {
            let clipped: Vec<(NaiveDate, f64)> = series
                .iter()
                .copied()
                .filter(|(d, _)| *d >= start && *d <= end)
                .collect();
            (id.as_str(), clipped)
        })
        .collect();
    for (id, series) in &windowed {
        if series.is_empty() {
            return Err(Error::Validation(format!(
                "market {id} has no residuals inside window {}",
                window.end
            )));
        }
    }
    let level = bonferroni_level(n, cfg.base_level);
    let mut pairs = Vec::with_capacity(n * (n - 1));
    for out in &ids {
        for in_ in &ids {
            if out != in_ {
                pairs.push((out.clone(), in_.clone()));
            }
        }
    }
    let min_obs = 2 * cfg.bandwidth + 1;
    let outcomes: Vec<PairOutcome> = pairs
        .par_iter()
        .map(|(out_id, in_id)| {
            let out_spec = &registry[out_id];
            let in_spec = &registry[in_id];
            let aligned = match align_residual_pair(
                out_spec,
                in_spec,
                &windowed[out_id.as_str()],
                &windowed[in_id.as_str()],
            ) {
                Ok(a) => a,
                Err(e) => {
                    return PairOutcome::Skipped(SkippedPair {
                        out_id: out_id.clone(),
                        in_id: in_id.clone(),
                        reason: e.to_string(),
                    })
                }
            };
            if aligned.len() < min_obs {
                return PairOutcome::Skipped(SkippedPair {
                    out_id: out_id.clone(),
                    in_id: in_id.clone(),
                    reason: format!(
                        "insufficient aligned observations: {} < {min_obs}",
                        aligned.len()
                    ),
                });
            }
            match pair_test(
                out_id,
                in_id,
                &aligned.r_out,
                &aligned.r_in,
                cfg,
                aligned.k_start,
            ) {
                Ok(res) => PairOutcome::Tested(res),
                Err(e) => PairOutcome::Skipped(SkippedPair {
                    out_id: out_id.clone(),
                    in_id: in_id.clone(),
                    reason: e.to_string(),
                }),
            }
        })
        .collect();
    let mut network = SpilloverNetwork::new(window.end, ids);
    let mut tests = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome {
            PairOutcome::Tested(res) => {
                if res.p < level {
                    let o = network.vertex_index(&res.out_id).unwrap();
                    let i = network.vertex_index(&res.in_id).unwrap();
                    network.add_edge(o, i);
                }
                tests.push(res);
            }
            PairOutcome::Skipped(s) => skipped.push(s),
        }
    }
    Ok(NetworkBuildInputs {
        network,
        tests,
        skipped,
        level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::{Classification, CloseChange, MarketSpec, TzRule};
    use crate::seeding::rng_for;
    use crate::windows::Month;
    use chrono::{Datelike, Duration, NaiveTime};
    use rand_distr::{Distribution, StandardNormal};

    fn market(id: &str, close_hm: (u32, u32)) -> MarketSpec {
        MarketSpec {
            id: id.into(),
            name: id.into(),
            classification: Classification::Developed,
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
                close: NaiveTime::from_hms_opt(close_hm.0, close_hm.1, 0).unwrap(),
            }],
        }
    }

    fn weekdays_2006(n: usize) -> Vec<NaiveDate> {
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

    #[test]
    fn planted_edge_is_found_and_nulls_are_not() {
        let mut registry = Registry::new();
        // closes spread so A precedes B precedes C within the day
        registry.insert("A".into(), market("A", (6, 0)));
        registry.insert("B".into(), market("B", (12, 0)));
        registry.insert("C".into(), market("C", (18, 0)));
        let dates = weekdays_2006(260);
        let mut rng = rng_for(1, "build-net");
        let a: Vec<f64> = (0..260).map(|_| StandardNormal.sample(&mut rng)).collect();
        let c: Vec<f64> = (0..260).map(|_| StandardNormal.sample(&mut rng)).collect();
        // B is driven by A same day (A closes earlier)
        let b: Vec<f64> = (0..260)
            .map(|t| {
                let z: f64 = StandardNormal.sample(&mut rng);
                0.8 * a[t] + 0.6 * z
            })
            .collect();
        let mut residuals = BTreeMap::new();
        for (id, v) in [("A", a), ("B", b), ("C", c)] {
            residuals.insert(
                id.to_string(),
                dates.iter().copied().zip(v.iter().copied()).collect(),
            );
        }
        let window = Window {
            end: Month::new(2006, 12),
            window_months: 12,
        };
        let cfg = CausalityConfig::default();
        let out = build_window_network(&residuals, &window, &registry, &cfg).unwrap();
        assert_eq!(out.level, 0.01 / 6.0);
        assert_eq!(out.tests.len() + out.skipped.len(), 6);
        let ia = out.network.vertex_index("A").unwrap();
        let ib = out.network.vertex_index("B").unwrap();
        let ic = out.network.vertex_index("C").unwrap();
        assert!(out.network.has_edge(ia, ib), "planted A->B missing");
        assert!(!out.network.has_edge(ic, ia));
        assert!(!out.network.has_edge(ia, ic));
    }

    #[test]
    fn short_pairs_are_skipped_with_reason() {
        let mut registry = Registry::new();
        registry.insert("A".into(), market("A", (6, 0)));
        registry.insert("B".into(), market("B", (12, 0)));
        let dates = weekdays_2006(8);
        let residuals: BTreeMap<String, Vec<(NaiveDate, f64)>> = [
            (
                "A".to_string(),
                dates.iter().map(|d| (*d, 0.5)).collect::<Vec<_>>(),
            ),
            ("B".to_string(), dates.iter().map(|d| (*d, -0.5)).collect()),
        ]
        .into_iter()
        .collect();
        let window = Window {
            end: Month::new(2006, 12),
            window_months: 12,
        };
        let out = build_window_network(
            &residuals,
            &window,
            &registry,
            &CausalityConfig::default(),
        )
        .unwrap();
        assert_eq!(out.tests.len(), 0);
        assert_eq!(out.skipped.len(), 2);
        assert!(out.skipped[0].reason.contains("insufficient"));
        assert_eq!(out.network.n_edges(), 0);
    }

    #[test]
    fn deterministic_under_repeated_builds() {
        let mut registry = Registry::new();
        for (i, id) in ["A", "B", "C", "D"].iter().enumerate() {
            registry.insert(id.to_string(), market(id, (4 + 4 * i as u32, 0)));
        }
        let dates = weekdays_2006(260);
        let mut rng = rng_for(2, "build-det");
        let mut residuals = BTreeMap::new();
        for id in ["A", "B", "C", "D"] {
            let v: Vec<(NaiveDate, f64)> = dates
                .iter()
                .map(|d| (*d, StandardNormal.sample(&mut rng)))
                .collect();
            residuals.insert(id.to_string(), v);
        }
        let window = Window {
            end: Month::new(2006, 12),
            window_months: 12,
        };
        let cfg = CausalityConfig::default();
        let one = build_window_network(&residuals, &window, &registry, &cfg).unwrap();
        let two = build_window_network(&residuals, &window, &registry, &cfg).unwrap();
        assert_eq!(one.network, two.network);
        let q1: Vec<f64> = one.tests.iter().map(|t| t.q).collect();
        let q2: Vec<f64> = two.tests.iter().map(|t| t.q).collect();
        assert_eq!(q1, q2);
    }
}
