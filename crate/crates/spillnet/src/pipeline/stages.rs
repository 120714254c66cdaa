//! Stage orchestration. Every stage reads and writes the documented file
//! formats, so expensive stages are cacheable and each one is testable in
//! isolation. All randomness derives from the root seed and task labels;
//! parallel tasks are merged in canonical order so thread scheduling never
//! changes output bytes.

use super::config::{FitScope, RunConfig};
use super::io::{self, FitRecord, NetworkRecord, SkippedRecord, WindowsFile};
use super::report;
use crate::calendar::{compute_log_returns, load_registry, save_registry};
use crate::causality::build_window_network;
use crate::error::{Error, Result};
use crate::garch::select_model;
use crate::network::{centrality_report, hac_trend_test, survival_ratio, Direction};
use crate::probit::{
    build_design, build_weights, fit_sar_probit, summarize_coefficients, window_covariates,
};
use crate::seeding::rng_for;
use crate::synth::gen_world;
use crate::windows::{enumerate_windows, Month, Window};
use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Synth,
    Filter,
    Network,
    Metrics,
    Probit,
    Report,
}

impl Stage {
    pub fn parse(s: &str) -> Result<Stage> {
        match s.to_ascii_lowercase().as_str() {
            "synth" => Ok(Stage::Synth),
            "filter" => Ok(Stage::Filter),
            "network" => Ok(Stage::Network),
            "metrics" => Ok(Stage::Metrics),
            "probit" => Ok(Stage::Probit),
            "report" => Ok(Stage::Report),
            other => Err(Error::Config(format!("unknown stage '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Filter => "filter",
            Stage::Network => "network",
            Stage::Metrics => "metrics",
            Stage::Probit => "probit",
            Stage::Report => "report",
        }
    }

    /// Dependency order.
    pub const ORDER: [Stage; 6] = [
        Stage::Synth,
        Stage::Filter,
        Stage::Network,
        Stage::Metrics,
        Stage::Probit,
        Stage::Report,
    ];
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub stages: Vec<StageTiming>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Run the requested stages in dependency order; a stage failure halts the
/// downstream stages and leaves completed artifacts in place.
pub fn run(cfg: &RunConfig, stages: &[Stage]) -> Result<Manifest> {
    let hash = cfg.config_hash();
    let mut manifest = Manifest {
        config_hash: hash.clone(),
        seed: cfg.run.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        stages: Vec::new(),
    };
    for stage in Stage::ORDER {
        if !stages.contains(&stage) {
            continue;
        }
        let start = Instant::now();
        match stage {
            Stage::Synth => stage_synth(cfg, &hash)?,
            Stage::Filter => stage_filter(cfg, &hash)?,
            Stage::Network => stage_network(cfg, &hash)?,
            Stage::Metrics => stage_metrics(cfg, &hash)?,
            Stage::Probit => stage_probit(cfg, &hash)?,
            Stage::Report => report::stage_report(cfg, &hash)?,
        }
        manifest.stages.push(StageTiming {
            stage: stage.name().to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        io::write_json(&cfg.out("manifest.json"), &manifest)?;
    }
    Ok(manifest)
}

/// Lint the configuration and the referenced data files.
pub fn validate(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.paths.output)
        .map_err(|e| Error::io(cfg.paths.output.display().to_string(), e))?;
    if cfg.world.is_some() {
        return Ok(()); // data files will be generated by the synth stage
    }
    let registry = load_registry(&cfg.paths.registry)?;
    let prices = io::read_prices(&cfg.paths.prices)?;
    for id in prices.keys() {
        if !registry.contains_key(id) {
            return Err(Error::Validation(format!(
                "market {id} has prices but no registry entry"
            )));
        }
    }
    io::read_covariates(&cfg.paths.covariates)?;
    let (first, last) = price_span(&prices)?;
    let windows = enumerate_windows(first, last, cfg.rolling.window_months, cfg.rolling.drift_months);
    if windows.is_empty() {
        return Err(Error::Validation(
            "price history is shorter than one rolling window".into(),
        ));
    }
    Ok(())
}

fn price_span(
    prices: &BTreeMap<String, crate::calendar::PriceSeries>,
) -> Result<(NaiveDate, NaiveDate)> {
    let mut first: Option<NaiveDate> = None;
    let mut last: Option<NaiveDate> = None;
    for series in prices.values() {
        if let Some((d, _)) = series.observations().first() {
            first = Some(first.map_or(*d, |f| f.min(*d)));
        }
        if let Some((d, _)) = series.observations().last() {
            last = Some(last.map_or(*d, |l| l.max(*d)));
        }
    }
    match (first, last) {
        (Some(f), Some(l)) => Ok((f, l)),
        _ => Err(Error::Validation("no price observations".into())),
    }
}

pub fn stage_synth(cfg: &RunConfig, hash: &str) -> Result<()> {
    let world_cfg = cfg
        .world
        .as_ref()
        .ok_or_else(|| Error::Config("synth stage requires a [world] section".into()))?;
    let world = gen_world(world_cfg)?;
    save_registry(&cfg.paths.registry, &world.registry)?;
    io::write_prices(&cfg.paths.prices, &world.prices, hash)?;
    io::write_covariates(&cfg.paths.covariates, &world.covariates, hash)?;
    io::write_json(&cfg.out("truth.json"), &world.truth)?;
    Ok(())
}

pub fn stage_filter(cfg: &RunConfig, hash: &str) -> Result<()> {
    let registry = load_registry(&cfg.paths.registry)?;
    let prices = io::read_prices(&cfg.paths.prices)?;
    for id in prices.keys() {
        if !registry.contains_key(id) {
            return Err(Error::Validation(format!(
                "market {id} has prices but no registry entry"
            )));
        }
    }
    let (first, last) = price_span(&prices)?;
    let windows = enumerate_windows(first, last, cfg.rolling.window_months, cfg.rolling.drift_months);
    if windows.is_empty() {
        return Err(Error::Validation(
            "price history is shorter than one rolling window".into(),
        ));
    }
    io::write_json(
        &cfg.out("windows.json"),
        &WindowsFile {
            config_hash: hash.to_string(),
            window_months: cfg.rolling.window_months,
            drift_months: cfg.rolling.drift_months,
            ends: windows.iter().map(|w| w.end).collect(),
        },
    )?;
    let select_cfg = cfg.select_config()?;
    let returns: BTreeMap<&String, _> = prices
        .iter()
        .map(|(id, series)| Ok((id, compute_log_returns(series)?)))
        .collect::<Result<_>>()?;
    let mut fit_records: Vec<FitRecord> = Vec::new();
    match cfg.filter.scope {
        FitScope::Global => {
            let results: Vec<(String, Result<_>)> = returns
                .par_iter()
                .map(|(id, ret)| {
                    let label = format!("fit/global/{id}");
                    ((*id).clone(), select_model(&ret.values(), &select_cfg, &label))
                })
                .collect();
            let mut residuals: BTreeMap<String, Vec<(NaiveDate, f64)>> = BTreeMap::new();
            for (id, outcome) in results {
                let outcome = outcome?;
                let dates: Vec<NaiveDate> = returns[&id].dates().collect();
                residuals.insert(
                    id.clone(),
                    dates
                        .into_iter()
                        .zip(outcome.fit.std_residuals.iter().copied())
                        .collect(),
                );
                fit_records.push(FitRecord {
                    window: "global".into(),
                    market: id,
                    fit: strip_residuals(outcome.fit),
                    trace: outcome.trace,
                });
            }
            io::write_residuals(&cfg.out("residuals/global.csv"), &residuals, hash)?;
        }
        FitScope::PerWindow => {
            let tasks: Vec<(Window, String)> = windows
                .iter()
                .flat_map(|w| prices.keys().map(move |id| (*w, id.clone())))
                .collect();
            let results: Vec<(Month, String, Result<_>)> = tasks
                .par_iter()
                .map(|(w, id)| {
                    let ret = &returns[id];
                    let values: Vec<f64> = ret
                        .points
                        .iter()
                        .filter(|(d, _)| w.contains(*d))
                        .map(|(_, v)| *v)
                        .collect();
                    let label = format!("fit/{}/{id}", w.end);
                    (w.end, id.clone(), select_model(&values, &select_cfg, &label))
                })
                .collect();
            let mut by_window: BTreeMap<Month, BTreeMap<String, Vec<(NaiveDate, f64)>>> =
                BTreeMap::new();
            for (end, id, outcome) in results {
                let outcome = outcome?;
                let w = Window {
                    end,
                    window_months: cfg.rolling.window_months,
                };
                let dates: Vec<NaiveDate> = returns[&id]
                    .points
                    .iter()
                    .filter(|(d, _)| w.contains(*d))
                    .map(|(d, _)| *d)
                    .collect();
                by_window.entry(end).or_default().insert(
                    id.clone(),
                    dates
                        .into_iter()
                        .zip(outcome.fit.std_residuals.iter().copied())
                        .collect(),
                );
                fit_records.push(FitRecord {
                    window: end.to_string(),
                    market: id,
                    fit: strip_residuals(outcome.fit),
                    trace: outcome.trace,
                });
            }
            for (end, residuals) in &by_window {
                io::write_residuals(&cfg.out(&format!("residuals/{end}.csv")), residuals, hash)?;
            }
        }
    }
    fit_records.sort_by(|a, b| (a.window.clone(), a.market.clone()).cmp(&(b.window.clone(), b.market.clone())));
    io::write_jsonl(&cfg.out("fits.jsonl"), &fit_records, hash)?;
    Ok(())
}

/// Residual paths live in the residual CSVs; keep fit records lean.
fn strip_residuals(mut fit: crate::garch::FilterFit) -> crate::garch::FilterFit {
    fit.std_residuals = Vec::new();
    fit
}

fn load_windows(cfg: &RunConfig) -> Result<Vec<Window>> {
    let wf: WindowsFile = io::read_json(&cfg.out("windows.json"))
        .map_err(|_| Error::MissingInput("windows.json (run the filter stage first)".into()))?;
    Ok(wf
        .ends
        .iter()
        .map(|&end| Window {
            end,
            window_months: wf.window_months,
        })
        .collect())
}

pub fn stage_network(cfg: &RunConfig, hash: &str) -> Result<()> {
    let registry = load_registry(&cfg.paths.registry)?;
    let windows = load_windows(cfg)?;
    let causality_cfg = cfg.causality_config();
    let global_residuals = match cfg.filter.scope {
        FitScope::Global => Some(io::read_residuals(&cfg.out("residuals/global.csv"))?),
        FitScope::PerWindow => None,
    };
    let records: Vec<Result<NetworkRecord>> = windows
        .par_iter()
        .map(|w| {
            let residuals = match &global_residuals {
                Some(r) => r.clone(),
                None => io::read_residuals(&cfg.out(&format!("residuals/{}.csv", w.end)))?,
            };
            let built = build_window_network(&residuals, w, &registry, &causality_cfg)?;
            let edges: Vec<_> = built
                .tests
                .iter()
                .filter(|t| t.p < built.level)
                .cloned()
                .collect();
            Ok(NetworkRecord {
                window_end: w.end,
                markets: built.network.vertices.clone(),
                level: built.level,
                edges,
                skipped: built
                    .skipped
                    .iter()
                    .map(|s| SkippedRecord {
                        out_id: s.out_id.clone(),
                        in_id: s.in_id.clone(),
                        reason: s.reason.clone(),
                    })
                    .collect(),
                tests: built.tests,
            })
        })
        .collect();
    let records: Vec<NetworkRecord> = records.into_iter().collect::<Result<_>>()?;
    io::write_jsonl(&cfg.out("networks.jsonl"), &records, hash)?;
    Ok(())
}

fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.10}")
    }
}

pub fn stage_metrics(cfg: &RunConfig, hash: &str) -> Result<()> {
    let records: Vec<NetworkRecord> = io::read_jsonl(&cfg.out("networks.jsonl"))
        .map_err(|_| Error::MissingInput("networks.jsonl (run the network stage first)".into()))?;
    if records.is_empty() {
        return Err(Error::MissingInput("networks.jsonl contains no windows".into()));
    }
    let direction = if cfg.network.harmonic_incoming {
        Direction::In
    } else {
        Direction::Out
    };
    let networks: Vec<_> = records.iter().map(|r| r.to_network()).collect();
    let reports: Vec<_> = networks
        .iter()
        .map(|g| centrality_report(g, direction))
        .collect();
    // vertex metrics
    let mut vertex_rows = Vec::new();
    for rep in &reports {
        for (i, id) in rep.vertices.iter().enumerate() {
            vertex_rows.push(format!(
                "{},{id},{},{},{}",
                rep.window_end,
                rep.out_degree[i],
                rep.in_degree[i],
                fmt_f(rep.harmonic[i])
            ));
        }
    }
    io::write_csv(
        &cfg.out("vertex_metrics.csv"),
        "window_end,market_id,out_degree,in_degree,harmonic",
        &vertex_rows,
        hash,
    )?;
    // network metrics
    let mut network_rows = Vec::new();
    for rep in &reports {
        network_rows.push(format!(
            "{},{},{},{},{},{},{},{},{}",
            rep.window_end,
            rep.vertices.len(),
            rep.out_degree.iter().sum::<usize>(),
            fmt_f(rep.mean_degree_centrality),
            fmt_f(rep.mean_harmonic_centrality),
            fmt_f(rep.out_centralization),
            fmt_f(rep.in_centralization),
            fmt_f(rep.density),
            rep.degree_correlation.map(fmt_f).unwrap_or_default(),
        ));
    }
    io::write_csv(
        &cfg.out("network_metrics.csv"),
        "window_end,n_vertices,n_edges,mean_degree_centrality,mean_harmonic_centrality,\
         out_centralization,in_centralization,density,degree_correlation",
        &network_rows,
        hash,
    )?;
    // survival matrix (t x s)
    let mut survival_rows = Vec::new();
    for t in 0..networks.len() {
        for s in 1..=cfg.network.survival_max_steps.min(t) {
            let ratio = match survival_ratio(&networks, t, s) {
                Ok(r) => fmt_f(r),
                Err(_) => String::new(),
            };
            survival_rows.push(format!("{},{s},{ratio}", networks[t].window_end));
        }
    }
    io::write_csv(
        &cfg.out("survival.csv"),
        "window_end,steps,ratio",
        &survival_rows,
        hash,
    )?;
    // per-market centrality trends plus the cross-market mean row
    let mut trend_rows = Vec::new();
    let vertices = &reports[0].vertices;
    for metric in ["out_degree", "in_degree", "harmonic"] {
        let mut slopes = Vec::new();
        for (i, id) in vertices.iter().enumerate() {
            let series: Vec<f64> = reports
                .iter()
                .map(|rep| match metric {
                    "out_degree" => rep.out_degree[i] as f64,
                    "in_degree" => rep.in_degree[i] as f64,
                    _ => rep.harmonic[i],
                })
                .collect();
            if series.len() < 10 {
                trend_rows.push(format!("{id},{metric},,,,too few windows"));
                continue;
            }
            let test = hac_trend_test(&series);
            slopes.push(test.slope);
            trend_rows.push(format!(
                "{id},{metric},{},{},{},{}",
                fmt_f(test.slope),
                fmt_f(test.t_stat),
                fmt_f(test.p_value),
                if test.degenerate { "degenerate" } else { "" }
            ));
        }
        if !slopes.is_empty() {
            trend_rows.push(format!(
                "MG,{metric},{},,,mean of per-market slopes",
                fmt_f(crate::stats::mean(&slopes))
            ));
        }
    }
    io::write_csv(
        &cfg.out("centrality_trends.csv"),
        "market_id,metric,slope,t_stat,p_value,note",
        &trend_rows,
        hash,
    )?;
    Ok(())
}

pub fn stage_probit(cfg: &RunConfig, hash: &str) -> Result<()> {
    let registry = load_registry(&cfg.paths.registry)?;
    let records: Vec<NetworkRecord> = io::read_jsonl(&cfg.out("networks.jsonl"))
        .map_err(|_| Error::MissingInput("networks.jsonl (run the network stage first)".into()))?;
    if records.is_empty() {
        return Err(Error::MissingInput("networks.jsonl contains no windows".into()));
    }
    let panel = io::read_covariates(&cfg.paths.covariates)?;
    let markets = records[0].markets.clone();
    for rec in &records {
        window_end_guard(rec, &markets);
    }
    let windows: Vec<Window> = records
        .iter()
        .map(|r| Window {
            end: r.window_end,
            window_months: cfg.rolling.window_months,
        })
        .collect();
    let covariates = window_covariates(&panel, &windows, &markets)?;
    let weights = build_weights(markets.len())?;
    let sampler_cfg = cfg.sampler_config();
    let fits: Vec<Result<(Month, crate::probit::SarProbitFit)>> = records
        .par_iter()
        .map(|rec| {
            let network = rec.to_network();
            let design = build_design(&network, &covariates, &registry, &cfg.probit.us_reference)?;
            let mut rng = rng_for(cfg.run.seed, &format!("probit/{}", rec.window_end));
            let fit = fit_sar_probit(
                &design.y,
                &design.x,
                &design.column_names,
                &weights,
                &sampler_cfg,
                &mut rng,
            )?;
            Ok((rec.window_end, fit))
        })
        .collect();
    let fits: Vec<(Month, crate::probit::SarProbitFit)> = fits.into_iter().collect::<Result<_>>()?;
    // per-window coefficient table
    let mut rows = Vec::new();
    for (end, fit) in &fits {
        rows.push(format!(
            "{end},spatial_rho,{},{},{},{},{}",
            fmt_f(fit.rho_mean),
            fmt_f(fit.rho_sd),
            fmt_f(fit.rho_ci.0),
            fmt_f(fit.rho_ci.1),
            fit.rho_significant
        ));
        for (j, name) in fit.coef_names.iter().enumerate() {
            rows.push(format!(
                "{end},{name},{},{},{},{},{}",
                fmt_f(fit.beta_mean[j]),
                fmt_f(fit.beta_sd[j]),
                fmt_f(fit.beta_ci[j].0),
                fmt_f(fit.beta_ci[j].1),
                fit.beta_significant[j]
            ));
        }
    }
    io::write_csv(
        &cfg.out("probit_windows.csv"),
        "window_end,term,mean,sd,ci_lo,ci_hi,significant",
        &rows,
        hash,
    )?;
    if cfg.probit.persist_draws {
        for (end, fit) in &fits {
            if let (Some(beta_draws), Some(rho_draws)) = (&fit.beta_draws, &fit.rho_draws) {
                let mut draw_rows = Vec::new();
                for (d, (bs, rho)) in beta_draws.iter().zip(rho_draws).enumerate() {
                    draw_rows.push(format!("{d},spatial_rho,{}", fmt_f(*rho)));
                    for (j, b) in bs.iter().enumerate() {
                        draw_rows.push(format!("{d},{},{}", fit.coef_names[j], fmt_f(*b)));
                    }
                }
                io::write_csv(
                    &cfg.out(&format!("probit_draws/{end}.csv")),
                    "draw,term,value",
                    &draw_rows,
                    hash,
                )?;
            }
        }
    }
    // pooled two-panel summary
    let summary = summarize_coefficients(&fits);
    let mut summary_rows = Vec::new();
    for row in &summary {
        summary_rows.push(format!(
            "{},{},{},{},{},{},{}",
            row.panel,
            row.term,
            fmt_f(row.average),
            row.n_positive,
            row.n_positive_significant,
            row.n_negative,
            row.n_negative_significant
        ));
    }
    io::write_csv(
        &cfg.out("probit_summary.csv"),
        "panel,term,average_coefficient,n_positive,n_positive_significant,n_negative,n_negative_significant",
        &summary_rows,
        hash,
    )?;
    Ok(())
}

fn window_end_guard(rec: &NetworkRecord, markets: &[String]) {
    debug_assert_eq!(
        rec.markets, markets,
        "window {} has a different market set",
        rec.window_end
    );
}
