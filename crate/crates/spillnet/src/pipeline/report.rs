//! Report stage: condenses the metrics and probit artifacts into five
//! plot-ready tidy CSVs (centralization series, degree-correlation series,
//! survival curves, per-market centrality trends, pooled probit summary).

use super::config::RunConfig;
use super::io;
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingInput(format!(
            "{} (run the upstream stage first)",
            path.display()
        )))
    }
}

pub fn stage_report(cfg: &RunConfig, hash: &str) -> Result<()> {
    let network_metrics = cfg.out("network_metrics.csv");
    let survival = cfg.out("survival.csv");
    let trends = cfg.out("centrality_trends.csv");
    let probit_summary = cfg.out("probit_summary.csv");
    for p in [&network_metrics, &survival, &trends, &probit_summary] {
        require(p)?;
    }
    // centralization time series
    let (header, rows) = io::read_csv(&network_metrics)?;
    let col = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(network_metrics.display().to_string(), format!("missing column {name}")))
    };
    let (c_end, c_out, c_in, c_mdc, c_mhc, c_corr) = (
        col("window_end")?,
        col("out_centralization")?,
        col("in_centralization")?,
        col("mean_degree_centrality")?,
        col("mean_harmonic_centrality")?,
        col("degree_correlation")?,
    );
    let mut central_rows = Vec::new();
    let mut corr_rows = Vec::new();
    for r in &rows {
        central_rows.push(format!(
            "{},{},{},{},{}",
            &r[c_end], &r[c_out], &r[c_in], &r[c_mdc], &r[c_mhc]
        ));
        corr_rows.push(format!("{},{}", &r[c_end], &r[c_corr]));
    }
    io::write_csv(
        &cfg.out("report/centralization_series.csv"),
        "window_end,out_centralization,in_centralization,mean_degree_centrality,mean_harmonic_centrality",
        &central_rows,
        hash,
    )?;
    io::write_csv(
        &cfg.out("report/degree_correlation_series.csv"),
        "window_end,degree_correlation",
        &corr_rows,
        hash,
    )?;
    // survival curves averaged over time per step
    let (sheader, srows) = io::read_csv(&survival)?;
    let scol = |name: &str| -> Result<usize> {
        sheader
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(survival.display().to_string(), format!("missing column {name}")))
    };
    let (s_steps, s_ratio) = (scol("steps")?, scol("ratio")?);
    let mut by_step: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in &srows {
        if r[s_ratio].is_empty() {
            continue;
        }
        let steps: usize = r[s_steps]
            .parse()
            .map_err(|_| Error::parse(survival.display().to_string(), "bad steps"))?;
        let ratio: f64 = r[s_ratio]
            .parse()
            .map_err(|_| Error::parse(survival.display().to_string(), "bad ratio"))?;
        by_step.entry(steps).or_default().push(ratio);
    }
    let curve_rows: Vec<String> = by_step
        .iter()
        .map(|(s, v)| format!("{s},{:.10},{}", crate::stats::mean(v), v.len()))
        .collect();
    io::write_csv(
        &cfg.out("report/survival_curves.csv"),
        "steps,mean_ratio,n_windows",
        &curve_rows,
        hash,
    )?;
    // pass-through tables
    let (theader, trows) = io::read_csv(&trends)?;
    let trow_strings: Vec<String> = trows
        .iter()
        .map(|r| r.iter().collect::<Vec<_>>().join(","))
        .collect();
    io::write_csv(
        &cfg.out("report/centrality_trends.csv"),
        &theader.join(","),
        &trow_strings,
        hash,
    )?;
    let (pheader, prows) = io::read_csv(&probit_summary)?;
    let prow_strings: Vec<String> = prows
        .iter()
        .map(|r| r.iter().collect::<Vec<_>>().join(","))
        .collect();
    io::write_csv(
        &cfg.out("report/probit_summary.csv"),
        &pheader.join(","),
        &prow_strings,
        hash,
    )?;
    Ok(())
}
