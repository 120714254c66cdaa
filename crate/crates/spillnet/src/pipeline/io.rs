//! File formats shared by the pipeline stages. Every CSV starts with a
//! `# config_hash=...` comment line and JSONL files carry a meta record,
//! so each artifact names the run configuration it came from.

use crate::calendar::PriceSeries;
use crate::causality::PairTestResult;
use crate::error::{Error, Result};
use crate::garch::{FilterFit, SelectionTrace};
use crate::network::SpilloverNetwork;
use crate::probit::CovariatePanel;
use crate::windows::Month;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub fn hash_comment(config_hash: &str) -> String {
    format!("# config_hash={config_hash}\n")
}

fn open_reader(path: &Path) -> Result<BufReader<std::fs::File>> {
    Ok(BufReader::new(std::fs::File::open(path).map_err(|e| {
        Error::io(path.display().to_string(), e)
    })?))
}

fn create_file(path: &Path) -> Result<std::fs::File> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
    }
    std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn parse_date(path: &Path, s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| Error::parse(path.display().to_string(), format!("bad date '{s}': {e}")))
}

fn parse_f64(path: &Path, s: &str, col: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::parse(path.display().to_string(), format!("bad {col} value '{s}'")))
}

// ---------------------------------------------------------------- prices

/// Read `date,market_id,close` into per-market price series.
pub fn read_prices(path: &Path) -> Result<BTreeMap<String, PriceSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    let mut rows: BTreeMap<String, Vec<(NaiveDate, f64)>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        if record.len() < 3 {
            return Err(Error::parse(
                path.display().to_string(),
                format!("expected 3 columns, got {}", record.len()),
            ));
        }
        let date = parse_date(path, &record[0])?;
        let close = parse_f64(path, &record[2], "close")?;
        rows.entry(record[1].to_string()).or_default().push((date, close));
    }
    let mut out = BTreeMap::new();
    for (id, mut obs) in rows {
        obs.sort_by_key(|(d, _)| *d);
        out.insert(id.clone(), PriceSeries::new(id, obs)?);
    }
    if out.is_empty() {
        return Err(Error::Validation(format!(
            "price file {} has no rows",
            path.display()
        )));
    }
    Ok(out)
}

pub fn write_prices(
    path: &Path,
    prices: &BTreeMap<String, PriceSeries>,
    config_hash: &str,
) -> Result<()> {
    let mut f = create_file(path)?;
    let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
    f.write_all(hash_comment(config_hash).as_bytes()).map_err(io_err)?;
    f.write_all(b"date,market_id,close\n").map_err(io_err)?;
    for (id, series) in prices {
        for (d, p) in series.observations() {
            writeln!(f, "{d},{id},{p:.10}").map_err(io_err)?;
        }
    }
    Ok(())
}

// ------------------------------------------------------------ covariates

/// Read `date,market_id,equity_close,fx_rate_usd,market_cap_usd,mc_to_gdp`.
/// Empty cells are treated as absent (annual series may be sparse).
pub fn read_covariates(path: &Path) -> Result<CovariatePanel> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    let mut panel = CovariatePanel::default();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        if record.len() < 6 {
            return Err(Error::parse(
                path.display().to_string(),
                format!("expected 6 columns, got {}", record.len()),
            ));
        }
        let date = parse_date(path, &record[0])?;
        let id = record[1].to_string();
        let push = |map: &mut BTreeMap<String, Vec<(NaiveDate, f64)>>,
                        raw: &str,
                        col: &str|
         -> Result<()> {
            if !raw.is_empty() {
                map.entry(id.clone())
                    .or_default()
                    .push((date, parse_f64(path, raw, col)?));
            }
            Ok(())
        };
        push(&mut panel.equity_close, &record[2], "equity_close")?;
        push(&mut panel.fx_rate, &record[3], "fx_rate_usd")?;
        push(&mut panel.market_cap, &record[4], "market_cap_usd")?;
        push(&mut panel.mc_to_gdp, &record[5], "mc_to_gdp")?;
    }
    for map in [
        &mut panel.equity_close,
        &mut panel.fx_rate,
        &mut panel.market_cap,
        &mut panel.mc_to_gdp,
    ] {
        for series in map.values_mut() {
            series.sort_by_key(|(d, _)| *d);
        }
    }
    Ok(panel)
}

pub fn write_covariates(path: &Path, panel: &CovariatePanel, config_hash: &str) -> Result<()> {
    let mut f = create_file(path)?;
    let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
    f.write_all(hash_comment(config_hash).as_bytes()).map_err(io_err)?;
    f.write_all(b"date,market_id,equity_close,fx_rate_usd,market_cap_usd,mc_to_gdp\n")
        .map_err(io_err)?;
    // collect the union of (date, market) keys across the four series
    let mut keys: std::collections::BTreeSet<(NaiveDate, &String)> = Default::default();
    let mut lookup: BTreeMap<(&String, NaiveDate), [Option<f64>; 4]> = BTreeMap::new();
    for (slot, map) in [
        &panel.equity_close,
        &panel.fx_rate,
        &panel.market_cap,
        &panel.mc_to_gdp,
    ]
    .iter()
    .enumerate()
    {
        for (id, series) in map.iter() {
            for (d, v) in series {
                keys.insert((*d, id));
                lookup.entry((id, *d)).or_default()[slot] = Some(*v);
            }
        }
    }
    for (d, id) in keys {
        let vals = lookup[&(id, d)];
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.10}")).unwrap_or_default();
        writeln!(
            f,
            "{d},{id},{},{},{},{}",
            cell(vals[0]),
            cell(vals[1]),
            cell(vals[2]),
            cell(vals[3])
        )
        .map_err(io_err)?;
    }
    Ok(())
}

// ------------------------------------------------------------- residuals

pub fn write_residuals(
    path: &Path,
    residuals: &BTreeMap<String, Vec<(NaiveDate, f64)>>,
    config_hash: &str,
) -> Result<()> {
    let mut f = create_file(path)?;
    let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
    f.write_all(hash_comment(config_hash).as_bytes()).map_err(io_err)?;
    f.write_all(b"date,market_id,s\n").map_err(io_err)?;
    for (id, series) in residuals {
        for (d, s) in series {
            writeln!(f, "{d},{id},{s:.12e}").map_err(io_err)?;
        }
    }
    Ok(())
}

pub fn read_residuals(path: &Path) -> Result<BTreeMap<String, Vec<(NaiveDate, f64)>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    let mut out: BTreeMap<String, Vec<(NaiveDate, f64)>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        let date = parse_date(path, &record[0])?;
        let s = parse_f64(path, &record[2], "s")?;
        out.entry(record[1].to_string()).or_default().push((date, s));
    }
    for series in out.values_mut() {
        series.sort_by_key(|(d, _)| *d);
    }
    Ok(out)
}

// ------------------------------------------------------------------ fits

/// One fitted specification, one JSON line per (window, market).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitRecord {
    pub window: String,
    pub market: String,
    pub fit: FilterFit,
    pub trace: SelectionTrace,
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T], config_hash: &str) -> Result<()> {
    let mut f = create_file(path)?;
    let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
    writeln!(f, "{{\"_meta\":{{\"config_hash\":\"{config_hash}\"}}}}").map_err(io_err)?;
    for r in records {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        f.write_all(line.as_bytes()).map_err(io_err)?;
        f.write_all(b"\n").map_err(io_err)?;
    }
    Ok(())
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let reader = open_reader(path)?;
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
        if line.trim().is_empty() || line.starts_with("{\"_meta\"") {
            continue;
        }
        let rec: T = serde_json::from_str(&line).map_err(|e| {
            Error::parse(path.display().to_string(), format!("line {}: {e}", i + 1))
        })?;
        out.push(rec);
    }
    Ok(out)
}

// -------------------------------------------------------------- networks

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub window_end: Month,
    pub markets: Vec<String>,
    pub level: f64,
    pub edges: Vec<PairTestResult>,
    pub skipped: Vec<SkippedRecord>,
    /// Every computed test (edges and non-edges) for audit.
    pub tests: Vec<PairTestResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkippedRecord {
    pub out_id: String,
    pub in_id: String,
    pub reason: String,
}

impl NetworkRecord {
    pub fn to_network(&self) -> SpilloverNetwork {
        let mut g = SpilloverNetwork::new(self.window_end, self.markets.clone());
        for e in &self.edges {
            let o = g.vertex_index(&e.out_id).expect("edge market in vertex set");
            let i = g.vertex_index(&e.in_id).expect("edge market in vertex set");
            g.add_edge(o, i);
        }
        g
    }
}

// ------------------------------------------------------------- windows

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowsFile {
    pub config_hash: String,
    pub window_months: u32,
    pub drift_months: u32,
    pub ends: Vec<Month>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create_file(path)?;
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.write_all(b"\n"))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

/// Write a CSV with the config-hash comment line; rows are preformatted.
pub fn write_csv(path: &Path, header: &str, rows: &[String], config_hash: &str) -> Result<()> {
    let mut f = create_file(path)?;
    let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
    f.write_all(hash_comment(config_hash).as_bytes()).map_err(io_err)?;
    writeln!(f, "{header}").map_err(io_err)?;
    for row in rows {
        writeln!(f, "{row}").map_err(io_err)?;
    }
    Ok(())
}

/// Read a CSV written by [`write_csv`] back into string records.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for record in rdr.records() {
        rows.push(record.map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?);
    }
    Ok((header, rows))
}
