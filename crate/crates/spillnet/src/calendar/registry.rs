//! Human-editable market registry. TOML, one `[[markets]]` table per
//! market with its classification, per-year time-zone rules and dated
//! closing-hour schedule.

use super::{Classification, CloseChange, MarketSpec, TzRule};
use crate::error::{Error, Result};
use chrono::{NaiveDate, NaiveTime};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Markets keyed by id; iteration order is the canonical (sorted) order
/// used everywhere downstream.
pub type Registry = BTreeMap<String, MarketSpec>;

#[derive(Debug, Serialize, Deserialize)]
struct RegistryFile {
    #[serde(default)]
    markets: Vec<MarketFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MarketFile {
    id: String,
    #[serde(default)]
    name: String,
    classification: String,
    tz_rules: Vec<TzRuleFile>,
    close_schedule: Vec<CloseFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TzRuleFile {
    year: i32,
    std_offset_minutes: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dst_start: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dst_end: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dst_offset_minutes: Option<i32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CloseFile {
    effective: String,
    close: String,
}

fn parse_date(path: &Path, s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| Error::parse(path.display().to_string(), format!("bad date '{s}': {e}")))
}

fn parse_time(path: &Path, s: &str) -> Result<NaiveTime> {
    NaiveTime::parse_from_str(s, "%H:%M")
        .or_else(|_| NaiveTime::parse_from_str(s, "%H:%M:%S"))
        .map_err(|e| Error::parse(path.display().to_string(), format!("bad time '{s}': {e}")))
}

pub fn load_registry(path: &Path) -> Result<Registry> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let file: RegistryFile = toml::from_str(&text)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    let mut registry = Registry::new();
    for m in file.markets {
        let mut tz_rules = Vec::with_capacity(m.tz_rules.len());
        for r in &m.tz_rules {
            tz_rules.push(TzRule {
                year: r.year,
                std_offset_minutes: r.std_offset_minutes,
                dst_start: r.dst_start.as_deref().map(|s| parse_date(path, s)).transpose()?,
                dst_end: r.dst_end.as_deref().map(|s| parse_date(path, s)).transpose()?,
                dst_offset_minutes: r.dst_offset_minutes,
            });
        }
        let mut close_schedule = Vec::with_capacity(m.close_schedule.len());
        for c in &m.close_schedule {
            close_schedule.push(CloseChange {
                effective: parse_date(path, &c.effective)?,
                close: parse_time(path, &c.close)?,
            });
        }
        let spec = MarketSpec {
            name: if m.name.is_empty() { m.id.clone() } else { m.name },
            id: m.id,
            classification: Classification::parse(&m.classification)?,
            tz_rules,
            close_schedule,
        };
        spec.validate()?;
        if registry.insert(spec.id.clone(), spec.clone()).is_some() {
            return Err(Error::Validation(format!("duplicate market id {}", spec.id)));
        }
    }
    if registry.is_empty() {
        return Err(Error::Validation(format!(
            "registry {} contains no markets",
            path.display()
        )));
    }
    Ok(registry)
}

pub fn save_registry(path: &Path, registry: &Registry) -> Result<()> {
    let file = RegistryFile {
        markets: registry
            .values()
            .map(|m| MarketFile {
                id: m.id.clone(),
                name: m.name.clone(),
                classification: match m.classification {
                    Classification::Developed => "developed".into(),
                    Classification::Emerging => "emerging".into(),
                    Classification::Frontier => "frontier".into(),
                },
                tz_rules: m
                    .tz_rules
                    .iter()
                    .map(|r| TzRuleFile {
                        year: r.year,
                        std_offset_minutes: r.std_offset_minutes,
                        dst_start: r.dst_start.map(|d| d.to_string()),
                        dst_end: r.dst_end.map(|d| d.to_string()),
                        dst_offset_minutes: r.dst_offset_minutes,
                    })
                    .collect(),
                close_schedule: m
                    .close_schedule
                    .iter()
                    .map(|c| CloseFile {
                        effective: c.effective.to_string(),
                        close: c.close.format("%H:%M").to_string(),
                    })
                    .collect(),
            })
            .collect(),
    };
    let text = toml::to_string_pretty(&file)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}
