//! Market clocks and return alignment.
//!
//! Each market has a time-zone regime (per-year standard/DST offsets, so
//! historical year-by-year DST decisions are reproducible without an OS
//! zone database) and a dated closing-hour schedule. Alignment of a market
//! pair proceeds in three steps: list-wise deletion of dates where either
//! market did not trade, log-return computation with the weekend/holiday
//! retention rule, and per-date assignment of the admissible cross-lag
//! regime from the two closing instants.

mod align;
mod registry;
mod returns;

pub use align::{align_pair, align_residual_pair, AlignedPair, PairRegime};
pub use registry::{load_registry, save_registry, Registry};
pub use returns::{compute_log_returns, ReturnSeries};

use crate::error::{Error, Result};
use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

/// Market development classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Developed,
    Emerging,
    Frontier,
}

impl Classification {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "developed" => Ok(Classification::Developed),
            "emerging" => Ok(Classification::Emerging),
            "frontier" => Ok(Classification::Frontier),
            other => Err(Error::Validation(format!(
                "unknown classification '{other}'"
            ))),
        }
    }
}

/// Time-zone regime for one calendar year. `dst_start`/`dst_end` are local
/// dates; a southern-hemisphere season wraps the new year (start > end).
/// Markets without daylight saving leave the DST fields empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TzRule {
    pub year: i32,
    pub std_offset_minutes: i32,
    pub dst_start: Option<NaiveDate>,
    pub dst_end: Option<NaiveDate>,
    pub dst_offset_minutes: Option<i32>,
}

impl TzRule {
    /// UTC offset in minutes in force on `date`.
    pub fn offset_minutes(&self, date: NaiveDate) -> i32 {
        match (self.dst_start, self.dst_end, self.dst_offset_minutes) {
            (Some(start), Some(end), Some(dst)) => {
                let active = if start <= end {
                    date >= start && date < end
                } else {
                    // southern hemisphere: season spans the year boundary
                    date >= start || date < end
                };
                if active {
                    dst
                } else {
                    self.std_offset_minutes
                }
            }
            _ => self.std_offset_minutes,
        }
    }
}

/// Dated closing-hour schedule entry: `close` is the local wall-clock
/// closing time in force from `effective` onwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloseChange {
    pub effective: NaiveDate,
    pub close: NaiveTime,
}

/// A market's identity, classification and clock.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketSpec {
    pub id: String,
    pub name: String,
    pub classification: Classification,
    pub tz_rules: Vec<TzRule>,
    pub close_schedule: Vec<CloseChange>,
}

impl MarketSpec {
    pub fn validate(&self) -> Result<()> {
        if self.close_schedule.is_empty() {
            return Err(Error::Validation(format!(
                "market {}: empty close schedule",
                self.id
            )));
        }
        for w in self.close_schedule.windows(2) {
            if w[0].effective >= w[1].effective {
                return Err(Error::Validation(format!(
                    "market {}: close schedule not strictly increasing at {}",
                    self.id, w[1].effective
                )));
            }
        }
        if self.tz_rules.is_empty() {
            return Err(Error::Validation(format!(
                "market {}: no time-zone rules",
                self.id
            )));
        }
        let mut years: Vec<i32> = self.tz_rules.iter().map(|r| r.year).collect();
        years.sort_unstable();
        years.dedup();
        if years.len() != self.tz_rules.len() {
            return Err(Error::Validation(format!(
                "market {}: duplicate time-zone rule year",
                self.id
            )));
        }
        for r in &self.tz_rules {
            let dst_fields = [
                r.dst_start.is_some(),
                r.dst_end.is_some(),
                r.dst_offset_minutes.is_some(),
            ];
            if dst_fields.iter().any(|&b| b) && !dst_fields.iter().all(|&b| b) {
                return Err(Error::Validation(format!(
                    "market {}: DST rule for {} must set start, end and offset together",
                    self.id, r.year
                )));
            }
        }
        Ok(())
    }

    fn tz_rule(&self, date: NaiveDate) -> Result<&TzRule> {
        use chrono::Datelike;
        self.tz_rules
            .iter()
            .find(|r| r.year == date.year())
            .ok_or_else(|| {
                Error::CalendarGap(format!(
                    "market {}: no time-zone rule for year {}",
                    self.id,
                    date.year()
                ))
            })
    }

    /// Local closing time in force on `date`.
    pub fn local_close(&self, date: NaiveDate) -> Result<NaiveTime> {
        self.close_schedule
            .iter()
            .rev()
            .find(|c| c.effective <= date)
            .map(|c| c.close)
            .ok_or_else(|| {
                Error::CalendarGap(format!(
                    "market {}: date {} precedes the first close-schedule entry",
                    self.id, date
                ))
            })
    }

    /// UTC instant of the market close on `date`, applying the schedule
    /// entry and the time-zone regime in force on that date.
    pub fn utc_close_instant(&self, date: NaiveDate) -> Result<NaiveDateTime> {
        let close = self.local_close(date)?;
        let offset = self.tz_rule(date)?.offset_minutes(date);
        Ok(date.and_time(close) - Duration::minutes(offset as i64))
    }
}

/// Temporal distance for an ordered market pair: hours from the out-vertex
/// close backwards to the most recent preceding (or simultaneous)
/// in-vertex close.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalDistance {
    pub out_id: String,
    pub in_id: String,
    pub hours: f64,
}

pub fn temporal_distance(
    out: &MarketSpec,
    in_: &MarketSpec,
    date: NaiveDate,
) -> Result<TemporalDistance> {
    let t_out = out.utc_close_instant(date)?;
    for back in 0..=2i64 {
        let d = date - Duration::days(back);
        let t_in = in_.utc_close_instant(d)?;
        if t_in <= t_out {
            let hours = (t_out - t_in).num_seconds() as f64 / 3600.0;
            return Ok(TemporalDistance {
                out_id: out.id.clone(),
                in_id: in_.id.clone(),
                hours,
            });
        }
    }
    Err(Error::CalendarGap(format!(
        "no preceding close of {} found near {} for {}",
        in_.id, date, out.id
    )))
}

/// Daily closing prices for one market. Dates strictly increasing, prices
/// strictly positive; both enforced on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub market_id: String,
    observations: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    pub fn new(market_id: impl Into<String>, observations: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let market_id = market_id.into();
        for w in observations.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::Validation(format!(
                    "price series {market_id}: dates not strictly increasing at {}",
                    w[1].0
                )));
            }
        }
        if let Some((d, p)) = observations.iter().find(|(_, p)| !(*p > 0.0)) {
            return Err(Error::Validation(format!(
                "price series {market_id}: non-positive price {p} on {d}"
            )));
        }
        Ok(PriceSeries {
            market_id,
            observations,
        })
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}
