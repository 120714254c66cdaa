//! Rolling calendar-month windows anchored at month end. A window is
//! identified by its end month and covers `window_months` whole calendar
//! months; consecutive windows differ by `drift_months`.

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A calendar month, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Month {
    pub year: i32,
    /// 1-12
    pub month: u32,
}

impl Month {
    pub fn new(year: i32, month: u32) -> Self {
        assert!((1..=12).contains(&month));
        Month { year, month }
    }

    pub fn of(date: NaiveDate) -> Self {
        Month {
            year: date.year(),
            month: date.month(),
        }
    }

    fn index(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn plus(self, months: i64) -> Self {
        let idx = self.index() + months;
        Month {
            year: idx.div_euclid(12) as i32,
            month: (idx.rem_euclid(12) + 1) as u32,
        }
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).unwrap()
    }

    pub fn last_day(self) -> NaiveDate {
        self.plus(1).first_day().pred_opt().unwrap()
    }

    pub fn parse(s: &str) -> Option<Self> {
        let (y, m) = s.split_once('-')?;
        let year: i32 = y.parse().ok()?;
        let month: u32 = m.parse().ok()?;
        if (1..=12).contains(&month) {
            Some(Month { year, month })
        } else {
            None
        }
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// One rolling window: `window_months` whole months ending with `end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub end: Month,
    pub window_months: u32,
}

impl Window {
    pub fn start_date(&self) -> NaiveDate {
        self.end.plus(1 - self.window_months as i64).first_day()
    }

    pub fn end_date(&self) -> NaiveDate {
        self.end.last_day()
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        d >= self.start_date() && d <= self.end_date()
    }
}

/// Enumerate the rolling windows that fit inside `[first, last]`. The first
/// window ends `window_months - 1` months after the month of `first`; ends
/// then step by `drift_months` while the end month stays within `last`.
pub fn enumerate_windows(
    first: NaiveDate,
    last: NaiveDate,
    window_months: u32,
    drift_months: u32,
) -> Vec<Window> {
    assert!(window_months >= 1 && drift_months >= 1);
    let mut out = Vec::new();
    let mut end = Month::of(first).plus(window_months as i64 - 1);
    let last_month = Month::of(last);
    while end <= last_month {
        out.push(Window { end, window_months });
        end = end.plus(drift_months as i64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_span_gives_97_windows() {
        let first = NaiveDate::from_ymd_opt(2006, 1, 2).unwrap();
        let last = NaiveDate::from_ymd_opt(2014, 12, 31).unwrap();
        let w = enumerate_windows(first, last, 12, 1);
        assert_eq!(w.len(), 97);
        assert_eq!(w[0].end, Month::new(2006, 12));
        assert_eq!(w[96].end, Month::new(2014, 12));
    }

    #[test]
    fn window_date_span() {
        let w = Window {
            end: Month::new(2006, 12),
            window_months: 12,
        };
        assert_eq!(w.start_date(), NaiveDate::from_ymd_opt(2006, 1, 1).unwrap());
        assert_eq!(w.end_date(), NaiveDate::from_ymd_opt(2006, 12, 31).unwrap());
    }

    #[test]
    fn month_arithmetic_wraps() {
        assert_eq!(Month::new(2006, 12).plus(1), Month::new(2007, 1));
        assert_eq!(Month::new(2006, 1).plus(-1), Month::new(2005, 12));
        assert_eq!(Month::new(2006, 2).last_day().day(), 28);
        assert_eq!(Month::parse("2008-09"), Some(Month::new(2008, 9)));
    }
}
