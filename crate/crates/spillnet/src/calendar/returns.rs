use super::PriceSeries;
use crate::error::{Error, Result};
use chrono::{Datelike, Duration, NaiveDate, Weekday};

/// Dated log returns; each return is keyed by the later of the two trading
/// dates it spans.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub market_id: String,
    pub points: Vec<(NaiveDate, f64)>,
}

impl ReturnSeries {
    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.points.iter().map(|(d, _)| *d)
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|(_, v)| *v).collect()
    }
}

/// True when every date strictly between `a` and `b` is a Saturday or
/// Sunday, so a return spanning `a -> b` crosses no weekday.
pub fn weekend_only_gap(a: NaiveDate, b: NaiveDate) -> bool {
    debug_assert!(a < b);
    let mut d = a + Duration::days(1);
    while d < b {
        match d.weekday() {
            Weekday::Sat | Weekday::Sun => {}
            _ => return false,
        }
        d += Duration::days(1);
    }
    true
}

/// Continuous returns `ln(P_t / P_{t-1})` over consecutive retained trading
/// days. Returns spanning only weekend days are kept; a return whose gap
/// contains a weekday non-trading day is dropped.
pub fn compute_log_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    let obs = prices.observations();
    if obs.len() < 2 {
        return Err(Error::Validation(format!(
            "price series {}: need at least 2 observations for returns",
            prices.market_id
        )));
    }
    let mut points = Vec::with_capacity(obs.len() - 1);
    for w in obs.windows(2) {
        let (d0, p0) = w[0];
        let (d1, p1) = w[1];
        if weekend_only_gap(d0, d1) {
            points.push((d1, (p1 / p0).ln()));
        }
    }
    Ok(ReturnSeries {
        market_id: prices.market_id.clone(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn constant_prices_give_zero_returns() {
        // Mon, Tue, Wed
        let p = PriceSeries::new(
            "X",
            vec![
                (d(2006, 1, 2), 100.0),
                (d(2006, 1, 3), 100.0),
                (d(2006, 1, 4), 100.0),
            ],
        )
        .unwrap();
        let r = compute_log_returns(&p).unwrap();
        assert_eq!(r.values(), vec![0.0, 0.0]);
    }

    #[test]
    fn weekend_return_kept() {
        // Fri 2006-01-06 -> Mon 2006-01-09
        let p = PriceSeries::new("X", vec![(d(2006, 1, 6), 100.0), (d(2006, 1, 9), 110.0)]).unwrap();
        let r = compute_log_returns(&p).unwrap();
        assert_eq!(r.points.len(), 1);
        assert!((r.points[0].1 - 1.1f64.ln()).abs() < 1e-15);
        assert_eq!(r.points[0].0, d(2006, 1, 9));
    }

    #[test]
    fn weekday_holiday_return_dropped() {
        // Fri 2006-01-06 -> Tue 2006-01-10 with Monday a weekday holiday
        let p = PriceSeries::new(
            "X",
            vec![
                (d(2006, 1, 5), 90.0),
                (d(2006, 1, 6), 100.0),
                (d(2006, 1, 10), 120.0),
            ],
        )
        .unwrap();
        let r = compute_log_returns(&p).unwrap();
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.points[0].0, d(2006, 1, 6));
    }

    #[test]
    fn non_positive_price_rejected() {
        assert!(PriceSeries::new("X", vec![(d(2006, 1, 2), 100.0), (d(2006, 1, 3), 0.0)]).is_err());
    }
}
