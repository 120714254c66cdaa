//! Pooled coefficient summary across rolling windows: average coefficient,
//! sign counts, and significant-sign counts per covariate, in the fixed
//! two-panel row order used by the report.

use super::sar::SarProbitFit;
use crate::windows::Month;
use serde::{Deserialize, Serialize};

pub const PANEL_A_TERMS: [&str; 3] = ["spatial_rho", "temporal_distance", "temporal_distance_us"];
pub const PANEL_B_TERMS: [&str; 8] = [
    "equity_return",
    "equity_volatility",
    "fx_return",
    "fx_volatility",
    "log_market_cap",
    "mc_to_gdp",
    "developed_to_frontier",
    "developed_to_emerging",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub panel: char,
    pub term: String,
    pub average: f64,
    pub n_positive: usize,
    pub n_positive_significant: usize,
    pub n_negative: usize,
    pub n_negative_significant: usize,
}

/// Tabulate per-window fits into the pooled summary (one row per term,
/// spatial terms first).
pub fn summarize_coefficients(fits: &[(Month, SarProbitFit)]) -> Vec<CoefficientRow> {
    assert!(!fits.is_empty(), "need at least one window fit");
    let mut rows = Vec::new();
    let collect = |term: &str| -> Vec<(f64, bool)> {
        fits.iter()
            .map(|(_, f)| {
                if term == "spatial_rho" {
                    (f.rho_mean, f.rho_significant)
                } else {
                    let j = f
                        .coef_names
                        .iter()
                        .position(|n| n == term)
                        .unwrap_or_else(|| panic!("term {term} missing from fit"));
                    (f.beta_mean[j], f.beta_significant[j])
                }
            })
            .collect()
    };
    for (panel, terms) in [('A', &PANEL_A_TERMS[..]), ('B', &PANEL_B_TERMS[..])] {
        for term in terms {
            let vals = collect(term);
            let n_positive = vals.iter().filter(|(v, _)| *v > 0.0).count();
            let n_positive_significant =
                vals.iter().filter(|(v, s)| *v > 0.0 && *s).count();
            let n_negative = vals.iter().filter(|(v, _)| *v <= 0.0).count();
            let n_negative_significant =
                vals.iter().filter(|(v, s)| *v <= 0.0 && *s).count();
            rows.push(CoefficientRow {
                panel,
                term: term.to_string(),
                average: crate::stats::mean(&vals.iter().map(|(v, _)| *v).collect::<Vec<_>>()),
                n_positive,
                n_positive_significant,
                n_negative,
                n_negative_significant,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_fit(rho: f64, values: &[(&str, f64, bool)]) -> SarProbitFit {
        SarProbitFit {
            coef_names: values.iter().map(|(n, _, _)| n.to_string()).collect(),
            beta_mean: values.iter().map(|(_, v, _)| *v).collect(),
            beta_sd: vec![0.1; values.len()],
            beta_ci: values
                .iter()
                .map(|(_, v, s)| if *s { (v - 0.01, v + 0.01) } else { (v - 1.0, v + 1.0) })
                .collect(),
            beta_significant: values.iter().map(|(_, _, s)| *s).collect(),
            rho_mean: rho,
            rho_sd: 0.05,
            rho_ci: (rho - 0.01, rho + 0.01),
            rho_significant: rho.abs() > 0.02,
            draws: 10,
            burn_in: 5,
            acceptance_rate: 0.4,
            beta_draws: None,
            rho_draws: None,
        }
    }

    fn full_terms(sign: f64, sig: bool) -> Vec<(&'static str, f64, bool)> {
        PANEL_B_TERMS
            .iter()
            .chain(["temporal_distance", "temporal_distance_us"].iter())
            .map(|t| (*t, sign, sig))
            .collect()
    }

    #[test]
    fn single_window_counts() {
        let fit = fake_fit(0.5, &full_terms(0.2, true));
        let rows = summarize_coefficients(&[(Month::new(2006, 12), fit)]);
        assert_eq!(rows.len(), 11);
        assert_eq!(rows[0].term, "spatial_rho");
        assert_eq!(rows[0].panel, 'A');
        for row in &rows {
            assert_eq!(row.n_positive, 1);
            assert_eq!(row.n_negative, 0);
            assert_eq!(row.n_positive_significant, 1);
        }
    }

    #[test]
    fn alternating_signs_average_to_zero() {
        let f1 = fake_fit(0.5, &full_terms(1.0, false));
        let f2 = fake_fit(0.5, &full_terms(-1.0, false));
        let rows = summarize_coefficients(&[
            (Month::new(2006, 12), f1),
            (Month::new(2007, 1), f2),
        ]);
        let eq = rows.iter().find(|r| r.term == "equity_return").unwrap();
        assert_eq!(eq.average, 0.0);
        assert_eq!((eq.n_positive, eq.n_negative), (1, 1));
        assert_eq!(eq.n_positive_significant + eq.n_negative_significant, 0);
    }

    #[test]
    fn row_order_matches_documented_layout() {
        let fit = fake_fit(0.5, &full_terms(0.2, true));
        let rows = summarize_coefficients(&[(Month::new(2006, 12), fit)]);
        let order: Vec<&str> = rows.iter().map(|r| r.term.as_str()).collect();
        let expect: Vec<&str> = PANEL_A_TERMS
            .iter()
            .chain(PANEL_B_TERMS.iter())
            .copied()
            .collect();
        assert_eq!(order, expect);
        assert!(rows[..3].iter().all(|r| r.panel == 'A'));
        assert!(rows[3..].iter().all(|r| r.panel == 'B'));
    }
}
