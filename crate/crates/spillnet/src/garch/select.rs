//! Model-selection ladder. Stage 1 fits the order/family grid with d = 0;
//! stage 2 keeps fits whose standardized residuals and squared
//! standardized residuals both pass the portmanteau diagnostic; stage 3
//! prefers the smallest p+q+r+s, ties broken by BIC. An empty stage 2
//! re-runs the ladder with d estimated; if that also empties, the global
//! BIC minimizer over every attempted fit is returned.

use super::fit::{fit_model, FitConfig, ModelOrders};
use super::portmanteau::{logdet_portmanteau_test, PortmanteauKind};
use super::{FilterFit, GarchFamily};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectConfig {
    pub fit: FitConfig,
    pub families: Vec<GarchFamily>,
    /// Extend the order grid from {1,2} to {0,1,2}.
    pub grid_include_zero: bool,
    pub pr_lags: usize,
    pub pr_reps: usize,
    pub pr_level: f64,
    pub pr_seed: u64,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig {
            fit: FitConfig::default(),
            families: GarchFamily::ALL.to_vec(),
            grid_include_zero: false,
            pr_lags: 20,
            pr_reps: 500,
            pr_level: 0.05,
            pr_seed: 0,
        }
    }
}

/// What happened during the ladder; kept for audit and tests.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub stage1_candidates: usize,
    pub stage1_failures: usize,
    pub stage1_survivors: usize,
    pub entered_d_free: bool,
    pub d_free_survivors: usize,
    pub used_global_bic_fallback: bool,
}

#[derive(Debug, Clone)]
pub struct SelectionOutcome {
    pub fit: FilterFit,
    pub trace: SelectionTrace,
}

struct Candidate {
    grid_index: usize,
    orders: ModelOrders,
    fit: FilterFit,
    passed: bool,
}

fn run_grid(
    returns: &[f64],
    cfg: &SelectConfig,
    d_free: bool,
) -> (Vec<Candidate>, usize, usize) {
    let order_values: &[usize] = if cfg.grid_include_zero {
        &[0, 1, 2]
    } else {
        &[1, 2]
    };
    let mut grid = Vec::new();
    for &family in &cfg.families {
        for &p in order_values {
            for &q in order_values {
                for &r in order_values {
                    for &s in order_values {
                        grid.push(ModelOrders {
                            p,
                            q,
                            d_free,
                            family,
                            r,
                            s,
                        });
                    }
                }
            }
        }
    }
    let total = grid.len();
    let fits: Vec<(usize, ModelOrders, Result<FilterFit>)> = grid
        .into_par_iter()
        .enumerate()
        .map(|(i, orders)| (i, orders, fit_model(returns, orders, &cfg.fit)))
        .collect();
    let mut candidates = Vec::new();
    let mut failures = 0;
    for (grid_index, orders, fit) in fits {
        match fit {
            Ok(mut fit) => {
                let diag = diagnostics(&fit.std_residuals, cfg);
                fit.diag_pvalues = diag;
                let passed = diag
                    .map(|(pl, ps)| pl > cfg.pr_level && ps > cfg.pr_level)
                    .unwrap_or(false);
                candidates.push(Candidate {
                    grid_index,
                    orders,
                    fit,
                    passed,
                });
            }
            Err(_) => failures += 1,
        }
    }
    (candidates, total, failures)
}

fn diagnostics(residuals: &[f64], cfg: &SelectConfig) -> Option<(f64, f64)> {
    let levels = logdet_portmanteau_test(
        residuals,
        cfg.pr_lags,
        cfg.pr_reps,
        PortmanteauKind::Levels,
        cfg.pr_seed,
    )
    .ok()?;
    let squares = logdet_portmanteau_test(
        residuals,
        cfg.pr_lags,
        cfg.pr_reps,
        PortmanteauKind::Squares,
        cfg.pr_seed,
    )
    .ok()?;
    Some((levels, squares))
}

fn order_sum(o: &ModelOrders) -> usize {
    o.p + o.q + o.r + o.s
}

fn pick_survivor(candidates: &[Candidate]) -> Option<usize> {
    candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.passed)
        .min_by(|(_, a), (_, b)| {
            order_sum(&a.orders)
                .cmp(&order_sum(&b.orders))
                .then(a.fit.bic.partial_cmp(&b.fit.bic).unwrap())
                .then(a.grid_index.cmp(&b.grid_index))
        })
        .map(|(i, _)| i)
}

/// Select the preferred specification for one return series.
pub fn select_model(
    returns: &[f64],
    cfg: &SelectConfig,
    series_label: &str,
) -> Result<SelectionOutcome> {
    if returns.len() < 250 {
        return Err(Error::InsufficientSample(format!(
            "series {series_label}: selection needs at least 250 observations, got {}",
            returns.len()
        )));
    }
    let (stage1, total1, failures1) = run_grid(returns, cfg, false);
    let mut trace = SelectionTrace {
        stage1_candidates: total1,
        stage1_failures: failures1,
        stage1_survivors: stage1.iter().filter(|c| c.passed).count(),
        ..SelectionTrace::default()
    };
    if let Some(i) = pick_survivor(&stage1) {
        let fit = stage1[i].fit.clone();
        debug_assert!(fit
            .diag_pvalues
            .map(|(pl, ps)| pl > cfg.pr_level && ps > cfg.pr_level)
            .unwrap_or(false));
        return Ok(SelectionOutcome { fit, trace });
    }
    trace.entered_d_free = true;
    let (stage_d, _, _) = run_grid(returns, cfg, true);
    trace.d_free_survivors = stage_d.iter().filter(|c| c.passed).count();
    if let Some(i) = pick_survivor(&stage_d) {
        let fit = stage_d[i].fit.clone();
        return Ok(SelectionOutcome { fit, trace });
    }
    trace.used_global_bic_fallback = true;
    let all: Vec<&Candidate> = stage1.iter().chain(stage_d.iter()).collect();
    let best = all
        .iter()
        .min_by(|a, b| {
            a.fit
                .bic
                .partial_cmp(&b.fit.bic)
                .unwrap()
                .then(a.grid_index.cmp(&b.grid_index))
        })
        .ok_or_else(|| Error::SelectionFailed(series_label.to_string()))?;
    Ok(SelectionOutcome {
        fit: best.fit.clone(),
        trace,
    })
}
