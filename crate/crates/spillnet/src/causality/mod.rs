//! Causality-in-mean tests on aligned standardized residuals: kernel-
//! weighted sums of squared cross-lagged correlations, standardized to a
//! one-sided normal test, with Bonferroni control across all ordered
//! market pairs of a window.

mod build;

pub use build::{build_window_network, NetworkBuildInputs, PairOutcome, SkippedPair};
pub use kernel_test::{
    bartlett_weight, bonferroni_level, cross_corr, q_statistic, CausalityConfig, PairTestResult,
};
