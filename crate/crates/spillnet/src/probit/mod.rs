//! Edge-formation models: the spatial weight matrix over all ordered
//! market pairs, the per-window design matrix, a Bayesian Gibbs sampler
//! for the spatial-autoregressive probit, the plain probit MLE used as an
//! oracle, and the pooled coefficient summary.

mod design;
mod mle;
mod sar;
mod summary;
mod weights;

pub use design::{build_design, window_covariates, CovariatePanel, EdgePanel, WindowCovariates};
pub use mle::{fit_standard_probit, ProbitFit};
pub use sar::{fit_sar_probit, SamplerConfig, SarProbitFit};
pub use summary::{summarize_coefficients, CoefficientRow, PANEL_A_TERMS, PANEL_B_TERMS};
pub use weights::{build_weights, SpatialWeights};

/// Design-matrix column names in their fixed order.
pub const DESIGN_COLUMNS: [&str; 11] = [
    "intercept",
    "equity_return",
    "equity_volatility",
    "fx_return",
    "fx_volatility",
    "log_market_cap",
    "mc_to_gdp",
    "developed_to_frontier",
    "developed_to_emerging",
    "temporal_distance",
    "temporal_distance_us",
];
