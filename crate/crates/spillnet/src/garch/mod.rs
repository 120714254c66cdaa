//! ARFIMA-GARCH filtering with Johnson-SU innovations: joint one-step
//! maximum likelihood, the model-selection ladder, and the residual
//! diagnostics that gate it.

mod fit;
mod fracdiff;
mod johnson_su;
mod likelihood;
mod portmanteau;
mod recursion;
mod select;

pub use fit::{fit_model, FitConfig, ModelOrders};
pub use fracdiff::frac_diff;
pub use johnson_su::{johnson_su_logpdf, johnson_su_logpdf_grad, JohnsonSuParams, JsuStd};
pub use likelihood::{log_likelihood, ModelParams};
pub use portmanteau::{logdet_portmanteau_test, PortmanteauKind};
pub use recursion::garch_variance_path;
pub use select::{select_model, SelectConfig, SelectionOutcome, SelectionTrace};

use serde::{Deserialize, Serialize};

/// Conditional-variance family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GarchFamily {
    Garch,
    Gjr,
    Egarch,
    Aparch,
}

impl GarchFamily {
    pub const ALL: [GarchFamily; 4] = [
        GarchFamily::Garch,
        GarchFamily::Gjr,
        GarchFamily::Egarch,
        GarchFamily::Aparch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GarchFamily::Garch => "garch",
            GarchFamily::Gjr => "gjr",
            GarchFamily::Egarch => "egarch",
            GarchFamily::Aparch => "aparch",
        }
    }

    pub fn parse(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "garch" => Ok(GarchFamily::Garch),
            "gjr" | "gjr-garch" | "gjrgarch" => Ok(GarchFamily::Gjr),
            "egarch" => Ok(GarchFamily::Egarch),
            "aparch" => Ok(GarchFamily::Aparch),
            other => Err(crate::Error::Config(format!(
                "unknown GARCH family '{other}'"
            ))),
        }
    }
}

/// Mean-equation specification: ARFIMA(p, d, q) around a constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArfimaSpec {
    pub p: usize,
    pub q: usize,
    pub d: f64,
    pub mu: f64,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
}

/// Conditional-variance specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchSpec {
    pub family: GarchFamily,
    pub r: usize,
    pub s: usize,
    pub omega: f64,
    pub alpha: Vec<f64>,
    /// Asymmetry parameters (GJR leverage, EGARCH sign effect, APARCH
    /// tilt); empty for the symmetric family.
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    /// APARCH power; `None` elsewhere.
    pub delta: Option<f64>,
}

impl GarchSpec {
    /// Published stationarity/positivity conditions per family.
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |msg: String| Err(crate::Error::ParamDomain(msg));
        match self.family {
            GarchFamily::Garch | GarchFamily::Gjr => {
                if !(self.omega > 0.0) {
                    return bad(format!("omega must be > 0, got {}", self.omega));
                }
                if self.alpha.iter().chain(&self.beta).any(|&v| v < 0.0) {
                    return bad("alpha and beta must be non-negative".into());
                }
                let mut persistence: f64 =
                    self.alpha.iter().sum::<f64>() + self.beta.iter().sum::<f64>();
                if self.family == GarchFamily::Gjr {
                    if self.gamma.iter().zip(&self.alpha).any(|(&g, &a)| a + g < 0.0) {
                        return bad("GJR requires alpha_k + gamma_k >= 0".into());
                    }
                    persistence += 0.5 * self.gamma.iter().sum::<f64>();
                }
                if persistence >= 1.0 {
                    return bad(format!("persistence {persistence} >= 1"));
                }
            }
            GarchFamily::Egarch => {
                let b: f64 = self.beta.iter().sum();
                if b.abs() >= 1.0 {
                    return bad(format!("EGARCH requires |sum(beta)| < 1, got {b}"));
                }
            }
            GarchFamily::Aparch => {
                if !(self.omega > 0.0) {
                    return bad(format!("omega must be > 0, got {}", self.omega));
                }
                match self.delta {
                    Some(d) if d > 0.0 => {}
                    other => return bad(format!("APARCH needs delta > 0, got {other:?}")),
                }
                if self.alpha.iter().chain(&self.beta).any(|&v| v < 0.0) {
                    return bad("alpha and beta must be non-negative".into());
                }
                if self.gamma.iter().any(|g| g.abs() >= 1.0) {
                    return bad("APARCH requires |gamma_k| < 1".into());
                }
                let persistence: f64 =
                    self.alpha.iter().sum::<f64>() + self.beta.iter().sum::<f64>();
                if persistence >= 1.0 {
                    return bad(format!("persistence {persistence} >= 1"));
                }
            }
        }
        Ok(())
    }
}

/// A fitted filter for one return series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterFit {
    pub arfima: ArfimaSpec,
    pub garch: GarchSpec,
    pub dist: JohnsonSuParams,
    pub loglik: f64,
    /// k ln(T) - 2 loglik with k the number of estimated parameters.
    pub bic: f64,
    pub n_params: usize,
    pub std_residuals: Vec<f64>,
    /// Portmanteau p-values on levels and squares of the standardized
    /// residuals; filled during model selection.
    pub diag_pvalues: Option<(f64, f64)>,
}
