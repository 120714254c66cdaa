//! Run configuration: one TOML file drives every stage; CLI flags override
//! individual keys. The resolved configuration is hashed and the hash is
//! stamped into every artifact.

use crate::causality::CausalityConfig;
use crate::error::{Error, Result};
use crate::garch::{FitConfig, GarchFamily};
use crate::probit::SamplerConfig;
use crate::synth::WorldConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Paths {
    pub registry: PathBuf,
    pub prices: PathBuf,
    pub covariates: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Rolling {
    pub window_months: u32,
    pub drift_months: u32,
}

impl Default for Rolling {
    fn default() -> Self {
        Rolling {
            window_months: 12,
            drift_months: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CausalitySection {
    pub bandwidth: usize,
    pub base_level: f64,
    pub center_include_k0: bool,
}

impl Default for CausalitySection {
    fn default() -> Self {
        CausalitySection {
            bandwidth: 5,
            base_level: 0.01,
            center_include_k0: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitScope {
    /// Re-run model selection inside every rolling window.
    PerWindow,
    /// Select once per market on the full sample and window the residuals.
    Global,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterSection {
    pub families: Vec<String>,
    pub scope: FitScope,
    pub starts: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub frac_trunc: usize,
    pub grid_include_zero: bool,
    pub pr_lags: usize,
    pub pr_reps: usize,
    pub pr_level: f64,
}

impl Default for FilterSection {
    fn default() -> Self {
        FilterSection {
            families: vec!["garch".into(), "gjr".into(), "egarch".into(), "aparch".into()],
            scope: FitScope::PerWindow,
            starts: 5,
            max_iter: 200,
            rel_tol: 1e-8,
            frac_trunc: 1000,
            grid_include_zero: false,
            pr_lags: 20,
            pr_reps: 500,
            pr_level: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkSection {
    /// Use incoming distances for harmonic centrality instead of outgoing.
    pub harmonic_incoming: bool,
    /// Longest survival-ratio horizon (steps).
    pub survival_max_steps: usize,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection {
            harmonic_incoming: false,
            survival_max_steps: 12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbitSection {
    pub draws: usize,
    pub burn_in: usize,
    pub rho_grid_points: usize,
    pub beta_prior_var: f64,
    pub persist_draws: bool,
    pub us_reference: String,
    /// Tolerate structurally collinear designs (unavoidable for worlds
    /// with fewer than eight markets).
    pub allow_collinear: bool,
}

impl Default for ProbitSection {
    fn default() -> Self {
        ProbitSection {
            draws: 2000,
            burn_in: 500,
            rho_grid_points: 200,
            beta_prior_var: 100.0,
            persist_draws: false,
            us_reference: "US".into(),
            allow_collinear: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSection {
    pub seed: u64,
    pub stages: Vec<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 42,
            stages: vec![
                "filter".into(),
                "network".into(),
                "metrics".into(),
                "probit".into(),
                "report".into(),
            ],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub paths: Paths,
    #[serde(default)]
    pub rolling: Rolling,
    #[serde(default)]
    pub causality: CausalitySection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub probit: ProbitSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub world: Option<WorldConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        // paths in the file are relative to the config file's directory
        if let Some(base) = path.parent() {
            for p in [
                &mut cfg.paths.registry,
                &mut cfg.paths.prices,
                &mut cfg.paths.covariates,
                &mut cfg.paths.output,
            ] {
                if p.is_relative() {
                    *p = base.join(&p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rolling.window_months < 2 {
            return Err(Error::Config(
                "rolling.window_months must be at least 2".into(),
            ));
        }
        if self.rolling.drift_months < 1 {
            return Err(Error::Config("rolling.drift_months must be at least 1".into()));
        }
        if !(self.causality.base_level > 0.0 && self.causality.base_level < 1.0) {
            return Err(Error::Config("causality.base_level must be in (0,1)".into()));
        }
        if self.causality.bandwidth < 1 {
            return Err(Error::Config("causality.bandwidth must be at least 1".into()));
        }
        self.families()?;
        Ok(())
    }

    pub fn families(&self) -> Result<Vec<GarchFamily>> {
        self.filter
            .families
            .iter()
            .map(|s| GarchFamily::parse(s))
            .collect()
    }

    pub fn causality_config(&self) -> CausalityConfig {
        CausalityConfig {
            bandwidth: self.causality.bandwidth,
            base_level: self.causality.base_level,
            window_months: self.rolling.window_months,
            drift_months: self.rolling.drift_months,
            center_include_k0: self.causality.center_include_k0,
        }
    }

    pub fn select_config(&self) -> Result<crate::garch::SelectConfig> {
        Ok(crate::garch::SelectConfig {
            fit: FitConfig {
                starts: self.filter.starts,
                max_iter: self.filter.max_iter,
                rel_tol: self.filter.rel_tol,
                frac_trunc: self.filter.frac_trunc,
            },
            families: self.families()?,
            grid_include_zero: self.filter.grid_include_zero,
            pr_lags: self.filter.pr_lags,
            pr_reps: self.filter.pr_reps,
            pr_level: self.filter.pr_level,
            pr_seed: self.run.seed,
        })
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            draws: self.probit.draws,
            burn_in: self.probit.burn_in,
            rho_grid_points: self.probit.rho_grid_points,
            beta_prior_var: self.probit.beta_prior_var,
            fix_rho: None,
            init_rho: 0.0,
            keep_draws: self.probit.persist_draws,
            allow_collinear: self.probit.allow_collinear,
        }
    }

    /// Hash of the resolved configuration (canonical TOML serialization).
    /// File locations are excluded so the hash identifies the numerical
    /// settings regardless of where the data lives.
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.paths = Paths {
            registry: PathBuf::new(),
            prices: PathBuf::new(),
            covariates: PathBuf::new(),
            output: PathBuf::new(),
        };
        let text = toml::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.paths.output.join(name)
    }
}
