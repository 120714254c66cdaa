//! End-to-end orchestration of the rolling-window pipeline
//! (ingest -> filter -> test -> network -> metrics -> probit -> report)
//! behind a single configuration file.

mod config;
pub mod io;
mod report;
mod stages;

pub use config::{
    CausalitySection, FilterSection, FitScope, NetworkSection, Paths, ProbitSection, Rolling,
    RunConfig, RunSection,
};
pub use stages::{run, validate, Manifest, Stage, StageTiming};
