//! Construction and analysis of time-varying return-spillover networks.
//!
//! The pipeline goes: market calendars and return alignment across time
//! zones ([`calendar`]), ARFIMA-GARCH filtering with Johnson-SU innovations
//! ([`garch`]), kernel-weighted cross-correlation causality tests per
//! ordered market pair ([`causality`]), directed-graph spillover metrics
//! ([`network`]), and spatial-autoregressive probit models for edge
//! formation ([`probit`]). [`synth`] generates worlds with planted causal
//! structure so every stage can be validated against known ground truth,
//! and [`pipeline`] orchestrates the stages over rolling windows behind
//! the `spillnet` CLI.

pub mod calendar;
pub mod causality;
pub mod error;
pub mod garch;
pub mod network;
pub mod pipeline;
pub mod probit;
pub mod seeding;
pub mod stats;
pub mod synth;
pub mod windows;

pub use error::{Error, Result};
