//! Forecasting engine for hourly emergency-event counts.
//!
//! The pipeline ingests regional event, weather, epidemic and flu data,
//! assembles an hourly covariate frame, fits a negative binomial additive
//! model with penalized spline smooths, and evaluates rolling-origin
//! forecasts against naive, ARIMA and count-GLM benchmarks.

pub mod benchmarks;
pub mod cli;
pub mod data_model;
pub mod features;
pub mod forecaster;
pub mod linalg;
pub mod ngam;
pub mod optim;
pub mod plot;
pub mod smoothers;
pub mod synth;
pub mod timeline;
