//! Negative binomial additive model fitting.
