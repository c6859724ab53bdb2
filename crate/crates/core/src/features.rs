//! Covariate frame construction.
