//! Synthetic data generation.
