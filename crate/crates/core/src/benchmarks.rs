//! Daily benchmark models.
