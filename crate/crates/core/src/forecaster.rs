//! Rolling-origin forecast evaluation.
