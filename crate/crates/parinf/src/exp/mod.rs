//! Experiment runner (work in progress).
