//! Renormalization harness (work in progress).
