//! Melnikov splitting machinery (work in progress).
