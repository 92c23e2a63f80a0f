//! Monte Carlo engine (placeholder).
