//! Reference computations that share no code with `etdrk-core`.
//!
//! Everything here is deliberately slow and straightforward: dense matrices,
//! double-double arithmetic, brute-force sampling. The test suites compare
//! the fast spectral implementation against these.

pub mod dd;
pub mod dense;
pub mod sampling;
