//! Stochastic trust-region methods for finite-sum problems, with a
//! quadratic-penalty variant for equality constraints, baseline optimizers,
//! and diagnostics that check solver traces against the method's
//! convergence bounds.

// `!(x > 0.0)` style comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod diagnostics;
pub mod linops;
pub mod penalty;
pub mod problems;
pub mod rng;
pub mod trust_region;
