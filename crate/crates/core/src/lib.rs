//! Exact reasoning over itemset frequency constraints.
//!
//! Given an antimonotonic family of itemsets with rational frequencies, this
//! crate decides whether the frequencies are consistent (some distribution on
//! `{0,1}^K` reproduces all of them), computes the tight interval of
//! consistent frequencies for a query itemset together with witness
//! distributions, and fits the maximum-entropy distribution to read off a
//! single-point estimate. It also ships generators that encode CNF
//! satisfiability questions as such instances, plus independent brute-force
//! and floating-point oracles for cross-checking the exact engine.
//!
//! The consistency and bounds paths run entirely in arbitrary-precision
//! rational arithmetic; the maximum-entropy path is floating point by nature.

pub mod error;
pub mod lp;
pub mod maxent;
pub mod model;
pub mod oracle;
pub mod projection;
pub mod reduction;

pub use error::Error;
pub use model::{
    downward_closure, BinaryVector, DistributionMode, FrequencyAssignment, Itemset, ItemsetFamily,
    JointDistribution, MassValue,
};
