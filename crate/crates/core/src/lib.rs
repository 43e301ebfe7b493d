//! Budget-constrained static multi-period newsvendor.
//!
//! All orders for a horizon of `T` periods are placed up front, subject to
//! a purchasing budget. Demand is independent across periods and either
//! normal or Poisson. The crate provides:
//!
//! * closed-form expected costs and their derivatives ([`cost`]),
//! * a Monte-Carlo oracle for the same costs ([`model::mc_cost`]),
//! * a KKT-based heuristic for a known distribution ([`fd`]),
//! * maximum-likelihood confidence sets over the demand parameters
//!   ([`ambiguity`]),
//! * worst-case evaluation, a cutting-surface DRO algorithm and exact
//!   reference minimax solvers ([`dro`]).

pub mod ambiguity;
pub mod cost;
pub mod dro;
pub mod error;
pub mod fd;
pub mod model;
pub mod special;

pub use error::{Error, Result};
pub use model::{DemandModel, Family, Instance, McEstimate, OrderPlan, SampleSet};
