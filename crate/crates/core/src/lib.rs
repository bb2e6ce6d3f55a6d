//! Maximal correlation, mutual information and privacy-utility measures.
//!
//! Finite-alphabet joint distributions live in [`dist`]; [`measures`] and
//! [`maxcorr`] compute dependence measures on them and [`bounds`] checks the
//! inequalities that relate those measures. [`stable`] covers additive
//! α-stable noise filters, [`privacy`] the rate-privacy functions, and
//! [`estimation`] privacy-constrained MMSE.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod dist;
pub mod error;
pub mod estimation;
pub mod exec;
pub mod fixtures;
pub mod io;
mod linalg;
pub mod maxcorr;
pub mod measures;
pub mod privacy;
pub mod seed;
pub mod stable;
pub mod units;

pub use dist::{Channel, JointDistribution};
pub use error::{Error, Result};
pub use exec::Execution;
