//! Scheduling and coefficient selection for compute-and-forward over a
//! real-valued Gaussian multiple-access channel.
//!
//! * [`rate`]: computation rate of a channel/coefficient pair.
//! * [`coeff_search`]: integer coefficient vectors that maximise the rate.
//! * [`scheduler`]: choosing `k` of `L` users, greedy and exhaustive.
//! * [`bounds`]: closed-form sum-rate bounds and their scaling.
//! * [`experiments`]: seeded Monte-Carlo runs that produce CSV tables.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;

pub mod bounds;
pub mod coeff_search;
pub mod experiments;
pub mod rate;
pub mod scheduler;

pub use error::{Error, Result};
