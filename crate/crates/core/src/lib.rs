//! LP-rounding solver for the hard uniform capacitated k-median problem.
//!
//! Given locations with a metric cost matrix, splittable demands, a uniform
//! capacity `M` and a budget of `k` centers, the solver opens at most `k`
//! centers at a cost of at most `(6 + 10α)` times the LP relaxation optimum,
//! with every center's load inflated by at most `2 + 2/α` (for any `α ≥ 4`).
//!
//! The pipeline runs in four rounding stages on top of the LP optimum:
//!
//! 1. [`cluster`]: greedy clustering around cores by connection cost.
//! 2. [`concentrate`]: move opening mass inside each cluster towards its core.
//! 3. [`redistribute`]: reshape the fractional opening values of the
//!    non-terminal cores into a two-level profile.
//! 4. [`stars`]: nearest-neighbor forest, star decomposition and the four
//!    star rounding rules.
//!
//! [`pipeline`] wires the stages together, [`verify`] checks the resulting
//! guarantees, [`oracle`] provides exact baselines for small instances and
//! [`ckl`] handles the facility/client variant by reduction.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ckl;
pub mod cluster;
pub mod concentrate;
pub mod error;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod redistribute;
pub mod stars;
pub mod trace;
pub mod verify;

pub use error::{Error, Result};
pub use model::{FractionalSolution, Instance, IntegralSolution, Matrix, TOL};
pub use pipeline::{solve, PipelinePath, SolveOutcome};
