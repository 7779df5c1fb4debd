//! Numerical machinery for Gaussian functional inequalities: Ornstein–Uhlenbeck and
//! Fokker–Planck flows, entropy, Fisher information and transport functionals, and
//! deficit checkers that compare both sides of each inequality.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod flows;
pub mod functionals;
pub mod generators;
pub mod hamilton_jacobi;
pub mod inequalities;
pub mod math;
pub mod numerics;
pub mod report;
pub mod semigroups;
pub mod transport;

pub use error::{Error, Result};
