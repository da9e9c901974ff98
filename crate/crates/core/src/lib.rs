//! Relaxed energies for coupled functionals `F(u, v) = int f1(u) f2(v) + W(grad u)`
//! with linear growth, on pairs of a BV function `u` and a Radon measure `v`.
//!
//! The crate evaluates the relaxed functional (one-dimensional formula with a
//! cell problem at concentration points, and the n-dimensional formula with the
//! coupling density `g`), and builds explicit recovery sequences that realize
//! it.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bv1d;
pub mod docs;
pub mod error;
pub mod funclib;
pub mod measure1d;
pub mod mesh;
pub mod minimize;
pub mod relax;
pub mod sequences;
pub mod step;
pub mod vecops;

pub use error::{RelaxError, Result};
