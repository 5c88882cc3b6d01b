//! Numerical toolkit for the chordal Loewner equation driven by Lip(1/2) functions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod driving;
pub mod flow;
pub mod io;
pub mod recursion;
pub mod svg;
pub mod threshold;
pub mod trace;
pub mod welding;

pub use num_complex::Complex64;
