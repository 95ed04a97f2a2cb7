// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod addcomb;
pub mod decompose;
pub mod func;
pub mod group;
pub mod io;
pub mod spectral;
pub mod tree;
