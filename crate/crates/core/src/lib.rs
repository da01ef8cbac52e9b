// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod connection;
pub mod conventions;
pub mod error;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod painleve;
pub mod post;
pub mod pre;

pub use error::{Error, Result};
