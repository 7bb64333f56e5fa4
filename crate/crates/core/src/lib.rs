#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abs_convex;
pub mod bench;
pub mod curvature;
pub mod error;
pub mod io;
pub mod matrix;
pub mod objectives;
pub mod projection;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
