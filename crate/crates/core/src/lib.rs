// `!(x > 0.0)` is used on purpose throughout so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod connform;
pub mod error;
pub mod gluing;
pub mod hypgeo;
pub mod linalg;
pub mod ode;
pub mod scenario;
pub mod schlesinger;
pub mod transport;

pub use error::{Error, Result, Violation};
