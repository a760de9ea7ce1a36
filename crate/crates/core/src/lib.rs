//! Radiation fields of warped-product ends, computed mode by mode through
//! degenerate characteristic (Goursat) problems, plus quadrature checks of
//! the energy, decay and Carleman inequalities behind the support theorem.

// `!(x > 0.0)` style guards reject NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod config;
pub mod error;
pub mod euclidean;
pub mod experiment;
pub mod geometry;
pub mod goursat;
pub mod inequality;
pub mod jet;
pub mod poly;
pub mod profile;
pub mod quadrature;
pub mod radiation;

pub use error::{Error, Result};
