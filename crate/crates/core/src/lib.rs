//! Interpolated Riemannian metrics between hyperbolic ends, built from
//! Schwarzian-derivative data of univalent maps, together with the curvature
//! and quasiconformal estimates that control them.

// `!(x > 0.0)` guards also reject NaN; index loops follow tensor notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod complex_maps;
pub mod curvature;
pub mod epstein;
pub mod error;
pub mod gluing;
pub mod hyperbolic_models;
pub mod linalg;
pub mod qc;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
