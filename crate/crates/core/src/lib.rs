//! Steady states, threshold curves and bifurcation diagrams for a
//! spatially heterogeneous diffusive predator-prey system with a
//! saturating (Holling type II) interaction, on a 1-D interval.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod coexistence;
pub mod continuation;
pub mod curves;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod logistic;
pub mod model;
pub mod oracle;
pub mod spectral;

pub use error::{Error, Result};
