//! Interface reformulation solver for free-boundary incompressible
//! neo-Hookean elastodynamics in a periodic channel: vortex sheets between
//! two elastic fluids and the one-fluid free surface.
// `!(x > 0.0)` is used on purpose to reject NaN.
#![allow(
    clippy::needless_range_loop,
    clippy::too_many_arguments,
    clippy::neg_cmp_op_on_partial_ord
)]

pub mod bulk_dynamics;
pub mod chebyshev;
pub mod divcurl;
pub mod dn_ops;
pub mod elliptic;
pub mod error;
pub mod geometry;
pub mod interface_dynamics;
pub mod linalg;
pub mod simulator;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
