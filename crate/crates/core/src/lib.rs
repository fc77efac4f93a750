//! One-dimensional Green-Naghdi equations over variable bathymetry on a
//! periodic domain.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_app;
pub mod diagnostics;
pub mod error;
pub mod gn_rhs;
pub mod grid_ops;
pub mod linearized;
pub mod model;
pub mod scenarios;
pub mod t_operator;
pub mod time_integrator;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
pub use model::Model;
pub use types::{
    check_depth_condition, compute_depth, Bathymetry, DepthField, DepthVerdict, Grid, Parameters,
    State,
};
