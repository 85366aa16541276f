//! Fundamental-matrix geometry, differentiable layers and estimators.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod fit;
pub mod geometry;
pub mod gradcheck;
pub mod layers;
pub mod io;
pub mod metrics;
pub mod scene;

mod linalg;
mod poly;
