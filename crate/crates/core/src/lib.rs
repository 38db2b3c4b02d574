//! Tube-log surface decomposition for primitives of generic rational 1-forms.
//!
//! The pipeline runs in stages: [`ratform`] analyzes the form `R(z) dz`,
//! [`petals`] computes the pole-petals and their attachment census,
//! [`geodesics`] builds the cut tree between zeroes, and [`blueprint`]
//! assembles the pasting description of the surface. [`flowfield`] provides
//! the trajectory tracer and path quadrature used by all of them.

pub mod blueprint;
pub mod chart;
pub mod cli;
pub mod error;
pub mod flowfield;
pub mod geodesics;
pub mod json;
pub mod petals;
pub mod pipeline;
pub mod ratform;
pub mod render;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
