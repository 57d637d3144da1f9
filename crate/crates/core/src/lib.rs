//! Dirac operators with Kirchhoff-type vertex conditions on metric graphs.
//!
//! Everything is generic over the real scalar (`f32` or `f64`); the
//! aliases below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod error;
pub mod form;
pub mod graph;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod spectral;
pub mod weyl;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type Graph = graph::MetricGraph<f64>;
pub type Params = graph::PhysicalParams<f64>;
pub type Conditions = conditions::ConditionMatrices<f64>;
pub type Spinor = graph::ClosedFormSpinor<f64>;
pub type Operator = oracle::DiscreteOperator<f64>;
pub type Eigensystem = oracle::EigenSystem<f64>;
pub type Surrogate = form::MultiplierSurrogate<f64>;
pub type Report = spectral::SpectralReport<f64>;
