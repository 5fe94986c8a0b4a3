//! Soft model merging.
//!
//! Given `J` trained networks with identical architecture and frozen
//! weights, this crate learns stochastic gate parameters under a
//! hard-concrete relaxation of the L0 selection constraint. The merged
//! network picks the best granules — whole models, contiguous modules, or
//! individual layers — without ever modifying the base weights.
//!
//! The numeric core is generic over the scalar type via [`scalar::Scalar`]
//! (`f32` or `f64`); the aliases at the crate root pin `f64`, which all
//! shipped tools and file formats use.

pub mod datazoo;
pub mod error;
pub mod hardconcrete;
pub mod mergenet;
pub mod netgraph;
pub mod oracle;
pub mod scalar;
pub mod tape;
pub mod tensor;
pub mod trainer;

pub use error::{Error, Result};
pub use mergenet::{GateMode, Level, MergeSpec};
pub use tape::Var;

/// Hard-concrete gate parameters in double precision.
pub type GateParams = hardconcrete::GateParams<f64>;
/// Dense tensor in double precision.
pub type Tensor = tensor::Tensor<f64>;
/// Autodiff tape in double precision.
pub type Tape = tape::Tape<f64>;
/// Architecture plus frozen weights, double precision.
pub type ModelDef = netgraph::ModelDef<f64>;
/// A set of same-architecture frozen models.
pub type ModelZoo = netgraph::ModelZoo<f64>;
/// Per-site, per-model gate parameters.
pub type GateBank = mergenet::GateBank<f64>;
/// A zoo viewed through a merge spec and gate bank.
pub type MergedModel<'a> = mergenet::MergedModel<'a, f64>;
/// Labeled features in double precision.
pub type Dataset = datazoo::Dataset<f64>;
/// Gate-training history in double precision.
pub type RunReport = trainer::RunReport<f64>;
