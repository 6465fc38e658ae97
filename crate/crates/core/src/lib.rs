//! Unambiguous discrimination of mixed quantum states.
//!
//! The pipeline runs state validation ([`model`]), support geometry
//! ([`subspace`]), the core split ([`decompose`]), the Gram-matrix
//! semidefinite program ([`sdp`]), measurement synthesis
//! ([`discriminate`]) and Monte Carlo replay ([`simulate`]).

pub mod decompose;
pub mod discriminate;
pub mod error;
pub mod model;
pub mod numkit;
pub mod rng;
pub mod sdp;
pub mod simulate;
pub mod subspace;

pub use error::{Error, Result};
pub use model::{DensityOperator, DiscriminationInstance, Tolerances};
pub use numkit::{ComplexMatrix, C64};
