#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Harmonic section flows of geometric structures on flat periodic tori.
//!
//! Four structure kinds evolve by explicit gradient flow of their Dirichlet
//! energy: SO(3) frames (parallelisms), almost complex structures, almost
//! contact structures and G2-structures, plus a constant-coefficient frame
//! model on the round S³.

pub mod diagnostics;
pub mod error;
pub mod flows;
pub mod g2;
pub mod grid;
pub mod init;
pub mod selftest;
pub mod tensor;

pub use error::{Error, Result};
pub use flows::{FlowState, Scheme, StepperConfig, Structure, StructureKind};

pub use grid::{Field, GridSpec, S3Homogeneous};
pub use tensor::{AltForm, SkewMatrix, Vector};
