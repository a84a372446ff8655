//! Numerical toolkit for Hilbert modules over matrix algebras.
//!
//! The module is `M_{n×k}` over `M_n` with inner product `⟨x, y⟩ = xy*`.
//! On top of it sit module morphisms, generalized derivations and the
//! one-parameter unitary groups they generate, each with a seeded checker
//! that reports residuals against named tolerances.

pub mod algebra;
pub mod config;
pub mod demo;
pub mod derivations;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod morphisms;
pub mod random;
pub mod report;
pub mod suite;
pub mod tolerances;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use report::CheckReport;
