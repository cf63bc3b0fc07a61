//! Finite-dimensional consistent-histories quantum mechanics.
//!
//! The crate builds history families over a small Hilbert space, computes
//! decoherence functionals, checks weak/medium consistency conditions,
//! assigns probabilities, and realises the algebraic superstructure around
//! histories: partial semigroups of temporal supports, the tensor-product
//! (HPO) representation of history propositions, and the orthoalgebra
//! operations on them.
//!
//! Module map:
//! - [`matrix`]: dense complex-matrix kernel with tolerance-aware predicates
//! - [`kinematics`]: states, dynamics, projectors, decompositions of unity
//! - [`histories`]: histories, families, coarse-graining, chain operators
//! - [`decoherence`]: decoherence functionals, consistency, probabilities
//! - [`families`]: refinement / compatibility / complementarity of families
//! - [`psg`]: partial semigroups and quasitemporal structure validators
//! - [`hpo`]: history projection operators and the orthoalgebra
//! - [`scenario`]: scenario file ingestion and report emission

pub mod decoherence;
pub mod error;
pub mod families;
pub mod histories;
pub mod hpo;
pub mod kinematics;
pub mod matrix;
pub mod psg;
pub mod scenario;

pub use error::{Error, Result};
pub use matrix::{CMatrix, Tolerance};
