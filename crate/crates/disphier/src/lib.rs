//! Exact symbolic verification of the dispersionless integrable hierarchy
//! of 2d topological field theory, together with a finite-dimensional
//! model of classical BV geometry and tree-level homotopy transfer.
//!
//! Everything is computed over exact rationals; every check in the crate is
//! an exact algebraic identity, never a numerical approximation. The main
//! pipelines are
//!
//! - the graded differential ring of `b`/`eta` generators and local
//!   functionals modulo total derivatives ([`diffring`], [`localfunc`]);
//! - the hydrodynamic Poisson bracket and the odd differential on densities
//!   ([`bracket`]);
//! - genus-zero correlator providers and the topological recursion relation
//!   ([`correlators`]);
//! - the master functional, its Maurer-Cartan residual, and the commuting
//!   Hamiltonians of the hierarchy ([`hierarchy`]);
//! - finite-dimensional shifted-symplectic spaces, the BV bracket, the
//!   classical master equation, and homotopy transfer over trees
//!   ([`transfer`]).
//!
//! The `disphier` binary exposes the verification pipelines as subcommands
//! producing machine-readable JSON reports; see the crate examples for the
//! library-level entry points.

pub mod bracket;
pub mod cli;
pub mod correlators;
pub mod diffring;
pub mod graded;
pub mod hierarchy;
pub mod linalg;
pub mod localfunc;
pub mod report;
pub mod transfer;

pub use diffring::{DiffPoly, Generator, GeneratorKind, TruncationPolicy};
pub use localfunc::{Density, LocalFunctional};
