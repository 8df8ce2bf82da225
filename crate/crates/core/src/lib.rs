//! Core algorithms for state-independent noncontextuality inequalities.
//!
//! The crate is `no_std` (it needs `alloc`). It covers
//!
//! - small dense complex linear algebra ([`linalg`]),
//! - the three dichotomic observable families and the 18-ray set ([`observables`]),
//! - inequalities as signed products of labels ([`catalog`]),
//! - exact classical bounds by exhaustive enumeration ([`solver`]),
//! - quantum expectation values and Bell-operator certificates ([`quantum`]),
//! - Kochen-Specker colorability and parity counting ([`parity`]),
//! - a Monte Carlo simulator of sequential projective measurements ([`sim`]).
//!
//! IO, JSON formats, thread pools and the command line live in the `ctxkit` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod catalog;
pub mod error;
pub mod linalg;
pub mod observables;
pub mod parity;
pub mod quantum;
pub mod sim;
pub mod solver;

pub use catalog::{catalog_get, specialize, validate_contexts, InequalityExpr, Sign, Term};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, StateVector, C64};
pub use observables::{
    build_ks18, build_mermin_star, build_peres_mermin, compatible, ObservableLabel, ObservableSet,
    RaySet, SetId,
};
pub use solver::{classical_bound, Assignment, BoundResult};
