//! Finite-dimensional quantum coarse geometry as exact matrix computations.
//!
//! The toolkit realizes quantum relations over represented von Neumann
//! algebras, quantum coarse structures and their uniform Roe algebras,
//! support expansion constraints, morphisms between quantum coarse spaces,
//! and asymptotic-dimension decompositions — all on dense complex matrices
//! with explicit tolerances, so that structural statements become checkable
//! equalities of subspaces.
//!
//! Module map:
//! - [`linalg`]: operators, Hilbert–Schmidt subspaces, SVD rank decisions;
//! - [`vna`]: represented algebras, commutants, traces, support projections;
//! - [`qrel`]: quantum relations, the classical bridge, reflexive closure;
//! - [`coarse`]: coarse structures via saturation ladders, quantum metrics;
//! - [`qura`]: Roe algebra assembly, connectedness, classification, ghosts;
//! - [`suppexp`]: support expansion constraints and their coarse structure;
//! - [`morph`]: quantum functions, coarse/expanding/cobounded checks, moduli;
//! - [`asydim`]: cover decompositions and the monotonicity harness;
//! - [`manifest`]: JSON manifests and reports for the command-line front end.

pub mod asydim;
pub mod coarse;
pub mod error;
pub mod linalg;
pub mod manifest;
pub mod morph;
pub mod qrel;
pub mod qura;
pub mod sampling;
pub mod suite;
pub mod suppexp;
pub mod vna;

pub use error::{Error, Result};
pub use linalg::{Operator, OperatorSubspace, DEFAULT_TOL};
