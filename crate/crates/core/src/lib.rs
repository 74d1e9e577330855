//! Cubature rules on the triangle with full or rotational symmetry.
//!
//! This crate searches for, verifies, classifies and serialises cubature
//! rules on the triangle. It works throughout in areal (barycentric)
//! coordinates, so rules are independent of any particular reference
//! triangle. The moment systems driving the search can be assembled in
//! several polynomial bases:
//!
//! * the full Proriol-Koornwinder-Dubiner (PKD) orthonormal basis,
//! * reduced "objective" subsets of it that suffice for symmetric rules
//!   (down to the minimal possible cardinality per degree),
//! * truly symmetric / rotationally symmetric orthonormal bases built from
//!   the elementary symmetric polynomials and orthonormalised with exact
//!   rational arithmetic.
//!
//! The top-level modules mirror that structure: [`geometry`] for areal
//! coordinates, exact moments and symmetry orbits; [`orthopoly`] for Jacobi
//! polynomial evaluation; [`bases`] for the PKD basis families;
//! [`symbasis`] for the orthonormal symmetric bases; [`solver`] for the
//! damped Gauss-Newton search; and [`rulekit`] for independent rule
//! verification and file I/O.

pub mod bases;
pub mod geometry;
pub mod orthopoly;
pub mod rulekit;
pub mod solver;
pub mod symbasis;

pub use bases::{BasisIndex, BasisIndexSet, BasisKind};
pub use geometry::{ArealMonomial, ArealPoint, Orbit, OrbitKind, SymmetryMode};
pub use rulekit::VerificationReport;
pub use solver::{CandidateRule, OrbitCombination, Quality, SolverBasis, SolverConfig};
