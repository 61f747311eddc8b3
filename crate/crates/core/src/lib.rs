//! Exact arithmetic in small finite field towers F_p ⊆ F_q ⊆ F_{q^m} ⊆ F_{q^{2m}},
//! and the machinery built on top of it:
//!
//! * σ-linearized and σ-projective polynomials, companion matrices and
//!   twisted products, with eigenspace-based root counts checked against
//!   brute force ([`linearized`]);
//! * F_q-subspaces of F_{q^m}^3 viewed inside PG(2, q^m): weights, scattered /
//!   evasive / cutting predicates, weight spectra and saturation bitmaps
//!   ([`geometry`]);
//! * the two-parameter family U = {(x, x^σ + a, x^{σ²} + b)} together with the
//!   arithmetic criteria that decide when it is scattered, equivalence between
//!   members, and stabilizer checks ([`construction`]);
//! * the rank-metric codes attached to spanning subspaces, their weight
//!   distributions, minimality and covering-radius experiments ([`code`]);
//! * JSON certificates for all of the above with deterministic replay
//!   ([`report`]).
//!
//! Every enumerative predicate is exhaustive at desk scale, carries an
//! explicit operation budget, and reports either a witness or the enumeration
//! bound that proves the scan was complete.

pub mod code;
pub mod construction;
pub mod error;
pub mod field;
pub mod geometry;
pub mod linearized;
pub mod report;

pub use error::{Error, Result};
pub use field::{build_tower, FieldElement, Level, Tower};

/// Default cap on field-element operations a single predicate may spend.
pub const DEFAULT_BUDGET: u64 = 1 << 24;
