//! Exact-arithmetic finite geometry over the tower GF(q) ⊂ GF(q²) ⊂ GF(q⁴):
//! the Bose representation of PG(2,q²) as a regular line spread of PG(5,q),
//! the Bruck-Bose representation as its hyperplane slice, the varieties
//! attached to Baer sublines, Baer subplanes and conics, and the
//! classification of conics of Baer subplanes as 2-special normal rational
//! curves of PG(4,q).
//!
//! Everything is table-backed exact arithmetic at desk scale (q ≤ 7 by
//! default); the verification suites in [`suites`] re-derive the structural
//! claims by brute-force enumeration.

pub mod bose;
pub mod bruck_bose;
pub mod classify;
pub mod field;
pub mod forms;
pub mod linalg;
pub mod projective;
pub mod suites;
pub mod varieties;

pub use field::{Fel, FieldError, FieldTower, Level};
