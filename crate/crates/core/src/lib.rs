//! Exact analysis of all-symbol PIR and all-symbol batch codes over small
//! finite fields.
//!
//! A linear code given by a `k x n` generator matrix `G` can *serve* a list of
//! target vectors when every target lies in the span of its own set of columns
//! and these sets are pairwise disjoint. The crate decides the six properties
//! built on that notion (PIR, batch, functional PIR, functional batch,
//! all-symbol PIR, all-symbol batch), constructs the known code families,
//! evaluates length bounds, and searches for shortest codes.

pub mod bounds;
pub mod constructions;
pub mod error;
pub mod field;
pub mod linalg;
pub mod oracle;
pub mod properties;
pub mod recovery;
pub mod search;

pub use error::{Error, Result};
pub use field::{field_of_order, make_field, Field, FieldElement};
pub use linalg::{GeneratorMatrix, IndexSet, Matrix};
pub use recovery::{serve, verify_plan, RecoveryPlan, Request};
pub use properties::{check, max_t, PropertyKind, Verdict};
