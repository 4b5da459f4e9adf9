//! Finite truncations of the quadratic bosonic and free interacting Fock
//! spaces, a q-deformed Fock space, a normal-ordering engine for the abstract
//! relation algebras, and a verification driver that checks each identity
//! numerically.

pub mod algebra;
pub mod bosonic;
pub mod cli;
pub mod combinatorics;
pub mod diagonal;
pub mod error;
pub mod fock;
pub mod free;
pub mod linalg;
pub mod qdeform;
pub mod report;
pub mod rewrite;

pub use error::{Error, Result};
