//! Kochen-Specker ray sets in every dimension `d >= 3`, the associated
//! state-independent noncontextuality inequalities, and exact solvers that
//! check their classical bounds, quantum identities and value assignments.

pub mod bounds;
pub mod error;
pub mod exact_linalg;
pub mod exec;
pub mod graphs;
pub mod ks_assign;
pub mod quadform;
pub mod ray_sets;
pub mod realize;
pub mod report;

pub use error::{Error, Result};
