//! Exact computation with inverse limits of pointed-set towers smashed with
//! finitely generated abelian groups.

pub mod abelian;
pub mod cotorsion;
pub mod division;
pub mod error;
pub mod rho;
pub mod rules;
pub mod serde_int;
pub mod smash;
pub mod tower;

pub use error::{Error, Result};
