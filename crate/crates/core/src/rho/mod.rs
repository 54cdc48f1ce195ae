//! The natural map `ρ: (lim X)∧A → lim (X∧A)`, bounded-support factorization
//! and the exact model of its cokernel on the canonical tower.

mod formal;
mod hclass;
mod profile;

pub use formal::{injectivity_witness, FormalSum};
pub use hclass::HClass;
pub use profile::{factorize_bounded, support_profile, ProfileVerdict, SupportProfile};
