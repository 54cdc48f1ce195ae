//! Constructive division of chains: off finitely many threads, everywhere,
//! and the `p^ω` recursion driven by a witness pack.

mod divide;
mod pack;
mod pomega;

pub use divide::{
    divide_everywhere, divide_off_finite, verify_division, ClassRecord, DivisionOutcome, LevelRecord, RecursionTrace,
};
pub use pack::{power_pack, unshifted_power_pack, zero_pack, DivisionWitnessPack, PackSpec};
pub use pomega::{p_omega_divide, redivide, verify_p_omega, z_labels, OmegaClass, OmegaLevel, OmegaOutcome, OmegaTrace};
