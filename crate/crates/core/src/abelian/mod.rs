//! Finitely generated abelian groups: elements, homomorphisms, Smith normal
//! form and the decision procedures built on them.

pub mod arith;
pub mod decide;
pub mod group;
pub mod hom;
pub mod matrix;
pub mod smith;

pub use decide::{
    is_almost_divisible, is_cotorsion_fg, p_length, stabilization_index, verify_lp_scaling,
    PLength, Stabilization, SubgroupChain,
};
pub use group::{
    enumerate_elements, generator, generators, zero, CanonicalForm, FgAbelianGroup, GroupElement,
    GroupRef, PrimaryDecomposition,
};
pub use hom::{torsion_subgroup, GroupHom, Subgroup};
pub use matrix::IntMatrix;
pub use smith::{smith_decompose, SmithDecomposition};
