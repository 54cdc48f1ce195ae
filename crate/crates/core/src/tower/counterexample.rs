//! Finite support data of the chains `g_n` on the uncountable diagram
//! `X(s) = (s × ℕ)₊`, sampled at a single point `s = {k}`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::abelian::{GroupElement, GroupRef};
use crate::error::{Error, Result};
use crate::rules::{ElementRule, IntRule, IntSequence};

/// `g_n(s)`: entry `d_n` on the labels `(k, l)` with `l < k_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportLevel {
    pub n: usize,
    /// `|g_n(s)| = k_n`.
    pub size: BigInt,
    /// The second coordinates `l` of the support labels `(k, l)`.
    pub support: Vec<u64>,
    pub entry: GroupElement,
}

pub fn counterexample_support_data(
    group: &GroupRef,
    k: &IntRule,
    d: &ElementRule,
    n_max: usize,
    width: u64,
) -> Result<Vec<SupportLevel>> {
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let size = k.term(n);
        if size.is_negative() {
            return Err(Error::Precondition(format!("k_{n} = {size} is negative")));
        }
        let count = size.to_u64().filter(|&c| c <= width).ok_or_else(|| {
            Error::Precondition(format!("width {width} is below k_{n} = {size}; supports would be truncated"))
        })?;
        let entry = d.element(group, n)?;
        if entry.is_zero() {
            return Err(Error::Precondition(format!("d_{n} must be nonzero")));
        }
        out.push(SupportLevel {
            n,
            size,
            support: (0..count).collect(),
            entry,
        });
    }
    Ok(out)
}
