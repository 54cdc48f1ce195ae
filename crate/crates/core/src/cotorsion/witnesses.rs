//! Elements `d_m ≠ 0` with `q_{<m}·d_m ∉ q_{<m+1}·A` along a strictly
//! decreasing chain `q_{<m}·A`.

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::abelian::{generators, is_almost_divisible, GroupElement, GroupRef, Subgroup, SubgroupChain};
use crate::error::{Error, Result};
use crate::rules::{ElementRule, IntRule};

/// Upper bound on the length of one regrouped block.
const MAX_BLOCK: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DmWitnesses {
    pub group: GroupRef,
    /// The sequence `r` whose chain `r_{<n}·A` never stabilizes.
    pub r: IntRule,
    /// `0 = i_0 < i_1 < …`, the indices where `r_{<i}·A` drops.
    pub breakpoints: Vec<usize>,
    /// `q_n = r_{i_n} ⋯ r_{i_{n+1}−1}` for `n ≤ depth`.
    #[serde(serialize_with = "crate::serde_int::vec::serialize")]
    pub q: Vec<BigInt>,
    #[serde(skip)]
    pub d: Vec<GroupElement>,
}

impl DmWitnesses {
    pub fn depth(&self) -> usize {
        self.q.len() - 1
    }

    /// `q_{<m}`.
    pub fn partial_product(&self, m: usize) -> BigInt {
        self.q[..m].iter().product()
    }

    /// The constant rule when all `q_n` agree, else the table of values.
    pub fn q_rule(&self) -> IntRule {
        match self.q.split_first() {
            Some((first, rest)) if rest.iter().all(|x| x == first) => IntRule::constant(first.clone()),
            _ => IntRule::table(self.q.clone(), vec![]),
        }
    }

    /// `n ↦ d` when all `d_m` agree.
    pub fn d_rule(&self) -> Option<ElementRule> {
        let (first, rest) = self.d.split_first()?;
        rest.iter()
            .all(|x| x == first)
            .then(|| ElementRule::new(first.coords().to_vec(), IntRule::constant(1)))
    }

    /// Re-checks `d_m ≠ 0` and `q_{<m}·d_m ∉ q_{<m+1}·A` for every `m ≤ depth`.
    pub fn verify(&self) -> Result<()> {
        let mut prefix = BigInt::one();
        for (m, (qm, dm)) in self.q.iter().zip(&self.d).enumerate() {
            let next = &prefix * qm;
            if dm.is_zero() || Subgroup::multiples(&self.group, &next).contains(&dm.scale(&prefix)) {
                return Err(Error::InvariantViolation {
                    invariant: "q_{<m}·d_m ∉ q_{<m+1}·A".into(),
                    level: m,
                    detail: format!("d_{m} = {dm}, q_<m = {prefix}, q_<m+1 = {next}"),
                });
            }
            prefix = next;
        }
        Ok(())
    }
}

/// Regroups `r ≡ 2` into blocks on which the chain strictly drops, and picks
/// each `d_m` among the generators.
pub fn build_dm_witnesses(group: &GroupRef, depth: usize) -> Result<DmWitnesses> {
    if is_almost_divisible(group).almost_divisible {
        return Err(Error::Precondition(format!("{group} is almost divisible; no witnesses exist")));
    }
    regroup(group, IntRule::constant(2), depth)
}

/// The regrouping for a given `r`; each block is searched up to a fixed length.
pub fn regroup(group: &GroupRef, r: IntRule, depth: usize) -> Result<DmWitnesses> {
    let mut length = (depth + 1) * 2;
    let chain = loop {
        let chain = SubgroupChain::build(group, &r, length);
        let drops = (1..=length).filter(|&i| !chain.stages[i].same_as(&chain.stages[i - 1])).count();
        if drops > depth {
            break chain;
        }
        if length > (depth + 1) * MAX_BLOCK {
            return Err(Error::Precondition(format!(
                "r_<n·A drops only {drops} times within {length} steps; r does not witness non-stabilization"
            )));
        }
        length *= 2;
    };
    let mut breakpoints = vec![0];
    for i in 1..=length {
        if breakpoints.len() > depth + 1 {
            break;
        }
        if !chain.stages[i].same_as(&chain.stages[breakpoints[breakpoints.len() - 1]]) {
            breakpoints.push(i);
        }
    }
    let q: Vec<BigInt> = breakpoints
        .windows(2)
        .map(|w| chain.multipliers[w[0]..w[1]].iter().product())
        .collect();
    let gens = generators(group);
    let mut d = Vec::with_capacity(q.len());
    let mut prefix = BigInt::one();
    for (m, qm) in q.iter().enumerate() {
        let next = Subgroup::multiples(group, &(&prefix * qm));
        let dm = gens
            .iter()
            .find(|g| !next.contains(&g.scale(&prefix)))
            .ok_or_else(|| Error::InvariantViolation {
                invariant: "q_{<m+1}·A ⊊ q_{<m}·A".into(),
                level: m,
                detail: "no generator leaves the smaller subgroup".into(),
            })?;
        d.push(dm.clone());
        prefix *= qm;
    }
    let out = DmWitnesses {
        group: group.clone(),
        r,
        breakpoints,
        q,
        d,
    };
    out.verify()?;
    Ok(out)
}
