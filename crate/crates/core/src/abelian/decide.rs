//! Decision procedures on finitely generated groups: p-length, stabilization
//! of multiple chains, almost divisibility and cotorsion.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::arith::is_prime;
use super::group::{FgAbelianGroup, GroupRef};
use super::hom::Subgroup;
use crate::error::{Error, Result};
use crate::rules::{ElementRule, IntRule, IntSequence};

/// Outcome of a p-length computation. Transfinite lengths are never
/// represented; an unbounded search reports the depth it gave up at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PLength {
    Finite(u32),
    Infinite { at_least: u32, reason: String },
}

impl PLength {
    pub fn finite(&self) -> Option<u32> {
        match self {
            PLength::Finite(k) => Some(*k),
            PLength::Infinite { .. } => None,
        }
    }
}

impl fmt::Display for PLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PLength::Finite(k) => write!(f, "{k}"),
            PLength::Infinite { at_least, .. } => write!(f, "infinite (≥ {at_least})"),
        }
    }
}

fn require_prime(p: &BigInt) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p.clone()))
    }
}

/// `l_p(A)`: the least `k ≤ depth` with `p^k A` p-divisible, found by iterating
/// `p·(−)` on subgroups.
pub fn p_length(group: &GroupRef, p: &BigInt, depth: u32) -> Result<PLength> {
    require_prime(p)?;
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    if group.free_rank() > 0 {
        return Ok(PLength::Infinite {
            at_least: depth,
            reason: format!(
                "free rank {} > 0: p^k Z is strictly decreasing, never p-divisible",
                group.free_rank()
            ),
        });
    }
    let mut current = Subgroup::whole(group);
    for k in 0..=depth {
        let next = current.scaled(p);
        if next.same_as(&current) {
            return Ok(PLength::Finite(k));
        }
        current = next;
    }
    Ok(PLength::Infinite {
        at_least: depth,
        reason: format!("p^k A still shrinking at k = {depth}"),
    })
}

/// The chain `q_{<n}·A` for `n = 0..=depth`.
#[derive(Clone, Debug)]
pub struct SubgroupChain {
    pub ambient: GroupRef,
    pub multipliers: Vec<BigInt>,
    pub stages: Vec<Subgroup>,
}

impl SubgroupChain {
    pub fn build(group: &GroupRef, q: &impl IntSequence, depth: usize) -> Self {
        let multipliers: Vec<BigInt> = (0..depth).map(|n| q.term(n)).collect();
        let mut stages = Vec::with_capacity(depth + 1);
        let mut product = BigInt::one();
        stages.push(Subgroup::whole(group));
        for qn in &multipliers {
            product *= qn;
            stages.push(Subgroup::multiples(group, &product));
        }
        SubgroupChain {
            ambient: group.clone(),
            multipliers,
            stages,
        }
    }

    /// `q_{<n}`.
    pub fn partial_product(&self, n: usize) -> BigInt {
        self.multipliers[..n].iter().product()
    }

    /// Whether stage `n+1 ⊆ stage n`, checked by membership, for every `n`.
    pub fn nesting(&self) -> Vec<bool> {
        self.stages
            .windows(2)
            .map(|w| w[1].is_subgroup_of(&w[0]))
            .collect()
    }

    /// Least `m < depth` with `q_{<n}A = q_{<m}A` for every `m < n ≤ depth`.
    pub fn stabilization_index(&self) -> Stabilization {
        let depth = self.stages.len() - 1;
        let mut m = depth;
        while m > 0 && self.stages[m - 1].same_as(&self.stages[depth]) {
            m -= 1;
        }
        if m < depth {
            Stabilization::Stable(m)
        } else {
            Stabilization::NoneWithinDepth(depth)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stabilization {
    Stable(usize),
    NoneWithinDepth(usize),
}

impl fmt::Display for Stabilization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stabilization::Stable(m) => write!(f, "m = {m}"),
            Stabilization::NoneWithinDepth(d) => write!(f, "none within depth {d}"),
        }
    }
}

pub fn stabilization_index(group: &GroupRef, q: &impl IntSequence, depth: usize) -> Result<Stabilization> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    Ok(SubgroupChain::build(group, q, depth).stabilization_index())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlmostDivisibleReason {
    /// Finite, hence bounded by its exponent.
    Bounded {
        #[serde(serialize_with = "crate::serde_int::serialize")]
        exponent: BigInt,
    },
    /// `l_p(A)` is not finite.
    InfinitePLength {
        #[serde(serialize_with = "crate::serde_int::serialize")]
        p: BigInt,
        length: PLength,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlmostDivisibility {
    pub almost_divisible: bool,
    pub reason: AlmostDivisibleReason,
}

/// A finitely generated group is almost divisible iff it is finite.
pub fn is_almost_divisible(group: &GroupRef) -> AlmostDivisibility {
    match group.exponent() {
        Some(exponent) => AlmostDivisibility {
            almost_divisible: true,
            reason: AlmostDivisibleReason::Bounded { exponent },
        },
        None => {
            let two = BigInt::from(2);
            let length = p_length(group, &two, 1).expect("2 is prime and depth is positive");
            AlmostDivisibility {
                almost_divisible: false,
                reason: AlmostDivisibleReason::InfinitePLength { p: two, length },
            }
        }
    }
}

/// Data of the unsolvable system `x_n − q_n x_{n+1} = a_n` witnessing that a
/// group with a free summand is not cotorsion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnsolvableSystemWitness {
    pub free_coordinate: usize,
    pub q: IntRule,
    pub a: ElementRule,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CotorsionVerdict {
    pub cotorsion: bool,
    pub witness: Option<UnsolvableSystemWitness>,
}

/// Bounded groups are cotorsion; a free summand gives the system
/// `x_n − (n+1)x_{n+1} = e` on a free generator `e`.
pub fn is_cotorsion_fg(group: &GroupRef) -> CotorsionVerdict {
    if group.free_rank() == 0 {
        return CotorsionVerdict {
            cotorsion: true,
            witness: None,
        };
    }
    let mut base = vec![BigInt::zero(); group.rank()];
    base[0] = BigInt::one();
    CotorsionVerdict {
        cotorsion: false,
        witness: Some(UnsolvableSystemWitness {
            free_coordinate: 0,
            q: IntRule::factorial_step(),
            a: ElementRule::new(base, IntRule::constant(1)),
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LpScaling {
    pub p_length: u32,
    pub p_length_of_multiple: u32,
    pub multiple: FgAbelianGroup,
    pub agree: bool,
}

/// Computes `l_p(A)` and `l_p(qA)` independently; they always agree for primes `p ≠ q`.
pub fn verify_lp_scaling(group: &GroupRef, p: &BigInt, q: &BigInt) -> Result<LpScaling> {
    require_prime(p)?;
    require_prime(q)?;
    if p == q {
        return Err(Error::Precondition(format!("primes must differ, got {p} twice")));
    }
    if group.free_rank() > 0 {
        return Err(Error::PositiveFreeRank(group.to_string()));
    }
    let multiple = Subgroup::multiples(group, q).structure();
    let depth = exponent_bound(group);
    let lhs = p_length(group, p, depth)?;
    let rhs = p_length(&std::sync::Arc::new(multiple.clone()), p, depth)?;
    let (Some(a), Some(b)) = (lhs.finite(), rhs.finite()) else {
        unreachable!("finite groups have finite p-length within the exponent bound");
    };
    Ok(LpScaling {
        p_length: a,
        p_length_of_multiple: b,
        multiple,
        agree: a == b,
    })
}

/// `1 + Σ exponents` of the group order: a depth within which every chain of
/// subgroups of a finite group has stabilized.
pub fn exponent_bound(group: &FgAbelianGroup) -> u32 {
    1 + group
        .invariant_factors()
        .iter()
        .map(super::arith::big_omega)
        .sum::<u32>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn g(s: &str) -> GroupRef {
        Arc::new(s.parse().unwrap())
    }

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn p_length_examples() {
        assert_eq!(p_length(&g("Z/9"), &b(2), 5).unwrap(), PLength::Finite(0));
        assert_eq!(p_length(&g("Z/8 + Z/2"), &b(2), 5).unwrap(), PLength::Finite(3));
        let inf = p_length(&g("Z + Z/4"), &b(2), 10).unwrap();
        assert!(matches!(inf, PLength::Infinite { at_least: 10, .. }));
        assert_eq!(inf.to_string(), "infinite (≥ 10)");
        assert!(matches!(p_length(&g("Z/4"), &b(4), 3), Err(Error::NotPrime(_))));
        assert_eq!(p_length(&g("0"), &b(3), 1).unwrap(), PLength::Finite(0));
    }

    #[test]
    fn p_length_depth_cutoff() {
        assert!(matches!(
            p_length(&g("Z/32"), &b(2), 3).unwrap(),
            PLength::Infinite { at_least: 3, .. }
        ));
    }

    #[test]
    fn stabilization_examples() {
        let two = IntRule::constant(2);
        assert_eq!(stabilization_index(&g("0"), &two, 4).unwrap(), Stabilization::Stable(0));
        assert_eq!(stabilization_index(&g("Z/12"), &two, 8).unwrap(), Stabilization::Stable(2));
        assert_eq!(
            stabilization_index(&g("Z"), &two, 64).unwrap(),
            Stabilization::NoneWithinDepth(64)
        );
    }

    #[test]
    fn chain_nesting_is_checked() {
        let chain = SubgroupChain::build(&g("Z/12"), &IntRule::constant(2), 4);
        assert!(chain.nesting().iter().all(|&x| x));
        assert_eq!(chain.partial_product(3), b(8));
        // Multipliers 3 then 2 on Z/2: 3A = A, then 2·A = 0, nested either way.
        let chain = SubgroupChain::build(&g("Z/2"), &IntRule::table(vec![b(3), b(2)], vec![b(1)]), 3);
        assert!(chain.nesting().iter().all(|&x| x));
    }

    #[test]
    fn almost_divisible_examples() {
        assert!(is_almost_divisible(&g("Z/6 + Z/4")).almost_divisible);
        let z = is_almost_divisible(&g("Z"));
        assert!(!z.almost_divisible);
        assert!(matches!(z.reason, AlmostDivisibleReason::InfinitePLength { .. }));
        assert!(!is_almost_divisible(&g("Z^2 + Z/5")).almost_divisible);
    }

    #[test]
    fn cotorsion_examples() {
        assert!(is_cotorsion_fg(&g("Z/8")).cotorsion);
        assert!(is_cotorsion_fg(&g("0")).cotorsion);
        let z = is_cotorsion_fg(&g("Z"));
        assert!(!z.cotorsion);
        let w = z.witness.unwrap();
        assert_eq!(w.q, IntRule::factorial_step());
        assert_eq!(w.q.term(0), b(1));
        assert_eq!(w.a.element(&g("Z"), 3).unwrap().coords(), &[b(1)]);
    }

    #[test]
    fn lp_scaling_examples() {
        let r = verify_lp_scaling(&g("Z/12"), &b(2), &b(3)).unwrap();
        assert_eq!((r.p_length, r.p_length_of_multiple, r.agree), (2, 2, true));
        assert_eq!(r.multiple.to_string(), "Z/4");
        let r = verify_lp_scaling(&g("Z/9"), &b(2), &b(3)).unwrap();
        assert_eq!((r.p_length, r.p_length_of_multiple), (0, 0));
        let r = verify_lp_scaling(&g("Z/8 + Z/3"), &b(2), &b(3)).unwrap();
        assert_eq!((r.p_length, r.p_length_of_multiple), (3, 3));
        assert!(matches!(
            verify_lp_scaling(&g("Z + Z/2"), &b(2), &b(3)),
            Err(Error::PositiveFreeRank(_))
        ));
    }
}
