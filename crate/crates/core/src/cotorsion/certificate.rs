//! Sound, incomplete certificates that a system has no solution.
//!
//! The system is projected to a free coordinate `j`, giving an integer system
//! `x_n − q_n x_{n+1} = α_n` whose solvability is necessary for the original.
//! Suppose that from some `N_0` on `q_n ≥ 2`, `sup q_n = ∞` and
//! `1 ≤ σ·α_n ≤ B` for a sign `σ`. Replacing `x` by `σx`, a solution that is
//! positive at some `n ≥ N_0` strictly decreases while positive, so it turns
//! non-positive; from then on `y = −x ≥ 1` obeys `y_{n+1} = (y_n + α_n)/q_n
//! ≤ max(y_n, B)`, so `y` is bounded, and the first later `q_n` above that
//! bound forces `0 < y_{n+1} < 1`. Hence no integer solution exists.
//!
//! These tail facts are read off the rule shapes. The certificate also
//! requires the observable window condition on the coset constants: on the
//! last three levels `0 ≤ c_N < q_{<N+1}`, and both `c_N` and the gap
//! `q_{<N+1} − c_N` strictly increase. The gap excludes systems like
//! `x_n − 2x_{n+1} = 1`, whose constants `2^{N+1} − 1` rise under their
//! moduli although `x ≡ −1` is a solution.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::system::{coset_tower, EquationSystem};
use crate::error::{Error, Result};

/// Number of trailing levels the window condition is checked on.
pub const WINDOW: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonCotorsionCertificate {
    /// The free coordinate the system was projected to.
    pub coordinate: usize,
    /// `N*`, the last level of the window.
    pub depth: usize,
    /// First level of the monotonicity window.
    pub window_start: usize,
    /// `N_0`, from which on the tail facts hold.
    pub tail_from: usize,
    /// `σ` with `σ·α_n ≥ 1` on the tail; constants are multiplied by it.
    pub sign: i8,
    /// `B` with `σ·α_n ≤ B` on the tail.
    #[serde(serialize_with = "crate::serde_int::serialize")]
    pub bound: BigInt,
    /// Normalized projected constants `σ·c_N` for `N ≤ N*`.
    #[serde(serialize_with = "crate::serde_int::vec::serialize")]
    pub constants: Vec<BigInt>,
    /// `q_{<N+1}` for `N ≤ N*`.
    #[serde(serialize_with = "crate::serde_int::vec::serialize")]
    pub moduli: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CertificateVerdict {
    Certified(NonCotorsionCertificate),
    Inconclusive { reason: String },
}

impl CertificateVerdict {
    pub fn certificate(&self) -> Option<&NonCotorsionCertificate> {
        match self {
            CertificateVerdict::Certified(c) => Some(c),
            CertificateVerdict::Inconclusive { .. } => None,
        }
    }
}

/// Tail facts on coordinate `j` from `from` on: `(σ, B)` when they hold.
fn tail_facts(system: &EquationSystem, j: usize, from: usize) -> Option<(i8, BigInt)> {
    let q = system.q.tail_bounds(from);
    if q.max.is_some() || q.min.as_ref().is_none_or(|m| *m < BigInt::from(2)) {
        return None;
    }
    let base = system.a.base_element(&system.group).ok()?;
    let b = &base.coords()[j];
    if b.is_zero() {
        return None;
    }
    let s = system.a.scale.tail_bounds(from);
    let (lo, hi) = (s.min? * b, s.max? * b);
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    if lo >= BigInt::one() {
        Some((1, hi))
    } else if hi <= -BigInt::one() {
        Some((-1, -lo))
    } else {
        None
    }
}

fn window_holds(constants: &[BigInt], moduli: &[BigInt], end: usize) -> bool {
    if end + 1 < WINDOW {
        return false;
    }
    let start = end + 1 - WINDOW;
    let bounded = (start..=end).all(|n| !constants[n].is_negative() && constants[n] < moduli[n]);
    let rising = (start..end).all(|n| constants[n] < constants[n + 1]);
    let gaps = (start..end).all(|n| &moduli[n] - &constants[n] < &moduli[n + 1] - &constants[n + 1]);
    bounded && rising && gaps
}

/// Looks for the least `N* ≤ depth` where the window condition holds on some
/// free coordinate whose tail facts hold from some `N_0 ≤ N*`.
pub fn certify_noncotorsion(system: &EquationSystem, depth: usize) -> Result<CertificateVerdict> {
    let free = system.group.free_rank();
    if free == 0 {
        return Err(Error::Precondition(format!(
            "{} has no free part; bounded groups are cotorsion and there is nothing to certify",
            system.group
        )));
    }
    let tower = coset_tower(system, depth)?;
    let mut reasons = Vec::new();
    for j in 0..free {
        let Some((tail_from, (sign, bound))) = (0..=depth).find_map(|n| tail_facts(system, j, n).map(|f| (n, f))) else {
            reasons.push(format!("coordinate {j}: tail facts (q_n ≥ 2 unbounded, a_n of one sign and bounded) do not hold"));
            continue;
        };
        let constants: Vec<BigInt> = tower.constants.iter().map(|c| &c.coords()[j] * BigInt::from(sign)).collect();
        let found = (tail_from.max(WINDOW - 1)..=depth).find(|&end| window_holds(&constants, &tower.moduli, end));
        match found {
            Some(end) => {
                return Ok(CertificateVerdict::Certified(NonCotorsionCertificate {
                    coordinate: j,
                    depth: end,
                    window_start: end + 1 - WINDOW,
                    tail_from,
                    sign,
                    bound,
                    constants: constants[..=end].to_vec(),
                    moduli: tower.moduli[..=end].to_vec(),
                }))
            }
            None => reasons.push(format!("coordinate {j}: window condition fails up to depth {depth}")),
        }
    }
    Ok(CertificateVerdict::Inconclusive {
        reason: reasons.join("; "),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::GroupRef;
    use crate::rules::{ElementRule, IntRule};
    use std::sync::Arc;

    fn grp(s: &str) -> GroupRef {
        Arc::new(s.parse().unwrap())
    }

    fn system(g: &str, q: IntRule, a: IntRule) -> EquationSystem {
        EquationSystem::new(&grp(g), q, ElementRule::first_generator(a)).unwrap()
    }

    #[test]
    fn factorial_system_is_certified() {
        let sys = system("Z", IntRule::factorial_step(), IntRule::constant(1));
        let cert = certify_noncotorsion(&sys, 10).unwrap();
        let cert = cert.certificate().expect("fires");
        assert_eq!(cert.depth, 4);
        assert_eq!(cert.constants.last(), Some(&BigInt::from(34)));
        assert_eq!(cert.tail_from, 1);
        let neg = system("Z + Z/6", IntRule::factorial_step(), IntRule::constant(-3));
        assert_eq!(certify_noncotorsion(&neg, 10).unwrap().certificate().unwrap().sign, -1);
    }

    #[test]
    fn inconclusive_cases() {
        let trivial = system("Z", IntRule::constant(1), IntRule::constant(0));
        assert!(certify_noncotorsion(&trivial, 10).unwrap().certificate().is_none());
        let alternating = system("Z", IntRule::constant(2), IntRule::Geometric { start: 1.into(), ratio: (-1).into() });
        assert!(certify_noncotorsion(&alternating, 10).unwrap().certificate().is_none());
        // Solvable by x ≡ −1 although the constants rise under the moduli.
        let minus_one = system("Z", IntRule::constant(2), IntRule::constant(1));
        assert!(certify_noncotorsion(&minus_one, 20).unwrap().certificate().is_none());
        let bounded = system("Z/12", IntRule::factorial_step(), IntRule::constant(1));
        assert!(matches!(certify_noncotorsion(&bounded, 10), Err(Error::Precondition(_))));
    }
}
