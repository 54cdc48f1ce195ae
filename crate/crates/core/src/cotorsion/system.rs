//! Recursive systems `x_n − q_n·x_{n+1} = a_n` and their back-substitution.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::abelian::{GroupElement, GroupRef, Subgroup};
use crate::error::{Error, Result};
use crate::rules::{ElementRule, IntRule, IntSequence};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSystem {
    pub group: GroupRef,
    pub q: IntRule,
    pub a: ElementRule,
}

impl EquationSystem {
    pub fn new(group: &GroupRef, q: IntRule, a: ElementRule) -> Result<Self> {
        a.base_element(group)?;
        Ok(EquationSystem {
            group: group.clone(),
            q,
            a,
        })
    }

    pub fn q(&self, n: usize) -> BigInt {
        self.q.term(n)
    }

    pub fn a(&self, n: usize) -> GroupElement {
        self.a.element(&self.group, n).expect("base element checked on construction")
    }

    /// `x_n − q_n·x_{n+1} − a_n` for `n < x.len() − 1`, all of which must vanish.
    pub fn residuals(&self, x: &[GroupElement]) -> Vec<GroupElement> {
        x.windows(2)
            .enumerate()
            .map(|(n, w)| &(&w[0] - &w[1].scale(&self.q(n))) - &self.a(n))
            .collect()
    }
}

/// `x_0 ∈ c_N + q_{<N+1}·A` for each `N ≤ depth`.
#[derive(Clone, Debug)]
pub struct CosetTower {
    pub constants: Vec<GroupElement>,
    /// `q_{<N+1}`.
    pub moduli: Vec<BigInt>,
    pub subgroups: Vec<Subgroup>,
}

impl CosetTower {
    pub fn depth(&self) -> usize {
        self.constants.len() - 1
    }

    /// Whether `x` lies in the coset at `N`.
    pub fn admits(&self, n: usize, x: &GroupElement) -> bool {
        self.subgroups[n].contains(&(x - &self.constants[n]))
    }

    /// `{"constants": [[...], ...], "moduli": [...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let constants: Vec<serde_json::Value> = self
            .constants
            .iter()
            .map(|c| serde_json::Value::Array(c.coords().iter().map(crate::smash::bigint_json).collect()))
            .collect();
        let moduli: Vec<serde_json::Value> = self.moduli.iter().map(crate::smash::bigint_json).collect();
        serde_json::json!({ "constants": constants, "moduli": moduli })
    }
}

/// `c_N = Σ_{k≤N} q_{<k}·a_k` and `q_{<N+1}·A`, with the consistency
/// `c_{N+1} − c_N ∈ q_{<N+1}·A` asserted at each step.
pub fn coset_tower(system: &EquationSystem, depth: usize) -> Result<CosetTower> {
    let group = &system.group;
    let mut constants = Vec::with_capacity(depth + 1);
    let mut moduli = Vec::with_capacity(depth + 1);
    let mut subgroups: Vec<Subgroup> = Vec::with_capacity(depth + 1);
    let mut prefix = BigInt::one();
    let mut c = crate::abelian::zero(group);
    for n in 0..=depth {
        let next = &c + &system.a(n).scale(&prefix);
        if n > 0 && !subgroups[n - 1].contains(&(&next - &c)) {
            return Err(Error::InvariantViolation {
                invariant: "c_{N+1} ≡ c_N mod q_{<N+1}·A".into(),
                level: n,
                detail: format!("{} − {} ∉ {}·A", next, c, moduli[n - 1]),
            });
        }
        c = next;
        prefix *= system.q(n);
        constants.push(c.clone());
        subgroups.push(Subgroup::multiples(group, &prefix));
        moduli.push(prefix.clone());
    }
    Ok(CosetTower {
        constants,
        moduli,
        subgroups,
    })
}

/// All solutions of equations `0..=N`: pick `x_{N+1}` freely and substitute
/// back. The `particular` solution takes `x_{N+1} = 0`.
#[derive(Clone, Debug)]
pub struct TruncatedSolution {
    pub depth: usize,
    pub particular: Vec<GroupElement>,
    /// `x_0 ∈ c_N + q_{<N+1}·A`.
    pub x0_constant: GroupElement,
    pub x0_modulus: BigInt,
}

impl TruncatedSolution {
    /// The solution with `x_{N+1} = t`.
    pub fn with_parameter(&self, system: &EquationSystem, t: &GroupElement) -> Vec<GroupElement> {
        back_substitute(system, self.depth, t)
    }
}

fn back_substitute(system: &EquationSystem, depth: usize, top: &GroupElement) -> Vec<GroupElement> {
    let mut x = vec![top.clone()];
    for n in (0..=depth).rev() {
        let next = &system.a(n) + &x.last().expect("nonempty").scale(&system.q(n));
        x.push(next);
    }
    x.reverse();
    x
}

pub fn solve_truncated(system: &EquationSystem, depth: usize) -> Result<TruncatedSolution> {
    let particular = back_substitute(system, depth, &crate::abelian::zero(&system.group));
    if let Some(n) = system.residuals(&particular).iter().position(|r| !r.is_zero()) {
        return Err(Error::InvariantViolation {
            invariant: "back-substitution solves the system".into(),
            level: n,
            detail: "nonzero residual".into(),
        });
    }
    let tower = coset_tower(system, depth)?;
    debug_assert_eq!(particular[0], tower.constants[depth]);
    Ok(TruncatedSolution {
        depth,
        x0_constant: particular[0].clone(),
        x0_modulus: tower.moduli[depth].clone(),
        particular,
    })
}
