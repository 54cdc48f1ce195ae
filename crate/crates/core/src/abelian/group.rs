//! Finitely generated abelian groups in invariant-factor form, and their elements.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::arith::{factorize, solve_linear_congruence};
use super::matrix::IntMatrix;
use super::smith::smith_decompose;
use crate::error::{Error, Result};

pub type GroupRef = Arc<FgAbelianGroup>;

/// `Z^r ⊕ Z/d_1 ⊕ … ⊕ Z/d_k` with `d_i ≥ 2` and `d_i | d_{i+1}`.
///
/// Element coordinates list the free part first, then one coordinate per
/// invariant factor.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FgAbelianGroup {
    free_rank: usize,
    invariant_factors: Vec<BigInt>,
}

/// A group in canonical form together with the coordinate change from a
/// presentation `Z^n / ⟨relations⟩`.
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub group: GroupRef,
    /// `group.rank() × n`: raw presentation coordinates to canonical coordinates.
    pub projection: IntMatrix,
    /// `n × group.rank()`: a lift of each canonical generator to raw coordinates.
    pub section: IntMatrix,
}

impl FgAbelianGroup {
    pub fn new(free_rank: usize, invariant_factors: Vec<BigInt>) -> Result<Self> {
        let two = BigInt::from(2);
        if let Some(d) = invariant_factors.iter().find(|d| **d < two) {
            return Err(Error::InvalidGroup(format!("invariant factor {d} is below 2")));
        }
        if let Some(w) = invariant_factors
            .windows(2)
            .find(|w| !(&w[1] % &w[0]).is_zero())
        {
            return Err(Error::InvalidGroup(format!("{} does not divide {}", w[0], w[1])));
        }
        Ok(FgAbelianGroup {
            free_rank,
            invariant_factors,
        })
    }

    pub fn trivial() -> Self {
        FgAbelianGroup {
            free_rank: 0,
            invariant_factors: Vec::new(),
        }
    }

    pub fn free(rank: usize) -> Self {
        FgAbelianGroup {
            free_rank: rank,
            invariant_factors: Vec::new(),
        }
    }

    pub fn integers() -> Self {
        Self::free(1)
    }

    /// `Z/n`; `n = 0` gives `Z`, `n = ±1` the trivial group.
    pub fn cyclic(n: impl Into<BigInt>) -> Self {
        Self::from_cyclic_orders(&[n.into()]).group.as_ref().clone()
    }

    /// Canonical form of `⊕ Z/o_i` for arbitrary orders (`0` meaning `Z`).
    pub fn from_cyclic_orders(orders: &[BigInt]) -> CanonicalForm {
        let n = orders.len();
        let relations = IntMatrix::diagonal(n, n, orders);
        Self::from_presentation(n, &relations)
    }

    /// Canonical form of `Z^n / col(relations)`; `relations` is `n × r`.
    pub fn from_presentation(n: usize, relations: &IntMatrix) -> CanonicalForm {
        assert_eq!(relations.rows(), n, "presentation relation rows must match generators");
        let snf = smith_decompose(relations);
        let diag = snf.diagonal();
        let mut free = Vec::new();
        let mut torsion = Vec::new();
        for i in 0..n {
            match diag.get(i) {
                Some(d) if d.is_one() => {}
                Some(d) if !d.is_zero() => torsion.push((i, d.clone())),
                _ => free.push(i),
            }
        }
        let order: Vec<usize> = free.iter().copied().chain(torsion.iter().map(|(i, _)| *i)).collect();
        let rank = order.len();
        let mut projection = IntMatrix::zeros(rank, n);
        let mut section = IntMatrix::zeros(n, rank);
        for (c, &i) in order.iter().enumerate() {
            for j in 0..n {
                projection[(c, j)] = snf.u[(i, j)].clone();
                section[(j, c)] = snf.u_inv[(j, i)].clone();
            }
        }
        let group = FgAbelianGroup {
            free_rank: free.len(),
            invariant_factors: torsion.into_iter().map(|(_, d)| d).collect(),
        };
        CanonicalForm {
            group: Arc::new(group),
            projection,
            section,
        }
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.invariant_factors
    }

    /// Number of coordinates of an element.
    pub fn rank(&self) -> usize {
        self.free_rank + self.invariant_factors.len()
    }

    /// Order of coordinate `i`, `None` for free coordinates.
    pub fn coordinate_order(&self, i: usize) -> Option<&BigInt> {
        i.checked_sub(self.free_rank)
            .map(|t| &self.invariant_factors[t])
    }

    pub fn is_trivial(&self) -> bool {
        self.rank() == 0
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn order(&self) -> Option<BigInt> {
        self.is_finite()
            .then(|| self.invariant_factors.iter().product())
    }

    /// Least `m ≥ 1` with `mA = 0`, if `A` is bounded.
    pub fn exponent(&self) -> Option<BigInt> {
        self.is_finite()
            .then(|| self.invariant_factors.last().cloned().unwrap_or_else(BigInt::one))
    }

    /// `|A[n]|` for `n ≥ 1`; only the torsion part contributes.
    pub fn torsion_count(&self, n: &BigInt) -> BigInt {
        self.invariant_factors.iter().map(|d| d.gcd(n)).product()
    }

    /// Canonical direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &FgAbelianGroup) -> FgAbelianGroup {
        self.direct_sum_form(other).group.as_ref().clone()
    }

    /// Canonical form of `self ⊕ other`, with raw coordinates `(self, other)`.
    pub fn direct_sum_form(&self, other: &FgAbelianGroup) -> CanonicalForm {
        let orders: Vec<BigInt> = self
            .orders_with_zero()
            .into_iter()
            .chain(other.orders_with_zero())
            .collect();
        Self::from_cyclic_orders(&orders)
    }

    /// `A^n`.
    pub fn power(&self, n: usize) -> FgAbelianGroup {
        let mut factors: Vec<BigInt> = (0..n).flat_map(|_| self.invariant_factors.clone()).collect();
        factors.sort();
        FgAbelianGroup {
            free_rank: self.free_rank * n,
            invariant_factors: factors,
        }
    }

    fn orders_with_zero(&self) -> Vec<BigInt> {
        std::iter::repeat_n(BigInt::zero(), self.free_rank)
            .chain(self.invariant_factors.iter().cloned())
            .collect()
    }

    /// Primary decomposition view: the free rank and the prime-power cyclic factors.
    pub fn primary_decomposition(&self) -> PrimaryDecomposition {
        let mut parts: Vec<(BigInt, u32)> = self.invariant_factors.iter().flat_map(factorize).collect();
        parts.sort();
        PrimaryDecomposition {
            free_rank: self.free_rank,
            prime_powers: parts,
        }
    }

    /// Largest exponent of `p` among the invariant factors.
    pub fn max_prime_exponent(&self, p: &BigInt) -> u32 {
        self.invariant_factors
            .iter()
            .map(|d| super::arith::valuation(d, p))
            .max()
            .unwrap_or(0)
    }
}

pub fn zero(group: &GroupRef) -> GroupElement {
    GroupElement {
        group: group.clone(),
        coords: vec![BigInt::zero(); group.rank()],
    }
}

/// Canonical generator `e_i`.
pub fn generator(group: &GroupRef, i: usize) -> GroupElement {
    let mut coords = vec![BigInt::zero(); group.rank()];
    coords[i] = BigInt::one();
    GroupElement::new(group, coords).expect("generator is in range")
}

pub fn generators(group: &GroupRef) -> Vec<GroupElement> {
    (0..group.rank()).map(|i| generator(group, i)).collect()
}

/// Every element of a finite group, in lexicographic coordinate order.
pub fn enumerate_elements(group: &GroupRef) -> Vec<GroupElement> {
    assert!(group.is_finite(), "cannot enumerate an infinite group");
    let mut out = vec![Vec::<BigInt>::new()];
    for d in group.invariant_factors() {
        let d = d.to_u64().expect("enumeration of a small group");
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..d).map(move |x| {
                    let mut v = prefix.clone();
                    v.push(BigInt::from(x));
                    v
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|coords| GroupElement {
            group: group.clone(),
            coords,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimaryDecomposition {
    pub free_rank: usize,
    pub prime_powers: Vec<(BigInt, u32)>,
}

impl fmt::Display for PrimaryDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        match self.free_rank {
            0 => {}
            1 => terms.push("Z".to_string()),
            r => terms.push(format!("Z^{r}")),
        }
        for (p, e) in &self.prime_powers {
            if *e == 1 {
                terms.push(format!("Z/{p}"));
            } else {
                terms.push(format!("Z/{p}^{e}"));
            }
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl fmt::Display for FgAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        match self.free_rank {
            0 => {}
            1 => terms.push("Z".to_string()),
            r => terms.push(format!("Z^{r}")),
        }
        terms.extend(self.invariant_factors.iter().map(|d| format!("Z/{d}")));
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl fmt::Debug for FgAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FgAbelianGroup({self})")
    }
}

impl FromStr for FgAbelianGroup {
    type Err = Error;

    /// Parses `"Z^r + Z/d1 + Z/d2 + …"`; `"0"` is the trivial group. Summands
    /// may come in any order and need not be canonical (`"Z/2 + Z/3"` is `Z/6`).
    fn from_str(s: &str) -> Result<Self> {
        let fail = |reason: &str| Error::GroupParse {
            literal: s.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Err(fail("empty literal"));
        }
        let mut orders = Vec::new();
        for term in trimmed.split('+') {
            let term: String = term.chars().filter(|c| !c.is_whitespace()).collect();
            if term == "0" {
                continue;
            }
            if term == "Z" {
                orders.push(BigInt::zero());
            } else if let Some(exp) = term.strip_prefix("Z^") {
                let r: usize = exp.parse().map_err(|_| fail("bad free rank"))?;
                orders.extend(std::iter::repeat_n(BigInt::zero(), r));
            } else if let Some(d) = term.strip_prefix("Z/") {
                let (base, exp) = match d.split_once('^') {
                    Some((b, e)) => (b, e.parse::<u32>().map_err(|_| fail("bad exponent"))?),
                    None => (d, 1),
                };
                let base: BigInt = base.parse().map_err(|_| fail("bad cyclic order"))?;
                if base.is_negative() {
                    return Err(fail("negative cyclic order"));
                }
                orders.push(num_traits::pow(base, exp as usize));
            } else {
                return Err(fail(&format!("unrecognized summand {term:?}")));
            }
        }
        Ok(Self::from_cyclic_orders(&orders).group.as_ref().clone())
    }
}

impl TryFrom<String> for FgAbelianGroup {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FgAbelianGroup> for String {
    fn from(g: FgAbelianGroup) -> String {
        g.to_string()
    }
}

/// An element of a finitely generated abelian group, torsion coordinates
/// reduced into `[0, d_i)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    group: GroupRef,
    coords: Vec<BigInt>,
}

impl GroupElement {
    pub fn new(group: &GroupRef, coords: Vec<BigInt>) -> Result<Self> {
        if coords.len() != group.rank() {
            return Err(Error::ForeignElement {
                group: group.to_string(),
                reason: format!("expected {} coordinates, got {}", group.rank(), coords.len()),
            });
        }
        let mut e = GroupElement {
            group: group.clone(),
            coords,
        };
        e.reduce();
        Ok(e)
    }

    pub fn from_ints(group: &GroupRef, coords: &[i64]) -> Result<Self> {
        Self::new(group, coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    fn reduce(&mut self) {
        let free = self.group.free_rank();
        for (c, d) in self.coords[free..]
            .iter_mut()
            .zip(self.group.invariant_factors())
        {
            *c = c.mod_floor(d);
        }
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn same_group(&self, other: &GroupElement) -> bool {
        Arc::ptr_eq(&self.group, &other.group) || self.group == other.group
    }

    pub fn scale(&self, n: &BigInt) -> GroupElement {
        let mut e = GroupElement {
            group: self.group.clone(),
            coords: self.coords.iter().map(|c| c * n).collect(),
        };
        e.reduce();
        e
    }

    pub fn scale_i64(&self, n: i64) -> GroupElement {
        self.scale(&BigInt::from(n))
    }

    /// Order of the element, `None` if infinite.
    pub fn order(&self) -> Option<BigInt> {
        let free = self.group.free_rank();
        if self.coords[..free].iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(
            self.coords[free..]
                .iter()
                .zip(self.group.invariant_factors())
                .fold(BigInt::one(), |acc, (c, d)| acc.lcm(&(d / c.gcd(d)))),
        )
    }

    /// Deterministic solution of `n·x = self`: exact division on free
    /// coordinates, least non-negative solution on each torsion coordinate.
    pub fn divide(&self, n: &BigInt) -> Option<GroupElement> {
        let free = self.group.free_rank();
        let mut coords = Vec::with_capacity(self.coords.len());
        for (i, c) in self.coords.iter().enumerate() {
            if i < free {
                if n.is_zero() {
                    if !c.is_zero() {
                        return None;
                    }
                    coords.push(BigInt::zero());
                    continue;
                }
                let (q, r) = c.div_rem(n);
                if !r.is_zero() {
                    return None;
                }
                coords.push(q);
            } else {
                let d = &self.group.invariant_factors()[i - free];
                coords.push(solve_linear_congruence(n, c, d)?);
            }
        }
        Some(GroupElement {
            group: self.group.clone(),
            coords,
        })
    }

    pub fn is_divisible_by(&self, n: &BigInt) -> bool {
        self.divide(n).is_some()
    }

    /// Coordinates rendered as `3` for one-coordinate groups, `(1,0)` otherwise.
    pub fn coords_text(&self) -> String {
        if self.coords.len() == 1 {
            self.coords[0].to_string()
        } else {
            let parts: Vec<String> = self.coords.iter().map(ToString::to_string).collect();
            format!("({})", parts.join(","))
        }
    }

    fn assert_same(&self, other: &GroupElement) {
        assert!(
            self.same_group(other),
            "group mismatch: {} vs {}",
            self.group,
            other.group
        );
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coords_text())
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self.coords_text(), self.group)
    }
}

impl Add for &GroupElement {
    type Output = GroupElement;

    fn add(self, rhs: &GroupElement) -> GroupElement {
        self.assert_same(rhs);
        let mut e = GroupElement {
            group: self.group.clone(),
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect(),
        };
        e.reduce();
        e
    }
}

impl Sub for &GroupElement {
    type Output = GroupElement;

    fn sub(self, rhs: &GroupElement) -> GroupElement {
        self.assert_same(rhs);
        let mut e = GroupElement {
            group: self.group.clone(),
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect(),
        };
        e.reduce();
        e
    }
}

impl Neg for &GroupElement {
    type Output = GroupElement;

    fn neg(self) -> GroupElement {
        let mut e = GroupElement {
            group: self.group.clone(),
            coords: self.coords.iter().map(|c| -c).collect(),
        };
        e.reduce();
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GroupRef {
        Arc::new(s.parse().unwrap())
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(g("Z^2 + Z/4 + Z/2").to_string(), "Z^2 + Z/2 + Z/4");
        assert_eq!(g("Z/2 + Z/3").to_string(), "Z/6");
        assert_eq!(g("0").to_string(), "0");
        assert_eq!(g("Z/1").to_string(), "0");
        assert_eq!(g("Z/0").to_string(), "Z");
        assert_eq!(g("Z/2^3 + Z").to_string(), "Z + Z/8");
        assert!("Q".parse::<FgAbelianGroup>().is_err());
        assert!("".parse::<FgAbelianGroup>().is_err());
        assert!("Z/-3".parse::<FgAbelianGroup>().is_err());
    }

    #[test]
    fn invariants_enforced() {
        assert!(FgAbelianGroup::new(0, vec![BigInt::from(4), BigInt::from(6)]).is_err());
        assert!(FgAbelianGroup::new(0, vec![BigInt::from(1)]).is_err());
        assert!(FgAbelianGroup::new(1, vec![BigInt::from(2), BigInt::from(6)]).is_ok());
        let t = FgAbelianGroup::trivial();
        assert_eq!((t.free_rank(), t.invariant_factors().len()), (0, 0));
    }

    #[test]
    fn element_arithmetic() {
        let a = g("Z + Z/4");
        let x = GroupElement::from_ints(&a, &[3, 5]).unwrap();
        assert_eq!(x.coords(), &[BigInt::from(3), BigInt::from(1)]);
        let y = GroupElement::from_ints(&a, &[-1, 3]).unwrap();
        assert_eq!((&x + &y).coords(), &[BigInt::from(2), BigInt::from(0)]);
        assert_eq!((-&y).coords(), &[BigInt::from(1), BigInt::from(1)]);
        assert_eq!(x.order(), None);
        let t = GroupElement::from_ints(&a, &[0, 2]).unwrap();
        assert_eq!(t.order(), Some(BigInt::from(2)));
    }

    #[test]
    fn division_chooses_least_torsion_solution() {
        let a = g("Z/4");
        let two = BigInt::from(2);
        let c = GroupElement::from_ints(&a, &[2]).unwrap();
        assert_eq!(c.divide(&two).unwrap().coords(), &[BigInt::one()]);
        let odd = GroupElement::from_ints(&a, &[1]).unwrap();
        assert!(odd.divide(&two).is_none());
        let z = g("Z");
        assert!(GroupElement::from_ints(&z, &[3]).unwrap().divide(&two).is_none());
        assert_eq!(
            GroupElement::from_ints(&z, &[-6]).unwrap().divide(&two).unwrap().coords(),
            &[BigInt::from(-3)]
        );
    }

    #[test]
    fn canonical_section_and_projection_are_inverse() {
        let form = FgAbelianGroup::from_cyclic_orders(&[BigInt::from(2), BigInt::from(3), BigInt::zero()]);
        assert_eq!(form.group.to_string(), "Z + Z/6");
        let round = form.projection.mul(&form.section);
        // projection ∘ section is the identity modulo the canonical orders.
        for i in 0..form.group.rank() {
            for j in 0..form.group.rank() {
                let v = &round[(i, j)];
                let expected = if i == j { BigInt::one() } else { BigInt::zero() };
                match form.group.coordinate_order(i) {
                    Some(d) => assert_eq!(v.mod_floor(d), expected),
                    None => assert_eq!(*v, expected),
                }
            }
        }
    }

    #[test]
    fn primary_view() {
        let a = g("Z + Z/12 + Z/2");
        assert_eq!(a.primary_decomposition().to_string(), "Z + Z/2 + Z/2^2 + Z/3");
        assert_eq!(a.max_prime_exponent(&BigInt::from(2)), 2);
        assert_eq!(g("Z/4").power(2).order(), Some(BigInt::from(16)));
        assert_eq!(enumerate_elements(&g("Z/2 + Z/3")).len(), 6);
    }
}
