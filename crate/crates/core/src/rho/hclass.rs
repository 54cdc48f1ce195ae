//! Classes of `∏A/⊕A` represented by eventually periodic sequences; on the
//! canonical tower this is the cokernel of `ρ`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use serde_json::Value;

use crate::abelian::{torsion_subgroup, zero, GroupElement, GroupRef, Subgroup};
use crate::error::{Error, Result};
use crate::smash::{bigint_json, json_bigint, Label};
use crate::tower::{LimitChain, Tower};

/// The class of the sequence `prefix, period, period, …`. Only the tail
/// matters: sequences agreeing from some index on give the same class.
#[derive(Clone)]
pub struct HClass {
    group: GroupRef,
    prefix: Vec<GroupElement>,
    period: Vec<GroupElement>,
}

impl HClass {
    pub fn new(group: &GroupRef, prefix: Vec<GroupElement>, period: Vec<GroupElement>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Precondition("the period must be nonempty".into()));
        }
        if let Some(e) = prefix.iter().chain(&period).find(|e| e.group() != group) {
            return Err(Error::GroupMismatch {
                left: e.group().to_string(),
                right: group.to_string(),
            });
        }
        Ok(HClass {
            group: group.clone(),
            prefix,
            period,
        })
    }

    pub fn zero(group: &GroupRef) -> Self {
        HClass {
            group: group.clone(),
            prefix: Vec::new(),
            period: vec![zero(group)],
        }
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn prefix(&self) -> &[GroupElement] {
        &self.prefix
    }

    pub fn period(&self) -> &[GroupElement] {
        &self.period
    }

    /// The `i`-th term of the representing sequence.
    pub fn entry(&self, i: usize) -> GroupElement {
        match self.prefix.get(i) {
            Some(e) => e.clone(),
            None => self.period[(i - self.prefix.len()) % self.period.len()].clone(),
        }
    }

    /// Same class, empty prefix, minimal period aligned to index 0.
    pub fn normalized(&self) -> HClass {
        let p = self.period.len();
        let start = self.prefix.len().div_ceil(p) * p;
        let aligned: Vec<GroupElement> = (start..start + p).map(|i| self.entry(i)).collect();
        let minimal = (1..=p)
            .filter(|d| p.is_multiple_of(*d))
            .find(|&d| (0..p).all(|i| aligned[i] == aligned[i % d]))
            .expect("p itself works");
        HClass {
            group: self.group.clone(),
            prefix: Vec::new(),
            period: aligned[..minimal].to_vec(),
        }
    }

    fn check_group(&self, other: &HClass) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch {
                left: self.group.to_string(),
                right: other.group.to_string(),
            });
        }
        Ok(())
    }

    /// Termwise combination over a window where both are periodic.
    fn zip_with(&self, other: &HClass, f: impl Fn(&GroupElement, &GroupElement) -> GroupElement) -> Result<HClass> {
        self.check_group(other)?;
        let start = self.prefix.len().max(other.prefix.len());
        let p = self.period.len().lcm(&other.period.len());
        let prefix = (0..start).map(|i| f(&self.entry(i), &other.entry(i))).collect();
        let period = (start..start + p).map(|i| f(&self.entry(i), &other.entry(i))).collect();
        Ok(HClass {
            group: self.group.clone(),
            prefix,
            period,
        })
    }

    pub fn add(&self, other: &HClass) -> Result<HClass> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &HClass) -> Result<HClass> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn neg(&self) -> HClass {
        self.scale(&BigInt::from(-1))
    }

    pub fn scale(&self, n: &BigInt) -> HClass {
        HClass {
            group: self.group.clone(),
            prefix: self.prefix.iter().map(|e| e.scale(n)).collect(),
            period: self.period.iter().map(|e| e.scale(n)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.period.iter().all(GroupElement::is_zero)
    }

    /// Equality of classes: the tails agree on one full common period.
    pub fn equals(&self, other: &HClass) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }

    /// `[h] ∈ H[n]`, i.e. `n·(period) = 0`.
    pub fn in_torsion(&self, n: &BigInt) -> bool {
        self.period.iter().all(|e| e.scale(n).is_zero())
    }

    /// `[h] ∈ H(X, A[n])`: a representative with entries in `A[n]`, decided
    /// by kernel membership.
    pub fn has_torsion_representative(&self, n: &BigInt) -> bool {
        let kernel = torsion_subgroup(&self.group, n);
        self.period.iter().all(|e| kernel.contains(e))
    }

    /// `[h] ∈ H(X, nA)`: a representative with entries in `nA`, decided by
    /// subgroup membership.
    pub fn in_multiples(&self, n: &BigInt) -> bool {
        let multiples = Subgroup::multiples(&self.group, n);
        self.period.iter().all(|e| multiples.contains(e))
    }

    /// A class `[g]` with `n·[g] = [h]`, built entrywise on the tail.
    pub fn divide(&self, n: &BigInt) -> Option<HClass> {
        let period: Option<Vec<GroupElement>> = self.period.iter().map(|e| e.divide(n)).collect();
        let g = HClass {
            group: self.group.clone(),
            prefix: vec![zero(&self.group); self.prefix.len()],
            period: period?,
        };
        debug_assert!(g.scale(n).sub(self).map(|d| d.is_zero()).unwrap_or(false));
        Some(g)
    }

    /// The chain `h(n) = Σ_{k≤n} k·s_k` on the canonical tower.
    pub fn to_chain(&self, tower: &Tower) -> LimitChain {
        let class = self.clone();
        LimitChain::from_label_entries(tower, &self.group, format!("sequence {self}"), move |l| match l {
            Label::Nat(k) => class.entry(*k as usize),
            _ => zero(&class.group),
        })
    }

    /// `{"prefix": [...], "period": [...]}` with coordinate lists.
    pub fn to_json(&self) -> Value {
        let enc = |es: &[GroupElement]| -> Value {
            Value::Array(
                es.iter()
                    .map(|e| Value::Array(e.coords().iter().map(bigint_json).collect()))
                    .collect(),
            )
        };
        serde_json::json!({ "prefix": enc(&self.prefix), "period": enc(&self.period) })
    }

    pub fn from_json(group: &GroupRef, value: &Value) -> Result<Self> {
        let bad = |reason: &str| Error::Precondition(format!("bad class JSON {value}: {reason}"));
        let decode = |key: &str| -> Result<Vec<GroupElement>> {
            let items = match value.get(key) {
                None if key == "prefix" => return Ok(Vec::new()),
                None => return Err(bad("missing period")),
                Some(Value::Array(items)) => items,
                Some(_) => return Err(bad("expected an array")),
            };
            items
                .iter()
                .map(|item| {
                    let coords = match item {
                        Value::Array(cs) => cs.iter().map(json_bigint).collect::<Option<Vec<_>>>(),
                        other => json_bigint(other).map(|c| vec![c]),
                    }
                    .ok_or_else(|| bad("bad coordinates"))?;
                    GroupElement::new(group, coords)
                })
                .collect()
        };
        HClass::new(group, decode("prefix")?, decode("period")?)
    }
}

impl fmt::Display for HClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |es: &[GroupElement]| es.iter().map(|e| e.coords_text()).collect::<Vec<_>>().join(",");
        write!(f, "[{}; ({})^∞]", join(&self.prefix), join(&self.period))
    }
}

impl fmt::Debug for HClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} in {}", self.group)
    }
}
