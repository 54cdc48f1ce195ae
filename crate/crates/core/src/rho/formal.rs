//! Formal sums `Σ x_k v_k` in `(lim X)∧A` and the map `ρ` into `lim (X∧A)`.

use std::fmt;

use crate::abelian::{GroupElement, GroupRef};
use crate::error::{Error, Result};
use crate::smash::{Label, SmashElement};
use crate::tower::{ChainRule, LimitChain, LimitThread, Tower};

/// A finite sum of distinct non-basepoint threads with nonzero coefficients,
/// kept sorted by birth level and then by label.
#[derive(Clone)]
pub struct FormalSum {
    tower: Tower,
    group: GroupRef,
    terms: Vec<(LimitThread, GroupElement)>,
    probe: usize,
}

impl FormalSum {
    /// Distinctness and non-triviality of threads are certified within `probe`
    /// levels; a pair that cannot be separated there is rejected.
    pub fn new(tower: &Tower, group: &GroupRef, terms: Vec<(LimitThread, GroupElement)>, probe: usize) -> Result<Self> {
        let mut keyed = Vec::with_capacity(terms.len());
        for (x, v) in terms {
            if !x.tower().same_as(tower) {
                return Err(Error::InvalidFormalSum(format!("thread {} lives on another tower", x.describe())));
            }
            if v.group() != group {
                return Err(Error::GroupMismatch {
                    left: v.group().to_string(),
                    right: group.to_string(),
                });
            }
            if v.is_zero() {
                return Err(Error::InvalidFormalSum(format!("coefficient of {} is zero", x.describe())));
            }
            let key = x.key(probe)?;
            if key.0 == usize::MAX {
                return Err(Error::InvalidFormalSum(format!(
                    "thread {} stays at * up to level {probe}",
                    x.describe()
                )));
            }
            keyed.push((key, x, v));
        }
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = keyed.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidFormalSum(format!(
                "threads {} and {} agree up to level {probe}",
                w[0].1.describe(),
                w[1].1.describe()
            )));
        }
        Ok(FormalSum {
            tower: tower.clone(),
            group: group.clone(),
            terms: keyed.into_iter().map(|(_, x, v)| (x, v)).collect(),
            probe,
        })
    }

    pub fn empty(tower: &Tower, group: &GroupRef) -> Self {
        FormalSum {
            tower: tower.clone(),
            group: group.clone(),
            terms: Vec::new(),
            probe: 0,
        }
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn terms(&self) -> &[(LimitThread, GroupElement)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn probe(&self) -> usize {
        self.probe
    }

    /// Term-by-term equality: same coefficients, threads agreeing up to `depth`.
    pub fn agrees_with(&self, other: &FormalSum, depth: usize) -> Result<bool> {
        if self.terms.len() != other.terms.len() || self.group != other.group {
            return Ok(false);
        }
        for ((x, v), (y, w)) in self.terms.iter().zip(&other.terms) {
            if v != w || !x.agrees_with(y, depth)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `ρ(Σ x_k v_k)(n) = Σ x_k(n) v_k`.
    pub fn rho_apply(&self, n: usize) -> Result<SmashElement> {
        let carrier = self.tower.level(n)?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (x, v) in &self.terms {
            terms.push((x.value(n)?, v.clone()));
        }
        SmashElement::new(&carrier, &self.group, terms)
    }

    /// `ρ` of this sum as a lazily evaluated chain.
    pub fn rho_image(&self) -> LimitChain {
        LimitChain::new(&self.tower, &self.group, RhoRule { sum: self.clone() })
    }

    /// Text form `x_1·v_1 + …` using the thread descriptions.
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(x, v)| format!("[{}]*{}", x.describe(), v.coords_text()))
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Debug for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {}", self.to_text(), self.group)
    }
}

struct RhoRule {
    sum: FormalSum,
}

impl ChainRule for RhoRule {
    fn value(&self, _: &Tower, _: &GroupRef, n: usize) -> Result<SmashElement> {
        self.sum.rho_apply(n)
    }

    fn describe(&self) -> String {
        format!("ρ({})", self.sum.to_text())
    }
}

/// Least level `t ≤ depth` at which `*, x_1(t), …, x_m(t)` are pairwise
/// distinct; there `ρ(sum)(t)` has exactly `m` nonzero entries.
pub fn injectivity_witness(sum: &FormalSum, depth: usize) -> Result<usize> {
    if sum.is_empty() {
        return Err(Error::InvalidFormalSum("the zero sum has no separating level".into()));
    }
    for t in 0..=depth {
        let mut seen: Vec<Label> = Vec::with_capacity(sum.len());
        let mut separated = true;
        for (x, _) in sum.terms() {
            let l = x.value(t)?;
            if l.is_base() || seen.contains(&l) {
                separated = false;
                break;
            }
            seen.push(l);
        }
        if separated {
            let image = sum.rho_apply(t)?;
            if image.support_size() != sum.len() {
                return Err(Error::InvariantViolation {
                    invariant: "separated threads give a full-support image".into(),
                    level: t,
                    detail: format!("ρ = {image} has {} entries for {} terms", image.support_size(), sum.len()),
                });
            }
            return Ok(t);
        }
    }
    Err(Error::NoWitness { depth })
}
