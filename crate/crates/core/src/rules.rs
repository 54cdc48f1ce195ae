//! Closed catalog of deterministic sequence rules.
//!
//! Rules are data, never code: a scenario file can only pick one of these
//! shapes, so evaluating a rule never executes anything user-supplied.

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::abelian::{GroupElement, GroupRef};
use crate::error::{Error, Result};

/// An integer sequence `n ↦ a_n`.
pub trait IntSequence {
    fn term(&self, n: usize) -> BigInt;

    /// `a_{<n} = a_0 ⋯ a_{n-1}`, with the empty product equal to 1.
    fn partial_product(&self, n: usize) -> BigInt {
        (0..n).fold(BigInt::one(), |acc, l| acc * self.term(l))
    }
}

impl<F: Fn(usize) -> BigInt> IntSequence for F {
    fn term(&self, n: usize) -> BigInt {
        self(n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum IntRule {
    /// `a_n = value`
    Constant {
        #[serde(with = "crate::serde_int")]
        value: BigInt,
    },
    /// `a_n = start + n·step`
    Arithmetic {
        #[serde(with = "crate::serde_int")]
        start: BigInt,
        #[serde(with = "crate::serde_int")]
        step: BigInt,
    },
    /// `a_n = start · ratio^n`
    Geometric {
        #[serde(with = "crate::serde_int")]
        start: BigInt,
        #[serde(with = "crate::serde_int")]
        ratio: BigInt,
    },
    /// `a_n = n + offset`; with offset 1 the partial products are factorials.
    FactorialStep {
        #[serde(default = "one", with = "crate::serde_int")]
        offset: BigInt,
    },
    /// Listed values, then `tail` repeated forever (an empty tail means zeros).
    Table {
        #[serde(with = "crate::serde_int::vec")]
        values: Vec<BigInt>,
        #[serde(default, with = "crate::serde_int::vec")]
        tail: Vec<BigInt>,
    },
}

fn one() -> BigInt {
    BigInt::one()
}

impl IntRule {
    pub fn constant(value: impl Into<BigInt>) -> Self {
        IntRule::Constant {
            value: value.into(),
        }
    }

    pub fn factorial_step() -> Self {
        IntRule::FactorialStep {
            offset: BigInt::one(),
        }
    }

    pub fn table(values: Vec<BigInt>, tail: Vec<BigInt>) -> Self {
        IntRule::Table { values, tail }
    }
}

/// Infimum and supremum of `{a_n : n ≥ from}`; `None` stands for an
/// unbounded side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailBounds {
    pub min: Option<BigInt>,
    pub max: Option<BigInt>,
}

impl TailBounds {
    fn exact(values: impl IntoIterator<Item = BigInt>) -> Self {
        let values: Vec<BigInt> = values.into_iter().collect();
        TailBounds {
            min: values.iter().min().cloned(),
            max: values.iter().max().cloned(),
        }
    }

    /// Both sides finite.
    pub fn is_bounded(&self) -> bool {
        self.min.is_some() && self.max.is_some()
    }
}

impl IntRule {
    /// Tail bounds decided from the rule's shape, not by sampling.
    pub fn tail_bounds(&self, from: usize) -> TailBounds {
        let at = self.term(from);
        let up = |lo: BigInt| TailBounds { min: Some(lo), max: None };
        let down = |hi: BigInt| TailBounds { min: None, max: Some(hi) };
        match self {
            IntRule::Constant { value } => TailBounds::exact([value.clone()]),
            IntRule::Arithmetic { step, .. } => match step.sign() {
                Sign::Plus => up(at),
                Sign::Minus => down(at),
                Sign::NoSign => TailBounds::exact([at]),
            },
            IntRule::Geometric { start, ratio } => {
                if start.is_zero() || ratio.is_zero() {
                    // Only the n = 0 term can be nonzero.
                    TailBounds::exact([at, BigInt::zero()])
                } else if ratio.is_one() {
                    TailBounds::exact([at])
                } else if *ratio == -BigInt::one() {
                    TailBounds::exact([at.clone(), -at])
                } else if ratio.is_negative() {
                    TailBounds { min: None, max: None }
                } else if at.is_positive() {
                    up(at)
                } else {
                    down(at)
                }
            }
            IntRule::FactorialStep { .. } => up(at),
            IntRule::Table { values, tail } => {
                let mut seen: Vec<BigInt> = values.iter().skip(from).cloned().collect();
                if tail.is_empty() {
                    seen.push(BigInt::zero());
                } else {
                    seen.extend(tail.iter().cloned());
                }
                TailBounds::exact(seen)
            }
        }
    }
}

impl IntSequence for IntRule {
    fn term(&self, n: usize) -> BigInt {
        match self {
            IntRule::Constant { value } => value.clone(),
            IntRule::Arithmetic { start, step } => start + step * BigInt::from(n),
            IntRule::Geometric { start, ratio } => start * num_traits::pow(ratio.clone(), n),
            IntRule::FactorialStep { offset } => BigInt::from(n) + offset,
            IntRule::Table { values, tail } => match values.get(n) {
                Some(v) => v.clone(),
                None if tail.is_empty() => BigInt::zero(),
                None => tail[(n - values.len()) % tail.len()].clone(),
            },
        }
    }
}

impl fmt::Display for IntRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntRule::Constant { value } => write!(f, "{value}"),
            IntRule::Arithmetic { start, step } => write!(f, "{start} + {step}n"),
            IntRule::Geometric { start, ratio } => write!(f, "{start}·({ratio})^n"),
            IntRule::FactorialStep { offset } => write!(f, "n + {offset}"),
            IntRule::Table { values, tail } => write!(f, "table {values:?} then {tail:?} repeated"),
        }
    }
}

/// A group-valued sequence `n ↦ scale(n) · base`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementRule {
    /// Coordinates of the base element; defaults to the first generator.
    #[serde(default, with = "crate::serde_int::opt_vec")]
    pub base: Option<Vec<BigInt>>,
    pub scale: IntRule,
}

impl ElementRule {
    pub fn new(base: Vec<BigInt>, scale: IntRule) -> Self {
        ElementRule {
            base: Some(base),
            scale,
        }
    }

    pub fn first_generator(scale: IntRule) -> Self {
        ElementRule { base: None, scale }
    }

    pub fn base_element(&self, group: &GroupRef) -> Result<GroupElement> {
        match &self.base {
            Some(coords) => GroupElement::new(group, coords.clone()),
            None => {
                if group.rank() == 0 {
                    return Err(Error::Precondition(
                        "the trivial group has no first generator".into(),
                    ));
                }
                Ok(crate::abelian::generator(group, 0))
            }
        }
    }

    pub fn element(&self, group: &GroupRef, n: usize) -> Result<GroupElement> {
        Ok(self.base_element(group)?.scale(&self.scale.term(n)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_terms() {
        let b = |x: i64| BigInt::from(x);
        assert_eq!(IntRule::constant(2).term(7), b(2));
        assert_eq!(IntRule::factorial_step().partial_product(5), b(120));
        let geo = IntRule::Geometric {
            start: b(1),
            ratio: b(-1),
        };
        assert_eq!((0..4).map(|n| geo.term(n)).collect::<Vec<_>>(), vec![b(1), b(-1), b(1), b(-1)]);
        let t = IntRule::table(vec![b(7), b(9)], vec![b(1), b(2)]);
        assert_eq!((0..6).map(|n| t.term(n)).collect::<Vec<_>>(), vec![b(7), b(9), b(1), b(2), b(1), b(2)]);
        let arith = IntRule::Arithmetic { start: b(3), step: b(2) };
        assert_eq!(arith.term(4), b(11));
        assert_eq!(arith.tail_bounds(2), TailBounds { min: Some(b(7)), max: None });
        assert_eq!(geo.tail_bounds(3), TailBounds { min: Some(b(-1)), max: Some(b(1)) });
        assert_eq!(t.tail_bounds(1), TailBounds { min: Some(b(1)), max: Some(b(9)) });
        assert_eq!(t.tail_bounds(5), TailBounds { min: Some(b(1)), max: Some(b(2)) });
        assert!(!IntRule::factorial_step().tail_bounds(0).is_bounded());
        let alternating = IntRule::Geometric { start: b(1), ratio: b(-3) };
        assert_eq!(alternating.tail_bounds(0), TailBounds { min: None, max: None });
        assert_eq!(IntRule::constant(5).partial_product(0), b(1));
    }

    #[test]
    fn json_shapes() {
        let r: IntRule = serde_json::from_str(r#"{"factorial_step": {}}"#).unwrap();
        assert_eq!(r, IntRule::factorial_step());
        let r: IntRule = serde_json::from_str(r#"{"constant": {"value": 2}}"#).unwrap();
        assert_eq!(r, IntRule::constant(2));
        assert!(serde_json::from_str::<IntRule>(r#"{"eval": "rm -rf"}"#).is_err());
    }
}
