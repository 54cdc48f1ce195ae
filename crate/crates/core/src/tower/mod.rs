//! Lazy ℕ-indexed towers of pointed sets, their limit threads and chains,
//! and the analyses run on them.

mod analysis;
mod counterexample;
mod poset;
mod thread;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{IntRule, IntSequence};
use crate::smash::{Label, PointedMap, PointedSet};

pub use analysis::{eventual_image_tower, mittag_leffler_index, surjective_up_to, MlIndex};
pub use counterexample::{counterexample_support_data, SupportLevel};
pub use poset::{finite_poset_limit, FiniteDirectedPoset, PosetEdge, PosetLimit};
pub use thread::{ChainRule, LimitChain, LimitThread, ThreadRule, ThreadSpec};

/// Deterministic description of a tower: levels and connecting maps.
pub trait TowerRule: Send + Sync {
    fn level(&self, n: usize) -> Result<PointedSet>;

    /// Assignment of `φ_n: X(n) → X(n-1)` on non-basepoint labels of `X(n)`;
    /// unlisted labels go to the basepoint.
    fn map(&self, n: usize, source: &PointedSet) -> Result<Vec<(Label, Label)>>;
}

struct TowerInner {
    name: String,
    rule: Box<dyn TowerRule>,
    max_level: Option<usize>,
    levels: Mutex<BTreeMap<usize, Arc<PointedSet>>>,
    maps: Mutex<BTreeMap<usize, Arc<PointedMap>>>,
}

/// A shareable handle on a lazily evaluated tower. Levels and maps are
/// memoized on first use; a racing duplicate computation is harmless since
/// rules are deterministic and the first stored value wins.
#[derive(Clone)]
pub struct Tower {
    inner: Arc<TowerInner>,
}

impl Tower {
    pub fn from_rule(name: impl Into<String>, rule: impl TowerRule + 'static, max_level: Option<usize>) -> Tower {
        Tower {
            inner: Arc::new(TowerInner {
                name: name.into(),
                rule: Box::new(rule),
                max_level,
                levels: Mutex::new(BTreeMap::new()),
                maps: Mutex::new(BTreeMap::new()),
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    /// Last level of a truncated tower, `None` when every level exists.
    pub fn max_level(&self) -> Option<usize> {
        self.inner.max_level
    }

    pub fn same_as(&self, other: &Tower) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    fn check_range(&self, n: usize) -> Result<()> {
        match self.inner.max_level {
            Some(max) if n > max => Err(Error::LevelOutOfRange { level: n, max }),
            _ => Ok(()),
        }
    }

    /// `X(n)`.
    pub fn level(&self, n: usize) -> Result<Arc<PointedSet>> {
        self.check_range(n)?;
        if let Some(l) = self.inner.levels.lock().unwrap().get(&n) {
            return Ok(l.clone());
        }
        let computed = Arc::new(self.inner.rule.level(n)?);
        let mut memo = self.inner.levels.lock().unwrap();
        Ok(memo.entry(n).or_insert(computed).clone())
    }

    /// `φ_n: X(n) → X(n-1)` for `n ≥ 1`.
    pub fn map(&self, n: usize) -> Result<Arc<PointedMap>> {
        if n == 0 {
            return Err(Error::Precondition("φ_0 does not exist".into()));
        }
        self.check_range(n)?;
        if let Some(m) = self.inner.maps.lock().unwrap().get(&n) {
            return Ok(m.clone());
        }
        let source = self.level(n)?;
        let target = self.level(n - 1)?;
        let assignment = self.inner.rule.map(n, &source)?;
        let computed = Arc::new(PointedMap::new(&source, &target, assignment)?);
        let mut memo = self.inner.maps.lock().unwrap();
        Ok(memo.entry(n).or_insert(computed).clone())
    }

    /// `φ_{from,to}(label)` for `from ≥ to`.
    pub fn project(&self, from: usize, to: usize, label: &Label) -> Result<Label> {
        if to > from {
            return Err(Error::Precondition(format!("cannot project from level {from} up to {to}")));
        }
        if !self.level(from)?.contains(label) {
            return Err(Error::CarrierMismatch(format!("{label} is not in X({from})")));
        }
        let mut l = label.clone();
        for n in (to + 1..=from).rev() {
            if l.is_base() {
                break;
            }
            l = self.map(n)?.apply(&l);
        }
        Ok(l)
    }

    /// The composite `X(from) → X(to)`.
    pub fn composite(&self, from: usize, to: usize) -> Result<PointedMap> {
        let mut map = PointedMap::identity(&self.level(from)?);
        for n in (to + 1..=from).rev() {
            map = map.then(self.map(n)?.as_ref())?;
        }
        Ok(map)
    }
}

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tower({})", self.inner.name)
    }
}

struct Canonical;

impl TowerRule for Canonical {
    fn level(&self, n: usize) -> Result<PointedSet> {
        Ok(PointedSet::naturals(n as u64 + 1))
    }

    fn map(&self, n: usize, _: &PointedSet) -> Result<Vec<(Label, Label)>> {
        Ok((0..n as u64).map(|k| (Label::Nat(k), Label::Nat(k))).collect())
    }
}

/// `X(n) = {*, 0, …, n}`, `φ_n` fixing `0..n-1` and sending `n` to `*`.
pub fn canonical_tower() -> Tower {
    Tower::from_rule("canonical", Canonical, None)
}

/// The same set at every level, with one self-map as every `φ_n`.
struct Periodic {
    set: PointedSet,
    assignment: Vec<(Label, Label)>,
}

impl TowerRule for Periodic {
    fn level(&self, _: usize) -> Result<PointedSet> {
        Ok(self.set.clone())
    }

    fn map(&self, _: usize, _: &PointedSet) -> Result<Vec<(Label, Label)>> {
        Ok(self.assignment.clone())
    }
}

/// Every level is `labels₊` and every map the given self-map.
pub fn periodic_tower(
    name: impl Into<String>,
    labels: impl IntoIterator<Item = Label>,
    assignment: impl IntoIterator<Item = (Label, Label)>,
) -> Result<Tower> {
    let set = Arc::new(PointedSet::new(labels)?);
    let map = PointedMap::new(&set, &set, assignment)?;
    Ok(Tower::from_rule(
        name,
        Periodic {
            set: set.as_ref().clone(),
            assignment: map.assignment().iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        },
        None,
    ))
}

/// Identity maps on a fixed set.
pub fn constant_tower(labels: impl IntoIterator<Item = Label>) -> Result<Tower> {
    let labels: Vec<Label> = labels.into_iter().collect();
    let identity: Vec<(Label, Label)> = labels.iter().map(|l| (l.clone(), l.clone())).collect();
    periodic_tower("constant", labels, identity)
}

/// `{*, 0, …, size-1}` with `k ↦ k-1` and `0 ↦ *` at every level.
pub fn shift_tower(size: u64) -> Tower {
    let assignment = (1..size).map(|k| (Label::Nat(k), Label::Nat(k - 1)));
    periodic_tower("shift", (0..size).map(Label::Nat), assignment).expect("shift data is valid")
}

/// Labels are born over time and never die: `X(n)` holds the first `B_n`
/// naturals with `B_n = Σ_{l≤n} births(l)`; `φ_n` fixes the old labels and
/// sends the newborn ones to `*`. Births constant 1 give the canonical tower.
struct Growing {
    births: IntRule,
}

impl Growing {
    fn alive(&self, n: usize) -> Result<u64> {
        (0..=n).try_fold(0u64, |acc, l| {
            let b = u64::try_from(self.births.term(l))
                .map_err(|_| Error::Precondition(format!("births at level {l} must be a small non-negative integer")))?;
            Ok(acc + b)
        })
    }
}

impl TowerRule for Growing {
    fn level(&self, n: usize) -> Result<PointedSet> {
        Ok(PointedSet::naturals(self.alive(n)?))
    }

    fn map(&self, n: usize, _: &PointedSet) -> Result<Vec<(Label, Label)>> {
        let old = self.alive(n - 1)?;
        Ok((0..old).map(|k| (Label::Nat(k), Label::Nat(k))).collect())
    }
}

pub fn growing_tower(births: IntRule) -> Tower {
    Tower::from_rule("growing", Growing { births }, None)
}

/// Materialized levels `0..=depth`; `maps[n-1]` is `φ_n`.
struct Custom {
    levels: Vec<PointedSet>,
    maps: Vec<Vec<(Label, Label)>>,
}

impl TowerRule for Custom {
    fn level(&self, n: usize) -> Result<PointedSet> {
        Ok(self.levels[n].clone())
    }

    fn map(&self, n: usize, _: &PointedSet) -> Result<Vec<(Label, Label)>> {
        Ok(self.maps[n - 1].clone())
    }
}

/// A tower truncated at `levels.len() - 1`; asking beyond it is an error.
pub fn custom_tower(
    name: impl Into<String>,
    levels: Vec<PointedSet>,
    maps: Vec<Vec<(Label, Label)>>,
) -> Result<Tower> {
    if levels.is_empty() {
        return Err(Error::Precondition("a custom tower needs at least level 0".into()));
    }
    if maps.len() + 1 != levels.len() {
        return Err(Error::Precondition(format!(
            "{} levels need {} maps, got {}",
            levels.len(),
            levels.len() - 1,
            maps.len()
        )));
    }
    let max = levels.len() - 1;
    let tower = Tower::from_rule(name, Custom { levels, maps }, Some(max));
    // Surface malformed maps now instead of at first query.
    for n in 1..=max {
        tower.map(n)?;
    }
    Ok(tower)
}

/// Scenario-level description of a tower builder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum TowerSpec {
    Canonical,
    Constant {
        labels: Vec<Label>,
    },
    Shift {
        size: u64,
    },
    Growing {
        births: IntRule,
    },
    Periodic {
        labels: Vec<Label>,
        map: BTreeMap<Label, Label>,
    },
    Custom {
        levels: Vec<Vec<Label>>,
        /// `maps[n-1]` is `φ_n`; unlisted labels go to `*`.
        maps: Vec<BTreeMap<Label, Label>>,
    },
}

impl TowerSpec {
    pub fn build(&self) -> Result<Tower> {
        match self {
            TowerSpec::Canonical => Ok(canonical_tower()),
            TowerSpec::Constant { labels } => constant_tower(labels.iter().cloned()),
            TowerSpec::Shift { size } => Ok(shift_tower(*size)),
            TowerSpec::Growing { births } => Ok(growing_tower(births.clone())),
            TowerSpec::Periodic { labels, map } => periodic_tower(
                "periodic",
                labels.iter().cloned(),
                map.iter().map(|(k, v)| (k.clone(), v.clone())),
            ),
            TowerSpec::Custom { levels, maps } => {
                let levels = levels
                    .iter()
                    .map(|ls| PointedSet::new(ls.iter().cloned()))
                    .collect::<Result<Vec<_>>>()?;
                let maps = maps
                    .iter()
                    .map(|m| m.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
                    .collect();
                custom_tower("custom", levels, maps)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_levels_and_maps() {
        let x = canonical_tower();
        assert_eq!(x.level(0).unwrap().to_string(), "{*,0}");
        assert_eq!(x.level(3).unwrap().to_string(), "{*,0,1,2,3}");
        let phi = x.map(3).unwrap();
        assert_eq!(phi.apply(&Label::Nat(3)), Label::Base);
        for k in 0..3 {
            assert_eq!(phi.apply(&Label::Nat(k)), Label::Nat(k));
        }
        assert_eq!(x.project(7, 2, &Label::Nat(1)).unwrap(), Label::Nat(1));
        assert_eq!(x.project(7, 2, &Label::Nat(5)).unwrap(), Label::Base);
    }

    #[test]
    fn memo_is_stable() {
        let x = canonical_tower();
        let a = x.level(5).unwrap();
        let b = x.level(5).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(*a, Canonical.level(5).unwrap());
    }

    #[test]
    fn growing_with_unit_births_is_canonical() {
        let g = growing_tower(IntRule::constant(1));
        let c = canonical_tower();
        for n in 0..10 {
            assert_eq!(*g.level(n).unwrap(), *c.level(n).unwrap());
            if n > 0 {
                assert_eq!(*g.map(n).unwrap(), *c.map(n).unwrap());
            }
        }
    }

    #[test]
    fn custom_is_truncated() {
        let spec: TowerSpec = serde_json::from_str(
            r#"{"builder": "custom", "levels": [["a"], ["a", "b"]], "maps": [{"a": "a"}]}"#,
        )
        .unwrap();
        let x = spec.build().unwrap();
        assert_eq!(x.map(1).unwrap().apply(&"b".into()), Label::Base);
        assert!(matches!(x.level(2), Err(Error::LevelOutOfRange { level: 2, max: 1 })));
        let bad: TowerSpec = serde_json::from_str(
            r#"{"builder": "custom", "levels": [["a"], ["b"]], "maps": [{"b": "zz"}]}"#,
        )
        .unwrap();
        assert!(bad.build().is_err());
    }
}
