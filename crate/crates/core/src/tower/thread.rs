//! Elements of `lim X` (threads) and of `lim (X∧A)` (chains).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::Tower;
use crate::abelian::{GroupElement, GroupRef};
use crate::error::{Error, Result};
use crate::smash::{pushforward, Label, SmashElement};

/// Deterministic rule `n ↦ x(n)`.
pub trait ThreadRule: Send + Sync {
    fn value(&self, tower: &Tower, n: usize) -> Result<Label>;
    fn describe(&self) -> String;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ThreadSpec {
    /// The basepoint thread `*`.
    Base,
    /// `label` from level `birth` on, `*` below.
    Born { label: Label, birth: usize },
    /// The same label at every level.
    Constant { label: Label },
    /// Pushdown of `label ∈ X(level)`; only defined up to `level`.
    FromTop { level: usize, label: Label },
    /// Explicit values `x(0), x(1), …`; only defined on the listed levels.
    Table { values: Vec<Label> },
}

impl ThreadSpec {
    /// `thread(k)` on the canonical tower.
    pub fn canonical(k: u64) -> ThreadSpec {
        ThreadSpec::Born {
            label: Label::Nat(k),
            birth: k as usize,
        }
    }
}

impl ThreadRule for ThreadSpec {
    fn value(&self, tower: &Tower, n: usize) -> Result<Label> {
        match self {
            ThreadSpec::Base => Ok(Label::Base),
            ThreadSpec::Born { label, birth } => Ok(if n >= *birth { label.clone() } else { Label::Base }),
            ThreadSpec::Constant { label } => Ok(label.clone()),
            ThreadSpec::FromTop { level, label } => {
                if n > *level {
                    return Err(Error::LevelOutOfRange { level: n, max: *level });
                }
                tower.project(*level, n, label)
            }
            ThreadSpec::Table { values } => values.get(n).cloned().ok_or(Error::LevelOutOfRange {
                level: n,
                max: values.len().saturating_sub(1),
            }),
        }
    }

    fn describe(&self) -> String {
        match self {
            ThreadSpec::Base => "*".into(),
            ThreadSpec::Born { label, birth } => format!("{label}@{birth}"),
            ThreadSpec::Constant { label } => format!("const {label}"),
            ThreadSpec::FromTop { level, label } => format!("pushdown of {label} from {level}"),
            ThreadSpec::Table { values } => format!("table of {} levels", values.len()),
        }
    }
}

/// A thread of `lim X`. Compatibility `φ_n(x(n)) = x(n-1)` is checked every
/// time a level is queried.
#[derive(Clone)]
pub struct LimitThread {
    tower: Tower,
    rule: Arc<dyn ThreadRule>,
    memo: Arc<Mutex<BTreeMap<usize, Label>>>,
}

impl LimitThread {
    pub fn new(tower: &Tower, rule: impl ThreadRule + 'static) -> Self {
        LimitThread {
            tower: tower.clone(),
            rule: Arc::new(rule),
            memo: Arc::default(),
        }
    }

    pub fn from_spec(tower: &Tower, spec: ThreadSpec) -> Self {
        Self::new(tower, spec)
    }

    /// `thread(k)`: `k` from level `k` on.
    pub fn canonical(tower: &Tower, k: u64) -> Self {
        Self::new(tower, ThreadSpec::canonical(k))
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn describe(&self) -> String {
        self.rule.describe()
    }

    fn raw(&self, n: usize) -> Result<Label> {
        if let Some(l) = self.memo.lock().unwrap().get(&n) {
            return Ok(l.clone());
        }
        let l = self.rule.value(&self.tower, n)?;
        if !self.tower.level(n)?.contains(&l) {
            return Err(Error::IncompatibleThread {
                level: n,
                reason: format!("{l} is not in X({n})"),
            });
        }
        Ok(self.memo.lock().unwrap().entry(n).or_insert(l).clone())
    }

    /// `x(n)`, checked against `x(n-1)`.
    pub fn value(&self, n: usize) -> Result<Label> {
        let l = self.raw(n)?;
        if n > 0 {
            let below = self.raw(n - 1)?;
            let image = self.tower.map(n)?.apply(&l);
            if image != below {
                return Err(Error::IncompatibleThread {
                    level: n,
                    reason: format!("φ_{n}({l}) = {image} but x({}) = {below}", n - 1),
                });
            }
        }
        Ok(l)
    }

    /// Checks every level `≤ depth`.
    pub fn check(&self, depth: usize) -> Result<()> {
        (0..=depth).try_for_each(|n| self.value(n).map(drop))
    }

    /// First level where the thread leaves the basepoint; it never returns.
    pub fn birth(&self, probe: usize) -> Result<Option<usize>> {
        for n in 0..=probe {
            if !self.value(n)?.is_base() {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    pub fn values(&self, depth: usize) -> Result<Vec<Label>> {
        (0..=depth).map(|n| self.value(n)).collect()
    }

    /// Canonical ordering key: birth level (unborn threads last), then values.
    pub fn key(&self, probe: usize) -> Result<(usize, Vec<Label>)> {
        let birth = self.birth(probe)?.unwrap_or(usize::MAX);
        Ok((birth, self.values(probe)?))
    }

    pub fn agrees_with(&self, other: &LimitThread, depth: usize) -> Result<bool> {
        for n in 0..=depth {
            if self.value(n)? != other.value(n)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Debug for LimitThread {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Thread({} on {})", self.rule.describe(), self.tower.name())
    }
}

/// Deterministic rule `n ↦ h(n) ∈ X(n)∧A`.
pub trait ChainRule: Send + Sync {
    fn value(&self, tower: &Tower, group: &GroupRef, n: usize) -> Result<SmashElement>;
    fn describe(&self) -> String;
}

struct FnChain<F> {
    name: String,
    f: F,
}

impl<F> ChainRule for FnChain<F>
where
    F: Fn(usize) -> Result<SmashElement> + Send + Sync,
{
    fn value(&self, _: &Tower, _: &GroupRef, n: usize) -> Result<SmashElement> {
        (self.f)(n)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// A chain of `lim (X∧A)`. Compatibility `φ_n(h(n)) = h(n-1)` is checked every
/// time a level is queried.
#[derive(Clone)]
pub struct LimitChain {
    tower: Tower,
    group: GroupRef,
    rule: Arc<dyn ChainRule>,
    memo: Arc<Mutex<BTreeMap<usize, SmashElement>>>,
}

impl LimitChain {
    pub fn new(tower: &Tower, group: &GroupRef, rule: impl ChainRule + 'static) -> Self {
        LimitChain {
            tower: tower.clone(),
            group: group.clone(),
            rule: Arc::new(rule),
            memo: Arc::default(),
        }
    }

    pub fn from_fn<F>(tower: &Tower, group: &GroupRef, name: impl Into<String>, f: F) -> Self
    where
        F: Fn(usize) -> Result<SmashElement> + Send + Sync + 'static,
    {
        Self::new(tower, group, FnChain { name: name.into(), f })
    }

    pub fn zero(tower: &Tower, group: &GroupRef) -> Self {
        let (t, g) = (tower.clone(), group.clone());
        Self::from_fn(tower, group, "0", move |n| Ok(SmashElement::zero(&t.level(n)?, &g)))
    }

    /// `h(n) = Σ_{l ∈ X(n)∖{*}} l·entry(l)`. Compatible on towers whose maps
    /// fix surviving labels, such as the canonical and growing towers.
    pub fn from_label_entries<F>(tower: &Tower, group: &GroupRef, name: impl Into<String>, entry: F) -> Self
    where
        F: Fn(&Label) -> GroupElement + Send + Sync + 'static,
    {
        let (t, g) = (tower.clone(), group.clone());
        Self::from_fn(tower, group, name, move |n| {
            let carrier = t.level(n)?;
            let terms: Vec<(Label, GroupElement)> = carrier.non_base().map(|l| (l.clone(), entry(l))).collect();
            SmashElement::new(&carrier, &g, terms)
        })
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn describe(&self) -> String {
        self.rule.describe()
    }

    fn raw(&self, n: usize) -> Result<SmashElement> {
        if let Some(y) = self.memo.lock().unwrap().get(&n) {
            return Ok(y.clone());
        }
        let y = self.rule.value(&self.tower, &self.group, n)?;
        if y.group() != &self.group {
            return Err(Error::GroupMismatch {
                left: y.group().to_string(),
                right: self.group.to_string(),
            });
        }
        let carrier = self.tower.level(n)?;
        let y = y.recarry(&carrier).map_err(|e| Error::IncompatibleChain {
            level: n,
            reason: e.to_string(),
        })?;
        Ok(self.memo.lock().unwrap().entry(n).or_insert(y).clone())
    }

    /// `h(n)`, checked against `h(n-1)`.
    pub fn value(&self, n: usize) -> Result<SmashElement> {
        let y = self.raw(n)?;
        if n > 0 {
            let below = self.raw(n - 1)?;
            let image = pushforward(self.tower.map(n)?.as_ref(), &y)?;
            if image != below {
                return Err(Error::IncompatibleChain {
                    level: n,
                    reason: format!("φ_{n}(h({n})) = {image} but h({}) = {below}", n - 1),
                });
            }
        }
        Ok(y)
    }

    pub fn check(&self, depth: usize) -> Result<()> {
        (0..=depth).try_for_each(|n| self.value(n).map(drop))
    }

    /// `|h(n)|` for `n ≤ depth`.
    pub fn support_sizes(&self, depth: usize) -> Result<Vec<usize>> {
        (0..=depth).map(|n| Ok(self.value(n)?.support_size())).collect()
    }
}

impl fmt::Debug for LimitChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chain({} on {} over {})", self.rule.describe(), self.tower.name(), self.group)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::{canonical_tower, constant_tower};

    #[test]
    fn canonical_threads_are_compatible() {
        let x = canonical_tower();
        for k in 0..6 {
            let t = LimitThread::canonical(&x, k);
            t.check(50).unwrap();
            assert_eq!(t.birth(50).unwrap(), Some(k as usize));
            assert_eq!(t.value(k as usize + 3).unwrap(), Label::Nat(k));
        }
    }

    #[test]
    fn broken_thread_is_caught() {
        let x = canonical_tower();
        // 2 at every level is not in X(0), X(1).
        let t = LimitThread::new(&x, ThreadSpec::Constant { label: Label::Nat(2) });
        assert!(matches!(t.value(0), Err(Error::IncompatibleThread { level: 0, .. })));
        // Table jumping between labels.
        let t = LimitThread::new(
            &x,
            ThreadSpec::Table {
                values: vec![Label::Nat(0), Label::Nat(1)],
            },
        );
        assert!(matches!(t.value(1), Err(Error::IncompatibleThread { level: 1, .. })));
    }

    #[test]
    fn from_top_pushes_down() {
        let x = canonical_tower();
        let t = LimitThread::new(&x, ThreadSpec::FromTop { level: 4, label: Label::Nat(2) });
        assert_eq!(t.values(4).unwrap(), vec![Label::Base, Label::Base, Label::Nat(2), Label::Nat(2), Label::Nat(2)]);
        assert!(t.value(5).is_err());
    }

    #[test]
    fn chain_compatibility() {
        let x = canonical_tower();
        let z: GroupRef = Arc::new("Z".parse().unwrap());
        let zz = z.clone();
        let h = LimitChain::from_label_entries(&x, &z, "ones", move |_| crate::abelian::generator(&zz, 0));
        h.check(20).unwrap();
        assert_eq!(h.support_sizes(3).unwrap(), vec![1, 2, 3, 4]);

        let (xx, zz) = (x.clone(), z.clone());
        let bad = LimitChain::from_fn(&x, &z, "bad", move |n| {
            let c = xx.level(n)?;
            SmashElement::single(&c, Label::Nat(0), GroupElement::from_ints(&zz, &[n as i64 + 1])?)
        });
        assert!(matches!(bad.value(2), Err(Error::IncompatibleChain { level: 2, .. })));
        let y = constant_tower([Label::name("a")]).unwrap();
        LimitChain::zero(&y, &z).check(5).unwrap();
    }
}
