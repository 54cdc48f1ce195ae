//! Division of a chain by `m` away from finitely many threads.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use serde::Serialize;

use crate::abelian::{GroupElement, GroupRef};
use crate::error::{Error, Result};
use crate::smash::{pushforward, Label, SmashElement};
use crate::tower::{ChainRule, LimitChain, LimitThread, Tower};

/// One fiber `W_s` of the recursion at a level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassRecord {
    /// The label `s` below; `*` for the basepoint fiber and at level 0.
    pub over: Label,
    pub members: Vec<Label>,
    /// `a_0`, absent when no balancing is needed (basepoint fiber, level 0).
    pub anchor: Option<Label>,
    /// Whether `a_0` was taken among the thread labels.
    pub anchor_on_thread: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelRecord {
    pub level: usize,
    pub classes: Vec<ClassRecord>,
    /// `supp(m·g(n) − h(n))`.
    pub defect: Vec<Label>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RecursionTrace {
    pub levels: Vec<LevelRecord>,
}

/// The non-basepoint labels `{x_1(n), …}`.
pub(crate) fn thread_labels<'a>(xs: impl IntoIterator<Item = &'a LimitThread>, n: usize) -> Result<BTreeSet<Label>> {
    let mut out = BTreeSet::new();
    for x in xs {
        let l = x.value(n)?;
        if !l.is_base() {
            out.insert(l);
        }
    }
    Ok(out)
}

struct State {
    levels: Vec<SmashElement>,
    trace: Vec<LevelRecord>,
}

struct Divide {
    h: LimitChain,
    m: BigInt,
    xs: Vec<LimitThread>,
    state: Mutex<State>,
}

impl Divide {
    fn divide(&self, level: usize, label: &Label, v: &GroupElement) -> Result<GroupElement> {
        v.divide(&self.m).ok_or_else(|| Error::DivisionFailure {
            level,
            label: label.clone(),
            divisor: self.m.clone(),
        })
    }

    fn step(&self, tower: &Tower, group: &GroupRef, n: usize, below: Option<&SmashElement>) -> Result<(SmashElement, LevelRecord)> {
        let hn = self.h.value(n)?;
        let marks = thread_labels(&self.xs, n)?;
        let carrier = tower.level(n)?;
        let mut entries: Vec<(Label, GroupElement)> = Vec::new();
        let mut classes = Vec::new();

        let Some(below) = below else {
            for (a, v) in hn.entries() {
                if !marks.contains(a) {
                    entries.push((a.clone(), self.divide(n, a, v)?));
                }
            }
            let g = SmashElement::new(&carrier, group, entries)?;
            let record = self.record(n, classes, &g, &hn)?;
            return Ok((g, record));
        };

        let phi = tower.map(n)?;
        let mut fibers: BTreeMap<Label, Vec<Label>> = BTreeMap::new();
        for a in hn.entries().keys().chain(&marks) {
            let members = fibers.entry(phi.apply(a)).or_default();
            if !members.contains(a) {
                members.push(a.clone());
            }
        }
        for (s, mut w) in fibers {
            w.sort();
            let on_thread = w.iter().find(|a| marks.contains(*a)).cloned();
            let anchor = if s.is_base() {
                None
            } else {
                on_thread.clone().or_else(|| w.first().cloned())
            };
            let mut balance = below.coefficient(&s);
            for a in &w {
                if Some(a) == anchor.as_ref() || marks.contains(a) {
                    continue;
                }
                let q = self.divide(n, a, &hn.coefficient(a))?;
                balance = &balance - &q;
                entries.push((a.clone(), q));
            }
            if let Some(a0) = &anchor {
                entries.push((a0.clone(), balance));
            }
            classes.push(ClassRecord {
                over: s,
                members: w,
                anchor_on_thread: anchor.is_some() && on_thread == anchor,
                anchor,
            });
        }
        // Labels below with g(n-1)_s ≠ 0 but empty fiber would break (1); the
        // inductive hypothesis (3) rules this out and the check below confirms it.
        let g = SmashElement::new(&carrier, group, entries)?;
        let record = self.record(n, classes, &g, &hn)?;
        Ok((g, record))
    }

    fn record(&self, n: usize, classes: Vec<ClassRecord>, g: &SmashElement, hn: &SmashElement) -> Result<LevelRecord> {
        let defect = g.scalar_mul(&self.m).sub(hn)?.support().into_iter().collect();
        Ok(LevelRecord { level: n, classes, defect })
    }
}

impl ChainRule for Divide {
    fn value(&self, tower: &Tower, group: &GroupRef, n: usize) -> Result<SmashElement> {
        let mut state = self.state.lock().unwrap();
        while state.levels.len() <= n {
            let level = state.levels.len();
            let (g, record) = self.step(tower, group, level, state.levels.last())?;
            state.levels.push(g);
            state.trace.push(record);
        }
        Ok(state.levels[n].clone())
    }

    fn describe(&self) -> String {
        format!("({})/{}", self.h.describe(), self.m)
    }
}

/// A chain `g` with `m·[g] = [h]` and the choices that produced it.
#[derive(Clone, Debug)]
pub struct DivisionOutcome {
    pub g: LimitChain,
    pub trace: RecursionTrace,
}

/// Builds `g` level by level, dividing every entry of `h` off the threads and
/// balancing each fiber at an anchor. Levels up to `depth` are built and
/// checked against the three recursion invariants; `g` stays lazy beyond.
pub fn divide_off_finite(h: &LimitChain, m: &BigInt, xs: &[LimitThread], depth: usize) -> Result<DivisionOutcome> {
    if *m < BigInt::from(2) {
        return Err(Error::Precondition(format!("the divisor must be at least 2, got {m}")));
    }
    if let Some(x) = xs.iter().find(|x| !x.tower().same_as(h.tower())) {
        return Err(Error::Precondition(format!("thread {} lives on another tower", x.describe())));
    }
    let rule = Arc::new(Divide {
        h: h.clone(),
        m: m.clone(),
        xs: xs.to_vec(),
        state: Mutex::new(State {
            levels: Vec::new(),
            trace: Vec::new(),
        }),
    });
    let g = LimitChain::new(h.tower(), h.group(), Shared(rule.clone()));
    verify_division(h, m, xs, &g, depth)?;
    let trace = RecursionTrace {
        levels: rule.state.lock().unwrap().trace[..=depth].to_vec(),
    };
    Ok(DivisionOutcome { g, trace })
}

/// The case without exceptional threads: `m·g = h` exactly.
pub fn divide_everywhere(h: &LimitChain, m: &BigInt, depth: usize) -> Result<LimitChain> {
    let out = divide_off_finite(h, m, &[], depth)?;
    for n in 0..=depth {
        if out.g.value(n)?.scalar_mul(m) != h.value(n)? {
            return Err(Error::InvariantViolation {
                invariant: "m·g = h".into(),
                level: n,
                detail: format!("m·g({n}) differs from h({n})"),
            });
        }
    }
    Ok(out.g)
}

/// Checks, from the outputs alone, at every `n ≤ depth`:
/// (1) `φ_n(g(n)) = g(n-1)`; (2) `supp(m·g(n) − h(n)) ⊆ {x_i(n)}`;
/// (3) `supp(g(n)) ⊆ supp(h(n)) ∪ {x_i(n)}`.
pub fn verify_division(h: &LimitChain, m: &BigInt, xs: &[LimitThread], g: &LimitChain, depth: usize) -> Result<()> {
    let tower = h.tower();
    let mut below: Option<SmashElement> = None;
    for n in 0..=depth {
        let gn = g.value(n)?;
        let hn = h.value(n)?;
        let marks = thread_labels(xs, n)?;
        let fail = |invariant: &str, detail: String| Error::InvariantViolation {
            invariant: invariant.into(),
            level: n,
            detail,
        };
        if let Some(prev) = &below {
            let image = pushforward(tower.map(n)?.as_ref(), &gn)?;
            if &image != prev {
                return Err(fail("(1) compatibility", format!("φ(g({n})) = {image}, g({}) = {prev}", n - 1)));
            }
        }
        let defect = gn.scalar_mul(m).sub(&hn)?;
        if let Some(a) = defect.support().into_iter().find(|a| !marks.contains(a)) {
            return Err(fail("(2) defect on threads", format!("m·g − h is nonzero at {a}")));
        }
        let hs = hn.support();
        if let Some(a) = gn.support().into_iter().find(|a| !hs.contains(a) && !marks.contains(a)) {
            return Err(fail("(3) support", format!("g is nonzero at {a} outside supp(h) and the threads")));
        }
        below = Some(gn);
    }
    Ok(())
}

/// Lets the outcome keep a handle on the recursion state after the chain
/// takes ownership of its rule.
struct Shared<R>(Arc<R>);

impl<R: ChainRule> ChainRule for Shared<R> {
    fn value(&self, tower: &Tower, group: &GroupRef, n: usize) -> Result<SmashElement> {
        self.0.value(tower, group, n)
    }

    fn describe(&self) -> String {
        self.0.describe()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::generator;
    use crate::smash::PointedSet;
    use crate::tower::canonical_tower;

    fn grp(s: &str) -> GroupRef {
        Arc::new(s.parse().unwrap())
    }

    fn constant(g: &GroupRef, c: i64) -> LimitChain {
        let gg = g.clone();
        LimitChain::from_label_entries(&canonical_tower(), g, format!("all {c}"), move |_| generator(&gg, 0).scale_i64(c))
    }

    #[test]
    fn divides_everywhere() {
        let z = grp("Z");
        let g = divide_everywhere(&constant(&z, 4), &BigInt::from(2), 10).unwrap();
        assert_eq!(g.value(3).unwrap().to_text(), "0*2 + 1*2 + 2*2 + 3*2");

        let z4 = grp("Z/4");
        let g = divide_everywhere(&constant(&z4, 2), &BigInt::from(2), 10).unwrap();
        assert!(g.value(10).unwrap().entries().values().all(|v| v.coords()[0] == BigInt::from(1)));

        let zero = LimitChain::zero(&canonical_tower(), &z);
        assert!(divide_everywhere(&zero, &BigInt::from(3), 5).unwrap().value(5).unwrap().is_zero());
    }

    #[test]
    fn odd_entry_needs_a_thread() {
        let z = grp("Z");
        let x = canonical_tower();
        let zz = z.clone();
        let h = LimitChain::from_label_entries(&x, &z, "1,2,2,…", move |l| {
            let c = if *l == Label::Nat(0) { 1 } else { 2 };
            GroupElement::from_ints(&zz, &[c]).unwrap()
        });
        let two = BigInt::from(2);
        let err = divide_everywhere(&h, &two, 5).unwrap_err();
        assert_eq!(
            err,
            Error::DivisionFailure {
                level: 0,
                label: Label::Nat(0),
                divisor: two.clone()
            }
        );
        let out = divide_off_finite(&h, &two, &[LimitThread::canonical(&x, 0)], 10).unwrap();
        assert!(out.trace.levels.iter().all(|r| r.defect == vec![Label::Nat(0)]));
        let again = divide_off_finite(&h, &two, &[LimitThread::canonical(&x, 0)], 10).unwrap();
        assert_eq!(out.trace, again.trace);
    }

    #[test]
    fn anchors_balance_merging_fibers() {
        let z = grp("Z");
        let (a, b, c) = (Label::name("a"), Label::name("b"), Label::name("c"));
        let x = crate::tower::custom_tower(
            "fold",
            vec![
                PointedSet::new([a.clone()]).unwrap(),
                PointedSet::new([a.clone(), b.clone(), c.clone()]).unwrap(),
            ],
            vec![vec![(a.clone(), a.clone()), (b.clone(), a.clone()), (c.clone(), a.clone())]],
        )
        .unwrap();
        let (xx, zz) = (x.clone(), z.clone());
        let h = LimitChain::from_fn(&x, &z, "fold", move |n| {
            let text = if n == 0 { "a*5" } else { "a*2 + b*4 + c*-1" };
            SmashElement::parse(text, &xx.level(n)?, &zz)
        });
        let two = BigInt::from(2);
        assert!(matches!(divide_off_finite(&h, &two, &[], 1), Err(Error::DivisionFailure { level: 0, .. })));
        let xc = LimitThread::new(&x, crate::tower::ThreadSpec::Table { values: vec![a.clone(), c.clone()] });
        let out = divide_off_finite(&h, &two, &[xc], 1).unwrap();
        // The thread label c is preferred as anchor and absorbs the balance
        // g(0)_a − 1 − 2 with g(0)_a = 0.
        assert!(out.trace.levels[1].classes[0].anchor_on_thread);
        assert_eq!(out.g.value(1).unwrap().to_text(), "a*1 + b*2 + c*-3");
        assert_eq!(out.trace.levels[1].defect, vec![c]);
    }
}
