//! The recursion producing `h` with `p·[h] = [f]` and `p^{m−1} | [h]` for all
//! `m`, from a witness pack for `[f] ∈ p^ω H`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use serde::Serialize;

use super::divide::{divide_off_finite, thread_labels, RecursionTrace};
use super::pack::{power, DivisionWitnessPack};
use crate::abelian::{GroupElement, GroupRef};
use crate::error::{Error, Result};
use crate::smash::{pushforward, Label, SmashElement};
use crate::tower::{ChainRule, LimitChain, Tower};

/// An equivalence class `W ⊆ Z_n` (one fiber of `φ_n`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaClass {
    pub over: Label,
    /// Members with their index `k_a`.
    pub members: Vec<(Label, usize)>,
    pub k_w: usize,
    /// `a_0`; absent over the basepoint, where nothing needs balancing.
    pub anchor: Option<Label>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaLevel {
    pub level: usize,
    pub classes: Vec<OmegaClass>,
    /// `supp(p·h(n) − f(n))`.
    pub defect: Vec<Label>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OmegaTrace {
    pub levels: Vec<OmegaLevel>,
}

/// `Z_n` read through `x_1, …, x_{l_K}` with `K = max(n, 1)`. This covers
/// `supp f(n)` (as `g_n(n) = 0`) and maps onto `Z_{n−1}`; the index of each
/// member is `k_a = min{k : a ∈ {x_1(n), …, x_{l_k}(n)}}`.
pub fn z_labels(pack: &DivisionWitnessPack, n: usize) -> Result<BTreeMap<Label, usize>> {
    let top = n.max(1);
    let mut out = BTreeMap::new();
    let mut k = 1;
    for i in 1..=pack.l(top) {
        while pack.l(k) < i {
            k += 1;
        }
        let a = pack.x(i).value(n)?;
        if !a.is_base() {
            out.entry(a).or_insert(k);
        }
    }
    Ok(out)
}

struct State {
    levels: Vec<SmashElement>,
    trace: Vec<OmegaLevel>,
}

struct Omega {
    pack: DivisionWitnessPack,
    state: Mutex<State>,
}

impl Omega {
    /// `p^{k−2}·g_{k−1}(n)_a`, or 0 when `k = 1` or `f(n)_a = 0`.
    fn entry(&self, n: usize, a: &Label, k: usize, fn_: &SmashElement) -> Result<GroupElement> {
        let p = self.pack.p();
        let fa = fn_.coefficient(a);
        let gka = self.pack.g(k - 1).value(n)?.coefficient(a);
        if gka.scale(&power(p, k - 1)) != fa {
            return Err(Error::InvalidPack {
                k: k - 1,
                level: n,
                detail: format!("f(n)_{a} = {fa} is not p^{}·g_{}(n)_{a} = {gka}", k - 1, k - 1),
            });
        }
        if k == 1 || fa.is_zero() {
            return Ok(fa.scale(&BigInt::from(0)));
        }
        Ok(gka.scale(&power(p, k - 2)))
    }

    fn step(&self, tower: &Tower, group: &GroupRef, n: usize, below: Option<&SmashElement>) -> Result<(SmashElement, OmegaLevel)> {
        let carrier = tower.level(n)?;
        let fn_ = self.pack.f().value(n)?;
        let Some(below) = below else {
            let h = SmashElement::zero(&carrier, group);
            let defect = defect(self.pack.p(), &h, &fn_)?;
            return Ok((h, OmegaLevel { level: 0, classes: Vec::new(), defect }));
        };
        let z = z_labels(&self.pack, n)?;
        let phi = tower.map(n)?;
        let mut fibers: BTreeMap<Label, Vec<(Label, usize)>> = BTreeMap::new();
        for (a, k) in &z {
            fibers.entry(phi.apply(a)).or_default().push((a.clone(), *k));
        }
        if let Some(s) = below.support().into_iter().find(|s| !fibers.contains_key(s)) {
            return Err(Error::InvariantViolation {
                invariant: "φ_n maps Z_n onto Z_{n−1}".into(),
                level: n,
                detail: format!("h({})_{s} ≠ 0 has no preimage in Z_{n}", n - 1),
            });
        }
        let mut entries = Vec::new();
        let mut classes = Vec::new();
        for (s, w) in fibers {
            let k_w = w.iter().map(|(_, k)| *k).min().expect("classes are nonempty");
            let anchor = if s.is_base() {
                None
            } else {
                w.iter().find(|(_, k)| *k == k_w).map(|(a, _)| a.clone())
            };
            let mut balance = below.coefficient(&s);
            for (a, k) in &w {
                if Some(a) == anchor.as_ref() {
                    continue;
                }
                let v = self.entry(n, a, *k, &fn_)?;
                balance = &balance - &v;
                entries.push((a.clone(), v));
            }
            if let Some(a0) = &anchor {
                entries.push((a0.clone(), balance));
            }
            classes.push(OmegaClass {
                over: s,
                members: w,
                k_w,
                anchor,
            });
        }
        let h = SmashElement::new(&carrier, group, entries)?;
        let defect = defect(self.pack.p(), &h, &fn_)?;
        Ok((h, OmegaLevel { level: n, classes, defect }))
    }
}

fn defect(p: &BigInt, h: &SmashElement, f: &SmashElement) -> Result<Vec<Label>> {
    Ok(h.scalar_mul(p).sub(f)?.support().into_iter().collect())
}

impl ChainRule for Omega {
    fn value(&self, tower: &Tower, group: &GroupRef, n: usize) -> Result<SmashElement> {
        let mut state = self.state.lock().unwrap();
        while state.levels.len() <= n {
            let level = state.levels.len();
            let (h, record) = self.step(tower, group, level, state.levels.last())?;
            state.levels.push(h);
            state.trace.push(record);
        }
        Ok(state.levels[n].clone())
    }

    fn describe(&self) -> String {
        format!("({})/{} in p^ω", self.pack.f().describe(), self.pack.p())
    }
}

struct Shared(Arc<Omega>);

impl ChainRule for Shared {
    fn value(&self, tower: &Tower, group: &GroupRef, n: usize) -> Result<SmashElement> {
        self.0.value(tower, group, n)
    }

    fn describe(&self) -> String {
        self.0.describe()
    }
}

#[derive(Clone, Debug)]
pub struct OmegaOutcome {
    pub h: LimitChain,
    pub trace: OmegaTrace,
    /// `|p·h(n) − f(n)|` for `n ≤ depth`, each at most `l_1`.
    pub defect_sizes: Vec<usize>,
}

/// Validates the pack on the window, runs the recursion to `depth` and checks
/// its invariants for every `m ≤ m_max`.
pub fn p_omega_divide(pack: &DivisionWitnessPack, depth: usize, m_max: usize) -> Result<OmegaOutcome> {
    if m_max == 0 {
        return Err(Error::Precondition("m_max must be at least 1".into()));
    }
    pack.validate(depth, depth.max(m_max))?;
    let rule = Arc::new(Omega {
        pack: pack.clone(),
        state: Mutex::new(State {
            levels: Vec::new(),
            trace: Vec::new(),
        }),
    });
    let h = LimitChain::new(pack.tower(), pack.group(), Shared(rule.clone()));
    let defect_sizes = verify_p_omega(pack, &h, depth, m_max)?;
    let trace = OmegaTrace {
        levels: rule.state.lock().unwrap().trace[..=depth].to_vec(),
    };
    Ok(OmegaOutcome { h, trace, defect_sizes })
}

/// At every `n ≤ depth`: (1) `φ_n(h(n)) = h(n−1)`; (2) `supp h(n) ⊆ Z_n`;
/// (3) for `m ≤ m_max` and `a ∉ {x_1(n), …, x_{l_m}(n)}`, `p^{m−1} | h(n)_a`
/// and `p·h(n)_a = f(n)_a`. Returns `|p·h(n) − f(n)|` per level after
/// checking it against `l_1`.
pub fn verify_p_omega(pack: &DivisionWitnessPack, h: &LimitChain, depth: usize, m_max: usize) -> Result<Vec<usize>> {
    let p = pack.p();
    let mut sizes = Vec::with_capacity(depth + 1);
    let mut below: Option<SmashElement> = None;
    for n in 0..=depth {
        let fail = |invariant: &str, detail: String| Error::InvariantViolation {
            invariant: invariant.into(),
            level: n,
            detail,
        };
        let hn = h.value(n)?;
        let fn_ = pack.f().value(n)?;
        if let Some(prev) = &below {
            let image = pushforward(pack.tower().map(n)?.as_ref(), &hn)?;
            if &image != prev {
                return Err(fail("(1) compatibility", format!("φ(h({n})) = {image}, h({}) = {prev}", n - 1)));
            }
        }
        let z = z_labels(pack, n)?;
        if let Some(a) = hn.support().into_iter().find(|a| !z.contains_key(a)) {
            return Err(fail("(2) supp h(n) ⊆ Z_n", format!("h({n}) is nonzero at {a}")));
        }
        let relevant: BTreeSet<Label> = hn.support().union(&fn_.support()).cloned().collect();
        for m in 1..=m_max {
            let marks = thread_labels(&pack.threads_up_to(m), n)?;
            let divisor = power(p, m - 1);
            for a in relevant.difference(&marks) {
                let ha = hn.coefficient(a);
                if !ha.is_divisible_by(&divisor) {
                    return Err(fail("(3) divisibility", format!("p^{} ∤ h({n})_{a} = {ha} (m = {m})", m - 1)));
                }
                if ha.scale(p) != fn_.coefficient(a) {
                    return Err(fail("(3) p·h = f", format!("p·h({n})_{a} ≠ f({n})_{a} (m = {m})")));
                }
            }
        }
        let size = hn.scalar_mul(p).sub(&fn_)?.support_size();
        if size > pack.l(1) {
            return Err(fail("|p·h − f| ≤ l_1", format!("{size} > {}", pack.l(1))));
        }
        sizes.push(size);
        below = Some(hn);
    }
    Ok(sizes)
}

/// Divides `h` by `p^{m−1}` off `x_1, …, x_{l_m}` for each `2 ≤ m ≤ m_max`.
pub fn redivide(pack: &DivisionWitnessPack, h: &LimitChain, depth: usize, m_max: usize) -> Result<Vec<RecursionTrace>> {
    (2..=m_max)
        .map(|m| {
            let divisor = power(pack.p(), m - 1);
            Ok(divide_off_finite(h, &divisor, &pack.threads_up_to(m), depth)?.trace)
        })
        .collect()
}
