//! Witness packs `(f, p, g_k, l_k, x_i, b_{i,k})` with
//! `f − p^k·g_k = Σ_{i≤l_k} x_i·b_{i,k}`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::abelian::{generator, zero, GroupElement, GroupRef};
use crate::error::{Error, Result};
use crate::smash::{Label, SmashElement};
use crate::tower::{canonical_tower, LimitChain, LimitThread, Tower};

type ChainFamily = Arc<dyn Fn(usize) -> LimitChain + Send + Sync>;
type ThreadFamily = Arc<dyn Fn(usize) -> LimitThread + Send + Sync>;
type Bound = Arc<dyn Fn(usize) -> usize + Send + Sync>;
type Coefficients = Arc<dyn Fn(usize, usize) -> GroupElement + Send + Sync>;

/// `g_0` is `f` itself and `l_0 = 0`; the families are queried for `k ≥ 1`
/// and `i ≥ 1` only. Chains and threads are memoized per index.
#[derive(Clone)]
pub struct DivisionWitnessPack {
    name: String,
    p: BigInt,
    f: LimitChain,
    g: ChainFamily,
    l: Bound,
    x: ThreadFamily,
    b: Coefficients,
    g_memo: Arc<Mutex<HashMap<usize, LimitChain>>>,
    x_memo: Arc<Mutex<HashMap<usize, LimitThread>>>,
}

pub(crate) fn power(p: &BigInt, e: usize) -> BigInt {
    num_traits::pow(p.clone(), e)
}

impl DivisionWitnessPack {
    pub fn new(
        name: impl Into<String>,
        p: BigInt,
        f: LimitChain,
        g: impl Fn(usize) -> LimitChain + Send + Sync + 'static,
        l: impl Fn(usize) -> usize + Send + Sync + 'static,
        x: impl Fn(usize) -> LimitThread + Send + Sync + 'static,
        b: impl Fn(usize, usize) -> GroupElement + Send + Sync + 'static,
    ) -> Self {
        DivisionWitnessPack {
            name: name.into(),
            p,
            f,
            g: Arc::new(g),
            l: Arc::new(l),
            x: Arc::new(x),
            b: Arc::new(b),
            g_memo: Arc::default(),
            x_memo: Arc::default(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn f(&self) -> &LimitChain {
        &self.f
    }

    pub fn tower(&self) -> &Tower {
        self.f.tower()
    }

    pub fn group(&self) -> &GroupRef {
        self.f.group()
    }

    pub fn g(&self, k: usize) -> LimitChain {
        if k == 0 {
            return self.f.clone();
        }
        self.g_memo.lock().unwrap().entry(k).or_insert_with(|| (self.g)(k)).clone()
    }

    pub fn l(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            (self.l)(k)
        }
    }

    /// `x_i` for `i ≥ 1`.
    pub fn x(&self, i: usize) -> LimitThread {
        assert!(i >= 1, "threads are indexed from 1");
        self.x_memo.lock().unwrap().entry(i).or_insert_with(|| (self.x)(i)).clone()
    }

    pub fn b(&self, i: usize, k: usize) -> GroupElement {
        (self.b)(i, k)
    }

    /// `x_1, …, x_{l_k}`.
    pub fn threads_up_to(&self, k: usize) -> Vec<LimitThread> {
        (1..=self.l(k)).map(|i| self.x(i)).collect()
    }

    /// `Σ_{i≤l_k} x_i(n)·b_{i,k}`.
    pub fn thread_sum(&self, k: usize, n: usize) -> Result<SmashElement> {
        let carrier = self.tower().level(n)?;
        let mut terms = Vec::with_capacity(self.l(k));
        for i in 1..=self.l(k) {
            terms.push((self.x(i).value(n)?, self.b(i, k)));
        }
        SmashElement::new(&carrier, self.group(), terms)
    }

    /// Checks on levels `n ≤ depth` and indices `k ≤ k_max`: `p` prime,
    /// `f(0) = 0`, `g_k(k) = 0`, `l` strictly increasing, and the identity
    /// `f − p^k·g_k = Σ_{i≤l_k} x_i·b_{i,k}`.
    pub fn validate(&self, depth: usize, k_max: usize) -> Result<()> {
        if !crate::abelian::arith::is_prime(&self.p) {
            return Err(Error::NotPrime(self.p.clone()));
        }
        let invalid = |k: usize, level: usize, detail: String| Error::InvalidPack { k, level, detail };
        if !self.f.value(0)?.is_zero() {
            return Err(invalid(0, 0, format!("f(0) = {} must vanish", self.f.value(0)?)));
        }
        for k in 1..=k_max {
            if self.l(k) <= self.l(k - 1) {
                return Err(invalid(k, 0, format!("l_{k} = {} does not exceed l_{} = {}", self.l(k), k - 1, self.l(k - 1))));
            }
            let gk = self.g(k);
            if !gk.tower().same_as(self.tower()) || gk.group() != self.group() {
                return Err(invalid(k, 0, "g_k lives on another tower or group".into()));
            }
            let at_k = gk.value(k)?;
            if !at_k.is_zero() {
                return Err(invalid(k, k, format!("g_{k}({k}) = {at_k} must vanish")));
            }
        }
        for i in 1..=self.l(k_max) {
            if !self.x(i).tower().same_as(self.tower()) {
                return Err(invalid(0, 0, format!("x_{i} lives on another tower")));
            }
        }
        for k in 0..=k_max {
            let pk = power(&self.p, k);
            let gk = self.g(k);
            for n in 0..=depth {
                let lhs = self.f.value(n)?.sub(&gk.value(n)?.scalar_mul(&pk))?;
                let rhs = self.thread_sum(k, n)?;
                if lhs != rhs {
                    return Err(invalid(k, n, format!("f − p^k·g_k = {lhs} but Σ x_i·b_i,k = {rhs}")));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DivisionWitnessPack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pack({}, p = {}, f = {})", self.name, self.p, self.f.describe())
    }
}

/// The power pack on the canonical tower with labels shifted so that
/// `f(0) = 0` and `g_k(k) = 0` hold: `f(n)_j = p^j e` for `1 ≤ j ≤ n`,
/// `g_k(n)_j = p^{j−k} e` for `j > k`, `l_k = k`, `x_i` the thread born at
/// `i`, `b_{i,k} = p^i e`, where `e` is the first generator.
pub fn power_pack(p: &BigInt, group: &GroupRef) -> Result<DivisionWitnessPack> {
    power_pack_with_offset(p, group, 1)
}

/// The same data starting at label 0: `f(n)_j = p^j e` for `j ≤ n`,
/// `x_i` born at `i − 1`. Violates `f(0) = 0` and `g_k(k) = 0`, so it is
/// rejected by [`DivisionWitnessPack::validate`].
pub fn unshifted_power_pack(p: &BigInt, group: &GroupRef) -> Result<DivisionWitnessPack> {
    power_pack_with_offset(p, group, 0)
}

fn power_pack_with_offset(p: &BigInt, group: &GroupRef, offset: u64) -> Result<DivisionWitnessPack> {
    if group.rank() == 0 {
        return Err(Error::Precondition("the power pack needs a nontrivial group".into()));
    }
    let x = canonical_tower();
    let e = generator(group, 0);
    let entry = {
        let (p, e) = (p.clone(), e.clone());
        move |j: u64, shift: u64| e.scale(&power(&p, (j - shift) as usize))
    };
    let f = {
        let entry = entry.clone();
        let z = zero(group);
        LimitChain::from_label_entries(&x, group, format!("p^j from {offset}"), move |l| match l {
            Label::Nat(j) if *j >= offset => entry(*j, 0),
            _ => z.clone(),
        })
    };
    let g = {
        let (x, group) = (x.clone(), group.clone());
        move |k: usize| {
            let entry = entry.clone();
            let z = zero(&group);
            // Labels from `k + offset` on carry `p^{j−k}`.
            let first = k as u64 + offset;
            LimitChain::from_label_entries(&x, &group, format!("g_{k}"), move |l| match l {
                Label::Nat(j) if *j >= first => entry(*j, k as u64),
                _ => z.clone(),
            })
        }
    };
    let threads = {
        let x = x.clone();
        move |i: usize| LimitThread::canonical(&x, i as u64 - 1 + offset)
    };
    let b = {
        let (p, e) = (p.clone(), e.clone());
        move |i: usize, _k: usize| e.scale(&power(&p, i - 1 + offset as usize))
    };
    let name = if offset == 1 { "power" } else { "power-unshifted" };
    Ok(DivisionWitnessPack::new(name, p.clone(), f, g, |k| k, threads, b))
}

/// `f = 0`, `g_k = 0`, `b = 0` with `l_k = k` on the canonical tower.
pub fn zero_pack(p: &BigInt, group: &GroupRef) -> DivisionWitnessPack {
    let x = canonical_tower();
    let f = LimitChain::zero(&x, group);
    let (xg, gg) = (x.clone(), group.clone());
    let z = zero(group);
    DivisionWitnessPack::new(
        "zero",
        p.clone(),
        f,
        move |_| LimitChain::zero(&xg, &gg),
        |k| k,
        move |i| LimitThread::canonical(&x, i as u64),
        move |_, _| z.clone(),
    )
}

/// JSON description of a bundled pack.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PackSpec {
    Power {
        #[serde(with = "crate::serde_int")]
        p: BigInt,
    },
    PowerUnshifted {
        #[serde(with = "crate::serde_int")]
        p: BigInt,
    },
    Zero {
        #[serde(with = "crate::serde_int")]
        p: BigInt,
    },
}

impl PackSpec {
    pub fn build(&self, group: &GroupRef) -> Result<DivisionWitnessPack> {
        match self {
            PackSpec::Power { p } => power_pack(p, group),
            PackSpec::PowerUnshifted { p } => unshifted_power_pack(p, group),
            PackSpec::Zero { p } => Ok(zero_pack(p, group)),
        }
    }
}
