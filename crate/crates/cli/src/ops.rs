//! One function per pipeline op. Each returns its output and the invariants
//! it checked; a core error aborts the op and is recorded by the runner.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use prolim_core::abelian::arith::factorize;
use prolim_core::abelian::{
    is_almost_divisible, is_cotorsion_fg, p_length, stabilization_index, verify_lp_scaling, GroupElement, GroupRef,
    PLength, Stabilization, SubgroupChain,
};
use prolim_core::cotorsion::{
    build_dm_witnesses, certify_noncotorsion, coset_tower, solve_truncated, support_schedule,
    verify_counting_contradiction, CertificateVerdict, CountingCandidate, EquationSystem, WINDOW,
};
use prolim_core::division::{
    divide_everywhere, divide_off_finite, p_omega_divide, redivide, verify_division, verify_p_omega, PackSpec,
};
use prolim_core::rho::{factorize_bounded, injectivity_witness, support_profile, FormalSum, HClass, ProfileVerdict};
use prolim_core::rules::{ElementRule, IntRule, IntSequence};
use prolim_core::smash::Label;
use prolim_core::tower::{
    counterexample_support_data, eventual_image_tower, mittag_leffler_index, surjective_up_to, LimitChain,
    LimitThread, ThreadSpec, Tower, TowerSpec,
};
use prolim_core::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::scenario::{CertExpectation, Op, TermSpec};

/// Levels at which factorizations are compared with the original chain.
const COMPARE_DEPTH: usize = 50;

pub struct Ctx<'a> {
    pub group: &'a GroupRef,
    pub tower: &'a Tower,
    pub tower_spec: &'a TowerSpec,
    pub depth: usize,
    pub rng: ChaCha8Rng,
}

#[derive(Default)]
pub struct Outcome {
    pub output: Map<String, Value>,
    pub checks: Vec<(String, bool, Option<String>)>,
}

impl Outcome {
    fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.output.insert(key.to_string(), value.into());
    }

    fn check(&mut self, invariant: impl Into<String>, pass: bool, detail: Option<String>) {
        self.checks.push((invariant.into(), pass, detail));
    }

    /// Records a check that held on every sample, with the first failure as detail.
    fn check_all(&mut self, invariant: impl Into<String>, failures: &[String]) {
        self.check(invariant, failures.is_empty(), failures.first().cloned());
    }
}

pub fn int(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

fn ints(ns: &[BigInt]) -> Value {
    Value::Array(ns.iter().map(int).collect())
}

fn element(e: &GroupElement) -> Value {
    ints(e.coords())
}

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

pub fn execute(op: &Op, ctx: &mut Ctx) -> Result<Outcome> {
    match op {
        Op::AnalyzeGroup { primes, q, .. } => analyze_group(ctx, primes, q),
        Op::RhoRoundTrip { terms } => rho_round_trip(ctx, terms),
        Op::RandomRoundTrip {
            count,
            max_terms,
            max_birth,
            range,
        } => random_round_trip(ctx, *count, *max_terms, *max_birth, *range),
        Op::RisingRefusal {
            count,
            period_len,
            range,
        } => rising_refusal(ctx, *count, *period_len, *range),
        Op::HClass { class, n } => {
            let class = HClass::from_json(ctx.group, class)?;
            let mut out = Outcome::default();
            out.set("class", class.normalized().to_json());
            out.set("text", class.normalized().to_string());
            let mut memberships = Vec::new();
            let mut failures = Vec::new();
            for &k in n {
                let k = big(k);
                memberships.push(json!({
                    "n": int(&k),
                    "in_torsion": class.in_torsion(&k),
                    "in_multiples": class.in_multiples(&k),
                    "quotient": class.divide(&k).map(|g| g.to_json()),
                }));
                failures.extend(class_identities(&class, &k));
                failures.extend(torsion_free_violation(ctx.group, &class, &k));
            }
            out.set("memberships", memberships);
            out.check_all("H[n] and nH memberships match their defining identities", &failures);
            Ok(out)
        }
        Op::RandomHClasses {
            count,
            n,
            prefix_len,
            period_len,
            range,
        } => random_h_classes(ctx, *count, n, *prefix_len, *period_len, *range),
        Op::DivideEverywhere { class, m } => divide_everywhere_op(ctx, class, *m),
        Op::DivideOffFinite { class, m, threads } => divide_off_finite_op(ctx, class, *m, threads),
        Op::POmegaDivide { pack, m_max } => p_omega_op(ctx, pack, *m_max),
        Op::ValidatePack {
            pack,
            expect_valid,
            k_max,
        } => {
            let mut out = Outcome::default();
            let verdict = pack.build(ctx.group).and_then(|p| p.validate(ctx.depth, *k_max));
            out.set("valid", verdict.is_ok());
            if let Err(e) = &verdict {
                out.set("rejection", e.to_string());
            }
            out.check(
                if *expect_valid { "pack satisfies its normalizations" } else { "pack is rejected" },
                verdict.is_ok() == *expect_valid,
                None,
            );
            Ok(out)
        }
        Op::CosetTower {
            q,
            a,
            expect_constants,
            expect_moduli,
            ..
        } => coset_tower_op(ctx, q, a, expect_constants.as_deref(), expect_moduli.as_deref()),
        Op::CertifyNoncotorsion {
            q,
            a,
            expect,
            expect_depth,
            ..
        } => certify_op(ctx, q, a, *expect, *expect_depth),
        Op::BruteForce {
            q,
            a,
            bound,
            through,
            expect_extendable,
            ..
        } => brute_force_op(ctx, q, a, *bound, *through, *expect_extendable),
        Op::SolveTruncated { q, a, .. } => {
            let system = EquationSystem::new(ctx.group, q.clone(), a.clone())?;
            let sol = solve_truncated(&system, ctx.depth)?;
            let residual_free = system.residuals(&sol.particular).iter().all(GroupElement::is_zero);
            let mut out = Outcome::default();
            out.set("x0_constant", element(&sol.x0_constant));
            out.set("x0_modulus", int(&sol.x0_modulus));
            out.set("particular", sol.particular.iter().map(element).collect::<Vec<_>>());
            out.check(
                format!("back-substituted solution solves equations 0..={}", ctx.depth),
                residual_free,
                None,
            );
            Ok(out)
        }
        Op::DmWitnesses { .. } => {
            let w = build_dm_witnesses(ctx.group, ctx.depth)?;
            let mut out = Outcome::default();
            out.set("q_rule", serde_json::to_value(w.q_rule()).expect("rules serialize"));
            out.set("breakpoints", json!(w.breakpoints));
            out.set("d", w.d.iter().map(element).collect::<Vec<_>>());
            let verified = w.verify();
            out.check(
                format!("q_<m·d_m ∉ q_<m+1·A for m ≤ {}", w.depth()),
                verified.is_ok(),
                verified.err().map(|e| e.to_string()),
            );
            Ok(out)
        }
        Op::Counting {
            k0,
            n_max,
            h0,
            random,
            h0_max,
        } => counting_op(ctx, k0, *n_max, h0, *random, *h0_max),
        Op::CounterexampleSupport { k, d, n_max, width } => {
            let levels = counterexample_support_data(ctx.group, k, d, *n_max, *width)?;
            let mut out = Outcome::default();
            let mut failures = Vec::new();
            for l in &levels {
                if big(l.support.len() as u64) != l.size {
                    failures.push(format!("level {}: {} labels for size {}", l.n, l.support.len(), l.size));
                }
                if l.support.iter().any(|&x| x >= *width) {
                    failures.push(format!("level {}: support leaves the width", l.n));
                }
            }
            out.set(
                "levels",
                levels
                    .iter()
                    .map(|l| json!({"n": l.n, "size": int(&l.size), "support": l.support, "entry": element(&l.entry)}))
                    .collect::<Vec<_>>(),
            );
            out.check_all("sampled supports have the scheduled sizes", &failures);
            Ok(out)
        }
        Op::Stabilization { q, .. } => {
            let mut out = Outcome::default();
            stabilization_checks(ctx, q, &mut out)?;
            Ok(out)
        }
        Op::MlIndex { t } => {
            let index = mittag_leffler_index(ctx.tower, *t, ctx.depth)?;
            let mut out = Outcome::default();
            out.set("index", serde_json::to_value(&index).expect("serializes"));
            if index.stable_index().is_some() {
                let eventual = eventual_image_tower(ctx.tower, ctx.depth)?;
                let onto = surjective_up_to(&eventual, ctx.depth)?;
                out.check("eventual-image tower has surjective maps", onto, None);
            }
            Ok(out)
        }
    }
}

fn small_primes(group: &GroupRef) -> Vec<BigInt> {
    let set: BTreeSet<BigInt> = group
        .invariant_factors()
        .iter()
        .flat_map(|d| factorize(d).into_iter().map(|(p, _)| p))
        .collect();
    if set.is_empty() {
        vec![BigInt::from(2)]
    } else {
        set.into_iter().collect()
    }
}

fn analyze_group(ctx: &mut Ctx, primes: &[u64], q: &IntRule) -> Result<Outcome> {
    let g = ctx.group;
    let mut out = Outcome::default();
    out.set("group", g.to_string());
    out.set("free_rank", g.free_rank());
    out.set("invariant_factors", ints(g.invariant_factors()));
    out.set("primary", g.primary_decomposition().to_string());

    let primes = if primes.is_empty() {
        small_primes(g)
    } else {
        primes.iter().map(|&p| big(p)).collect()
    };
    let mut lengths = Vec::new();
    for p in &primes {
        let depth = u32::try_from(ctx.depth.max(1)).unwrap_or(u32::MAX);
        let length = p_length(g, p, depth)?;
        let expected_finite = g.free_rank() == 0;
        let pass = match &length {
            PLength::Finite(k) => expected_finite && *k == g.max_prime_exponent(p),
            PLength::Infinite { .. } => !expected_finite,
        };
        out.check(format!("l_{p} is the largest {p}-exponent"), pass, Some(format!("{length:?}")));
        let mut entry = json!({"p": int(p), "length": serde_json::to_value(&length).expect("serializes")});
        if expected_finite {
            let other = if *p == BigInt::from(2) { BigInt::from(3) } else { BigInt::from(2) };
            let scaling = verify_lp_scaling(g, p, &other)?;
            out.check(format!("l_{p}(A) = l_{p}({other}A)"), scaling.agree, None);
            entry["scaled_by"] = int(&other);
            entry["length_of_multiple"] = json!(scaling.p_length_of_multiple);
        }
        lengths.push(entry);
    }
    out.set("p_lengths", lengths);

    let ad = is_almost_divisible(g);
    let ct = is_cotorsion_fg(g);
    out.set("almost_divisible", serde_json::to_value(&ad).expect("serializes"));
    out.set("cotorsion", serde_json::to_value(&ct).expect("serializes"));
    out.check(
        "finitely generated: cotorsion ⟺ almost divisible ⟺ finite",
        ad.almost_divisible == ct.cotorsion && ct.cotorsion == g.is_finite(),
        None,
    );
    stabilization_checks(ctx, q, &mut out)?;
    Ok(out)
}

fn stabilization_checks(ctx: &Ctx, q: &IntRule, out: &mut Outcome) -> Result<()> {
    let g = ctx.group;
    let depth = ctx.depth.max(1);
    let s = stabilization_index(g, q, depth)?;
    out.set("stabilization", s.to_string());
    if let Stabilization::Stable(m) = s {
        let chain = SubgroupChain::build(g, q, depth);
        let bad = (m..=depth).find(|&n| !chain.stages[n].same_as(&chain.stages[m]));
        out.check(
            "q_<n·A = q_<m·A for every sampled n ≥ m",
            bad.is_none(),
            bad.map(|n| format!("differs at n = {n}")),
        );
    }
    if let Some(bound) = (g.free_rank() == 0).then(|| prolim_core::abelian::decide::exponent_bound(g) as usize) {
        if depth >= bound {
            let found = matches!(s, Stabilization::Stable(m) if m <= bound);
            out.check(format!("finite group stabilizes within 1 + Σ exponents = {bound}"), found, None);
        }
    }
    Ok(())
}

fn build_sum(ctx: &Ctx, terms: &[TermSpec]) -> Result<FormalSum> {
    let terms = terms
        .iter()
        .map(|t| {
            Ok((
                LimitThread::from_spec(ctx.tower, t.thread.clone()),
                GroupElement::from_ints(ctx.group, &t.coeff)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    FormalSum::new(ctx.tower, ctx.group, terms, ctx.depth)
}

/// Separating level, profile and factorization of `ρ(sum)`, with failures.
fn round_trip(sum: &FormalSum, depth: usize) -> Result<(usize, Value, Vec<String>)> {
    let mut failures = Vec::new();
    let witness = injectivity_witness(sum, depth)?;
    let h = sum.rho_image();
    let profile = support_profile(&h, depth)?;
    match profile.verdict() {
        ProfileVerdict::Bounded { max, .. } if *max == sum.len() => {}
        other => failures.push(format!("profile {other:?} for {} terms", sum.len())),
    }
    let back = factorize_bounded(&h, depth)?;
    if !back.agrees_with(sum, COMPARE_DEPTH)? {
        failures.push(format!("factorization {} differs from {}", back.to_text(), sum.to_text()));
    }
    for n in 0..=COMPARE_DEPTH {
        if back.rho_apply(n)? != h.value(n)? {
            failures.push(format!("ρ(factorization) differs from h at level {n}"));
            break;
        }
    }
    let summary = json!({
        "sum": sum.to_text(),
        "separating_level": witness,
        "profile": serde_json::to_value(profile.verdict()).expect("serializes"),
        "window": back.probe(),
    });
    Ok((witness, summary, failures))
}

fn rho_round_trip(ctx: &mut Ctx, terms: &[TermSpec]) -> Result<Outcome> {
    let sum = build_sum(ctx, terms)?;
    let (_, summary, failures) = round_trip(&sum, ctx.depth)?;
    let mut out = Outcome::default();
    out.set("round_trip", summary);
    out.check("ρ(Σ x_k v_k) has a separating level", true, None);
    out.check_all("factorize_bounded(ρ(sum)) reproduces the sum", &failures);
    Ok(out)
}

fn random_element(group: &GroupRef, rng: &mut ChaCha8Rng, range: i64, nonzero: bool) -> Result<GroupElement> {
    loop {
        let coords: Vec<i64> = (0..group.rank()).map(|_| rng.gen_range(-range..=range)).collect();
        let e = GroupElement::from_ints(group, &coords)?;
        if !nonzero || !e.is_zero() || group.is_trivial() {
            return Ok(e);
        }
    }
}

fn random_round_trip(ctx: &mut Ctx, count: usize, max_terms: usize, max_birth: u64, range: i64) -> Result<Outcome> {
    if ctx.group.is_trivial() {
        return Err(Error::Precondition("the trivial group has no nonzero coefficients".into()));
    }
    let pool: Vec<ThreadSpec> = match ctx.tower_spec {
        TowerSpec::Canonical => (0..=max_birth).map(ThreadSpec::canonical).collect(),
        TowerSpec::Constant { .. } => ctx
            .tower
            .level(0)?
            .non_base()
            .map(|l| ThreadSpec::Constant { label: l.clone() })
            .collect(),
        _ => return Err(Error::Precondition("random sums need the canonical or a constant tower".into())),
    };
    let mut failures = Vec::new();
    let mut levels = Vec::with_capacity(count);
    for _ in 0..count {
        let len = ctx.rng.gen_range(1..=max_terms.min(pool.len()).max(1));
        let threads: Vec<ThreadSpec> = pool.choose_multiple(&mut ctx.rng, len).cloned().collect();
        let mut terms = Vec::with_capacity(len);
        for t in threads {
            terms.push((LimitThread::from_spec(ctx.tower, t), random_element(ctx.group, &mut ctx.rng, range, true)?));
        }
        let sum = FormalSum::new(ctx.tower, ctx.group, terms, ctx.depth)?;
        let (witness, _, f) = round_trip(&sum, ctx.depth)?;
        levels.push(witness);
        failures.extend(f);
    }
    let mut out = Outcome::default();
    out.set("sums", count);
    out.set("separating_levels", json!(levels));
    out.check(format!("{count} sums each have a separating level"), levels.len() == count, None);
    out.check_all("factorize_bounded(ρ(sum)) reproduces every sum", &failures);
    Ok(out)
}

fn random_class(ctx: &mut Ctx, prefix_len: usize, period_len: usize, range: i64, nonzero_period: bool) -> Result<HClass> {
    let prefix = (0..prefix_len)
        .map(|_| random_element(ctx.group, &mut ctx.rng, range, false))
        .collect::<Result<Vec<_>>>()?;
    let mut period = (0..period_len.max(1))
        .map(|_| random_element(ctx.group, &mut ctx.rng, range, false))
        .collect::<Result<Vec<_>>>()?;
    if nonzero_period && period.iter().all(GroupElement::is_zero) {
        period[0] = random_element(ctx.group, &mut ctx.rng, range, true)?;
    }
    HClass::new(ctx.group, prefix, period)
}

fn rising_refusal(ctx: &mut Ctx, count: usize, period_len: usize, range: i64) -> Result<Outcome> {
    if ctx.group.is_trivial() {
        return Err(Error::Precondition("the trivial group has no rising chains".into()));
    }
    let mut failures = Vec::new();
    let mut levels = Vec::with_capacity(count);
    for _ in 0..count {
        let class = random_class(ctx, 2, period_len, range, true)?;
        match factorize_bounded(&class.to_chain(ctx.tower), ctx.depth) {
            Err(Error::RisingProfile { level }) => levels.push(level),
            Err(e) => failures.push(format!("{class}: unexpected error {e}")),
            Ok(sum) => failures.push(format!("{class}: factorized as {}", sum.to_text())),
        }
    }
    let mut out = Outcome::default();
    out.set("witness_levels", json!(levels));
    out.check_all(format!("{count} rising chains are refused with a witness level"), &failures);
    Ok(out)
}

/// The H[n] and nH identities for one class; returns the violations.
fn class_identities(class: &HClass, n: &BigInt) -> Vec<String> {
    let mut bad = Vec::new();
    let torsion = class.in_torsion(n);
    if torsion != class.scale(n).is_zero() {
        bad.push(format!("{class}: H[{n}] membership disagrees with {n}·[h] = 0"));
    }
    if torsion != class.has_torsion_representative(n) {
        bad.push(format!("{class}: H[{n}] differs from H(X, A[{n}])"));
    }
    let norm = class.normalized();
    let multiples = class.in_multiples(n);
    if multiples != norm.period().iter().all(|e| e.is_divisible_by(n)) {
        bad.push(format!("{class}: {n}H membership disagrees with the period entries"));
    }
    match class.divide(n) {
        Some(g) if !g.scale(n).equals(class).unwrap_or(false) => bad.push(format!("{class}: {n}·({g}) ≠ [h]")),
        Some(_) if !multiples => bad.push(format!("{class}: divisible by {n} but not in {n}H")),
        None if multiples => bad.push(format!("{class}: in {n}H but division failed")),
        _ => {}
    }
    bad
}

/// `H(X, A)` has no `n`-torsion when `A` is torsion free.
fn torsion_free_violation(group: &GroupRef, class: &HClass, n: &BigInt) -> Option<String> {
    (group.invariant_factors().is_empty() && !n.is_zero() && class.in_torsion(n) && !class.is_zero())
        .then(|| format!("{class} is {n}-torsion over {group}"))
}

fn random_h_classes(
    ctx: &mut Ctx,
    count: usize,
    ns: &[u64],
    prefix_len: usize,
    period_len: usize,
    range: i64,
) -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut bounded = Vec::new();
    let mut torsion = Vec::new();
    let exponent = ctx.group.exponent();
    let mut torsion_hits = vec![0usize; ns.len()];
    let mut multiple_hits = vec![0usize; ns.len()];
    for _ in 0..count {
        let len = ctx.rng.gen_range(1..=period_len.max(1));
        let class = random_class(ctx, prefix_len, len, range, false)?;
        for (i, &n) in ns.iter().enumerate() {
            let n = big(n);
            failures.extend(class_identities(&class, &n));
            torsion.extend(torsion_free_violation(ctx.group, &class, &n));
            torsion_hits[i] += usize::from(class.in_torsion(&n));
            multiple_hits[i] += usize::from(class.in_multiples(&n));
        }
        if let Some(m) = &exponent {
            if !class.scale(m).is_zero() {
                bounded.push(format!("{m}·{class} ≠ 0"));
            }
        }
    }
    let mut out = Outcome::default();
    out.set("classes", count);
    out.set(
        "hits",
        ns.iter()
            .enumerate()
            .map(|(i, n)| json!({"n": n, "in_torsion": torsion_hits[i], "in_multiples": multiple_hits[i]}))
            .collect::<Vec<_>>(),
    );
    out.check_all("H[n] ⟺ n·period = 0 and nH ⟺ period ⊆ nA on every sample", &failures);
    if ctx.group.invariant_factors().is_empty() {
        out.check_all("H(X, Z^r) is torsion free on every sample", &torsion);
    }
    if let Some(m) = exponent {
        out.check_all(format!("H(X, A) is {m}-bounded on every sample"), &bounded);
    }
    Ok(out)
}

fn level_texts(h: &LimitChain, depth: usize) -> Result<Vec<String>> {
    let mut shown: Vec<usize> = (0..=depth.min(4)).collect();
    if depth > 4 {
        shown.push(depth);
    }
    shown
        .into_iter()
        .map(|n| Ok(format!("{n}: {}", h.value(n)?.to_text())))
        .collect()
}

fn divide_everywhere_op(ctx: &mut Ctx, class: &Value, m: u64) -> Result<Outcome> {
    let class = HClass::from_json(ctx.group, class)?;
    let m = big(m);
    let h = class.scale(&m).to_chain(ctx.tower);
    let g = divide_everywhere(&h, &m, ctx.depth)?;
    let mut bad = None;
    for n in 0..=ctx.depth {
        if g.value(n)?.scalar_mul(&m) != h.value(n)? {
            bad = Some(n);
            break;
        }
    }
    let compatible = g.check(ctx.depth);
    let mut out = Outcome::default();
    out.set("h", level_texts(&h, ctx.depth)?);
    out.set("g", level_texts(&g, ctx.depth)?);
    out.check("g is a thread of lim(X∧A)", compatible.is_ok(), compatible.err().map(|e| e.to_string()));
    out.check(format!("{m}·g(n) = h(n) at every level"), bad.is_none(), bad.map(|n| format!("level {n}")));
    out.check(format!("{m}·[class] ∈ {m}H"), class.scale(&m).in_multiples(&m), None);
    Ok(out)
}

fn divide_off_finite_op(ctx: &mut Ctx, class: &Value, m: u64, threads: &[TermSpec]) -> Result<Outcome> {
    let class = HClass::from_json(ctx.group, class)?;
    let m = big(m);
    let base = class.scale(&m).to_chain(ctx.tower);
    let sum = build_sum(ctx, threads)?;
    let rho = sum.rho_image();
    let name = format!("{m}·{class} + ρ({})", sum.to_text());
    let h = LimitChain::from_fn(ctx.tower, ctx.group, name, move |n| base.value(n)?.add(&rho.value(n)?));
    let xs: Vec<LimitThread> = sum.terms().iter().map(|(x, _)| x.clone()).collect();
    let outcome = divide_off_finite(&h, &m, &xs, ctx.depth)?;
    let mut out = Outcome::default();
    let replay = verify_division(&h, &m, &xs, &outcome.g, ctx.depth);
    out.check(
        "(1) compatibility, (2) supp(m·g − h) ⊆ {x_k}, (3) supp g ⊆ supp h ∪ {x_k} at every level",
        replay.is_ok(),
        replay.err().map(|e| e.to_string()),
    );
    let wide: Vec<String> = outcome
        .trace
        .levels
        .iter()
        .filter(|l| l.defect.len() > xs.len())
        .map(|l| format!("level {}: defect {}", l.level, l.defect.len()))
        .collect();
    out.check_all(format!("|m·g(n) − h(n)| ≤ {} at every level", xs.len()), &wide);
    out.set("h", level_texts(&h, ctx.depth)?);
    out.set("g", level_texts(&outcome.g, ctx.depth)?);
    out.set(
        "defects",
        outcome.trace.levels.iter().map(|l| json!(l.defect.iter().map(Label::to_string).collect::<Vec<_>>())).collect::<Vec<_>>(),
    );
    out.set("trace", serde_json::to_value(&outcome.trace).expect("serializes"));
    Ok(out)
}

fn p_omega_op(ctx: &mut Ctx, spec: &PackSpec, m_max: usize) -> Result<Outcome> {
    let pack = spec.build(ctx.group)?;
    let outcome = p_omega_divide(&pack, ctx.depth, m_max)?;
    let mut out = Outcome::default();
    let replay = verify_p_omega(&pack, &outcome.h, ctx.depth, m_max);
    out.check(
        format!("(1) compatibility, (2) supp h(n) ⊆ Z_n, (3) p^(m−1) | h and p·h = f off x_1..x_l_m for m ≤ {m_max}"),
        replay.is_ok(),
        replay.as_ref().err().map(|e| e.to_string()),
    );
    let l1 = pack.l(1);
    let wide: Vec<String> = outcome
        .defect_sizes
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > l1)
        .map(|(n, d)| format!("level {n}: {d}"))
        .collect();
    out.check_all(format!("|p·h(n) − f(n)| ≤ l_1 = {l1} at every level"), &wide);
    let redivisions = redivide(&pack, &outcome.h, ctx.depth, m_max);
    out.check(
        format!("h divides by p^(m−1) off x_1..x_l_m for 2 ≤ m ≤ {m_max}"),
        redivisions.as_ref().is_ok_and(|t| t.len() == m_max.saturating_sub(1)),
        redivisions.as_ref().err().map(|e| e.to_string()),
    );
    out.set("pack", pack.name());
    out.set("p", int(pack.p()));
    out.set("h", level_texts(&outcome.h, ctx.depth)?);
    out.set("defect_sizes", json!(outcome.defect_sizes));
    out.set(
        "anchors",
        outcome
            .trace
            .levels
            .iter()
            .map(|l| l.classes.iter().filter_map(|c| c.anchor.as_ref().map(Label::to_string)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    );
    Ok(out)
}

fn first_coords(es: &[GroupElement]) -> Vec<BigInt> {
    es.iter().map(|e| e.coords().first().cloned().unwrap_or_default()).collect()
}

fn coset_tower_op(
    ctx: &mut Ctx,
    q: &IntRule,
    a: &ElementRule,
    constants: Option<&[i64]>,
    moduli: Option<&[i64]>,
) -> Result<Outcome> {
    let system = EquationSystem::new(ctx.group, q.clone(), a.clone())?;
    let tower = coset_tower(&system, ctx.depth)?;
    let mut out = Outcome::default();
    out.set("tower", tower.to_json());
    out.check("c_N+1 ≡ c_N mod q_<N+1·A at every level", true, None);
    let matches = |got: &[BigInt], want: &[i64]| {
        want.len() <= got.len() && want.iter().zip(got).all(|(w, g)| BigInt::from(*w) == *g)
    };
    if let Some(want) = constants {
        let got = first_coords(&tower.constants);
        out.check(format!("constants begin {want:?}"), matches(&got, want), None);
    }
    if let Some(want) = moduli {
        out.check(format!("moduli begin {want:?}"), matches(&tower.moduli, want), None);
    }
    Ok(out)
}

fn certify_op(
    ctx: &mut Ctx,
    q: &IntRule,
    a: &ElementRule,
    expect: Option<CertExpectation>,
    expect_depth: Option<usize>,
) -> Result<Outcome> {
    let system = EquationSystem::new(ctx.group, q.clone(), a.clone())?;
    let mut out = Outcome::default();
    let verdict = match certify_noncotorsion(&system, ctx.depth) {
        Err(Error::Precondition(reason)) => {
            out.set("verdict", json!({"verdict": "refused", "reason": reason}));
            if let Some(want) = expect {
                out.check("certificate outcome is as expected", want == CertExpectation::Refused, None);
            }
            return Ok(out);
        }
        other => other?,
    };
    out.set("verdict", serde_json::to_value(&verdict).expect("serializes"));
    let got = match verdict {
        CertificateVerdict::Certified(_) => CertExpectation::Certified,
        CertificateVerdict::Inconclusive { .. } => CertExpectation::Inconclusive,
    };
    if let Some(want) = expect {
        out.check("certificate outcome is as expected", got == want, Some(format!("{got:?}")));
    }
    if let Some(cert) = verdict.certificate() {
        // Audit the certificate against an independently rebuilt coset tower.
        let tower = coset_tower(&system, cert.depth)?;
        let sign = BigInt::from(cert.sign);
        let constants: Vec<BigInt> = tower.constants.iter().map(|c| &c.coords()[cert.coordinate] * &sign).collect();
        out.check(
            "certificate constants and moduli match the coset tower",
            constants == cert.constants && tower.moduli == cert.moduli,
            None,
        );
        let s = cert.window_start;
        let window_ok = cert.depth + 1 - s == WINDOW
            && (s..=cert.depth).all(|n| !constants[n].is_negative() && constants[n] < tower.moduli[n])
            && (s..cert.depth).all(|n| {
                constants[n] < constants[n + 1]
                    && &tower.moduli[n] - &constants[n] < &tower.moduli[n + 1] - &constants[n + 1]
            });
        out.check("window: 0 ≤ c_N < q_<N+1, c_N and the gap strictly increase", window_ok, None);
        let tail = q.tail_bounds(cert.tail_from);
        out.check(
            "tail: q_n ≥ 2 and unbounded",
            tail.max.is_none() && tail.min.is_some_and(|m| m >= BigInt::from(2)),
            None,
        );
        if let Some(d) = expect_depth {
            out.check(format!("certificate fires by depth {d}"), cert.depth <= d, Some(format!("N* = {}", cert.depth)));
        }
    }
    Ok(out)
}

/// All `x_0` in the search range admitting `x_1, …, x_{through+1}` that solve
/// equations `0..=through`, over `Z` or `Z/k` on one coordinate.
pub fn extendable_starts(
    group: &GroupRef,
    q: &IntRule,
    a: &ElementRule,
    bound: u64,
    through: usize,
) -> Result<Vec<BigInt>> {
    if group.rank() != 1 {
        return Err(Error::Precondition(format!("brute force needs a cyclic group, got {group}")));
    }
    let order = group.coordinate_order(0).cloned();
    let starts: Vec<BigInt> = match &order {
        Some(k) => (0..k.to_u64().unwrap_or(u64::MAX)).map(big).collect(),
        None => (-(bound as i64)..=bound as i64).map(BigInt::from).collect(),
    };
    let reduce = |x: BigInt| match &order {
        Some(k) => ((x % k) + k) % k,
        None => x,
    };
    let mut good = Vec::new();
    for x0 in starts {
        let mut frontier: BTreeSet<BigInt> = BTreeSet::from([x0.clone()]);
        for n in 0..=through {
            let qn = q.term(n);
            let an = a.element(group, n)?.coords()[0].clone();
            let mut next = BTreeSet::new();
            for x in &frontier {
                let rhs = reduce(x - &an);
                match &order {
                    None if qn.is_zero() => {
                        return Err(Error::Precondition(format!("q_{n} = 0 leaves x_{} free in Z", n + 1)))
                    }
                    None => {
                        if (&rhs % &qn).is_zero() {
                            next.insert(&rhs / &qn);
                        }
                    }
                    Some(k) => {
                        let mut y = BigInt::zero();
                        while &y < k {
                            if reduce(&qn * &y) == rhs {
                                next.insert(y.clone());
                            }
                            y += BigInt::one();
                        }
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        if !frontier.is_empty() {
            good.push(x0);
        }
    }
    Ok(good)
}

fn brute_force_op(
    ctx: &mut Ctx,
    q: &IntRule,
    a: &ElementRule,
    bound: u64,
    through: usize,
    expect_extendable: bool,
) -> Result<Outcome> {
    let good = extendable_starts(ctx.group, q, a, bound, through)?;
    let mut out = Outcome::default();
    out.set("extendable", good.len());
    out.set("first", ints(&good[..good.len().min(8)]));
    out.check(
        format!("some x_0 extends through equation {through}: {expect_extendable}"),
        good.is_empty() != expect_extendable,
        None,
    );
    // Every extendable start must lie in the coset the tower predicts.
    let system = EquationSystem::new(ctx.group, q.clone(), a.clone())?;
    let tower = coset_tower(&system, through)?;
    let outside: Vec<String> = good
        .iter()
        .filter(|x| !tower.admits(through, &GroupElement::new(ctx.group, vec![(*x).clone()]).expect("in group")))
        .map(|x| format!("x_0 = {x}"))
        .collect();
    out.check_all("extendable starts lie in c_N + q_<N+1·A", &outside);
    Ok(out)
}

fn counting_op(ctx: &mut Ctx, k0: &IntRule, n_max: usize, h0s: &[u64], random: usize, h0_max: u64) -> Result<Outcome> {
    let witnesses = build_dm_witnesses(ctx.group, n_max)?;
    let schedule = support_schedule(k0, n_max)?;
    let mut all: Vec<u64> = h0s.to_vec();
    all.extend((0..random).map(|_| ctx.rng.gen_range(0..=h0_max)));
    let mut failures = Vec::new();
    let mut results = Vec::with_capacity(all.len());
    for h0 in all {
        let candidate = CountingCandidate::extremal(big(h0), k0, n_max)?;
        let got = verify_counting_contradiction(k0, &candidate, &witnesses, n_max);
        let fine = match &got {
            Ok(r) => r.contradiction as u64 == h0,
            Err(Error::NoWitness { .. }) => h0 > n_max as u64,
            Err(_) => false,
        };
        if !fine {
            failures.push(format!("|h_0(s)| = {h0}: {:?}", got.as_ref().map(|r| r.contradiction)));
        }
        results.push(match got {
            Ok(r) => json!({"h0": h0, "contradiction": r.contradiction}),
            Err(e) => json!({"h0": h0, "error": e.to_string()}),
        });
    }
    let mut out = Outcome::default();
    out.set("schedule", ints(&schedule[..schedule.len().min(8)]));
    out.set("candidates", results);
    out.check_all("the contradiction index is |h_0(s)| whenever it lies in the window", &failures);
    Ok(out)
}
