//! Acceptance run: one line per criterion with its runtime budget. Built with
//! `harness = false` so the criteria run one after another and their timings
//! are not skewed by other tests.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use prolim_cli::{bundled, run, Overrides, BUNDLED};
use prolim_core::abelian::arith::big_omega;
use prolim_core::abelian::{
    enumerate_elements, p_length, smith_decompose, stabilization_index, verify_lp_scaling, FgAbelianGroup,
    GroupElement, GroupHom, GroupRef, IntMatrix, PLength, Stabilization, Subgroup,
};
use prolim_core::cotorsion::{
    build_dm_witnesses, certify_noncotorsion, coset_tower, solve_truncated, verify_counting_contradiction,
    CountingCandidate, EquationSystem,
};
use prolim_core::division::{divide_off_finite, p_omega_divide, power_pack, redivide, verify_division, zero_pack};
use prolim_core::rho::{factorize_bounded, injectivity_witness, FormalSum, HClass};
use prolim_core::rules::{ElementRule, IntRule, IntSequence};
use prolim_core::smash::Label;
use prolim_core::tower::{canonical_tower, constant_tower, growing_tower, LimitThread, ThreadSpec, Tower};
use prolim_core::Error;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Name, check and runtime budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, Option<u64>);

fn grp(s: &str) -> GroupRef {
    Arc::new(s.parse().unwrap())
}

fn rng(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + criterion)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn el(g: &GroupRef, cs: &[i64]) -> GroupElement {
    GroupElement::from_ints(g, cs).unwrap()
}

fn random_element(r: &mut ChaCha8Rng, g: &GroupRef, nonzero: bool) -> GroupElement {
    loop {
        let cs: Vec<i64> = (0..g.rank()).map(|_| r.gen_range(-9..=9)).collect();
        let e = el(g, &cs);
        if !nonzero || !e.is_zero() {
            return e;
        }
    }
}

/// Cyclic orders whose product is at most `max`.
fn finite_group(r: &mut ChaCha8Rng, max: u32) -> (GroupRef, Vec<u32>) {
    loop {
        let k = r.gen_range(1..=3);
        let orders: Vec<u32> = (0..k).map(|_| r.gen_range(2..=16)).collect();
        if orders.iter().product::<u32>() <= max {
            let big: Vec<BigInt> = orders.iter().map(|&o| BigInt::from(o)).collect();
            return (FgAbelianGroup::from_cyclic_orders(&big).group, orders);
        }
    }
}

fn criterion_1() -> Outcome {
    let mut r = rng(1);
    for i in 0..1000 {
        let (rows, cols) = (r.gen_range(1..=8), r.gen_range(1..=8));
        let m: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| r.gen_range(-20..=20)).collect()).collect();
        let m = IntMatrix::from_rows(&m);
        let snf = smith_decompose(&m);
        ensure(snf.u.mul(&m).mul(&snf.v) == snf.s, || format!("matrix {i}: U·M·V ≠ S"))?;
        ensure(snf.s.is_diagonal(), || format!("matrix {i}: S not diagonal"))?;
        ensure(snf.u.mul(&snf.u_inv) == IntMatrix::identity(rows), || format!("matrix {i}: U not unimodular"))?;
        let dv = smith_decompose(&snf.v).diagonal();
        ensure(dv.iter().all(One::is_one), || format!("matrix {i}: V not unimodular"))?;
        let d: Vec<BigInt> = snf.diagonal().into_iter().filter(|x| !x.is_zero()).collect();
        ensure(d.windows(2).all(|w| w[1].is_multiple_of(&w[0])), || format!("matrix {i}: divisibility chain"))?;
    }
    let mut homs = 0;
    while homs < 200 {
        let (a, ao) = finite_group(&mut r, 200);
        let (b, _) = finite_group(&mut r, 200);
        let e = b.exponent().unwrap();
        let mut mat = IntMatrix::zeros(b.rank(), a.rank());
        for j in 0..a.rank() {
            let scale = &e / e.gcd(a.coordinate_order(j).unwrap());
            for i in 0..b.rank() {
                mat[(i, j)] = BigInt::from(r.gen_range(-30..=30)) * &scale;
            }
        }
        let f = GroupHom::new(&a, &b, mat).map_err(|e| e.to_string())?;
        let source = enumerate_elements(&a);
        let images: BTreeSet<Vec<BigInt>> = source.iter().map(|x| f.apply(x).unwrap().coords().to_vec()).collect();
        let zeros = source.iter().filter(|x| f.apply(x).unwrap().is_zero()).count();
        let (ker, sub) = f.kernel();
        ensure(ker.order() == Some(BigInt::from(zeros)), || format!("kernel order on {ao:?}"))?;
        ensure(source.iter().all(|x| sub.contains(x) == f.apply(x).unwrap().is_zero()), || "kernel membership".into())?;
        let (coker, proj) = f.cokernel();
        ensure(coker.order() == Some(b.order().unwrap() / BigInt::from(images.len())), || "cokernel order".into())?;
        ensure(
            enumerate_elements(&b).iter().all(|y| proj.apply(y).unwrap().is_zero() == images.contains(y.coords())),
            || "cokernel projection".into(),
        )?;
        homs += 1;
    }
    Ok("1000 matrices, 200 homs on groups of order ≤ 200".into())
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let primes = [2u32, 3, 5, 7, 11, 13];
    for _ in 0..500 {
        let (g, orders) = finite_group(&mut r, 4096);
        let p = *primes.choose(&mut r).unwrap();
        let expect = orders.iter().map(|&o| {
            let (mut o, mut k) = (o, 0);
            while o % p == 0 {
                o /= p;
                k += 1;
            }
            k
        });
        let expect = expect.max().unwrap();
        let got = p_length(&g, &BigInt::from(p), 64).map_err(|e| e.to_string())?;
        ensure(got == PLength::Finite(expect), || format!("l_{p}({g}) = {got:?}, expected {expect}"))?;
    }
    for _ in 0..200 {
        let g = finite_group(&mut r, 4096).0;
        let pq: Vec<u32> = primes.choose_multiple(&mut r, 2).copied().collect();
        let (p, q) = (BigInt::from(pq[0]), BigInt::from(pq[1]));
        let v = verify_lp_scaling(&g, &p, &q).map_err(|e| e.to_string())?;
        ensure(v.agree, || format!("l_p scaling on {g}, p = {p}, q = {q}"))?;
    }
    for _ in 0..200 {
        let (g, orders) = finite_group(&mut r, 4096);
        let bound = 1 + orders.iter().map(|&o| big_omega(&BigInt::from(o)) as usize).sum::<usize>();
        let rule = IntRule::constant(r.gen_range(1..=12));
        match stabilization_index(&g, &rule, bound).map_err(|e| e.to_string())? {
            Stabilization::Stable(_) => {}
            other => return Err(format!("{g} with {rule:?}: {other}")),
        }
    }
    let z = stabilization_index(&grp("Z"), &IntRule::constant(2), 64).map_err(|e| e.to_string())?;
    ensure(z == Stabilization::NoneWithinDepth(64), || format!("Z with q ≡ 2: {z}"))?;
    ensure(z.to_string().contains("none within depth 64"), || format!("message: {z}"))?;
    Ok("500 p-lengths, 200 scalings, 200 stabilizations, Z none within depth 64".into())
}

fn birth_of(births: &[u64], k: u64) -> usize {
    let mut alive = 0;
    for (n, b) in births.iter().chain(std::iter::repeat(&1)).enumerate() {
        alive += b;
        if alive > k {
            return n;
        }
    }
    unreachable!()
}

/// A nonzero formal sum on a random tower: growing, canonical or constant.
fn random_sum(r: &mut ChaCha8Rng, g: &GroupRef) -> FormalSum {
    let len = r.gen_range(1..=5);
    let (tower, threads): (Tower, Vec<LimitThread>) = match r.gen_range(0..3) {
        0 => {
            let births: Vec<u64> = (0..r.gen_range(1..=8)).map(|_| r.gen_range(0..=3)).collect();
            let x = growing_tower(IntRule::table(births.iter().map(|&b| BigInt::from(b)).collect(), vec![BigInt::one()]));
            let labels: BTreeSet<u64> = (0..len).map(|_| r.gen_range(0..15)).collect();
            let ts = labels
                .iter()
                .map(|&k| {
                    LimitThread::from_spec(&x, ThreadSpec::Born { label: Label::Nat(k), birth: birth_of(&births, k) })
                })
                .collect();
            (x, ts)
        }
        1 => {
            let x = canonical_tower();
            let labels: BTreeSet<u64> = (0..len).map(|_| r.gen_range(0..20)).collect();
            let ts = labels.iter().map(|&k| LimitThread::canonical(&x, k)).collect();
            (x, ts)
        }
        _ => {
            let names: Vec<Label> = (0..6).map(|i| Label::name(&format!("c{i}"))).collect();
            let x = constant_tower(names.clone()).unwrap();
            let picked: BTreeSet<usize> = (0..len).map(|_| r.gen_range(0..6)).collect();
            let ts = picked
                .iter()
                .map(|&i| LimitThread::from_spec(&x, ThreadSpec::Constant { label: names[i].clone() }))
                .collect();
            (x, ts)
        }
    };
    let terms = threads.into_iter().map(|t| (t, random_element(r, g, true))).collect();
    FormalSum::new(&tower, g, terms, 40).unwrap()
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let groups = [grp("Z"), grp("Z/6"), grp("Z^2 + Z/4")];
    for i in 0..500 {
        let g = &groups[i % groups.len()];
        let sum = random_sum(&mut r, g);
        let t = injectivity_witness(&sum, 40).map_err(|e| format!("sum {i}: {e}"))?;
        // Separating: the thread values at t are distinct and off the basepoint.
        let values: BTreeSet<Label> = sum.terms().iter().map(|(x, _)| x.value(t).unwrap()).collect();
        ensure(values.len() == sum.len() && !values.contains(&Label::Base), || format!("sum {i}: level {t} does not separate"))?;
        let image = sum.rho_apply(t).unwrap();
        ensure(image.support_size() == sum.len(), || format!("sum {i}: ρ at level {t} loses a term"))?;
    }
    Ok("500 separating levels".into())
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let groups = [grp("Z"), grp("Z/12"), grp("Z + Z/6")];
    let mut done = 0;
    while done < 300 {
        let g = &groups[done % groups.len()];
        let sum = random_sum(&mut r, g);
        if sum.tower().name() == "growing" {
            continue;
        }
        let h = sum.rho_image();
        let back = factorize_bounded(&h, 40).map_err(|e| format!("sum {done}: {e}"))?;
        // Same terms in the same order: coefficients equal, threads equal through level 50.
        let same = back.len() == sum.len()
            && back.terms().iter().zip(sum.terms()).all(|((x, v), (y, w))| {
                v == w && (0..=50).all(|n| x.value(n).unwrap() == y.value(n).unwrap())
            });
        ensure(same, || format!("{} ≠ {}", back.to_text(), sum.to_text()))?;
        for n in 0..=50 {
            ensure(back.rho_apply(n).unwrap() == h.value(n).unwrap(), || format!("sum {done}: level {n}"))?;
        }
        done += 1;
    }
    let z = grp("Z");
    for i in 0..50 {
        let period: Vec<GroupElement> = (0..r.gen_range(1..=3)).map(|_| random_element(&mut r, &z, true)).collect();
        let prefix: Vec<GroupElement> = (0..r.gen_range(0..=3)).map(|_| random_element(&mut r, &z, false)).collect();
        let chain = HClass::new(&z, prefix, period).unwrap().to_chain(&canonical_tower());
        match factorize_bounded(&chain, 30) {
            Err(Error::RisingProfile { .. }) => {}
            other => return Err(format!("rising chain {i}: {other:?}")),
        }
    }
    Ok("300 round trips through level 50, 50 rising refusals".into())
}

fn criterion_5() -> Outcome {
    let depth = 40;
    let two = BigInt::from(2);
    let packs = [
        power_pack(&two, &grp("Z")),
        power_pack(&BigInt::from(3), &grp("Z")),
        power_pack(&BigInt::from(3), &grp("Z/81")),
        Ok(zero_pack(&two, &grp("Z"))),
    ];
    for pack in packs {
        let pack = pack.map_err(|e| e.to_string())?;
        let xs = pack.threads_up_to(1);
        let out = divide_off_finite(pack.f(), pack.p(), &xs, depth).map_err(|e| format!("{}: {e}", pack.name()))?;
        verify_division(pack.f(), pack.p(), &xs, &out.g, depth).map_err(|e| format!("{}: {e}", pack.name()))?;
    }
    let pack = power_pack(&two, &grp("Z")).unwrap();
    let out = p_omega_divide(&pack, depth, 5).map_err(|e| e.to_string())?;
    ensure(out.defect_sizes.len() == depth + 1, || "defect sizes cover every level".into())?;
    ensure(out.defect_sizes.iter().all(|&s| s <= 1), || format!("|p·h − f| = {:?}", out.defect_sizes))?;
    let traces = redivide(&pack, &out.h, depth, 5).map_err(|e| e.to_string())?;
    ensure(traces.len() == 4, || "re-division for m = 2..5".into())?;
    Ok(format!("4 packs at depth {depth}, p^ω recursion with |p·h − f| ≤ 1, re-division m ≤ 5"))
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    for name in ["Z/4", "Z/12", "Z + Z/6"] {
        let g = grp(name);
        let bound = g.exponent();
        for i in 0..200 {
            let prefix: Vec<GroupElement> = (0..r.gen_range(0..=3)).map(|_| random_element(&mut r, &g, false)).collect();
            let period: Vec<GroupElement> = (0..r.gen_range(1..=4)).map(|_| random_element(&mut r, &g, false)).collect();
            let c = HClass::new(&g, prefix, period.clone()).unwrap();
            for n in 1..=12 {
                let n = BigInt::from(n);
                let torsion = period.iter().all(|v| v.scale(&n).is_zero());
                ensure(c.in_torsion(&n) == torsion, || format!("{name} class {i}: H[{n}]"))?;
                let multiples = Subgroup::multiples(&g, &n);
                let divisible = period.iter().all(|v| multiples.contains(v));
                ensure(c.in_multiples(&n) == divisible, || format!("{name} class {i}: {n}H"))?;
            }
            if let Some(e) = &bound {
                ensure(c.scale(e).is_zero(), || format!("{name} class {i}: not {e}-bounded"))?;
            }
        }
    }
    for rank in 1..=3 {
        let g = grp(&format!("Z^{rank}"));
        for i in 0..200 {
            let period: Vec<GroupElement> = (0..r.gen_range(1..=4)).map(|_| random_element(&mut r, &g, true)).collect();
            let c = HClass::new(&g, vec![], period).unwrap();
            ensure((1..=12).all(|n| !c.in_torsion(&BigInt::from(n))), || format!("Z^{rank} class {i} is torsion"))?;
        }
    }
    Ok("600 classes on Z/4, Z/12, Z + Z/6; 600 on Z^r".into())
}

fn criterion_7() -> Outcome {
    let z = grp("Z");
    let a = ElementRule::first_generator(IntRule::constant(1));
    let system = EquationSystem::new(&z, IntRule::factorial_step(), a.clone()).map_err(|e| e.to_string())?;
    let tower = coset_tower(&system, 4).map_err(|e| e.to_string())?;
    let constants: Vec<BigInt> = tower.constants.iter().map(|c| c.coords()[0].clone()).collect();
    let ints = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
    ensure(constants == ints(&[1, 2, 4, 10, 34]), || format!("constants {constants:?}"))?;
    ensure(tower.moduli == ints(&[1, 2, 6, 24, 120]), || format!("moduli {:?}", tower.moduli))?;
    let verdict = certify_noncotorsion(&system, 20).map_err(|e| e.to_string())?;
    let cert = verdict.certificate().ok_or_else(|| format!("{verdict:?}"))?;
    ensure(cert.depth <= 4, || format!("certificate at depth {}", cert.depth))?;

    // x_{n+1} = (x_n − 1)/(n + 1) must stay integral through equation 7.
    let extendable = (-120i64..=120).filter(|&x0| {
        let mut x = x0;
        (0..=7).all(|n| {
            let d = n as i64 + 1;
            let ok = (x - 1) % d == 0;
            x = (x - 1) / d;
            ok
        })
    });
    let found: Vec<i64> = extendable.collect();
    ensure(found.is_empty(), || format!("extendable starts {found:?}"))?;

    let z12 = grp("Z/12");
    let finite = EquationSystem::new(&z12, IntRule::factorial_step(), a).map_err(|e| e.to_string())?;
    let sol = solve_truncated(&finite, 20).map_err(|e| e.to_string())?;
    ensure(finite.residuals(&sol.particular).iter().all(|r| r.is_zero()), || "Z/12 truncated solution".into())?;
    Ok(format!("certificate at depth {}, no start in [-120, 120], Z/12 solved at depth 20", cert.depth))
}

fn criterion_8() -> Outcome {
    let z = grp("Z");
    let n_max = 30;
    let w = build_dm_witnesses(&z, n_max).map_err(|e| e.to_string())?;
    w.verify().map_err(|e| e.to_string())?;
    ensure(w.q_rule() == IntRule::constant(2), || format!("q = {:?}", w.q_rule()))?;
    ensure(w.d.iter().all(|d| d == &el(&z, &[1])), || "d ≢ 1".into())?;
    for m in 0..=n_max {
        let lhs = w.partial_product(m) * &w.d[m].coords()[0];
        ensure(!lhs.is_multiple_of(&w.partial_product(m + 1)), || format!("q_<m d_m ∈ q_<m+1 Z at m = {m}"))?;
    }
    let mut r = rng(8);
    let k0 = IntRule::constant(0);
    for _ in 0..100 {
        let h0 = r.gen_range(0..=n_max as u64);
        let candidate = CountingCandidate::extremal(BigInt::from(h0), &k0, n_max).map_err(|e| e.to_string())?;
        let report = verify_counting_contradiction(&k0, &candidate, &w, n_max).map_err(|e| e.to_string())?;
        ensure(report.contradiction as u64 == h0, || format!("|h_0| = {h0}, index {}", report.contradiction))?;
    }
    ensure(k0.term(5).is_zero(), || "k⁰ ≡ 0".into())?;
    Ok(format!("witnesses through m = {n_max}, 100 candidates"))
}

fn criterion_9() -> Outcome {
    for (name, _) in BUNDLED {
        let once = run(bundled(name).unwrap(), Overrides::default()).map_err(|e| e.to_string())?;
        let twice = run(bundled(name).unwrap(), Overrides::default()).map_err(|e| e.to_string())?;
        ensure(once.comparable() == twice.comparable(), || format!("{name} differs between runs"))?;
        ensure(once.passed, || format!("{name} has failing checks"))?;
    }
    Ok(format!("{} bundled scenarios", BUNDLED.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("snf oracle", criterion_1, Some(10)),
        ("group decisions", criterion_2, Some(10)),
        ("rho injectivity", criterion_3, Some(5)),
        ("bounded round trip", criterion_4, Some(10)),
        ("division recursions", criterion_5, Some(20)),
        ("class identities", criterion_6, Some(5)),
        ("non-cotorsion certificate", criterion_7, Some(5)),
        ("witness machinery", criterion_8, Some(5)),
        ("determinism", criterion_9, None),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let late = limit.is_some_and(|s| took > Duration::from_secs(s));
        let budget = limit.map_or("none".to_string(), |s| format!("{s}s"));
        let (verdict, detail) = match (&outcome, late) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("over budget; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("criterion {} {verdict} {name} ({:.2}s, limit {budget}): {detail}", i + 1, took.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
