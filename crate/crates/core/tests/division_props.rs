//! Division on random finite towers, where fibers merge and anchors matter.

use std::sync::Arc;

use num_bigint::BigInt;
use prolim_core::abelian::{GroupElement, GroupRef};
use prolim_core::division::{
    divide_everywhere, divide_off_finite, p_omega_divide, power_pack, redivide, verify_division, zero_pack,
};
use prolim_core::smash::{pushforward, Label, PointedSet, SmashElement};
use prolim_core::tower::{custom_tower, LimitChain, LimitThread, ThreadSpec, Tower};
use prolim_core::Error;
use proptest::prelude::*;

fn grp(s: &str) -> GroupRef {
    Arc::new(s.parse().unwrap())
}

#[derive(Clone, Debug)]
struct Setup {
    sizes: Vec<usize>,
    /// `maps[n][i]` is the image of label `i` at level `n + 1`; `None` is the basepoint.
    maps: Vec<Vec<Option<usize>>>,
    /// Top labels of the threads.
    tops: Vec<usize>,
    /// Raw top-level coefficients.
    raw: Vec<i64>,
    m: i64,
}

fn setup() -> impl Strategy<Value = Setup> {
    (prop::collection::vec(1usize..=4, 2..=6), 2i64..=4)
        .prop_flat_map(|(sizes, m)| {
            let maps: Vec<_> = sizes
                .windows(2)
                .map(|w| prop::collection::vec(prop::option::weighted(0.85, 0..w[0]), w[1]))
                .collect();
            let top = *sizes.last().unwrap();
            (
                Just(sizes),
                maps,
                prop::collection::vec(0..top, 0..=2),
                prop::collection::vec(-9i64..=9, top),
                Just(m),
            )
        })
        .prop_map(|(sizes, maps, tops, raw, m)| Setup { sizes, maps, tops, raw, m })
}

struct Built {
    tower: Tower,
    h: LimitChain,
    threads: Vec<LimitThread>,
    depth: usize,
}

fn build(s: &Setup, group: &GroupRef) -> Built {
    let depth = s.sizes.len() - 1;
    let levels: Vec<PointedSet> =
        s.sizes.iter().map(|&k| PointedSet::new((0..k as u64).map(Label::Nat)).unwrap()).collect();
    let maps: Vec<Vec<(Label, Label)>> = s
        .maps
        .iter()
        .map(|m| {
            m.iter()
                .enumerate()
                .map(|(i, t)| (Label::Nat(i as u64), t.map_or(Label::Base, |t| Label::Nat(t as u64))))
                .collect()
        })
        .collect();
    let tower = custom_tower("random", levels, maps).unwrap();

    let threads: Vec<LimitThread> = s
        .tops
        .iter()
        .map(|&t| {
            let mut values = vec![Label::Nat(t as u64)];
            for n in (1..=depth).rev() {
                let below = tower.map(n).unwrap().apply(values.last().unwrap());
                values.push(below);
            }
            values.reverse();
            LimitThread::from_spec(&tower, ThreadSpec::Table { values })
        })
        .collect();

    // Off the threads every top entry is a multiple of m, so every pushforward is too.
    let marked: Vec<u64> = s.tops.iter().map(|&t| t as u64).collect();
    let top_carrier = tower.level(depth).unwrap();
    let terms = s.raw.iter().enumerate().map(|(i, &r)| {
        let c = if marked.contains(&(i as u64)) { r } else { r * s.m };
        (Label::Nat(i as u64), GroupElement::from_ints(group, &vec![c; group.rank()]).unwrap())
    });
    let mut values = vec![SmashElement::new(&top_carrier, group, terms).unwrap()];
    for n in (1..=depth).rev() {
        let below = pushforward(tower.map(n).unwrap().as_ref(), values.last().unwrap()).unwrap();
        values.push(below);
    }
    values.reverse();
    let h = LimitChain::from_fn(&tower, group, "pushed down", move |n| Ok(values[n].clone()));
    Built { tower, h, threads, depth }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn divides_off_threads_on_random_towers(s in setup(), g in prop::sample::select(vec!["Z", "Z/4 + Z", "Z/12"])) {
        let group = grp(g);
        let b = build(&s, &group);
        let m = BigInt::from(s.m);
        let out = divide_off_finite(&b.h, &m, &b.threads, b.depth).unwrap();
        verify_division(&b.h, &m, &b.threads, &out.g, b.depth).unwrap();
        for record in &out.trace.levels {
            let marks: Vec<Label> = b.threads.iter().map(|x| x.value(record.level).unwrap()).collect();
            prop_assert!(record.defect.iter().all(|a| marks.contains(a)));
            for class in &record.classes {
                prop_assert_eq!(class.anchor.is_none(), class.over.is_base() || record.level == 0);
                if let Some(a) = &class.anchor {
                    prop_assert_eq!(class.anchor_on_thread, marks.contains(a));
                    prop_assert!(class.members.contains(a));
                }
            }
        }
        // The choices are deterministic.
        let again = divide_off_finite(&b.h, &m, &b.threads, b.depth).unwrap();
        prop_assert_eq!(&out.trace, &again.trace);
        for n in 0..=b.depth {
            prop_assert_eq!(out.g.value(n).unwrap(), again.g.value(n).unwrap());
        }
        prop_assert!(b.tower.same_as(out.g.tower()));
    }

    #[test]
    fn everywhere_is_exact(s in setup()) {
        let z = grp("Z");
        let s = Setup { tops: vec![], ..s };
        let b = build(&s, &z);
        let m = BigInt::from(s.m);
        let g = divide_everywhere(&b.h, &m, b.depth).unwrap();
        for n in 0..=b.depth {
            prop_assert_eq!(g.value(n).unwrap().scalar_mul(&m), b.h.value(n).unwrap());
        }
    }

    #[test]
    fn indivisible_entries_are_reported(s in setup()) {
        // One top entry of 1 away from every thread cannot be divided.
        let z = grp("Z");
        let s = Setup { tops: vec![], raw: s.raw.iter().map(|_| 0).collect(), ..s };
        let mut s2 = s.clone();
        s2.m = 1;
        s2.raw[0] = 1;
        let b = build(&s2, &z);
        let m = BigInt::from(s.m);
        let err = divide_off_finite(&b.h, &m, &[], b.depth).unwrap_err();
        prop_assert!(matches!(err, Error::DivisionFailure { .. }), "{err}");
    }
}

#[test]
fn power_packs_divide_off_their_threads() {
    for (p, g) in [(2, "Z"), (3, "Z"), (3, "Z/81"), (5, "Z + Z/25")] {
        let p = BigInt::from(p);
        let pack = power_pack(&p, &grp(g)).unwrap();
        let out = divide_off_finite(pack.f(), &p, &pack.threads_up_to(1), 20).unwrap();
        verify_division(pack.f(), &p, &pack.threads_up_to(1), &out.g, 20).unwrap();

        let omega = p_omega_divide(&pack, 20, 5).unwrap();
        assert!(omega.defect_sizes.iter().all(|&d| d <= pack.l(1)), "{g}");
        assert_eq!(redivide(&pack, &omega.h, 20, 5).unwrap().len(), 4);
        assert_eq!(omega.trace, p_omega_divide(&pack, 20, 5).unwrap().trace);
    }
    let zero = p_omega_divide(&zero_pack(&BigInt::from(2), &grp("Z")), 10, 3).unwrap();
    assert!(zero.defect_sizes.iter().all(|&d| d == 0));
}

#[test]
fn divisor_must_exceed_one() {
    let z = grp("Z");
    let h = LimitChain::zero(&prolim_core::tower::canonical_tower(), &z);
    assert!(matches!(divide_off_finite(&h, &BigInt::from(1), &[], 3), Err(Error::Precondition(_))));
}
