use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use prolim_core::abelian::{enumerate_elements, GroupElement, GroupRef};
use prolim_core::cotorsion::{
    build_dm_witnesses, certify_noncotorsion, coset_tower, solve_truncated, verify_counting_contradiction,
    CertificateVerdict, CountingCandidate, EquationSystem,
};
use prolim_core::rules::{ElementRule, IntRule, IntSequence};
use prolim_core::Error;
use proptest::prelude::*;

fn grp(s: &str) -> GroupRef {
    Arc::new(s.parse().unwrap())
}

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn q_rule() -> impl Strategy<Value = IntRule> {
    prop_oneof![
        Just(IntRule::factorial_step()),
        (1i64..=3, 1i64..=2).prop_map(|(start, step)| IntRule::Arithmetic {
            start: BigInt::from(start),
            step: BigInt::from(step)
        }),
        (prop::collection::vec(1i64..=4, 0..=3), prop::collection::vec(1i64..=4, 1..=2))
            .prop_map(|(t, tail)| IntRule::table(big(&t), big(&tail))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    /// `a_n = x_n − q_n·x_{n+1}` for a chosen `x` is solvable, so it is never certified.
    #[test]
    fn solvable_systems_are_not_certified(
        q in q_rule(),
        xs in prop::collection::vec(-6i64..=6, 1..=6),
        depth in 4usize..=10,
    ) {
        let z = grp("Z");
        let x = |n: usize| BigInt::from(*xs.get(n).unwrap_or(&0));
        let a: Vec<BigInt> = (0..xs.len()).map(|n| x(n) - q.term(n) * x(n + 1)).collect();
        let system = EquationSystem::new(&z, q.clone(), ElementRule::new(big(&[1]), IntRule::table(a, big(&[0])))).unwrap();
        let verdict = certify_noncotorsion(&system, depth).unwrap();
        prop_assert!(matches!(verdict, CertificateVerdict::Inconclusive { .. }), "{verdict:?}");
        let x0 = GroupElement::new(&z, vec![x(0)]).unwrap();
        let tower = coset_tower(&system, depth).unwrap();
        for n in 0..=depth {
            prop_assert!(tower.admits(n, &x0));
        }
        let sol = solve_truncated(&system, depth).unwrap();
        prop_assert_eq!(&sol.x0_constant, &tower.constants[depth]);
        let chosen: Vec<GroupElement> = (0..=depth + 1).map(|n| GroupElement::new(&z, vec![x(n)]).unwrap()).collect();
        prop_assert!(system.residuals(&chosen).iter().all(|r| r.is_zero()));
    }

    /// On finite groups the coset at `N` is exactly the set of `x_0` that
    /// extend through equation `N`, computed backwards by enumeration.
    #[test]
    fn coset_tower_matches_enumeration(
        g in prop::sample::select(vec!["Z/12", "Z/8", "Z/2 + Z/6", "Z/9 + Z/3", "Z/30"]),
        q in q_rule(),
        a in prop::collection::vec(-5i64..=5, 1..=4),
        base in -3i64..=3,
        depth in 0usize..=5,
    ) {
        let group = grp(g);
        let coords = {
            let mut c = vec![BigInt::from(0); group.rank()];
            c[0] = BigInt::from(base);
            c
        };
        let system = EquationSystem::new(&group, q, ElementRule::new(coords, IntRule::table(big(&a), big(&[1])))).unwrap();
        let tower = coset_tower(&system, depth).unwrap();
        let all = enumerate_elements(&group);
        let key = |x: &GroupElement| x.coords().to_vec();
        for n in 0..=depth {
            let mut reach: BTreeSet<Vec<BigInt>> = all.iter().map(key).collect();
            for k in (0..=n).rev() {
                reach = all
                    .iter()
                    .filter(|y| reach.contains(&key(y)))
                    .map(|y| key(&(&system.a(k) + &y.scale(&system.q(k)))))
                    .collect();
            }
            for x in &all {
                prop_assert_eq!(tower.admits(n, x), reach.contains(&key(x)), "N = {}, x = {}", n, x);
            }
        }
    }

    #[test]
    fn counting_index_is_h0(h0 in 0u64..=40, k0 in prop_oneof![
        Just(IntRule::constant(0)),
        (0i64..=3).prop_map(IntRule::constant),
        (prop::collection::vec(0i64..=3, 0..=4), prop::collection::vec(0i64..=2, 1..=2))
            .prop_map(|(t, tail)| IntRule::table(big(&t), big(&tail))),
    ]) {
        let z = grp("Z");
        let n_max = 30;
        let witnesses = build_dm_witnesses(&z, n_max).unwrap();
        let candidate = CountingCandidate::extremal(BigInt::from(h0), &k0, n_max).unwrap();
        match verify_counting_contradiction(&k0, &candidate, &witnesses, n_max) {
            Ok(report) => prop_assert_eq!(report.contradiction as u64, h0),
            Err(Error::NoWitness { .. }) => prop_assert!(h0 > n_max as u64),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}

#[test]
fn factorial_system_is_certified() {
    let z = grp("Z");
    let system = EquationSystem::new(&z, IntRule::factorial_step(), ElementRule::first_generator(IntRule::constant(1))).unwrap();
    let tower = coset_tower(&system, 4).unwrap();
    assert_eq!(tower.moduli, big(&[1, 2, 6, 24, 120]));
    let c = certify_noncotorsion(&system, 20).unwrap();
    assert_eq!(c.certificate().expect("certified").depth, 4);

    let z12 = grp("Z/12");
    let bounded = EquationSystem::new(&z12, IntRule::factorial_step(), ElementRule::first_generator(IntRule::constant(1))).unwrap();
    assert!(matches!(certify_noncotorsion(&bounded, 10), Err(Error::Precondition(_))));
    let sol = solve_truncated(&bounded, 20).unwrap();
    assert!(bounded.residuals(&sol.particular).iter().all(|r| r.is_zero()));
}
