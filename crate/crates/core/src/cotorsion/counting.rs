//! Replays the support-counting argument against a candidate solution
//! `[h_n]` of `x_n − q_n·x_{n+1} = [g_n]`, sampled at one index `s`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::witnesses::DmWitnesses;
use crate::error::{Error, Result};
use crate::rules::{IntRule, IntSequence};

/// `k_n = (n+1) + Σ_{l≤n} k⁰_l + Σ_{l<n} k_l`.
pub fn support_schedule(k0: &IntRule, n_max: usize) -> Result<Vec<BigInt>> {
    let mut k = Vec::with_capacity(n_max + 1);
    let mut sum_k0 = BigInt::zero();
    let mut sum_k = BigInt::zero();
    for n in 0..=n_max {
        let k0n = k0.term(n);
        if k0n.is_negative() {
            return Err(Error::Precondition(format!("k⁰_{n} = {k0n} is negative")));
        }
        sum_k0 += k0n;
        let kn = BigInt::from(n + 1) + &sum_k0 + &sum_k;
        sum_k += &kn;
        k.push(kn);
    }
    Ok(k)
}

/// Support sizes at the sampled index for one `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateLevel {
    /// `|f_n(s)|` for `f_n = g_n − h_n + q_n·h_{n+1}`.
    #[serde(with = "crate::serde_int")]
    pub f: BigInt,
    /// `|g_n(s)|`.
    #[serde(with = "crate::serde_int")]
    pub g: BigInt,
    /// `|q_{<n}·h_n(s)|`.
    #[serde(with = "crate::serde_int")]
    pub h: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingCandidate {
    /// `|h_0(s)|`.
    #[serde(with = "crate::serde_int")]
    pub h0: BigInt,
    pub levels: Vec<CandidateLevel>,
}

impl CountingCandidate {
    /// The candidate meeting every bound with equality: `|f_n| = k⁰_n`,
    /// `|g_n| = k_n`, and supports of `q_{<n}h_n` as large as the
    /// containment allows.
    pub fn extremal(h0: BigInt, k0: &IntRule, n_max: usize) -> Result<Self> {
        let k = support_schedule(k0, n_max)?;
        let mut h = h0.clone();
        let mut levels = Vec::with_capacity(n_max + 1);
        for (n, kn) in k.into_iter().enumerate() {
            let f = k0.term(n);
            let next = &h + &kn + &f;
            levels.push(CandidateLevel { f, g: kn, h });
            h = next;
        }
        Ok(CountingCandidate { h0, levels })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountingLevel {
    pub n: usize,
    #[serde(serialize_with = "crate::serde_int::serialize")]
    pub k: BigInt,
    #[serde(serialize_with = "crate::serde_int::serialize")]
    pub k0: BigInt,
    /// `|h_0(s)| + Σ_{l<n} k_l + Σ_{l≤n} k⁰_l`.
    #[serde(serialize_with = "crate::serde_int::serialize")]
    pub bound: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountingReport {
    /// First `n` with `k_n` above its bound.
    pub contradiction: usize,
    pub levels: Vec<CountingLevel>,
}

/// Validates the candidate against the schedule, the support containment of
/// the recurrence, the lemma bound and the reduced-size equality, then
/// returns the first level where `k_n` exceeds the derived bound.
pub fn verify_counting_contradiction(
    k0: &IntRule,
    candidate: &CountingCandidate,
    witnesses: &DmWitnesses,
    n_max: usize,
) -> Result<CountingReport> {
    let k = support_schedule(k0, n_max)?;
    if candidate.levels.len() <= n_max {
        return Err(Error::Precondition(format!(
            "candidate has {} levels, {} needed",
            candidate.levels.len(),
            n_max + 1
        )));
    }
    if witnesses.depth() < n_max {
        return Err(Error::Precondition(format!("d_m witnesses reach only m = {}", witnesses.depth())));
    }
    witnesses.verify()?;
    let malformed = |level: usize, detail: String| Error::MalformedCandidate { level, detail };
    if candidate.levels[0].h != candidate.h0 {
        return Err(malformed(0, format!("|h_0(s)| = {} but level 0 lists {}", candidate.h0, candidate.levels[0].h)));
    }

    let mut levels = Vec::with_capacity(n_max + 1);
    let mut contradiction = None;
    let mut sum_k = BigInt::zero();
    let mut sum_k0 = BigInt::zero();
    let mut lemma = candidate.h0.clone();
    for n in 0..=n_max {
        let c = &candidate.levels[n];
        let k0n = k0.term(n);
        if [&c.f, &c.g, &c.h].iter().any(|x| x.is_negative()) {
            return Err(malformed(n, "negative support size".into()));
        }
        if c.f > k0n {
            return Err(malformed(n, format!("|f_n(s)| = {} exceeds k⁰_n = {k0n}", c.f)));
        }
        if c.g != k[n] {
            return Err(malformed(n, format!("|g_n(s)| = {} but the schedule has k_n = {}", c.g, k[n])));
        }
        // |q_{<n}h_n(s)| ≤ |h_0(s)| + Σ_{l<n} (|q_{<l}g_l(s)| + |q_{<l}f_l(s)|).
        if c.h > lemma {
            return Err(malformed(n, format!("|q_<n h_n(s)| = {} exceeds the lemma bound {lemma}", c.h)));
        }
        if n > 0 {
            let p = &candidate.levels[n - 1];
            if c.h > &p.h + &p.g + &p.f {
                return Err(malformed(
                    n,
                    "supp(q_<n h_n) is not inside supp(q_<n−1 h_n−1) ∪ supp(q_<n−1 g_n−1) ∪ supp(q_<n−1 f_n−1)".into(),
                ));
            }
        }
        lemma += &c.g + &c.f;
        sum_k0 += &k0n;
        let bound = &candidate.h0 + &sum_k + &sum_k0;
        if contradiction.is_none() && k[n] > bound {
            // The entries of g_n are all d_n, so |[q_<n g_n(s)]| = |g_n(s)|
            // in A/q_<n+1 A, and that is at most |f_n(s)| + |q_<n h_n(s)|.
            if &c.f + &c.h >= k[n] {
                return Err(malformed(n, "reduced sizes exceed the bound the equation forces".into()));
            }
            contradiction = Some(n);
        }
        sum_k += &k[n];
        levels.push(CountingLevel {
            n,
            k: k[n].clone(),
            k0: k0n,
            bound,
        });
    }
    match contradiction {
        Some(contradiction) => Ok(CountingReport { contradiction, levels }),
        None => Err(Error::NoWitness { depth: n_max }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cotorsion::build_dm_witnesses;
    use std::sync::Arc;

    fn witnesses(n: usize) -> DmWitnesses {
        build_dm_witnesses(&Arc::new("Z".parse().unwrap()), n).unwrap()
    }

    #[test]
    fn schedule_values() {
        let k = support_schedule(&IntRule::constant(0), 5).unwrap();
        let expect: Vec<BigInt> = [1, 3, 7, 15, 31, 63].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(k, expect);
        let k = support_schedule(&IntRule::constant(2), 2).unwrap();
        // k_0 = 1 + 2, k_1 = 2 + 4 + 3, k_2 = 3 + 6 + 12.
        assert_eq!(k, vec![BigInt::from(3), BigInt::from(9), BigInt::from(21)]);
    }

    #[test]
    fn contradiction_at_h0() {
        let zero = IntRule::constant(0);
        for h0 in [0, 1, 5, 9] {
            let c = CountingCandidate::extremal(BigInt::from(h0), &zero, 12).unwrap();
            let report = verify_counting_contradiction(&zero, &c, &witnesses(12), 12).unwrap();
            assert_eq!(report.contradiction, h0);
        }
        let c = CountingCandidate::extremal(BigInt::from(20), &zero, 10).unwrap();
        assert!(matches!(
            verify_counting_contradiction(&zero, &c, &witnesses(10), 10),
            Err(Error::NoWitness { depth: 10 })
        ));
    }

    #[test]
    fn malformed_candidates() {
        let zero = IntRule::constant(0);
        let mut c = CountingCandidate::extremal(BigInt::from(3), &zero, 6).unwrap();
        c.levels[2].h += 1;
        assert!(matches!(
            verify_counting_contradiction(&zero, &c, &witnesses(6), 6),
            Err(Error::MalformedCandidate { level: 2, .. })
        ));
        let mut c = CountingCandidate::extremal(BigInt::from(3), &zero, 6).unwrap();
        c.levels[1].g += 1;
        assert!(matches!(
            verify_counting_contradiction(&zero, &c, &witnesses(6), 6),
            Err(Error::MalformedCandidate { level: 1, .. })
        ));
    }
}
