//! Integer helpers: primality, factorization, valuations, modular division.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn is_prime(n: &BigInt) -> bool {
    if n < &BigInt::from(2) {
        return false;
    }
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let mut d = BigInt::from(2);
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            return false;
        }
        d += 1;
    }
    true
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization of `|n|` by trial division, ascending primes.
pub fn factorize(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    if n.is_zero() {
        return out;
    }
    let mut d = BigInt::from(2);
    while &d * &d <= n {
        let mut e = 0;
        while (&n % &d).is_zero() {
            n /= &d;
            e += 1;
        }
        if e > 0 {
            out.push((d.clone(), e));
        }
        d += 1;
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

/// Exponent of the prime `p` in `n` (`n != 0`).
pub fn valuation(n: &BigInt, p: &BigInt) -> u32 {
    debug_assert!(!n.is_zero());
    let mut n = n.abs();
    let mut e = 0;
    while (&n % p).is_zero() {
        n /= p;
        e += 1;
    }
    e
}

/// Number of prime factors of `|n|` counted with multiplicity.
pub fn big_omega(n: &BigInt) -> u32 {
    factorize(n).iter().map(|(_, e)| e).sum()
}

/// Least non-negative `x` with `a * x ≡ c (mod d)`, if one exists. `d >= 1`.
pub fn solve_linear_congruence(a: &BigInt, c: &BigInt, d: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(d);
    let c = c.mod_floor(d);
    let g = a.gcd(d);
    if g.is_zero() {
        return c.is_zero().then(BigInt::zero);
    }
    if !(&c % &g).is_zero() {
        return None;
    }
    let m = d / &g;
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let inv = mod_inverse(&(&a / &g), &m)?;
    Some(((&c / &g) * inv).mod_floor(&m))
}

/// Inverse of `a` modulo `m` when `gcd(a, m) = 1`.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}
