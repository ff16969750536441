//! Exact rationals, their fixed enumeration, and the diagonal pairing.

use std::sync::RwLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `pair(i, k) = (i+k)(i+k+1)/2 + k`.
pub fn pair(i: u64, k: u64) -> u64 {
    let s = i + k;
    s * (s + 1) / 2 + k
}

pub fn unpair(n: u64) -> (u64, u64) {
    // largest s with s(s+1)/2 ≤ n
    let mut s = ((((8 * n as u128 + 1) as f64).sqrt() as u64).saturating_sub(1)) / 2;
    while (s + 1) * (s + 2) / 2 <= n {
        s += 1;
    }
    while s * (s + 1) / 2 > n {
        s -= 1;
    }
    let k = n - s * (s + 1) / 2;
    (s - k, k)
}

pub fn parse_q(text: &str) -> Result<Q> {
    let text = text.trim();
    let bad = || Error::Schema(format!("not a rational: {text:?}"));
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(text.parse().map_err(|_| bad())?)),
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Height `max(|p|, q)` of a reduced fraction `p/q`.
pub fn height(x: &Q) -> BigInt {
    let p = x.numer().abs();
    let d = x.denom().clone();
    if p > d {
        p
    } else {
        d
    }
}

fn totatives(h: u64) -> impl Iterator<Item = u64> {
    (1..h).filter(move |&r| r.gcd(&h) == 1)
}

/// The fractions of exact height `h`, ascending.
pub fn of_height(h: u64) -> Vec<Q> {
    if h == 0 {
        return vec![];
    }
    if h == 1 {
        return vec![qi(-1), qi(0), qi(1)];
    }
    let hh = h as i64;
    let mut pos: Vec<Q> = totatives(h)
        .flat_map(|r| {
            let r = r as i64;
            [q(r, hh), q(hh, r)]
        })
        .collect();
    pos.sort();
    let mut all: Vec<Q> = pos.iter().rev().map(|x| -x.clone()).collect();
    all.extend(pos);
    all
}

fn count_of_height(h: u64) -> u64 {
    if h == 1 {
        3
    } else {
        4 * totatives(h).count() as u64
    }
}

/// The `n`-th rational in the fixed enumeration: by height, then by value.
pub fn rational_at(n: u64) -> Q {
    let mut n = n;
    let mut h = 1;
    loop {
        let c = count_of_height(h);
        if n < c {
            return of_height(h).swap_remove(n as usize);
        }
        n -= c;
        h += 1;
    }
}

static PREFIX: RwLock<Vec<Q>> = RwLock::new(Vec::new());

/// Runs `f` on the first `n` rationals of the enumeration. Generated rows
/// are kept for later calls.
pub fn with_rationals<R>(n: u64, f: impl FnOnce(&[Q]) -> R) -> R {
    let n = n as usize;
    {
        let cache = PREFIX.read().unwrap_or_else(|e| e.into_inner());
        if cache.len() >= n {
            return f(&cache[..n]);
        }
    }
    let mut cache = PREFIX.write().unwrap_or_else(|e| e.into_inner());
    if cache.is_empty() {
        cache.extend(of_height(1));
    }
    while cache.len() < n {
        let h = height(cache.last().expect("nonempty")).to_u64().expect("height fits in u64") + 1;
        let row = of_height(h);
        cache.extend(row);
    }
    f(&cache[..n])
}

/// The first `n` rationals of the enumeration.
pub fn first_rationals(n: u64) -> Vec<Q> {
    with_rationals(n, |r| r.to_vec())
}

/// Position of `x` in the enumeration of [`rational_at`].
pub fn rational_position(x: &Q) -> u64 {
    let h = height(x).to_u64().expect("height fits in u64");
    let before: u64 = (1..h).map(count_of_height).sum();
    let row = of_height(h);
    before + row.iter().position(|y| y == x).expect("fraction of its own height") as u64
}

/// The `n`-th positive rational (the positive part of the same order).
pub fn positive_at(n: u64) -> Q {
    let mut n = n;
    let mut h = 1;
    loop {
        let row: Vec<Q> = of_height(h).into_iter().filter(|x| x.is_positive()).collect();
        if n < row.len() as u64 {
            return row[n as usize].clone();
        }
        n -= row.len() as u64;
        h += 1;
    }
}

pub fn positive_position(x: &Q) -> Option<u64> {
    if !x.is_positive() {
        return None;
    }
    let h = height(x).to_u64()?;
    let before: u64 = (1..h).map(|k| of_height(k).iter().filter(|y| y.is_positive()).count() as u64).sum();
    let row: Vec<Q> = of_height(h).into_iter().filter(|y| y.is_positive()).collect();
    Some(before + row.iter().position(|y| y == x)? as u64)
}

/// Number of rationals of height at most `h`, i.e. the enumeration position
/// just past the last of them.
pub fn count_up_to_height(h: u64) -> u64 {
    (1..=h).map(count_of_height).sum()
}

/// Smallest-height rational strictly between `a < b` (least value among
/// ties), found by walking heights.
pub fn simplest_between(a: &Q, b: &Q) -> Q {
    assert!(a < b);
    let mut h = 1;
    loop {
        if let Some(x) = of_height(h).into_iter().find(|x| a < x && x < b) {
            return x;
        }
        h += 1;
    }
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

pub fn two_pow_neg(n: u32) -> Q {
    Q::new(BigInt::one(), BigInt::one() << n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_roundtrip() {
        for n in 0..2000 {
            let (i, k) = unpair(n);
            assert_eq!(pair(i, k), n);
        }
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 0), 1);
        assert_eq!(pair(0, 1), 2);
    }

    #[test]
    fn enumeration_prefix() {
        let first: Vec<String> = (0..7).map(|n| fmt_q(&rational_at(n))).collect();
        assert_eq!(first, vec!["-1", "0", "1", "-2", "-1/2", "1/2", "2"]);
        for n in 0..500 {
            assert_eq!(rational_position(&rational_at(n)), n);
        }
        for n in 0..200 {
            assert_eq!(positive_position(&positive_at(n)), Some(n));
        }
    }

    #[test]
    fn enumeration_is_injective() {
        let mut seen: Vec<Q> = (0..400).map(rational_at).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 400);
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("-3/6").unwrap(), q(-1, 2));
        assert_eq!(fmt_q(&q(4, 2)), "2");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn simplest_between_walks_heights() {
        assert_eq!(simplest_between(&q(1, 3), &q(2, 3)), q(1, 2));
        assert_eq!(simplest_between(&q(1, 100), &q(1, 50)), q(1, 51));
    }
}
