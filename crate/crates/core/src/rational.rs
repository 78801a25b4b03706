//! Rational helpers: the `p/q` text format and a few dyadic utilities.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used for every coordinate and measure.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Canonical text form: lowest terms, positive denominator, always `p/q`.
pub fn format_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Accepts `p/q` or a bare integer `p`. Zero denominators are rejected.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(n).map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))?;
    let d = BigInt::from_str(d).map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Q::new(n, d))
}

/// Comma-separated list of rationals, e.g. `1/2,1/4,1/4`.
pub fn parse_q_list(s: &str) -> Result<Vec<Q>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_q).collect()
}

/// `2^k` for any integer `k`.
pub fn pow2(k: i64) -> Q {
    let p = BigInt::one() << k.unsigned_abs();
    if k >= 0 {
        Q::from_integer(p)
    } else {
        Q::new(BigInt::one(), p)
    }
}

/// The unique `k` with `2^k <= x < 2^(k+1)`; `x` must be positive.
pub fn floor_log2(x: &Q) -> i64 {
    assert!(x.is_positive(), "floor_log2 of non-positive rational");
    let n = x.numer();
    let d = x.denom();
    let mut k = n.bits() as i64 - d.bits() as i64;
    // bit lengths pin k to within one
    while pow2(k) > *x {
        k -= 1;
    }
    while pow2(k + 1) <= *x {
        k += 1;
    }
    k
}

pub fn pow_q(x: &Q, e: u32) -> Q {
    num_traits::pow(x.clone(), e as usize)
}

/// Exact rational `k`-th root when it exists.
pub fn exact_root(x: &Q, k: u32) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = int_root(x.numer(), k)?;
    let d = int_root(x.denom(), k)?;
    Some(Q::new(n, d))
}

fn int_root(x: &BigInt, k: u32) -> Option<BigInt> {
    let r = x.nth_root(k);
    (num_traits::pow(r.clone(), k as usize) == *x).then_some(r)
}

/// Largest `m / 2^bits` whose `k`-th power does not exceed `x` (x >= 0).
pub fn dyadic_root_floor(x: &Q, k: u32, bits: u32) -> Q {
    let scale = BigInt::one() << bits;
    // search m in [0, hi] with (m/2^bits)^k <= x
    let mut lo = BigInt::zero();
    let mut hi = scale.clone() * (x.ceil().to_integer() + BigInt::one());
    while lo < hi {
        let mid: BigInt = (&lo + &hi + BigInt::one()).div_floor(&BigInt::from(2));
        if pow_q(&Q::new(mid.clone(), scale.clone()), k) <= *x {
            lo = mid;
        } else {
            hi = mid - BigInt::one();
        }
    }
    Q::new(lo, scale)
}

pub(crate) mod serde_q {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_q, parse_q, Q};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod serde_qvec {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_q, parse_q, Q};

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&format_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_q(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
