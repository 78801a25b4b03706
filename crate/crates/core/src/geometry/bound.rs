use std::fmt;
use std::ops::Add;

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::{format_q, parse_q, Q};

/// A box coordinate: a rational or an explicit infinity marker.
///
/// The variant order makes the derived `Ord` agree with the extended real line.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    NegInf,
    Finite(Q),
    PosInf,
}

impl Bound {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            Bound::Finite(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn zero() -> Self {
        Bound::Finite(Q::zero())
    }

    pub fn shift(&self, by: &Q) -> Bound {
        match self {
            Bound::Finite(q) => Bound::Finite(q + by),
            other => other.clone(),
        }
    }
}

impl From<Q> for Bound {
    fn from(q: Q) -> Self {
        Bound::Finite(q)
    }
}

impl From<&Q> for Bound {
    fn from(q: &Q) -> Self {
        Bound::Finite(q.clone())
    }
}

impl Add<&Q> for &Bound {
    type Output = Bound;

    fn add(self, rhs: &Q) -> Bound {
        self.shift(rhs)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-inf"),
            Bound::PosInf => f.write_str("inf"),
            Bound::Finite(q) => f.write_str(&format_q(q)),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.trim() {
            "inf" | "+inf" => Ok(Bound::PosInf),
            "-inf" => Ok(Bound::NegInf),
            other => parse_q(other)
                .map(Bound::Finite)
                .map_err(serde::de::Error::custom),
        }
    }
}
