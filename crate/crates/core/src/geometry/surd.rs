//! Exact arithmetic in `Q[sqrt(r)]`, the home of cube diameters `side * sqrt(d)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Roots;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{format_q, serde_q, Q};

/// The real number `a + b * sqrt(radicand)`.
///
/// Equality and order are semantic (via exact sign analysis), so values with
/// different `(a, b)` can compare equal when `radicand` is a perfect square.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtendedRational {
    #[serde(with = "serde_q")]
    pub a: Q,
    #[serde(with = "serde_q")]
    pub b: Q,
    #[serde(rename = "sqrt")]
    pub radicand: u32,
}

impl ExtendedRational {
    /// A perfect-square radicand folds the surd part into `a`.
    pub fn new(a: Q, b: Q, radicand: u32) -> Self {
        assert!(radicand > 0, "radicand must be positive");
        let root = radicand.sqrt();
        if root * root == radicand && !b.is_zero() {
            return ExtendedRational { a: a + b * Q::from_integer(root.into()), b: Q::zero(), radicand };
        }
        ExtendedRational { a, b, radicand }
    }

    pub fn rational(a: Q, radicand: u32) -> Self {
        Self::new(a, Q::zero(), radicand)
    }

    /// `b * sqrt(radicand)`.
    pub fn surd(b: Q, radicand: u32) -> Self {
        Self::new(Q::zero(), b, radicand)
    }

    pub fn zero(radicand: u32) -> Self {
        Self::rational(Q::zero(), radicand)
    }

    fn r(&self) -> Q {
        Q::from_integer(self.radicand.into())
    }

    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&Q::zero());
        let sb = self.b.cmp(&Q::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // opposite signs: the larger magnitude wins
        let a2 = &self.a * &self.a;
        let b2r = &self.b * &self.b * self.r();
        match a2.cmp(&b2r) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.signum() == Ordering::Equal
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::rational(Q::from_integer(1.into()), self.radicand);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Rational value when the surd part vanishes.
    pub fn as_rational(&self) -> Option<&Q> {
        self.b.is_zero().then_some(&self.a)
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.a.to_f64().unwrap_or(f64::NAN)
            + self.b.to_f64().unwrap_or(f64::NAN) * f64::from(self.radicand).sqrt()
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.radicand, other.radicand, "mixed radicands");
    }
}

impl Add for &ExtendedRational {
    type Output = ExtendedRational;

    fn add(self, o: &ExtendedRational) -> ExtendedRational {
        self.check(o);
        ExtendedRational::new(&self.a + &o.a, &self.b + &o.b, self.radicand)
    }
}

impl Sub for &ExtendedRational {
    type Output = ExtendedRational;

    fn sub(self, o: &ExtendedRational) -> ExtendedRational {
        self.check(o);
        ExtendedRational::new(&self.a - &o.a, &self.b - &o.b, self.radicand)
    }
}

impl Mul for &ExtendedRational {
    type Output = ExtendedRational;

    fn mul(self, o: &ExtendedRational) -> ExtendedRational {
        self.check(o);
        ExtendedRational::new(
            &self.a * &o.a + &self.b * &o.b * self.r(),
            &self.a * &o.b + &self.b * &o.a,
            self.radicand,
        )
    }
}

impl Mul<&Q> for &ExtendedRational {
    type Output = ExtendedRational;

    fn mul(self, k: &Q) -> ExtendedRational {
        ExtendedRational::new(&self.a * k, &self.b * k, self.radicand)
    }
}

impl Neg for &ExtendedRational {
    type Output = ExtendedRational;

    fn neg(self) -> ExtendedRational {
        ExtendedRational::new(-&self.a, -&self.b, self.radicand)
    }
}

impl PartialEq for ExtendedRational {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtendedRational {}

impl PartialOrd for ExtendedRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedRational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl fmt::Display for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", format_q(&self.a))
        } else if self.a.is_zero() {
            write!(f, "{}*sqrt({})", format_q(&self.b), self.radicand)
        } else {
            let sign = if self.b.is_negative() { '-' } else { '+' };
            write!(
                f,
                "{} {} {}*sqrt({})",
                format_q(&self.a),
                sign,
                format_q(&self.b.abs()),
                self.radicand
            )
        }
    }
}
