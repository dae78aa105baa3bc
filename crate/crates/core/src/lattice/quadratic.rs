//! The ring `Z[√3]`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// `r1 + r2·√3` with arbitrary-precision integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct QuadraticInteger {
    #[serde(with = "decimal")]
    pub r1: BigInt,
    #[serde(with = "decimal")]
    pub r2: BigInt,
}

/// Big integers as decimal strings in JSON.
pub mod decimal {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

impl QuadraticInteger {
    pub fn new(r1: impl Into<BigInt>, r2: impl Into<BigInt>) -> Self {
        Self { r1: r1.into(), r2: r2.into() }
    }

    pub fn integer(r1: impl Into<BigInt>) -> Self {
        Self::new(r1, 0)
    }

    pub fn sqrt3() -> Self {
        Self::new(0, 1)
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::new(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.r1.is_zero() && self.r2.is_zero()
    }

    /// `r1 − r2·√3`.
    pub fn conjugate(&self) -> Self {
        Self { r1: self.r1.clone(), r2: -&self.r2 }
    }

    /// `r1² − 3·r2²`, the product with the conjugate.
    pub fn norm(&self) -> BigInt {
        &self.r1 * &self.r1 - BigInt::from(3) * &self.r2 * &self.r2
    }

    /// Exact sign of the real number `r1 + r2√3`.
    pub fn signum(&self) -> Ordering {
        let s1 = self.r1.sign();
        let s2 = self.r2.sign();
        use num_bigint::Sign::*;
        match (s1, s2) {
            (NoSign, NoSign) => Ordering::Equal,
            (Minus, Minus) | (Minus, NoSign) | (NoSign, Minus) => Ordering::Less,
            (Plus, Plus) | (Plus, NoSign) | (NoSign, Plus) => Ordering::Greater,
            // mixed signs: compare r1² with 3 r2²
            (Plus, Minus) => (&self.r1 * &self.r1).cmp(&(BigInt::from(3) * &self.r2 * &self.r2)),
            (Minus, Plus) => (BigInt::from(3) * &self.r2 * &self.r2).cmp(&(&self.r1 * &self.r1)),
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Nearest double. When the two terms nearly cancel the value is
    /// recovered as `norm / (r1 − r2√3)`, which has no cancellation.
    pub fn to_f64(&self) -> f64 {
        let a = big_to_f64(&self.r1);
        let b = big_to_f64(&self.r2) * 3f64.sqrt();
        let direct = a + b;
        if a.signum() == b.signum() || a == 0.0 || b == 0.0 {
            return direct;
        }
        let conj = a - b;
        if conj == 0.0 {
            return direct;
        }
        big_to_f64(&self.norm()) / conj
    }

    /// Exact quotient, or `None` when `other` does not divide `self` in
    /// `Z[√3]` (or is zero).
    pub fn exact_div(&self, other: &Self) -> Option<Self> {
        let n = other.norm();
        if n.is_zero() {
            return None;
        }
        let num = self * &other.conjugate();
        let (q1, m1) = num.r1.div_rem(&n);
        let (q2, m2) = num.r2.div_rem(&n);
        if m1.is_zero() && m2.is_zero() {
            Some(Self { r1: q1, r2: q2 })
        } else {
            None
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn is_unit_integer(&self) -> bool {
        self.r2.is_zero() && self.r1.abs().is_one()
    }

    pub fn is_unit_sqrt3(&self) -> bool {
        self.r1.is_zero() && self.r2.abs().is_one()
    }
}

fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl From<i64> for QuadraticInteger {
    fn from(v: i64) -> Self {
        Self::integer(v)
    }
}

impl fmt::Display for QuadraticInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.r2.is_zero() {
            return write!(f, "{}", self.r1);
        }
        if self.r1.is_zero() {
            return write!(f, "{}√3", self.r2);
        }
        if self.r2.is_negative() {
            write!(f, "{} - {}√3", self.r1, -&self.r2)
        } else {
            write!(f, "{} + {}√3", self.r1, self.r2)
        }
    }
}

impl Add for &QuadraticInteger {
    type Output = QuadraticInteger;
    fn add(self, o: &QuadraticInteger) -> QuadraticInteger {
        QuadraticInteger { r1: &self.r1 + &o.r1, r2: &self.r2 + &o.r2 }
    }
}

impl Add for QuadraticInteger {
    type Output = QuadraticInteger;
    fn add(self, o: QuadraticInteger) -> QuadraticInteger {
        &self + &o
    }
}

impl AddAssign<&QuadraticInteger> for QuadraticInteger {
    fn add_assign(&mut self, o: &QuadraticInteger) {
        self.r1 += &o.r1;
        self.r2 += &o.r2;
    }
}

impl Sub for &QuadraticInteger {
    type Output = QuadraticInteger;
    fn sub(self, o: &QuadraticInteger) -> QuadraticInteger {
        QuadraticInteger { r1: &self.r1 - &o.r1, r2: &self.r2 - &o.r2 }
    }
}

impl Sub for QuadraticInteger {
    type Output = QuadraticInteger;
    fn sub(self, o: QuadraticInteger) -> QuadraticInteger {
        &self - &o
    }
}

impl Mul for &QuadraticInteger {
    type Output = QuadraticInteger;
    fn mul(self, o: &QuadraticInteger) -> QuadraticInteger {
        QuadraticInteger {
            r1: &self.r1 * &o.r1 + BigInt::from(3) * &self.r2 * &o.r2,
            r2: &self.r1 * &o.r2 + &self.r2 * &o.r1,
        }
    }
}

impl Mul for QuadraticInteger {
    type Output = QuadraticInteger;
    fn mul(self, o: QuadraticInteger) -> QuadraticInteger {
        &self * &o
    }
}

impl Neg for QuadraticInteger {
    type Output = QuadraticInteger;
    fn neg(self) -> QuadraticInteger {
        QuadraticInteger { r1: -self.r1, r2: -self.r2 }
    }
}

impl Neg for &QuadraticInteger {
    type Output = QuadraticInteger;
    fn neg(self) -> QuadraticInteger {
        QuadraticInteger { r1: -&self.r1, r2: -&self.r2 }
    }
}

impl PartialOrd for QuadraticInteger {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticInteger {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(a: i64, b: i64) -> QuadraticInteger {
        QuadraticInteger::new(a, b)
    }

    #[test]
    fn one_plus_sqrt3_squared() {
        assert_eq!(q(1, 1).pow(2), q(4, 2));
    }

    #[test]
    fn sign_near_cancellation() {
        // 2 − √3 > 0, 97 − 56√3 > 0, 1351 − 780√3 > 0
        assert_eq!(q(2, -1).signum(), Ordering::Greater);
        assert_eq!(q(97, -56).signum(), Ordering::Greater);
        assert_eq!(q(-1351, 780).signum(), Ordering::Less);
        assert_eq!(q(0, 0).signum(), Ordering::Equal);
    }

    #[test]
    fn to_f64_avoids_cancellation() {
        // (2 − √3)^10 = r1 − r2√3 with huge r1, r2
        let x = q(2, -1).pow(10);
        let expected = (2.0 - 3f64.sqrt()).powi(10);
        assert!(((x.to_f64() - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn exact_division() {
        let a = q(3, 5);
        let b = q(1, 1);
        assert_eq!((&a * &b).exact_div(&b), Some(a.clone()));
        assert_eq!(q(1, 0).exact_div(&q(2, 0)), None);
        assert_eq!(a.exact_div(&QuadraticInteger::zero()), None);
        // 2 − √3 is a unit
        assert_eq!(q(1, 0).exact_div(&q(2, -1)), Some(q(2, 1)));
    }

    #[test]
    fn display() {
        assert_eq!(q(-2, 0).to_string(), "-2");
        assert_eq!(q(1, -3).to_string(), "1 - 3√3");
        assert_eq!(q(0, 2).to_string(), "2√3");
    }

    fn small() -> impl Strategy<Value = QuadraticInteger> {
        (-1000i64..1000, -1000i64..1000).prop_map(|(a, b)| q(a, b))
    }

    proptest! {
        #[test]
        fn ring_laws(a in small(), b in small(), c in small()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn value_matches_float(a in small(), b in small()) {
            let x = q(a.r1.to_i64().unwrap(), 0) + q(0, b.r2.to_i64().unwrap());
            let f = a.r1.to_f64().unwrap() + b.r2.to_f64().unwrap() * 3f64.sqrt();
            let v = x.to_f64();
            prop_assert!((v - f).abs() <= 1e-12 * f.abs().max(1.0));
        }

        #[test]
        fn sign_agrees_with_float(a in small(), b in small()) {
            let f = a.to_f64();
            if f.abs() > 1e-9 {
                prop_assert_eq!(a.signum(), f.partial_cmp(&0.0).unwrap());
            }
            let _ = b;
        }

        #[test]
        fn norm_is_multiplicative(a in small(), b in small()) {
            prop_assert_eq!((&a * &b).norm(), a.norm() * b.norm());
        }
    }
}
