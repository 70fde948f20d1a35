use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

/// Exact rational, serialized as `{"num": .., "den": ..}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `count / 2^exp`.
    pub fn dyadic(count: impl Into<BigUint>, exp: usize) -> Self {
        let den = BigInt::from(BigUint::one() << exp);
        Rational(BigRational::new(BigInt::from(count.into()), den))
    }

    /// `1 / 2^exp`.
    pub fn inv_pow2(exp: usize) -> Self {
        Self::dyadic(1u32, exp)
    }

    pub fn pow(&self, e: u32) -> Self {
        Rational(num_traits::pow(self.0.clone(), e as usize))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Rational> for Rational {
    type Output = Rational;
    fn add(self, rhs: &'a Rational) -> Rational {
        Rational(self.0 + &rhs.0)
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

fn int_to_json(n: &BigInt) -> serde_json::Value {
    match i64::try_from(n) {
        Ok(v) => serde_json::Value::from(v),
        Err(_) => serde_json::Value::String(n.to_string()),
    }
}

fn int_from_json<E: de::Error>(v: &serde_json::Value) -> Result<BigInt, E> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| E::custom("rational parts must be integers")),
        serde_json::Value::String(s) => s.parse().map_err(|_| E::custom("bad integer string")),
        _ => Err(E::custom("rational parts must be integers")),
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Rational", 2)?;
        st.serialize_field("num", &int_to_json(self.0.numer()))?;
        st.serialize_field("den", &int_to_json(self.0.denom()))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            num: serde_json::Value,
            den: serde_json::Value,
        }
        let raw = Raw::deserialize(d)?;
        let num = int_from_json::<D::Error>(&raw.num)?;
        let den = int_from_json::<D::Error>(&raw.den)?;
        if den.is_zero() {
            return Err(de::Error::custom("zero denominator"));
        }
        Ok(Rational(BigRational::new(num, den)))
    }
}
