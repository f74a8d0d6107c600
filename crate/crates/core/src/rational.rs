//! Exact rational numbers.
//!
//! [`Rational`] keeps values in an `i128` numerator/denominator pair while
//! they fit and transparently promotes to an arbitrary-precision
//! representation when an operation would overflow. The representation is
//! canonical (reduced, positive denominator, small whenever it fits), so the
//! derived `Eq` and `Hash` agree with numeric equality.
//!
//! [`Cost`] extends a non-negative rational with a distinguished infinite
//! value. It is used for obstacle weights and weighted lengths.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small { num: i128, den: i128 },
    Big(Box<BigRational>),
}

/// An exact rational number.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

fn gcd_i128(a: i128, b: i128) -> i128 {
    let mut a = a.unsigned_abs();
    let mut b = b.unsigned_abs();
    if a == 0 {
        return b as i128;
    }
    if b == 0 {
        return a as i128;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            break;
        }
    }
    (a << shift) as i128
}

impl Rational {
    pub const ZERO: Rational = Rational(Repr::Small { num: 0, den: 1 });
    pub const ONE: Rational = Rational(Repr::Small { num: 1, den: 1 });

    pub fn from_int(v: impl Into<i128>) -> Self {
        Rational(Repr::Small { num: v.into(), den: 1 })
    }

    /// Builds `num / den`. Panics if `den == 0`.
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        if num == i128::MIN || den == i128::MIN {
            return Self::from_big(BigRational::new(BigInt::from(num), BigInt::from(den)));
        }
        let (mut num, mut den) = (num, den);
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = gcd_i128(num, den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        Rational(Repr::Small { num, den })
    }

    fn from_big(b: BigRational) -> Self {
        if let (Some(num), Some(den)) = (b.numer().to_i128(), b.denom().to_i128()) {
            if num != i128::MIN && den != i128::MIN {
                return Rational(Repr::Small { num, den });
            }
        }
        Rational(Repr::Big(Box::new(b)))
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { num, den } => BigRational::new_raw(BigInt::from(*num), BigInt::from(*den)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small { num: 0, .. })
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { den, .. } => *den == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    /// Returns the value as `i128` when it is an integer that fits.
    pub fn to_i128(&self) -> Option<i128> {
        match &self.0 {
            Repr::Small { num, den: 1 } => Some(*num),
            _ => None,
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.to_i128().and_then(|v| i64::try_from(v).ok())
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small { num, .. } => num.signum() as i32,
            Repr::Big(b) => {
                if b.is_positive() {
                    1
                } else if b.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn abs(&self) -> Rational {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small { num, den } => *num as f64 / *den as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Numerator and denominator as decimal strings.
    pub fn parts(&self) -> (String, String) {
        match &self.0 {
            Repr::Small { num, den } => (num.to_string(), den.to_string()),
            Repr::Big(b) => (b.numer().to_string(), b.denom().to_string()),
        }
    }

    /// Midpoint of two values.
    pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
        &(a + b) * &Rational::new(1, 2)
    }

    pub fn min(self, other: Rational) -> Rational {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Rational) -> Rational {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Formats as `"num/den"` even for integers.
    pub fn to_fraction_string(&self) -> String {
        let (n, d) = self.parts();
        format!("{n}/{d}")
    }
}

fn small_add(n1: i128, d1: i128, n2: i128, d2: i128) -> Option<Rational> {
    if d1 == 1 && d2 == 1 {
        return n1.checked_add(n2).map(|v| Rational::new(v, 1));
    }
    if d1 == d2 {
        let num = n1.checked_add(n2)?;
        return Some(Rational::new(num, d1));
    }
    let g = gcd_i128(d1, d2);
    let a = n1.checked_mul(d2 / g)?;
    let b = n2.checked_mul(d1 / g)?;
    let num = a.checked_add(b)?;
    let den = d1.checked_mul(d2 / g)?;
    Some(Rational::new(num, den))
}

fn small_mul(n1: i128, d1: i128, n2: i128, d2: i128) -> Option<Rational> {
    let g1 = gcd_i128(n1, d2).max(1);
    let g2 = gcd_i128(n2, d1).max(1);
    let num = (n1 / g1).checked_mul(n2 / g2)?;
    let den = (d1 / g2).checked_mul(d2 / g1)?;
    Some(Rational::new(num, den))
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        if let (Repr::Small { num: n1, den: d1 }, Repr::Small { num: n2, den: d2 }) = (&self.0, &rhs.0) {
            if let Some(r) = small_add(*n1, *d1, *n2, *d2) {
                return r;
            }
        }
        Rational::from_big(self.to_big() + rhs.to_big())
    }
}

impl Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        self + &(-rhs)
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        if let (Repr::Small { num: n1, den: d1 }, Repr::Small { num: n2, den: d2 }) = (&self.0, &rhs.0) {
            if let Some(r) = small_mul(*n1, *d1, *n2, *d2) {
                return r;
            }
        }
        Rational::from_big(self.to_big() * rhs.to_big())
    }
}

impl Div for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        match &rhs.0 {
            Repr::Small { num, den } if *num != i128::MIN => self * &Rational::new(*den, *num),
            _ => Rational::from_big(self.to_big() / rhs.to_big()),
        }
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small { num, den } if *num != i128::MIN => Rational(Repr::Small { num: -num, den: *den }),
            _ => Rational::from_big(-self.to_big()),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                (&self).$m(rhs)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = &*self + rhs;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = &*self - rhs;
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Repr::Small { num: n1, den: d1 }, Repr::Small { num: n2, den: d2 }) = (&self.0, &other.0) {
            if d1 == d2 {
                return n1.cmp(n2);
            }
            if let (Some(a), Some(b)) = (n1.checked_mul(*d2), n2.checked_mul(*d1)) {
                return a.cmp(&b);
            }
        }
        self.to_big().cmp(&other.to_big())
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_int(v)
    }
}

impl From<i32> for Rational {
    fn from(v: i32) -> Self {
        Rational::from_int(v)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = self.parts();
        if d == "1" {
            write!(f, "{n}")
        } else {
            write!(f, "{n}/{d}")
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let num: BigInt = n.parse().map_err(|_| err())?;
        let den: BigInt = d.parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        Ok(Rational::from_big(BigRational::new(num, den)))
    }
}

impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A non-negative exact cost: a finite rational or infinity.
///
/// Infinity absorbs addition and multiplication by positive values.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Cost {
    Finite(Rational),
    Infinite,
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(Rational::ZERO);

    pub fn is_finite(&self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Cost::Finite(r) => Some(r),
            Cost::Infinite => None,
        }
    }

    /// The traversal rate `1 + w` for a region of weight `w`.
    pub fn rate(&self) -> Cost {
        match self {
            Cost::Finite(w) => Cost::Finite(w + &Rational::ONE),
            Cost::Infinite => Cost::Infinite,
        }
    }

    /// `self * len` where `len >= 0`; infinity times zero is zero.
    pub fn scale(&self, len: &Rational) -> Cost {
        if len.is_zero() {
            return Cost::ZERO;
        }
        match self {
            Cost::Finite(r) => Cost::Finite(r * len),
            Cost::Infinite => Cost::Infinite,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Cost::Finite(r) => r.to_f64(),
            Cost::Infinite => f64::INFINITY,
        }
    }
}

impl Add for &Cost {
    type Output = Cost;
    fn add(self, rhs: &Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        &self + &rhs
    }
}

impl AddAssign<&Cost> for Cost {
    fn add_assign(&mut self, rhs: &Cost) {
        *self = &*self + rhs;
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Ordering::Less,
            (Cost::Infinite, Cost::Finite(_)) => Ordering::Greater,
            (Cost::Infinite, Cost::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Rational> for Cost {
    fn from(r: Rational) -> Self {
        Cost::Finite(r)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(r) => write!(f, "{r}"),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Cost {
    type Err = ParseRationalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            Ok(Cost::Infinite)
        } else {
            t.parse().map(Cost::Finite)
        }
    }
}

/// Helper for tests and fixtures: `q(1, 2)` is one half.
pub fn q(num: i128, den: i128) -> Rational {
    Rational::new(num, den)
}
