//! Exact dyadic rationals `z / 2^e`.
//!
//! Values are kept in normal form: either the exponent is zero or the
//! numerator is odd. Zero is `0 / 2^0`. Normal forms are unique, so the
//! derived `Eq` and `Hash` are value equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u64,
}

impl Dyadic {
    /// `num / 2^exp`, normalized.
    pub fn new(num: impl Into<BigInt>, exp: u64) -> Self {
        let mut d = Dyadic {
            num: num.into(),
            exp,
        };
        d.normalize();
        d
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self::new(n, 0)
    }

    pub fn half() -> Self {
        Dyadic {
            num: BigInt::one(),
            exp: 1,
        }
    }

    /// `2^k` for any integer `k`.
    pub fn pow2(k: i64) -> Self {
        Self::one().mul_pow2(k)
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exp);
        if shift > 0 {
            self.num >>= shift;
            self.exp -= shift;
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    /// Exponent of the denominator `2^exponent`.
    pub fn exponent(&self) -> u64 {
        self.exp
    }

    pub fn denominator(&self) -> BigInt {
        BigInt::one() << self.exp
    }

    /// Multiply by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if k >= 0 {
            let k = k as u64;
            if k <= self.exp {
                Dyadic {
                    num: self.num.clone(),
                    exp: self.exp - k,
                }
            } else {
                Dyadic {
                    num: &self.num << (k - self.exp),
                    exp: 0,
                }
            }
        } else if self.num.is_zero() {
            self.clone()
        } else {
            Dyadic::new(self.num.clone(), self.exp + k.unsigned_abs())
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), self.denominator())
    }

    /// Exact conversion from a rational whose reduced denominator is a power of two.
    pub fn from_rational(r: &BigRational) -> Option<Self> {
        let den = r.denom();
        let bits = den.bits();
        if bits == 0 || den != &(BigInt::one() << (bits - 1)) {
            return None;
        }
        Some(Dyadic::new(r.numer().clone(), bits - 1))
    }

    /// Exact value of a finite `f64`; every finite double is dyadic.
    pub fn from_f64_exact(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Self::zero());
        }
        let bits = v.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, e2) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let m = if negative {
            -BigInt::from(mantissa)
        } else {
            BigInt::from(mantissa)
        };
        Some(Dyadic::new(m, 0).mul_pow2(e2))
    }

    /// Nearest `f64` (ties to even) and a certified bound on `|self - value|`.
    pub fn to_f64_with_error(&self) -> (f64, f64) {
        let v = self.to_f64();
        let exact = Dyadic::from_f64_exact(v).expect("finite");
        let err = (self - &exact).abs();
        if err.is_zero() {
            return (v, 0.0);
        }
        let mut bound = err.to_f64();
        if Dyadic::from_f64_exact(bound).is_none_or(|b| b < err) {
            bound = bound.next_up();
        }
        (v, bound)
    }

    /// Nearest `f64`, ties to even. Saturates to infinity past the f64 range.
    pub fn to_f64(&self) -> f64 {
        if self.num.is_zero() {
            return 0.0;
        }
        let mag = self.num.magnitude();
        let bits = mag.bits();
        let (mantissa, shift) = if bits <= 53 {
            (mag.to_u64().expect("fits"), 0i64)
        } else {
            let shift = bits - 53;
            let mut top = (mag >> shift).to_u64().expect("53 bits");
            let half_bit = mag.bit(shift - 1);
            let sticky = mag.trailing_zeros().is_some_and(|tz| tz < shift - 1);
            if half_bit && (sticky || top & 1 == 1) {
                top += 1;
            }
            (top, shift as i64)
        };
        let v = ldexp(mantissa as f64, shift - self.exp as i64);
        if self.num.is_negative() {
            -v
        } else {
            v
        }
    }
}

fn ldexp(mut v: f64, mut e: i64) -> f64 {
    const STEP: i64 = 1000;
    while e > STEP {
        v *= 2f64.powi(STEP as i32);
        e -= STEP;
        if v.is_infinite() {
            return v;
        }
    }
    while e < -STEP {
        v *= 2f64.powi(-STEP as i32);
        e += STEP;
        if v == 0.0 {
            return v;
        }
    }
    v * 2f64.powi(e as i32)
}

fn align(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, u64) {
    match a.exp.cmp(&b.exp) {
        Ordering::Equal => (a.num.clone(), b.num.clone(), a.exp),
        Ordering::Less => (&a.num << (b.exp - a.exp), b.num.clone(), b.exp),
        Ordering::Greater => (a.num.clone(), &b.num << (a.exp - b.exp), a.exp),
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = align(self, other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if rhs.num.is_zero() {
            return self.clone();
        }
        if self.num.is_zero() {
            return rhs.clone();
        }
        let (a, b, e) = align(self, rhs);
        Dyadic::new(a + b, e)
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = align(self, rhs);
        Dyadic::new(a - b, e)
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $f(self, rhs: Dyadic) -> Dyadic { (&self).$f(&rhs) }
        }
        impl<'a> $tr<&'a Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $f(self, rhs: &Dyadic) -> Dyadic { (&self).$f(rhs) }
        }
        impl<'a> $tr<Dyadic> for &'a Dyadic {
            type Output = Dyadic;
            fn $f(self, rhs: Dyadic) -> Dyadic { self.$f(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl AddAssign for Dyadic {
    fn add_assign(&mut self, rhs: Dyadic) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<&Dyadic> for Dyadic {
    fn sub_assign(&mut self, rhs: &Dyadic) {
        *self = &*self - rhs;
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -(self.clone())
    }
}

impl Zero for Dyadic {
    fn zero() -> Self {
        Dyadic {
            num: BigInt::zero(),
            exp: 0,
        }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for Dyadic {
    fn one() -> Self {
        Dyadic {
            num: BigInt::one(),
            exp: 0,
        }
    }
}

impl FromPrimitive for Dyadic {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Dyadic::from_integer(n))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(Dyadic::from_integer(n))
    }
    fn from_f64(v: f64) -> Option<Self> {
        Dyadic::from_f64_exact(v)
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Self {
        Dyadic::from_integer(n)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.denominator())
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `[-]digits` or `[-]digits/digits` with a power-of-two denominator.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidFormat(format!("not a dyadic rational: {s:?}"));
        let s = s.trim();
        match s.split_once('/') {
            None => parse_int(s).map(Dyadic::from_integer).ok_or_else(bad),
            Some((n, d)) => {
                if d.starts_with('-') {
                    return Err(bad());
                }
                let num = parse_int(n).ok_or_else(bad)?;
                let den = parse_int(d).ok_or_else(bad)?;
                if den.sign() != Sign::Plus {
                    return Err(bad());
                }
                let e = den.bits() - 1;
                if den != BigInt::one() << e {
                    return Err(bad());
                }
                Ok(Dyadic::new(num, e))
            }
        }
    }
}

/// Parse `p/q`, an integer, or a plain decimal (`0.25`, `-1.5`) into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidFormat(format!("not a rational number: {s:?}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let num = parse_int(n).ok_or_else(bad)?;
        let den = parse_int(d).ok_or_else(bad)?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
