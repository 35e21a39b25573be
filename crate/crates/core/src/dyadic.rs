//! Exact dyadic rationals `m * 2^q`.
//!
//! Every quantity the lab manipulates (operands, sums, rounding errors,
//! thresholds such as `u * ufp(a)`) is a dyadic rational, so this type stands
//! in for the reals. Arithmetic never rounds. The significand lives in an
//! `i128` while it fits and spills to a `BigInt` otherwise; the two
//! representations are kept canonical so derived equality is value equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Mant {
    Small(i128),
    Big(BigInt),
}

/// An exact dyadic rational `m * 2^q`.
///
/// Canonical form: `m` is odd, or `m == 0` and `q == 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    m: Mant,
    q: i64,
}

/// Result of shifting a magnitude right: the truncated quotient plus the
/// information needed to round it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Remainder {
    Exact,
    BelowHalf,
    Half,
    AboveHalf,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { m: Mant::Small(0), q: 0 }
    }

    pub fn one() -> Self {
        Dyadic { m: Mant::Small(1), q: 0 }
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Self {
        Dyadic { m: Mant::Small(1), q: k }
    }

    pub fn from_int(m: i64) -> Self {
        Self::from_i128(m as i128, 0)
    }

    /// `m * 2^q`, canonicalized.
    pub fn new(m: i64, q: i64) -> Self {
        Self::from_i128(m as i128, q)
    }

    pub(crate) fn from_i128(m: i128, q: i64) -> Self {
        if m == 0 {
            return Self::zero();
        }
        let tz = m.trailing_zeros();
        Dyadic {
            m: Mant::Small(m >> tz),
            q: q + tz as i64,
        }
    }

    pub fn from_bigint(m: BigInt, q: i64) -> Self {
        if m.is_zero() {
            return Self::zero();
        }
        let tz = m.trailing_zeros().unwrap_or(0);
        let m = m >> tz;
        let q = q + tz as i64;
        match m.to_i128() {
            Some(s) => Dyadic { m: Mant::Small(s), q },
            None => Dyadic { m: Mant::Big(m), q },
        }
    }

    /// The odd integer significand (zero for zero).
    pub fn mantissa(&self) -> BigInt {
        match &self.m {
            Mant::Small(s) => BigInt::from(*s),
            Mant::Big(b) => b.clone(),
        }
    }

    /// The canonical exponent `q`. For nonzero values this is the exponent of
    /// the least significant set bit.
    pub fn exp2(&self) -> i64 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.m, Mant::Small(0))
    }

    pub fn signum(&self) -> i32 {
        match &self.m {
            Mant::Small(s) => s.signum() as i32,
            Mant::Big(b) => match b.sign() {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            },
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic {
            m: self.m.clone(),
            q: self.q + k,
        }
    }

    /// Number of bits in `|m|`.
    fn mant_bits(&self) -> u64 {
        match &self.m {
            Mant::Small(s) => 128 - s.unsigned_abs().leading_zeros() as u64,
            Mant::Big(b) => b.bits(),
        }
    }

    /// `floor(log2 |r|)`, or `None` for zero.
    pub fn floor_log2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.mant_bits() as i64 - 1 + self.q)
        }
    }

    /// True iff the value is `±2^k` for some `k`.
    pub fn is_power_of_two(&self) -> bool {
        match &self.m {
            Mant::Small(s) => *s == 1 || *s == -1,
            Mant::Big(_) => false,
        }
    }

    /// Splits `|self| / 2^shift` into its integer part and a classification
    /// of the discarded fraction. `shift` may be negative (exact scale-up).
    ///
    /// Returns `None` if the integer part does not fit in a `u64`.
    pub(crate) fn abs_shr(&self, shift: i64) -> Option<(u64, Remainder)> {
        if self.is_zero() {
            return Some((0, Remainder::Exact));
        }
        let total = shift - self.q;
        match &self.m {
            Mant::Small(s) => {
                let mag = s.unsigned_abs();
                if total <= 0 {
                    let up = -total;
                    if up >= 64 || mag.leading_zeros() < up as u32 {
                        return None;
                    }
                    return u64::try_from(mag << up).ok().map(|t| (t, Remainder::Exact));
                }
                if total >= 128 {
                    // m is odd and |m| < 2^127, so the value is below half a unit.
                    return Some((0, Remainder::BelowHalf));
                }
                let t = mag >> total;
                let round_bit = (mag >> (total - 1)) & 1 == 1;
                let rem = if !round_bit {
                    Remainder::BelowHalf
                } else if total == 1 {
                    Remainder::Half
                } else {
                    Remainder::AboveHalf
                };
                u64::try_from(t).ok().map(|t| (t, rem))
            }
            Mant::Big(b) => {
                let mag: BigUint = b.magnitude().clone();
                if total <= 0 {
                    let widened = mag << ((-total) as u64);
                    return widened.to_u64().map(|t| (t, Remainder::Exact));
                }
                let total = total as u64;
                let t = &mag >> total;
                let round_bit = mag.bit(total - 1);
                let rem = if !round_bit {
                    Remainder::BelowHalf
                } else if total == 1 {
                    Remainder::Half
                } else {
                    Remainder::AboveHalf
                };
                t.to_u64().map(|t| (t, rem))
            }
        }
    }

    /// Lossy conversion, for display only.
    pub fn to_f64(&self) -> f64 {
        let m = match &self.m {
            Mant::Small(s) => *s as f64,
            Mant::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        };
        let q = self.q.clamp(-2000, 2000) as i32;
        m * 2f64.powi(q)
    }

    fn add_impl(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (hi, lo) = if self.q >= other.q {
            (self, other)
        } else {
            (other, self)
        };
        let shift = hi.q - lo.q;
        if let (Mant::Small(h), Mant::Small(l)) = (&hi.m, &lo.m) {
            if shift < 127 {
                let s = shift as u32;
                let scaled = h << s;
                if scaled >> s == *h {
                    if let Some(sum) = scaled.checked_add(*l) {
                        return Dyadic::from_i128(sum, lo.q);
                    }
                }
            }
        }
        let sum = (hi.mantissa() << (shift as u64)) + lo.mantissa();
        Dyadic::from_bigint(sum, lo.q)
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        match &self.m {
            Mant::Small(s) => match s.checked_neg() {
                Some(n) => Dyadic {
                    m: Mant::Small(n),
                    q: self.q,
                },
                None => Dyadic::from_bigint(-BigInt::from(*s), self.q),
            },
            Mant::Big(b) => Dyadic::from_bigint(-b.clone(), self.q),
        }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        self.add_impl(rhs)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self.add_impl(&-rhs)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        self.add_impl(&rhs)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // Same sign: compare magnitudes by leading exponent first.
        let (ea, eb) = (self.floor_log2().unwrap(), other.floor_log2().unwrap());
        if ea != eb {
            let mag = ea.cmp(&eb);
            return if sa > 0 { mag } else { mag.reverse() };
        }
        (self - other).signum().cmp(&0)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Largest denominator exponent printed as `m/2^k` in decimal form.
const MAX_PRINTED_SHIFT: i64 = 62;

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.mantissa();
        if self.q == 0 {
            write!(f, "{m}")
        } else if self.q > 0 && self.mant_bits() as i64 + self.q <= 63 {
            write!(f, "{}", m << (self.q as u64))
        } else if self.q < 0 && -self.q <= MAX_PRINTED_SHIFT {
            write!(f, "{m}/{}", 1u64 << (-self.q) as u32)
        } else {
            write!(f, "{m}*2^{}", self.q)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

fn parse_int(s: &str, whole: &str) -> Result<BigInt, Error> {
    let digits = s.strip_prefix('+').unwrap_or(s);
    if digits.is_empty() || !digits.trim_start_matches('-').chars().all(|c| c.is_ascii_digit()) {
        return Err(Error::Literal(whole.to_string()));
    }
    BigInt::from_str(digits).map_err(|_| Error::Literal(whole.to_string()))
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `<int>`, `<int>*2^<int>` and `<int>/<power of two>`, each with
    /// an optional sign.
    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim();
        if let Some((m, k)) = t.split_once("*2^") {
            let m = parse_int(m, s)?;
            let k = parse_int(k, s)?.to_i64().ok_or_else(|| Error::Literal(s.to_string()))?;
            return Ok(Dyadic::from_bigint(m, k));
        }
        if let Some((m, d)) = t.split_once('/') {
            let m = parse_int(m, s)?;
            let d = parse_int(d, s)?;
            if !d.is_positive() || !(d.clone() & (d.clone() - BigInt::one())).is_zero() {
                return Err(Error::Literal(s.to_string()));
            }
            let k = d.bits() as i64 - 1;
            return Ok(Dyadic::from_bigint(m, -k));
        }
        Ok(Dyadic::from_bigint(parse_int(t, s)?, 0))
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A dyadic value or a signed infinity: the value of any `Fp`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ExtDyadic {
    NegInf,
    Finite(Dyadic),
    PosInf,
}

impl ExtDyadic {
    pub fn finite(&self) -> Option<&Dyadic> {
        match self {
            ExtDyadic::Finite(d) => Some(d),
            _ => None,
        }
    }
}

impl Ord for ExtDyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtDyadic::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (PosInf, _) | (_, NegInf) => Ordering::Greater,
        }
    }
}

impl PartialOrd for ExtDyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtDyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtDyadic::NegInf => f.write_str("-inf"),
            ExtDyadic::PosInf => f.write_str("inf"),
            ExtDyadic::Finite(d) => d.fmt(f),
        }
    }
}

impl FromStr for ExtDyadic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "inf" | "+inf" => Ok(ExtDyadic::PosInf),
            "-inf" => Ok(ExtDyadic::NegInf),
            other => other.parse().map(ExtDyadic::Finite),
        }
    }
}

impl Serialize for ExtDyadic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExtDyadic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Reference implementation of addition on plain `BigInt` pairs, used by
/// tests to cross-check the small-significand fast path.
#[cfg(test)]
pub(crate) fn reference_value(d: &Dyadic) -> (BigInt, i64) {
    (d.mantissa(), d.q)
}
