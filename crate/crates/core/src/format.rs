//! The parametric binary floating-point set `F(p, Emin, Emax)`.
//!
//! A finite element is `M * 2^(E - p + 1)` with `Emin <= E <= Emax`,
//! `|M| < 2^p`, and `|M| >= 2^(p-1)` whenever `E > Emin`. Subnormals share
//! `E = Emin`, and there is a single unsigned zero `(M, E) = (0, Emin)`, so
//! each value has exactly one `(M, E)` pair and significand parity is
//! well-defined.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::{Dyadic, ExtDyadic, Remainder};
use crate::error::{Error, Result};

/// Largest supported precision; significands are stored in an `i64`.
pub const MAX_PRECISION: u32 = 62;

/// Exponent bounds are kept well inside `i32` so that derived exponents such
/// as `Emin - 2p` never overflow.
pub const MAX_EXPONENT_MAGNITUDE: i32 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFormat", into = "RawFormat")]
pub struct FormatConfig {
    p: u32,
    emin: i32,
    emax: i32,
}

#[derive(Serialize, Deserialize)]
struct RawFormat {
    p: u32,
    emin: i32,
    emax: i32,
}

impl TryFrom<RawFormat> for FormatConfig {
    type Error = Error;
    fn try_from(r: RawFormat) -> Result<Self> {
        FormatConfig::new(r.p, r.emin, r.emax)
    }
}

impl From<FormatConfig> for RawFormat {
    fn from(f: FormatConfig) -> Self {
        RawFormat {
            p: f.p,
            emin: f.emin,
            emax: f.emax,
        }
    }
}

impl FormatConfig {
    pub fn new(p: u32, emin: i32, emax: i32) -> Result<Self> {
        if !(2..=MAX_PRECISION).contains(&p) {
            return Err(Error::Format(format!("precision {p} outside 2..={MAX_PRECISION}")));
        }
        if emin > emax {
            return Err(Error::Format(format!("Emin {emin} exceeds Emax {emax}")));
        }
        if emin.abs() > MAX_EXPONENT_MAGNITUDE || emax.abs() > MAX_EXPONENT_MAGNITUDE {
            return Err(Error::Format(format!(
                "exponent bounds must lie within ±{MAX_EXPONENT_MAGNITUDE}"
            )));
        }
        Ok(FormatConfig { p, emin, emax })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn emin(&self) -> i32 {
        self.emin
    }

    pub fn emax(&self) -> i32 {
        self.emax
    }

    /// Stable identifier `p,emin,emax`, as accepted by `FromStr`.
    pub fn id(&self) -> String {
        format!("{},{},{}", self.p, self.emin, self.emax)
    }

    /// Unit round-off `u = 2^-p`.
    pub fn unit_roundoff(&self) -> Dyadic {
        Dyadic::pow2(-(self.p as i64))
    }

    /// `2^p - 1`, the largest integral significand.
    pub(crate) fn max_significand(&self) -> i64 {
        (1i64 << self.p) - 1
    }

    pub(crate) fn min_normal_significand(&self) -> i64 {
        1i64 << (self.p - 1)
    }

    /// Exponent of the unit in the last place for elements with exponent `e`.
    pub(crate) fn quantum_exp(&self, e: i64) -> i64 {
        e - self.p as i64 + 1
    }

    /// Largest finite element, `Ω = (2^p - 1) * 2^(Emax - p + 1)`.
    pub fn max_finite(&self) -> Fp {
        Fp::Finite {
            m: self.max_significand(),
            e: self.emax,
        }
    }

    /// Smallest positive element, `ω = 2^(Emin - p + 1)`.
    pub fn min_positive(&self) -> Fp {
        Fp::Finite { m: 1, e: self.emin }
    }

    pub fn omega(&self) -> Dyadic {
        Dyadic::new(self.max_significand(), self.quantum_exp(self.emax as i64))
    }

    pub fn omega_min(&self) -> Dyadic {
        Dyadic::pow2(self.quantum_exp(self.emin as i64))
    }

    pub fn zero(&self) -> Fp {
        Fp::Finite { m: 0, e: self.emin }
    }

    /// Builds a finite element from its integral significand and exponent,
    /// rejecting pairs that violate the canonical constraints.
    pub fn fp(&self, m: i64, e: i32) -> Result<Fp> {
        let mag = m.unsigned_abs();
        let ok = (self.emin..=self.emax).contains(&e)
            && mag <= self.max_significand() as u64
            && (e == self.emin || mag >= self.min_normal_significand() as u64);
        if ok {
            Ok(Fp::Finite { m, e })
        } else {
            Err(Error::NotRepresentable {
                value: format!("(M={m}, E={e})"),
                fmt: self.id(),
            })
        }
    }

    /// Exact value of a finite element; `None` for infinities.
    pub fn value(&self, x: Fp) -> Option<Dyadic> {
        match x {
            Fp::Finite { m, e } => Some(Dyadic::new(m, self.quantum_exp(e as i64))),
            _ => None,
        }
    }

    pub fn ext_value(&self, x: Fp) -> ExtDyadic {
        match x {
            Fp::Finite { .. } => ExtDyadic::Finite(self.value(x).unwrap()),
            Fp::PosInf => ExtDyadic::PosInf,
            Fp::NegInf => ExtDyadic::NegInf,
        }
    }

    /// The element equal to `r`, if `r` is in `F`.
    pub fn from_dyadic(&self, r: &Dyadic) -> Option<Fp> {
        let Some(e_r) = r.floor_log2() else {
            return Some(self.zero());
        };
        if e_r > self.emax as i64 {
            return None;
        }
        let e = e_r.max(self.emin as i64);
        match r.abs_shr(self.quantum_exp(e))? {
            (t, Remainder::Exact) => {
                let m = if r.is_negative() { -(t as i64) } else { t as i64 };
                Some(Fp::Finite { m, e: e as i32 })
            }
            _ => None,
        }
    }

    /// Like `from_dyadic`, but reports the offending value.
    pub fn to_fp(&self, r: &Dyadic) -> Result<Fp> {
        self.from_dyadic(r).ok_or_else(|| Error::NotRepresentable {
            value: r.to_string(),
            fmt: self.id(),
        })
    }

    pub fn contains(&self, r: &Dyadic) -> bool {
        self.from_dyadic(r).is_some()
    }

    /// Number of finite elements:
    /// `2 * ((Emax - Emin + 1) * 2^(p-1) + 2^(p-1) - 1) + 1`.
    pub fn count(&self) -> u128 {
        let half = 1u128 << (self.p - 1);
        let binades = (self.emax as i128 - self.emin as i128 + 1) as u128;
        2 * (binades * half + half - 1) + 1
    }

    /// All finite elements in ascending order, from `-Ω` to `Ω`.
    pub fn enumerate(&self) -> Enumerate {
        Enumerate {
            fmt: *self,
            next: Some(self.max_finite().neg()),
        }
    }

    /// JSON-friendly description: format id, `{M, E}` and the exact value.
    pub fn describe(&self, x: Fp) -> FpRecord {
        let (m, e) = match x {
            Fp::Finite { m, e } => (Some(m), Some(e)),
            _ => (None, None),
        };
        FpRecord {
            format: self.id(),
            m,
            e,
            value: self.ext_value(x),
        }
    }
}

impl fmt::Display for FormatConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for FormatConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::Format(format!("expected `p,emin,emax`, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let p = parts[0].parse().map_err(|_| bad())?;
        let emin = parts[1].parse().map_err(|_| bad())?;
        let emax = parts[2].parse().map_err(|_| bad())?;
        FormatConfig::new(p, emin, emax)
    }
}

/// Serialized form of an element: its `{M, E}` pair, format id and value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FpRecord {
    pub format: String,
    #[serde(rename = "M")]
    pub m: Option<i64>,
    #[serde(rename = "E")]
    pub e: Option<i32>,
    pub value: ExtDyadic,
}

/// An element of `F`, or a signed infinity.
///
/// An `Fp` only has a value relative to its `FormatConfig`. Ordering and
/// equality are meaningful between elements of the same format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fp {
    Finite { m: i64, e: i32 },
    PosInf,
    NegInf,
}

impl Fp {
    pub fn is_finite(&self) -> bool {
        matches!(self, Fp::Finite { .. })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Fp::Finite { m: 0, .. })
    }

    pub fn significand(&self) -> Option<i64> {
        match *self {
            Fp::Finite { m, .. } => Some(m),
            _ => None,
        }
    }

    pub fn exponent(&self) -> Option<i32> {
        match *self {
            Fp::Finite { e, .. } => Some(e),
            _ => None,
        }
    }

    /// Whether the integral significand is odd. Infinities have none.
    pub fn is_odd(&self) -> bool {
        matches!(self, Fp::Finite { m, .. } if m & 1 == 1)
    }

    pub fn is_negative(&self) -> bool {
        match *self {
            Fp::Finite { m, .. } => m < 0,
            Fp::NegInf => true,
            Fp::PosInf => false,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Fp {
        match self {
            Fp::Finite { m, e } => Fp::Finite { m: -m, e },
            Fp::PosInf => Fp::NegInf,
            Fp::NegInf => Fp::PosInf,
        }
    }

    pub fn abs(self) -> Fp {
        if self.is_negative() {
            self.neg()
        } else {
            self
        }
    }

    // Canonical form makes (E, M) order-compatible within each sign.
    fn key(&self) -> (i8, i64, i64) {
        match *self {
            Fp::NegInf => (-2, 0, 0),
            Fp::PosInf => (2, 0, 0),
            Fp::Finite { m: 0, .. } => (0, 0, 0),
            Fp::Finite { m, e } if m > 0 => (1, e as i64, m),
            Fp::Finite { m, e } => (-1, -(e as i64), m),
        }
    }
}

impl Ord for Fp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Fp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Iterator returned by [`FormatConfig::enumerate`].
pub struct Enumerate {
    fmt: FormatConfig,
    next: Option<Fp>,
}

impl Iterator for Enumerate {
    type Item = Fp;
    fn next(&mut self) -> Option<Fp> {
        let cur = self.next?;
        let nxt = succ(cur, &self.fmt);
        self.next = nxt.is_finite().then_some(nxt);
        Some(cur)
    }
}

/// `e_r = floor(log2 |r|)`; `None` stands for the exponent of zero.
pub fn exponent(r: &Dyadic) -> Option<i64> {
    r.floor_log2()
}

/// Unit in the first place: `2^floor(log2 |r|)`, or 0 for `r = 0`.
pub fn ufp(r: &Dyadic) -> Dyadic {
    match r.floor_log2() {
        Some(e) => Dyadic::pow2(e),
        None => Dyadic::zero(),
    }
}

/// Unit in the last place: `2u * ufp(r)` for `|r| >= 2^Emin`, else `ω`.
pub fn ulp(r: &Dyadic, fmt: &FormatConfig) -> Dyadic {
    Dyadic::pow2(ulp_exp(r, fmt))
}

pub(crate) fn ulp_exp(r: &Dyadic, fmt: &FormatConfig) -> i64 {
    match r.floor_log2() {
        Some(e) if e >= fmt.emin as i64 => fmt.quantum_exp(e),
        _ => fmt.quantum_exp(fmt.emin as i64),
    }
}

/// Floating-point successor of an element. `succ(Ω) = +∞`, `succ(0) = ω`;
/// infinities step like IEEE `nextUp`.
pub fn succ(x: Fp, fmt: &FormatConfig) -> Fp {
    match x {
        Fp::PosInf => Fp::PosInf,
        Fp::NegInf => fmt.max_finite().neg(),
        Fp::Finite { m, e } => {
            if m >= 0 {
                if m == fmt.max_significand() {
                    if e == fmt.emax {
                        Fp::PosInf
                    } else {
                        Fp::Finite {
                            m: fmt.min_normal_significand(),
                            e: e + 1,
                        }
                    }
                } else {
                    Fp::Finite { m: m + 1, e }
                }
            } else if m == -fmt.min_normal_significand() && e > fmt.emin {
                // Half-ulp step across a binade boundary.
                Fp::Finite {
                    m: -fmt.max_significand(),
                    e: e - 1,
                }
            } else {
                Fp::Finite { m: m + 1, e }
            }
        }
    }
}

/// Floating-point predecessor of an element, `pred(x) = -succ(-x)`.
pub fn pred(x: Fp, fmt: &FormatConfig) -> Fp {
    succ(x.neg(), fmt).neg()
}

/// Whether `r ∈ gℤ`, for `g` zero or a power of two.
pub fn is_multiple_of(r: &Dyadic, g: &Dyadic) -> Result<bool> {
    if g.is_zero() {
        return Ok(r.is_zero());
    }
    if !g.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(g.to_string()));
    }
    Ok(is_multiple_of_pow2(r, g.exp2()))
}

/// `r ∈ 2^k ℤ`.
pub fn is_multiple_of_pow2(r: &Dyadic, k: i64) -> bool {
    r.is_zero() || r.exp2() >= k
}

/// Exponent of the least significant nonzero bit: the largest `k` with
/// `y ∈ 2^k ℤ`.
pub fn h_lsb(y: &Dyadic) -> Result<i64> {
    if y.is_zero() {
        Err(Error::ZeroArgument("h_lsb"))
    } else {
        Ok(y.exp2())
    }
}
