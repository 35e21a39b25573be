//! FastTwoSum and ExtractScalar with one rounding mode per operation.
//!
//! Both return a trace holding every intermediate. Whether the
//! transformation was error-free is decided afterwards in exact arithmetic.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::format::{is_multiple_of_pow2, ulp_exp, FormatConfig, Fp};
use crate::rounding::{round, RoundingMode};

/// Rounding modes for the three operations of FastTwoSum or ExtractScalar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ModeTriple {
    pub o1: RoundingMode,
    pub o2: RoundingMode,
    pub o3: RoundingMode,
}

impl ModeTriple {
    pub fn new(o1: RoundingMode, o2: RoundingMode, o3: RoundingMode) -> Self {
        ModeTriple { o1, o2, o3 }
    }

    pub fn uniform(mode: RoundingMode) -> Self {
        ModeTriple::new(mode, mode, mode)
    }

    /// The six triples using one mode throughout.
    pub fn all_uniform() -> Vec<ModeTriple> {
        RoundingMode::ALL.into_iter().map(ModeTriple::uniform).collect()
    }

    /// All 216 combinations.
    pub fn all_mixed() -> Vec<ModeTriple> {
        Self::with_first(&RoundingMode::ALL)
    }

    /// Triples whose first mode is drawn from `first` and whose other two
    /// range over all six modes.
    pub fn with_first(first: &[RoundingMode]) -> Vec<ModeTriple> {
        let mut out = Vec::with_capacity(first.len() * 36);
        for &o1 in first {
            for o2 in RoundingMode::ALL {
                for o3 in RoundingMode::ALL {
                    out.push(ModeTriple::new(o1, o2, o3));
                }
            }
        }
        out
    }

    /// Adversarial faithful rounding: at every free step the result may be
    /// either faithful neighbor, so the branches are the RD/RU choices.
    /// With `first` fixed only the last two steps branch.
    pub fn adversarial(first: Option<RoundingMode>) -> Vec<ModeTriple> {
        use RoundingMode::{Rd, Ru};
        let firsts: Vec<RoundingMode> = match first {
            Some(m) => vec![m],
            None => vec![Rd, Ru],
        };
        let mut out = Vec::new();
        for &o1 in &firsts {
            for o2 in [Rd, Ru] {
                for o3 in [Rd, Ru] {
                    out.push(ModeTriple::new(o1, o2, o3));
                }
            }
        }
        out
    }
}

impl fmt::Display for ModeTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.o1, self.o2, self.o3)
    }
}

impl FromStr for ModeTriple {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::UnknownMode(s.to_string()));
        }
        Ok(ModeTriple::new(parts[0].parse()?, parts[1].parse()?, parts[2].parse()?))
    }
}

impl From<ModeTriple> for String {
    fn from(t: ModeTriple) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for ModeTriple {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// `mode(l + sign * r)` with IEEE infinity propagation; at most one operand
/// is infinite in either algorithm.
fn round_sum(l: Fp, r: Fp, subtract: bool, mode: RoundingMode, fmt: &FormatConfig) -> Fp {
    let r = if subtract { r.neg() } else { r };
    match (fmt.value(l), fmt.value(r)) {
        (Some(a), Some(b)) => round(&(&a + &b), mode, fmt),
        (None, _) => l,
        (_, None) => r,
    }
}

/// Every intermediate of one FastTwoSum evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FtsTrace {
    pub a: Fp,
    pub b: Fp,
    pub modes: ModeTriple,
    pub x: Fp,
    pub z: Fp,
    pub y: Fp,
    /// `a + b - x`, exact; `None` when `x` overflowed.
    pub delta: Option<Dyadic>,
    /// `x + y == a + b` exactly.
    pub eft: bool,
    /// Some intermediate rounded to an infinity.
    pub overflow: bool,
}

impl FtsTrace {
    pub fn to_json(&self, fmt: &FormatConfig) -> serde_json::Value {
        json!({
            "format": fmt.id(),
            "modes": self.modes.to_string(),
            "a": fmt.describe(self.a),
            "b": fmt.describe(self.b),
            "x": fmt.describe(self.x),
            "z": fmt.describe(self.z),
            "y": fmt.describe(self.y),
            "delta": self.delta,
            "delta_in_f": self.delta.as_ref().is_some_and(|d| fmt.contains(d)),
            "eft": self.eft,
            "overflow": self.overflow,
        })
    }
}

/// `x = o1(a+b); z = o2(x-a); y = o3(b-z)`.
pub fn fast_two_sum(a: Fp, b: Fp, modes: ModeTriple, fmt: &FormatConfig) -> FtsTrace {
    let x = round_sum(a, b, false, modes.o1, fmt);
    let z = round_sum(x, a, true, modes.o2, fmt);
    let y = round_sum(b, z, true, modes.o3, fmt);
    let overflow = !(x.is_finite() && z.is_finite() && y.is_finite());
    let sum = match (fmt.value(a), fmt.value(b)) {
        (Some(va), Some(vb)) => Some(&va + &vb),
        _ => None,
    };
    let delta = match (&sum, fmt.value(x)) {
        (Some(s), Some(vx)) => Some(s - &vx),
        _ => None,
    };
    let eft = !overflow
        && match (&delta, fmt.value(y)) {
            (Some(dl), Some(vy)) => *dl == vy,
            _ => false,
        };
    FtsTrace {
        a,
        b,
        modes,
        x,
        z,
        y,
        delta,
        eft,
        overflow,
    }
}

/// Outcome of a single rounded addition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundingError {
    pub x: Fp,
    /// `a + b - x`; `None` if `x` is infinite.
    pub delta: Option<Dyadic>,
    pub in_f: bool,
}

/// The rounding error `δ = a + b - mode(a + b)` and whether it lies in `F`.
pub fn rounding_error(a: Fp, b: Fp, mode: RoundingMode, fmt: &FormatConfig) -> RoundingError {
    let x = round_sum(a, b, false, mode, fmt);
    let delta = match (fmt.value(a), fmt.value(b), fmt.value(x)) {
        (Some(va), Some(vb), Some(vx)) => Some(&(&va + &vb) - &vx),
        _ => None,
    };
    let in_f = delta.as_ref().is_some_and(|d| fmt.contains(d));
    RoundingError { x, delta, in_f }
}

/// Every intermediate of one ExtractScalar evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitTrace {
    pub sigma: Fp,
    pub x: Fp,
    pub modes: ModeTriple,
    pub s: Fp,
    pub x_h: Fp,
    pub x_l: Fp,
    /// `x_h + x_l == x` exactly.
    pub exact_split: bool,
    /// `x_h ∈ ½ulp(σ)ℤ`.
    pub grid_ok: bool,
    pub overflow: bool,
}

impl SplitTrace {
    pub fn to_json(&self, fmt: &FormatConfig) -> serde_json::Value {
        json!({
            "format": fmt.id(),
            "modes": self.modes.to_string(),
            "sigma": fmt.describe(self.sigma),
            "x": fmt.describe(self.x),
            "s": fmt.describe(self.s),
            "x_h": fmt.describe(self.x_h),
            "x_l": fmt.describe(self.x_l),
            "exact_split": self.exact_split,
            "grid_ok": self.grid_ok,
            "overflow": self.overflow,
        })
    }
}

/// `s = o1(σ+x); x_h = o2(s-σ); x_l = o3(x-x_h)`.
pub fn extract_scalar(sigma: Fp, x: Fp, modes: ModeTriple, fmt: &FormatConfig) -> SplitTrace {
    let s = round_sum(sigma, x, false, modes.o1, fmt);
    let x_h = round_sum(s, sigma, true, modes.o2, fmt);
    let x_l = round_sum(x, x_h, true, modes.o3, fmt);
    let overflow = !(s.is_finite() && x_h.is_finite() && x_l.is_finite());
    let (exact_split, grid_ok) = match (fmt.value(sigma), fmt.value(x), fmt.value(x_h), fmt.value(x_l)) {
        (Some(vs), Some(vx), Some(vh), Some(vl)) => {
            let half_ulp_sigma = ulp_exp(&vs, fmt) - 1;
            (&vh + &vl == vx, is_multiple_of_pow2(&vh, half_ulp_sigma))
        }
        _ => (false, false),
    };
    SplitTrace {
        sigma,
        x,
        modes,
        s,
        x_h,
        x_l,
        exact_split: exact_split && !overflow,
        grid_ok: grid_ok && !overflow,
        overflow,
    }
}
