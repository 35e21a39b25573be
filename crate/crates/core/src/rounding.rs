//! The six faithful rounding modes as total maps from dyadics to `F`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::{Dyadic, Remainder};
use crate::error::{Error, Result};
use crate::format::{FormatConfig, Fp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundingMode {
    /// Toward -∞.
    Rd,
    /// Toward +∞.
    Ru,
    /// Toward zero.
    Rz,
    /// Nearest, ties to even significand.
    Rne,
    /// Nearest, ties away from zero.
    Rna,
    /// Round-to-odd: the neighbor whose integral significand is odd.
    Ro,
}

impl RoundingMode {
    pub const ALL: [RoundingMode; 6] = [
        RoundingMode::Rd,
        RoundingMode::Ru,
        RoundingMode::Rz,
        RoundingMode::Rne,
        RoundingMode::Rna,
        RoundingMode::Ro,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RoundingMode::Rd => "rd",
            RoundingMode::Ru => "ru",
            RoundingMode::Rz => "rz",
            RoundingMode::Rne => "rne",
            RoundingMode::Rna => "rna",
            RoundingMode::Ro => "ro",
        }
    }

    pub fn is_nearest(self) -> bool {
        matches!(self, RoundingMode::Rne | RoundingMode::Rna)
    }

    /// Every mode here rounds faithfully.
    pub fn is_faithful(self) -> bool {
        true
    }
}

impl fmt::Display for RoundingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RoundingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RoundingMode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownMode(s.to_string()))
    }
}

/// Rounds `r` into `fmt` under `mode`.
///
/// Elements of `F` are returned unchanged. Otherwise the result is one of the
/// two neighbors of `r`. Above the finite range the five IEEE modes overflow
/// as IEEE 754 prescribes (nearest modes reach ±∞ from `Ω + ulp(Ω)/2` on)
/// while RO saturates at ±Ω.
pub fn round(r: &Dyadic, mode: RoundingMode, fmt: &FormatConfig) -> Fp {
    let Some(e_r) = r.floor_log2() else {
        return fmt.zero();
    };
    let negative = r.is_negative();
    let (e, t, rem) = if e_r > fmt.emax() as i64 {
        // |r| >= 2^(Emax+1) > Ω + ulp(Ω)/2: truncation is Ω, the remainder is
        // more than half a unit.
        (fmt.emax() as i64, fmt.max_significand() as u64, Remainder::AboveHalf)
    } else {
        let e = e_r.max(fmt.emin() as i64);
        let (t, rem) = r
            .abs_shr(fmt.quantum_exp(e))
            .expect("quotient is below 2^p by construction");
        (e, t, rem)
    };
    let away = match (mode, rem) {
        (_, Remainder::Exact) => false,
        (RoundingMode::Rd, _) => negative,
        (RoundingMode::Ru, _) => !negative,
        (RoundingMode::Rz, _) => false,
        (RoundingMode::Rne, Remainder::Half) => t & 1 == 1,
        (RoundingMode::Rna, Remainder::Half) => true,
        (RoundingMode::Rne | RoundingMode::Rna, r) => r == Remainder::AboveHalf,
        // The truncated and incremented candidates differ by one unit, so
        // exactly one is odd. A carry into 2^p only happens from the odd
        // 2^p - 1, which is kept.
        (RoundingMode::Ro, _) => t & 1 == 0,
    };
    let mag = if away { t + 1 } else { t } as i64;
    let signed = |m: i64, e: i64| {
        let m = if negative { -m } else { m };
        Fp::Finite { m, e: e as i32 }
    };
    if mag > fmt.max_significand() {
        if e == fmt.emax() as i64 {
            if negative {
                Fp::NegInf
            } else {
                Fp::PosInf
            }
        } else {
            signed(fmt.min_normal_significand(), e + 1)
        }
    } else {
        signed(mag, e)
    }
}

/// Round-down neighbor of `r` (largest element `<= r`).
pub fn round_down(r: &Dyadic, fmt: &FormatConfig) -> Fp {
    round(r, RoundingMode::Rd, fmt)
}

/// Round-up neighbor of `r` (smallest element `>= r`).
pub fn round_up(r: &Dyadic, fmt: &FormatConfig) -> Fp {
    round(r, RoundingMode::Ru, fmt)
}

/// Whether `x ∈ {RD(r), RU(r)}`.
pub fn is_faithful_result(r: &Dyadic, x: Fp, fmt: &FormatConfig) -> bool {
    x == round_down(r, fmt) || x == round_up(r, fmt)
}

/// Checks that `wide` can carry a round-to-odd intermediate for `narrow`:
/// at least `2p + 2` bits and an exponent range that covers the narrow one
/// plus one binade above it.
pub fn check_double_rounding_formats(wide: &FormatConfig, narrow: &FormatConfig) -> Result<()> {
    if wide.p() < 2 * narrow.p() + 2 {
        return Err(Error::Precondition(format!(
            "wide precision {} is below 2*{}+2",
            wide.p(),
            narrow.p()
        )));
    }
    if wide.emin() > narrow.emin() || wide.emax() <= narrow.emax() {
        return Err(Error::Precondition(format!(
            "wide exponent range [{}, {}] must contain [{}, {}]",
            wide.emin(),
            wide.emax(),
            narrow.emin(),
            narrow.emax() + 1
        )));
    }
    Ok(())
}

/// `RNE_narrow(RO_wide(r))`.
pub fn double_round_ro(r: &Dyadic, wide: &FormatConfig, narrow: &FormatConfig) -> Result<Fp> {
    check_double_rounding_formats(wide, narrow)?;
    let intermediate = round(r, RoundingMode::Ro, wide);
    let v = wide
        .value(intermediate)
        .expect("round-to-odd never overflows");
    Ok(round(&v, RoundingMode::Rne, narrow))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{pred, succ, ulp};
    use RoundingMode::*;

    fn fmt4() -> FormatConfig {
        FormatConfig::new(4, -10, 10).unwrap()
    }

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn val(f: &FormatConfig, x: Fp) -> Dyadic {
        f.value(x).unwrap()
    }

    #[test]
    fn worked_examples() {
        let f = fmt4();
        assert_eq!(val(&f, round(&d("33/2"), Ru, &f)), d("18"));
        assert_eq!(val(&f, round(&(Dyadic::one() + Dyadic::pow2(-8)), Ro, &f)), d("9/8"));
        let mid = Dyadic::one() + d("1/16");
        assert_eq!(val(&f, round(&mid, Rne, &f)), d("1"));
        assert_eq!(val(&f, round(&mid, Rna, &f)), d("9/8"));
        let above = f.omega() + Dyadic::pow2(7);
        assert_eq!(round(&above, Ro, &f), f.max_finite());
    }

    #[test]
    fn overflow_semantics() {
        let f = fmt4();
        let big = f.omega() + Dyadic::pow2(7);
        assert_eq!(round(&big, Ru, &f), Fp::PosInf);
        assert_eq!(round(&big, Rd, &f), f.max_finite());
        assert_eq!(round(&big, Rz, &f), f.max_finite());
        assert_eq!(round(&-&big, Rd, &f), Fp::NegInf);
        assert_eq!(round(&-&big, Ru, &f), f.max_finite().neg());
        assert_eq!(round(&-&big, Ro, &f), f.max_finite().neg());
        // Nearest modes overflow exactly from the IEEE threshold on.
        let threshold = f.omega() + Dyadic::pow2(6);
        let below = &threshold - &Dyadic::pow2(-20);
        for m in [Rne, Rna] {
            assert_eq!(round(&threshold, m, &f), Fp::PosInf);
            assert_eq!(round(&below, m, &f), f.max_finite());
        }
        let huge = Dyadic::pow2(400);
        assert_eq!(round(&huge, Ro, &f), f.max_finite());
        assert_eq!(round(&huge, Rne, &f), Fp::PosInf);
        assert_eq!(round(&huge, Rz, &f), f.max_finite());
    }

    #[test]
    fn underflow_is_gradual() {
        let f = fmt4();
        let tiny = Dyadic::pow2(-40);
        assert_eq!(round(&tiny, Ru, &f), f.min_positive());
        assert_eq!(round(&tiny, Rd, &f), f.zero());
        assert_eq!(round(&tiny, Ro, &f), f.min_positive());
        assert_eq!(round(&-&tiny, Ro, &f), f.min_positive().neg());
        assert_eq!(round(&Dyadic::pow2(-14), Rne, &f), f.zero());
        assert_eq!(round(&Dyadic::pow2(-14), Rna, &f), f.min_positive());
    }

    #[test]
    fn faithful_result_examples() {
        let f = fmt4();
        let r = d("33/2");
        for (x, want) in [("16", true), ("18", true), ("15", false)] {
            assert_eq!(is_faithful_result(&r, f.to_fp(&d(x)).unwrap(), &f), want);
        }
        let one = f.to_fp(&Dyadic::one()).unwrap();
        assert!(is_faithful_result(&Dyadic::one(), one, &f));
    }

    #[test]
    fn double_round_preconditions() {
        let narrow = FormatConfig::new(3, -6, 6).unwrap();
        let short = FormatConfig::new(7, -30, 30).unwrap();
        assert!(double_round_ro(&Dyadic::one(), &short, &narrow).is_err());
        let low_range = FormatConfig::new(8, -30, 6).unwrap();
        assert!(double_round_ro(&Dyadic::one(), &low_range, &narrow).is_err());
        let wide = FormatConfig::new(8, -30, 30).unwrap();
        // Just above the tie 1 + u: up both ways.
        let r = Dyadic::one() + Dyadic::pow2(-3) + Dyadic::pow2(-8);
        let direct = round(&r, Rne, &narrow);
        assert_eq!(val(&narrow, direct), d("5/4"));
        assert_eq!(double_round_ro(&r, &wide, &narrow).unwrap(), direct);
        // 1 + u/2 + u_wide is below the tie: down both ways.
        let r = Dyadic::one() + Dyadic::pow2(-4) + Dyadic::pow2(-8);
        let direct = round(&r, Rne, &narrow);
        assert_eq!(val(&narrow, direct), d("1"));
        assert_eq!(double_round_ro(&r, &wide, &narrow).unwrap(), direct);
        // The tie itself stays a tie through the wide format.
        let tie = d("9/8");
        assert_eq!(val(&narrow, double_round_ro(&tie, &wide, &narrow).unwrap()), d("1"));
        let exact = d("3/2");
        assert_eq!(val(&narrow, double_round_ro(&exact, &wide, &narrow).unwrap()), exact);
    }

    /// Reference rounding straight from the definitions: scan the sorted
    /// element list for the neighbors and pick by mode.
    fn oracle(r: &Dyadic, mode: RoundingMode, f: &FormatConfig, all: &[Fp]) -> Fp {
        if let Some(x) = all.iter().find(|&&x| val(f, x) == *r) {
            return *x;
        }
        let below = all.iter().rev().find(|&&x| val(f, x) < *r).copied();
        let above = all.iter().find(|&&x| val(f, x) > *r).copied();
        let (lo, hi) = (below.unwrap_or(Fp::NegInf), above.unwrap_or(Fp::PosInf));
        let omega = f.omega();
        let half_ulp_omega = Dyadic::pow2(f.emax() as i64 - f.p() as i64);
        match mode {
            Rd => lo,
            Ru => hi,
            Rz => if r.is_negative() { hi } else { lo },
            Ro => {
                if hi.is_odd() { hi } else { lo }
            }
            Rne | Rna => {
                if r.abs() >= &omega + &half_ulp_omega {
                    return if r.is_negative() { Fp::NegInf } else { Fp::PosInf };
                }
                if !lo.is_finite() || !hi.is_finite() {
                    return if lo.is_finite() { lo } else { hi };
                }
                let dl = r - &val(f, lo);
                let dh = &val(f, hi) - r;
                match dl.cmp(&dh) {
                    std::cmp::Ordering::Less => lo,
                    std::cmp::Ordering::Greater => hi,
                    std::cmp::Ordering::Equal => {
                        if mode == Rne {
                            if lo.is_odd() { hi } else { lo }
                        } else if r.is_negative() {
                            lo
                        } else {
                            hi
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn agrees_with_scan_oracle() {
        let f = FormatConfig::new(3, -4, 3).unwrap();
        let all: Vec<Fp> = f.enumerate().collect();
        // Every dyadic with a 7-bit significand on a grid spanning past both
        // ends of the range.
        for q in -12..=4 {
            for m in -127i64..=127 {
                let r = Dyadic::new(m, q);
                for mode in RoundingMode::ALL {
                    assert_eq!(round(&r, mode, &f), oracle(&r, mode, &f, &all), "r={r} mode={mode}");
                }
            }
        }
    }

    #[test]
    fn ro_parity_and_neighbors() {
        let f = fmt4();
        let all: Vec<Fp> = f.enumerate().collect();
        for w in all.windows(2) {
            let (lo, hi) = (val(&f, w[0]), val(&f, w[1]));
            let mid = (&lo + &hi).mul_pow2(-1);
            let x = round(&mid, Ro, &f);
            assert!(x.is_odd());
            assert!(x == w[0] || x == w[1]);
            assert_eq!(succ(w[0], &f), w[1]);
            assert_eq!(pred(w[1], &f), w[0]);
            assert!(ulp(&mid, &f) >= &hi - &lo);
        }
    }
}
