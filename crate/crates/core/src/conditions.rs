//! Sufficient conditions for error-free FastTwoSum and ExtractScalar as
//! executable predicates.
//!
//! Each [`ConditionId`] carries the guarantee it claims and the modes it
//! claims it for, so a sweep can check soundness (condition ⇒ guarantee)
//! without any per-condition wiring.
//!
//! Operands equal to zero satisfy every predicate except `lemma_rto1`: the
//! guaranteed conclusion holds trivially for them, and treating them as
//! satisfied keeps sweeps total over `F × F`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::format::{h_lsb, is_multiple_of_pow2, ulp_exp, FormatConfig, Fp};
use crate::rounding::RoundingMode;

/// What a condition promises when it holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Guarantee {
    /// `δ = a + b - o(a + b) ∈ F`.
    #[serde(rename = "delta-in-f")]
    DeltaInF,
    /// FastTwoSum returns `x + y = a + b`.
    #[serde(rename = "fts-eft")]
    Eft,
    /// ExtractScalar returns `x_h ∈ ½ulp(σ)ℤ` and `x = x_h + x_l`.
    #[serde(rename = "split-eft")]
    SplitEft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    LemmaFaith1,
    CorollaryFaith1,
    LemmaFaith2,
    TheoremFaith1,
    TheoremFaith2,
    LemmaRto1,
    LemmaRto3,
    CorollaryRto1,
    TheoremRto1,
    TheoremExtractScalar,
    PriorDekker,
    PriorBoldo,
    PriorJeannerod,
    PriorSignRd,
    PriorSignRu,
    PriorSignRz,
    PriorLinnainmaaParity,
    PriorLinnainmaaH,
}

use RoundingMode::{Rd, Rna, Rne, Ro, Ru, Rz};

const FAITHFUL: &[RoundingMode] = &RoundingMode::ALL;

impl ConditionId {
    pub const ALL: [ConditionId; 18] = [
        ConditionId::LemmaFaith1,
        ConditionId::CorollaryFaith1,
        ConditionId::LemmaFaith2,
        ConditionId::TheoremFaith1,
        ConditionId::TheoremFaith2,
        ConditionId::LemmaRto1,
        ConditionId::LemmaRto3,
        ConditionId::CorollaryRto1,
        ConditionId::TheoremRto1,
        ConditionId::TheoremExtractScalar,
        ConditionId::PriorDekker,
        ConditionId::PriorBoldo,
        ConditionId::PriorJeannerod,
        ConditionId::PriorSignRd,
        ConditionId::PriorSignRu,
        ConditionId::PriorSignRz,
        ConditionId::PriorLinnainmaaParity,
        ConditionId::PriorLinnainmaaH,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConditionId::LemmaFaith1 => "lemma_faith1",
            ConditionId::CorollaryFaith1 => "corollary_faith1",
            ConditionId::LemmaFaith2 => "lemma_faith2",
            ConditionId::TheoremFaith1 => "theorem_faith1",
            ConditionId::TheoremFaith2 => "theorem_faith2",
            ConditionId::LemmaRto1 => "lemma_rto1",
            ConditionId::LemmaRto3 => "lemma_rto3",
            ConditionId::CorollaryRto1 => "corollary_rto1",
            ConditionId::TheoremRto1 => "theorem_rto1",
            ConditionId::TheoremExtractScalar => "theorem_extract_scalar",
            ConditionId::PriorDekker => "prior_dekker",
            ConditionId::PriorBoldo => "prior_boldo",
            ConditionId::PriorJeannerod => "prior_jeannerod",
            ConditionId::PriorSignRd => "prior_sign_rd",
            ConditionId::PriorSignRu => "prior_sign_ru",
            ConditionId::PriorSignRz => "prior_sign_rz",
            ConditionId::PriorLinnainmaaParity => "prior_linnainmaa_parity",
            ConditionId::PriorLinnainmaaH => "prior_linnainmaa_h",
        }
    }

    pub fn guarantee(self) -> Guarantee {
        use ConditionId::*;
        match self {
            LemmaFaith1 | CorollaryFaith1 | LemmaFaith2 | TheoremFaith1 | LemmaRto1 | LemmaRto3
            | CorollaryRto1 | PriorBoldo | PriorLinnainmaaH => Guarantee::DeltaInF,
            TheoremFaith2 | TheoremRto1 | PriorDekker | PriorJeannerod | PriorSignRd
            | PriorSignRu | PriorSignRz | PriorLinnainmaaParity => Guarantee::Eft,
            TheoremExtractScalar => Guarantee::SplitEft,
        }
    }

    /// Modes the guarantee is claimed for: the single rounding of a
    /// `DeltaInF` condition, or the first operation of an `Eft`/`SplitEft`
    /// one. The remaining operations may use any faithful mode.
    pub fn first_modes(self) -> &'static [RoundingMode] {
        use ConditionId::*;
        match self {
            LemmaFaith1 | CorollaryFaith1 | LemmaFaith2 | TheoremFaith1 | TheoremFaith2
            | PriorBoldo | PriorJeannerod => FAITHFUL,
            LemmaRto1 => &[Rz, Ro],
            LemmaRto3 | CorollaryRto1 | TheoremRto1 | TheoremExtractScalar
            | PriorLinnainmaaParity => &[Ro],
            PriorDekker => &[Rne, Rna],
            PriorSignRd => &[Rd],
            PriorSignRu => &[Ru],
            PriorSignRz => &[Rz],
            PriorLinnainmaaH => &[Rz, Ro],
        }
    }

    /// Whether the predicate needs the computed sum `x`.
    pub fn is_post_hoc(self) -> bool {
        self == ConditionId::PriorLinnainmaaH
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConditionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ConditionId::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::UnknownCondition(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Conjunct {
    pub name: &'static str,
    pub holds: bool,
}

/// Result of evaluating a condition, with each conjunct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionCheck {
    pub condition: ConditionId,
    pub holds: bool,
    /// A zero operand decided the outcome; `conjuncts` is then empty.
    pub zero_rule: bool,
    pub conjuncts: Vec<Conjunct>,
}

/// Operand facts shared by the predicates.
struct Operands {
    a: Dyadic,
    b: Dyadic,
    sum: Dyadic,
    e_a: i64,
    e_b: i64,
    p: i64,
}

impl Operands {
    fn sum_le_omega(&self, fmt: &FormatConfig) -> bool {
        self.sum.abs() <= fmt.omega()
    }

    /// `a ∈ 2u²·ufp(b)ℤ`.
    fn a_on_double_grid_of_b(&self) -> bool {
        is_multiple_of_pow2(&self.a, self.e_b + 1 - 2 * self.p)
    }

    /// `b ∈ 2u²·ufp(a)ℤ`.
    fn b_on_double_grid_of_a(&self) -> bool {
        is_multiple_of_pow2(&self.b, self.e_a + 1 - 2 * self.p)
    }

    /// `a ∈ ulp(b)ℤ`.
    fn a_multiple_of_ulp_b(&self, fmt: &FormatConfig) -> bool {
        is_multiple_of_pow2(&self.a, ulp_exp(&self.b, fmt))
    }
}

fn c(name: &'static str, holds: bool) -> Conjunct {
    Conjunct { name, holds }
}

/// Evaluates `cond` on `(a, b)`, or on `(σ, x)` for
/// `theorem_extract_scalar`. `extra` is the computed sum `x`, needed only by
/// `prior_linnainmaa_h`.
pub fn check_detailed(
    cond: ConditionId,
    a: Fp,
    b: Fp,
    fmt: &FormatConfig,
    extra: Option<Fp>,
) -> Result<ConditionCheck> {
    let (Some(va), Some(vb)) = (fmt.value(a), fmt.value(b)) else {
        return Err(Error::Precondition("condition operands must be finite".into()));
    };
    let extra_value = if cond.is_post_hoc() {
        let x = extra.ok_or(Error::MissingExtra(cond.name()))?;
        Some(
            fmt.value(x)
                .ok_or_else(|| Error::Precondition("the computed sum x must be finite".into()))?,
        )
    } else {
        None
    };

    if cond != ConditionId::LemmaRto1 && (va.is_zero() || vb.is_zero()) {
        return Ok(ConditionCheck {
            condition: cond,
            holds: true,
            zero_rule: true,
            conjuncts: Vec::new(),
        });
    }

    let ops = Operands {
        sum: &va + &vb,
        e_a: va.floor_log2().unwrap_or(0),
        e_b: vb.floor_log2().unwrap_or(0),
        a: va,
        b: vb,
        p: fmt.p() as i64,
    };
    let p = ops.p;
    let emin = fmt.emin() as i64;

    use ConditionId::*;
    let conjuncts = match cond {
        LemmaFaith1 => {
            let tiny = Dyadic::pow2(emin);
            vec![c("abs_a_lt_2^emin", ops.a.abs() < tiny), c("abs_b_lt_2^emin", ops.b.abs() < tiny)]
        }
        CorollaryFaith1 => vec![c("abs_sum_lt_2^(emin+1)", ops.sum.abs() < Dyadic::pow2(emin + 1))],
        LemmaFaith2 => vec![
            c("abs_sum_le_omega", ops.sum_le_omega(fmt)),
            c("abs_a_ge_u_ufp_b", ops.a.abs() >= Dyadic::pow2(ops.e_b - p)),
            c("abs_b_ge_u_ufp_a", ops.b.abs() >= Dyadic::pow2(ops.e_a - p)),
        ],
        TheoremFaith1 => vec![
            c("abs_sum_le_omega", ops.sum_le_omega(fmt)),
            c("a_in_2u2_ufp_b_z", ops.a_on_double_grid_of_b()),
            c("b_in_2u2_ufp_a_z", ops.b_on_double_grid_of_a()),
        ],
        TheoremFaith2 => vec![
            c("abs_sum_le_omega", ops.sum_le_omega(fmt)),
            c("a_in_ulp_b_z", ops.a_multiple_of_ulp_b(fmt)),
            c("b_in_2u2_ufp_a_z", ops.b_on_double_grid_of_a()),
        ],
        LemmaRto1 => vec![c("abs_sum_gt_omega", !ops.sum_le_omega(fmt))],
        LemmaRto3 => {
            let larger = if ops.a.abs() >= ops.b.abs() { a } else { b };
            vec![c("max_abs_significand_odd", larger.is_odd())]
        }
        CorollaryRto1 => vec![
            c("a_in_2u2_ufp_b_z", ops.a_on_double_grid_of_b()),
            c("b_in_2u2_ufp_a_z", ops.b_on_double_grid_of_a()),
        ],
        TheoremRto1 => vec![
            c("a_significand_odd", a.is_odd()),
            c("a_in_ulp_b_z", ops.a_multiple_of_ulp_b(fmt)),
        ],
        TheoremExtractScalar => {
            let anchor = Dyadic::pow2(ops.e_a);
            let shape = ops.a.is_positive()
                && ops.a == &anchor + &Dyadic::pow2(ulp_exp(&anchor, fmt));
            vec![
                c("sigma_eq_2^k_plus_ulp", shape),
                c("2^k_ge_2omega", anchor >= fmt.omega_min().mul_pow2(1)),
                c("abs_x_le_2^k", ops.b.abs() <= anchor),
            ]
        }
        PriorDekker => vec![
            c("abs_sum_le_omega", ops.sum_le_omega(fmt)),
            c("e_a_ge_e_b", ops.e_a >= ops.e_b),
        ],
        PriorBoldo => vec![
            c("abs_sum_le_omega", ops.sum_le_omega(fmt)),
            c("abs_exp_gap_le_p-1", (ops.e_a - ops.e_b).abs() < p),
        ],
        PriorJeannerod => vec![
            c("abs_sum_le_omega", ops.sum_le_omega(fmt)),
            c("a_in_ulp_b_z", ops.a_multiple_of_ulp_b(fmt)),
            c("e_a_minus_e_b_le_p", ops.e_a - ops.e_b <= p),
        ],
        PriorSignRd => vec![
            c("a_in_ulp_b_z", ops.a_multiple_of_ulp_b(fmt)),
            c("b_ge_0", !ops.b.is_negative()),
        ],
        PriorSignRu => vec![
            c("a_in_ulp_b_z", ops.a_multiple_of_ulp_b(fmt)),
            c("b_le_0", !ops.b.is_positive()),
        ],
        PriorSignRz => vec![
            c("a_in_ulp_b_z", ops.a_multiple_of_ulp_b(fmt)),
            c("a_times_b_ge_0", ops.a.signum() * ops.b.signum() >= 0),
        ],
        PriorLinnainmaaParity => vec![
            c("abs_a_ge_abs_b", ops.a.abs() >= ops.b.abs()),
            c("a_significand_odd", a.is_odd()),
        ],
        PriorLinnainmaaH => {
            let smaller = if ops.a.abs() <= ops.b.abs() { &ops.a } else { &ops.b };
            let h = h_lsb(smaller)?;
            let x = extra_value.expect("checked above");
            // e_0 behaves as -∞ here.
            let holds = x.floor_log2().is_none_or(|e_x| e_x - h < 2 * p);
            vec![c("e_x_minus_h_min_lt_2p", holds)]
        }
    };
    Ok(ConditionCheck {
        condition: cond,
        holds: conjuncts.iter().all(|c| c.holds),
        zero_rule: false,
        conjuncts,
    })
}

pub fn check(cond: ConditionId, a: Fp, b: Fp, fmt: &FormatConfig, extra: Option<Fp>) -> Result<bool> {
    check_detailed(cond, a, b, fmt, extra).map(|c| c.holds)
}

/// Largest exponent gap `e_a - e_b` (or `|e_a - e_b|`) admitted between
/// nonzero operands. `theorem_faith2` additionally bounds `e_b - e_a` by
/// `p - 1`.
pub fn exponent_gap_bound(cond: ConditionId, fmt: &FormatConfig) -> Result<i64> {
    let p = fmt.p() as i64;
    match cond {
        ConditionId::LemmaFaith2 | ConditionId::PriorJeannerod => Ok(p),
        ConditionId::TheoremFaith1 | ConditionId::TheoremFaith2 => Ok(2 * p - 1),
        ConditionId::PriorBoldo => Ok(p - 1),
        other => Err(Error::Precondition(format!("{other} has no closed-form exponent gap"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rounding::round;

    fn fmt4() -> FormatConfig {
        FormatConfig::new(4, -10, 10).unwrap()
    }

    fn fp(f: &FormatConfig, s: &str) -> Fp {
        f.to_fp(&s.parse().unwrap()).unwrap()
    }

    fn chk(cond: ConditionId, a: &str, b: &str) -> bool {
        let f = fmt4();
        check(cond, fp(&f, a), fp(&f, b), &f, None).unwrap()
    }

    #[test]
    fn worked_examples() {
        use ConditionId::*;
        assert!(chk(TheoremFaith2, "16", "1/2"));
        assert!(chk(TheoremFaith1, "16", "1/2"));
        assert!(!chk(PriorJeannerod, "16", "1/2"));
        assert!(!chk(TheoremFaith2, "16", "1/16"));
        assert!(chk(TheoremRto1, "18", "-1/16"));
        assert!(!chk(TheoremFaith2, "18", "-1/16"));
        assert!(chk(TheoremFaith1, "15", "1/16"));
    }

    #[test]
    fn linnainmaa_h_example() {
        let f = fmt4();
        let (a, b) = (fp(&f, "15"), fp(&f, "1/16"));
        let x = round(&(f.value(a).unwrap() + f.value(b).unwrap()), RoundingMode::Ru, &f);
        assert_eq!(f.value(x).unwrap().to_string(), "16");
        let detail = check_detailed(ConditionId::PriorLinnainmaaH, a, b, &f, Some(x)).unwrap();
        assert!(!detail.holds);
        assert!(matches!(
            check(ConditionId::PriorLinnainmaaH, a, b, &f, None),
            Err(Error::MissingExtra(_))
        ));
    }

    #[test]
    fn zero_rule() {
        let f = fmt4();
        let z = f.zero();
        let one = fp(&f, "1");
        for cond in ConditionId::ALL {
            let extra = cond.is_post_hoc().then_some(one);
            let holds = check(cond, one, z, &f, extra).unwrap();
            assert_eq!(holds, cond != ConditionId::LemmaRto1, "{cond}");
            assert_eq!(check(cond, z, one, &f, extra).unwrap(), cond != ConditionId::LemmaRto1);
        }
    }

    #[test]
    fn extract_scalar_shape() {
        let f = fmt4();
        let sigma = fp(&f, "9/8");
        assert!(check(ConditionId::TheoremExtractScalar, sigma, fp(&f, "1"), &f, None).unwrap());
        assert!(!check(ConditionId::TheoremExtractScalar, sigma, fp(&f, "9/8"), &f, None).unwrap());
        assert!(!check(ConditionId::TheoremExtractScalar, fp(&f, "1"), fp(&f, "1/2"), &f, None).unwrap());
        assert!(!check(ConditionId::TheoremExtractScalar, fp(&f, "-9/8"), fp(&f, "1/2"), &f, None).unwrap());
        // Subnormal anchors: σ = 2^k + ω. 2^k = ω is too small, 2^k = 2ω is fine.
        let omega = f.min_positive();
        let two_omega = fp(&f, "1/4096");
        let three_omega = fp(&f, "3/8192");
        assert!(check(ConditionId::TheoremExtractScalar, three_omega, omega, &f, None).unwrap());
        let twice = fp(&f, "2/8192");
        assert!(!check(ConditionId::TheoremExtractScalar, twice, omega, &f, None).unwrap());
        assert_eq!(two_omega, twice);
    }

    #[test]
    fn gap_bounds() {
        let f = fmt4();
        assert_eq!(exponent_gap_bound(ConditionId::TheoremFaith1, &f).unwrap(), 7);
        assert_eq!(exponent_gap_bound(ConditionId::PriorBoldo, &f).unwrap(), 3);
        assert_eq!(exponent_gap_bound(ConditionId::LemmaFaith2, &f).unwrap(), 4);
        assert_eq!(exponent_gap_bound(ConditionId::PriorJeannerod, &f).unwrap(), 4);
        assert!(exponent_gap_bound(ConditionId::LemmaRto3, &f).is_err());
    }

    #[test]
    fn names_roundtrip() {
        for cond in ConditionId::ALL {
            assert_eq!(cond.name().parse::<ConditionId>().unwrap(), cond);
            let json = serde_json::to_string(&cond).unwrap();
            assert_eq!(json, format!("\"{}\"", cond.name()));
        }
        assert!("theorem_faith3".parse::<ConditionId>().is_err());
    }
}
