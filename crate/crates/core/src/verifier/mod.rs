//! Exhaustive sweeps over operand spaces of a small format.
//!
//! A sweep enumerates operand units (ordered pairs of finite floats, or
//! single inputs for split and double-rounding sweeps), evaluates every
//! mode configuration on each, and checks that the condition implies the
//! guarantee. Units are processed in disjoint chunks and merged.

mod report;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{extract_scalar, fast_two_sum, rounding_error, ModeTriple};
use crate::conditions::{check, ConditionId, Guarantee};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::format::{ulp, FormatConfig, Fp};
use crate::rounding::{check_double_rounding_formats, double_round_ro, round, RoundingMode};

pub use report::{
    emit_report, parse_report, ControlSummary, ReportFormat, SweepReport, Violation,
    ViolationDetail, SCHEMA_VERSION, write_csv,
};

pub const PAIR_BUDGET_ENV: &str = "EFTLAB_PAIR_BUDGET";
pub const DEFAULT_PAIR_BUDGET: u64 = 1_000_000_000;
pub const DEFAULT_MAX_VIOLATIONS: usize = 100;

/// The pair budget from `EFTLAB_PAIR_BUDGET`, or the default.
pub fn pair_budget_from_env() -> Result<u64> {
    match std::env::var(PAIR_BUDGET_ENV) {
        Ok(v) => parse_budget(&v),
        Err(_) => Ok(DEFAULT_PAIR_BUDGET),
    }
}

/// Accepts plain integers and `1e9`-style literals.
pub fn parse_budget(s: &str) -> Result<u64> {
    let s = s.trim();
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let bad = || Error::Format(format!("invalid pair budget `{s}`"));
    let (mant, exp) = s.split_once(['e', 'E']).ok_or_else(bad)?;
    let mant: u64 = mant.parse().map_err(|_| bad())?;
    let exp: u32 = exp.parse().map_err(|_| bad())?;
    10u64
        .checked_pow(exp)
        .and_then(|p| p.checked_mul(mant))
        .ok_or_else(bad)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "delta-in-f")]
    DeltaInF,
    #[serde(rename = "fts-eft")]
    FtsEft,
    #[serde(rename = "split-eft")]
    SplitEft,
    #[serde(rename = "double-round")]
    DoubleRound,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::DeltaInF => "delta-in-f",
            Target::FtsEft => "fts-eft",
            Target::SplitEft => "split-eft",
            Target::DoubleRound => "double-round",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "delta-in-f" | "delta" => Ok(Target::DeltaInF),
            "fts-eft" | "fts" => Ok(Target::FtsEft),
            "split-eft" | "split" => Ok(Target::SplitEft),
            "double-round" => Ok(Target::DoubleRound),
            _ => Err(Error::Format(format!("unknown target `{s}`"))),
        }
    }
}

/// Restricts the pairs of a delta or fts sweep by the size of the exact sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairFilter {
    AbsSumLeOmega,
    AbsSumGtOmega,
}

impl PairFilter {
    pub fn name(self) -> &'static str {
        match self {
            PairFilter::AbsSumLeOmega => "abs_sum_le_omega",
            PairFilter::AbsSumGtOmega => "abs_sum_gt_omega",
        }
    }

    fn admits(self, sum: &Dyadic, omega: &Dyadic) -> bool {
        let le = sum.abs() <= *omega;
        match self {
            PairFilter::AbsSumLeOmega => le,
            PairFilter::AbsSumGtOmega => !le,
        }
    }
}

impl FromStr for PairFilter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs_sum_le_omega" => Ok(PairFilter::AbsSumLeOmega),
            "abs_sum_gt_omega" => Ok(PairFilter::AbsSumGtOmega),
            _ => Err(Error::Format(format!("unknown pair filter `{s}`"))),
        }
    }
}

/// Mode configurations evaluated on every unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSet {
    Modes(Vec<RoundingMode>),
    Triples(Vec<ModeTriple>),
}

impl ModeSet {
    pub fn len(&self) -> usize {
        match self {
            ModeSet::Modes(m) => m.len(),
            ModeSet::Triples(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Comma-separated mode names, e.g. `rd,ru,ro`, or `all`.
    pub fn parse_modes(s: &str) -> Result<ModeSet> {
        let s = s.trim();
        if s == "all" {
            return Ok(ModeSet::Modes(RoundingMode::ALL.to_vec()));
        }
        let mut out = Vec::new();
        for part in s.split(',') {
            let m: RoundingMode = part.trim().parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Ok(ModeSet::Modes(out))
    }

    /// Semicolon-separated triple patterns. Each item is `uniform`, `mixed`,
    /// `adversarial`, or three comma-separated modes where `*` stands for
    /// all six. Duplicates are dropped, first occurrence wins.
    pub fn parse_triples(s: &str) -> Result<ModeSet> {
        let mut out: Vec<ModeTriple> = Vec::new();
        for item in s.split(';').map(str::trim).filter(|i| !i.is_empty()) {
            let batch = match item {
                "uniform" => ModeTriple::all_uniform(),
                "mixed" => ModeTriple::all_mixed(),
                "adversarial" => ModeTriple::adversarial(None),
                pattern => expand_pattern(pattern)?,
            };
            for t in batch {
                if !out.contains(&t) {
                    out.push(t);
                }
            }
        }
        Ok(ModeSet::Triples(out))
    }
}

fn expand_pattern(pattern: &str) -> Result<Vec<ModeTriple>> {
    let parts: Vec<&str> = pattern.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::UnknownMode(pattern.to_string()));
    }
    let slot = |p: &str| -> Result<Vec<RoundingMode>> {
        if p == "*" {
            Ok(RoundingMode::ALL.to_vec())
        } else {
            Ok(vec![p.parse()?])
        }
    };
    let (s1, s2, s3) = (slot(parts[0])?, slot(parts[1])?, slot(parts[2])?);
    let mut out = Vec::new();
    for &o1 in &s1 {
        for &o2 in &s2 {
            for &o3 in &s3 {
                out.push(ModeTriple::new(o1, o2, o3));
            }
        }
    }
    Ok(out)
}

/// Inputs `m·2^q` with `|m| < 2^mantissa_bits` and `q_min ≤ q ≤ q_max`,
/// rounded through `wide` into the sweep format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoubleRoundGrid {
    pub wide: FormatConfig,
    pub mantissa_bits: u32,
    pub q_min: i64,
    pub q_max: i64,
}

impl DoubleRoundGrid {
    fn span(&self) -> u64 {
        (1u64 << (self.mantissa_bits + 1)) - 1
    }

    fn units(&self) -> u64 {
        self.span() * (self.q_max - self.q_min + 1) as u64
    }

    fn point(&self, i: u64) -> Dyadic {
        let span = self.span();
        let q = self.q_min + (i / span) as i64;
        let m = (i % span) as i64 - ((1i64 << self.mantissa_bits) - 1);
        Dyadic::new(m, q)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub fmt: FormatConfig,
    pub target: Target,
    /// `None` checks the guarantee unconditionally.
    pub condition: Option<ConditionId>,
    pub modes: ModeSet,
    pub filter: Option<PairFilter>,
    /// Anchor exponent of a split sweep.
    pub k: Option<i32>,
    pub double_round: Option<DoubleRoundGrid>,
    pub max_violations: usize,
    pub pair_budget: u64,
}

impl SweepSpec {
    /// A spec with the default cap and budget and no filter. Delta sweeps
    /// default to the condition's modes, fts and split sweeps to the
    /// condition's first modes crossed with all six.
    pub fn new(fmt: FormatConfig, target: Target, condition: Option<ConditionId>) -> SweepSpec {
        let first: &[RoundingMode] = match condition {
            Some(c) => c.first_modes(),
            None if target == Target::SplitEft => &[RoundingMode::Ro],
            None => &RoundingMode::ALL,
        };
        let modes = match target {
            Target::DeltaInF => ModeSet::Modes(first.to_vec()),
            Target::FtsEft | Target::SplitEft => ModeSet::Triples(ModeTriple::with_first(first)),
            Target::DoubleRound => ModeSet::Modes(vec![RoundingMode::Rne]),
        };
        SweepSpec {
            fmt,
            target,
            condition,
            modes,
            filter: None,
            k: None,
            double_round: None,
            max_violations: DEFAULT_MAX_VIOLATIONS,
            pair_budget: DEFAULT_PAIR_BUDGET,
        }
    }

    pub fn with_modes(mut self, modes: ModeSet) -> Self {
        self.modes = modes;
        self
    }

    pub fn with_filter(mut self, filter: PairFilter) -> Self {
        self.filter = Some(filter);
        self
    }

    pub fn with_k(mut self, k: i32) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_max_violations(mut self, cap: usize) -> Self {
        self.max_violations = cap;
        self
    }

    pub fn with_pair_budget(mut self, budget: u64) -> Self {
        self.pair_budget = budget;
        self
    }

    /// A double-rounding sweep into `narrow` through `wide`.
    pub fn double_round(narrow: FormatConfig, grid: DoubleRoundGrid) -> SweepSpec {
        let mut spec = SweepSpec::new(narrow, Target::DoubleRound, None);
        spec.double_round = Some(grid);
        spec
    }
}

enum Configs {
    Modes(Vec<RoundingMode>),
    Triples(Vec<ModeTriple>),
}

/// A validated sweep with the operand space materialised.
pub struct Sweeper {
    spec: SweepSpec,
    elems: Vec<Fp>,
    values: Vec<Dyadic>,
    omega: Dyadic,
    configs: Configs,
    split: Option<SplitAnchors>,
    units: u64,
}

struct SplitAnchors {
    sigma: Fp,
    control: Fp,
    bound: Dyadic,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

impl Sweeper {
    pub fn new(spec: SweepSpec) -> Result<Sweeper> {
        let fmt = spec.fmt;
        if spec.modes.is_empty() && spec.target != Target::DoubleRound {
            return Err(config_error("empty mode set"));
        }
        if let Some(c) = spec.condition {
            let ok = match spec.target {
                Target::DeltaInF => matches!(c.guarantee(), Guarantee::DeltaInF | Guarantee::Eft),
                Target::FtsEft => c.guarantee() == Guarantee::Eft,
                Target::SplitEft => c.guarantee() == Guarantee::SplitEft,
                Target::DoubleRound => false,
            };
            if !ok {
                return Err(config_error(format!(
                    "condition {} does not apply to target {}",
                    c.name(),
                    spec.target
                )));
            }
        }
        if spec.filter.is_some() && !matches!(spec.target, Target::DeltaInF | Target::FtsEft) {
            return Err(config_error("pair filters apply to delta and fts sweeps only"));
        }
        let scope = spec.condition.map(ConditionId::first_modes);
        let configs = match (&spec.modes, spec.target) {
            (ModeSet::Modes(m), Target::DeltaInF) => {
                if let (Some(scope), Some(c)) = (scope, spec.condition) {
                    if let Some(bad) = m.iter().find(|m| !scope.contains(m)) {
                        return Err(config_error(format!(
                            "mode {bad} is outside the scope of {}",
                            c.name()
                        )));
                    }
                }
                Configs::Modes(m.clone())
            }
            (ModeSet::Triples(t), Target::FtsEft | Target::SplitEft) => {
                if let (Some(scope), Some(c)) = (scope, spec.condition) {
                    if let Some(bad) = t.iter().find(|t| !scope.contains(&t.o1)) {
                        return Err(config_error(format!(
                            "first mode of {bad} is outside the scope of {}",
                            c.name()
                        )));
                    }
                }
                Configs::Triples(t.clone())
            }
            (_, Target::DoubleRound) => Configs::Modes(vec![RoundingMode::Rne]),
            (_, target) => {
                return Err(config_error(format!(
                    "target {target} needs {}",
                    if target == Target::DeltaInF { "single modes" } else { "mode triples" }
                )))
            }
        };

        let mut split = None;
        let units: u128 = match spec.target {
            Target::DeltaInF | Target::FtsEft => fmt.count() * fmt.count(),
            Target::SplitEft => {
                let k = spec.k.ok_or_else(|| config_error("split sweep needs k"))?;
                let anchor = Dyadic::pow2(k as i64);
                let sigma = &anchor + &ulp(&anchor, &fmt);
                let lo = fmt.emin() as i64 - fmt.p() as i64 + 1;
                if (k as i64) < lo || k > fmt.emax() {
                    return Err(config_error(format!(
                        "k = {k} out of range [{lo}, {}] for format {fmt}",
                        fmt.emax()
                    )));
                }
                split = Some(SplitAnchors {
                    sigma: fmt.to_fp(&sigma)?,
                    control: fmt.to_fp(&anchor)?,
                    bound: anchor,
                });
                fmt.count()
            }
            Target::DoubleRound => {
                let grid = spec
                    .double_round
                    .as_ref()
                    .ok_or_else(|| config_error("double-round sweep needs a grid"))?;
                check_double_rounding_formats(&grid.wide, &fmt)?;
                if grid.mantissa_bits == 0 || grid.mantissa_bits > 40 || grid.q_min > grid.q_max {
                    return Err(config_error("invalid double-round grid"));
                }
                grid.units() as u128
            }
        };
        if units > spec.pair_budget as u128 {
            return Err(Error::BudgetExceeded {
                pairs: units,
                budget: spec.pair_budget as u128,
            });
        }
        let (elems, values) = if spec.target == Target::DoubleRound {
            (Vec::new(), Vec::new())
        } else {
            let elems: Vec<Fp> = fmt.enumerate().filter(Fp::is_finite).collect();
            let values = elems.iter().map(|&x| fmt.value(x).expect("finite")).collect();
            (elems, values)
        };
        Ok(Sweeper {
            omega: fmt.omega(),
            spec,
            elems,
            values,
            configs,
            split,
            units: units as u64,
        })
    }

    pub fn spec(&self) -> &SweepSpec {
        &self.spec
    }

    /// Number of operand units before filtering.
    pub fn units(&self) -> u64 {
        self.units
    }

    /// Runs the whole sweep on the current rayon pool.
    pub fn run(&self) -> Result<SweepReport> {
        let chunks = (rayon::current_num_threads() as u64 * 8).max(16);
        self.run_chunked(chunks)
    }

    /// Runs the sweep split into `chunks` ranges processed in parallel.
    pub fn run_chunked(&self, chunks: u64) -> Result<SweepReport> {
        let start = Instant::now();
        let ranges = partition(self.units, chunks);
        let parts: Vec<SweepReport> = ranges
            .into_par_iter()
            .map(|r| self.run_range(r))
            .collect::<Result<_>>()?;
        let mut report = parts
            .into_iter()
            .reduce(SweepReport::merge)
            .unwrap_or_else(|| self.empty_report());
        report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
        Ok(report)
    }

    /// Runs `jobs` worker threads, or the global pool when `None`.
    pub fn run_with_jobs(&self, jobs: Option<usize>) -> Result<SweepReport> {
        match jobs {
            None => self.run(),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| config_error(format!("thread pool: {e}")))?;
                pool.install(|| self.run())
            }
        }
    }

    fn empty_report(&self) -> SweepReport {
        let mut r = SweepReport::empty(self.spec.clone());
        if let Some(split) = &self.split {
            r.control = Some(ControlSummary {
                sigma: self.spec.fmt.value(split.control).expect("finite"),
                cases: 0,
                failures: 0,
                failures_sample: Vec::new(),
            });
        }
        r
    }

    /// Sequential sweep of the units in `range`.
    pub fn run_range(&self, range: Range<u64>) -> Result<SweepReport> {
        let mut rep = self.empty_report();
        let end = range.end.min(self.units);
        for i in range.start..end {
            match self.spec.target {
                Target::DeltaInF => self.delta_unit(i, &mut rep)?,
                Target::FtsEft => self.fts_unit(i, &mut rep)?,
                Target::SplitEft => self.split_unit(i, &mut rep)?,
                Target::DoubleRound => self.double_round_unit(i, &mut rep)?,
            }
        }
        Ok(rep)
    }

    fn pair(&self, i: u64) -> (usize, usize) {
        let n = self.elems.len() as u64;
        ((i / n) as usize, (i % n) as usize)
    }

    /// Filter and operand-only condition for a pair; `None` if filtered out.
    fn pair_prelude(&self, i: u64) -> Result<Option<(Fp, Fp, Option<bool>)>> {
        let (ia, ib) = self.pair(i);
        let (a, b) = (self.elems[ia], self.elems[ib]);
        if let Some(filter) = self.spec.filter {
            let sum = &self.values[ia] + &self.values[ib];
            if !filter.admits(&sum, &self.omega) {
                return Ok(None);
            }
        }
        let cond = match self.spec.condition {
            None => Some(true),
            Some(c) if c.is_post_hoc() => None,
            Some(c) => Some(check(c, a, b, &self.spec.fmt, None)?),
        };
        Ok(Some((a, b, cond)))
    }

    fn record(
        &self,
        rep: &mut SweepReport,
        cond: bool,
        guarantee: bool,
        violation: impl FnOnce() -> Violation,
    ) {
        rep.cases_total += 1;
        if cond {
            rep.cases_condition_true += 1;
            if !guarantee {
                rep.violations_total += 1;
                if rep.violations.len() < self.spec.max_violations {
                    rep.violations.push(violation());
                }
            }
        } else if guarantee {
            rep.guarantee_holds_outside_condition += 1;
        }
    }

    fn delta_unit(&self, i: u64, rep: &mut SweepReport) -> Result<()> {
        let Some((a, b, pre)) = self.pair_prelude(i)? else {
            return Ok(());
        };
        let Configs::Modes(modes) = &self.configs else {
            unreachable!()
        };
        let fmt = &self.spec.fmt;
        rep.pairs_total += 1;
        let mut all = true;
        for (ci, &mode) in modes.iter().enumerate() {
            let re = rounding_error(a, b, mode, fmt);
            if !re.x.is_finite() {
                rep.overflow_cases += 1;
            }
            let cond = match pre {
                Some(c) => c,
                None => {
                    let c = self.spec.condition.expect("post-hoc condition");
                    check(c, a, b, fmt, Some(re.x))?
                }
            };
            all &= cond;
            self.record(rep, cond, re.in_f, || Violation {
                index: i,
                config: ci as u32,
                detail: ViolationDetail::Delta {
                    a: fmt.value(a).expect("finite"),
                    b: fmt.value(b).expect("finite"),
                    mode,
                    x: fmt.ext_value(re.x),
                    delta: re.delta.clone(),
                },
            });
        }
        if all {
            rep.pairs_condition_true += 1;
        }
        Ok(())
    }

    fn fts_unit(&self, i: u64, rep: &mut SweepReport) -> Result<()> {
        let Some((a, b, pre)) = self.pair_prelude(i)? else {
            return Ok(());
        };
        let Configs::Triples(triples) = &self.configs else {
            unreachable!()
        };
        let fmt = &self.spec.fmt;
        let cond = pre.expect("fts conditions depend on operands only");
        rep.pairs_total += 1;
        if cond {
            rep.pairs_condition_true += 1;
        }
        for (ci, &modes) in triples.iter().enumerate() {
            let t = fast_two_sum(a, b, modes, fmt);
            if t.overflow {
                rep.overflow_cases += 1;
            }
            self.record(rep, cond, t.eft, || Violation {
                index: i,
                config: ci as u32,
                detail: ViolationDetail::Fts {
                    a: fmt.value(a).expect("finite"),
                    b: fmt.value(b).expect("finite"),
                    modes,
                    x: fmt.ext_value(t.x),
                    z: fmt.ext_value(t.z),
                    y: fmt.ext_value(t.y),
                    delta: t.delta.clone(),
                    overflow: t.overflow,
                },
            });
        }
        Ok(())
    }

    fn split_unit(&self, i: u64, rep: &mut SweepReport) -> Result<()> {
        let split = self.split.as_ref().expect("split anchors");
        let x = self.elems[i as usize];
        if self.values[i as usize].abs() > split.bound {
            return Ok(());
        }
        let Configs::Triples(triples) = &self.configs else {
            unreachable!()
        };
        let fmt = &self.spec.fmt;
        let cond = match self.spec.condition {
            None => true,
            Some(c) => check(c, split.sigma, x, fmt, None)?,
        };
        rep.pairs_total += 1;
        if cond {
            rep.pairs_condition_true += 1;
        }
        let split_violation = |ci: usize, t: &crate::algorithms::SplitTrace| Violation {
            index: i,
            config: ci as u32,
            detail: ViolationDetail::Split {
                sigma: fmt.value(t.sigma).expect("finite"),
                x: fmt.value(t.x).expect("finite"),
                modes: t.modes,
                s: fmt.ext_value(t.s),
                x_h: fmt.ext_value(t.x_h),
                x_l: fmt.ext_value(t.x_l),
                grid_ok: t.grid_ok,
                exact_split: t.exact_split,
            },
        };
        for (ci, &modes) in triples.iter().enumerate() {
            let t = extract_scalar(split.sigma, x, modes, fmt);
            if t.overflow {
                rep.overflow_cases += 1;
            }
            self.record(rep, cond, t.grid_ok && t.exact_split, || split_violation(ci, &t));

            let c = extract_scalar(split.control, x, modes, fmt);
            let control = rep.control.as_mut().expect("control summary");
            control.cases += 1;
            if !(c.grid_ok && c.exact_split) {
                control.failures += 1;
                if control.failures_sample.len() < self.spec.max_violations {
                    control.failures_sample.push(split_violation(ci, &c));
                }
            }
        }
        Ok(())
    }

    fn double_round_unit(&self, i: u64, rep: &mut SweepReport) -> Result<()> {
        let grid = self.spec.double_round.as_ref().expect("grid");
        let fmt = &self.spec.fmt;
        let r = grid.point(i);
        let direct = round(&r, RoundingMode::Rne, fmt);
        let doubled = double_round_ro(&r, &grid.wide, fmt)?;
        rep.pairs_total += 1;
        rep.pairs_condition_true += 1;
        if !direct.is_finite() {
            rep.overflow_cases += 1;
        }
        self.record(rep, true, direct == doubled, || Violation {
            index: i,
            config: 0,
            detail: ViolationDetail::DoubleRound {
                r: r.clone(),
                direct: fmt.ext_value(direct),
                doubled: fmt.ext_value(doubled),
            },
        });
        Ok(())
    }
}

/// Splits `0..n` into at most `chunks` contiguous non-empty ranges.
pub fn partition(n: u64, chunks: u64) -> Vec<Range<u64>> {
    let chunks = chunks.clamp(1, n.max(1));
    let size = n.div_ceil(chunks).max(1);
    (0..n).step_by(size as usize).map(|s| s..(s + size).min(n)).collect()
}

/// Runs any sweep on the global pool.
pub fn sweep(spec: SweepSpec) -> Result<SweepReport> {
    Sweeper::new(spec)?.run()
}

fn expect_target(spec: &SweepSpec, target: Target) -> Result<()> {
    if spec.target != target {
        return Err(config_error(format!(
            "expected target {target}, got {}",
            spec.target
        )));
    }
    Ok(())
}

pub fn sweep_delta(spec: SweepSpec) -> Result<SweepReport> {
    expect_target(&spec, Target::DeltaInF)?;
    sweep(spec)
}

pub fn sweep_fts(spec: SweepSpec) -> Result<SweepReport> {
    expect_target(&spec, Target::FtsEft)?;
    sweep(spec)
}

pub fn sweep_split(spec: SweepSpec, k: i32) -> Result<SweepReport> {
    expect_target(&spec, Target::SplitEft)?;
    sweep(spec.with_k(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use RoundingMode::*;

    fn f3() -> FormatConfig {
        FormatConfig::new(3, -6, 6).unwrap()
    }

    fn f4() -> FormatConfig {
        FormatConfig::new(4, -10, 10).unwrap()
    }

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn budget_literals() {
        assert_eq!(parse_budget("1e9").unwrap(), 1_000_000_000);
        assert_eq!(parse_budget("12345").unwrap(), 12345);
        assert!(parse_budget("lots").is_err());
        assert!(parse_budget("1e30").is_err());
    }

    #[test]
    fn triple_patterns() {
        let ModeSet::Triples(t) = ModeSet::parse_triples("ro,*,*").unwrap() else {
            panic!()
        };
        assert_eq!(t.len(), 36);
        assert!(t.iter().all(|t| t.o1 == Ro));
        let ModeSet::Triples(t) = ModeSet::parse_triples("uniform;mixed;adversarial").unwrap() else {
            panic!()
        };
        assert_eq!(t.len(), 216);
        let ModeSet::Triples(t) = ModeSet::parse_triples("rz,rz,rz").unwrap() else {
            panic!()
        };
        assert_eq!(t, vec![ModeTriple::uniform(Rz)]);
        assert!(ModeSet::parse_triples("ro,*").is_err());
        assert_eq!(
            ModeSet::parse_modes("rd, ru,rd").unwrap(),
            ModeSet::Modes(vec![Rd, Ru])
        );
    }

    #[test]
    fn partition_covers_range() {
        for n in [0u64, 1, 7, 100, 12321] {
            for c in [1u64, 3, 16, 1000] {
                let parts = partition(n, c);
                let total: u64 = parts.iter().map(|r| r.end - r.start).sum();
                assert_eq!(total, n);
                assert!(parts.windows(2).all(|w| w[0].end == w[1].start));
            }
        }
    }

    #[test]
    fn budget_guard_refuses() {
        let spec = SweepSpec::new(f3(), Target::FtsEft, None).with_pair_budget(100);
        assert!(matches!(
            Sweeper::new(spec),
            Err(Error::BudgetExceeded { budget: 100, .. })
        ));
    }

    #[test]
    fn rejects_mismatched_configuration() {
        let spec = SweepSpec::new(f3(), Target::FtsEft, Some(ConditionId::TheoremRto1))
            .with_modes(ModeSet::Triples(vec![ModeTriple::uniform(Rz)]));
        assert!(Sweeper::new(spec).is_err());
        let spec = SweepSpec::new(f3(), Target::FtsEft, Some(ConditionId::TheoremFaith1));
        assert!(Sweeper::new(spec).is_err());
        let spec = SweepSpec::new(f3(), Target::DeltaInF, None)
            .with_modes(ModeSet::Triples(ModeTriple::all_uniform()));
        assert!(Sweeper::new(spec).is_err());
        let spec = SweepSpec::new(f4(), Target::SplitEft, None).with_k(11);
        assert!(Sweeper::new(spec).is_err());
        let spec = SweepSpec::new(f4(), Target::SplitEft, None);
        assert!(Sweeper::new(spec).is_err());
    }

    #[test]
    fn unconditional_ru_finds_known_delta_counterexample() {
        let spec = SweepSpec::new(f4(), Target::DeltaInF, None)
            .with_modes(ModeSet::Modes(vec![Ru]))
            .with_max_violations(usize::MAX);
        let rep = sweep_delta(spec).unwrap();
        assert!(rep.violations.iter().any(|v| matches!(
            &v.detail,
            ViolationDetail::Delta { a, b, .. } if *a == d("16") && *b == d("1/16")
        )));
        assert_eq!(rep.violations_total as usize, rep.violations.len());
    }

    #[test]
    fn unconditional_rz_finds_fts_counterexample() {
        let spec = SweepSpec::new(f4(), Target::FtsEft, None)
            .with_modes(ModeSet::Triples(vec![ModeTriple::uniform(Rz)]))
            .with_max_violations(usize::MAX);
        let rep = sweep_fts(spec).unwrap();
        assert!(rep.violations.iter().any(|v| matches!(
            &v.detail,
            ViolationDetail::Fts { a, b, .. } if *a == d("18") && *b == d("-1/16")
        )));
    }

    #[test]
    fn violations_capped_with_exact_total() {
        let spec = SweepSpec::new(f3(), Target::DeltaInF, None)
            .with_modes(ModeSet::Modes(vec![Ru]))
            .with_max_violations(5);
        let rep = sweep(spec).unwrap();
        assert_eq!(rep.violations.len(), 5);
        assert!(rep.violations_total > 5);
        let keys: Vec<_> = rep.violations.iter().map(|v| (v.index, v.config)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn filter_counts_only_admitted_pairs() {
        let f = f3();
        let all = sweep(SweepSpec::new(f, Target::DeltaInF, None).with_modes(ModeSet::Modes(vec![Ro])))
            .unwrap();
        let le = sweep(
            SweepSpec::new(f, Target::DeltaInF, None)
                .with_modes(ModeSet::Modes(vec![Ro]))
                .with_filter(PairFilter::AbsSumLeOmega),
        )
        .unwrap();
        let gt = sweep(
            SweepSpec::new(f, Target::DeltaInF, None)
                .with_modes(ModeSet::Modes(vec![Ro]))
                .with_filter(PairFilter::AbsSumGtOmega),
        )
        .unwrap();
        assert_eq!(all.pairs_total, le.pairs_total + gt.pairs_total);
        assert_eq!(all.pairs_total as u128, f.count() * f.count());
        assert!(gt.pairs_total > 0);
        assert_eq!(gt.overflow_cases, 0);
    }

    #[test]
    fn chunking_does_not_change_report() {
        let spec = SweepSpec::new(f3(), Target::FtsEft, None)
            .with_modes(ModeSet::Triples(ModeTriple::all_uniform()))
            .with_max_violations(7);
        let s = Sweeper::new(spec).unwrap();
        let one = s.run_range(0..s.units()).unwrap();
        for chunks in [2, 5, 64] {
            assert_eq!(s.run_chunked(chunks).unwrap().without_timing(), one);
        }
    }

    #[test]
    fn split_sweep_tracks_control() {
        let rep = sweep_split(SweepSpec::new(f4(), Target::SplitEft, Some(ConditionId::TheoremExtractScalar)), 0)
            .unwrap();
        assert_eq!(rep.violations_total, 0);
        assert_eq!(rep.cases_total, rep.pairs_total * 36);
        let control = rep.control.unwrap();
        assert_eq!(control.sigma, Dyadic::one());
        assert!(control.failures > 0);
    }
}
