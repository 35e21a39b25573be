use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SweepSpec;
use crate::algorithms::ModeTriple;
use crate::dyadic::{Dyadic, ExtDyadic};
use crate::error::{Error, Result};
use crate::rounding::RoundingMode;

pub const SCHEMA_VERSION: u32 = 1;

/// A single case where the checked guarantee failed.
///
/// `index` is the operand unit in enumeration order and `config` the
/// position of the mode configuration in the sweep spec; together they fix the
/// order of violation lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub index: u64,
    pub config: u32,
    #[serde(flatten)]
    pub detail: ViolationDetail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ViolationDetail {
    Delta {
        a: Dyadic,
        b: Dyadic,
        mode: RoundingMode,
        x: ExtDyadic,
        delta: Option<Dyadic>,
    },
    Fts {
        a: Dyadic,
        b: Dyadic,
        modes: ModeTriple,
        x: ExtDyadic,
        z: ExtDyadic,
        y: ExtDyadic,
        delta: Option<Dyadic>,
        overflow: bool,
    },
    Split {
        sigma: Dyadic,
        x: Dyadic,
        modes: ModeTriple,
        s: ExtDyadic,
        x_h: ExtDyadic,
        x_l: ExtDyadic,
        grid_ok: bool,
        exact_split: bool,
    },
    DoubleRound {
        r: Dyadic,
        direct: ExtDyadic,
        doubled: ExtDyadic,
    },
}

impl Violation {
    fn key(&self) -> (u64, u32) {
        (self.index, self.config)
    }
}

/// Failures of ExtractScalar with the plain power-of-two anchor `σ = 2^k`,
/// run alongside a split sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlSummary {
    pub sigma: Dyadic,
    pub cases: u64,
    pub failures: u64,
    pub failures_sample: Vec<Violation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub spec: SweepSpec,
    /// Operand units (pairs, or single inputs for split and double-rounding
    /// sweeps) that passed the filter.
    pub pairs_total: u64,
    /// Units for which the condition held under every mode configuration.
    pub pairs_condition_true: u64,
    /// Unit × mode-configuration evaluations.
    pub cases_total: u64,
    pub cases_condition_true: u64,
    pub violations_total: u64,
    /// Cases where the guarantee held although the condition did not.
    pub guarantee_holds_outside_condition: u64,
    pub overflow_cases: u64,
    pub violations: Vec<Violation>,
    pub control: Option<ControlSummary>,
    /// Excluded from determinism comparisons.
    pub wall_time_ms: Option<u64>,
}

fn merge_capped(mut a: Vec<Violation>, b: Vec<Violation>, cap: usize) -> Vec<Violation> {
    a.extend(b);
    a.sort_by_key(Violation::key);
    a.truncate(cap);
    a
}

impl SweepReport {
    pub(crate) fn empty(spec: SweepSpec) -> Self {
        SweepReport {
            schema_version: SCHEMA_VERSION,
            spec,
            pairs_total: 0,
            pairs_condition_true: 0,
            cases_total: 0,
            cases_condition_true: 0,
            violations_total: 0,
            guarantee_holds_outside_condition: 0,
            overflow_cases: 0,
            violations: Vec::new(),
            control: None,
            wall_time_ms: None,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations_total == 0
    }

    /// Combines reports over disjoint operand ranges of the same spec.
    /// Associative and commutative; violation lists stay in enumeration
    /// order and keep the first `max_violations` entries.
    pub fn merge(self, other: SweepReport) -> SweepReport {
        let cap = self.spec.max_violations;
        let control = match (self.control, other.control) {
            (Some(a), Some(b)) => Some(ControlSummary {
                sigma: a.sigma,
                cases: a.cases + b.cases,
                failures: a.failures + b.failures,
                failures_sample: merge_capped(a.failures_sample, b.failures_sample, cap),
            }),
            (a, b) => a.or(b),
        };
        let wall_time_ms = match (self.wall_time_ms, other.wall_time_ms) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        SweepReport {
            schema_version: self.schema_version,
            spec: self.spec,
            pairs_total: self.pairs_total + other.pairs_total,
            pairs_condition_true: self.pairs_condition_true + other.pairs_condition_true,
            cases_total: self.cases_total + other.cases_total,
            cases_condition_true: self.cases_condition_true + other.cases_condition_true,
            violations_total: self.violations_total + other.violations_total,
            guarantee_holds_outside_condition: self.guarantee_holds_outside_condition
                + other.guarantee_holds_outside_condition,
            overflow_cases: self.overflow_cases + other.overflow_cases,
            violations: merge_capped(self.violations, other.violations, cap),
            control,
            wall_time_ms,
        }
    }

    /// The report with timing cleared, for equality checks.
    pub fn without_timing(mut self) -> SweepReport {
        self.wall_time_ms = None;
        self
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json_str(s: &str) -> serde_json::Result<SweepReport> {
        serde_json::from_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Format(format!("unknown report format `{other}`"))),
        }
    }
}

/// Flat CSV row; columns that do not apply to a violation kind stay empty.
#[derive(Serialize)]
struct CsvRow {
    kind: &'static str,
    index: u64,
    config: u32,
    modes: String,
    a: String,
    b: String,
    x: String,
    z: String,
    y: String,
    delta: String,
    sigma: String,
    s: String,
    x_h: String,
    x_l: String,
    r: String,
    direct: String,
    doubled: String,
    overflow: String,
    grid_ok: String,
    exact_split: String,
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl CsvRow {
    fn new(v: &Violation) -> CsvRow {
        let mut row = CsvRow {
            kind: "",
            index: v.index,
            config: v.config,
            modes: String::new(),
            a: String::new(),
            b: String::new(),
            x: String::new(),
            z: String::new(),
            y: String::new(),
            delta: String::new(),
            sigma: String::new(),
            s: String::new(),
            x_h: String::new(),
            x_l: String::new(),
            r: String::new(),
            direct: String::new(),
            doubled: String::new(),
            overflow: String::new(),
            grid_ok: String::new(),
            exact_split: String::new(),
        };
        match &v.detail {
            ViolationDetail::Delta { a, b, mode, x, delta } => {
                row.kind = "delta";
                row.modes = mode.to_string();
                row.a = a.to_string();
                row.b = b.to_string();
                row.x = x.to_string();
                row.delta = opt(delta);
            }
            ViolationDetail::Fts { a, b, modes, x, z, y, delta, overflow } => {
                row.kind = "fts";
                row.modes = modes.to_string();
                row.a = a.to_string();
                row.b = b.to_string();
                row.x = x.to_string();
                row.z = z.to_string();
                row.y = y.to_string();
                row.delta = opt(delta);
                row.overflow = overflow.to_string();
            }
            ViolationDetail::Split { sigma, x, modes, s, x_h, x_l, grid_ok, exact_split } => {
                row.kind = "split";
                row.modes = modes.to_string();
                row.sigma = sigma.to_string();
                row.x = x.to_string();
                row.s = s.to_string();
                row.x_h = x_h.to_string();
                row.x_l = x_l.to_string();
                row.grid_ok = grid_ok.to_string();
                row.exact_split = exact_split.to_string();
            }
            ViolationDetail::DoubleRound { r, direct, doubled } => {
                row.kind = "double-round";
                row.r = r.to_string();
                row.direct = direct.to_string();
                row.doubled = doubled.to_string();
            }
        }
        row
    }
}

/// Writes the report to `path`: the whole report as JSON, or one CSV row
/// per retained violation.
pub fn emit_report(report: &SweepReport, format: ReportFormat, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    match format {
        ReportFormat::Json => {
            let mut w = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, report).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
            w.write_all(b"\n").map_err(io)?;
            w.flush().map_err(io)
        }
        ReportFormat::Csv => write_csv(report, file).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        }),
    }
}

const CSV_HEADER: [&str; 20] = [
    "kind", "index", "config", "modes", "a", "b", "x", "z", "y", "delta", "sigma", "s", "x_h",
    "x_l", "r", "direct", "doubled", "overflow", "grid_ok", "exact_split",
];

/// One CSV row per retained violation; a header-only table when clean.
pub fn write_csv<W: Write>(report: &SweepReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if report.violations.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for v in &report.violations {
        w.serialize(CsvRow::new(v))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a JSON report written by [`emit_report`].
pub fn parse_report(path: &Path) -> Result<SweepReport> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    SweepReport::from_json_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
