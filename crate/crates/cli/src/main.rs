use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use eftlab_core::algorithms::{extract_scalar, fast_two_sum, rounding_error, ModeTriple};
use eftlab_core::conditions::{check_detailed, ConditionId};
use eftlab_core::dyadic::Dyadic;
use eftlab_core::format::{FormatConfig, Fp};
use eftlab_core::rounding::{is_faithful_result, round, round_down, round_up, RoundingMode};
use eftlab_core::verifier::{
    emit_report, pair_budget_from_env, parse_budget, write_csv, DoubleRoundGrid, ModeSet,
    PairFilter, ReportFormat, SweepSpec, Sweeper, Target,
};

/// Exact software floating point over small formats: rounding, FastTwoSum,
/// ExtractScalar, operand conditions and exhaustive sweeps.
#[derive(Parser)]
#[command(name = "eftlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FmtArg {
    /// Format as p,emin,emax
    #[arg(long = "fmt", default_value = "4,-10,10")]
    fmt: FormatConfig,
}

#[derive(Subcommand)]
enum Command {
    /// Round a dyadic literal under each mode.
    Round {
        #[arg(allow_hyphen_values = true)]
        value: Dyadic,
        #[command(flatten)]
        fmt: FmtArg,
        /// Comma-separated modes, or `all`
        #[arg(long, default_value = "all")]
        modes: String,
    },
    /// Run FastTwoSum on two floats.
    Fts {
        #[arg(allow_hyphen_values = true)]
        a: Dyadic,
        #[arg(allow_hyphen_values = true)]
        b: Dyadic,
        #[command(flatten)]
        fmt: FmtArg,
        /// Triple patterns separated by `;`, e.g. `ro,ro,ro;rz,*,*` or `uniform`
        #[arg(long, default_value = "uniform")]
        modes: String,
    },
    /// Run ExtractScalar on an anchor and a float.
    Extract {
        #[arg(allow_hyphen_values = true)]
        sigma: Dyadic,
        #[arg(allow_hyphen_values = true)]
        x: Dyadic,
        #[command(flatten)]
        fmt: FmtArg,
        #[arg(long, default_value = "ro,ro,ro")]
        modes: String,
    },
    /// Evaluate operand conditions on a pair.
    Check {
        #[arg(allow_hyphen_values = true)]
        a: Dyadic,
        #[arg(allow_hyphen_values = true)]
        b: Dyadic,
        #[command(flatten)]
        fmt: FmtArg,
        /// Condition name, or `all`
        #[arg(long, default_value = "all")]
        cond: String,
        /// Computed sum for conditions that need it
        #[arg(long, allow_hyphen_values = true)]
        extra: Option<Dyadic>,
        /// Mode used to compute the sum when `--extra` is absent
        #[arg(long)]
        modes: Option<RoundingMode>,
    },
    /// Exhaustively check a condition against its guarantee.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    fmt: FmtArg,
    /// delta-in-f, fts-eft, split-eft or double-round
    #[arg(long, default_value = "fts-eft")]
    target: Target,
    /// Condition name, or `none` to check the guarantee everywhere
    #[arg(long, default_value = "none")]
    cond: String,
    /// Modes (delta sweeps) or triple patterns (fts and split sweeps);
    /// defaults to the condition's scope
    #[arg(long)]
    modes: Option<String>,
    /// Add the adversarial faithful-rounding branches (RD/RU at every free step)
    #[arg(long)]
    adversarial_fr: bool,
    /// abs_sum_le_omega or abs_sum_gt_omega
    #[arg(long)]
    filter: Option<PairFilter>,
    /// Anchor exponent for split sweeps
    #[arg(long, allow_hyphen_values = true)]
    k: Option<i32>,
    /// Wide format for double-round sweeps
    #[arg(long, default_value = "8,-30,30")]
    wide: FormatConfig,
    /// Double-round inputs m*2^q use |m| < 2^grid-bits
    #[arg(long, default_value_t = 10)]
    grid_bits: u32,
    #[arg(long, default_value_t = -20, allow_hyphen_values = true)]
    q_min: i64,
    #[arg(long, default_value_t = 6, allow_hyphen_values = true)]
    q_max: i64,
    /// Report path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: ReportFormat,
    #[arg(long, default_value_t = 100)]
    max_violations: usize,
    /// Worker threads
    #[arg(long)]
    jobs: Option<usize>,
    /// Raise the pair budget (default 1e9, or EFTLAB_PAIR_BUDGET)
    #[arg(long)]
    pair_budget: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let kind = match c.downcast_ref::<io::Error>() {
            Some(io) => Some(io.kind()),
            None => c.downcast_ref::<serde_json::Error>().and_then(|j| j.io_error_kind()),
        };
        kind == Some(io::ErrorKind::BrokenPipe)
    })
}

fn print_json(v: &serde_json::Value) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn to_fp(fmt: &FormatConfig, v: &Dyadic) -> anyhow::Result<Fp> {
    Ok(fmt.to_fp(v)?)
}

fn triples(s: &str) -> anyhow::Result<Vec<ModeTriple>> {
    match ModeSet::parse_triples(s)? {
        ModeSet::Triples(t) if !t.is_empty() => Ok(t),
        _ => bail!("no mode triples in `{s}`"),
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Round { value, fmt, modes } => {
            let fmt = fmt.fmt;
            let ModeSet::Modes(modes) = ModeSet::parse_modes(&modes)? else {
                unreachable!()
            };
            let results: Vec<_> = modes
                .iter()
                .map(|&m| {
                    let x = round(&value, m, &fmt);
                    json!({
                        "mode": m,
                        "result": fmt.describe(x),
                        "faithful": is_faithful_result(&value, x, &fmt),
                    })
                })
                .collect();
            print_json(&json!({
                "format": fmt.id(),
                "value": value,
                "in_f": fmt.contains(&value),
                "rd": fmt.describe(round_down(&value, &fmt)),
                "ru": fmt.describe(round_up(&value, &fmt)),
                "results": results,
            }))?;
        }
        Command::Fts { a, b, fmt, modes } => {
            let fmt = fmt.fmt;
            let (fa, fb) = (to_fp(&fmt, &a)?, to_fp(&fmt, &b)?);
            let traces: Vec<_> = triples(&modes)?
                .into_iter()
                .map(|t| fast_two_sum(fa, fb, t, &fmt).to_json(&fmt))
                .collect();
            print_json(&json!(traces))?;
        }
        Command::Extract { sigma, x, fmt, modes } => {
            let fmt = fmt.fmt;
            let (fs, fx) = (to_fp(&fmt, &sigma)?, to_fp(&fmt, &x)?);
            let traces: Vec<_> = triples(&modes)?
                .into_iter()
                .map(|t| extract_scalar(fs, fx, t, &fmt).to_json(&fmt))
                .collect();
            print_json(&json!(traces))?;
        }
        Command::Check { a, b, fmt, cond, extra, modes } => {
            let fmt = fmt.fmt;
            let (fa, fb) = (to_fp(&fmt, &a)?, to_fp(&fmt, &b)?);
            let extra = match (extra, modes) {
                (Some(x), _) => Some(to_fp(&fmt, &x)?),
                (None, Some(m)) => Some(rounding_error(fa, fb, m, &fmt).x),
                (None, None) => None,
            };
            let conds: Vec<ConditionId> = if cond == "all" {
                ConditionId::ALL
                    .into_iter()
                    .filter(|c| !c.is_post_hoc() || extra.is_some())
                    .collect()
            } else {
                vec![cond.parse()?]
            };
            let mut out = Vec::new();
            for c in conds {
                out.push(serde_json::to_value(check_detailed(c, fa, fb, &fmt, extra)?)?);
            }
            print_json(&json!(out))?;
        }
        Command::Sweep(args) => return sweep(args),
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: SweepArgs) -> anyhow::Result<ExitCode> {
    let fmt = args.fmt.fmt;
    let condition = match args.cond.as_str() {
        "none" => None,
        name => Some(name.parse::<ConditionId>()?),
    };
    let budget = match &args.pair_budget {
        Some(s) => parse_budget(s)?,
        None => pair_budget_from_env()?,
    };
    let mut spec = if args.target == Target::DoubleRound {
        if condition.is_some() {
            bail!("double-round sweeps take no condition");
        }
        SweepSpec::double_round(
            fmt,
            DoubleRoundGrid {
                wide: args.wide,
                mantissa_bits: args.grid_bits,
                q_min: args.q_min,
                q_max: args.q_max,
            },
        )
    } else {
        SweepSpec::new(fmt, args.target, condition)
    };
    spec = spec
        .with_max_violations(args.max_violations)
        .with_pair_budget(budget);
    if let Some(f) = args.filter {
        spec = spec.with_filter(f);
    }
    if let Some(k) = args.k {
        spec = spec.with_k(k);
    }

    let scope: &[RoundingMode] = match condition {
        Some(c) => c.first_modes(),
        None => &RoundingMode::ALL,
    };
    match args.target {
        Target::DeltaInF => {
            let mut modes = match &args.modes {
                Some(s) => match ModeSet::parse_modes(s)? {
                    ModeSet::Modes(m) => m,
                    ModeSet::Triples(_) => unreachable!(),
                },
                None if args.adversarial_fr => Vec::new(),
                None => scope.to_vec(),
            };
            if args.adversarial_fr {
                for m in [RoundingMode::Rd, RoundingMode::Ru] {
                    if !modes.contains(&m) {
                        modes.push(m);
                    }
                }
            }
            spec = spec.with_modes(ModeSet::Modes(modes));
        }
        Target::FtsEft | Target::SplitEft => {
            let default_first: &[RoundingMode] =
                if args.target == Target::SplitEft && condition.is_none() {
                    &[RoundingMode::Ro]
                } else {
                    scope
                };
            let mut set = match &args.modes {
                Some(s) => triples(s)?,
                None if args.adversarial_fr => Vec::new(),
                None => ModeTriple::with_first(default_first),
            };
            if args.adversarial_fr {
                let first = match default_first {
                    [only] => Some(*only),
                    _ => None,
                };
                for t in ModeTriple::adversarial(first) {
                    if !set.contains(&t) {
                        set.push(t);
                    }
                }
            }
            spec = spec.with_modes(ModeSet::Triples(set));
        }
        Target::DoubleRound => {}
    }

    let sweeper = Sweeper::new(spec)?;
    let report = sweeper.run_with_jobs(args.jobs)?;
    match &args.out {
        Some(path) => {
            emit_report(&report, args.format, path)?;
            eprintln!(
                "{} units, {} conditioned cases, {} violations; report written to {}",
                report.pairs_total,
                report.cases_condition_true,
                report.violations_total,
                path.display()
            );
        }
        None => match args.format {
            ReportFormat::Json => writeln!(io::stdout().lock(), "{}", report.to_json_string())?,
            ReportFormat::Csv => {
                write_csv(&report, io::stdout().lock()).context("writing CSV to stdout")?
            }
        },
    }
    Ok(if report.is_clean() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
