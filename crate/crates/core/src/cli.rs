//! Command-line surface: load and validate system documents, run counts and
//! verifications, sweep parameters, generate instances, and emit human
//! tables plus machine-readable CSV and structured JSON.
//!
//! Exit codes: 0 on success, 1 when any verdict is violated (or an engine
//! mismatch is detected, or a validation gate fails), 2 on usage and parse
//! errors, 3 when an execution cap is exceeded.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::Num;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::bounds::{
    congruence_box_estimate, existence_general, mh_estimate, mh_existence, same_exponent_estimate,
    same_exponent_existence, verify, waring_gamma_bound, BoundReport, BoundsError,
    ExistenceVerdict, VerifyOptions, VerifyReport,
};
use crate::caps::Caps;
use crate::count::{
    count_bruteforce, count_convolution, count_solutions, CountError, NonzeroReport, Restriction,
};
use crate::dickson::{check_functional_identity, dickson_coeffs};
use crate::gf::build_field_with_caps;
use crate::model::wire::{parse_system_with_caps, serialize_system};
use crate::model::{
    generate_h_matrix, validate_system, BoundId, DiagonalSystem, LhsFamily, ModelError, Regime,
    RhsFamily, SparsePoly, ValidationReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

const CSV_HEADER: &str = "q,p,m,t,n,regime,count,main_term,bound_or_bound_sq,verdict,engine,elapsed_ms";

#[derive(Parser, Debug)]
#[command(
    name = "diagcount",
    about = "Exact counting and bound verification for diagonal systems over finite fields",
    disable_help_subcommand = true
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Seed for deterministic generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel counting (default: library default).
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    /// Cap on brute-force point evaluations (also env DIAGCOUNT_MAX_ENUM).
    #[arg(long, global = true)]
    max_enum: Option<u64>,
    /// Cap on enumerated column/zero-pattern subsets.
    #[arg(long, global = true)]
    max_subsets: Option<u64>,
    /// Cap on dense distribution entries held in memory.
    #[arg(long, global = true)]
    max_memory: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Structured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EngineChoice {
    Auto,
    Brute,
    Conv,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RhsKind {
    Constants,
    Polynomials,
    MarkoffHurwitz,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check structural and regime hypotheses of a system document.
    Validate { file: String },
    /// Count the solutions of a system document.
    Count {
        file: String,
        #[arg(long, value_enum, default_value_t = EngineChoice::Auto)]
        engine: EngineChoice,
        /// One of: all, nonzero, box:<m>.
        #[arg(long, default_value = "all")]
        restrict: String,
    },
    /// Evaluate every applicable bound against a supplied exact count.
    Bound {
        file: String,
        /// The exact count, in decimal. Interpreted as the nonzero count
        /// for Markoff–Hurwitz estimates and as the boxed count when
        /// --margin is given.
        #[arg(long)]
        count: String,
        /// Margins at which to evaluate the congruence box bound.
        #[arg(long = "margin")]
        margins: Vec<u64>,
    },
    /// Count and check every applicable bound end-to-end.
    Verify {
        file: String,
        /// Margins at which to evaluate the congruence box bound.
        #[arg(long = "margin")]
        margins: Vec<u64>,
    },
    /// Re-run verification across a list of field characteristics.
    Sweep {
        /// System document used as the template.
        #[arg(long)]
        template: String,
        /// Parameter to vary; only "q" is supported.
        #[arg(long)]
        vary: String,
        /// Comma-separated list of primes to substitute.
        #[arg(long)]
        set: String,
    },
    /// Waring-type threshold: least t solvable for every constant vector.
    Waring {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d1: u64,
        #[arg(long)]
        q: u64,
    },
    /// Generate a system document satisfying hypothesis (H).
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, value_enum, default_value_t = RhsKind::Constants)]
        rhs: RhsKind,
    },
    /// Dickson polynomial coefficients and functional-identity check.
    Dickson {
        #[arg(long)]
        d: u64,
        /// Parameter a, as an element code.
        #[arg(long)]
        a: u64,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
}

/// A command failure carrying its exit code and message.
enum Failure {
    Usage(String),
    Violated(String),
    Cap(String),
}

impl Failure {
    fn exit(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Violated(_) => EXIT_VIOLATED,
            Failure::Cap(_) => EXIT_CAP,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Violated(m) | Failure::Cap(m) => m,
        }
    }
}

impl From<crate::gf::FieldError> for Failure {
    fn from(e: crate::gf::FieldError) -> Failure {
        match e {
            crate::gf::FieldError::Cap(c) => Failure::Cap(c.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Failure {
        match e {
            ModelError::Cap(c) => Failure::Cap(c.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<CountError> for Failure {
    fn from(e: CountError) -> Failure {
        match e {
            CountError::Cap(c) => Failure::Cap(c.to_string()),
            CountError::EngineMismatch { .. } => Failure::Violated(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Failure {
        match e {
            BoundsError::Cap(c) => Failure::Cap(c.to_string()),
            BoundsError::Count(inner) => inner.into(),
            BoundsError::Model(inner) => inner.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

struct Output {
    text: String,
    exit: i32,
}

type CmdResult = Result<Output, Failure>;

/// Runs the CLI against explicit argument and output streams; returns the
/// process exit code. `args[0]` is the program name.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };

    let mut caps = Caps::from_env();
    if cli.max_enum == Some(0) || cli.max_subsets == Some(0) || cli.max_memory == Some(0) {
        let _ = writeln!(stderr, "error: caps must be positive");
        return EXIT_USAGE;
    }
    if let Some(v) = cli.max_enum {
        caps.bruteforce_evals = v;
    }
    if let Some(v) = cli.max_subsets {
        caps.subsets = v;
    }
    if let Some(v) = cli.max_memory {
        caps.distribution_size = v;
    }

    let result = match cli.parallelism {
        Some(0) => Err(Failure::Usage("parallelism must be positive".into())),
        Some(width) => match rayon::ThreadPoolBuilder::new().num_threads(width).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &caps)),
            Err(e) => Err(Failure::Usage(format!("cannot build thread pool: {e}"))),
        },
        None => dispatch(&cli, &caps),
    };

    match result {
        Ok(output) => {
            let _ = write!(stdout, "{}", output.text);
            output.exit
        }
        Err(failure) => {
            let _ = writeln!(stderr, "error: {}", failure.message());
            failure.exit()
        }
    }
}

fn dispatch(cli: &Cli, caps: &Caps) -> CmdResult {
    match &cli.command {
        Command::Validate { file } => cmd_validate(file, cli.format, caps),
        Command::Count { file, engine, restrict } => {
            cmd_count(file, *engine, restrict, cli.format, caps)
        }
        Command::Bound { file, count, margins } => {
            cmd_bound(file, count, margins, cli.format, caps)
        }
        Command::Verify { file, margins } => cmd_verify(file, margins, cli.format, caps),
        Command::Sweep { template, vary, set } => cmd_sweep(template, vary, set, cli.format, caps),
        Command::Waring { n, d1, q } => cmd_waring(*n, *d1, *q, cli.format),
        Command::Generate { n, t, p, m, rhs } => {
            cmd_generate(*n, *t, *p, *m, *rhs, cli.seed, caps)
        }
        Command::Dickson { d, a, p, m } => cmd_dickson(*d, *a, *p, *m, cli.format, caps),
    }
}

fn load_system(path: &str, caps: &Caps) -> Result<DiagonalSystem, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))?;
    Ok(parse_system_with_caps(&text, caps)?)
}

// ---------------------------------------------------------------------------
// JSON and table rendering helpers
// ---------------------------------------------------------------------------

pub fn validation_json(v: &ValidationReport) -> Value {
    json!({
        "regime": v.regime.label(),
        "hypothesis_h": v.hypothesis_h,
        "char_ok": v.char_ok,
        "shape_ok": v.shape_ok,
        "conditions": v.regime_conditions.iter()
            .map(|(name, ok)| json!({"name": name, "ok": ok}))
            .collect::<Vec<_>>(),
        "applicable_bounds": v.applicable_bounds.iter().map(|b| b.label()).collect::<Vec<_>>(),
        "pass": v.all_gates_pass(),
    })
}

pub fn bound_json(b: &BoundReport) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("regime".into(), json!(b.bound.label()));
    obj.insert("main_term".into(), json!(b.main_term.to_string()));
    if let Some(sq) = &b.error_bound_sq {
        obj.insert("error_bound_sq".into(), json!(sq.to_string()));
    }
    if let Some(e) = &b.error_bound {
        obj.insert("error_bound".into(), json!(e.to_string()));
    }
    if let Some(margin) = b.inputs.margin {
        obj.insert("margin".into(), json!(margin));
    }
    obj.insert("count".into(), json!(b.count.to_string()));
    obj.insert("verdict".into(), json!(b.verdict.label()));
    Value::Object(obj)
}

pub fn existence_json(e: &ExistenceVerdict) -> Value {
    json!({
        "regime": e.bound.label(),
        "threshold_holds": e.threshold_holds,
        "witness_inequality": e.witness_inequality,
        "simplified_q_threshold": e.simplified_q_threshold.to_string(),
        "q_exceeds_simplified": e.q_exceeds_simplified,
    })
}

fn validation_table(out: &mut String, v: &ValidationReport) {
    let _ = writeln!(out, "regime: {}", v.regime.label());
    let _ = writeln!(out, "hypothesis (H): {}", v.hypothesis_h);
    let _ = writeln!(out, "characteristic ok: {}", v.char_ok);
    let _ = writeln!(out, "shape ok: {}", v.shape_ok);
    for (name, ok) in &v.regime_conditions {
        let _ = writeln!(out, "condition {name}: {ok}");
    }
    let labels: Vec<&str> = v.applicable_bounds.iter().map(|b| b.label()).collect();
    let _ = writeln!(out, "applicable bounds: {}", labels.join(", "));
}

fn bound_table(out: &mut String, b: &BoundReport) {
    let mut line = format!("bound {}: main {}", b.bound.label(), b.main_term);
    if let Some(sq) = &b.error_bound_sq {
        let _ = write!(line, ", error_sq {sq}");
    }
    if let Some(e) = &b.error_bound {
        let _ = write!(line, ", error {e}");
    }
    if let Some(m) = b.inputs.margin {
        let _ = write!(line, ", margin {m}");
    }
    let _ = writeln!(out, "{line}, count {}, verdict {}", b.count, b.verdict.label());
}

fn existence_table(out: &mut String, e: &ExistenceVerdict) {
    let _ = writeln!(
        out,
        "existence {}: {} ({}; simplified threshold q > {}: {})",
        e.bound.label(),
        if e.threshold_holds { "holds" } else { "below threshold" },
        e.witness_inequality,
        e.simplified_q_threshold,
        e.q_exceeds_simplified
    );
}

/// Escapes a CSV field per RFC 4180 (quotes around separators or quotes).
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// The headline bound for one-row summaries: the estimate matching the
/// validated regime, falling back to the first non-box bound evaluated.
fn primary_bound<'a>(report: &'a VerifyReport) -> Option<&'a BoundReport> {
    let want = match report.validation.regime {
        Regime::MarkoffHurwitz => BoundId::MarkoffHurwitzEstimate,
        Regime::SameExponent => BoundId::SameExponentZero,
        _ => BoundId::MainConstants,
    };
    report
        .bounds
        .iter()
        .find(|b| b.bound == want)
        .or_else(|| report.bounds.iter().find(|b| b.bound != BoundId::CongruenceBox))
}

/// One CSV row in the fixed schema. `elapsed_ms` is the only
/// non-deterministic column; `None` leaves it empty (structured outputs
/// never carry timings).
fn csv_row(sys: &DiagonalSystem, report: &VerifyReport, elapsed_ms: Option<u128>) -> String {
    let primary = primary_bound(report);
    let (main, bound, verdict) = match primary {
        Some(b) => (
            b.main_term.to_string(),
            b.error_bound_sq
                .as_ref()
                .map(|s| s.to_string())
                .or_else(|| b.error_bound.as_ref().map(|e| e.to_string()))
                .unwrap_or_default(),
            b.verdict.label().to_string(),
        ),
        None => (String::new(), String::new(), "not_applicable".to_string()),
    };
    let fields = [
        sys.field.order().to_string(),
        sys.field.p().to_string(),
        sys.field.m().to_string(),
        sys.num_vars().to_string(),
        sys.num_eqs().to_string(),
        report.validation.regime.label().to_string(),
        report.total.to_string(),
        main,
        bound,
        verdict,
        report.engine.label().to_string(),
        elapsed_ms.map(|ms| ms.to_string()).unwrap_or_default(),
    ];
    fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",")
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_validate(file: &str, format: Format, caps: &Caps) -> CmdResult {
    let sys = load_system(file, caps)?;
    let report = validate_system(&sys, caps)?;
    let pass = report.all_gates_pass();
    let text = match format {
        Format::Table => {
            let mut out = String::new();
            validation_table(&mut out, &report);
            let _ = writeln!(out, "pass: {pass}");
            out
        }
        Format::Structured => format!("{}\n", validation_json(&report)),
        Format::Csv => {
            return Err(Failure::Usage("csv output is not defined for validate".into()))
        }
    };
    Ok(Output { text, exit: if pass { EXIT_OK } else { EXIT_VIOLATED } })
}

fn parse_restriction(spec: &str) -> Result<Restriction, Failure> {
    match spec {
        "all" => Ok(Restriction::All),
        "nonzero" => Ok(Restriction::NonzeroCoords),
        other => match other.strip_prefix("box:") {
            Some(m) => m
                .parse::<u64>()
                .map(|margin| Restriction::Box { margin })
                .map_err(|_| Failure::Usage(format!("invalid box margin: {m}"))),
            None => Err(Failure::Usage(format!(
                "unknown restriction {other:?}; expected all, nonzero, or box:<m>"
            ))),
        },
    }
}

fn cmd_count(
    file: &str,
    engine: EngineChoice,
    restrict: &str,
    format: Format,
    caps: &Caps,
) -> CmdResult {
    let sys = load_system(file, caps)?;
    let restriction = parse_restriction(restrict)?;
    let start = Instant::now();
    let results = match engine {
        EngineChoice::Auto => vec![count_solutions(&sys, restriction, caps)?],
        EngineChoice::Brute => vec![count_bruteforce(&sys, restriction, caps)?],
        EngineChoice::Conv => vec![count_convolution(&sys, restriction, caps)?],
        EngineChoice::Both => {
            let brute = count_bruteforce(&sys, restriction, caps)?;
            let conv = count_convolution(&sys, restriction, caps)?;
            if brute.count != conv.count {
                return Err(CountError::EngineMismatch {
                    context: "count --engine both".into(),
                    lhs: brute.count,
                    rhs: conv.count,
                }
                .into());
            }
            vec![brute, conv]
        }
    };
    let elapsed = start.elapsed().as_millis();
    let count = results[0].count.clone();
    let engines: Vec<&str> = results.iter().map(|r| r.engine.label()).collect();

    let text = match format {
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "restriction: {restrict}");
            let _ = writeln!(out, "count: {count}");
            if engines.len() == 1 {
                let _ = writeln!(out, "engine: {}", engines[0]);
            } else {
                let _ = writeln!(out, "engines: {} (agree)", engines.join(", "));
            }
            out
        }
        Format::Structured => {
            let mut obj = serde_json::Map::new();
            obj.insert("count".into(), json!(count.to_string()));
            obj.insert("restriction".into(), json!(restrict));
            if engines.len() == 1 {
                obj.insert("engine".into(), json!(engines[0]));
            } else {
                obj.insert("engines".into(), json!(engines));
                obj.insert("cross_checked".into(), json!(true));
            }
            format!("{}\n", Value::Object(obj))
        }
        Format::Csv => {
            let validation = validate_system(&sys, caps)?;
            let fields = [
                sys.field.order().to_string(),
                sys.field.p().to_string(),
                sys.field.m().to_string(),
                sys.num_vars().to_string(),
                sys.num_eqs().to_string(),
                validation.regime.label().to_string(),
                count.to_string(),
                String::new(),
                String::new(),
                String::new(),
                engines.join("+"),
                elapsed.to_string(),
            ];
            format!(
                "{CSV_HEADER}\n{}\n",
                fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",")
            )
        }
    };
    Ok(Output { text, exit: EXIT_OK })
}

fn cmd_bound(
    file: &str,
    count_str: &str,
    margins: &[u64],
    format: Format,
    caps: &Caps,
) -> CmdResult {
    let sys = load_system(file, caps)?;
    let count = BigUint::from_str_radix(count_str, 10)
        .map_err(|_| Failure::Usage(format!("invalid decimal count: {count_str}")))?;
    let validation = validate_system(&sys, caps)?;

    let q = sys.field.order();
    let (t, n, d1) = (sys.num_vars(), sys.num_eqs(), sys.d1());
    let mut bounds: Vec<BoundReport> = Vec::new();
    let mut existence: Vec<ExistenceVerdict> = Vec::new();
    let mut notes: Vec<String> = Vec::new();
    for id in &validation.applicable_bounds {
        match id {
            BoundId::MainConstants | BoundId::MainPolynomials => {
                bounds.push(crate::bounds::main_estimate(&sys, &count, caps)?);
            }
            BoundId::SameExponentZero => {
                bounds.push(same_exponent_estimate(&sys, &count, caps)?);
            }
            BoundId::MarkoffHurwitzEstimate => {
                bounds.push(mh_estimate(&sys, &count, caps)?);
            }
            BoundId::ExistenceGeneral => existence.push(existence_general(q, t, n, d1)?),
            BoundId::ExistenceSameExponent => {
                let v = same_exponent_existence(q, d1, n, t);
                existence.push(ExistenceVerdict {
                    bound: BoundId::ExistenceSameExponent,
                    threshold_holds: v.threshold_holds,
                    witness_inequality: v.witness_inequality,
                    simplified_q_threshold: BigUint::from(4 * d1).pow(2),
                    q_exceeds_simplified: v.q_condition,
                });
            }
            BoundId::ExistenceMarkoffHurwitz => existence.push(mh_existence(q, t, n, d1)?),
            BoundId::CongruenceBox => {
                for &margin in margins {
                    match congruence_box_estimate(q, t, n, d1, margin, &count) {
                        Ok(report) => bounds.push(report),
                        Err(BoundsError::PreconditionFailed(reason)) => {
                            notes.push(format!("box margin {margin}: {reason}"));
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
    }

    let violated = bounds.iter().any(|b| b.verdict == crate::bounds::Verdict::Violated);
    let text = match format {
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "count: {count}");
            if bounds.is_empty() && existence.is_empty() {
                let _ = writeln!(out, "no applicable bounds");
            }
            for b in &bounds {
                bound_table(&mut out, b);
            }
            for e in &existence {
                existence_table(&mut out, e);
            }
            for note in &notes {
                let _ = writeln!(out, "note: {note}");
            }
            out
        }
        Format::Structured => {
            let doc = json!({
                "count": count.to_string(),
                "bounds": bounds.iter().map(bound_json).collect::<Vec<_>>(),
                "existence": existence.iter().map(existence_json).collect::<Vec<_>>(),
                "notes": notes,
            });
            format!("{doc}\n")
        }
        Format::Csv => return Err(Failure::Usage("csv output is not defined for bound".into())),
    };
    Ok(Output { text, exit: if violated { EXIT_VIOLATED } else { EXIT_OK } })
}

pub fn nonzero_json(nz: &NonzeroReport) -> Value {
    json!({
        "total": nz.total.to_string(),
        "nonzero": nz.nonzero.to_string(),
        "with_zero": nz.with_zero.to_string(),
        "zeros_profile": nz.zeros_profile.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "subset_spread": nz.subset_spread.iter().map(|s| json!({
            "cardinality": s.cardinality,
            "min": s.min.to_string(),
            "max": s.max.to_string(),
        })).collect::<Vec<_>>(),
    })
}

pub fn verify_json(report: &VerifyReport) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("validation".into(), validation_json(&report.validation));
    obj.insert("total".into(), json!(report.total.to_string()));
    obj.insert("engine".into(), json!(report.engine.label()));
    obj.insert("cross_checked".into(), json!(report.cross_checked));
    if let Some(nz) = &report.nonzero {
        obj.insert("nonzero".into(), nonzero_json(nz));
    }
    obj.insert("bounds".into(), report.bounds.iter().map(bound_json).collect::<Vec<_>>().into());
    obj.insert(
        "existence".into(),
        report.existence.iter().map(existence_json).collect::<Vec<_>>().into(),
    );
    obj.insert("notes".into(), json!(report.notes));
    obj.insert("critical".into(), json!(report.critical));
    Value::Object(obj)
}

fn cmd_verify(file: &str, margins: &[u64], format: Format, caps: &Caps) -> CmdResult {
    let sys = load_system(file, caps)?;
    let options = VerifyOptions { box_margins: margins.to_vec() };
    let start = Instant::now();
    let report = verify(&sys, &options, caps)?;
    let elapsed = start.elapsed().as_millis();

    let text = match format {
        Format::Table => {
            let mut out = String::new();
            validation_table(&mut out, &report.validation);
            let _ = writeln!(
                out,
                "count: {} ({}{})",
                report.total,
                report.engine.label(),
                if report.cross_checked { ", cross-checked" } else { "" }
            );
            if let Some(nz) = &report.nonzero {
                let _ = writeln!(
                    out,
                    "nonzero: {} / with zero coordinate: {}",
                    nz.nonzero, nz.with_zero
                );
            }
            for b in &report.bounds {
                bound_table(&mut out, b);
            }
            for e in &report.existence {
                existence_table(&mut out, e);
            }
            for note in &report.notes {
                let _ = writeln!(out, "note: {note}");
            }
            let _ = writeln!(out, "critical: {}", report.critical);
            out
        }
        Format::Structured => format!("{}\n", verify_json(&report)),
        Format::Csv => {
            format!("{CSV_HEADER}\n{}\n", csv_row(&sys, &report, Some(elapsed)))
        }
    };
    Ok(Output { text, exit: if report.critical { EXIT_VIOLATED } else { EXIT_OK } })
}

fn cmd_sweep(template: &str, vary: &str, set: &str, format: Format, caps: &Caps) -> CmdResult {
    if vary != "q" {
        return Err(Failure::Usage(format!("only --vary q is supported, got {vary:?}")));
    }
    let text = std::fs::read_to_string(template)
        .map_err(|e| Failure::Usage(format!("cannot read {template}: {e}")))?;
    let mut doc: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("template is not valid JSON: {e}")))?;
    let mut points: Vec<u64> = Vec::new();
    for part in set.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        points.push(
            part.parse::<u64>()
                .map_err(|_| Failure::Usage(format!("invalid set entry: {part:?}")))?,
        );
    }
    if points.is_empty() {
        return Err(Failure::Usage("--set must list at least one value".into()));
    }
    points.sort_unstable();
    points.dedup();

    let mut rows: Vec<(DiagonalSystem, VerifyReport, u128)> = Vec::new();
    for &p in &points {
        doc["field"]["p"] = json!(p);
        let sys = parse_system_with_caps(&doc.to_string(), caps)?;
        let start = Instant::now();
        let report = verify(&sys, &VerifyOptions::default(), caps)?;
        let elapsed = start.elapsed().as_millis();
        rows.push((sys, report, elapsed));
    }

    let critical = rows.iter().any(|(_, r, _)| r.critical);
    let text = match format {
        Format::Table | Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "{CSV_HEADER}");
            for (sys, report, elapsed) in &rows {
                let _ = writeln!(out, "{}", csv_row(sys, report, Some(*elapsed)));
            }
            out
        }
        Format::Structured => {
            let entries: Vec<Value> = rows
                .iter()
                .map(|(sys, report, _)| {
                    json!({
                        "q": sys.field.order(),
                        "p": sys.field.p(),
                        "m": sys.field.m(),
                        "report": verify_json(report),
                    })
                })
                .collect();
            format!("{}\n", Value::Array(entries))
        }
    };
    Ok(Output { text, exit: if critical { EXIT_VIOLATED } else { EXIT_OK } })
}

fn cmd_waring(n: usize, d1: u64, q: u64, format: Format) -> CmdResult {
    let bound = waring_gamma_bound(n, q, d1).map_err(|e| Failure::Usage(e.to_string()))?;
    let (lo, hi) = (bound.h.lo_f64(), bound.h.hi_f64());
    let text = match format {
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "gamma upper bound: {}", bound.gamma_upper);
            let _ = writeln!(out, "h(q) in [{lo:.6}, {hi:.6}]");
            let _ = writeln!(out, "witness: {}", bound.witness_inequality);
            out
        }
        Format::Structured => {
            let doc = json!({
                "n": n,
                "d1": d1,
                "q": q,
                "gamma_upper": bound.gamma_upper,
                "h_lo": format!("{lo:.6}"),
                "h_hi": format!("{hi:.6}"),
                "witness_inequality": bound.witness_inequality,
            });
            format!("{doc}\n")
        }
        Format::Csv => return Err(Failure::Usage("csv output is not defined for waring".into())),
    };
    Ok(Output { text, exit: EXIT_OK })
}

/// Smallest `t` valid exponents, strictly decreasing, each ≥ `lo` and prime
/// to the characteristic.
fn pick_exponents(t: usize, p: u64, lo: u64) -> Vec<u64> {
    let mut picked = Vec::with_capacity(t);
    let mut d = lo;
    while picked.len() < t {
        if d % p != 0 {
            picked.push(d);
        }
        d += 1;
    }
    picked.reverse();
    picked
}

fn cmd_generate(
    n: usize,
    t: usize,
    p: u64,
    m: usize,
    rhs: RhsKind,
    seed: u64,
    caps: &Caps,
) -> CmdResult {
    if n == 0 || t == 0 {
        return Err(Failure::Usage("n and t must be positive".into()));
    }
    if n > t {
        return Err(Failure::Usage(format!("n must not exceed t, got n = {n}, t = {t}")));
    }
    let field = build_field_with_caps(p, m, caps)?;
    let q = field.order();
    // Markoff–Hurwitz monomials need Σ_i c_ji = n < d_t.
    let lo = match rhs {
        RhsKind::MarkoffHurwitz => (n as u64 + 1).max(2),
        _ => 2,
    };
    let exponents = pick_exponents(t, p, lo);
    let matrix = generate_h_matrix(n, t, &field, seed, caps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let decode = |code: u64| field.decode(code).expect("code < q");
    let rhs = match rhs {
        RhsKind::Constants => {
            RhsFamily::Constants((0..n).map(|_| decode(rng.gen_range(0..q))).collect())
        }
        RhsKind::Polynomials => {
            // g_j = X_1 + c_j: degree 1 < d_t, nonconstant.
            let polys = (0..n)
                .map(|_| {
                    SparsePoly::new(
                        &field,
                        1,
                        vec![(vec![1], field.one()), (vec![0], decode(rng.gen_range(0..q)))],
                    )
                })
                .collect();
            RhsFamily::Polynomials { k: 1, polys }
        }
        RhsKind::MarkoffHurwitz => {
            let mut constants: Vec<_> = (0..n).map(|_| decode(rng.gen_range(0..q))).collect();
            constants[0] = field.one();
            RhsFamily::MarkoffHurwitz {
                constants,
                mono_coeffs: (0..n).map(|_| decode(rng.gen_range(1..q))).collect(),
                mono_exps: vec![vec![1; n]; n],
            }
        }
    };
    let sys = DiagonalSystem::new(field, exponents, matrix, LhsFamily::PurePowers, rhs)?;
    debug_assert!(validate_system(&sys, caps).map(|v| v.hypothesis_h).unwrap_or(true));
    Ok(Output { text: format!("{}\n", serialize_system(&sys)), exit: EXIT_OK })
}

fn cmd_dickson(d: u64, a: u64, p: u64, m: usize, format: Format, caps: &Caps) -> CmdResult {
    let field = build_field_with_caps(p, m, caps)?;
    let a_elem = field.decode(a)?;
    let coeffs = dickson_coeffs(&field, d, &a_elem);
    let codes: Vec<u64> = coeffs.iter().map(|c| field.encode(c)).collect();
    let identity = check_functional_identity(&field, d, &a_elem);
    let text = match format {
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "field: GF({p}^{m})");
            let _ = writeln!(out, "d: {d}");
            let _ = writeln!(out, "a: {a}");
            let strings: Vec<String> = codes.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(out, "coefficients (low to high): {}", strings.join(", "));
            let _ = writeln!(
                out,
                "identity D_d(y + a/y, a) = y^d + (a/y)^d: {}",
                if identity { "holds" } else { "violated" }
            );
            out
        }
        Format::Structured => {
            let doc = json!({
                "p": p,
                "m": m,
                "d": d,
                "a": a,
                "coefficients": codes,
                "identity_holds": identity,
            });
            format!("{doc}\n")
        }
        Format::Csv => return Err(Failure::Usage("csv output is not defined for dickson".into())),
    };
    Ok(Output { text, exit: if identity { EXIT_OK } else { EXIT_VIOLATED } })
}
