//! Command-line layer: reads instance files, runs the cancellation driver
//! and the fibre counter, and prints canonical reports.
//!
//! Exit codes are part of the interface:
//!   0  success
//!   2  usage error, unreadable file, or malformed instance
//!   3  coprime-exponent obstruction
//!   4  leading forms not proportional
//!   5  truncation floor exhausted before the target degree
//!   6  residual identically zero
//!   7  target degree overshot
//!   8  internal error or failed invariant
//!   9  --expect-gap was given but the count matched the claim

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::json::{
    canonical_string, distinctness_to_json, fibre_to_json, instance_from_str, reduction_to_json,
    relations_to_json, run_report, sha256_hex, Instance, InstanceOverrides, TOOL_VERSION,
};
use crate::laurent2::{
    series_add, series_eq_up_to_common_floor, series_kth_root, series_mul, series_pow, Exponent2,
    LaurentSeries2,
};
use crate::puiseux::{pz_add, pz_mul, pz_valuation, PuiseuxElement, ValuationBound};
use crate::reduction::{
    check_exponent_relations, epsilon_distinctness, reduce_full, reduce_full_capped, rescale_w,
    DistinctnessReport, ExponentRelation, ReductionResult, ReductionStatus, WPoly,
    DEFAULT_FLOOR_BUDGET,
};
use crate::scalars::{fmt_rat, parse_rat, rat, rat_int, FieldSpec, Scalar};
use crate::torus::{count_fibre_with, FibreReport, LiftSettings, TorusSpec};

#[derive(Parser)]
#[command(
    name = "linfty",
    version,
    about = "Exact series reduction and torus fibre counting"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cancel the reducible part of f against fractional powers of g
    Reduce(ReduceArgs),
    /// Count the solutions over one torus point of the system cut out by f and g
    CountFibre(CountFibreArgs),
    /// Run the built-in invariant suite
    Selfcheck(SelfcheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportMode {
    Json,
    Text,
}

#[derive(Args)]
struct CommonArgs {
    /// Instance file (JSON)
    instance: PathBuf,

    /// Override the truncation floor (inclusive total degree); may only
    /// discard stored terms, never invent deeper ones
    #[arg(long, allow_hyphen_values = true)]
    floor: Option<i64>,

    /// Torus level as a positive rational such as 1 or 3/2
    #[arg(long)]
    level: Option<String>,

    /// Coefficient field: rational | gaussian | cyclotomic:K
    #[arg(long)]
    field: Option<String>,

    /// Refuse to take more than this many cancellation steps
    #[arg(long)]
    max_steps: Option<u64>,

    /// Report format
    #[arg(long, value_enum, default_value_t = ReportMode::Json)]
    report: ReportMode,

    /// Write the report to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CountFibreArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Exit with code 9 unless the counted total falls short of the claim
    #[arg(long)]
    expect_gap: bool,
}

#[derive(Args)]
struct SelfcheckArgs {
    /// Corrupt one entry of the internal binomial table first; the suite
    /// must then fail, which exercises its ability to catch real faults
    #[arg(long, hide = true)]
    inject_binom_fault: bool,
}

pub fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.cmd {
        Cmd::Reduce(args) => cmd_reduce(&args.common),
        Cmd::CountFibre(args) => cmd_count_fibre(&args.common, args.expect_gap),
        Cmd::Selfcheck(args) => cmd_selfcheck(&args),
    }
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    match e {
        Error::Parse(_) | Error::Json(_) | Error::Io(_) => 2,
        _ => 8,
    }
}

fn status_code(status: ReductionStatus) -> i32 {
    match status {
        ReductionStatus::ReachedTarget => 0,
        ReductionStatus::GcdObstruction => 3,
        ReductionStatus::NonProportionalLeading => 4,
        ReductionStatus::FloorExhausted => 5,
        ReductionStatus::ZeroResidual => 6,
        ReductionStatus::TargetOvershot => 7,
    }
}

fn overrides_from(common: &CommonArgs) -> Result<InstanceOverrides> {
    let field = common
        .field
        .as_deref()
        .map(FieldSpec::from_str)
        .transpose()?;
    let level = common.level.as_deref().map(parse_rat).transpose()?;
    Ok(InstanceOverrides {
        field,
        floor: common.floor,
        level,
        max_steps: common.max_steps,
    })
}

fn load_instance(common: &CommonArgs) -> Result<(Vec<u8>, Instance)> {
    let raw = fs::read(&common.instance)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", common.instance.display())))?;
    let text = std::str::from_utf8(&raw)
        .map_err(|_| Error::Parse("instance file is not valid UTF-8".into()))?;
    let inst = instance_from_str(text, &overrides_from(common)?)?;
    Ok((raw, inst))
}

/// Runs the leading-exponent checks and the cancellation driver, then
/// verifies any W the instance claims against the computed one.
fn reduce_stage(inst: &Instance) -> Result<(ExponentRelation, ReductionResult)> {
    let rel = check_exponent_relations(&inst.f, &inst.g)?;
    let red = reduce_full_capped(&inst.f, &inst.g, DEFAULT_FLOOR_BUDGET, inst.max_steps)?;
    if let Some(claimed) = &inst.w {
        if red.status == ReductionStatus::ReachedTarget && *claimed != red.w {
            return Err(Error::Precondition(
                "the supplied w disagrees with the computed cancellation".into(),
            ));
        }
    }
    Ok((rel, red))
}

/// Distinctness of the twisted cancellation polynomials, when computable in
/// the working field. A missing root of unity is reported, not fatal.
fn distinctness_stage(
    red: &ReductionResult,
    field: FieldSpec,
) -> Result<(Option<DistinctnessReport>, Option<String>)> {
    if red.w.is_empty() {
        return Ok((None, None));
    }
    let twisted = rescale_w(&red.w, red.k).unwrap_or_else(|_| red.w.clone());
    match epsilon_distinctness(&twisted, field) {
        Ok(rep) => Ok((Some(rep), None)),
        Err(e @ Error::FieldExtensionRequired { .. }) => Ok((None, Some(e.to_string()))),
        Err(e) => Err(e),
    }
}

fn distinctness_value(rep: &Option<DistinctnessReport>, err: &Option<String>) -> Value {
    match (rep, err) {
        (Some(r), _) => distinctness_to_json(r),
        (None, Some(msg)) => json!({ "error": msg }),
        (None, None) => Value::Null,
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn wpoly_text(w: &WPoly) -> String {
    if w.is_empty() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (e, c) in w.terms() {
        parts.push(match e {
            0 => format!("{c}"),
            1 => format!("{c}*T"),
            _ => format!("{c}*T^{e}"),
        });
    }
    parts.join(" + ")
}

fn text_report(
    rel: &ExponentRelation,
    red: &ReductionResult,
    dist: &Option<DistinctnessReport>,
    dist_err: &Option<String>,
    fibre: Option<&FibreReport>,
    digest: &str,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "status: {}", red.status.as_str());
    let _ = writeln!(
        s,
        "leading exponents: f ({}, {})  g ({}, {})  ratio {}",
        rel.m1,
        rel.m2,
        rel.n1,
        rel.n2,
        fmt_rat(&rel.ratio)
    );
    let _ = writeln!(
        s,
        "W(T) = {}   (k~ = {}, k = {})",
        wpoly_text(&red.w),
        red.k_tilde,
        red.k
    );
    if let Some(d) = &red.d {
        let _ = writeln!(s, "d = {d}");
    }
    if let Some((e, _)) = red
        .residual_leading
        .as_ref()
        .and_then(|lf| lf.monomial().ok())
    {
        let _ = writeln!(s, "residual leading exponent: ({}, {})", e.i, e.j);
    }
    let _ = writeln!(s, "trace: {} step(s)", red.trace.len());
    for (n, step) in red.trace.iter().enumerate() {
        let after = step
            .degree_after
            .map_or_else(|| "none".to_string(), |d| d.to_string());
        let _ = writeln!(
            s,
            "  step {}: c = {}  l = {}  k = {}  degree after: {}",
            n + 1,
            step.c,
            step.l,
            step.k,
            after
        );
    }
    match (dist, dist_err) {
        (Some(rep), _) => {
            let _ = writeln!(
                s,
                "twist distinctness: all_distinct = {}  exponent gcd = {}  witnesses = {}",
                rep.all_distinct,
                rep.exponent_gcd,
                rep.witnesses.len()
            );
        }
        (None, Some(msg)) => {
            let _ = writeln!(s, "twist distinctness: unavailable ({msg})");
        }
        (None, None) => {}
    }
    if let Some(rep) = fibre {
        let _ = writeln!(
            s,
            "fibre: total = {}  claimed = {}  gap = {}",
            rep.total, rep.claimed, rep.gap
        );
        for b in &rep.branches {
            let verdict = if b.feasible { "feasible" } else { "infeasible" };
            let _ = writeln!(
                s,
                "  branch {}: {}  v = {}  expected = {}  seeds = {}  lifted = {}{}",
                b.index,
                verdict,
                b.valuation,
                fmt_rat(&b.expected),
                b.seed_count,
                b.lifted.len(),
                b.error
                    .as_deref()
                    .map_or(String::new(), |e| format!("  error: {e}"))
            );
        }
    }
    let _ = writeln!(s, "input: sha256:{digest}");
    let _ = writeln!(s, "version: {TOOL_VERSION}");
    s
}

fn cmd_reduce(common: &CommonArgs) -> i32 {
    let (raw, inst) = match load_instance(common) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let (rel, red) = match reduce_stage(&inst) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let (dist, dist_err) = match distinctness_stage(&red, inst.field) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let digest = sha256_hex(&raw);
    let text = match common.report {
        ReportMode::Json => canonical_string(&run_report(
            reduction_to_json(&red),
            relations_to_json(&rel),
            distinctness_value(&dist, &dist_err),
            Value::Null,
            &digest,
        )),
        ReportMode::Text => text_report(&rel, &red, &dist, &dist_err, None, &digest),
    };
    if let Err(e) = emit(&text, common.out.as_deref()) {
        return fail(&e);
    }
    status_code(red.status)
}

fn cmd_count_fibre(common: &CommonArgs, expect_gap: bool) -> i32 {
    let (raw, inst) = match load_instance(common) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let (rel, red) = match reduce_stage(&inst) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let (dist, dist_err) = match distinctness_stage(&red, inst.field) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let digest = sha256_hex(&raw);

    if red.status != ReductionStatus::ReachedTarget {
        // Counting needs a completed cancellation; report what happened and
        // exit with the reduction's own code.
        let text = match common.report {
            ReportMode::Json => canonical_string(&run_report(
                reduction_to_json(&red),
                relations_to_json(&rel),
                distinctness_value(&dist, &dist_err),
                Value::Null,
                &digest,
            )),
            ReportMode::Text => text_report(&rel, &red, &dist, &dist_err, None, &digest),
        };
        if let Err(e) = emit(&text, common.out.as_deref()) {
            return fail(&e);
        }
        return status_code(red.status);
    }

    let spec = match TorusSpec::symmetric(inst.field, inst.level.clone(), red.k) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let settings = LiftSettings {
        budget: inst.budget.clone(),
        ..LiftSettings::default()
    };
    let fibre = match count_fibre_with(&inst.f, &inst.g, &red, &spec, &settings) {
        Ok(rep) => rep,
        Err(e) => return fail(&e),
    };

    let text = match common.report {
        ReportMode::Json => canonical_string(&run_report(
            reduction_to_json(&red),
            relations_to_json(&rel),
            distinctness_value(&dist, &dist_err),
            fibre_to_json(&fibre),
            &digest,
        )),
        ReportMode::Text => text_report(&rel, &red, &dist, &dist_err, Some(&fibre), &digest),
    };
    if let Err(e) = emit(&text, common.out.as_deref()) {
        return fail(&e);
    }
    if expect_gap && fibre.gap <= 0 {
        eprintln!(
            "expected a counting gap, but total {} matches the claim {}",
            fibre.total, fibre.claimed
        );
        return 9;
    }
    0
}

// ---------------------------------------------------------------------------
// Self-check
// ---------------------------------------------------------------------------

type S = LaurentSeries2<Scalar>;

fn random_rational_series(rng: &mut impl rand::Rng) -> S {
    let n = rng.random_range(2..6);
    let mut entries = Vec::with_capacity(n);
    for _ in 0..n {
        let i = rng.random_range(-3..=3);
        let j = rng.random_range(-3..=3);
        let p: i64 = rng.random_range(-9..=9);
        let q: i64 = rng.random_range(1..=9);
        entries.push((Exponent2::new(i, j), Scalar::from_rat(rat(p, q))));
    }
    S::from_terms(FieldSpec::Rational, entries, -12).expect("well-formed random terms")
}

fn check_series_ring_laws() -> Result<String> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for round in 0..6 {
        let a = random_rational_series(&mut rng);
        let b = random_rational_series(&mut rng);
        let c = random_rational_series(&mut rng);
        let assoc_l = series_add(&series_add(&a, &b)?, &c)?;
        let assoc_r = series_add(&a, &series_add(&b, &c)?)?;
        if !series_eq_up_to_common_floor(&assoc_l, &assoc_r) {
            return Err(Error::Internal(format!(
                "addition associativity, round {round}"
            )));
        }
        let dist_l = series_mul(&a, &series_add(&b, &c)?)?;
        let dist_r = series_add(&series_mul(&a, &b)?, &series_mul(&a, &c)?)?;
        if !series_eq_up_to_common_floor(&dist_l, &dist_r) {
            return Err(Error::Internal(format!("distributivity, round {round}")));
        }
    }
    Ok("6 random triples".into())
}

fn check_root_round_trips() -> Result<String> {
    for (k, field) in [
        (2u32, FieldSpec::Rational),
        (3, FieldSpec::Cyclotomic(3)),
        (4, FieldSpec::Gaussian),
    ] {
        let floor = -(3 * k as i64 + 9);
        let g = S::from_terms(
            field,
            vec![
                (Exponent2::new(k as i64, 2 * k as i64), Scalar::from_int(1)),
                (Exponent2::new(1, 0), Scalar::from_int(1)),
            ],
            floor,
        )?;
        let root = series_kth_root(&g, k)?;
        let back = series_pow(&root, k as i64)?;
        if !series_eq_up_to_common_floor(&back, &g) {
            return Err(Error::Internal(format!(
                "root round-trip failed for k = {k}"
            )));
        }
    }
    Ok("k = 2, 3, 4".into())
}

fn check_valuation_laws() -> Result<String> {
    let a = PuiseuxElement::from_terms(
        vec![
            (rat_int(2), Scalar::from_int(1)),
            (rat_int(0), Scalar::from_int(3)),
        ],
        None,
    )?;
    let b = PuiseuxElement::from_terms(
        vec![
            (rat_int(2), Scalar::from_int(-1)),
            (rat(-3, 1), Scalar::from_rat(rat(1, 2))),
        ],
        None,
    )?;
    // Leading parts cancel: the sum's valuation climbs to 0, well above the
    // minimum -2 of the inputs.
    match pz_valuation(&pz_add(&a, &b)?) {
        ValuationBound::Exact(v) if v == rat_int(0) => {}
        other => return Err(Error::Internal(format!("ultrametric sum gave {other}"))),
    }
    let c = PuiseuxElement::from_terms(
        vec![
            (rat_int(1), Scalar::from_int(1)),
            (rat_int(0), Scalar::from_int(1)),
        ],
        None,
    )?;
    match pz_valuation(&pz_mul(&a, &c)?) {
        ValuationBound::Exact(v) if v == rat_int(-3) => {}
        other => {
            return Err(Error::Internal(format!(
                "valuation additivity gave {other}"
            )))
        }
    }
    Ok("ultrametric and additivity".into())
}

fn check_fibre_of_the_built_in_pair() -> Result<String> {
    let (f, g) = fixtures::counting_example();
    let red = reduce_full(&f, &g)?;
    let spec = TorusSpec::symmetric(FieldSpec::Rational, rat_int(1), red.k)?;
    let rep = count_fibre_with(&f, &g, &red, &spec, &LiftSettings::default())?;
    if rep.total != 1 || rep.claimed != 2 || rep.gap != 1 {
        return Err(Error::Internal(format!(
            "built-in pair counted total {} claimed {} gap {}",
            rep.total, rep.claimed, rep.gap
        )));
    }
    if !rep.branches[0].feasible || rep.branches[1].feasible {
        return Err(Error::Internal(
            "built-in pair branch feasibility flipped".into(),
        ));
    }
    Ok("total 1 of claimed 2".into())
}

fn reduce_report_for(text: &str) -> Result<String> {
    let inst = instance_from_str(text, &InstanceOverrides::default())?;
    let (rel, red) = reduce_stage(&inst)?;
    let (dist, dist_err) = distinctness_stage(&red, inst.field)?;
    Ok(canonical_string(&run_report(
        reduction_to_json(&red),
        relations_to_json(&rel),
        distinctness_value(&dist, &dist_err),
        Value::Null,
        &sha256_hex(text.as_bytes()),
    )))
}

fn check_deterministic_reports() -> Result<String> {
    let (f, g) = fixtures::reduction_example();
    let text = canonical_string(&fixtures::instance_value(&f, &g, "1"));
    let first = reduce_report_for(&text)?;
    let second = reduce_report_for(&text)?;
    if first != second {
        return Err(Error::Internal(
            "same input produced two different reports".into(),
        ));
    }
    let digest = sha256_hex(first.as_bytes());
    Ok(format!("report digest {}", &digest[..12]))
}

fn cmd_selfcheck(args: &SelfcheckArgs) -> i32 {
    if args.inject_binom_fault {
        // Overwrite binom(1/2 choose 2) with garbage; the root round-trip
        // check below must notice.
        crate::scalars::faults::inject_binom_fault(2, 2, rat_int(999));
        eprintln!("note: corrupted one binomial table entry on request");
    }
    type Check = (&'static str, fn() -> Result<String>);
    let checks: &[Check] = &[
        ("series ring laws", check_series_ring_laws),
        ("fractional root round-trips", check_root_round_trips),
        ("valuation laws", check_valuation_laws),
        (
            "fibre of the built-in pair",
            check_fibre_of_the_built_in_pair,
        ),
        ("deterministic reports", check_deterministic_reports),
    ];
    let mut failed = 0;
    for (name, run) in checks {
        match run() {
            Ok(detail) => println!("ok    {name} ({detail})"),
            Err(e) => {
                failed += 1;
                println!("FAIL  {name}: {e}");
            }
        }
    }
    println!(
        "self-check: {} passed, {} failed",
        checks.len() - failed,
        failed
    );
    if failed > 0 {
        8
    } else {
        0
    }
}
