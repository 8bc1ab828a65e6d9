//! JSON wire formats for instances and reports.
//!
//! Everything numeric that is not a plain machine integer travels as a
//! string in lowest terms ("5", "-3/2"), so reports are exact and stable
//! across platforms. Serialization goes through `serde_json::Value` whose
//! object type keeps keys sorted; together with [`canonical_string`] this
//! makes every report byte-deterministic for a given input.
//!
//! Shapes:
//!   scalar          "p/q"  |  {"coeffs": ["p/q", ...], "order": K}
//!   series          {"floor": -20, "terms": [{"c": scalar, "i": 2, "j": 4}, ...]}
//!   puiseux         {"D": 2, "floor_q": "-10" | null, "terms": [{"c": scalar, "q": "3/2"}, ...]}
//!   W polynomial    [{"c": scalar, "exp": 3}, ...]
//!
//! Series terms print leading-first (descending total degree); Puiseux terms
//! print descending exponent; W terms print ascending exponent.

use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::laurent2::{Exponent2, LaurentSeries2};
use crate::puiseux::{PuiseuxElement, ValuationBound};
use crate::reduction::{DistinctnessReport, ExponentRelation, ReductionResult, WPoly};
use crate::scalars::{fmt_rat, parse_rat, CyclotomicElem, FieldSpec, Rat, Scalar};
use crate::torus::{BranchReport, FibreReport};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

// ---------------------------------------------------------------------------
// Scalars
// ---------------------------------------------------------------------------

pub fn scalar_to_json(s: &Scalar) -> Value {
    match s {
        Scalar::Rational(q) => Value::String(fmt_rat(q)),
        Scalar::Cyclotomic(e) => json!({
            "coeffs": e.coeffs.iter().map(|c| Value::String(fmt_rat(c))).collect::<Vec<_>>(),
            "order": e.order,
        }),
    }
}

fn parse_err(what: &str, v: &Value) -> Error {
    Error::Parse(format!("{what}, got {v}"))
}

pub fn scalar_from_json(v: &Value, field: FieldSpec) -> Result<Scalar> {
    match v {
        Value::String(s) => Ok(Scalar::from_rat(parse_rat(s)?)),
        Value::Object(o) => {
            let order = o
                .get("order")
                .and_then(Value::as_u64)
                .filter(|k| (1..=10_000).contains(k))
                .ok_or_else(|| parse_err("cyclotomic literal needs an integer \"order\"", v))?
                as u32;
            match field.cyclotomic_order() {
                Some(k) if k == order => {}
                _ => {
                    return Err(Error::Parse(format!(
                        "literal of order {order} cannot be read in the field {field}; \
                         declare the instance field as cyclotomic:{order}"
                    )));
                }
            }
            let coeffs = o
                .get("coeffs")
                .and_then(Value::as_array)
                .ok_or_else(|| parse_err("cyclotomic literal needs a \"coeffs\" array", v))?;
            let mut poly = Vec::with_capacity(coeffs.len());
            for c in coeffs {
                let s = c
                    .as_str()
                    .ok_or_else(|| parse_err("coefficients must be rational strings", c))?;
                poly.push(parse_rat(s)?);
            }
            Ok(Scalar::from_cyclotomic(CyclotomicElem::from_poly(
                order, &poly,
            )))
        }
        _ => Err(parse_err(
            "a scalar is a string or an {order, coeffs} object",
            v,
        )),
    }
}

// ---------------------------------------------------------------------------
// Bivariate series
// ---------------------------------------------------------------------------

pub fn series_to_json(s: &LaurentSeries2<Scalar>) -> Value {
    let mut terms: Vec<Value> = s
        .terms()
        .map(|(e, c)| json!({"c": scalar_to_json(c), "i": e.i, "j": e.j}))
        .collect();
    terms.reverse();
    json!({"floor": s.floor(), "terms": terms})
}

pub fn series_from_json(v: &Value, field: FieldSpec) -> Result<LaurentSeries2<Scalar>> {
    let o = v
        .as_object()
        .ok_or_else(|| parse_err("a series is an object with \"floor\" and \"terms\"", v))?;
    let floor = o
        .get("floor")
        .and_then(Value::as_i64)
        .ok_or_else(|| parse_err("series needs an integer \"floor\"", v))?;
    let terms_v = o
        .get("terms")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("series needs a \"terms\" array", v))?;
    let mut entries = Vec::with_capacity(terms_v.len());
    for t in terms_v {
        let to = t
            .as_object()
            .ok_or_else(|| parse_err("each term is an object {i, j, c}", t))?;
        let i = to
            .get("i")
            .and_then(Value::as_i64)
            .ok_or_else(|| parse_err("term needs an integer \"i\"", t))?;
        let j = to
            .get("j")
            .and_then(Value::as_i64)
            .ok_or_else(|| parse_err("term needs an integer \"j\"", t))?;
        let c = to
            .get("c")
            .ok_or_else(|| parse_err("term needs a coefficient \"c\"", t))?;
        entries.push((Exponent2::new(i, j), scalar_from_json(c, field)?));
    }
    LaurentSeries2::from_terms(field, entries, floor)
}

// ---------------------------------------------------------------------------
// Puiseux elements
// ---------------------------------------------------------------------------

pub fn puiseux_to_json(p: &PuiseuxElement) -> Value {
    let mut terms: Vec<Value> = p
        .terms()
        .map(|(q, c)| json!({"c": scalar_to_json(c), "q": fmt_rat(q)}))
        .collect();
    terms.reverse();
    let floor_q = match p.floor() {
        Some(fl) => Value::String(fmt_rat(fl)),
        None => Value::Null,
    };
    json!({"D": p.denominator(), "floor_q": floor_q, "terms": terms})
}

pub fn puiseux_from_json(v: &Value, field: FieldSpec) -> Result<PuiseuxElement> {
    let o = v
        .as_object()
        .ok_or_else(|| parse_err("a Puiseux element is an object", v))?;
    let declared = o
        .get("D")
        .and_then(Value::as_u64)
        .ok_or_else(|| parse_err("Puiseux element needs an integer \"D\"", v))?;
    let floor_q = match o.get("floor_q") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(parse_rat(s)?),
        Some(other) => return Err(parse_err("\"floor_q\" is a rational string or null", other)),
    };
    let terms_v = o
        .get("terms")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("Puiseux element needs a \"terms\" array", v))?;
    let mut entries = Vec::with_capacity(terms_v.len());
    for t in terms_v {
        let to = t
            .as_object()
            .ok_or_else(|| parse_err("each term is an object {q, c}", t))?;
        let q = to
            .get("q")
            .and_then(Value::as_str)
            .ok_or_else(|| parse_err("term needs a rational string \"q\"", t))?;
        let c = to
            .get("c")
            .ok_or_else(|| parse_err("term needs a coefficient \"c\"", t))?;
        entries.push((parse_rat(q)?, scalar_from_json(c, field)?));
    }
    let p = PuiseuxElement::from_terms(entries, floor_q)?;
    if p.denominator() != declared {
        return Err(Error::Parse(format!(
            "declared ramification D = {declared} does not match the terms, which need D = {}",
            p.denominator()
        )));
    }
    Ok(p)
}

// ---------------------------------------------------------------------------
// W polynomials
// ---------------------------------------------------------------------------

pub fn wpoly_terms_to_json(w: &WPoly) -> Value {
    Value::Array(
        w.terms()
            .map(|(e, c)| json!({"c": scalar_to_json(c), "exp": e}))
            .collect(),
    )
}

pub fn wpoly_from_json(v: &Value, k_tilde: u32, field: FieldSpec) -> Result<WPoly> {
    let arr = v
        .as_array()
        .ok_or_else(|| parse_err("W is an array of {exp, c} terms", v))?;
    let mut entries = Vec::with_capacity(arr.len());
    for t in arr {
        let to = t
            .as_object()
            .ok_or_else(|| parse_err("each W term is an object {exp, c}", t))?;
        let exp = to
            .get("exp")
            .and_then(Value::as_i64)
            .ok_or_else(|| parse_err("W term needs an integer \"exp\"", t))?;
        let c = to
            .get("c")
            .ok_or_else(|| parse_err("W term needs a coefficient \"c\"", t))?;
        entries.push((exp, scalar_from_json(c, field)?));
    }
    WPoly::new(k_tilde, entries)
}

// ---------------------------------------------------------------------------
// Reduction reports
// ---------------------------------------------------------------------------

pub fn relations_to_json(rel: &ExponentRelation) -> Value {
    json!({
        "abs_diff_equal": rel.abs_diff_equal,
        "m": rel.m,
        "m1": rel.m1,
        "m2": rel.m2,
        "n": rel.n,
        "n1": rel.n1,
        "n2": rel.n2,
        "proportional": rel.proportional,
        "ratio": fmt_rat(&rel.ratio),
        "ratio_is_one": rel.ratio_is_one,
    })
}

pub fn reduction_to_json(red: &ReductionResult) -> Value {
    let trace: Vec<Value> = red
        .trace
        .iter()
        .map(|s| {
            json!({
                "c": scalar_to_json(&s.c),
                "degree_after": s.degree_after.map_or(Value::Null, Value::from),
                "k": s.k,
                "l": s.l,
            })
        })
        .collect();
    let residual_leading = red
        .residual_leading
        .as_ref()
        .and_then(|lf| lf.monomial().ok())
        .map_or(Value::Null, |(e, _)| json!({"i": e.i, "j": e.j}));
    json!({
        "W": wpoly_terms_to_json(&red.w),
        "d": red.d.as_ref().map_or(Value::Null, scalar_to_json),
        "k": red.k,
        "k_tilde": red.k_tilde,
        "residual_leading": residual_leading,
        "status": red.status.as_str(),
        "trace": trace,
    })
}

/// The reduction report as read back from JSON. Holds exactly the serialized
/// fields; the residual series itself does not travel.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedReduction {
    pub w: WPoly,
    pub k_tilde: u32,
    pub k: u32,
    pub status: String,
    pub d: Option<Scalar>,
    pub residual_leading: Option<(i64, i64)>,
    pub trace: Vec<(Scalar, i64, u32, Option<i64>)>,
}

impl ParsedReduction {
    pub fn to_json(&self) -> Value {
        let trace: Vec<Value> = self
            .trace
            .iter()
            .map(|(c, l, k, after)| {
                json!({
                    "c": scalar_to_json(c),
                    "degree_after": after.map_or(Value::Null, Value::from),
                    "k": k,
                    "l": l,
                })
            })
            .collect();
        json!({
            "W": wpoly_terms_to_json(&self.w),
            "d": self.d.as_ref().map_or(Value::Null, scalar_to_json),
            "k": self.k,
            "k_tilde": self.k_tilde,
            "residual_leading": self
                .residual_leading
                .map_or(Value::Null, |(i, j)| json!({"i": i, "j": j})),
            "status": self.status.clone(),
            "trace": trace,
        })
    }
}

pub fn reduction_from_json(v: &Value, field: FieldSpec) -> Result<ParsedReduction> {
    let o = v
        .as_object()
        .ok_or_else(|| parse_err("a reduction report is an object", v))?;
    let k_tilde =
        o.get("k_tilde")
            .and_then(Value::as_u64)
            .ok_or_else(|| parse_err("reduction report needs \"k_tilde\"", v))? as u32;
    let k = o
        .get("k")
        .and_then(Value::as_u64)
        .ok_or_else(|| parse_err("reduction report needs \"k\"", v))? as u32;
    let w = wpoly_from_json(
        o.get("W")
            .ok_or_else(|| parse_err("reduction report needs \"W\"", v))?,
        k_tilde,
        field,
    )?;
    let status = o
        .get("status")
        .and_then(Value::as_str)
        .ok_or_else(|| parse_err("reduction report needs a \"status\" string", v))?
        .to_owned();
    let d = match o.get("d") {
        None | Some(Value::Null) => None,
        Some(other) => Some(scalar_from_json(other, field)?),
    };
    let residual_leading = match o.get("residual_leading") {
        None | Some(Value::Null) => None,
        Some(rl) => {
            let i = rl
                .get("i")
                .and_then(Value::as_i64)
                .ok_or_else(|| parse_err("residual_leading needs \"i\"", rl))?;
            let j = rl
                .get("j")
                .and_then(Value::as_i64)
                .ok_or_else(|| parse_err("residual_leading needs \"j\"", rl))?;
            Some((i, j))
        }
    };
    let mut trace = Vec::new();
    for t in o
        .get("trace")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("reduction report needs a \"trace\" array", v))?
    {
        let c = scalar_from_json(
            t.get("c")
                .ok_or_else(|| parse_err("trace step needs \"c\"", t))?,
            field,
        )?;
        let l = t
            .get("l")
            .and_then(Value::as_i64)
            .ok_or_else(|| parse_err("trace step needs \"l\"", t))?;
        let k = t
            .get("k")
            .and_then(Value::as_u64)
            .ok_or_else(|| parse_err("trace step needs \"k\"", t))? as u32;
        let after = match t.get("degree_after") {
            None | Some(Value::Null) => None,
            Some(d) => Some(
                d.as_i64()
                    .ok_or_else(|| parse_err("\"degree_after\" is an integer or null", d))?,
            ),
        };
        trace.push((c, l, k, after));
    }
    Ok(ParsedReduction {
        w,
        k_tilde,
        k,
        status,
        d,
        residual_leading,
        trace,
    })
}

pub fn distinctness_to_json(rep: &DistinctnessReport) -> Value {
    json!({
        "all_distinct": rep.all_distinct,
        "distinct_indices": rep.distinct_indices,
        "epsilon0": rep.epsilon0.as_ref().map_or(Value::Null, scalar_to_json),
        "exponent_gcd": rep.exponent_gcd,
        "k_tilde": rep.k_tilde,
        "witnesses": rep.witnesses.iter().map(scalar_to_json).collect::<Vec<_>>(),
    })
}

// ---------------------------------------------------------------------------
// Fibre reports
// ---------------------------------------------------------------------------

fn bound_to_string(b: &ValuationBound) -> String {
    b.to_string()
}

fn branch_to_json(b: &BranchReport) -> Value {
    let lifted: Vec<Value> = b
        .lifted
        .iter()
        .map(|(x, y)| json!({"x": puiseux_to_json(x), "y": puiseux_to_json(y)}))
        .collect();
    let mut residual_valuations = Vec::with_capacity(2 * b.residual_bounds.len());
    for (b1, b2) in &b.residual_bounds {
        residual_valuations.push(Value::String(bound_to_string(b1)));
        residual_valuations.push(Value::String(bound_to_string(b2)));
    }
    json!({
        "error": b.error.as_deref().map_or(Value::Null, Value::from),
        "expected": fmt_rat(&b.expected),
        "feasible": b.feasible,
        "i": b.index,
        "lifted": lifted,
        "residual_valuations": residual_valuations,
        "seeds": b.seed_count,
        "valuation": bound_to_string(&b.valuation),
    })
}

pub fn fibre_to_json(rep: &FibreReport) -> Value {
    json!({
        "branches": rep.branches.iter().map(branch_to_json).collect::<Vec<_>>(),
        "claimed": rep.claimed,
        "gap": rep.gap,
        "total": rep.total,
    })
}

/// A fibre report as read back from JSON; lifted points are parsed (and so
/// validated) but kept alongside nothing else from the run.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedFibre {
    pub branches: Vec<ParsedBranch>,
    pub total: u64,
    pub claimed: u64,
    pub gap: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedBranch {
    pub index: u32,
    pub feasible: bool,
    pub valuation: String,
    pub expected: Rat,
    pub seeds: u64,
    pub lifted: Vec<(PuiseuxElement, PuiseuxElement)>,
    pub residual_valuations: Vec<String>,
    pub error: Option<String>,
}

impl ParsedFibre {
    pub fn to_json(&self) -> Value {
        let branches: Vec<Value> = self
            .branches
            .iter()
            .map(|b| {
                let lifted: Vec<Value> = b
                    .lifted
                    .iter()
                    .map(|(x, y)| json!({"x": puiseux_to_json(x), "y": puiseux_to_json(y)}))
                    .collect();
                json!({
                    "error": b.error.as_deref().map_or(Value::Null, Value::from),
                    "expected": fmt_rat(&b.expected),
                    "feasible": b.feasible,
                    "i": b.index,
                    "lifted": lifted,
                    "residual_valuations": b.residual_valuations,
                    "seeds": b.seeds,
                    "valuation": b.valuation.clone(),
                })
            })
            .collect();
        json!({
            "branches": branches,
            "claimed": self.claimed,
            "gap": self.gap,
            "total": self.total,
        })
    }
}

pub fn fibre_from_json(v: &Value, field: FieldSpec) -> Result<ParsedFibre> {
    let o = v
        .as_object()
        .ok_or_else(|| parse_err("a fibre report is an object", v))?;
    let mut branches = Vec::new();
    for b in o
        .get("branches")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("fibre report needs a \"branches\" array", v))?
    {
        let index = b
            .get("i")
            .and_then(Value::as_u64)
            .ok_or_else(|| parse_err("branch needs an index \"i\"", b))? as u32;
        let feasible = b
            .get("feasible")
            .and_then(Value::as_bool)
            .ok_or_else(|| parse_err("branch needs a boolean \"feasible\"", b))?;
        let valuation = b
            .get("valuation")
            .and_then(Value::as_str)
            .ok_or_else(|| parse_err("branch needs a \"valuation\" string", b))?
            .to_owned();
        let expected = parse_rat(
            b.get("expected")
                .and_then(Value::as_str)
                .ok_or_else(|| parse_err("branch needs an \"expected\" string", b))?,
        )?;
        let seeds = b
            .get("seeds")
            .and_then(Value::as_u64)
            .ok_or_else(|| parse_err("branch needs an integer \"seeds\"", b))?;
        let mut lifted = Vec::new();
        for p in b
            .get("lifted")
            .and_then(Value::as_array)
            .ok_or_else(|| parse_err("branch needs a \"lifted\" array", b))?
        {
            let x = p
                .get("x")
                .ok_or_else(|| parse_err("lifted point needs \"x\"", p))?;
            let y = p
                .get("y")
                .ok_or_else(|| parse_err("lifted point needs \"y\"", p))?;
            lifted.push((puiseux_from_json(x, field)?, puiseux_from_json(y, field)?));
        }
        let mut residual_valuations = Vec::new();
        for r in b
            .get("residual_valuations")
            .and_then(Value::as_array)
            .ok_or_else(|| parse_err("branch needs \"residual_valuations\"", b))?
        {
            residual_valuations.push(
                r.as_str()
                    .ok_or_else(|| parse_err("residual valuations are strings", r))?
                    .to_owned(),
            );
        }
        let error = match b.get("error") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => return Err(parse_err("\"error\" is a string or null", other)),
        };
        branches.push(ParsedBranch {
            index,
            feasible,
            valuation,
            expected,
            seeds,
            lifted,
            residual_valuations,
            error,
        });
    }
    let total = o
        .get("total")
        .and_then(Value::as_u64)
        .ok_or_else(|| parse_err("fibre report needs \"total\"", v))?;
    let claimed = o
        .get("claimed")
        .and_then(Value::as_u64)
        .ok_or_else(|| parse_err("fibre report needs \"claimed\"", v))?;
    let gap = o
        .get("gap")
        .and_then(Value::as_i64)
        .ok_or_else(|| parse_err("fibre report needs \"gap\"", v))?;
    Ok(ParsedFibre {
        branches,
        total,
        claimed,
        gap,
    })
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

/// A problem instance as read from disk. `level` defaults to 1, `budget` to
/// 10 and `floor`/`max_steps` to "let the driver decide".
#[derive(Debug, Clone)]
pub struct Instance {
    pub field: FieldSpec,
    pub f: LaurentSeries2<Scalar>,
    pub g: LaurentSeries2<Scalar>,
    pub w: Option<WPoly>,
    pub level: Rat,
    pub floor: Option<i64>,
    pub budget: Rat,
    pub max_steps: Option<u64>,
}

/// Command-line overrides applied while reading an instance. A `field`
/// override changes how coefficient literals are interpreted, so it must be
/// known before any series is parsed.
#[derive(Debug, Clone, Default)]
pub struct InstanceOverrides {
    pub field: Option<FieldSpec>,
    pub floor: Option<i64>,
    pub level: Option<Rat>,
    pub max_steps: Option<u64>,
}

pub fn instance_from_str(text: &str, over: &InstanceOverrides) -> Result<Instance> {
    let v: Value = serde_json::from_str(text)?;
    let o = v
        .as_object()
        .ok_or_else(|| parse_err("an instance is a JSON object", &v))?;
    for key in o.keys() {
        match key.as_str() {
            "field" | "f" | "g" | "w" | "level" | "floor" | "budget" | "max_steps" => {}
            other => {
                return Err(Error::Parse(format!("unknown instance key \"{other}\"")));
            }
        }
    }
    let field = match &over.field {
        Some(f) => *f,
        None => {
            let name = o
                .get("field")
                .and_then(Value::as_str)
                .ok_or_else(|| parse_err("instance needs a \"field\" name", &v))?;
            FieldSpec::from_str(name)?
        }
    };
    let f = series_from_json(
        o.get("f")
            .ok_or_else(|| parse_err("instance needs \"f\"", &v))?,
        field,
    )?;
    let g = series_from_json(
        o.get("g")
            .ok_or_else(|| parse_err("instance needs \"g\"", &v))?,
        field,
    )?;
    let w = match o.get("w") {
        None | Some(Value::Null) => None,
        Some(wv) => {
            let k_tilde = wv
                .get("k_tilde")
                .and_then(Value::as_u64)
                .ok_or_else(|| parse_err("a supplied w needs \"k_tilde\"", wv))?
                as u32;
            let terms = wv
                .get("terms")
                .ok_or_else(|| parse_err("a supplied w needs \"terms\"", wv))?;
            Some(wpoly_from_json(terms, k_tilde, field)?)
        }
    };
    let level = match (&over.level, o.get("level")) {
        (Some(l), _) => l.clone(),
        (None, Some(Value::String(s))) => parse_rat(s)?,
        (None, None | Some(Value::Null)) => Rat::from_integer(1.into()),
        (None, Some(other)) => return Err(parse_err("\"level\" is a rational string", other)),
    };
    if !level.is_positive() {
        return Err(Error::Parse(format!(
            "level must be positive, got {}",
            fmt_rat(&level)
        )));
    }
    let floor = over
        .floor
        .or_else(|| o.get("floor").and_then(Value::as_i64));
    let budget = match o.get("budget") {
        None | Some(Value::Null) => Rat::from_integer(10.into()),
        Some(Value::String(s)) => parse_rat(s)?,
        Some(other) => return Err(parse_err("\"budget\" is a rational string", other)),
    };
    if budget.is_negative() || budget.is_zero() {
        return Err(Error::Parse(format!(
            "budget must be positive, got {}",
            fmt_rat(&budget)
        )));
    }
    let max_steps = over
        .max_steps
        .or_else(|| o.get("max_steps").and_then(Value::as_u64));
    let mut inst = Instance {
        field,
        f,
        g,
        w,
        level,
        floor,
        budget,
        max_steps,
    };
    if let Some(fl) = inst.floor {
        if fl < inst.f.floor() || fl < inst.g.floor() {
            return Err(Error::Parse(format!(
                "requested floor {fl} is deeper than the stored truncations ({} and {}); \
                 terms below a stored floor are unknown",
                inst.f.floor(),
                inst.g.floor()
            )));
        }
        inst.f = inst.f.truncate_to(fl);
        inst.g = inst.g.truncate_to(fl);
    }
    Ok(inst)
}

// ---------------------------------------------------------------------------
// Canonical output
// ---------------------------------------------------------------------------

/// Canonical one-line rendering: compact separators, keys sorted (the value
/// type stores objects as ordered maps), trailing newline.
pub fn canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("report values contain no non-string keys");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(bytes);
    hex::encode(h.finalize())
}

/// Assemble the full run report. `distinctness` and `fibre` are `Null` when
/// the corresponding stage did not run.
pub fn run_report(
    reduction: Value,
    relations: Value,
    distinctness: Value,
    fibre: Value,
    input_digest: &str,
) -> Value {
    let mut o = Map::new();
    o.insert("distinctness".into(), distinctness);
    o.insert("fibre".into(), fibre);
    o.insert(
        "input_digest".into(),
        Value::String(format!("sha256:{input_digest}")),
    );
    o.insert("reduction".into(), reduction);
    o.insert("relations".into(), relations);
    o.insert("tool_version".into(), Value::String(TOOL_VERSION.into()));
    Value::Object(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rational_series(entries: &[((i64, i64), &str)], floor: i64) -> LaurentSeries2<Scalar> {
        let entries = entries
            .iter()
            .map(|((i, j), c)| {
                (
                    Exponent2::new(*i, *j),
                    Scalar::from_rat(parse_rat(c).unwrap()),
                )
            })
            .collect();
        LaurentSeries2::from_terms(FieldSpec::Rational, entries, floor).unwrap()
    }

    #[test]
    fn scalar_literals_round_trip() {
        let q = Scalar::from_rat(parse_rat("-3/2").unwrap());
        assert_eq!(scalar_to_json(&q), Value::String("-3/2".into()));
        assert_eq!(
            scalar_from_json(&scalar_to_json(&q), FieldSpec::Rational).unwrap(),
            q
        );

        let z = crate::scalars::zeta_power(3, 1);
        let v = scalar_to_json(&z);
        assert_eq!(v["order"], 3);
        let back = scalar_from_json(&v, FieldSpec::Cyclotomic(3)).unwrap();
        assert_eq!(back, z);
        // zeta_3^3 = 1 collapses to the rational form on re-serialization.
        let one = scalar_from_json(
            &json!({"coeffs": ["0", "0", "0", "1"], "order": 3}),
            FieldSpec::Cyclotomic(3),
        )
        .unwrap();
        assert!(matches!(one, Scalar::Rational(_)));
        assert!(one.is_one());
        // reading an order-3 literal in a rational instance is refused
        assert!(scalar_from_json(&v, FieldSpec::Rational).is_err());
    }

    #[test]
    fn series_round_trip_is_exact() {
        let s = rational_series(&[((2, 4), "1"), ((1, 0), "-5/3")], -15);
        let v = series_to_json(&s);
        // leading term first
        assert_eq!(v["terms"][0]["i"], 2);
        assert_eq!(series_from_json(&v, FieldSpec::Rational).unwrap(), s);
    }

    #[test]
    fn puiseux_round_trip_checks_the_ramification() {
        let p = PuiseuxElement::from_terms(
            vec![
                (parse_rat("3/2").unwrap(), Scalar::from_int(1)),
                (
                    parse_rat("-1").unwrap(),
                    Scalar::from_rat(parse_rat("5/4").unwrap()),
                ),
            ],
            Some(parse_rat("-10").unwrap()),
        )
        .unwrap();
        let v = puiseux_to_json(&p);
        assert_eq!(v["D"], 2);
        assert_eq!(v["terms"][0]["q"], "3/2");
        assert_eq!(puiseux_from_json(&v, FieldSpec::Rational).unwrap(), p);

        let mut bad = v.clone();
        bad["D"] = Value::from(4);
        assert!(puiseux_from_json(&bad, FieldSpec::Rational).is_err());
    }

    #[test]
    fn reduction_report_shape_matches_the_contract() {
        let f = rational_series(
            &[
                ((3, 6), "2"),
                ((2, 2), "3"),
                ((1, -2), "3/4"),
                ((-1, -3), "5"),
                ((0, -6), "-1/8"),
                ((-1, -10), "3/64"),
            ],
            -12,
        );
        let g = rational_series(&[((2, 4), "1"), ((1, 0), "1")], -15);
        let red = crate::reduction::reduce_full(&f, &g).unwrap();
        let v = reduction_to_json(&red);
        assert_eq!(v["status"], "ReachedTarget");
        assert_eq!(v["W"], json!([{"c": "2", "exp": 3}]));
        assert_eq!(v["d"], "5");
        assert_eq!(v["residual_leading"], json!({"i": -1, "j": -3}));
        let parsed = reduction_from_json(&v, FieldSpec::Rational).unwrap();
        assert_eq!(parsed.to_json(), v);
        let text = canonical_string(&v);
        assert_eq!(
            text,
            canonical_string(&serde_json::from_str(text.trim_end()).unwrap())
        );
    }

    #[test]
    fn instance_reading_applies_overrides_and_validates() {
        let text = r#"{
            "field": "rational",
            "f": {"floor": -12, "terms": [{"i": 1, "j": 1, "c": "1"}]},
            "g": {"floor": -15, "terms": [{"i": 2, "j": 4, "c": "1"}, {"i": 1, "j": 0, "c": "1"}]},
            "level": "2/3",
            "budget": "7"
        }"#;
        let inst = instance_from_str(text, &InstanceOverrides::default()).unwrap();
        assert_eq!(fmt_rat(&inst.level), "2/3");
        assert_eq!(fmt_rat(&inst.budget), "7");
        assert_eq!(inst.floor, None);

        let over = InstanceOverrides {
            floor: Some(-9),
            ..Default::default()
        };
        let shallower = instance_from_str(text, &over).unwrap();
        assert_eq!(shallower.f.floor(), -9);
        assert_eq!(shallower.g.floor(), -9);

        let deeper = InstanceOverrides {
            floor: Some(-20),
            ..Default::default()
        };
        assert!(instance_from_str(text, &deeper).is_err());

        assert!(
            instance_from_str("{\"field\": \"rational\"}", &InstanceOverrides::default()).is_err()
        );
        let syntactic = instance_from_str("{not json", &InstanceOverrides::default());
        let msg = format!("{}", syntactic.unwrap_err());
        assert!(
            msg.contains("line") && msg.contains("column"),
            "diagnostic was: {msg}"
        );
    }

    #[test]
    fn digests_are_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
