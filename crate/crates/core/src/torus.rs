//! Fibre counting over a valuative torus level. A point of level s is a pair
//! (x, y) of Puiseux elements with v(x) = v(y) = -s. The solver takes the
//! output of degree reduction (the polynomial W, the residual monomial
//! d X^(1-n1) Y^(1-n2) and the root index k), splits the fibre equations into
//! k branches indexed by k-th roots of unity, and for each feasible branch
//! normalizes to the unit torus, enumerates seeds of the leading monomial
//! system through a Smith decomposition, and lifts every seed by a Newton
//! iteration in the valuation ring. Magnitudes are never materialized; every
//! decision is made on exact valuations or certified truncation bounds.

use num_rational::BigRational as Rat;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::laurent2::{
    jacobian_det, series_kth_root, series_sub, torus_substitute, Exponent2, LaurentSeries2,
    LeadingForm,
};
use crate::par::try_map_ordered;
use crate::poly4::{clear_denominators, torus_constraints, PolySystem4};
use crate::puiseux::{
    pz_add, pz_all_kth_roots, pz_eq_up_to_common_floor, pz_inv, pz_mul, pz_pow, pz_sub,
    pz_valuation, PuiseuxElement, ValuationBound, ValuationLevel,
};
use crate::reduction::{rescale_w, ReductionResult, ReductionStatus, WPoly};
use crate::scalars::{field_inv, field_pow, primitive_root_of_unity, rat_int, FieldSpec, Scalar};
use crate::snf::{mat_mul, smith_normal_form};

/// A torus level together with a fixed base point on it. Branch roots are
/// powers of `epsilon`, a primitive k-th root of unity in the working field.
#[derive(Debug, Clone)]
pub struct TorusSpec {
    pub field: FieldSpec,
    /// The level s > 0; points on the torus have v(x) = v(y) = -s.
    pub level: ValuationLevel,
    pub x1: PuiseuxElement,
    pub y1: PuiseuxElement,
    pub epsilon: Scalar,
    pub k: u32,
}

impl TorusSpec {
    /// Base point with arbitrary coordinates of common valuation -s.
    pub fn new(field: FieldSpec, x1: PuiseuxElement, y1: PuiseuxElement, k: u32) -> Result<Self> {
        let ValuationBound::Exact(vx) = pz_valuation(&x1) else {
            return Err(Error::TorusError(
                "base point coordinate has no visible leading term".into(),
            ));
        };
        let ValuationBound::Exact(vy) = pz_valuation(&y1) else {
            return Err(Error::TorusError(
                "base point coordinate has no visible leading term".into(),
            ));
        };
        if vx != vy {
            return Err(Error::TorusError(format!(
                "base point valuations differ: v(x1) = {vx}, v(y1) = {vy}"
            )));
        }
        let s = -vx;
        if !s.is_positive() {
            return Err(Error::TorusError(format!(
                "torus level must be positive, got s = {s}"
            )));
        }
        let epsilon = primitive_root_of_unity(field, k)?;
        Ok(TorusSpec {
            field,
            level: ValuationLevel(s),
            x1,
            y1,
            epsilon,
            k,
        })
    }

    /// The symmetric base point x1 = y1 = t^s.
    pub fn symmetric(field: FieldSpec, s: Rat, k: u32) -> Result<Self> {
        let p = PuiseuxElement::t_power(s);
        Self::new(field, p.clone(), p, k)
    }

    pub fn s(&self) -> &Rat {
        &self.level.0
    }
}

/// Exact valuation test for one branch: the branch carries solutions exactly
/// when v(alpha0 - W(eps_i^-1 beta0)) matches the valuation forced by the
/// residual monomial.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    /// What is known about v(alpha0 - W(eps_i^-1 beta0)).
    pub valuation: ValuationBound,
    /// The valuation a solvable branch must produce: -s * deg(residual).
    pub expected: Rat,
}

/// Decides branch feasibility from valuations alone.
///
/// `w` must already be indexed by the branch count k (one exponent per power
/// of the k-th root of g), and `residual_leading` is the leading form of the
/// reduction residual, whose degree is 2 - n.
pub fn branch_feasibility(
    alpha0: &PuiseuxElement,
    beta0: &PuiseuxElement,
    w: &WPoly,
    eps_i: &Scalar,
    spec: &TorusSpec,
    residual_leading: &LeadingForm<Scalar>,
) -> Result<FeasibilityVerdict> {
    let s = spec.s();
    let n = 2 - residual_leading.degree;
    let k = w.k_tilde() as i64;
    if spec.k as i64 != k {
        return Err(Error::Precondition(format!(
            "W is indexed by {k} but the torus splits into {} branches",
            spec.k
        )));
    }
    let want_beta = -(Rat::from_integer(n.into()) / rat_int(k)) * s;
    match pz_valuation(beta0) {
        ValuationBound::Exact(v) if v == want_beta => {}
        other => {
            return Err(Error::ValuationInconsistency(format!(
                "v(beta0) = {other}, expected {want_beta}"
            )))
        }
    }
    let arg = beta0.scale(&field_inv(eps_i)?)?;
    let diff = pz_sub(alpha0, &w.evaluate_puiseux(&arg)?)?;
    let expected = -Rat::from_integer(residual_leading.degree.into()) * s;
    let bound = pz_valuation(&diff);
    let feasible = match &bound {
        ValuationBound::Exact(v) => *v == expected,
        ValuationBound::Infinite => false,
        ValuationBound::Above(b) => {
            if *b >= expected {
                false
            } else {
                return Err(Error::FloorTooShallow(format!(
                    "feasibility undecidable: only v > {b} is certified but the test \
                     valuation is {expected}"
                )));
            }
        }
    };
    Ok(FeasibilityVerdict {
        feasible,
        valuation: bound,
        expected,
    })
}

/// The pair of fibre equations transported to the unit torus, with tails in
/// the maximal ideal. Equation 1 is X^(1-n1) Y^(1-n2) (1 + ztail) - alpha_bar,
/// equation 2 is X^(n1/k) Y^(n2/k) (1 + wtail) - beta_bar, and both right-hand
/// sides are units of the valuation ring.
#[derive(Debug, Clone)]
pub struct HenselSystem {
    pub f1: LaurentSeries2<PuiseuxElement>,
    pub f2: LaurentSeries2<PuiseuxElement>,
    /// Cached determinant of the Jacobian of (f1, f2) in X, Y.
    pub jacobian: LaurentSeries2<PuiseuxElement>,
    pub alpha_bar: PuiseuxElement,
    pub beta_bar: PuiseuxElement,
    pub n1: i64,
    pub n2: i64,
    pub k: u32,
    pub s: Rat,
}

impl HenselSystem {
    /// Total degree of the leading monomial of equation 1: 2 - n.
    pub fn base1(&self) -> i64 {
        2 - (self.n1 + self.n2)
    }

    /// Total degree of the leading monomial of equation 2: n / k.
    pub fn base2(&self) -> i64 {
        (self.n1 + self.n2) / self.k as i64
    }

    pub fn eval_f1(&self, x: &PuiseuxElement, y: &PuiseuxElement) -> Result<PuiseuxElement> {
        eval_unit_series(&self.f1, x, y, &self.s, self.base1())
    }

    pub fn eval_f2(&self, x: &PuiseuxElement, y: &PuiseuxElement) -> Result<PuiseuxElement> {
        eval_unit_series(&self.f2, x, y, &self.s, self.base2())
    }

    pub fn eval_jacobian(&self, x: &PuiseuxElement, y: &PuiseuxElement) -> Result<PuiseuxElement> {
        // Differentiating drops one from each base degree.
        eval_unit_series(
            &self.jacobian,
            x,
            y,
            &self.s,
            self.base1() + self.base2() - 2,
        )
    }

    /// Checks the restricted-series shape: unit leading coefficients, unit
    /// right-hand sides, and tail coefficient valuations on or above the ramp
    /// s * (base - total). The constant slot holds the transported right-hand
    /// side and is checked for unit valuation instead.
    pub fn validate(&self) -> Result<()> {
        for (label, rhs) in [("alpha_bar", &self.alpha_bar), ("beta_bar", &self.beta_bar)] {
            match pz_valuation(rhs) {
                ValuationBound::Exact(v) if v.is_zero() => {}
                other => {
                    return Err(Error::ValuationInconsistency(format!(
                        "{label} must be a unit, got v = {other}"
                    )))
                }
            }
        }
        let origin = Exponent2::new(0, 0);
        for (label, series, base, lead) in [
            (
                "equation 1",
                &self.f1,
                self.base1(),
                Exponent2::new(1 - self.n1, 1 - self.n2),
            ),
            (
                "equation 2",
                &self.f2,
                self.base2(),
                Exponent2::new(self.n1 / self.k as i64, self.n2 / self.k as i64),
            ),
        ] {
            if lead == origin {
                return Err(Error::Precondition(
                    "leading monomial coincides with the constant slot".into(),
                ));
            }
            let lead_coeff = series.coeff(lead);
            let dev = pz_sub(&lead_coeff, &PuiseuxElement::one())?;
            if ValuationLevel(Rat::zero()).contains_strictly(&pz_valuation(&dev)) != Some(true) {
                return Err(Error::ValuationInconsistency(format!(
                    "{label}: leading coefficient is not 1 modulo the maximal ideal"
                )));
            }
            for (exp, coeff) in series.terms() {
                let v = pz_valuation(coeff);
                if *exp == origin {
                    match &v {
                        ValuationBound::Exact(q) if q.is_zero() => continue,
                        other => {
                            return Err(Error::ValuationInconsistency(format!(
                                "{label}: transported right-hand side has v = {other}, \
                                 expected 0"
                            )))
                        }
                    }
                }
                let ramp = Rat::from_integer((base - exp.total()).into()) * &self.s;
                if ValuationLevel(ramp.clone()).contains(&v) != Some(true) {
                    return Err(Error::ValuationInconsistency(format!(
                        "{label}: coefficient at {exp} has v = {v}, below the ramp {ramp}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Evaluates a series with Puiseux coefficients at a point with unit
/// coordinates. Terms below the series floor are unknown; their coefficients
/// sit strictly above the ramp, so the value is certified down to exponent
/// -s * (base_total - floor).
pub fn eval_unit_series(
    series: &LaurentSeries2<PuiseuxElement>,
    x: &PuiseuxElement,
    y: &PuiseuxElement,
    s: &Rat,
    base_total: i64,
) -> Result<PuiseuxElement> {
    let mut acc = PuiseuxElement::zero();
    for (exp, coeff) in series.terms() {
        let point = pz_mul(&pz_pow(x, exp.i)?, &pz_pow(y, exp.j)?)?;
        acc = pz_add(&acc, &pz_mul(coeff, &point)?)?;
    }
    let tail = -(Rat::from_integer((base_total - series.floor()).into()) * s);
    Ok(acc.truncate_to(tail))
}

/// Evaluates a scalar-coefficient series at a point of level s (both
/// coordinates of valuation -s). Dropped terms have total degree below the
/// series floor, so the value is certified down to exponent s * floor.
pub fn eval_scalar_series(
    f: &LaurentSeries2<Scalar>,
    x: &PuiseuxElement,
    y: &PuiseuxElement,
    s: &Rat,
) -> Result<PuiseuxElement> {
    let mut acc = PuiseuxElement::zero();
    for (exp, coeff) in f.terms() {
        let point = pz_mul(&pz_pow(x, exp.i)?, &pz_pow(y, exp.j)?)?;
        acc = pz_add(&acc, &point.scale(coeff)?)?;
    }
    Ok(acc.truncate_to(Rat::from_integer(f.floor().into()) * s))
}

/// Transports one branch of the fibre equations to the unit torus.
///
/// The substitution X -> x1 X, Y -> y1 Y moves the base point to (1, 1); each
/// equation is then divided by the full leading monomial value so that its
/// leading coefficient is exactly 1. `rhs1` and `rhs2` are the branch
/// right-hand sides before normalization: alpha0 - W(eps^-i beta0) for the
/// residual equation and eps^-i beta0 for the root equation.
pub fn normalize_to_unit_torus(
    residual: &LaurentSeries2<Scalar>,
    groot: &LaurentSeries2<Scalar>,
    spec: &TorusSpec,
    d: &Scalar,
    rhs1: &PuiseuxElement,
    rhs2: &PuiseuxElement,
) -> Result<HenselSystem> {
    let (e1, c1) = residual.leading_form()?.monomial()?;
    let (e2, c2) = groot.leading_form()?.monomial()?;
    if c1 != *d {
        return Err(Error::Precondition(format!(
            "residual leading coefficient {c1} does not match d = {d}"
        )));
    }
    let k = spec.k;
    let n1 = 1 - e1.i;
    let n2 = 1 - e1.j;
    if e2.i * k as i64 != n1 || e2.j * k as i64 != n2 {
        return Err(Error::Precondition(format!(
            "root leading exponent ({}, {}) is not ({n1}, {n2}) / {k}",
            e2.i, e2.j
        )));
    }
    if n1 == n2 {
        return Err(Error::Precondition(
            "leading exponents are equal; the monomial system is degenerate".into(),
        ));
    }

    let sub1 = torus_substitute(residual, &spec.x1, &spec.y1)?;
    let sub2 = torus_substitute(groot, &spec.x1, &spec.y1)?;

    let den1 = pz_mul(&pz_pow(&spec.x1, e1.i)?, &pz_pow(&spec.y1, e1.j)?)?.scale(&c1)?;
    let den2 = pz_mul(&pz_pow(&spec.x1, e2.i)?, &pz_pow(&spec.y1, e2.j)?)?.scale(&c2)?;
    let inv1 = pz_inv(&den1)?;
    let inv2 = pz_inv(&den2)?;

    let alpha_bar = pz_mul(rhs1, &inv1)?;
    let beta_bar = pz_mul(rhs2, &inv2)?;

    let lhs1 = sub1.scale(&inv1)?;
    let lhs2 = sub2.scale(&inv2)?;
    let f1 = series_sub(
        &lhs1,
        &LaurentSeries2::constant(lhs1.field(), alpha_bar.clone(), lhs1.floor()),
    )?;
    let f2 = series_sub(
        &lhs2,
        &LaurentSeries2::constant(lhs2.field(), beta_bar.clone(), lhs2.floor()),
    )?;
    let jacobian = jacobian_det(&f1, &f2)?;

    let system = HenselSystem {
        f1,
        f2,
        jacobian,
        alpha_bar,
        beta_bar,
        n1,
        n2,
        k,
        s: spec.s().clone(),
    };
    system.validate()?;
    Ok(system)
}

/// Solves the leading monomial system
///   x^(1-n1) y^(1-n2) = alpha_bar,  x^(n1/k) y^(n2/k) = beta_bar
/// on the unit torus. A Smith decomposition U M V = D of the exponent matrix
/// turns the system into two independent root extractions; the |n1 - n2| / k
/// solutions are cross-checked against the closed form
///   y^((n1-n2)/k) = beta_bar^(n1-1) alpha_bar^(n1/k),  x = alpha_bar beta_bar^k / y.
pub fn solve_reduced_monomial(
    n1: i64,
    n2: i64,
    k: u32,
    alpha_bar: &PuiseuxElement,
    beta_bar: &PuiseuxElement,
    field: FieldSpec,
) -> Result<Vec<(PuiseuxElement, PuiseuxElement)>> {
    if k == 0 || n1 % k as i64 != 0 || n2 % k as i64 != 0 {
        return Err(Error::DivisibilityError { k, n1, n2 });
    }
    if n1 == n2 {
        return Err(Error::Precondition(
            "exponent matrix is singular when n1 = n2".into(),
        ));
    }
    for (label, u) in [("alpha_bar", alpha_bar), ("beta_bar", beta_bar)] {
        match pz_valuation(u) {
            ValuationBound::Exact(v) if v.is_zero() => {}
            other => {
                return Err(Error::Precondition(format!(
                    "{label} must be a unit, got v = {other}"
                )))
            }
        }
    }

    let ki = k as i64;
    let m = vec![vec![1 - n1, 1 - n2], vec![n1 / ki, n2 / ki]];
    let dec = smith_normal_form(&m);
    let check = mat_mul(&mat_mul(&dec.u, &m), &dec.v);
    if check != dec.d {
        return Err(Error::Internal(
            "Smith decomposition does not recompose".into(),
        ));
    }
    let d0 = dec.d[0][0];
    let d1 = dec.d[1][1];
    if d0 <= 0 || d1 <= 0 {
        return Err(Error::Internal(format!(
            "Smith diagonal must be positive for a nonsingular system, got ({d0}, {d1})"
        )));
    }

    // gamma_t = alpha_bar^U[t][0] beta_bar^U[t][1]; each w_t ranges over the
    // d_t-th roots, and (x, y) = (p^V00 q^V01, p^V10 q^V11).
    let gamma = |t: usize| -> Result<PuiseuxElement> {
        pz_mul(
            &pz_pow(alpha_bar, dec.u[t][0])?,
            &pz_pow(beta_bar, dec.u[t][1])?,
        )
    };
    let roots0 = pz_all_kth_roots(&gamma(0)?, d0 as u32, field)?;
    let roots1 = pz_all_kth_roots(&gamma(1)?, d1 as u32, field)?;
    let mut solutions = Vec::with_capacity(roots0.len() * roots1.len());
    for p in &roots0 {
        for q in &roots1 {
            let x = pz_mul(&pz_pow(p, dec.v[0][0])?, &pz_pow(q, dec.v[0][1])?)?;
            let y = pz_mul(&pz_pow(p, dec.v[1][0])?, &pz_pow(q, dec.v[1][1])?)?;
            let eq1 = pz_mul(&pz_pow(&x, 1 - n1)?, &pz_pow(&y, 1 - n2)?)?;
            let eq2 = pz_mul(&pz_pow(&x, n1 / ki)?, &pz_pow(&y, n2 / ki)?)?;
            if !pz_eq_up_to_common_floor(&eq1, alpha_bar)
                || !pz_eq_up_to_common_floor(&eq2, beta_bar)
            {
                return Err(Error::Internal(
                    "monomial solution fails its defining equations".into(),
                ));
            }
            solutions.push((x, y));
        }
    }

    let expected = ((n1 - n2).unsigned_abs() / k as u64) as usize;
    if solutions.len() != expected {
        return Err(Error::Internal(format!(
            "expected {expected} monomial solutions, enumerated {}",
            solutions.len()
        )));
    }
    for a in 0..solutions.len() {
        for b in (a + 1)..solutions.len() {
            if pz_eq_up_to_common_floor(&solutions[a].0, &solutions[b].0)
                && pz_eq_up_to_common_floor(&solutions[a].1, &solutions[b].1)
            {
                return Err(Error::Internal("monomial solutions collide".into()));
            }
        }
    }

    // Independent closed form for the same solution set.
    let p = (n1 - n2) / ki;
    let rhs_y = pz_mul(&pz_pow(beta_bar, n1 - 1)?, &pz_pow(alpha_bar, n1 / ki)?)?;
    let ys = if p > 0 {
        pz_all_kth_roots(&rhs_y, p as u32, field)?
    } else {
        pz_all_kth_roots(&pz_inv(&rhs_y)?, (-p) as u32, field)?
    };
    let scale = pz_mul(alpha_bar, &pz_pow(beta_bar, ki)?)?;
    let mut closed: Vec<(PuiseuxElement, PuiseuxElement)> = Vec::with_capacity(ys.len());
    for y in ys {
        let x = pz_mul(&scale, &pz_inv(&y)?)?;
        closed.push((x, y));
    }
    let mut unmatched: Vec<usize> = (0..closed.len()).collect();
    for (x, y) in &solutions {
        let pos = unmatched.iter().position(|&c| {
            pz_eq_up_to_common_floor(x, &closed[c].0) && pz_eq_up_to_common_floor(y, &closed[c].1)
        });
        match pos {
            Some(idx) => {
                unmatched.remove(idx);
            }
            None => {
                return Err(Error::Internal(
                    "closed-form cross-check disagrees with the Smith enumeration".into(),
                ))
            }
        }
    }
    if !unmatched.is_empty() {
        return Err(Error::Internal(
            "closed-form cross-check produced extra solutions".into(),
        ));
    }

    Ok(solutions)
}

/// Iteration schedule for the lift. Both converge to the same truncated
/// output; the frozen variant reuses the seed Jacobian every step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftSchedule {
    NewtonFull,
    FrozenJacobian,
}

#[derive(Debug, Clone)]
pub struct LiftSettings {
    /// Stop once both residual valuations are certified strictly above this.
    pub budget: Rat,
    pub schedule: LiftSchedule,
    pub max_iterations: u32,
}

impl Default for LiftSettings {
    fn default() -> Self {
        LiftSettings {
            budget: rat_int(10),
            schedule: LiftSchedule::NewtonFull,
            max_iterations: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LiftOutcome {
    pub x: PuiseuxElement,
    pub y: PuiseuxElement,
    /// Final certified residual bounds for the two equations.
    pub residual_bounds: (ValuationBound, ValuationBound),
    /// Residual bounds per iteration, starting with the seed.
    pub log: Vec<(ValuationBound, ValuationBound)>,
}

fn bound_value(b: &ValuationBound) -> Option<Rat> {
    match b {
        ValuationBound::Exact(v) => Some(v.clone()),
        ValuationBound::Above(v) => Some(v.clone()),
        ValuationBound::Infinite => None,
    }
}

/// True when `next` certifies strictly more than `prev` (+inf tops the order).
fn bound_improved(prev: &ValuationBound, next: &ValuationBound) -> bool {
    match (bound_value(prev), bound_value(next)) {
        (Some(a), Some(b)) => b > a,
        (Some(_), None) => true,
        (None, _) => false,
    }
}

/// Newton iteration in the valuation ring. The seed must satisfy both
/// equations modulo the maximal ideal and make the Jacobian a unit; each step
/// at least doubles the residual valuations until the floor budget is met.
pub fn hensel_lift(
    system: &HenselSystem,
    seed: (&PuiseuxElement, &PuiseuxElement),
    settings: &LiftSettings,
) -> Result<LiftOutcome> {
    let zero_level = ValuationLevel(Rat::zero());
    let budget = ValuationLevel(settings.budget.clone());

    let mut x = seed.0.clone();
    let mut y = seed.1.clone();
    let mut r1 = system.eval_f1(&x, &y)?;
    let mut r2 = system.eval_f2(&x, &y)?;
    let mut b1 = pz_valuation(&r1);
    let mut b2 = pz_valuation(&r2);

    for (label, b) in [("equation 1", &b1), ("equation 2", &b2)] {
        match zero_level.contains_strictly(b) {
            Some(true) => {}
            Some(false) => {
                return Err(Error::SeedRejected(format!(
                    "{label} residual has v = {b}, not in the maximal ideal"
                )))
            }
            None => {
                return Err(Error::FloorTooShallow(format!(
                    "{label} seed residual bound {b} cannot certify membership in the \
                     maximal ideal"
                )))
            }
        }
    }
    let jac_seed = system.eval_jacobian(&x, &y)?;
    match pz_valuation(&jac_seed) {
        ValuationBound::Exact(v) if v.is_zero() => {}
        other => {
            return Err(Error::LiftPrecondition(format!(
                "Jacobian at the seed must be a unit, got v = {other}"
            )))
        }
    }

    let frozen = if settings.schedule == LiftSchedule::FrozenJacobian {
        Some(partials_at(system, &x, &y)?)
    } else {
        None
    };

    let mut log = vec![(b1.clone(), b2.clone())];
    let mut iterations = 0u32;
    loop {
        let done = budget.contains_strictly(&b1) == Some(true)
            && budget.contains_strictly(&b2) == Some(true);
        if done {
            return Ok(LiftOutcome {
                x,
                y,
                residual_bounds: (b1, b2),
                log,
            });
        }
        if iterations >= settings.max_iterations {
            return Err(Error::ValuationInconsistency(format!(
                "no convergence within {} iterations: bounds ({b1}, {b2})",
                settings.max_iterations
            )));
        }
        iterations += 1;

        let (j11, j12, j21, j22) = match &frozen {
            Some(p) => p.clone(),
            None => partials_at(system, &x, &y)?,
        };
        let det = pz_sub(&pz_mul(&j11, &j22)?, &pz_mul(&j12, &j21)?)?;
        match pz_valuation(&det) {
            ValuationBound::Exact(v) if v.is_zero() => {}
            other => {
                return Err(Error::LiftPrecondition(format!(
                    "Jacobian degenerated during the iteration: v(det) = {other}"
                )))
            }
        }
        let det_inv = pz_inv(&det)?;
        let dx = pz_mul(&pz_sub(&pz_mul(&j22, &r1)?, &pz_mul(&j12, &r2)?)?, &det_inv)?;
        let dy = pz_mul(&pz_sub(&pz_mul(&j11, &r2)?, &pz_mul(&j21, &r1)?)?, &det_inv)?;
        x = pz_sub(&x, &dx)?;
        y = pz_sub(&y, &dy)?;

        r1 = system.eval_f1(&x, &y)?;
        r2 = system.eval_f2(&x, &y)?;
        let n1 = pz_valuation(&r1);
        let n2 = pz_valuation(&r2);
        let progressed = bound_improved(&b1, &n1) || bound_improved(&b2, &n2);
        let capped =
            matches!(n1, ValuationBound::Above(_)) || matches!(n2, ValuationBound::Above(_));
        if !progressed {
            return Err(if capped {
                Error::FloorTooShallow(format!(
                    "truncation floors certify only ({n1}, {n2}); cannot reach the \
                     budget {}",
                    settings.budget
                ))
            } else {
                Error::ValuationInconsistency(format!(
                    "lift stalled with residual bounds ({n1}, {n2})"
                ))
            });
        }
        b1 = n1;
        b2 = n2;
        log.push((b1.clone(), b2.clone()));
    }
}

fn partials_at(
    system: &HenselSystem,
    x: &PuiseuxElement,
    y: &PuiseuxElement,
) -> Result<(
    PuiseuxElement,
    PuiseuxElement,
    PuiseuxElement,
    PuiseuxElement,
)> {
    let b1 = system.base1();
    let b2 = system.base2();
    let j11 = eval_unit_series(&system.f1.derivative(0), x, y, &system.s, b1 - 1)?;
    let j12 = eval_unit_series(&system.f1.derivative(1), x, y, &system.s, b1 - 1)?;
    let j21 = eval_unit_series(&system.f2.derivative(0), x, y, &system.s, b2 - 1)?;
    let j22 = eval_unit_series(&system.f2.derivative(1), x, y, &system.s, b2 - 1)?;
    Ok((j11, j12, j21, j22))
}

/// Clears denominators of both equations and appends the torus constraints
/// UX - 1 and VY - 1: an ordinary polynomial system with the same solutions,
/// used to verify lifted points along an independent route.
pub fn laurent_to_polynomial_system(system: &HenselSystem) -> PolySystem4 {
    let p1 = clear_denominators(&system.f1, &system.s, system.base1());
    let p2 = clear_denominators(&system.f2, &system.s, system.base2());
    let [c1, c2] = torus_constraints();
    PolySystem4 {
        equations: vec![p1, p2, c1, c2],
    }
}

/// Maps a unit-torus point back to the source torus: (x1 X, y1 Y).
pub fn map_to_source_torus(
    spec: &TorusSpec,
    x: &PuiseuxElement,
    y: &PuiseuxElement,
) -> Result<(PuiseuxElement, PuiseuxElement)> {
    Ok((pz_mul(&spec.x1, x)?, pz_mul(&spec.y1, y)?))
}

/// Everything recorded for one branch. Failures during normalization or
/// lifting are captured here instead of aborting the whole count.
#[derive(Debug, Clone)]
pub struct BranchReport {
    pub index: u32,
    pub feasible: bool,
    /// v(alpha0 - W(eps^-i beta0)) as certified.
    pub valuation: ValuationBound,
    pub expected: Rat,
    pub seed_count: usize,
    /// Lifted solutions in source-torus coordinates.
    pub lifted: Vec<(PuiseuxElement, PuiseuxElement)>,
    /// Certified residual bounds per lifted solution.
    pub residual_bounds: Vec<(ValuationBound, ValuationBound)>,
    pub error: Option<String>,
}

/// The counting result: per-branch reports, the number of solutions found on
/// the level, the count claimed by the leading-term heuristic (|n1 - n2|),
/// and the gap between them.
#[derive(Debug, Clone)]
pub struct FibreReport {
    pub branches: Vec<BranchReport>,
    pub total: usize,
    pub claimed: u64,
    pub gap: i64,
}

pub fn count_fibre(
    f: &LaurentSeries2<Scalar>,
    g: &LaurentSeries2<Scalar>,
    red: &ReductionResult,
    spec: &TorusSpec,
) -> Result<FibreReport> {
    count_fibre_with(f, g, red, spec, &LiftSettings::default())
}

pub fn count_fibre_with(
    f: &LaurentSeries2<Scalar>,
    g: &LaurentSeries2<Scalar>,
    red: &ReductionResult,
    spec: &TorusSpec,
    settings: &LiftSettings,
) -> Result<FibreReport> {
    if red.status != ReductionStatus::ReachedTarget {
        return Err(Error::Precondition(format!(
            "counting requires a reduction that reached its target, got status `{}`",
            red.status.as_str()
        )));
    }
    let d = red
        .d
        .clone()
        .ok_or_else(|| Error::Precondition("residual is not a single monomial".into()))?;
    let residual_leading = red
        .residual_leading
        .clone()
        .ok_or_else(|| Error::Precondition("reduction recorded no residual leading form".into()))?;
    let k = red.k;
    if spec.k != k {
        return Err(Error::Precondition(format!(
            "torus splits into {} branches but the reduction root index is {k}",
            spec.k
        )));
    }

    let s = spec.s();
    let groot = series_kth_root(g, k)?;
    let alpha0 = eval_scalar_series(f, &spec.x1, &spec.y1, s)?;
    let beta0 = eval_scalar_series(&groot, &spec.x1, &spec.y1, s)?;

    let m = f.degree().ok_or(Error::NoLeadingForm)?;
    let want_alpha = -Rat::from_integer(m.into()) * s;
    match pz_valuation(&alpha0) {
        ValuationBound::Exact(v) if v == want_alpha => {}
        other => {
            return Err(Error::ValuationInconsistency(format!(
                "v(alpha0) = {other}, expected {want_alpha}"
            )))
        }
    }

    let w = rescale_w(&red.w, k)?;

    let indices: Vec<u32> = (0..k).collect();
    let branches = try_map_ordered(indices, |i| {
        Ok(run_branch(
            i,
            red,
            spec,
            settings,
            &groot,
            &alpha0,
            &beta0,
            &w,
            &d,
            &residual_leading,
        ))
    })?;

    let mut lifted_all: Vec<&(PuiseuxElement, PuiseuxElement)> = Vec::new();
    for b in &branches {
        for sol in &b.lifted {
            lifted_all.push(sol);
        }
    }
    for a in 0..lifted_all.len() {
        for b in (a + 1)..lifted_all.len() {
            if pz_eq_up_to_common_floor(&lifted_all[a].0, &lifted_all[b].0)
                && pz_eq_up_to_common_floor(&lifted_all[a].1, &lifted_all[b].1)
            {
                return Err(Error::Internal(
                    "two branches produced the same lifted solution".into(),
                ));
            }
        }
    }

    let total = lifted_all.len();
    let claimed = (red.n1 - red.n2).unsigned_abs();
    let gap = claimed as i64 - total as i64;
    Ok(FibreReport {
        branches,
        total,
        claimed,
        gap,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_branch(
    i: u32,
    red: &ReductionResult,
    spec: &TorusSpec,
    settings: &LiftSettings,
    groot: &LaurentSeries2<Scalar>,
    alpha0: &PuiseuxElement,
    beta0: &PuiseuxElement,
    w: &WPoly,
    d: &Scalar,
    residual_leading: &LeadingForm<Scalar>,
) -> BranchReport {
    let mut report = BranchReport {
        index: i,
        feasible: false,
        valuation: ValuationBound::Infinite,
        expected: Rat::zero(),
        seed_count: 0,
        lifted: Vec::new(),
        residual_bounds: Vec::new(),
        error: None,
    };
    let mut inner = || -> Result<()> {
        let eps_i = field_pow(&spec.epsilon, i as i64)?;
        let verdict = branch_feasibility(alpha0, beta0, w, &eps_i, spec, residual_leading)?;
        report.valuation = verdict.valuation.clone();
        report.expected = verdict.expected.clone();
        report.feasible = verdict.feasible;
        if !verdict.feasible {
            return Ok(());
        }
        let rhs2 = beta0.scale(&field_inv(&eps_i)?)?;
        let rhs1 = pz_sub(alpha0, &w.evaluate_puiseux(&rhs2)?)?;
        let system = normalize_to_unit_torus(&red.residual, groot, spec, d, &rhs1, &rhs2)?;
        let seeds = solve_reduced_monomial(
            red.n1,
            red.n2,
            red.k,
            &system.alpha_bar,
            &system.beta_bar,
            spec.field,
        )?;
        report.seed_count = seeds.len();
        for (sx, sy) in &seeds {
            let outcome = hensel_lift(&system, (sx, sy), settings)?;
            report
                .lifted
                .push(map_to_source_torus(spec, &outcome.x, &outcome.y)?);
            report.residual_bounds.push(outcome.residual_bounds);
        }
        Ok(())
    };
    if let Err(e) = inner() {
        report.error = Some(e.to_string());
    }
    report
}
