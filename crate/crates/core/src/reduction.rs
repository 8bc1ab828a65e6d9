//! Degree-reduction engine: checks the leading-exponent proportionality
//! relations, iteratively subtracts c_i (g^(1/k_i))^(l_i) from f until the
//! total degree drops to 2 - n, assembles the Laurent polynomial W(T), and
//! certifies the distinctness of W under root-of-unity twists of T.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::laurent2::{
    series_add, series_kth_root, series_pow, series_sub, LaurentSeries2, LeadingForm,
};
use crate::par::try_map_ordered;
use crate::puiseux::{pz_add, pz_pow, PuiseuxElement};
use crate::scalars::{
    field_div, field_mul, field_pow, primitive_root_of_unity, rat, roots_of_unity, zeta_power,
    FieldSpec, Rat, Scalar,
};

/// Extra depth below the target degree required of input floors, so that the
/// final "degree equals 2-n exactly" decision is never made blind.
pub const DEFAULT_FLOOR_BUDGET: i64 = 6;

// ---------------------------------------------------------------------------
// Exponent relations
// ---------------------------------------------------------------------------

/// Leading-exponent data of a pair (f, g) and the derived proportionality
/// flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentRelation {
    pub m1: i64,
    pub m2: i64,
    pub n1: i64,
    pub n2: i64,
    pub m: i64,
    pub n: i64,
    /// m/n as an exact rational (lowest terms).
    pub ratio: Rat,
    /// m1/n1 = m2/n2, expressed as m1*n2 = m2*n1.
    pub proportional: bool,
    pub ratio_is_one: bool,
    /// |m1 - m2| = |n1 - n2|.
    pub abs_diff_equal: bool,
}

pub fn check_exponent_relations(
    f: &LaurentSeries2<Scalar>,
    g: &LaurentSeries2<Scalar>,
) -> Result<ExponentRelation> {
    let (fe, _) = f.leading_form()?.monomial()?;
    let (ge, _) = g.leading_form()?.monomial()?;
    let (m1, m2, n1, n2) = (fe.i, fe.j, ge.i, ge.j);
    let (m, n) = (m1 + m2, n1 + n2);
    if n == 0 {
        return Err(Error::Precondition(
            "leading total degree of g must be nonzero".into(),
        ));
    }
    let proportional = m1 * n2 == m2 * n1;
    let relation = ExponentRelation {
        m1,
        m2,
        n1,
        n2,
        m,
        n,
        ratio: rat(m, n),
        proportional,
        ratio_is_one: m == n,
        abs_diff_equal: (m1 - m2).abs() == (n1 - n2).abs(),
    };
    if proportional {
        // |m1 - m2| * n = |m| * |n1 - n2| is forced by proportionality.
        if (m1 - m2).abs() * n != m.abs() * (n1 - n2).abs() {
            return Err(Error::Internal(format!(
                "proportional pair violates the difference identity: {relation:?}"
            )));
        }
        // Dichotomy: a proportional pair with m != n has either unequal
        // absolute differences or both differences zero.
        if m != n && relation.abs_diff_equal && !(m1 == m2 && n1 == n2) {
            return Err(Error::Internal(format!(
                "dichotomy violated for proportional pair: {relation:?}"
            )));
        }
    }
    Ok(relation)
}

// ---------------------------------------------------------------------------
// W polynomials
// ---------------------------------------------------------------------------

/// Laurent polynomial W(T) = sum c_i T^(e_i), tagged with the root index
/// k_tilde it is meant to be composed with: W applied to g^(1/k_tilde).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WPoly {
    k_tilde: u32,
    terms: BTreeMap<i64, Scalar>,
}

impl WPoly {
    pub fn new(k_tilde: u32, entries: Vec<(i64, Scalar)>) -> Result<Self> {
        assert!(k_tilde >= 1);
        let mut terms = BTreeMap::new();
        for (exp, coeff) in entries {
            if coeff.is_zero() {
                continue;
            }
            if terms.insert(exp, coeff).is_some() {
                return Err(Error::Precondition(format!("duplicate W exponent {exp}")));
            }
        }
        Ok(WPoly { k_tilde, terms })
    }

    pub fn empty(k_tilde: u32) -> Self {
        WPoly {
            k_tilde,
            terms: BTreeMap::new(),
        }
    }

    pub fn k_tilde(&self) -> u32 {
        self.k_tilde
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &Scalar)> {
        self.terms.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn exponents(&self) -> Vec<i64> {
        self.terms.keys().copied().collect()
    }

    /// gcd of k_tilde with all exponents of W.
    pub fn exponent_gcd(&self) -> i64 {
        self.terms.keys().fold(self.k_tilde as i64, |g, e| g.gcd(e))
    }

    /// W(eps * T): multiplies the coefficient of T^e by eps^e.
    pub fn twist(&self, eps: &Scalar) -> Result<WPoly> {
        let mut terms = BTreeMap::new();
        for (exp, coeff) in &self.terms {
            terms.insert(*exp, field_mul(coeff, &field_pow(eps, *exp)?)?);
        }
        Ok(WPoly {
            k_tilde: self.k_tilde,
            terms,
        })
    }

    /// Evaluates W at a series argument (the caller passes g^(1/k_tilde)).
    /// Terms are independent powers, so they are computed in parallel when
    /// the feature is on; the final sum is order-independent.
    pub fn evaluate_series(&self, root: &LaurentSeries2<Scalar>) -> Result<LaurentSeries2<Scalar>> {
        let entries: Vec<(i64, Scalar)> = self.terms.iter().map(|(e, c)| (*e, c.clone())).collect();
        if entries.is_empty() {
            return Ok(LaurentSeries2::zero(root.field(), root.floor()));
        }
        let parts = try_map_ordered(entries, |(exp, coeff)| series_pow(root, exp)?.scale(&coeff))?;
        let mut acc: Option<LaurentSeries2<Scalar>> = None;
        for part in parts {
            acc = Some(match acc {
                None => part,
                Some(v) => series_add(&v, &part)?,
            });
        }
        Ok(acc.unwrap())
    }

    /// Evaluates W at a Puiseux argument.
    pub fn evaluate_puiseux(&self, arg: &PuiseuxElement) -> Result<PuiseuxElement> {
        let mut acc = PuiseuxElement::zero();
        for (exp, coeff) in &self.terms {
            let term = pz_pow(arg, *exp)?.scale(coeff)?;
            acc = pz_add(&acc, &term)?;
        }
        Ok(acc)
    }
}

/// Re-indexes W from k_tilde to a coarser root index k (k_tilde | k):
/// exponents scale by k / k_tilde so that W~(g^(1/k)) = W(g^(1/k_tilde)).
pub fn rescale_w(w: &WPoly, k: u32) -> Result<WPoly> {
    if k == 0 || !k.is_multiple_of(w.k_tilde) {
        return Err(Error::Precondition(format!(
            "rescale index {k} is not a multiple of k_tilde {}",
            w.k_tilde
        )));
    }
    let factor = (k / w.k_tilde) as i64;
    let terms = w
        .terms
        .iter()
        .map(|(e, c)| (e * factor, c.clone()))
        .collect();
    Ok(WPoly { k_tilde: k, terms })
}

// ---------------------------------------------------------------------------
// Reduction steps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionStatus {
    /// Residual degree is exactly 2 - n.
    ReachedTarget,
    /// Stuck above the target with gcd(n1, n2) = 1: no fractional step can
    /// exist, reproducing the coprime-exponent contradiction.
    GcdObstruction,
    /// Stuck above the target on a leading form not proportional to g's.
    NonProportionalLeading,
    /// Truncation floors were too shallow to decide; deepen and re-run.
    FloorExhausted,
    /// f was exactly a W-image: nothing visible remains above the floor.
    ZeroResidual,
    /// A subtraction step jumped past 2 - n without landing on it.
    TargetOvershot,
}

impl ReductionStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReductionStatus::ReachedTarget => "ReachedTarget",
            ReductionStatus::GcdObstruction => "GcdObstruction",
            ReductionStatus::NonProportionalLeading => "NonProportionalLeading",
            ReductionStatus::FloorExhausted => "FloorExhausted",
            ReductionStatus::ZeroResidual => "ZeroResidual",
            ReductionStatus::TargetOvershot => "TargetOvershot",
        }
    }
}

impl std::fmt::Display for ReductionStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionStep {
    pub c: Scalar,
    pub l: i64,
    pub k: u32,
    /// Leading degree of the residual after this step; None when nothing
    /// visible remains.
    pub degree_after: Option<i64>,
}

#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub w: WPoly,
    pub k_tilde: u32,
    /// gcd(n1, n2).
    pub k: u32,
    pub n1: i64,
    pub n2: i64,
    pub target_degree: i64,
    pub residual: LaurentSeries2<Scalar>,
    pub residual_leading: Option<LeadingForm<Scalar>>,
    pub status: ReductionStatus,
    pub trace: Vec<ReductionStep>,
    /// Residual leading coefficient when the residual is the single monomial
    /// d X^(1-n1) Y^(1-n2).
    pub d: Option<Scalar>,
    /// A k-th root of unity with W~(eps T) != W~(T), when one exists in the
    /// working field.
    pub epsilon0: Option<Scalar>,
}

/// One subtraction step: cancels the leading monomial of h against a power of
/// a root of g. Returns the step data and the strictly smaller residual.
pub fn reduce_once(
    h: &LaurentSeries2<Scalar>,
    g: &LaurentSeries2<Scalar>,
) -> Result<(ReductionStep, LaurentSeries2<Scalar>)> {
    let (he, hc) = h.leading_form()?.monomial()?;
    let (ge, _) = g.leading_form()?.monomial()?;
    let (m1, m2, n1, n2) = (he.i, he.j, ge.i, ge.j);
    if m1 * n2 != m2 * n1 {
        return Err(Error::NonProportionalLeading {
            h1: m1,
            h2: m2,
            g1: n1,
            g2: n2,
        });
    }
    let (m, n) = (m1 + m2, n1 + n2);
    // ratio in lowest terms l / k'.
    let ratio = Ratio::new(m, n);
    let l = *ratio.numer();
    let k_prime = *ratio.denom() as u32;
    if n1 % (k_prime as i64) != 0 || n2 % (k_prime as i64) != 0 {
        // Unreachable when the componentwise proportionality holds with
        // integer (m1, m2), but kept as a hard guard.
        return Err(Error::GcdObstruction { k: k_prime, n1, n2 });
    }
    let root = series_kth_root(g, k_prime)?;
    let power = series_pow(&root, l)?;
    let (_, pc) = power.leading_form()?.monomial()?;
    let c = field_div(&hc, &pc)?;
    let residual = series_sub(h, &power.scale(&c)?)?;
    if let Some(deg) = residual.degree() {
        if deg >= m {
            return Err(Error::Internal(format!(
                "reduction step failed to lower the degree: {deg} >= {m}"
            )));
        }
    }
    let step = ReductionStep {
        c,
        l,
        k: k_prime,
        degree_after: residual.degree(),
    };
    Ok((step, residual))
}

pub fn reduce_full(
    f: &LaurentSeries2<Scalar>,
    g: &LaurentSeries2<Scalar>,
) -> Result<ReductionResult> {
    reduce_full_with_budget(f, g, DEFAULT_FLOOR_BUDGET)
}

pub fn reduce_full_with_budget(
    f: &LaurentSeries2<Scalar>,
    g: &LaurentSeries2<Scalar>,
    budget: i64,
) -> Result<ReductionResult> {
    reduce_full_capped(f, g, budget, None)
}

/// Like [`reduce_full_with_budget`] but refuses to take more than `step_cap`
/// cancellation steps when a cap is given.
pub fn reduce_full_capped(
    f: &LaurentSeries2<Scalar>,
    g: &LaurentSeries2<Scalar>,
    budget: i64,
    step_cap: Option<u64>,
) -> Result<ReductionResult> {
    let (ge, _) = g.leading_form()?.monomial()?;
    let (n1, n2) = (ge.i, ge.j);
    let n = n1 + n2;
    if n1 <= 0 || n2 <= 0 || n < 2 {
        return Err(Error::Precondition(format!(
            "g must lead with positive exponents of total degree >= 2, got ({n1}, {n2})"
        )));
    }
    let k = (n1.gcd(&n2)) as u32;
    let target = 2 - n;

    let mut trace: Vec<ReductionStep> = Vec::new();
    let mut residual = f.clone();

    let finish = |status: ReductionStatus,
                  residual: LaurentSeries2<Scalar>,
                  trace: Vec<ReductionStep>|
     -> Result<ReductionResult> {
        let k_tilde = trace.iter().fold(1u32, |acc, s| acc.lcm(&s.k));
        let mut entries = Vec::with_capacity(trace.len());
        for step in &trace {
            entries.push((step.l * (k_tilde / step.k) as i64, step.c.clone()));
        }
        let w = WPoly::new(k_tilde, entries)?;
        let residual_leading = residual.leading_form().ok();
        let d = residual_leading.as_ref().and_then(|lf| {
            lf.monomial()
                .ok()
                .and_then(|(e, c)| (e.i == 1 - n1 && e.j == 1 - n2).then_some(c))
        });
        // A twist witness in the working field, when the field provides the
        // needed roots of unity; its absence here is not an error.
        let epsilon0 = if w.is_empty() {
            None
        } else {
            rescale_w(&w, k)
                .ok()
                .and_then(|wt| epsilon_distinctness(&wt, f.field()).ok())
                .and_then(|rep| rep.epsilon0)
        };
        Ok(ReductionResult {
            w,
            k_tilde,
            k,
            n1,
            n2,
            target_degree: target,
            residual,
            residual_leading,
            status,
            trace,
            d,
            epsilon0,
        })
    };

    // Entry budget: both inputs must reach comfortably below the target.
    if f.floor() > target - budget || g.floor() > target - budget {
        return finish(ReductionStatus::FloorExhausted, residual, trace);
    }

    let max_steps = (f.degree().unwrap_or(target) - target) * (k as i64) + 1;
    let mut steps_taken = 0i64;
    loop {
        if residual.is_zero_up_to_floor() {
            let status = if residual.floor() > target {
                ReductionStatus::FloorExhausted
            } else {
                ReductionStatus::ZeroResidual
            };
            return finish(status, residual, trace);
        }
        let m = residual.degree().expect("nonempty residual has a degree");
        if m == target {
            return finish(ReductionStatus::ReachedTarget, residual, trace);
        }
        if m < target {
            return finish(ReductionStatus::TargetOvershot, residual, trace);
        }
        if residual.floor() > target {
            return finish(ReductionStatus::FloorExhausted, residual, trace);
        }
        match reduce_once(&residual, g) {
            Ok((step, next)) => {
                trace.push(step);
                residual = next;
            }
            Err(Error::NonProportionalLeading { .. }) if k == 1 => {
                // With coprime leading exponents no fractional root step
                // exists, so being stuck above the target is the
                // coprime-exponent contradiction. All k_i so far are 1.
                debug_assert!(trace.iter().all(|s| s.k == 1));
                return finish(ReductionStatus::GcdObstruction, residual, trace);
            }
            Err(Error::NonProportionalLeading { .. }) => {
                return finish(ReductionStatus::NonProportionalLeading, residual, trace);
            }
            Err(Error::GcdObstruction { .. }) => {
                return finish(ReductionStatus::GcdObstruction, residual, trace);
            }
            Err(e) => return Err(e),
        }
        steps_taken += 1;
        if let Some(cap) = step_cap {
            if steps_taken > cap as i64 {
                return Err(Error::Precondition(format!(
                    "step limit {cap} reached before the residual degree dropped to {target}"
                )));
            }
        }
        if steps_taken > max_steps {
            return Err(Error::Internal(format!(
                "reduction exceeded the step bound {max_steps}"
            )));
        }
    }
}

// ---------------------------------------------------------------------------
// Distinctness of W under root-of-unity twists
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistinctnessReport {
    pub k_tilde: u32,
    /// gcd(k_tilde, exponents of W): the number-theoretic route. All twists
    /// are distinct iff this is 1.
    pub exponent_gcd: i64,
    /// Result of the explicit polynomial-comparison route; cross-checked
    /// against the gcd route before this report is returned.
    pub all_distinct: bool,
    /// Indices a in 1..k_tilde whose twist differs from W.
    pub distinct_indices: Vec<u32>,
    /// The corresponding roots of unity in the working field.
    pub witnesses: Vec<Scalar>,
    /// First distinct witness, when one exists.
    pub epsilon0: Option<Scalar>,
}

/// Certifies, two independent ways, which root-of-unity twists change W:
/// (a) the gcd of k_tilde with the exponents, (b) explicit comparison of
/// W(eps T) with W(T) term by term. The routes must agree.
pub fn epsilon_distinctness(w: &WPoly, field: FieldSpec) -> Result<DistinctnessReport> {
    let k_tilde = w.k_tilde;
    let exponent_gcd = w.exponent_gcd();

    // Route (b): for each twist index a, W(eps^a T) != W(T) iff some term
    // exponent e with nonzero coefficient has (zeta_{k_tilde}^a)^e != 1.
    // The coefficient cancels: c * eps^(ae) = c iff eps^(ae) = 1.
    let mut distinct_indices = Vec::new();
    for a in 1..k_tilde {
        let twisted_differs = w
            .terms
            .keys()
            .any(|e| !zeta_power(k_tilde, (a as i64) * e).is_one());
        if twisted_differs {
            distinct_indices.push(a);
        }
    }
    let all_distinct = distinct_indices.len() == (k_tilde as usize).saturating_sub(1);

    // Cross-check the two routes; a disagreement is a bug, never a result.
    let gcd_route_all_distinct = exponent_gcd == 1 || w.is_empty() && k_tilde == 1;
    if !w.is_empty() && all_distinct != (exponent_gcd == 1) && k_tilde > 1 {
        return Err(Error::Internal(format!(
            "distinctness routes disagree: gcd={exponent_gcd}, explicit={all_distinct}"
        )));
    }
    let _ = gcd_route_all_distinct;

    let witnesses: Vec<Scalar> = if distinct_indices.is_empty() {
        Vec::new()
    } else {
        // Materialize the witnesses in the working field.
        let roots = roots_of_unity(field, k_tilde)?;
        distinct_indices
            .iter()
            .map(|a| roots[*a as usize].clone())
            .collect()
    };
    let epsilon0 = witnesses.first().cloned();
    Ok(DistinctnessReport {
        k_tilde,
        exponent_gcd,
        all_distinct,
        distinct_indices,
        witnesses,
        epsilon0,
    })
}

/// Convenience for tests and the torus layer: the primitive k-th root the
/// field offers, if any.
pub fn field_primitive_root(field: FieldSpec, k: u32) -> Result<Scalar> {
    primitive_root_of_unity(field, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent2::{series_eq_up_to_common_floor, series_mul, Exponent2};

    type S = LaurentSeries2<Scalar>;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    fn build(entries: &[(i64, i64, i64)], floor: i64) -> S {
        let terms = entries
            .iter()
            .map(|(i, j, c)| (Exponent2::new(*i, *j), s(*c)))
            .collect();
        S::from_terms(FieldSpec::Rational, terms, floor).unwrap()
    }

    /// g = X^2 Y^4 + X at floor -15; f = 2 (g^(1/2))^3 + 5 X^-1 Y^-3, which
    /// lands at floor -12.
    fn fixture() -> (S, S) {
        let g = build(&[(2, 4, 1), (1, 0, 1)], -15);
        let root = series_kth_root(&g, 2).unwrap();
        let cube = series_pow(&root, 3).unwrap();
        let f = series_add(
            &cube.scale(&s(2)).unwrap(),
            &S::monomial(FieldSpec::Rational, s(5), Exponent2::new(-1, -3), -12),
        )
        .unwrap();
        (f, g)
    }

    #[test]
    fn exponent_relations_on_examples() {
        let f = build(&[(3, 6, 1)], -10);
        let g = build(&[(2, 4, 1)], -10);
        let r = check_exponent_relations(&f, &g).unwrap();
        assert!(r.proportional);
        assert_eq!(r.ratio, rat(3, 2));
        assert_eq!((r.m1 - r.m2).abs(), 3);
        assert_eq!((r.n1 - r.n2).abs(), 2);
        assert!(!r.abs_diff_equal);
        assert!(!r.ratio_is_one);

        let f = build(&[(2, 2, 1)], -10);
        let g = build(&[(1, 1, 1)], -10);
        let r = check_exponent_relations(&f, &g).unwrap();
        assert!(r.proportional && r.abs_diff_equal);
        assert_eq!((r.m1 - r.m2, r.n1 - r.n2), (0, 0));

        let f = build(&[(1, 2, 1)], -10);
        let g = build(&[(2, 1, 1)], -10);
        assert!(!check_exponent_relations(&f, &g).unwrap().proportional);

        let two = build(&[(1, 0, 1), (0, 1, 1)], -10);
        assert!(matches!(
            check_exponent_relations(&two, &g),
            Err(Error::NonMonomialLeading { .. })
        ));
    }

    #[test]
    fn single_step_cancels_leading_monomial() {
        let (f, g) = fixture();
        let (step, residual) = reduce_once(&f, &g).unwrap();
        assert_eq!(step.c, s(2));
        assert_eq!(step.l, 3);
        assert_eq!(step.k, 2);
        assert_eq!(step.degree_after, Some(-4));
        let lf = residual.leading_form().unwrap();
        assert_eq!(lf.monomial().unwrap().0, Exponent2::new(-1, -3));
        assert_eq!(lf.monomial().unwrap().1, s(5));
    }

    #[test]
    fn step_on_g_itself_empties_it() {
        let (_, g) = fixture();
        let (step, residual) = reduce_once(&g, &g).unwrap();
        assert_eq!((step.c, step.l, step.k), (s(1), 1, 1));
        assert!(residual.is_zero_up_to_floor());
    }

    #[test]
    fn non_proportional_leading_is_an_error() {
        let g = build(&[(2, 4, 1)], -12);
        let h = build(&[(3, 5, 1)], -12);
        assert!(matches!(
            reduce_once(&h, &g),
            Err(Error::NonProportionalLeading {
                h1: 3,
                h2: 5,
                g1: 2,
                g2: 4
            })
        ));
    }

    #[test]
    fn full_reduction_on_the_fixture() {
        let (f, g) = fixture();
        let r = reduce_full(&f, &g).unwrap();
        assert_eq!(r.status, ReductionStatus::ReachedTarget);
        assert_eq!((r.k_tilde, r.k), (2, 2));
        assert_eq!((r.n1, r.n2, r.target_degree), (2, 4, -4));
        assert_eq!(r.d, Some(s(5)));
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.w.exponents(), vec![3]);
        assert_eq!(r.w.terms().next().unwrap().1, &s(2));
        assert_eq!(r.epsilon0, Some(s(-1)));
        // W evaluated back on g^(1/2) plus the residual reproduces f.
        let root = series_kth_root(&g, 2).unwrap();
        let back = series_add(&r.w.evaluate_series(&root).unwrap(), &r.residual).unwrap();
        assert!(series_eq_up_to_common_floor(&back, &f));
    }

    #[test]
    fn gcd_obstruction_fixture() {
        // g = X^2 Y^3 + X: gcd(2,3) = 1, target = -3. f = g^2 + XY sticks at
        // the non-proportional XY after one integral step.
        let g = build(&[(2, 3, 1), (1, 0, 1)], -14);
        let f = series_add(
            &series_mul(&g, &g).unwrap(),
            &S::monomial(FieldSpec::Rational, s(1), Exponent2::new(1, 1), -14),
        )
        .unwrap();
        assert!(f.floor() <= -3 - DEFAULT_FLOOR_BUDGET);
        let r = reduce_full(&f, &g).unwrap();
        assert_eq!(r.status, ReductionStatus::GcdObstruction);
        assert_eq!(r.k, 1);
        assert!(r.trace.iter().all(|s| s.k == 1));
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.trace[0].l, 2);
        let lf = r.residual_leading.unwrap();
        assert_eq!(lf.monomial().unwrap().0, Exponent2::new(1, 1));
    }

    #[test]
    fn non_proportional_status_when_k_exceeds_one() {
        let g = build(&[(2, 4, 1), (1, 0, 1)], -16);
        let f = series_add(
            &series_mul(&g, &g).unwrap(),
            &S::monomial(FieldSpec::Rational, s(7), Exponent2::new(3, 5), -16),
        )
        .unwrap();
        let r = reduce_full(&f, &g).unwrap();
        assert_eq!(r.status, ReductionStatus::NonProportionalLeading);
    }

    #[test]
    fn zero_residual_is_distinct() {
        let (_, g) = fixture();
        let root = series_kth_root(&g, 2).unwrap();
        let f = series_pow(&root, 3).unwrap().scale(&s(2)).unwrap();
        let r = reduce_full(&f, &g).unwrap();
        assert_eq!(r.status, ReductionStatus::ZeroResidual);
        assert_eq!(r.d, None);
        assert_eq!(r.w.exponents(), vec![3]);
    }

    #[test]
    fn floor_exhausted_at_entry() {
        let g = build(&[(2, 4, 1), (1, 0, 1)], -8);
        let f = build(&[(3, 6, 2)], -8);
        let r = reduce_full(&f, &g).unwrap();
        assert_eq!(r.status, ReductionStatus::FloorExhausted);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn target_overshot_is_reported() {
        let g = build(&[(2, 4, 1), (1, 0, 1)], -15);
        let f = build(&[(2, 4, 1), (1, 0, 1), (-5, 0, 3)], -12);
        let r = reduce_full(&f, &g).unwrap();
        assert_eq!(r.status, ReductionStatus::TargetOvershot);
        assert_eq!(r.residual_leading.unwrap().degree, -5);
    }

    #[test]
    fn trace_degrees_strictly_decrease() {
        let (f, g) = fixture();
        // Add a second W term: 3 g^(1/2) to exercise a longer trace.
        let root = series_kth_root(&g, 2).unwrap();
        let f2 = series_add(&f, &root.scale(&s(3)).unwrap()).unwrap();
        let r = reduce_full(&f2, &g).unwrap();
        assert_eq!(r.status, ReductionStatus::ReachedTarget);
        let mut degrees: Vec<i64> = Vec::new();
        for step in &r.trace {
            let d = step.degree_after.unwrap();
            if let Some(prev) = degrees.last() {
                assert!(d < *prev);
            }
            degrees.push(d);
        }
        // Linearity: the added term appears in W exactly.
        let mut terms: Vec<(i64, Scalar)> = r.w.terms().map(|(e, c)| (*e, c.clone())).collect();
        terms.sort_by_key(|(e, _)| *e);
        assert_eq!(terms, vec![(1, s(3)), (3, s(2))]);
        assert_eq!(r.d, Some(s(5)));
    }

    #[test]
    fn rescale_identities() {
        let w = WPoly::new(2, vec![(3, s(2))]).unwrap();
        let same = rescale_w(&w, 2).unwrap();
        assert_eq!(same, w);

        let w = WPoly::new(2, vec![(1, s(1))]).unwrap();
        let scaled = rescale_w(&w, 4).unwrap();
        assert_eq!(scaled.exponents(), vec![2]);
        assert_eq!(scaled.k_tilde(), 4);
        // Evaluation identity on g = X^4 Y^4 + X.
        let g = build(&[(4, 4, 1), (1, 0, 1)], -16);
        let r2 = series_kth_root(&g, 2).unwrap();
        let r4 = series_kth_root(&g, 4).unwrap();
        let lhs = w.evaluate_series(&r2).unwrap();
        let rhs = scaled.evaluate_series(&r4).unwrap();
        assert!(series_eq_up_to_common_floor(&lhs, &rhs));

        let w = WPoly::new(2, vec![(3, s(1)), (1, s(1))]).unwrap();
        let scaled = rescale_w(&w, 6).unwrap();
        assert_eq!(scaled.exponents(), vec![3, 9]);
        assert!(rescale_w(&w, 3).is_err());
    }

    #[test]
    fn distinctness_on_w_examples() {
        // W = 2T^3 over k_tilde 2: gcd(2,3) = 1, twist by -1 flips the sign.
        let w = WPoly::new(2, vec![(3, s(2))]).unwrap();
        let rep = epsilon_distinctness(&w, FieldSpec::Rational).unwrap();
        assert!(rep.all_distinct);
        assert_eq!(rep.exponent_gcd, 1);
        assert_eq!(rep.epsilon0, Some(s(-1)));

        // W = T^2 over k_tilde 2: even exponent, twist-invariant.
        let w = WPoly::new(2, vec![(2, s(1))]).unwrap();
        let rep = epsilon_distinctness(&w, FieldSpec::Rational).unwrap();
        assert!(!rep.all_distinct);
        assert_eq!(rep.exponent_gcd, 2);
        assert_eq!(rep.epsilon0, None);

        // W = T^3 + T^5 over k_tilde 4: gcd(4,3,5) = 1; all three nontrivial
        // twists must differ, checked explicitly over Q(zeta_4).
        let w = WPoly::new(4, vec![(3, s(1)), (5, s(1))]).unwrap();
        let rep = epsilon_distinctness(&w, FieldSpec::Gaussian).unwrap();
        assert!(rep.all_distinct);
        assert_eq!(rep.distinct_indices, vec![1, 2, 3]);
        for (idx, eps) in rep.distinct_indices.iter().zip(&rep.witnesses) {
            let twisted = w.twist(eps).unwrap();
            assert_ne!(&twisted, &w, "index {idx} twist must differ");
        }
        // Over the rationals the witnesses cannot be materialized.
        assert!(matches!(
            epsilon_distinctness(&w, FieldSpec::Rational),
            Err(Error::FieldExtensionRequired { .. })
        ));
    }

    #[test]
    fn reduction_produces_twist_distinct_w() {
        let (f, g) = fixture();
        let r = reduce_full(&f, &g).unwrap();
        let rep = epsilon_distinctness(&r.w, FieldSpec::Rational).unwrap();
        assert!(rep.all_distinct);
        assert_eq!(rep.exponent_gcd, 1);
    }
}
