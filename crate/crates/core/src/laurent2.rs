//! Bivariate formal Laurent series at infinity: finitely many terms of total
//! degree up to a maximum, truncated below at a floor on total degree. Terms
//! of total degree below the floor are unknown and dropped; every operation
//! propagates the floor so nothing unknown is ever presented as known.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::par::try_map_ordered;
use crate::puiseux::{pz_pow, PuiseuxElement};
use crate::scalars::{rat, scalar_kth_root, ExactField, FieldSpec, Scalar};

/// Exponent pair of X^i Y^j. Ordered by total degree, then by i, so map
/// iteration walks from the floor up to the leading form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exponent2 {
    pub i: i64,
    pub j: i64,
}

impl Exponent2 {
    pub fn new(i: i64, j: i64) -> Self {
        Exponent2 { i, j }
    }

    pub fn total(&self) -> i64 {
        self.i + self.j
    }
}

impl Ord for Exponent2 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.total(), self.i).cmp(&(other.total(), other.i))
    }
}

impl PartialOrd for Exponent2 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X^{} Y^{}", self.i, self.j)
    }
}

/// All terms sharing the maximal total degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadingForm<K> {
    pub degree: i64,
    pub terms: Vec<(Exponent2, K)>,
}

impl<K: ExactField> LeadingForm<K> {
    /// The single leading monomial, or an error when the form is not one.
    pub fn monomial(&self) -> Result<(Exponent2, K)> {
        if self.terms.len() == 1 {
            Ok(self.terms[0].clone())
        } else {
            Err(Error::NonMonomialLeading {
                degree: self.degree,
                terms: self.terms.len(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentSeries2<K: ExactField> {
    field: FieldSpec,
    floor: i64,
    terms: BTreeMap<Exponent2, K>,
}

impl<K: ExactField> LaurentSeries2<K> {
    fn normalized(field: FieldSpec, mut terms: BTreeMap<Exponent2, K>, floor: i64) -> Self {
        terms.retain(|exp, coeff| !coeff.is_zero() && exp.total() >= floor);
        LaurentSeries2 {
            field,
            floor,
            terms,
        }
    }

    pub fn zero(field: FieldSpec, floor: i64) -> Self {
        Self::normalized(field, BTreeMap::new(), floor)
    }

    pub fn monomial(field: FieldSpec, coeff: K, exp: Exponent2, floor: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(exp, coeff);
        Self::normalized(field, terms, floor)
    }

    pub fn constant(field: FieldSpec, coeff: K, floor: i64) -> Self {
        Self::monomial(field, coeff, Exponent2::new(0, 0), floor)
    }

    pub fn one(field: FieldSpec, floor: i64) -> Self {
        Self::constant(field, K::one(), floor)
    }

    pub fn from_terms(field: FieldSpec, entries: Vec<(Exponent2, K)>, floor: i64) -> Result<Self> {
        let mut terms: BTreeMap<Exponent2, K> = BTreeMap::new();
        for (exp, coeff) in entries {
            match terms.get_mut(&exp) {
                Some(c) => *c = c.add(&coeff)?,
                None => {
                    terms.insert(exp, coeff);
                }
            }
        }
        Ok(Self::normalized(field, terms, floor))
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn floor(&self) -> i64 {
        self.floor
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent2, &K)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero_up_to_floor(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: Exponent2) -> K {
        self.terms.get(&exp).cloned().unwrap_or_else(K::zero)
    }

    /// Maximal total degree among visible terms.
    pub fn degree(&self) -> Option<i64> {
        self.terms.keys().next_back().map(|e| e.total())
    }

    fn effective_degree(&self) -> i64 {
        self.degree().unwrap_or(self.floor)
    }

    /// Raises the floor (drops deeper terms). Lowering below the current
    /// floor is refused: the dropped tail is unknown.
    pub fn truncate_to(&self, floor: i64) -> Self {
        Self::normalized(self.field, self.terms.clone(), floor.max(self.floor))
    }

    pub fn map_coeffs(&self, f: impl Fn(&K) -> K) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (*e, f(c))).collect();
        Self::normalized(self.field, terms, self.floor)
    }

    pub fn scale(&self, c: &K) -> Result<Self> {
        if c.is_zero() {
            return Ok(Self::zero(self.field, self.floor));
        }
        let mut terms = BTreeMap::new();
        for (exp, coeff) in &self.terms {
            terms.insert(*exp, coeff.mul(c)?);
        }
        Ok(Self::normalized(self.field, terms, self.floor))
    }

    /// Multiplies by the monomial c * X^di Y^dj, shifting floor accordingly.
    pub fn mul_monomial(&self, c: &K, di: i64, dj: i64) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (exp, coeff) in &self.terms {
            terms.insert(Exponent2::new(exp.i + di, exp.j + dj), coeff.mul(c)?);
        }
        Ok(Self::normalized(self.field, terms, self.floor + di + dj))
    }

    pub fn leading_form(&self) -> Result<LeadingForm<K>> {
        let Some(degree) = self.degree() else {
            return Err(Error::NoLeadingForm);
        };
        let terms: Vec<(Exponent2, K)> = self
            .terms
            .iter()
            .rev()
            .take_while(|(e, _)| e.total() == degree)
            .map(|(e, c)| (*e, c.clone()))
            .collect();
        Ok(LeadingForm { degree, terms })
    }

    /// Partial derivative with respect to X (var 0) or Y (var 1). The floor
    /// drops by one since differentiation lowers total degree by one.
    pub fn derivative(&self, var: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (exp, coeff) in &self.terms {
            let (power, next) = match var {
                0 => (exp.i, Exponent2::new(exp.i - 1, exp.j)),
                1 => (exp.j, Exponent2::new(exp.i, exp.j - 1)),
                _ => panic!("bivariate series has variables 0 and 1"),
            };
            if power != 0 {
                terms.insert(next, coeff.scale_rat(&rat(power, 1)));
            }
        }
        Self::normalized(self.field, terms, self.floor - 1)
    }
}

pub fn series_add<K: ExactField>(
    a: &LaurentSeries2<K>,
    b: &LaurentSeries2<K>,
) -> Result<LaurentSeries2<K>> {
    let field = a.field.merge(&b.field)?;
    let floor = a.floor.max(b.floor);
    let mut terms = a.terms.clone();
    for (exp, coeff) in &b.terms {
        match terms.get_mut(exp) {
            Some(c) => *c = c.add(coeff)?,
            None => {
                terms.insert(*exp, coeff.clone());
            }
        }
    }
    Ok(LaurentSeries2::normalized(field, terms, floor))
}

pub fn series_neg<K: ExactField>(a: &LaurentSeries2<K>) -> LaurentSeries2<K> {
    let terms = a.terms.iter().map(|(e, c)| (*e, c.neg())).collect();
    LaurentSeries2::normalized(a.field, terms, a.floor)
}

pub fn series_sub<K: ExactField>(
    a: &LaurentSeries2<K>,
    b: &LaurentSeries2<K>,
) -> Result<LaurentSeries2<K>> {
    series_add(a, &series_neg(b))
}

/// Product with floor max(floor_a + deg_b, floor_b + deg_a): everything the
/// unknown tails could touch is cut. Long products over many terms are
/// chunked across threads when the `parallel` feature is on.
pub fn series_mul<K: ExactField>(
    a: &LaurentSeries2<K>,
    b: &LaurentSeries2<K>,
) -> Result<LaurentSeries2<K>> {
    let field = a.field.merge(&b.field)?;
    let floor = (a.floor + b.effective_degree()).max(b.floor + a.effective_degree());
    if a.terms.is_empty() || b.terms.is_empty() {
        return Ok(LaurentSeries2::zero(field, floor));
    }

    let a_entries: Vec<(&Exponent2, &K)> = a.terms.iter().collect();
    let work = a_entries.len().saturating_mul(b.terms.len());
    let chunk_size = if work >= 4096 {
        a_entries.len().div_ceil(16)
    } else {
        a_entries.len()
    };
    let chunks: Vec<&[(&Exponent2, &K)]> = a_entries.chunks(chunk_size.max(1)).collect();

    let partials = try_map_ordered(chunks, |chunk| {
        let mut terms: BTreeMap<Exponent2, K> = BTreeMap::new();
        for (ea, ca) in chunk {
            for (eb, cb) in &b.terms {
                let exp = Exponent2::new(ea.i + eb.i, ea.j + eb.j);
                if exp.total() < floor {
                    continue;
                }
                let prod = ca.mul(cb)?;
                match terms.get_mut(&exp) {
                    Some(c) => *c = c.add(&prod)?,
                    None => {
                        terms.insert(exp, prod);
                    }
                }
            }
        }
        Ok(terms)
    })?;

    let mut terms: BTreeMap<Exponent2, K> = BTreeMap::new();
    for partial in partials {
        for (exp, coeff) in partial {
            match terms.get_mut(&exp) {
                Some(c) => *c = c.add(&coeff)?,
                None => {
                    terms.insert(exp, coeff);
                }
            }
        }
    }
    Ok(LaurentSeries2::normalized(field, terms, floor))
}

pub fn series_pow<K: ExactField>(a: &LaurentSeries2<K>, e: i64) -> Result<LaurentSeries2<K>> {
    if e == 0 {
        return Ok(LaurentSeries2::one(a.field, a.floor + a.effective_degree()));
    }
    let base = if e < 0 { series_invert(a)? } else { a.clone() };
    let mut acc: Option<LaurentSeries2<K>> = None;
    let mut cur = base;
    let mut exp = e.unsigned_abs();
    loop {
        if exp & 1 == 1 {
            acc = Some(match acc {
                None => cur.clone(),
                Some(v) => series_mul(&v, &cur)?,
            });
        }
        exp >>= 1;
        if exp == 0 {
            break;
        }
        cur = series_mul(&cur, &cur)?;
    }
    Ok(acc.unwrap())
}

/// Inverse via the geometric series after factoring the leading monomial,
/// which must be a single term. The result keeps the input's floor.
pub fn series_invert<K: ExactField>(g: &LaurentSeries2<K>) -> Result<LaurentSeries2<K>> {
    let (lead_exp, lead_coeff) = g.leading_form()?.monomial()?;
    let lead_inv = LaurentSeries2::monomial(
        g.field,
        lead_coeff.inv()?,
        Exponent2::new(-lead_exp.i, -lead_exp.j),
        g.floor - 2 * lead_exp.total(),
    );
    if g.terms.len() == 1 {
        return Ok(lead_inv);
    }
    // g = c X^n1 Y^n2 (1 + u) with deg u < 0; sum the geometric series in -u,
    // truncating partial powers at what survives the final shift.
    let n = lead_exp.total();
    let u = series_sub(
        &g.mul_monomial(&lead_coeff.inv()?, -lead_exp.i, -lead_exp.j)?,
        &LaurentSeries2::one(g.field, g.floor - n),
    )?;
    let series_floor = g.floor + n;
    let mut acc = LaurentSeries2::one(g.field, series_floor);
    let mut power = LaurentSeries2::one(g.field, series_floor);
    let neg_u = series_neg(&u);
    loop {
        power = series_mul(&power, &neg_u)?.truncate_to(series_floor);
        if power.is_zero_up_to_floor() {
            break;
        }
        acc = series_add(&acc, &power)?;
    }
    let inv = acc.mul_monomial(&lead_coeff.inv()?, -lead_exp.i, -lead_exp.j)?;
    Ok(inv.truncate_to(g.floor))
}

impl LaurentSeries2<Scalar> {
    /// Principal k-th root via the binomial series. The leading form must be
    /// a single monomial with both exponents divisible by k and a leading
    /// coefficient admitting a k-th root in the series' field.
    pub fn kth_root(&self, k: u32) -> Result<Self> {
        series_kth_root(self, k)
    }
}

pub fn series_kth_root(g: &LaurentSeries2<Scalar>, k: u32) -> Result<LaurentSeries2<Scalar>> {
    assert!(k >= 1);
    if k == 1 {
        return Ok(g.clone());
    }
    let (lead_exp, lead_coeff) = g.leading_form()?.monomial()?;
    if lead_exp.i % (k as i64) != 0 || lead_exp.j % (k as i64) != 0 {
        return Err(Error::DivisibilityError {
            k,
            n1: lead_exp.i,
            n2: lead_exp.j,
        });
    }
    let root_coeff = scalar_kth_root(&lead_coeff, k, g.field())?.ok_or_else(|| {
        Error::FieldExtensionRequired {
            field: g.field().to_string(),
            what: format!("a {k}-th root of the leading coefficient {lead_coeff}"),
        }
    })?;
    let n = lead_exp.total();
    let root_exp = Exponent2::new(lead_exp.i / (k as i64), lead_exp.j / (k as i64));
    let result_floor = g.floor() - n + n / (k as i64);
    if g.term_count() == 1 {
        return Ok(LaurentSeries2::monomial(
            g.field(),
            root_coeff,
            root_exp,
            result_floor,
        ));
    }
    // g = c X^n1 Y^n2 (1 + u); g^(1/k) = c^(1/k) X^(n1/k) Y^(n2/k)
    //   * sum_i binom(1/k, i) u^i.
    let u = series_sub(
        &g.mul_monomial(&lead_coeff.inv()?, -lead_exp.i, -lead_exp.j)?,
        &LaurentSeries2::one(g.field(), g.floor() - n),
    )?;
    let series_floor = g.floor() - n;
    let mut acc = LaurentSeries2::one(g.field(), series_floor);
    let mut power = LaurentSeries2::one(g.field(), series_floor);
    let mut i = 0u32;
    loop {
        i += 1;
        power = series_mul(&power, &u)?.truncate_to(series_floor);
        if power.is_zero_up_to_floor() {
            break;
        }
        let coeff = Scalar::from_rat(crate::scalars::binom_frac(k, i));
        acc = series_add(&acc, &power.scale(&coeff)?)?;
    }
    let root = acc.mul_monomial(&root_coeff, root_exp.i, root_exp.j)?;
    Ok(root.truncate_to(result_floor))
}

/// det of the Jacobian of (f, g) with respect to (X, Y).
pub fn jacobian_det<K: ExactField>(
    f: &LaurentSeries2<K>,
    g: &LaurentSeries2<K>,
) -> Result<LaurentSeries2<K>> {
    let fx = f.derivative(0);
    let fy = f.derivative(1);
    let gx = g.derivative(0);
    let gy = g.derivative(1);
    series_sub(&series_mul(&fx, &gy)?, &series_mul(&fy, &gx)?)
}

/// Substitutes X -> x1 * X, Y -> y1 * Y with Puiseux factors: every term
/// c X^i Y^j becomes (c x1^i y1^j) X^i Y^j. Exponent floor is unchanged;
/// coefficient floors ride along in the Puiseux arithmetic.
pub fn torus_substitute(
    f: &LaurentSeries2<Scalar>,
    x1: &PuiseuxElement,
    y1: &PuiseuxElement,
) -> Result<LaurentSeries2<PuiseuxElement>> {
    let mut terms = BTreeMap::new();
    for (exp, coeff) in f.terms() {
        let factor = crate::puiseux::pz_mul(&pz_pow(x1, exp.i)?, &pz_pow(y1, exp.j)?)?;
        let value = factor.scale(coeff)?;
        terms.insert(*exp, value);
    }
    Ok(LaurentSeries2::normalized(f.field(), terms, f.floor()))
}

/// Equality of all terms at or above the shallower floor.
pub fn series_eq_up_to_common_floor<K: ExactField>(
    a: &LaurentSeries2<K>,
    b: &LaurentSeries2<K>,
) -> bool {
    let floor = a.floor.max(b.floor);
    let keep = |x: &LaurentSeries2<K>| -> BTreeMap<Exponent2, K> {
        x.terms
            .iter()
            .filter(|(e, _)| e.total() >= floor)
            .map(|(e, c)| (*e, c.clone()))
            .collect()
    };
    keep(a) == keep(b)
}

impl<K: ExactField> fmt::Display for LaurentSeries2<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (exp, coeff) in self.terms.iter().rev() {
            let var = match (exp.i, exp.j) {
                (0, 0) => String::new(),
                (i, 0) => format!("X^{i}"),
                (0, j) => format!("Y^{j}"),
                (i, j) => format!("X^{i} Y^{j}"),
            };
            if var.is_empty() {
                parts.push(format!("{coeff}"));
            } else {
                parts.push(format!("({coeff}) {var}"));
            }
        }
        parts.push(format!("O(deg<{})", self.floor));
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{rat_int, Rat};
    use num_traits::One;
    use proptest::prelude::*;

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

    #[test]
    fn exponent_order_is_total_then_i() {
        let a = Exponent2::new(1, 1);
        let b = Exponent2::new(3, 0);
        let c = Exponent2::new(0, 3);
        assert!(a < b);
        assert!(c < b);
        assert!(a < c);
    }

    #[test]
    fn leading_form_and_monomial() {
        let g = build(&[(2, 4, 1), (1, 0, 1)], -12);
        let lf = g.leading_form().unwrap();
        assert_eq!(lf.degree, 6);
        assert_eq!(lf.monomial().unwrap().0, Exponent2::new(2, 4));
        let h = build(&[(1, 0, 1), (0, 1, 1)], -4);
        assert!(matches!(
            h.leading_form().unwrap().monomial(),
            Err(Error::NonMonomialLeading {
                degree: 1,
                terms: 2
            })
        ));
        assert!(matches!(
            S::zero(FieldSpec::Rational, -4).leading_form(),
            Err(Error::NoLeadingForm)
        ));
    }

    #[test]
    fn invert_of_xy_plus_one() {
        let g = build(&[(1, 1, 1), (0, 0, 1)], -6);
        let inv = series_invert(&g).unwrap();
        assert_eq!(inv.floor(), -6);
        assert_eq!(inv.coeff(Exponent2::new(-1, -1)), s(1));
        assert_eq!(inv.coeff(Exponent2::new(-2, -2)), s(-1));
        assert_eq!(inv.coeff(Exponent2::new(-3, -3)), s(1));
        assert_eq!(inv.term_count(), 3);
        let prod = series_mul(&g, &inv).unwrap();
        assert!(series_eq_up_to_common_floor(
            &prod,
            &S::one(FieldSpec::Rational, prod.floor())
        ));
    }

    #[test]
    fn product_floor_rule() {
        let a = build(&[(1, 1, 1), (0, 0, 1)], -6);
        let b = build(&[(-1, -1, 1), (-2, -2, -1), (-3, -3, 1)], -6);
        let p = series_mul(&a, &b).unwrap();
        // max(-6 + (-2), -6 + 2) = -4.
        assert_eq!(p.floor(), -4);
        assert!(series_eq_up_to_common_floor(
            &p,
            &S::one(FieldSpec::Rational, -4)
        ));
    }

    #[test]
    fn square_root_round_trip() {
        let g = build(&[(2, 4, 1), (1, 0, 1)], -12);
        let h = series_kth_root(&g, 2).unwrap();
        assert_eq!(h.floor(), -12 - 6 + 3);
        assert_eq!(h.coeff(Exponent2::new(1, 2)), s(1));
        let sq = series_mul(&h, &h).unwrap();
        assert!(series_eq_up_to_common_floor(&sq, &g));
    }

    #[test]
    fn root_divisibility_and_field_errors() {
        let g = build(&[(1, 2, 1)], -6);
        assert!(matches!(
            series_kth_root(&g, 2),
            Err(Error::DivisibilityError { k: 2, n1: 1, n2: 2 })
        ));
        let h = build(&[(2, 2, 2)], -6);
        assert!(matches!(
            series_kth_root(&h, 2),
            Err(Error::FieldExtensionRequired { .. })
        ));
    }

    #[test]
    fn cube_root_round_trip_with_tail() {
        let g = build(&[(3, 3, 8), (1, 1, 1), (0, 0, 1)], -9);
        let h = series_kth_root(&g, 3).unwrap();
        assert_eq!(h.coeff(Exponent2::new(1, 1)), s(2));
        let cube = series_mul(&series_mul(&h, &h).unwrap(), &h).unwrap();
        assert!(series_eq_up_to_common_floor(&cube, &g));
    }

    #[test]
    fn jacobian_of_coordinates_is_one() {
        let x = build(&[(1, 0, 1)], -6);
        let y = build(&[(0, 1, 1)], -6);
        let j = jacobian_det(&x, &y).unwrap();
        assert_eq!(j.coeff(Exponent2::new(0, 0)), s(1));
        assert_eq!(j.term_count(), 1);
        let jf = jacobian_det(&x, &x).unwrap();
        assert!(jf.is_zero_up_to_floor());
    }

    #[test]
    fn jacobian_product_expansion() {
        // jac(X^2 Y, X Y^3) = (2XY * 3XY^2) - (X^2 * Y^3) = 5 X^2 Y^3.
        let f = build(&[(2, 1, 1)], -6);
        let g = build(&[(1, 3, 1)], -6);
        let j = jacobian_det(&f, &g).unwrap();
        assert_eq!(j.coeff(Exponent2::new(2, 3)), s(5));
        assert_eq!(j.term_count(), 1);
    }

    #[test]
    fn torus_substitution_scales_coefficients() {
        use crate::puiseux::pz_valuation;
        use crate::puiseux::ValuationBound;
        let f = build(&[(1, 1, 1), (-1, 0, 2)], -6);
        let t = PuiseuxElement::t_power(Rat::one());
        let sub = torus_substitute(&f, &t, &t).unwrap();
        let c11 = sub.coeff(Exponent2::new(1, 1));
        assert_eq!(pz_valuation(&c11), ValuationBound::Exact(rat_int(-2)));
        let cm10 = sub.coeff(Exponent2::new(-1, 0));
        assert_eq!(pz_valuation(&cm10), ValuationBound::Exact(rat_int(1)));
    }

    fn arb_series() -> impl Strategy<Value = S> {
        let term = (-4i64..5, -4i64..5, -3i64..4);
        (proptest::collection::vec(term, 0..7), -16i64..-10).prop_map(|(ts, fl)| build(&ts, fl))
    }

    proptest! {
        #[test]
        fn prop_add_commutes(a in arb_series(), b in arb_series()) {
            prop_assert_eq!(series_add(&a, &b).unwrap(), series_add(&b, &a).unwrap());
        }

        #[test]
        fn prop_mul_commutes(a in arb_series(), b in arb_series()) {
            prop_assert_eq!(series_mul(&a, &b).unwrap(), series_mul(&b, &a).unwrap());
        }

        #[test]
        fn prop_mul_associates_up_to_floor(a in arb_series(), b in arb_series(), c in arb_series()) {
            let l = series_mul(&series_mul(&a, &b).unwrap(), &c).unwrap();
            let r = series_mul(&a, &series_mul(&b, &c).unwrap()).unwrap();
            prop_assert!(series_eq_up_to_common_floor(&l, &r));
        }

        #[test]
        fn prop_distributive_up_to_floor(a in arb_series(), b in arb_series(), c in arb_series()) {
            let l = series_mul(&a, &series_add(&b, &c).unwrap()).unwrap();
            let r = series_add(&series_mul(&a, &b).unwrap(), &series_mul(&a, &c).unwrap()).unwrap();
            prop_assert!(series_eq_up_to_common_floor(&l, &r));
        }

        #[test]
        fn prop_invert_round_trip(tail in proptest::collection::vec((-4i64..2, -4i64..2, -3i64..4), 0..5)) {
            // Ensure an invertible leading monomial above the tail.
            let mut entries = vec![(3i64, 3i64, 1i64)];
            entries.extend(tail);
            let g = build(&entries, -10);
            if g.leading_form().unwrap().monomial().is_ok() {
                let inv = series_invert(&g).unwrap();
                let prod = series_mul(&g, &inv).unwrap();
                prop_assert!(series_eq_up_to_common_floor(
                    &prod,
                    &S::one(FieldSpec::Rational, prod.floor())
                ));
            }
        }

        #[test]
        fn prop_degree_additive_under_mul(a in arb_series(), b in arb_series()) {
            if let (Some(da), Some(db)) = (a.degree(), b.degree()) {
                let p = series_mul(&a, &b).unwrap();
                // Leading coefficients cannot cancel in an integral domain,
                // but the leading product can fall below the floor.
                if let Some(dp) = p.degree() {
                    prop_assert!(dp <= da + db);
                    if da + db >= p.floor() {
                        prop_assert_eq!(dp, da + db);
                    }
                }
            }
        }
    }
}
