//! Truncated Puiseux series in the variable t, exponents in (1/D)Z, with
//! degrees bounded above. The valuation is v(a) = -(largest exponent), so the
//! valuation ring A = { v >= 0 } holds the elements bounded as t grows.
//!
//! Magnitudes are never materialized: every size comparison downstream is an
//! exact comparison of rational valuations.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalars::{
    binom_frac, field_add, field_mul, field_neg, rat_int, roots_of_unity, scalar_kth_root,
    ExactField, FieldSpec, Rat, Scalar,
};

/// Truncation floor: `None` means the element is exact (no unknown tail);
/// `Some(q)` means terms with exponent below q were dropped and are unknown.
/// Kept exponents always satisfy `exp >= q`.
pub type Floor = Option<Rat>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuiseuxElement {
    /// Smallest common denominator of the stored exponents and floor.
    denom: u64,
    /// exponent -> nonzero coefficient, ascending.
    terms: BTreeMap<Rat, Scalar>,
    floor_q: Floor,
}

/// What is known about v(a) for a possibly truncated element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValuationBound {
    /// Leading term visible: the valuation is exactly this.
    Exact(Rat),
    /// No term survives the floor: the valuation is strictly above this.
    Above(Rat),
    /// Exact zero.
    Infinite,
}

impl fmt::Display for ValuationBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuationBound::Exact(v) => write!(f, "{v}"),
            ValuationBound::Above(v) => write!(f, "> {v}"),
            ValuationBound::Infinite => write!(f, "+inf"),
        }
    }
}

/// A threshold p/q for valuation-ring membership tests: the set { v >= level }.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationLevel(pub Rat);

impl ValuationLevel {
    /// Whether the element lies in { v >= level }. `None` when the truncation
    /// floor is too shallow to decide.
    pub fn contains(&self, bound: &ValuationBound) -> Option<bool> {
        match bound {
            ValuationBound::Infinite => Some(true),
            ValuationBound::Exact(v) => Some(*v >= self.0),
            ValuationBound::Above(b) => {
                if *b >= self.0 {
                    Some(true)
                } else {
                    None
                }
            }
        }
    }

    /// Whether the element lies in the strict set { v > level }.
    pub fn contains_strictly(&self, bound: &ValuationBound) -> Option<bool> {
        match bound {
            ValuationBound::Infinite => Some(true),
            ValuationBound::Exact(v) => Some(*v > self.0),
            ValuationBound::Above(b) => {
                if *b >= self.0 {
                    Some(true)
                } else {
                    None
                }
            }
        }
    }
}

fn rat_denom_u64(q: &Rat) -> u64 {
    q.denom()
        .to_u64()
        .expect("exponent denominator exceeds u64")
}

impl PuiseuxElement {
    fn normalized(mut terms: BTreeMap<Rat, Scalar>, floor_q: Floor) -> Self {
        terms.retain(|exp, coeff| {
            !coeff.is_zero() && floor_q.as_ref().map(|f| exp >= f).unwrap_or(true)
        });
        let mut denom = 1u64;
        for exp in terms.keys() {
            denom = denom.lcm(&rat_denom_u64(exp));
        }
        if let Some(f) = &floor_q {
            denom = denom.lcm(&rat_denom_u64(f));
        }
        PuiseuxElement {
            denom,
            terms,
            floor_q,
        }
    }

    pub fn from_terms(terms: Vec<(Rat, Scalar)>, floor_q: Floor) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (exp, coeff) in terms {
            let entry = map.entry(exp).or_insert_with(Scalar::zero);
            *entry = field_add(entry, &coeff)?;
        }
        Ok(Self::normalized(map, floor_q))
    }

    /// Exact zero (valuation +infinity).
    pub fn zero() -> Self {
        Self::normalized(BTreeMap::new(), None)
    }

    /// Zero known only above the floor.
    pub fn truncated_zero(floor_q: Rat) -> Self {
        Self::normalized(BTreeMap::new(), Some(floor_q))
    }

    pub fn constant(c: Scalar) -> Self {
        Self::monomial(c, Rat::zero())
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    /// c * t^q, exact.
    pub fn monomial(c: Scalar, q: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(q, c);
        }
        Self::normalized(terms, None)
    }

    pub fn t_power(q: Rat) -> Self {
        Self::monomial(Scalar::one(), q)
    }

    pub fn denominator(&self) -> u64 {
        self.denom
    }

    pub fn floor(&self) -> &Floor {
        &self.floor_q
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &Scalar)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// True only for the exact zero. A truncated zero is not "zero": its tail
    /// is unknown.
    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.floor_q.is_none()
    }

    pub fn has_no_visible_terms(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest exponent with a nonzero coefficient.
    pub fn degree(&self) -> Option<&Rat> {
        self.terms.keys().next_back()
    }

    pub fn leading(&self) -> Option<(&Rat, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn coeff(&self, exp: &Rat) -> Scalar {
        self.terms.get(exp).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Drops terms below `floor` and records the new floor. Deepening beyond
    /// the current floor is refused since the dropped tail is unknown.
    pub fn truncate_to(&self, floor: Rat) -> Self {
        let new_floor = match &self.floor_q {
            None => Some(floor),
            Some(f) => Some(if *f > floor { f.clone() } else { floor }),
        };
        Self::normalized(self.terms.clone(), new_floor)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(exp, c)| (exp.clone(), f(c)))
            .collect();
        Self::normalized(terms, self.floor_q.clone())
    }

    pub fn scale(&self, c: &Scalar) -> Result<Self> {
        if c.is_zero() {
            // Exactly zero coefficient wipes the element, floor included:
            // 0 * unknown = 0.
            return Ok(Self::zero());
        }
        let mut terms = BTreeMap::new();
        for (exp, coeff) in &self.terms {
            terms.insert(exp.clone(), field_mul(coeff, c)?);
        }
        Ok(Self::normalized(terms, self.floor_q.clone()))
    }

    /// Multiplies by t^q, shifting exponents and floor.
    pub fn shift(&self, q: &Rat) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(exp, c)| (exp + q, c.clone()))
            .collect();
        Self::normalized(terms, self.floor_q.as_ref().map(|f| f + q))
    }
}

impl fmt::Display for PuiseuxElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (exp, c) in self.terms.iter().rev() {
            let coeff = if c.is_one() && !exp.is_zero() {
                String::new()
            } else {
                format!("{c}")
            };
            let var = if exp.is_zero() {
                String::new()
            } else if exp.is_one() {
                "t".into()
            } else {
                format!("t^{exp}")
            };
            let part = match (coeff.is_empty(), var.is_empty()) {
                (true, _) => var.clone(),
                (false, true) => coeff,
                (false, false) => format!("({coeff})*{var}"),
            };
            parts.push(part);
        }
        if let Some(fl) = &self.floor_q {
            parts.push(format!("O(t^<{fl})"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

fn min_floor(a: &Floor, b: &Floor) -> Floor {
    // max over floors where None acts as -infinity (exact).
    match (a, b) {
        (None, None) => None,
        (Some(x), None) => Some(x.clone()),
        (None, Some(y)) => Some(y.clone()),
        (Some(x), Some(y)) => Some(if x > y { x.clone() } else { y.clone() }),
    }
}

/// v(a): exact when a leading term is visible, a strict lower bound when only
/// the floor is known, +infinity for the exact zero.
pub fn pz_valuation(a: &PuiseuxElement) -> ValuationBound {
    match a.degree() {
        Some(d) => ValuationBound::Exact(-d.clone()),
        None => match &a.floor_q {
            None => ValuationBound::Infinite,
            Some(f) => ValuationBound::Above(-f.clone()),
        },
    }
}

pub fn pz_add(a: &PuiseuxElement, b: &PuiseuxElement) -> Result<PuiseuxElement> {
    let floor = min_floor(&a.floor_q, &b.floor_q);
    let mut terms = a.terms.clone();
    for (exp, coeff) in &b.terms {
        let entry = terms.entry(exp.clone()).or_insert_with(Scalar::zero);
        *entry = field_add(entry, coeff)?;
    }
    Ok(PuiseuxElement::normalized(terms, floor))
}

pub fn pz_neg(a: &PuiseuxElement) -> PuiseuxElement {
    let terms = a
        .terms
        .iter()
        .map(|(exp, c)| (exp.clone(), field_neg(c)))
        .collect();
    PuiseuxElement::normalized(terms, a.floor_q.clone())
}

pub fn pz_sub(a: &PuiseuxElement, b: &PuiseuxElement) -> Result<PuiseuxElement> {
    pz_add(a, &pz_neg(b))
}

pub fn pz_mul(a: &PuiseuxElement, b: &PuiseuxElement) -> Result<PuiseuxElement> {
    if a.is_exact_zero() || b.is_exact_zero() {
        return Ok(PuiseuxElement::zero());
    }
    // Unknown-tail contributions: known(a) * tail(b) lives below deg(a) +
    // floor(b), and symmetrically; tail * tail lies below floor(a) + floor(b),
    // which the two bounds dominate.
    let eff_deg =
        |x: &PuiseuxElement| -> Option<Rat> { x.degree().cloned().or_else(|| x.floor_q.clone()) };
    let mut floor: Floor = None;
    if let (Some(fb), Some(da)) = (&b.floor_q, eff_deg(a)) {
        floor = min_floor(&floor, &Some(fb + da));
    }
    if let (Some(fa), Some(db)) = (&a.floor_q, eff_deg(b)) {
        floor = min_floor(&floor, &Some(fa + db));
    }
    let mut terms: BTreeMap<Rat, Scalar> = BTreeMap::new();
    for (ea, ca) in &a.terms {
        for (eb, cb) in &b.terms {
            let exp = ea + eb;
            if let Some(f) = &floor {
                if exp < *f {
                    continue;
                }
            }
            let prod = field_mul(ca, cb)?;
            let entry = terms.entry(exp).or_insert_with(Scalar::zero);
            *entry = field_add(entry, &prod)?;
        }
    }
    Ok(PuiseuxElement::normalized(terms, floor))
}

/// Inverse via the geometric series after factoring the leading monomial.
/// The result keeps the input's floor, matching the bivariate series rule.
pub fn pz_inv(a: &PuiseuxElement) -> Result<PuiseuxElement> {
    let Some((q, c)) = a.leading().map(|(e, c)| (e.clone(), c.clone())) else {
        return Err(if a.is_exact_zero() {
            Error::DivisionByZero
        } else {
            Error::InvertTruncatedZero
        });
    };
    let lead_inv = PuiseuxElement::monomial(c.inv()?, -q.clone());
    if a.terms.len() == 1 {
        let result = match &a.floor_q {
            // A truncated monomial still has an unknown tail; the inverse
            // keeps a floor shifted by the leading degree swap.
            Some(f) => lead_inv.truncate_to(f - q.clone() - q.clone()),
            None => lead_inv,
        };
        return Ok(result);
    }
    let Some(floor) = a.floor_q.clone() else {
        return Err(Error::FloorTooShallow(
            "inverse of an exact multi-term element is an infinite series; truncate first".into(),
        ));
    };
    // a = c t^q (1 + u) with v(u) > 0; 1/a = c^-1 t^-q * sum (-u)^i.
    let u = pz_sub(&pz_mul(a, &lead_inv)?, &PuiseuxElement::one())?;
    let series_floor = &floor - &q; // floor of u and of the geometric sum
    let mut acc = PuiseuxElement::one().truncate_to(series_floor.clone());
    let mut power = PuiseuxElement::one();
    let neg_u = pz_neg(&u);
    let mut guard = 0usize;
    loop {
        power = pz_mul(&power, &neg_u)?.truncate_to(series_floor.clone());
        if power.has_no_visible_terms() {
            break;
        }
        acc = pz_add(&acc, &power)?;
        guard += 1;
        if guard > 100_000 {
            return Err(Error::Internal(
                "geometric series failed to terminate".into(),
            ));
        }
    }
    let inv = pz_mul(&lead_inv, &acc)?;
    Ok(inv.truncate_to(&floor - &q - &q))
}

pub fn pz_div(a: &PuiseuxElement, b: &PuiseuxElement) -> Result<PuiseuxElement> {
    pz_mul(a, &pz_inv(b)?)
}

pub fn pz_pow(a: &PuiseuxElement, e: i64) -> Result<PuiseuxElement> {
    if e == 0 {
        return Ok(PuiseuxElement::one());
    }
    let base = if e < 0 { pz_inv(a)? } else { a.clone() };
    let mut acc: Option<PuiseuxElement> = None;
    let mut cur = base;
    let mut exp = e.unsigned_abs();
    loop {
        if exp & 1 == 1 {
            acc = Some(match acc {
                None => cur.clone(),
                Some(v) => pz_mul(&v, &cur)?,
            });
        }
        exp >>= 1;
        if exp == 0 {
            break;
        }
        cur = pz_mul(&cur, &cur)?;
    }
    Ok(acc.unwrap())
}

/// Principal k-th root via the binomial series, when the leading coefficient
/// has a k-th root in the ambient field. `Ok(None)` when it does not.
pub fn pz_kth_root(a: &PuiseuxElement, k: u32, field: FieldSpec) -> Result<Option<PuiseuxElement>> {
    assert!(k >= 1);
    if k == 1 {
        return Ok(Some(a.clone()));
    }
    let Some((q, c)) = a.leading().map(|(e, c)| (e.clone(), c.clone())) else {
        return Err(if a.is_exact_zero() {
            Error::DivisionByZero
        } else {
            Error::InvertTruncatedZero
        });
    };
    let Some(c_root) = scalar_kth_root(&c, k, field)? else {
        return Ok(None);
    };
    let root_q = &q / rat_int(k as i64);
    let lead_root = PuiseuxElement::monomial(c_root, root_q.clone());
    if a.terms.len() == 1 {
        let result = match &a.floor_q {
            Some(f) => lead_root.truncate_to(f - &q + root_q),
            None => lead_root,
        };
        return Ok(Some(result));
    }
    let Some(floor) = a.floor_q.clone() else {
        return Err(Error::FloorTooShallow(
            "k-th root of an exact multi-term element is an infinite series; truncate first".into(),
        ));
    };
    // a = c t^q (1 + u); a^(1/k) = c^(1/k) t^(q/k) * sum binom(1/k, i) u^i.
    let lead_inv = PuiseuxElement::monomial(c.inv()?, -q.clone());
    let u = pz_sub(&pz_mul(a, &lead_inv)?, &PuiseuxElement::one())?;
    let series_floor = &floor - &q;
    let mut acc = PuiseuxElement::one().truncate_to(series_floor.clone());
    let mut power = PuiseuxElement::one();
    let mut i = 0u32;
    loop {
        i += 1;
        power = pz_mul(&power, &u)?.truncate_to(series_floor.clone());
        if power.has_no_visible_terms() {
            break;
        }
        let term = power.scale(&Scalar::from_rat(binom_frac(k, i)))?;
        acc = pz_add(&acc, &term)?;
        if i > 100_000 {
            return Err(Error::Internal(
                "binomial series failed to terminate".into(),
            ));
        }
    }
    let root = pz_mul(&lead_root, &acc)?;
    Ok(Some(root.truncate_to(&floor - &q + root_q)))
}

/// All k-th roots: the principal root times each k-th root of unity. Errors
/// if the field lacks the needed roots of unity or the leading coefficient
/// has no representable k-th root.
pub fn pz_all_kth_roots(
    a: &PuiseuxElement,
    k: u32,
    field: FieldSpec,
) -> Result<Vec<PuiseuxElement>> {
    let principal = pz_kth_root(a, k, field)?.ok_or_else(|| {
        let lead = a
            .leading()
            .map(|(_, c)| c.to_string())
            .unwrap_or_else(|| "0".into());
        Error::FieldExtensionRequired {
            field: field.to_string(),
            what: format!("a {k}-th root of the leading coefficient {lead}"),
        }
    })?;
    let units = roots_of_unity(field, k)?;
    units.iter().map(|eps| principal.scale(eps)).collect()
}

/// Equality of everything visible above the shallower of the two floors.
/// Exact elements compare all their terms against the other side's floor.
pub fn pz_eq_up_to_common_floor(a: &PuiseuxElement, b: &PuiseuxElement) -> bool {
    let floor = min_floor(&a.floor_q, &b.floor_q);
    let keep = |x: &PuiseuxElement| -> BTreeMap<Rat, Scalar> {
        x.terms
            .iter()
            .filter(|(exp, _)| floor.as_ref().map(|f| *exp >= f).unwrap_or(true))
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect()
    };
    keep(a) == keep(b)
}

impl ExactField for PuiseuxElement {
    fn zero() -> Self {
        PuiseuxElement::zero()
    }
    fn one() -> Self {
        PuiseuxElement::one()
    }
    /// Only the exact zero counts: a truncated zero still carries information
    /// (its floor) and must not be silently dropped from term maps.
    fn is_zero(&self) -> bool {
        self.is_exact_zero()
    }
    fn add(&self, rhs: &Self) -> Result<Self> {
        pz_add(self, rhs)
    }
    fn neg(&self) -> Self {
        pz_neg(self)
    }
    fn mul(&self, rhs: &Self) -> Result<Self> {
        pz_mul(self, rhs)
    }
    fn inv(&self) -> Result<Self> {
        pz_inv(self)
    }
    fn from_rational(q: &Rat) -> Self {
        PuiseuxElement::constant(Scalar::from_rat(q.clone()))
    }
}
