//! Exact coefficient fields: arbitrary-precision rationals and cyclotomic
//! fields Q(zeta_K) represented modulo the K-th cyclotomic polynomial.
//!
//! Working modulo the cyclotomic polynomial (rather than X^K - 1) keeps the
//! representation a field: zero tests are exact and every nonzero element is
//! invertible via the extended Euclidean algorithm in Q\[X\].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Parses "p/q" or "p" with optional sign.
pub fn parse_rat(s: &str) -> Result<Rat> {
    Rat::from_str(s.trim()).map_err(|e| Error::Parse(format!("bad rational `{s}`: {e}")))
}

/// Canonical textual form: "p" when the denominator is 1, else "p/q".
pub fn fmt_rat(q: &Rat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

// ---------------------------------------------------------------------------
// Field descriptors
// ---------------------------------------------------------------------------

/// Which exact coefficient field a computation runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldSpec {
    Rational,
    /// Gaussian rationals Q(i); arithmetic identical to `Cyclotomic(4)`.
    Gaussian,
    Cyclotomic(u32),
}

impl FieldSpec {
    /// Order of the root of unity adjoined, if any. Gaussian rationals are
    /// the order-4 cyclotomic field.
    pub fn cyclotomic_order(&self) -> Option<u32> {
        match self {
            FieldSpec::Rational => None,
            FieldSpec::Gaussian => Some(4),
            FieldSpec::Cyclotomic(k) => Some(*k),
        }
    }

    /// True when the field contains a primitive k-th root of unity.
    pub fn has_root_of_unity(&self, k: u32) -> bool {
        if k <= 2 {
            return k > 0;
        }
        match self.cyclotomic_order() {
            None => false,
            Some(order) => order % k == 0,
        }
    }

    pub fn compatible(&self, other: &FieldSpec) -> bool {
        self.cyclotomic_order() == other.cyclotomic_order()
    }

    pub fn merge(&self, other: &FieldSpec) -> Result<FieldSpec> {
        if self.compatible(other) {
            Ok(*self)
        } else {
            Err(Error::MixedFields(self.to_string(), other.to_string()))
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rational => write!(f, "rational"),
            FieldSpec::Gaussian => write!(f, "gaussian"),
            FieldSpec::Cyclotomic(k) => write!(f, "cyclotomic:{k}"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "rational" => Ok(FieldSpec::Rational),
            "gaussian" => Ok(FieldSpec::Gaussian),
            _ => {
                if let Some(rest) = s.strip_prefix("cyclotomic:") {
                    let k: u32 = rest
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad cyclotomic order `{rest}`")))?;
                    if k == 0 {
                        return Err(Error::Parse("cyclotomic order must be positive".into()));
                    }
                    Ok(FieldSpec::Cyclotomic(k))
                } else {
                    Err(Error::Parse(format!(
                        "unknown field `{s}` (expected rational, gaussian, cyclotomic:K)"
                    )))
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Cyclotomic polynomials and Q[X] helpers
// ---------------------------------------------------------------------------

pub fn euler_phi(n: u32) -> u32 {
    let mut n = n as u64;
    let mut result = n;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result as u32
}

fn divisors(n: u32) -> Vec<u32> {
    let mut d: Vec<u32> = (1..=n).filter(|i| n.is_multiple_of(*i)).collect();
    d.sort_unstable();
    d
}

/// Exact division of integer polynomials, ascending coefficients, monic divisor.
fn zpoly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    assert!(den.last().map(|c| c.is_one()).unwrap_or(false));
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let nd = rem.len() - 1;
    assert!(nd >= dd);
    let mut quot = vec![BigInt::zero(); nd - dd + 1];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].clone();
        if !c.is_zero() {
            for (j, dc) in den.iter().enumerate() {
                rem[i + j] -= &c * dc;
            }
        }
        quot[i] = c;
    }
    assert!(
        rem.iter().all(|c| c.is_zero()),
        "inexact polynomial division"
    );
    quot
}

/// Coefficients of the K-th cyclotomic polynomial, ascending, monic, cached.
pub fn cyclotomic_polynomial(k: u32) -> Vec<BigInt> {
    static CACHE: OnceLock<Mutex<BTreeMap<u32, Vec<BigInt>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&k) {
        return p.clone();
    }
    // X^K - 1 divided by Phi_d for every proper divisor d of K.
    let mut poly = vec![BigInt::zero(); (k + 1) as usize];
    poly[0] = -BigInt::one();
    poly[k as usize] = BigInt::one();
    for d in divisors(k) {
        if d < k {
            let phi_d = cyclotomic_polynomial(d);
            poly = zpoly_div_exact(&poly, &phi_d);
        }
    }
    cache.lock().unwrap().insert(k, poly.clone());
    poly
}

fn qpoly_trim(p: &mut Vec<Rat>) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

fn qpoly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            if !cb.is_zero() {
                out[i + j] += ca * cb;
            }
        }
    }
    qpoly_trim(&mut out);
    out
}

/// Remainder of `num` modulo `den` in Q[X]; `den` need not be monic.
fn qpoly_rem(num: &[Rat], den: &[Rat]) -> Vec<Rat> {
    let mut rem = num.to_vec();
    qpoly_trim(&mut rem);
    let dd = den.len() - 1;
    let lead_inv = den[dd].recip();
    while rem.len() > dd {
        let c = rem.last().unwrap() * &lead_inv;
        let shift = rem.len() - 1 - dd;
        for (j, dc) in den.iter().enumerate() {
            let v = &c * dc;
            rem[shift + j] -= v;
        }
        qpoly_trim(&mut rem);
        if rem.len() == shift + dd + 1 {
            // Leading term must have cancelled exactly.
            unreachable!("leading cancellation failed");
        }
    }
    rem
}

/// Extended gcd: returns (g, s) with s*a == g (mod m), g a nonzero constant
/// whenever gcd(a, m) is constant.
fn qpoly_half_ext_gcd(a: &[Rat], m: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    qpoly_trim(&mut r0);
    qpoly_trim(&mut r1);
    let mut s0: Vec<Rat> = Vec::new();
    let mut s1: Vec<Rat> = vec![Rat::one()];
    while !r1.is_empty() {
        // Divide r0 by r1.
        let dd = r1.len() - 1;
        let lead_inv = r1[dd].recip();
        let mut q: Vec<Rat> = vec![Rat::zero(); r0.len().saturating_sub(dd)];
        let mut rem = r0.clone();
        while rem.len() > dd {
            let c = rem.last().unwrap() * &lead_inv;
            let shift = rem.len() - 1 - dd;
            q[shift] = c.clone();
            for (j, dc) in r1.iter().enumerate() {
                let v = &c * dc;
                rem[shift + j] -= v;
            }
            qpoly_trim(&mut rem);
        }
        qpoly_trim(&mut q);
        // (r0, r1) = (r1, r0 - q r1); (s0, s1) = (s1, s0 - q s1)
        let qs1 = qpoly_mul(&q, &s1);
        let mut s2 = s0.clone();
        s2.resize(s2.len().max(qs1.len()), Rat::zero());
        for (i, c) in qs1.iter().enumerate() {
            s2[i] -= c;
        }
        qpoly_trim(&mut s2);
        r0 = r1;
        r1 = rem;
        s0 = s1;
        s1 = s2;
    }
    (r0, s0)
}

// ---------------------------------------------------------------------------
// Cyclotomic field elements
// ---------------------------------------------------------------------------

/// Element of Q(zeta_K) as a Q-linear combination of 1, zeta, ..., zeta^(phi(K)-1).
/// `coeffs` always has length phi(K).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicElem {
    pub order: u32,
    pub coeffs: Vec<Rat>,
}

impl CyclotomicElem {
    fn zero(order: u32) -> Self {
        CyclotomicElem {
            order,
            coeffs: vec![Rat::zero(); euler_phi(order) as usize],
        }
    }

    fn from_constant(order: u32, c: Rat) -> Self {
        let mut e = CyclotomicElem::zero(order);
        e.coeffs[0] = c;
        e
    }

    pub(crate) fn from_poly(order: u32, poly: &[Rat]) -> Self {
        let phi = euler_phi(order) as usize;
        let modulus: Vec<Rat> = cyclotomic_polynomial(order)
            .iter()
            .map(|c| Rat::from_integer(c.clone()))
            .collect();
        let mut rem = qpoly_rem(poly, &modulus);
        rem.resize(phi, Rat::zero());
        CyclotomicElem { order, coeffs: rem }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(|c| c.is_zero())
    }
}

// ---------------------------------------------------------------------------
// Scalars
// ---------------------------------------------------------------------------

/// A scalar from one of the supported exact fields. Cyclotomic elements that
/// happen to be rational collapse to the `Rational` variant, so equality is
/// structural equality of the canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scalar {
    Rational(Rat),
    Cyclotomic(CyclotomicElem),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(Rat::zero())
    }

    pub fn one() -> Self {
        Scalar::Rational(Rat::one())
    }

    pub fn from_rat(q: Rat) -> Self {
        Scalar::Rational(q)
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Rational(rat_int(n))
    }

    /// Canonicalizing constructor: orders 1 and 2 are rational, and any
    /// element with no zeta component collapses to its constant term.
    pub fn from_cyclotomic(e: CyclotomicElem) -> Self {
        if e.order <= 2 || e.is_rational() {
            Scalar::Rational(e.coeffs.first().cloned().unwrap_or_else(Rat::zero))
        } else {
            Scalar::Cyclotomic(e)
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_zero(),
            Scalar::Cyclotomic(e) => e.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Rational(q) if q.is_one())
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        match self {
            Scalar::Rational(q) => Some(q),
            Scalar::Cyclotomic(_) => None,
        }
    }

    pub fn field_name(&self) -> String {
        match self {
            Scalar::Rational(_) => "rational".into(),
            Scalar::Cyclotomic(e) => format!("cyclotomic:{}", e.order),
        }
    }

    fn lift(&self, order: u32) -> CyclotomicElem {
        match self {
            Scalar::Rational(q) => CyclotomicElem::from_constant(order, q.clone()),
            Scalar::Cyclotomic(e) => {
                debug_assert_eq!(e.order, order);
                e.clone()
            }
        }
    }

    /// Common cyclotomic order of two scalars, if they live in one field.
    /// Rationals embed into every cyclotomic field.
    fn common_order(&self, other: &Scalar) -> Result<Option<u32>> {
        match (self, other) {
            (Scalar::Rational(_), Scalar::Rational(_)) => Ok(None),
            (Scalar::Cyclotomic(e), Scalar::Rational(_)) => Ok(Some(e.order)),
            (Scalar::Rational(_), Scalar::Cyclotomic(e)) => Ok(Some(e.order)),
            (Scalar::Cyclotomic(a), Scalar::Cyclotomic(b)) => {
                if a.order == b.order {
                    Ok(Some(a.order))
                } else {
                    Err(Error::MixedFields(self.field_name(), other.field_name()))
                }
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => write!(f, "{}", fmt_rat(q)),
            Scalar::Cyclotomic(e) => {
                let mut parts = Vec::new();
                for (i, c) in e.coeffs.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let basis = match i {
                        0 => String::new(),
                        1 => format!("z{}", e.order),
                        _ => format!("z{}^{}", e.order, i),
                    };
                    if basis.is_empty() {
                        parts.push(fmt_rat(c));
                    } else if c.is_one() {
                        parts.push(basis);
                    } else {
                        parts.push(format!("{}*{}", fmt_rat(c), basis));
                    }
                }
                if parts.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", parts.join(" + "))
                }
            }
        }
    }
}

pub fn field_add(a: &Scalar, b: &Scalar) -> Result<Scalar> {
    match a.common_order(b)? {
        None => {
            let (Scalar::Rational(x), Scalar::Rational(y)) = (a, b) else {
                unreachable!()
            };
            Ok(Scalar::Rational(x + y))
        }
        Some(order) => {
            let x = a.lift(order);
            let y = b.lift(order);
            let coeffs = x
                .coeffs
                .iter()
                .zip(y.coeffs.iter())
                .map(|(p, q)| p + q)
                .collect();
            Ok(Scalar::from_cyclotomic(CyclotomicElem { order, coeffs }))
        }
    }
}

pub fn field_neg(a: &Scalar) -> Scalar {
    match a {
        Scalar::Rational(q) => Scalar::Rational(-q),
        Scalar::Cyclotomic(e) => Scalar::Cyclotomic(CyclotomicElem {
            order: e.order,
            coeffs: e.coeffs.iter().map(|c| -c).collect(),
        }),
    }
}

pub fn field_sub(a: &Scalar, b: &Scalar) -> Result<Scalar> {
    field_add(a, &field_neg(b))
}

pub fn field_mul(a: &Scalar, b: &Scalar) -> Result<Scalar> {
    match a.common_order(b)? {
        None => {
            let (Scalar::Rational(x), Scalar::Rational(y)) = (a, b) else {
                unreachable!()
            };
            Ok(Scalar::Rational(x * y))
        }
        Some(order) => {
            let x = a.lift(order);
            let y = b.lift(order);
            let prod = qpoly_mul(&x.coeffs, &y.coeffs);
            Ok(Scalar::from_cyclotomic(CyclotomicElem::from_poly(
                order, &prod,
            )))
        }
    }
}

pub fn field_inv(a: &Scalar) -> Result<Scalar> {
    match a {
        Scalar::Rational(q) => {
            if q.is_zero() {
                Err(Error::DivisionByZero)
            } else {
                Ok(Scalar::Rational(q.recip()))
            }
        }
        Scalar::Cyclotomic(e) => {
            if e.is_zero() {
                return Err(Error::DivisionByZero);
            }
            let modulus: Vec<Rat> = cyclotomic_polynomial(e.order)
                .iter()
                .map(|c| Rat::from_integer(c.clone()))
                .collect();
            let mut a_poly = e.coeffs.clone();
            qpoly_trim(&mut a_poly);
            let (g, s) = qpoly_half_ext_gcd(&a_poly, &modulus);
            // The modulus is irreducible over Q, so the gcd is a nonzero constant.
            if g.len() != 1 {
                return Err(Error::Internal(format!(
                    "cyclotomic gcd has degree {} for order {}",
                    g.len().saturating_sub(1),
                    e.order
                )));
            }
            let ginv = g[0].recip();
            let inv: Vec<Rat> = s.iter().map(|c| c * &ginv).collect();
            Ok(Scalar::from_cyclotomic(CyclotomicElem::from_poly(
                e.order, &inv,
            )))
        }
    }
}

pub fn field_div(a: &Scalar, b: &Scalar) -> Result<Scalar> {
    field_mul(a, &field_inv(b)?)
}

pub fn field_pow(a: &Scalar, e: i64) -> Result<Scalar> {
    if e == 0 {
        return Ok(Scalar::one());
    }
    let base = if e < 0 { field_inv(a)? } else { a.clone() };
    let mut exp = e.unsigned_abs();
    let mut acc = Scalar::one();
    let mut cur = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = field_mul(&acc, &cur)?;
        }
        exp >>= 1;
        if exp > 0 {
            cur = field_mul(&cur, &cur)?;
        }
    }
    Ok(acc)
}

pub fn field_scale_rat(a: &Scalar, q: &Rat) -> Scalar {
    field_mul(a, &Scalar::Rational(q.clone())).expect("rational scaling cannot mix fields")
}

// ---------------------------------------------------------------------------
// Roots of unity and restricted k-th roots
// ---------------------------------------------------------------------------

/// zeta_K^e as a canonical scalar.
pub fn zeta_power(order: u32, e: i64) -> Scalar {
    let e = e.rem_euclid(order as i64) as u32;
    if order <= 2 {
        return if order == 2 && e == 1 {
            Scalar::from_int(-1)
        } else {
            Scalar::one()
        };
    }
    let phi = euler_phi(order) as usize;
    if (e as usize) < phi {
        let mut elem = CyclotomicElem::zero(order);
        elem.coeffs[e as usize] = Rat::one();
        Scalar::from_cyclotomic(elem)
    } else {
        let mut poly = vec![Rat::zero(); e as usize + 1];
        poly[e as usize] = Rat::one();
        Scalar::from_cyclotomic(CyclotomicElem::from_poly(order, &poly))
    }
}

/// A primitive k-th root of unity in the given field, or an error naming the
/// extension that would be needed. k = 1, 2 succeed over every field.
pub fn primitive_root_of_unity(field: FieldSpec, k: u32) -> Result<Scalar> {
    if k == 0 {
        return Err(Error::Parse("root-of-unity order must be positive".into()));
    }
    if k == 1 {
        return Ok(Scalar::one());
    }
    if k == 2 {
        return Ok(Scalar::from_int(-1));
    }
    match field.cyclotomic_order() {
        Some(order) if order % k == 0 => Ok(zeta_power(order, (order / k) as i64)),
        _ => Err(Error::FieldExtensionRequired {
            field: field.to_string(),
            what: format!("a primitive {k}-th root of unity"),
        }),
    }
}

/// All k-th roots of unity, as powers of a primitive one (index order 0..k).
pub fn roots_of_unity(field: FieldSpec, k: u32) -> Result<Vec<Scalar>> {
    let eps = primitive_root_of_unity(field, k)?;
    let mut out = Vec::with_capacity(k as usize);
    let mut cur = Scalar::one();
    for _ in 0..k {
        out.push(cur.clone());
        cur = field_mul(&cur, &eps)?;
    }
    Ok(out)
}

/// Exact k-th root within Q, if one exists.
pub fn rational_kth_root(q: &Rat, k: u32) -> Option<Rat> {
    assert!(k >= 1);
    if q.is_zero() {
        return Some(Rat::zero());
    }
    if q.is_negative() && k.is_multiple_of(2) {
        return None;
    }
    let neg = q.is_negative();
    let (num, den) = (q.numer().abs(), q.denom().abs());
    let rn = num.nth_root(k);
    let rd = den.nth_root(k);
    if num_traits::pow(rn.clone(), k as usize) != num
        || num_traits::pow(rd.clone(), k as usize) != den
    {
        return None;
    }
    let mut root = Rat::new(rn, rd);
    if neg {
        root = -root;
    }
    Some(root)
}

/// Searches for a k-th root of `a` of the shape c * zeta^j with c rational,
/// which is the only shape this layer ever needs. Returns `Ok(None)` when no
/// root of that shape exists in the ambient field.
pub fn scalar_kth_root(a: &Scalar, k: u32, field: FieldSpec) -> Result<Option<Scalar>> {
    if k == 0 {
        return Err(Error::Parse("root index must be positive".into()));
    }
    if k == 1 {
        return Ok(Some(a.clone()));
    }
    if a.is_zero() {
        return Ok(Some(Scalar::zero()));
    }
    match field.cyclotomic_order() {
        None => {
            let Some(q) = a.as_rational() else {
                return Err(Error::MixedFields(field.to_string(), a.field_name()));
            };
            Ok(rational_kth_root(q, k).map(Scalar::Rational))
        }
        Some(order) => {
            // If a = c^k * zeta^(j k) then a * zeta^(-j k) is rational, so scan j.
            for j in 0..order {
                let twist = zeta_power(order, -((j as i64) * (k as i64)));
                let candidate = field_mul(a, &twist)?;
                if let Some(q) = candidate.as_rational() {
                    if let Some(c) = rational_kth_root(q, k) {
                        let root = field_mul(&Scalar::Rational(c), &zeta_power(order, j as i64))?;
                        return Ok(Some(root));
                    }
                }
            }
            Ok(None)
        }
    }
}

// ---------------------------------------------------------------------------
// Exact-field abstraction for series coefficients
// ---------------------------------------------------------------------------

/// Operations a series coefficient type must provide. All arithmetic is exact;
/// `add`/`mul` are fallible only because mixed-field operands are rejected.
pub trait ExactField: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + Sized {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Result<Self>;
    fn inv(&self) -> Result<Self>;
    fn from_rational(q: &Rat) -> Self;

    fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    fn scale_rat(&self, q: &Rat) -> Self {
        self.mul(&Self::from_rational(q))
            .expect("rational scaling cannot mix fields")
    }
}

impl ExactField for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn one() -> Self {
        Scalar::one()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Result<Self> {
        field_add(self, rhs)
    }
    fn neg(&self) -> Self {
        field_neg(self)
    }
    fn mul(&self, rhs: &Self) -> Result<Self> {
        field_mul(self, rhs)
    }
    fn inv(&self) -> Result<Self> {
        field_inv(self)
    }
    fn from_rational(q: &Rat) -> Self {
        Scalar::Rational(q.clone())
    }
}

// ---------------------------------------------------------------------------
// Fractional binomial coefficients
// ---------------------------------------------------------------------------

type BinomKey = (u32, u32);

fn binom_cache() -> &'static Mutex<BTreeMap<BinomKey, Rat>> {
    static CACHE: OnceLock<Mutex<BTreeMap<BinomKey, Rat>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// Binomial coefficient (1/k choose i), cached per (k, i).
pub fn binom_frac(k: u32, i: u32) -> Rat {
    assert!(k >= 1);
    if let Some(v) = binom_cache().lock().unwrap().get(&(k, i)) {
        return v.clone();
    }
    // prod_{j=0}^{i-1} (1/k - j) / i!
    let a = rat(1, k as i64);
    let mut num = Rat::one();
    let mut den = Rat::one();
    for j in 0..i {
        num *= &a - rat_int(j as i64);
        den *= rat_int(j as i64 + 1);
    }
    let v = num / den;
    binom_cache().lock().unwrap().insert((k, i), v.clone());
    v
}

/// Fault-injection hooks used by the self-check command to prove the checks
/// can fail. Not part of the public API surface.
#[doc(hidden)]
pub mod faults {
    use super::*;

    pub fn inject_binom_fault(k: u32, i: u32, value: Rat) {
        binom_cache().lock().unwrap().insert((k, i), value);
    }

    pub fn clear_binom_cache() {
        binom_cache().lock().unwrap().clear();
    }
}

/// Convenience: integer power of a rational with i64 exponent.
pub fn rat_pow(q: &Rat, e: i64) -> Result<Rat> {
    if e == 0 {
        return Ok(Rat::one());
    }
    if q.is_zero() {
        if e < 0 {
            return Err(Error::DivisionByZero);
        }
        return Ok(Rat::zero());
    }
    let base = if e < 0 { q.recip() } else { q.clone() };
    let mut acc = Rat::one();
    let mut cur = base;
    let mut exp = e.unsigned_abs();
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= &cur;
        }
        exp >>= 1;
        if exp > 0 {
            cur = cur.clone() * cur;
        }
    }
    Ok(acc)
}

/// gcd of an i64 slice, nonnegative; 0 for an empty or all-zero slice.
pub fn gcd_all(values: &[i64]) -> i64 {
    values.iter().fold(0i64, |g, v| g.gcd(v)).abs()
}

/// Floor of a rational as i64 (used for truncation bookkeeping).
pub fn rat_floor_i64(q: &Rat) -> i64 {
    q.floor().to_integer().to_i64().expect("exponent overflow")
}
