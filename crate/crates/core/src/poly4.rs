//! Polynomial systems in four variables (U, V, X, Y) obtained from bivariate
//! Laurent data by clearing negative exponents: a term c X^i Y^j with i < 0
//! becomes c U^{-i}, and likewise j < 0 becomes V^{-j}. Together with the
//! constraints UX - 1 and VY - 1 this embeds the torus equations into an
//! ordinary polynomial system, which is used as an independent verification
//! path (the solver itself never leaves the Laurent side).

use std::collections::BTreeMap;

use num_rational::BigRational as Rat;

use crate::error::{Error, Result};
use crate::laurent2::LaurentSeries2;
use crate::puiseux::{pz_add, pz_mul, pz_pow, pz_sub, PuiseuxElement};
use crate::scalars::ExactField;

/// Variable indices into the exponent vectors.
pub const VAR_U: usize = 0;
pub const VAR_V: usize = 1;
pub const VAR_X: usize = 2;
pub const VAR_Y: usize = 3;

/// A polynomial in U, V, X, Y with Puiseux coefficients. All exponents are
/// nonnegative. `tail_floor_q` carries the truncation information of the
/// Laurent series the polynomial came from: evaluations at unit-valuation
/// points are only trusted above that exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly4 {
    pub terms: BTreeMap<[i64; 4], PuiseuxElement>,
    pub tail_floor_q: Option<Rat>,
}

impl Poly4 {
    pub fn zero() -> Self {
        Poly4 {
            terms: BTreeMap::new(),
            tail_floor_q: None,
        }
    }

    pub fn from_terms(terms: Vec<([i64; 4], PuiseuxElement)>) -> Result<Self> {
        let mut map: BTreeMap<[i64; 4], PuiseuxElement> = BTreeMap::new();
        for (exp, c) in terms {
            if exp.iter().any(|&e| e < 0) {
                return Err(Error::Precondition(format!(
                    "polynomial exponents must be nonnegative, got {exp:?}"
                )));
            }
            match map.get_mut(&exp) {
                Some(acc) => *acc = pz_add(acc, &c)?,
                None => {
                    map.insert(exp, c);
                }
            }
        }
        map.retain(|_, c| !c.is_exact_zero());
        Ok(Poly4 {
            terms: map,
            tail_floor_q: None,
        })
    }

    /// Formal partial derivative with respect to one of the four variables.
    pub fn derivative(&self, var: usize) -> Poly4 {
        let mut terms = BTreeMap::new();
        for (exp, c) in &self.terms {
            let e = exp[var];
            if e == 0 {
                continue;
            }
            let mut nexp = *exp;
            nexp[var] = e - 1;
            terms.insert(nexp, c.scale_rat(&Rat::from_integer(e.into())));
        }
        Poly4 {
            terms,
            tail_floor_q: self.tail_floor_q.clone(),
        }
    }

    /// Evaluates at a point with unit-valuation coordinates. The result is
    /// truncated to `tail_floor_q` when the source series was truncated.
    pub fn evaluate(&self, pt: &[PuiseuxElement; 4]) -> Result<PuiseuxElement> {
        let mut acc = PuiseuxElement::zero();
        for (exp, c) in &self.terms {
            let mut term = c.clone();
            for (var, &e) in exp.iter().enumerate() {
                if e != 0 {
                    term = pz_mul(&term, &pz_pow(&pt[var], e)?)?;
                }
            }
            acc = pz_add(&acc, &term)?;
        }
        if let Some(fl) = &self.tail_floor_q {
            acc = acc.truncate_to(fl.clone());
        }
        Ok(acc)
    }
}

/// The transformed system: the cleared equations followed by the two torus
/// constraints UX - 1 and VY - 1.
#[derive(Debug, Clone)]
pub struct PolySystem4 {
    pub equations: Vec<Poly4>,
}

/// Clears denominators of one bivariate Laurent series. Terms below the
/// series floor are unknown; the returned polynomial remembers the matching
/// evaluation bound for points with unit-valuation coordinates (the dropped
/// coefficients all have valuation strictly above `s * (base_total - floor)`).
pub fn clear_denominators(
    series: &LaurentSeries2<PuiseuxElement>,
    s: &Rat,
    base_total: i64,
) -> Poly4 {
    let mut terms = BTreeMap::new();
    for (exp, c) in series.terms() {
        let u = if exp.i < 0 { -exp.i } else { 0 };
        let x = if exp.i > 0 { exp.i } else { 0 };
        let v = if exp.j < 0 { -exp.j } else { 0 };
        let y = if exp.j > 0 { exp.j } else { 0 };
        terms.insert([u, v, x, y], c.clone());
    }
    let bound = Rat::from_integer((base_total - series.floor()).into()) * s;
    Poly4 {
        terms,
        tail_floor_q: Some(-bound),
    }
}

/// The two auxiliary constraints UX - 1 and VY - 1.
pub fn torus_constraints() -> [Poly4; 2] {
    let one = PuiseuxElement::one();
    let minus_one = crate::puiseux::pz_neg(&one);
    let c1 = Poly4::from_terms(vec![
        ([1, 0, 1, 0], one.clone()),
        ([0; 4], minus_one.clone()),
    ])
    .expect("constraint exponents are nonnegative");
    let c2 = Poly4::from_terms(vec![([0, 1, 0, 1], one), ([0; 4], minus_one)])
        .expect("constraint exponents are nonnegative");
    [c1, c2]
}

/// Maps a torus point (x, y) to the corresponding four-variable point
/// (1/x, 1/y, x, y). Requires both coordinates invertible.
pub fn correspondence_point(x: &PuiseuxElement, y: &PuiseuxElement) -> Result<[PuiseuxElement; 4]> {
    Ok([
        crate::puiseux::pz_inv(x)?,
        crate::puiseux::pz_inv(y)?,
        x.clone(),
        y.clone(),
    ])
}

/// Determinant of the 4x4 Jacobian of `eqs` at `pt`, by cofactor expansion.
pub fn jacobian4_det(eqs: &[Poly4; 4], pt: &[PuiseuxElement; 4]) -> Result<PuiseuxElement> {
    let mut m: Vec<Vec<PuiseuxElement>> = Vec::with_capacity(4);
    for eq in eqs {
        let mut row = Vec::with_capacity(4);
        for var in 0..4 {
            row.push(eq.derivative(var).evaluate(pt)?);
        }
        m.push(row);
    }
    det_n(&m)
}

fn det_n(m: &[Vec<PuiseuxElement>]) -> Result<PuiseuxElement> {
    let n = m.len();
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let mut acc = PuiseuxElement::zero();
    for col in 0..n {
        if m[0][col].is_exact_zero() {
            continue;
        }
        let minor: Vec<Vec<PuiseuxElement>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != col)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let cof = pz_mul(&m[0][col], &det_n(&minor)?)?;
        acc = if col % 2 == 0 {
            pz_add(&acc, &cof)?
        } else {
            pz_sub(&acc, &cof)?
        };
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent2::{Exponent2, LaurentSeries2};
    use crate::puiseux::{pz_neg, PuiseuxElement};
    use crate::scalars::{rat_int, FieldSpec, Scalar};

    fn pz_const(n: i64) -> PuiseuxElement {
        PuiseuxElement::constant(Scalar::from_rat(rat_int(n)))
    }

    // X^2 + Y + 1/Y + X/Y^3 + 1/(X^2 Y^2) clears to X^2 + Y + V + X V^3 + U^2 V^2.
    #[test]
    fn clearing_matches_hand_expansion() {
        let field = FieldSpec::Rational;
        let mk = |i: i64, j: i64| (Exponent2::new(i, j), pz_const(1));
        let series: LaurentSeries2<PuiseuxElement> = LaurentSeries2::from_terms(
            field,
            vec![mk(2, 0), mk(0, 1), mk(0, -1), mk(1, -3), mk(-2, -2)],
            -10,
        )
        .unwrap();
        let poly = clear_denominators(&series, &rat_int(1), 2);
        let got: Vec<[i64; 4]> = poly.terms.keys().copied().collect();
        let mut want = vec![
            [0, 0, 2, 0],
            [0, 0, 0, 1],
            [0, 1, 0, 0],
            [0, 3, 1, 0],
            [2, 2, 0, 0],
        ];
        want.sort();
        assert_eq!(got, want);
        // tail bound: -s * (base - floor) = -(2 + 10) = -12
        assert_eq!(poly.tail_floor_q, Some(rat_int(-12)));
    }

    #[test]
    fn constraints_vanish_on_correspondence_points() {
        let x = PuiseuxElement::from_terms(
            vec![
                (rat_int(0), Scalar::from_rat(rat_int(1))),
                (rat_int(-1), Scalar::from_rat(rat_int(2))),
            ],
            Some(rat_int(-8)),
        )
        .unwrap();
        let y = PuiseuxElement::t_power(rat_int(3));
        let pt = correspondence_point(&x, &y).unwrap();
        for c in torus_constraints() {
            let v = c.evaluate(&pt).unwrap();
            assert!(v.has_no_visible_terms(), "constraint residual {v:?}");
        }
    }

    #[test]
    fn derivative_and_evaluate_agree_with_hand_computation() {
        // p = U^2 V^2: dp/dU = 2 U V^2, at (u,v) = (2,3) gives 36.
        let p = Poly4::from_terms(vec![([2, 2, 0, 0], pz_const(1))]).unwrap();
        let du = p.derivative(VAR_U);
        let pt = [pz_const(2), pz_const(3), pz_const(1), pz_const(1)];
        let v = du.evaluate(&pt).unwrap();
        assert_eq!(v, pz_const(36));
        assert!(p.derivative(VAR_X).terms.is_empty());
    }

    #[test]
    fn four_by_four_determinant_of_triangular_system() {
        // Equations U, V, X, Y have identity Jacobian.
        let eqs = [
            Poly4::from_terms(vec![([1, 0, 0, 0], pz_const(1))]).unwrap(),
            Poly4::from_terms(vec![([0, 1, 0, 0], pz_const(1))]).unwrap(),
            Poly4::from_terms(vec![([0, 0, 1, 0], pz_const(1))]).unwrap(),
            Poly4::from_terms(vec![([0, 0, 0, 1], pz_const(1))]).unwrap(),
        ];
        let pt = [pz_const(5), pz_const(7), pz_const(11), pz_const(13)];
        let d = jacobian4_det(&eqs, &pt).unwrap();
        assert_eq!(d, pz_const(1));
    }

    #[test]
    fn determinant_sign_is_antisymmetric_in_rows() {
        let a = vec![pz_const(2), pz_const(3)];
        let b = vec![pz_const(5), pz_const(7)];
        let d1 = det_n(&[a.clone(), b.clone()]).unwrap();
        let d2 = det_n(&[b, a]).unwrap();
        assert_eq!(d1, pz_const(-1));
        assert_eq!(d2, pz_neg(&d1));
    }

    #[test]
    fn negative_exponents_rejected() {
        assert!(Poly4::from_terms(vec![([-1, 0, 0, 0], pz_const(1))]).is_err());
    }
}
