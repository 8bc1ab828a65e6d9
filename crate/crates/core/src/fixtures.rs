//! Built-in worked inputs shared by the self-check command, the example
//! instance files under `instances/`, and the test suite. Everything is
//! constructed through the public series operations, so the stored terms are
//! exact by construction rather than transcribed.

use serde_json::{json, Value};

use crate::json::series_to_json;
use crate::laurent2::{series_add, series_kth_root, series_pow, Exponent2, LaurentSeries2};
use crate::scalars::{FieldSpec, Scalar};

type S = LaurentSeries2<Scalar>;

fn build(terms: &[(i64, i64, i64)], floor: i64) -> S {
    let entries = terms
        .iter()
        .map(|&(i, j, c)| (Exponent2::new(i, j), Scalar::from_int(c)))
        .collect();
    S::from_terms(FieldSpec::Rational, entries, floor).expect("fixture terms are well formed")
}

/// g = X^2 Y^4 + X together with f = 2 (g^(1/2))^3 + 5 X^-1 Y^-3 at the
/// derived floor `floor_g + 3`. The cancellation driver takes one step on
/// this pair and stops on the monomial 5 X^-1 Y^-3, which sits exactly on
/// the target total degree 2 - (2 + 4) = -4.
pub fn square_root_pair(floor_g: i64) -> (S, S) {
    let g = build(&[(2, 4, 1), (1, 0, 1)], floor_g);
    let root = series_kth_root(&g, 2).expect("leading exponents are even");
    let cube = series_pow(&root, 3).expect("powers of a computed root exist");
    let tail = S::monomial(
        FieldSpec::Rational,
        Scalar::from_int(5),
        Exponent2::new(-1, -3),
        floor_g + 3,
    );
    let f = series_add(
        &cube.scale(&Scalar::from_int(2)).expect("scaling by 2"),
        &tail,
    )
    .expect("same field");
    (f, g)
}

/// The pair used for golden-file comparisons: shallow truncations that are
/// still deep enough for the cancellation driver.
pub fn reduction_example() -> (S, S) {
    square_root_pair(-15)
}

/// The pair used for fibre counting: three digits deeper so that the final
/// residual certificates clear the default budget of 10.
pub fn counting_example() -> (S, S) {
    square_root_pair(-18)
}

/// Monomial g: the root is exact, every tail vanishes, and the fibre seeds
/// need no correction at all.
pub fn monomial_example() -> (S, S) {
    let g = build(&[(2, 4, 1)], -18);
    let f = build(&[(3, 6, 2), (-1, -3, 5)], -15);
    (f, g)
}

/// Leading exponents (2, 3) are coprime, so no fractional-power step can
/// cancel the X Y term and the driver reports the obstruction.
pub fn obstructed_example() -> (S, S) {
    let g = build(&[(2, 3, 1), (1, 0, 1)], -14);
    let gg = series_pow(&g, 2).expect("squaring");
    let f = series_add(
        &gg,
        &S::monomial(
            FieldSpec::Rational,
            Scalar::from_int(1),
            Exponent2::new(1, 1),
            gg.floor(),
        ),
    )
    .expect("same field");
    (f, g)
}

/// f = 2 g + 5 X^-1 Y^-3: the cancellation polynomial is even in the square
/// root of g, so both sign branches of the fibre carry a solution and the
/// count matches the claim with no gap.
pub fn even_example() -> (S, S) {
    let g = build(&[(2, 4, 1), (1, 0, 1)], -21);
    let tail = S::monomial(
        FieldSpec::Rational,
        Scalar::from_int(5),
        Exponent2::new(-1, -3),
        -21,
    );
    let f = series_add(&g.scale(&Scalar::from_int(2)).expect("scaling by 2"), &tail)
        .expect("same field");
    (f, g)
}

/// A fourth-root pair over the rationals. Reduction succeeds, but counting
/// the fibre needs the fourth roots of unity, which the rationals lack.
pub fn quartic_example() -> (S, S) {
    let g = build(&[(4, 8, 1), (1, 0, 1)], -22);
    let root = series_kth_root(&g, 4).expect("leading exponents divide by 4");
    let fifth = series_pow(&root, 5).expect("powers of a computed root exist");
    let tail = S::monomial(
        FieldSpec::Rational,
        Scalar::from_int(5),
        Exponent2::new(-3, -7),
        -16,
    );
    let f = series_add(
        &fifth.scale(&Scalar::from_int(2)).expect("scaling by 2"),
        &tail,
    )
    .expect("same field");
    (f.truncate_to(-16), g)
}

/// The instance-file rendering of a pair, matching the committed files under
/// `instances/` byte for byte once passed through the canonical printer.
pub fn instance_value(f: &S, g: &S, level: &str) -> Value {
    json!({
        "f": series_to_json(f),
        "field": f.field().to_string(),
        "g": series_to_json(g),
        "level": level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{reduce_full, ReductionStatus};

    /// Regenerates the committed example instances. Run explicitly with
    /// `cargo test -p linfty --lib regenerate_instance_files -- --ignored`
    /// after changing a builder, then review the diff.
    #[test]
    #[ignore]
    fn regenerate_instance_files() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../instances");
        std::fs::create_dir_all(dir).unwrap();
        let emit = |name: &str, pair: (S, S)| {
            let (f, g) = pair;
            let mut text = serde_json::to_string_pretty(&instance_value(&f, &g, "1")).unwrap();
            text.push('\n');
            std::fs::write(format!("{dir}/{name}.json"), text).unwrap();
        };
        emit("reduce_fixture", reduction_example());
        emit("torus_gap", counting_example());
        emit("gcd_obstruction", obstructed_example());
        emit("degenerate_z0", monomial_example());
        emit("missing_roots", quartic_example());
        emit("no_gap", even_example());
    }

    #[test]
    fn the_examples_reduce_as_described() {
        for (pair, status) in [
            (reduction_example(), ReductionStatus::ReachedTarget),
            (counting_example(), ReductionStatus::ReachedTarget),
            (monomial_example(), ReductionStatus::ReachedTarget),
            (obstructed_example(), ReductionStatus::GcdObstruction),
            (quartic_example(), ReductionStatus::ReachedTarget),
            (even_example(), ReductionStatus::ReachedTarget),
        ] {
            let (f, g) = pair;
            let red = reduce_full(&f, &g).unwrap();
            assert_eq!(red.status, status);
        }
    }

    #[test]
    fn the_quartic_example_carries_a_degree_five_twist() {
        let (f, g) = quartic_example();
        let red = reduce_full(&f, &g).unwrap();
        assert_eq!(red.k, 4);
        assert_eq!(red.k_tilde, 4);
        assert_eq!(red.d.as_ref().map(|d| d.to_string()).as_deref(), Some("5"));
        let exps: Vec<i64> = red.w.terms().map(|(e, _)| *e).collect();
        assert_eq!(exps, vec![5]);
    }
}
