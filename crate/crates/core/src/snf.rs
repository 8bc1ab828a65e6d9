//! Smith normal form over the integers for small matrices, tracking the
//! unimodular row and column transforms: U * M * V = D with D diagonal and
//! each diagonal entry dividing the next.

/// U * m * V = D, with U, V unimodular and D diagonal (nonnegative entries,
/// successive divisibility).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: Vec<Vec<i64>>,
    pub v: Vec<Vec<i64>>,
    pub d: Vec<Vec<i64>>,
}

fn identity(n: usize) -> Vec<Vec<i64>> {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let rows = a.len();
    let inner = b.len();
    let cols = b[0].len();
    let mut out = vec![vec![0i64; cols]; rows];
    for i in 0..rows {
        for (k, brow) in b.iter().enumerate().take(inner) {
            let aik = a[i][k];
            if aik == 0 {
                continue;
            }
            for j in 0..cols {
                out[i][j] = out[i][j]
                    .checked_add(aik.checked_mul(brow[j]).expect("matrix entry overflow"))
                    .expect("matrix entry overflow");
            }
        }
    }
    out
}

pub fn mat_det(a: &[Vec<i64>]) -> i64 {
    let n = a.len();
    match n {
        0 => 1,
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => {
            let mut det = 0i64;
            for j in 0..n {
                if a[0][j] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i64>> = a[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, v)| *v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                det += sign * a[0][j] * mat_det(&minor);
            }
            det
        }
    }
}

pub fn smith_normal_form(m: &[Vec<i64>]) -> SmithDecomposition {
    let rows = m.len();
    let cols = if rows > 0 { m[0].len() } else { 0 };
    let mut a: Vec<Vec<i64>> = m.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);

    let swap_rows = |a: &mut Vec<Vec<i64>>, u: &mut Vec<Vec<i64>>, r1: usize, r2: usize| {
        a.swap(r1, r2);
        u.swap(r1, r2);
    };
    let swap_cols = |a: &mut Vec<Vec<i64>>, v: &mut Vec<Vec<i64>>, c1: usize, c2: usize| {
        for row in a.iter_mut() {
            row.swap(c1, c2);
        }
        for row in v.iter_mut() {
            row.swap(c1, c2);
        }
    };
    // row[r1] -= q * row[r2]; indexing because two rows of one matrix are in play
    #[allow(clippy::needless_range_loop)]
    let add_row = |a: &mut Vec<Vec<i64>>, u: &mut Vec<Vec<i64>>, r1: usize, r2: usize, q: i64| {
        for j in 0..cols {
            a[r1][j] -= q * a[r2][j];
        }
        for j in 0..rows {
            u[r1][j] -= q * u[r2][j];
        }
    };
    let add_col = |a: &mut Vec<Vec<i64>>, v: &mut Vec<Vec<i64>>, c1: usize, c2: usize, q: i64| {
        for row in a.iter_mut() {
            row[c1] -= q * row[c2];
        }
        for row in v.iter_mut() {
            row[c1] -= q * row[c2];
        }
    };

    let mut t = 0usize;
    while t < rows.min(cols) {
        // Smallest nonzero entry in the remaining block becomes the pivot.
        let mut pivot: Option<(usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &val) in row.iter().enumerate().skip(t) {
                if val != 0
                    && pivot
                        .map(|(pi, pj)| val.abs() < a[pi][pj].abs())
                        .unwrap_or(true)
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else {
            break; // remaining block is zero
        };
        swap_rows(&mut a, &mut u, t, pi);
        swap_cols(&mut a, &mut v, t, pj);

        let mut clean = true;
        for i in (t + 1)..rows {
            if a[i][t] != 0 {
                let q = a[i][t].div_euclid(a[t][t]);
                add_row(&mut a, &mut u, i, t, q);
                if a[i][t] != 0 {
                    clean = false;
                }
            }
        }
        for j in (t + 1)..cols {
            if a[t][j] != 0 {
                let q = a[t][j].div_euclid(a[t][t]);
                add_col(&mut a, &mut v, j, t, q);
                if a[t][j] != 0 {
                    clean = false;
                }
            }
        }
        if !clean {
            continue; // remainders became new, smaller pivot candidates
        }
        // Divisibility sweep: fold a non-divisible entry into the pivot row.
        let mut retry = false;
        'outer: for i in (t + 1)..rows {
            for j in (t + 1)..cols {
                if a[i][j] % a[t][t] != 0 {
                    add_row(&mut a, &mut u, t, i, -1);
                    retry = true;
                    break 'outer;
                }
            }
        }
        if retry {
            continue;
        }
        if a[t][t] < 0 {
            for x in a[t].iter_mut() {
                *x = -*x;
            }
            for x in u[t].iter_mut() {
                *x = -*x;
            }
        }
        t += 1;
    }

    SmithDecomposition { u, v, d: a }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check(m: &[Vec<i64>]) -> SmithDecomposition {
        let s = smith_normal_form(m);
        assert_eq!(
            mat_mul(&mat_mul(&s.u, m), &s.v),
            s.d,
            "U M V != D for {m:?}"
        );
        assert_eq!(mat_det(&s.u).abs(), 1);
        assert_eq!(mat_det(&s.v).abs(), 1);
        let n = m.len().min(m[0].len());
        for i in 0..n {
            for j in 0..m[0].len() {
                if i != j && i < s.d.len() && j < s.d[i].len() {
                    assert_eq!(s.d[i][j], 0, "off-diagonal in {:?}", s.d);
                }
            }
            assert!(s.d[i][i] >= 0);
            if i + 1 < n && s.d[i + 1][i + 1] != 0 {
                assert!(s.d[i][i] != 0 && s.d[i + 1][i + 1] % s.d[i][i] == 0);
            }
        }
        s
    }

    #[test]
    fn known_two_by_two() {
        let s = check(&[vec![-1, -3], vec![1, 2]]);
        assert_eq!(s.d[0][0] * s.d[1][1], 1); // |det| = 1
        let s = check(&[vec![2, 0], vec![0, 4]]);
        assert_eq!(s.d[0][0], 2);
        assert_eq!(s.d[1][1], 4);
        let s = check(&[vec![2, 4], vec![6, 8]]);
        assert_eq!(s.d[0][0], 2);
        assert_eq!(s.d[1][1], 4); // det -8, gcd 2
    }

    #[test]
    fn singular_and_rectangular() {
        let s = check(&[vec![2, 4], vec![1, 2]]);
        assert_eq!(s.d[1][1], 0);
        check(&[vec![3, 6, 9], vec![2, 4, 8]]);
        check(&[vec![0, 0], vec![0, 0]]);
    }

    proptest! {
        #[test]
        fn prop_decomposition_holds(
            entries in proptest::collection::vec(-12i64..13, 9),
            rows in 2usize..=3,
        ) {
            let cols = 9 / rows;
            let m: Vec<Vec<i64>> = (0..rows)
                .map(|i| entries[i * cols..(i + 1) * cols].to_vec())
                .collect();
            check(&m);
        }
    }
}
