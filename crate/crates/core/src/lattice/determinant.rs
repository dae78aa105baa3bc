//! Exact determinants over `Z[√3]` and the column conditions of the
//! lattice determinant lemma.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use super::quadratic::QuadraticInteger;

/// Largest size handled by cofactor expansion in [`exact_determinant`].
pub const COFACTOR_LIMIT: usize = 10;

/// Square matrix stored by columns.
pub type Matrix = Vec<Vec<QuadraticInteger>>;

pub fn identity(m: usize) -> Matrix {
    (0..m)
        .map(|c| {
            (0..m)
                .map(|r| if r == c { QuadraticInteger::one() } else { QuadraticInteger::zero() })
                .collect()
        })
        .collect()
}

/// Builds a column-major matrix from integer `(r1, r2)` rows.
pub fn from_rows(rows: &[Vec<(i64, i64)>]) -> Matrix {
    let m = rows.len();
    (0..m)
        .map(|c| rows.iter().map(|row| QuadraticInteger::new(row[c].0, row[c].1)).collect())
        .collect()
}

fn is_square(cols: &Matrix) -> bool {
    cols.iter().all(|c| c.len() == cols.len())
}

pub fn exact_determinant(cols: &Matrix) -> QuadraticInteger {
    assert!(is_square(cols), "determinant of a non-square matrix");
    if cols.len() <= COFACTOR_LIMIT {
        cofactor_determinant(cols)
    } else {
        bareiss_determinant(cols)
    }
}

/// Laplace expansion along columns, memoized on the set of rows already used
/// by the columns to the left. Zero entries are skipped.
pub fn cofactor_determinant(cols: &Matrix) -> QuadraticInteger {
    let m = cols.len();
    if m == 0 {
        return QuadraticInteger::one();
    }
    assert!(m < 64, "cofactor expansion needs m < 64");
    let mut memo: HashMap<u64, QuadraticInteger> = HashMap::new();
    minor(cols, 0, 0, &mut memo)
}

fn minor(
    cols: &Matrix,
    col: usize,
    used: u64,
    memo: &mut HashMap<u64, QuadraticInteger>,
) -> QuadraticInteger {
    let m = cols.len();
    if col == m {
        return QuadraticInteger::one();
    }
    if let Some(v) = memo.get(&used) {
        return v.clone();
    }
    let mut acc = QuadraticInteger::zero();
    let mut position = 0usize;
    for r in 0..m {
        if used & (1 << r) != 0 {
            continue;
        }
        let entry = &cols[col][r];
        if !entry.is_zero() {
            let sub = minor(cols, col + 1, used | (1 << r), memo);
            if !sub.is_zero() {
                let term = entry * &sub;
                if position.is_multiple_of(2) {
                    acc += &term;
                } else {
                    acc = &acc - &term;
                }
            }
        }
        position += 1;
    }
    memo.insert(used, acc.clone());
    acc
}

/// Fraction-free Gaussian elimination. Every intermediate entry is a minor
/// of the input, so the divisions are exact in `Z[√3]`.
pub fn bareiss_determinant(cols: &Matrix) -> QuadraticInteger {
    let m = cols.len();
    if m == 0 {
        return QuadraticInteger::one();
    }
    // row-major working copy
    let mut a: Vec<Vec<QuadraticInteger>> =
        (0..m).map(|r| (0..m).map(|c| cols[c][r].clone()).collect()).collect();
    let mut negate = false;
    let mut prev = QuadraticInteger::one();
    for k in 0..m - 1 {
        if a[k][k].is_zero() {
            match (k + 1..m).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    negate = !negate;
                }
                None => return QuadraticInteger::zero(),
            }
        }
        for i in k + 1..m {
            for j in k + 1..m {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.exact_div(&prev).expect("Bareiss division is exact");
            }
            a[i][k] = QuadraticInteger::zero();
        }
        prev = a[k][k].clone();
    }
    let det = a[m - 1][m - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Rank of a list of vectors over `Q(√3)`, by fraction-free elimination.
pub fn exact_rank(vectors: &[Vec<QuadraticInteger>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let mut a: Vec<Vec<QuadraticInteger>> = vectors.to_vec();
    let width = a[0].len();
    let mut prev = QuadraticInteger::one();
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in rank + 1..a.len() {
            for j in col + 1..width {
                let num = &(&a[i][j] * &a[rank][col]) - &(&a[i][col] * &a[rank][j]);
                a[i][j] = num.exact_div(&prev).expect("fraction-free division is exact");
            }
            a[i][col] = QuadraticInteger::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
        if rank == a.len() {
            break;
        }
    }
    rank
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnClass {
    /// One nonzero entry, equal to 1.
    A,
    /// Two nonzero entries, 2 and −2.
    B,
    /// Four nonzero entries: two of absolute value 1, two of absolute value √3.
    C,
    Nonconforming,
}

pub fn classify_column(col: &[QuadraticInteger]) -> ColumnClass {
    let nz: Vec<&QuadraticInteger> = col.iter().filter(|x| !x.is_zero()).collect();
    let two = QuadraticInteger::integer(2);
    match nz.len() {
        1 if *nz[0] == QuadraticInteger::one() => ColumnClass::A,
        2 if (*nz[0] == two && *nz[1] == -&two) || (*nz[0] == -&two && *nz[1] == two) => {
            ColumnClass::B
        }
        4 => {
            let ones = nz.iter().filter(|x| x.is_unit_integer()).count();
            let roots = nz.iter().filter(|x| x.is_unit_sqrt3()).count();
            if ones == 2 && roots == 2 {
                ColumnClass::C
            } else {
                ColumnClass::Nonconforming
            }
        }
        _ => ColumnClass::Nonconforming,
    }
}

pub fn check_column_conditions(cols: &Matrix) -> Vec<ColumnClass> {
    cols.iter().map(|c| classify_column(c)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeMatrixError {
    #[error("column {column} satisfies none of the conditions (a), (b), (c)")]
    NonconformingColumn { column: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetBoundReport {
    pub m: usize,
    pub classes: Vec<ColumnClass>,
    pub determinant: QuadraticInteger,
    pub determinant_value: f64,
    /// `|r1| ≤ 4^m`.
    pub r1_ok: bool,
    /// `|r2| ≤ 4^m/√3`, checked as `3 r2² ≤ 16^m`.
    pub r2_ok: bool,
    /// `|r1 + r2√3| ≤ 2·4^m`, checked by exact signs.
    pub total_ok: bool,
}

impl DetBoundReport {
    pub fn passed(&self) -> bool {
        self.r1_ok && self.r2_ok && self.total_ok
    }
}

pub fn verify_det_bound(cols: &Matrix) -> Result<DetBoundReport, LatticeMatrixError> {
    let classes = check_column_conditions(cols);
    if let Some(column) = classes.iter().position(|c| *c == ColumnClass::Nonconforming) {
        return Err(LatticeMatrixError::NonconformingColumn { column });
    }
    let m = cols.len();
    let det = exact_determinant(cols);
    let four_m = BigInt::one() << (2 * m);
    let sixteen_m = BigInt::one() << (4 * m);
    let r1_ok = det.r1.abs() <= four_m;
    let r2_ok = BigInt::from(3) * &det.r2 * &det.r2 <= sixteen_m;
    let cap = QuadraticInteger::integer(BigInt::from(2) * &four_m);
    let total_ok = (&cap - &det).signum() != Ordering::Less && (&cap + &det).signum() != Ordering::Less;
    Ok(DetBoundReport {
        m,
        classes,
        determinant_value: det.to_f64(),
        determinant: det,
        r1_ok,
        r2_ok,
        total_ok,
    })
}

fn distinct_rows<R: Rng>(rng: &mut R, m: usize, k: usize) -> Vec<usize> {
    rand::seq::index::sample(rng, m, k).into_vec()
}

fn sign<R: Rng>(rng: &mut R) -> i64 {
    if rng.gen::<bool>() {
        1
    } else {
        -1
    }
}

/// A random column of class (a), (b) or (c); classes that need more rows
/// than `m` are not drawn.
pub fn random_conforming_column<R: Rng>(rng: &mut R, m: usize) -> Vec<QuadraticInteger> {
    let mut col = vec![QuadraticInteger::zero(); m];
    let max_class = if m >= 4 { 3 } else if m >= 2 { 2 } else { 1 };
    match rng.gen_range(0..max_class) {
        0 => {
            col[rng.gen_range(0..m)] = QuadraticInteger::one();
        }
        1 => {
            let r = distinct_rows(rng, m, 2);
            col[r[0]] = QuadraticInteger::integer(2);
            col[r[1]] = QuadraticInteger::integer(-2);
        }
        _ => {
            let r = distinct_rows(rng, m, 4);
            col[r[0]] = QuadraticInteger::integer(sign(rng));
            col[r[1]] = QuadraticInteger::integer(sign(rng));
            col[r[2]] = QuadraticInteger::new(0, sign(rng));
            col[r[3]] = QuadraticInteger::new(0, sign(rng));
        }
    }
    col
}

pub fn random_conforming_matrix<R: Rng>(rng: &mut R, m: usize) -> Matrix {
    (0..m).map(|_| random_conforming_column(rng, m)).collect()
}

/// Random integer matrix whose columns have at most two nonzero entries,
/// each ±1. These are the matrices the lemma bounds by Hadamard's inequality.
pub fn random_signed_sparse_matrix<R: Rng>(rng: &mut R, m: usize) -> Matrix {
    (0..m)
        .map(|_| {
            let mut col = vec![QuadraticInteger::zero(); m];
            let k = rng.gen_range(0..=m.min(2));
            for r in distinct_rows(rng, m, k) {
                col[r] = QuadraticInteger::integer(sign(rng));
            }
            col
        })
        .collect()
}

/// `|det| ≤ 2^{m/2}`, checked exactly as `det² ≤ 2^m`.
pub fn within_hadamard_bound(det: &BigInt, m: usize) -> bool {
    det * det <= BigInt::one() << m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(a: i64, b: i64) -> QuadraticInteger {
        QuadraticInteger::new(a, b)
    }

    #[test]
    fn one_by_one_sqrt3() {
        assert_eq!(exact_determinant(&vec![vec![q(0, 1)]]), q(0, 1));
    }

    #[test]
    fn two_by_two() {
        let m = from_rows(&[vec![(1, 0), (0, 1)], vec![(0, 1), (1, 0)]]);
        assert_eq!(exact_determinant(&m), q(-2, 0));
        assert_eq!(bareiss_determinant(&m), q(-2, 0));
    }

    #[test]
    fn integer_matrix_against_hand_value() {
        // det [[2,-1,0],[-1,2,-1],[0,-1,2]] = 4
        let m = from_rows(&[
            vec![(2, 0), (-1, 0), (0, 0)],
            vec![(-1, 0), (2, 0), (-1, 0)],
            vec![(0, 0), (-1, 0), (2, 0)],
        ]);
        assert_eq!(cofactor_determinant(&m), q(4, 0));
        assert_eq!(bareiss_determinant(&m), q(4, 0));
    }

    #[test]
    fn zero_leading_entry_needs_pivot() {
        let m = from_rows(&[vec![(0, 0), (1, 0)], vec![(1, 0), (0, 0)]]);
        assert_eq!(bareiss_determinant(&m), q(-1, 0));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_column(&[q(0, 0), q(1, 0), q(0, 0)]), ColumnClass::A);
        assert_eq!(classify_column(&[q(0, 0), q(-1, 0), q(0, 0)]), ColumnClass::Nonconforming);
        assert_eq!(classify_column(&[q(2, 0), q(0, 0), q(-2, 0)]), ColumnClass::B);
        assert_eq!(classify_column(&[q(2, 0), q(2, 0)]), ColumnClass::Nonconforming);
        // z̃ for lattice points (0,0) and (1,√3): (−1, −√3, 1, √3)
        assert_eq!(classify_column(&[q(-1, 0), q(0, -1), q(1, 0), q(0, 1)]), ColumnClass::C);
        assert_eq!(classify_column(&[q(-1, 0), q(0, -1), q(1, 0), q(1, 1)]), ColumnClass::Nonconforming);
    }

    #[test]
    fn det_bound_small_cases() {
        let r = verify_det_bound(&identity(1)).unwrap();
        assert_eq!(r.determinant, q(1, 0));
        assert!(r.passed());
        // columns (2,−2) of class (b) and e_2 of class (a): det = 2
        let m = vec![vec![q(2, 0), q(-2, 0)], vec![q(0, 0), q(1, 0)]];
        let r = verify_det_bound(&m).unwrap();
        assert_eq!(r.determinant.abs(), q(2, 0));
        assert!(r.passed());
        let bad = vec![vec![q(3, 0)]];
        assert_eq!(verify_det_bound(&bad), Err(LatticeMatrixError::NonconformingColumn { column: 0 }));
    }

    #[test]
    fn dual_paths_agree_on_random_conforming() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let m = rng.gen_range(1..=8);
            let a = random_conforming_matrix(&mut rng, m);
            assert_eq!(cofactor_determinant(&a), bareiss_determinant(&a));
        }
    }

    #[test]
    fn large_matrix_uses_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_conforming_matrix(&mut rng, 12);
        assert_eq!(exact_determinant(&a), cofactor_determinant(&a));
    }

    #[test]
    fn hadamard_substep() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let m = rng.gen_range(1..=8);
            let a = random_signed_sparse_matrix(&mut rng, m);
            let det = exact_determinant(&a);
            assert!(num_traits::Zero::is_zero(&det.r2));
            assert!(within_hadamard_bound(&det.r1, m));
        }
    }

    #[test]
    fn exact_rank_basic() {
        let v = vec![vec![q(1, 0), q(0, 1)], vec![q(0, 1), q(3, 0)], vec![q(1, 0), q(1, 0)]];
        // second row is √3 times the first
        assert_eq!(exact_rank(&v[..2]), 1);
        assert_eq!(exact_rank(&v), 2);
        assert_eq!(exact_rank(&[vec![q(0, 0), q(0, 0)]]), 0);
    }
}
