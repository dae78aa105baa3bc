//! Span bases, projections and rank tests.
//!
//! Rank decisions drop singular values `σ ≤ RANK_RTOL · σ_max`.

use nalgebra::{DMatrix, DVector};

pub const RANK_RTOL: f64 = 1e-10;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn columns(vectors: &[Vec<f64>], dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, vectors.len(), |r, c| vectors[c][r])
}

/// Orthonormal basis of `span(vectors)` from the left singular vectors.
pub fn span_basis(vectors: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let svd = columns(vectors, dim).svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Vec::new();
    }
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > RANK_RTOL * smax)
        .map(|(i, _)| u.column(i).iter().copied().collect())
        .collect()
}

pub fn rank(vectors: &[Vec<f64>], dim: usize) -> usize {
    span_basis(vectors, dim).len()
}

/// Orthogonal projection of `v` onto `span(vectors)`.
pub fn project(vectors: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    project_onto_basis(&span_basis(vectors, v.len()), v)
}

pub fn project_onto_basis(basis: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; v.len()];
    for q in basis {
        let c = dot(q, v);
        p.iter_mut().zip(q).for_each(|(pi, qi)| *pi += c * qi);
    }
    p
}

/// Euclidean distance from `v` to `span(vectors)`.
pub fn distance_to_span(vectors: &[Vec<f64>], v: &[f64]) -> f64 {
    let p = project(vectors, v);
    let r: Vec<f64> = v.iter().zip(&p).map(|(a, b)| a - b).collect();
    norm(&r)
}

/// Minimum-norm least-squares solution of `A x ≈ b` with `A` given by columns.
pub fn least_squares(cols: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    if cols.is_empty() {
        return Vec::new();
    }
    let a = columns(cols, b.len());
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (RANK_RTOL * smax).max(f64::MIN_POSITIVE);
    svd.solve(&DVector::from_column_slice(b), eps)
        .expect("both singular vector sets computed")
        .iter()
        .copied()
        .collect()
}

/// Incrementally grown orthonormal basis, used where many nested spans are
/// visited in depth-first order.
///
/// A candidate is accepted when its residual after two Gram-Schmidt passes
/// exceeds `RANK_RTOL` times its own norm.
#[derive(Debug, Clone, Default)]
pub struct IncrementalBasis {
    vectors: Vec<Vec<f64>>,
}

impl IncrementalBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn residual(&self, v: &[f64]) -> Vec<f64> {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for q in &self.vectors {
                let c = dot(q, &r);
                r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= c * qi);
            }
        }
        r
    }

    /// Adds `v` if it leaves the current span; returns whether it did.
    pub fn push(&mut self, v: &[f64]) -> bool {
        let scale = norm(v);
        if scale == 0.0 {
            return false;
        }
        let r = self.residual(v);
        let rn = norm(&r);
        if rn <= RANK_RTOL * scale {
            return false;
        }
        self.vectors.push(r.into_iter().map(|x| x / rn).collect());
        true
    }

    pub fn pop(&mut self) {
        self.vectors.pop();
    }

    pub fn distance(&self, v: &[f64]) -> f64 {
        norm(&self.residual(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_to_empty_span_is_norm() {
        assert_eq!(distance_to_span(&[], &[3.0, 4.0]), 5.0);
    }

    #[test]
    fn rank_of_dependent_set() {
        let v = vec![vec![1.0, 0.0, 1.0], vec![2.0, 0.0, 2.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(rank(&v, 3), 2);
    }

    #[test]
    fn incremental_matches_svd() {
        let v = vec![vec![1.0, 2.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 1.0, 1.0]];
        let target = [0.3, -1.0, 2.0, 0.5];
        let mut inc = IncrementalBasis::new();
        let accepted: Vec<bool> = v.iter().map(|x| inc.push(x)).collect();
        assert_eq!(accepted, vec![true, true, false]);
        assert!((inc.distance(&target) - distance_to_span(&v, &target)).abs() < 1e-12);
    }

    #[test]
    fn least_squares_exact_system() {
        let cols = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        let x = least_squares(&cols, &[3.0, 2.0]);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }
}
