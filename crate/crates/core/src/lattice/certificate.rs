//! Exact lower bounds on `α_*` for lattice configurations.
//!
//! Pick a basis `ẑ_1, …, ẑ_p` of `V = span{z̃_f : f ≠ e}` and standard basis
//! vectors `e_{m_1}, …, e_{m_q}` so that together they span a hyperplane `W`
//! that excludes `z̃_e`. With `M(w) = (w, ẑ_1, …, ẑ_p, e_{m_1}, …, e_{m_q})`
//! the cofactor vector `c_i = det M(e_i)` is normal to `W`, and
//! `dist(z_e, V) ≥ dist(z_e, W) = 2^{−3/2}·|det M(z̃_e)| / |c|`.

use std::cmp::Ordering;

use serde::Serialize;

use super::determinant::{check_column_conditions, exact_determinant, exact_rank, ColumnClass, Matrix};
use super::quadratic::QuadraticInteger;
use super::{LatticeConfiguration, LatticeError};
use crate::geometry::Edge;

/// Relative slack applied when the exact certificate is rounded to a double,
/// so the reported value stays below the exact one.
pub const CERTIFICATE_ROUNDING_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaCertificate {
    pub edge: Edge,
    pub edge_set: Vec<Edge>,
    /// Edges whose directions form the chosen basis of `V`.
    pub basis_edges: Vec<Edge>,
    /// Standard basis vectors added to reach a hyperplane, 1-based.
    pub extension: Vec<usize>,
    /// `z̃_e` lies in `V`, so the distance is exactly zero.
    pub in_span: bool,
    /// `det M(z̃_e) = z̃_e · c`.
    pub determinant: QuadraticInteger,
    /// The cofactor vector `c`.
    pub normal: Vec<QuadraticInteger>,
    /// `|c|²`, exactly.
    pub normal_norm_squared: QuadraticInteger,
    /// Certified lower bound on `α_*(E, e)`; zero when `in_span`.
    pub lower_bound: f64,
    /// Every matrix `M(e_i)` and `M(z̃_e)` meets the determinant lemma's
    /// column conditions.
    pub columns_conform: bool,
    /// `|det| ≤ 2·4^{2n}` for all those matrices.
    pub determinant_bounds_hold: bool,
}

fn unit(m: usize, i: usize) -> Vec<QuadraticInteger> {
    let mut e = vec![QuadraticInteger::zero(); m];
    e[i] = QuadraticInteger::one();
    e
}

fn dot(a: &[QuadraticInteger], b: &[QuadraticInteger]) -> QuadraticInteger {
    let mut acc = QuadraticInteger::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += &(x * y);
        }
    }
    acc
}

fn with(vs: &[Vec<QuadraticInteger>], extra: &[QuadraticInteger]) -> Vec<Vec<QuadraticInteger>> {
    let mut all = vs.to_vec();
    all.push(extra.to_vec());
    all
}

fn within_lemma_bound(det: &QuadraticInteger, m: usize) -> bool {
    let cap = QuadraticInteger::integer(num_bigint::BigInt::from(2) << (2 * m));
    (&cap - det).signum() != Ordering::Less && (&cap + det).signum() != Ordering::Less
}

pub fn exact_alpha_certificate(
    config: &LatticeConfiguration,
    edge_set: &[Edge],
    edge: Edge,
) -> Result<AlphaCertificate, LatticeError> {
    if !edge_set.contains(&edge) {
        return Err(LatticeError::EdgeNotInSet(edge));
    }
    let mut edges: Vec<Edge> = edge_set.to_vec();
    edges.sort();
    edges.dedup();
    let m = 2 * config.len();
    let z = config.tilde_direction(edge)?;

    let mut basis: Vec<Vec<QuadraticInteger>> = Vec::new();
    let mut basis_edges = Vec::new();
    for &f in edges.iter().filter(|&&f| f != edge) {
        let zf = config.tilde_direction(f)?;
        if exact_rank(&with(&basis, &zf)) > basis.len() {
            basis.push(zf);
            basis_edges.push(f);
        }
    }
    let in_span = exact_rank(&with(&basis, &z)) == basis.len();

    // lowest-index-first extension to a hyperplane
    let mut span = basis.clone();
    let mut extension = Vec::new();
    for i in 0..m {
        if span.len() == m - 1 {
            break;
        }
        let e = unit(m, i);
        let candidate = with(&span, &e);
        let k = candidate.len();
        if exact_rank(&candidate) != k {
            continue;
        }
        if !in_span && exact_rank(&with(&candidate, &z)) != k + 1 {
            continue;
        }
        span = candidate;
        extension.push(i);
    }
    if span.len() != m - 1 {
        return Err(LatticeError::Extension("could not reach a hyperplane"));
    }

    let matrix_with = |w: Vec<QuadraticInteger>| -> Matrix {
        let mut cols = vec![w];
        cols.extend(span.iter().cloned());
        cols
    };
    let mut columns_conform = true;
    let mut determinant_bounds_hold = true;
    let mut audit = |mat: &Matrix, det: &QuadraticInteger| {
        if check_column_conditions(mat).contains(&ColumnClass::Nonconforming) {
            columns_conform = false;
        }
        if !within_lemma_bound(det, m) {
            determinant_bounds_hold = false;
        }
    };

    let mut normal = Vec::with_capacity(m);
    for i in 0..m {
        let mat = matrix_with(unit(m, i));
        let c = exact_determinant(&mat);
        audit(&mat, &c);
        normal.push(c);
    }
    let mz = matrix_with(z.clone());
    let determinant = exact_determinant(&mz);
    audit(&mz, &determinant);

    // cofactor expansion along the first column, recomputed from c
    if dot(&z, &normal) != determinant {
        return Err(LatticeError::CertificateCheck("det M(z̃) differs from z̃·c"));
    }
    if normal.iter().all(|c| c.is_zero()) {
        return Err(LatticeError::CertificateCheck("cofactor vector vanishes"));
    }
    for w in &span {
        if !dot(w, &normal).is_zero() {
            return Err(LatticeError::CertificateCheck("c is not normal to W"));
        }
    }
    if in_span != determinant.is_zero() {
        return Err(LatticeError::CertificateCheck("span membership disagrees with det M(z̃)"));
    }

    let normal_norm_squared = normal.iter().fold(QuadraticInteger::zero(), |acc, c| &acc + &(c * c));
    let lower_bound = if in_span {
        0.0
    } else {
        let num = determinant.abs().to_f64();
        let den = normal_norm_squared.to_f64().sqrt();
        num / den / (2.0 * std::f64::consts::SQRT_2) * (1.0 - CERTIFICATE_ROUNDING_SLACK)
    };

    Ok(AlphaCertificate {
        edge,
        edge_set: edges,
        basis_edges,
        extension: extension.into_iter().map(|i| i + 1).collect(),
        in_span,
        determinant,
        normal,
        normal_norm_squared,
        lower_bound,
        columns_conform,
        determinant_bounds_hold,
    })
}
