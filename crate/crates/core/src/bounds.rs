//! Collision-count bounds, kissing numbers and reference bounds.
//!
//! Every bound has the shape `base^exponent` with astronomically large
//! values, so reports carry `log2` values. The bases are also kept as
//! monomials `2^a · 3^b · 2^{c·n} · d^e · n^f` with rational exponents, which
//! makes the substitutions of the tree and lattice `α` floors checkable
//! symbolically.

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::highprec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("kissing number must be at least 2, got {0}")]
    InvalidTau(u128),
    #[error("need at least 3 balls, got {0}")]
    TooFewBalls(usize),
    #[error("need at least one ball")]
    NoBalls,
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("dimension {0} exceeds the supported maximum of {MAX_KISSING_DIMENSION}")]
    DimensionTooLarge(usize),
    #[error("edge count must be at least 1")]
    NoEdges,
    #[error("ratios must be at least 1, got {0}")]
    InvalidRatio(f64),
}

/// Largest `d` for which `3^d − 1` fits in a `u128`.
pub const MAX_KISSING_DIMENSION: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KissingSource {
    /// Forced by the elementary interval collapsing (`d = 1`).
    ElementaryBound,
    /// Known value from the literature, not derived here.
    ExternalTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KissingNumberInfo {
    pub d: usize,
    /// `2d`.
    pub lower: u128,
    /// `3^d − 1`.
    pub upper: u128,
    pub exact: Option<u128>,
    pub source: Option<KissingSource>,
}

const KISSING_TABLE: [(usize, u128); 6] = [(1, 2), (2, 6), (3, 12), (4, 24), (8, 240), (24, 196_560)];

pub fn kissing_number(d: usize) -> Result<KissingNumberInfo, BoundsError> {
    if d == 0 {
        return Err(BoundsError::ZeroDimension);
    }
    if d > MAX_KISSING_DIMENSION {
        return Err(BoundsError::DimensionTooLarge(d));
    }
    let lower = 2 * d as u128;
    let upper = 3u128.pow(d as u32) - 1;
    let (exact, source) = if lower == upper {
        (Some(lower), Some(KissingSource::ElementaryBound))
    } else {
        match KISSING_TABLE.iter().find(|(k, _)| *k == d) {
            Some(&(_, t)) => (Some(t), Some(KissingSource::ExternalTable)),
            None => (None, None),
        }
    };
    Ok(KissingNumberInfo { d, lower, upper, exact, source })
}

/// Which kissing number enters the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TauChoice {
    /// Exact value when known, otherwise the elementary upper bound.
    #[default]
    Exact,
    Upper,
    Lower,
    Value { tau: u128 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauSource {
    ElementaryBound,
    ExternalTable,
    ElementaryUpper,
    ElementaryLower,
    UserValue,
}

pub fn resolve_tau(d: usize, choice: TauChoice) -> Result<(u128, TauSource), BoundsError> {
    let info = kissing_number(d)?;
    let out = match choice {
        TauChoice::Exact => match (info.exact, info.source) {
            (Some(t), Some(KissingSource::ElementaryBound)) => (t, TauSource::ElementaryBound),
            (Some(t), _) => (t, TauSource::ExternalTable),
            (None, _) => (info.upper, TauSource::ElementaryUpper),
        },
        TauChoice::Upper => (info.upper, TauSource::ElementaryUpper),
        TauChoice::Lower => (info.lower, TauSource::ElementaryLower),
        TauChoice::Value { tau } => (tau, TauSource::UserValue),
    };
    if out.0 < 2 {
        return Err(BoundsError::InvalidTau(out.0));
    }
    Ok(out)
}

/// `2^{two} · 3^{three} · 2^{two_per_n · n} · d^{d_power} · n^{n_power}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Monomial {
    pub two: Rational64,
    pub three: Rational64,
    pub two_per_n: Rational64,
    pub d_power: Rational64,
    pub n_power: Rational64,
}

impl Monomial {
    pub fn one() -> Self {
        let z = Rational64::zero();
        Self { two: z, three: z, two_per_n: z, d_power: z, n_power: z }
    }

    pub fn two_pow(p: Rational64) -> Self {
        Self { two: p, ..Self::one() }
    }

    pub fn three_pow(p: Rational64) -> Self {
        Self { three: p, ..Self::one() }
    }

    pub fn d_pow(p: Rational64) -> Self {
        Self { d_power: p, ..Self::one() }
    }

    pub fn n_pow(p: Rational64) -> Self {
        Self { n_power: p, ..Self::one() }
    }

    /// `2^{c·n}`, e.g. `4^{4n} = 2^{8n}`.
    pub fn exp_two_n(c: Rational64) -> Self {
        Self { two_per_n: c, ..Self::one() }
    }

    pub fn times(self, o: Self) -> Self {
        Self {
            two: self.two + o.two,
            three: self.three + o.three,
            two_per_n: self.two_per_n + o.two_per_n,
            d_power: self.d_power + o.d_power,
            n_power: self.n_power + o.n_power,
        }
    }

    pub fn inverse(self) -> Self {
        Self {
            two: -self.two,
            three: -self.three,
            two_per_n: -self.two_per_n,
            d_power: -self.d_power,
            n_power: -self.n_power,
        }
    }

    pub fn over(self, o: Self) -> Self {
        self.times(o.inverse())
    }

    pub fn log2(&self, n: usize, d: usize) -> f64 {
        let r = |x: Rational64| x.to_f64().expect("small rational");
        r(self.two)
            + r(self.three) * 3f64.log2()
            + r(self.two_per_n) * n as f64
            + r(self.d_power) * (d as f64).log2()
            + r(self.n_power) * (n as f64).log2()
    }

    pub fn to_high_precision(&self, n: usize, d: usize) -> astro_float::BigFloat {
        let mut cc = highprec::consts();
        let p = highprec::PRECISION;
        let rm = highprec::ROUNDING;
        let rat = |x: Rational64| {
            highprec::from_f64(*x.numer() as f64).div(&highprec::from_f64(*x.denom() as f64), p, rm)
        };
        let mut acc = highprec::from_u64(1);
        for (base, e) in [
            (2u64, self.two + self.two_per_n * Rational64::from(n as i64)),
            (3, self.three),
            (d as u64, self.d_power),
            (n as u64, self.n_power),
        ] {
            if e.is_zero() {
                continue;
            }
            let b = highprec::from_u64(base);
            acc = acc.mul(&highprec::pow(&b, &rat(e), &mut cc), p, rm);
        }
        acc
    }
}

impl std::fmt::Display for Monomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        let show = |x: Rational64| {
            if x.is_integer() {
                x.to_integer().to_string()
            } else {
                format!("({}/{})", x.numer(), x.denom())
            }
        };
        if !self.two.is_zero() {
            parts.push(format!("2^{}", show(self.two)));
        }
        if !self.three.is_zero() {
            parts.push(format!("3^{}", show(self.three)));
        }
        if !self.two_per_n.is_zero() {
            parts.push(format!("2^({}n)", show(self.two_per_n)));
        }
        if !self.d_power.is_zero() {
            parts.push(if self.d_power.is_one() { "d".into() } else { format!("d^{}", show(self.d_power)) });
        }
        if !self.n_power.is_zero() {
            parts.push(if self.n_power.is_one() { "n".into() } else { format!("n^{}", show(self.n_power)) });
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

fn q(a: i64, b: i64) -> Rational64 {
    Rational64::new(a, b)
}

/// `2^{21/2} d n^5`, the base before division by `α`.
pub fn theorem_base_numerator() -> Monomial {
    Monomial::two_pow(q(21, 2)).times(Monomial::d_pow(q(1, 1))).times(Monomial::n_pow(q(5, 1)))
}

/// Tree `α` floors as monomials: `4/n` as printed, `√2/n` corrected.
pub fn tree_alpha_monomial(mode: TreeConstant) -> Monomial {
    match mode {
        TreeConstant::Printed => Monomial::two_pow(q(2, 1)).over(Monomial::n_pow(q(1, 1))),
        TreeConstant::Corrected => Monomial::two_pow(q(1, 2)).over(Monomial::n_pow(q(1, 1))),
    }
}

/// `(√3/432)·4^{−4n}·n^{−1/2}` with `432 = 2^4·3^3`.
pub fn lattice_alpha_monomial() -> Monomial {
    Monomial::three_pow(q(1, 2))
        .over(Monomial::two_pow(q(4, 1)).times(Monomial::three_pow(q(3, 1))))
        .times(Monomial::exp_two_n(q(-8, 1)))
        .times(Monomial::n_pow(q(-1, 2)))
}

/// The printed tree base `2^{17/2} d n^6`.
pub fn printed_tree_base() -> Monomial {
    Monomial::two_pow(q(17, 2)).times(Monomial::d_pow(q(1, 1))).times(Monomial::n_pow(q(6, 1)))
}

/// The printed lattice base `2^{21/2}·2n^5·(432/√3)·4^{4n}√n` with `d = 2`
/// written out as the factor 2.
pub fn printed_lattice_base() -> Monomial {
    Monomial::two_pow(q(21, 2))
        .times(Monomial::two_pow(q(1, 1)))
        .times(Monomial::n_pow(q(5, 1)))
        .times(Monomial::two_pow(q(4, 1)).times(Monomial::three_pow(q(3, 1))).over(Monomial::three_pow(q(1, 2))))
        .times(Monomial::exp_two_n(q(8, 1)))
        .times(Monomial::n_pow(q(1, 2)))
}

/// `d = 2` absorbed into the constant, for comparison with [`printed_lattice_base`].
pub fn substituted_lattice_base() -> Monomial {
    let b = theorem_base_numerator().over(lattice_alpha_monomial());
    Monomial { d_power: Rational64::zero(), two: b.two + b.d_power, ..b }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeConstant {
    /// `α ≥ 4/n` as stated.
    Printed,
    /// `α ≥ √2/n`, which holds for the collinear three-ball chain where the
    /// stated constant does not.
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSource {
    Exhaustive,
    TreeBound,
    LatticeBound,
    Given,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    General,
    PerEdge,
    Tree,
    Lattice,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub alpha_source: AlphaSource,
    pub tau: Option<u128>,
    pub tau_source: Option<TauSource>,
    /// Twice the exponent, kept as an integer so `τn/2 − 1` stays exact.
    pub exponent_twice: u128,
    pub exponent: f64,
    /// `⌈τn/2⌉ − 1`, equal to `exponent` when `τn` is even.
    pub integer_exponent: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_symbolic: Option<String>,
    #[serde(skip)]
    pub base_monomial: Option<Monomial>,
    pub base_log2: f64,
    pub log2: f64,
    pub log2_integer_exponent: f64,
    /// Decimal value when below `10^300`.
    pub decimal: Option<String>,
}

impl BoundReport {
    pub fn log10(&self) -> f64 {
        self.log2 * std::f64::consts::LOG10_2
    }

    /// `log2` of the same bound from a 200-bit evaluation of the base (from
    /// `n, d, α` or the symbolic monomial) raised to the exponent directly.
    pub fn high_precision_log2(&self) -> f64 {
        let mut cc = highprec::consts();
        let p = highprec::PRECISION;
        let rm = highprec::ROUNDING;
        let base = match &self.base_monomial {
            Some(m) => m.to_high_precision(self.n, self.d),
            None => {
                let two = highprec::from_u64(2);
                let root = highprec::pow(&two, &highprec::from_f64(10.5), &mut cc);
                let n5 = highprec::from_u64(self.n as u64).powi(5, p, rm);
                root.mul(&highprec::from_u64(self.d as u64), p, rm)
                    .mul(&n5, p, rm)
                    .div(&highprec::from_f64(self.alpha), p, rm)
            }
        };
        let e = highprec::from_u64(self.exponent_twice as u64).div(&highprec::from_u64(2), p, rm);
        let value = highprec::pow(&base, &e, &mut cc);
        highprec::to_f64(&highprec::log2(&value, &mut cc), &mut cc)
    }
}

const DECIMAL_LIMIT_LOG2: f64 = 300.0 * std::f64::consts::LOG2_10;

fn decimal(log2: f64) -> Option<String> {
    if log2 >= DECIMAL_LIMIT_LOG2 {
        return None;
    }
    let v = log2.exp2();
    Some(if v < 1e15 && (v - v.round()).abs() < 1e-9 * v {
        format!("{}", v.round() as u64)
    } else if v < 1e15 {
        format!("{v}")
    } else {
        format!("{v:.15e}")
    })
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    kind: BoundKind,
    n: usize,
    d: usize,
    alpha: f64,
    alpha_source: AlphaSource,
    tau: Option<(u128, TauSource)>,
    exponent_twice: u128,
    base_log2: f64,
    base_symbolic: Option<Monomial>,
) -> BoundReport {
    let exponent = exponent_twice as f64 / 2.0;
    let integer_exponent = exponent_twice.div_ceil(2);
    let log2 = if exponent_twice == 0 { 0.0 } else { exponent * base_log2 };
    let log2_integer_exponent = if integer_exponent == 0 { 0.0 } else { integer_exponent as f64 * base_log2 };
    BoundReport {
        kind,
        n,
        d,
        alpha,
        alpha_source,
        tau: tau.map(|t| t.0),
        tau_source: tau.map(|t| t.1),
        exponent_twice,
        exponent,
        integer_exponent,
        base_symbolic: base_symbolic.map(|m| m.to_string()),
        base_monomial: base_symbolic,
        base_log2,
        log2,
        log2_integer_exponent,
        decimal: decimal(log2),
    }
}

fn general_base_log2(n: usize, d: usize, alpha: f64) -> f64 {
    21.0 / 2.0 + (d as f64).log2() + 5.0 * (n as f64).log2() - alpha.log2()
}

fn check_inputs(n: usize, d: usize, alpha: f64) -> Result<(), BoundsError> {
    if n == 0 {
        return Err(BoundsError::NoBalls);
    }
    if d == 0 {
        return Err(BoundsError::ZeroDimension);
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(BoundsError::InvalidAlpha(alpha));
    }
    Ok(())
}

/// `(2^{21/2} d n^5 / α)^{τn/2 − 1}`.
pub fn max_collisions_bound(
    n: usize,
    d: usize,
    alpha: f64,
    alpha_source: AlphaSource,
    tau: TauChoice,
) -> Result<BoundReport, BoundsError> {
    check_inputs(n, d, alpha)?;
    let (t, src) = resolve_tau(d, tau)?;
    let exponent_twice = t * n as u128 - 2;
    Ok(assemble(
        BoundKind::General,
        n,
        d,
        alpha,
        alpha_source,
        Some((t, src)),
        exponent_twice,
        general_base_log2(n, d, alpha),
        None,
    ))
}

/// `(2^{21/2} d n^5 / α)^{m − 1}` for graphs with `m` edges.
pub fn per_edge_bound(m: usize, n: usize, d: usize, alpha: f64) -> Result<BoundReport, BoundsError> {
    check_inputs(n, d, alpha)?;
    if m == 0 {
        return Err(BoundsError::NoEdges);
    }
    Ok(assemble(
        BoundKind::PerEdge,
        n,
        d,
        alpha,
        AlphaSource::Given,
        None,
        2 * (m as u128 - 1),
        general_base_log2(n, d, alpha),
        None,
    ))
}

/// The main bound with the tree floor for `α` substituted.
pub fn tree_bound(n: usize, d: usize, mode: TreeConstant, tau: TauChoice) -> Result<BoundReport, BoundsError> {
    if n == 0 {
        return Err(BoundsError::NoBalls);
    }
    let (t, src) = resolve_tau(d, tau)?;
    let base = theorem_base_numerator().over(tree_alpha_monomial(mode));
    let alpha = match mode {
        TreeConstant::Printed => 4.0 / n as f64,
        TreeConstant::Corrected => std::f64::consts::SQRT_2 / n as f64,
    };
    Ok(assemble(
        BoundKind::Tree,
        n,
        d,
        alpha,
        AlphaSource::TreeBound,
        Some((t, src)),
        t * n as u128 - 2,
        base.log2(n, d),
        Some(base),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeBoundReport {
    pub exact: BoundReport,
    /// `log2` of `(10^6 n^{11/2} 4^{4n})^{3n−1}`.
    pub rounded_log2: f64,
    pub rounded_base_log2: f64,
    /// `exact < rounded` in floating point.
    pub exact_below_rounded: bool,
    /// The base comparison decided in integers: `2^{31}·3^5 < 10^{12}`.
    pub exact_below_rounded_integer: bool,
}

/// Both forms of the lattice bound (`d = 2`, `τ_2 = 6`).
pub fn lattice_bound(n: usize) -> Result<LatticeBoundReport, BoundsError> {
    if n == 0 {
        return Err(BoundsError::NoBalls);
    }
    let d = 2;
    let (t, src) = resolve_tau(d, TauChoice::Exact)?;
    debug_assert_eq!(t, 6);
    let base = theorem_base_numerator().over(lattice_alpha_monomial());
    let exact = assemble(
        BoundKind::Lattice,
        n,
        d,
        crate::lattice::lattice_alpha_lower_bound(n),
        AlphaSource::LatticeBound,
        Some((t, src)),
        t * n as u128 - 2,
        base.log2(n, d),
        Some(base),
    );
    let rounded_base_log2 = 6.0 * 10f64.log2() + 5.5 * (n as f64).log2() + 8.0 * n as f64;
    let rounded_log2 = (3 * n - 1) as f64 * rounded_base_log2;
    // both bases share n^{11/2} 4^{4n}; the constants are 2^{31/2} 3^{5/2} and 10^6
    let lhs = (BigInt::from(2).pow(31u32)) * BigInt::from(3).pow(5u32);
    let rhs = BigInt::from(10).pow(12u32);
    Ok(LatticeBoundReport {
        exact_below_rounded: exact.log2 < rounded_log2,
        exact_below_rounded_integer: lhs < rhs,
        exact,
        rounded_log2,
        rounded_base_log2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceBounds {
    /// `log2 (32 √M R n^{3/2})^{n²}`.
    pub first_log2: f64,
    /// `log2 (400 M n²)^{2n⁴}`.
    pub second_log2: f64,
}

pub fn reference_bounds(n: usize, mass_ratio: f64, radius_ratio: f64) -> Result<ReferenceBounds, BoundsError> {
    if n == 0 {
        return Err(BoundsError::NoBalls);
    }
    for r in [mass_ratio, radius_ratio] {
        if !(r >= 1.0 && r.is_finite()) {
            return Err(BoundsError::InvalidRatio(r));
        }
    }
    let nf = n as f64;
    let first = nf * nf * (5.0 + 0.5 * mass_ratio.log2() + radius_ratio.log2() + 1.5 * nf.log2());
    let second = 2.0 * nf.powi(4) * (400f64.log2() + mass_ratio.log2() + 2.0 * nf.log2());
    Ok(ReferenceBounds { first_log2: first, second_log2: second })
}

/// `n³/27`.
pub fn lower_bound_reference(n: usize) -> Result<f64, BoundsError> {
    if n < 3 {
        return Err(BoundsError::TooFewBalls(n));
    }
    Ok((n as f64).powi(3) / 27.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperadditivityReport {
    pub parts: Vec<usize>,
    pub whole_log2: f64,
    pub parts_log2: f64,
    pub holds: bool,
}

fn f_log2(n: usize, d: usize, tau: u128, alpha: f64) -> f64 {
    let e = (tau * n as u128 - 2) as f64 / 2.0;
    if e == 0.0 {
        0.0
    } else {
        e * general_base_log2(n, d, alpha)
    }
}

fn log2_sum(logs: &[f64]) -> f64 {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + logs.iter().map(|l| (l - m).exp2()).sum::<f64>().log2()
}

/// `f(n) ≥ f(n_1) + … + f(n_k)` for the main bound `f` at fixed `d, τ, α`.
pub fn superadditivity_check(
    parts: &[usize],
    d: usize,
    tau: u128,
    alpha: f64,
) -> Result<SuperadditivityReport, BoundsError> {
    if parts.is_empty() || parts.contains(&0) {
        return Err(BoundsError::NoBalls);
    }
    check_inputs(1, d, alpha)?;
    if tau < 2 {
        return Err(BoundsError::InvalidTau(tau));
    }
    let n: usize = parts.iter().sum();
    let whole = f_log2(n, d, tau, alpha);
    if parts.len() == 1 {
        return Ok(SuperadditivityReport { parts: parts.to_vec(), whole_log2: whole, parts_log2: whole, holds: true });
    }
    let logs: Vec<f64> = parts.iter().map(|&p| f_log2(p, d, tau, alpha)).collect();
    let sum = log2_sum(&logs);
    Ok(SuperadditivityReport { parts: parts.to_vec(), whole_log2: whole, parts_log2: sum, holds: whole >= sum })
}

/// All partitions of `n` into positive parts, non-increasing.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}
