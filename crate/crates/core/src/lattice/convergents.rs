//! Continued-fraction convergents of `√3` and the resulting lower bound on
//! `|r1 + r2√3|`.

use astro_float::{BigFloat, Consts, RoundingMode};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::quadratic::{decimal, QuadraticInteger};

/// Working precision, in bits, for the high-precision checks.
pub const HIGH_PRECISION_BITS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvergentPair {
    pub k: usize,
    #[serde(with = "decimal")]
    pub h: BigInt,
    #[serde(with = "decimal")]
    pub g: BigInt,
}

/// Partial quotients of `√3 = [1; 1, 2, 1, 2, …]`.
pub fn partial_quotient(k: usize) -> u32 {
    match k {
        0 => 1,
        k if k % 2 == 1 => 1,
        _ => 2,
    }
}

/// `h_k / g_k` for `0 ≤ k ≤ k_max`, from `h_{−2}=0, h_{−1}=1, g_{−2}=1, g_{−1}=0`.
pub fn sqrt3_convergents(k_max: usize) -> Vec<ConvergentPair> {
    let (mut h2, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut g2, mut g1) = (BigInt::one(), BigInt::zero());
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let a = BigInt::from(partial_quotient(k));
        let h = &a * &h1 + &h2;
        let g = &a * &g1 + &g2;
        out.push(ConvergentPair { k, h: h.clone(), g: g.clone() });
        h2 = std::mem::replace(&mut h1, h);
        g2 = std::mem::replace(&mut g1, g);
    }
    out
}

/// `|√3 − h_k/g_k| > 1/(g_k (g_{k+1} + g_k))`, decided exactly.
///
/// Multiplying through by `g_k > 0` gives `|g_k√3 − h_k|·(g_{k+1} + g_k) > 1`,
/// a comparison in `Z[√3]`.
pub fn gap_inequality_exact(c: &ConvergentPair, next: &ConvergentPair) -> bool {
    let s = &next.g + &c.g;
    let x = QuadraticInteger::new(-&c.h * &s, &c.g * &s).abs();
    x > QuadraticInteger::one()
}

/// The same inequality evaluated in `prec`-bit binary floating point.
/// Returns `(lhs, rhs, holds)` with `lhs = |√3 − h/g|` and `rhs` the gap.
pub fn gap_inequality_high_precision(
    c: &ConvergentPair,
    next: &ConvergentPair,
    prec: usize,
) -> (BigFloat, BigFloat, bool) {
    let rm = RoundingMode::ToEven;
    let mut cc = Consts::new().expect("constant cache");
    let mut big = |x: &BigInt| BigFloat::parse(&x.to_string(), astro_float::Radix::Dec, prec, rm, &mut cc);
    let h = big(&c.h);
    let g = big(&c.g);
    let g_next = big(&next.g);
    let root3 = BigFloat::from_u64(3, prec).sqrt(prec, rm);
    let lhs = root3.sub(&h.div(&g, prec, rm), prec, rm).abs();
    let rhs = BigFloat::from_u64(1, prec).div(&g.mul(&g_next.add(&g, prec, rm), prec, rm), prec, rm);
    let holds = lhs.cmp(&rhs).is_some_and(|s| s > 0);
    (lhs, rhs, holds)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticBound {
    /// Bracketing index: smallest `k ≥ 1` with `g_k ≥ B`.
    pub k: usize,
    #[serde(with = "decimal")]
    pub g_k: BigInt,
    #[serde(with = "decimal")]
    pub g_k_plus_1: BigInt,
    /// `1 / (6 g_{k+1})`.
    pub value: f64,
    pub log2: f64,
}

/// Lower bound on `|r1 + r2√3|` valid for all integers `r1` and all
/// `1 ≤ |r2| ≤ bound`. The case `r2 = 0` is separate: there `|r1| ≥ 1`.
pub fn quadratic_lower_bound(bound: f64) -> QuadraticBound {
    assert!(bound >= 1.0, "quadratic_lower_bound needs B >= 1");
    let mut k_max = 8;
    loop {
        let cs = sqrt3_convergents(k_max);
        if let Some(k) = (1..k_max).find(|&k| cs[k].g.to_f64().unwrap_or(f64::INFINITY) >= bound) {
            let g_next = cs[k + 1].g.clone();
            let gf = g_next.to_f64().unwrap_or(f64::INFINITY);
            let log2 = -(6f64.log2() + big_log2(&g_next));
            return QuadraticBound {
                k,
                g_k: cs[k].g.clone(),
                g_k_plus_1: g_next,
                value: 1.0 / (6.0 * gf),
                log2,
            };
        }
        k_max *= 2;
    }
}

fn big_log2(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().log2();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().unwrap().log2() + shift as f64
}

/// `√3 / (54·4^{2n})`, the closed form for `B = 4^{2n}/√3`, as `log2`.
pub fn closed_form_quadratic_bound_log2(n: usize) -> f64 {
    0.5 * 3f64.log2() - 54f64.log2() - 4.0 * n as f64
}

/// Smallest `|r1 + r2√3|` over `1 ≤ |r2| ≤ b_max` and all `r1`, by scanning
/// each `r2` at its best `r1`. Exact comparison in `Z[√3]`.
pub fn exhaustive_quadratic_minimum(b_max: u64) -> (QuadraticInteger, f64) {
    let mut best: Option<QuadraticInteger> = None;
    for r2 in 1..=b_max as i64 {
        // |r1 + r2√3| is minimized at r1 ∈ {−⌊r2√3⌋, −⌈r2√3⌉}
        let approx = (r2 as f64 * 3f64.sqrt()).floor() as i64;
        for r1 in [-approx - 1, -approx, -approx + 1] {
            let v = QuadraticInteger::new(r1, r2).abs();
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
    }
    let best = best.expect("b_max >= 1");
    let f = best.to_f64();
    (best, f)
}

/// Direct scan over a full box `|r1| ≤ r1_max`, `1 ≤ |r2| ≤ r2_max`.
pub fn box_quadratic_minimum(r1_max: i64, r2_max: i64) -> f64 {
    let mut best = f64::INFINITY;
    for r2 in (-r2_max..=r2_max).filter(|&r| r != 0) {
        for r1 in -r1_max..=r1_max {
            best = best.min(QuadraticInteger::new(r1, r2).abs().to_f64());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_convergents() {
        let cs = sqrt3_convergents(4);
        let pairs: Vec<(i64, i64)> =
            cs.iter().map(|c| (c.h.to_i64().unwrap(), c.g.to_i64().unwrap())).collect();
        assert_eq!(pairs, vec![(1, 1), (2, 1), (5, 3), (7, 4), (19, 11)]);
    }

    #[test]
    fn denominators_grow_at_most_threefold() {
        let cs = sqrt3_convergents(60);
        for w in cs.windows(2) {
            assert!(w[1].g <= BigInt::from(3) * &w[0].g);
        }
    }

    #[test]
    fn gap_holds_both_ways() {
        let cs = sqrt3_convergents(51);
        for w in cs.windows(2) {
            assert!(gap_inequality_exact(&w[0], &w[1]), "k = {}", w[0].k);
            assert!(gap_inequality_high_precision(&w[0], &w[1], HIGH_PRECISION_BITS).2);
        }
    }

    #[test]
    fn bound_for_b_equal_one() {
        let b = quadratic_lower_bound(1.0);
        assert_eq!(b.k, 1);
        assert!((b.value - 1.0 / 18.0).abs() < 1e-15);
        let scan = box_quadratic_minimum(10, 1);
        assert!((scan - (2.0 - 3f64.sqrt())).abs() < 1e-12);
        assert!(b.value <= scan);
    }

    #[test]
    fn bound_below_scan() {
        for b in [1u64, 2, 3, 5, 10, 40, 100, 1000, 10_000] {
            let lb = quadratic_lower_bound(b as f64);
            let (_, min) = exhaustive_quadratic_minimum(b);
            assert!(lb.value <= min, "B = {b}: {} > {}", lb.value, min);
        }
    }

    #[test]
    fn closed_form_is_weaker() {
        for n in 1..=6 {
            let b = 4f64.powi(2 * n as i32) / 3f64.sqrt();
            assert!(quadratic_lower_bound(b).log2 >= closed_form_quadratic_bound_log2(n));
        }
    }

    #[test]
    fn n2_box() {
        let b = 4f64.powi(4) / 3f64.sqrt();
        let lb = quadratic_lower_bound(b);
        let scan = box_quadratic_minimum(400, b.floor() as i64);
        assert!(lb.value <= scan);
    }
}
