//! Helpers around 200-bit binary floating point.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

pub const PRECISION: usize = 200;
pub const ROUNDING: RoundingMode = RoundingMode::ToEven;

/// Shared constant cache; cheap to create but not `Sync`.
pub fn consts() -> Consts {
    Consts::new().expect("astro-float constant cache")
}

pub fn from_f64(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PRECISION)
}

pub fn from_u64(x: u64) -> BigFloat {
    BigFloat::from_u64(x, PRECISION)
}

pub fn parse(s: &str, cc: &mut Consts) -> BigFloat {
    BigFloat::parse(s, Radix::Dec, PRECISION, ROUNDING, cc)
}

/// Nearest double, through the decimal representation.
pub fn to_f64(x: &BigFloat, cc: &mut Consts) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let s = x
        .format(Radix::Dec, ROUNDING, cc)
        .expect("formatting a finite value");
    s.parse().unwrap_or(f64::NAN)
}

pub fn log2(x: &BigFloat, cc: &mut Consts) -> BigFloat {
    x.log2(PRECISION, ROUNDING, cc)
}

pub fn pow(base: &BigFloat, exponent: &BigFloat, cc: &mut Consts) -> BigFloat {
    base.pow(exponent, PRECISION, ROUNDING, cc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let mut cc = consts();
        let x = from_f64(0.1);
        assert_eq!(to_f64(&x, &mut cc), 0.1);
        let big = parse("1e400", &mut cc);
        assert!((to_f64(&log2(&big, &mut cc), &mut cc) - 400.0 * 10f64.log2()).abs() < 1e-9);
        assert_eq!(to_f64(&from_u64(0), &mut cc), 0.0);
    }
}
