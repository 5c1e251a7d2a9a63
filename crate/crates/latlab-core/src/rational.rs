//! Exact rational arithmetic helpers.
//!
//! All measures, volumes and indices in this crate are rationals with
//! arbitrary-precision integer parts.  The canonical serialized form is
//! `"numerator/denominator"` with a positive denominator, including a
//! denominator of one, so that reports are unambiguous and byte-stable.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Rational from a signed numerator/denominator pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an unsigned integer.
pub fn rat_u(n: u128) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Canonical `"num/den"` rendering with reduced terms and positive denominator.
pub fn format_rat(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses the canonical `"num/den"` form; a bare integer is also accepted.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rat::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().ok()?;
            Some(Rat::from(n))
        }
    }
}

/// Nearest `f64` below-or-equal in magnitude is not needed anywhere; plain
/// conversion with round-to-nearest is enough for report columns.
pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of leading digits for out-of-range parts.
        let n = x.numer().to_f64().unwrap_or(if x.numer().is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
        let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// `x^n` for signed exponents; `x` must be nonzero when `n < 0`.
pub fn pow_i64(x: &Rat, n: i64) -> Rat {
    if n == 0 {
        return Rat::one();
    }
    let mut base = if n < 0 { x.recip() } else { x.clone() };
    let mut e = n.unsigned_abs();
    let mut acc = Rat::one();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        let sq = &base * &base;
        base = sq;
        e >>= 1;
    }
    acc
}
