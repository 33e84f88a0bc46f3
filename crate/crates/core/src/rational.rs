//! Small helpers around `BigRational` shared by every module.

use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn ints(vs: &[i64]) -> Vec<Rational> {
    vs.iter().map(|&v| int(v)).collect()
}

/// Parse `"7"`, `"-3/4"` or `"0.125"` exactly. Exponent notation is rejected
/// so that no value can silently pass through a float.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Input("empty number".into()));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|e| Error::Input(format!("bad numerator in {t:?}: {e}")))?;
        let q = BigInt::from_str(q.trim()).map_err(|e| Error::Input(format!("bad denominator in {t:?}: {e}")))?;
        if q.is_zero() {
            return Err(Error::Input(format!("zero denominator in {t:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let ip_digits = ip.trim_start_matches(['-', '+']);
        if !fp.chars().all(|c| c.is_ascii_digit()) || !ip_digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::Input(format!("bad decimal {t:?}")));
        }
        if ip_digits.is_empty() && fp.is_empty() {
            return Err(Error::Input(format!("bad decimal {t:?}")));
        }
        let digits = format!("{ip_digits}{fp}");
        let m = if digits.is_empty() { BigInt::zero() } else { BigInt::from_str(&digits).expect("digits") };
        let m = if neg { -m } else { m };
        let d = num_traits::pow(BigInt::from(10), fp.len());
        return Ok(Rational::new(m, d));
    }
    BigInt::from_str(t)
        .map(Rational::from_integer)
        .map_err(|e| Error::Input(format!("bad integer {t:?}: {e}")))
}

pub fn lcm_denominators(vs: &[Rational]) -> BigInt {
    vs.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn is_integral(vs: &[Rational]) -> bool {
    vs.iter().all(|v| v.is_integer())
}

pub fn to_i64s(vs: &[Rational]) -> Option<Vec<i64>> {
    vs.iter()
        .map(|v| if v.is_integer() { v.to_integer().to_i64() } else { None })
        .collect()
}

pub fn sum(vs: &[Rational]) -> Rational {
    vs.iter().fold(Rational::zero(), |acc, v| acc + v)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn norm_sq(a: &[Rational]) -> Rational {
    dot(a, a)
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn factorial_int(n: u32) -> BigInt {
    BigInt::from(factorial(n))
}

/// Smallest integer `>= sqrt(q)` for `q >= 0`.
pub fn ceil_sqrt(q: &Rational) -> BigInt {
    assert!(!q.is_negative());
    let c = q.ceil().to_integer();
    let mut r = num_integer::Roots::sqrt(&c);
    if &r * &r < c {
        r += 1;
    }
    r
}

/// Largest `k` with `2^k <= |q|`, for non-zero `q`.
pub fn floor_log2(q: &Rational) -> i64 {
    let n = q.numer().abs();
    let d = q.denom();
    let mut k = n.bits() as i64 - d.bits() as i64;
    // 2^k <= n/d  <=>  n >= d * 2^k
    let le = |k: i64| -> bool {
        if k >= 0 {
            n >= (d << k as u64)
        } else {
            (&n << (-k) as u64) >= *d
        }
    };
    while !le(k) {
        k -= 1;
    }
    while le(k + 1) {
        k += 1;
    }
    k
}

pub fn pow2(k: i64) -> Rational {
    if k >= 0 {
        Rational::from_integer(BigInt::one() << k as u64)
    } else {
        Rational::new(BigInt::one(), BigInt::one() << (-k) as u64)
    }
}

/// Round to the nearest multiple of `2^-bits` in the requested direction.
pub fn round_to_bits(q: &Rational, bits: u64, up: bool) -> Rational {
    let scaled = q * Rational::from_integer(BigInt::one() << bits);
    let m = if up { scaled.ceil() } else { scaled.floor() }.to_integer();
    Rational::new(m, BigInt::one() << bits)
}

/// Round to `prec` significant bits toward the requested direction.
pub fn round_sig(q: &Rational, prec: u32, up: bool) -> Rational {
    if q.is_zero() {
        return q.clone();
    }
    let e = floor_log2(q);
    let bits = prec as i64 - 1 - e;
    if bits >= 0 {
        round_to_bits(q, bits as u64, up)
    } else {
        let unit = pow2(-bits);
        let m = q / &unit;
        let m = if up { m.ceil() } else { m.floor() };
        m * unit
    }
}

/// Round to `prec` significant bits, nearest.
pub fn round_sig_nearest(q: &Rational, prec: u32) -> Rational {
    if q.is_zero() {
        return q.clone();
    }
    let e = floor_log2(q);
    let unit = pow2(e + 1 - prec as i64);
    (q / &unit).round() * unit
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
