//! Rendering of exact quantities as `{exact, decimal}` JSON pairs.

use kostka_core::{CertifiedValue, Rational};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

/// Significant digits in every decimal rendering.
pub const SIG_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Down,
    Up,
    Nearest,
}

fn pow10(k: usize) -> BigInt {
    num_traits::pow(BigInt::from(10), k)
}

/// `floor(log10 |q|)` for `q != 0`.
fn decimal_exponent(q: &Rational) -> i64 {
    let a = q.abs();
    // Start from the digit-count estimate and correct by at most a step each way.
    let digits = |b: &BigInt| b.to_string().len() as i64;
    let mut e = digits(a.numer()) - digits(a.denom());
    let ten = Rational::from_integer(BigInt::from(10));
    let scale = |k: i64| if k >= 0 { Rational::from_integer(pow10(k as usize)) } else { Rational::from_integer(pow10((-k) as usize)).recip() };
    while a < scale(e) {
        e -= 1;
    }
    while a >= scale(e) * &ten {
        e += 1;
    }
    e
}

/// `q` with [`SIG_DIGITS`] significant digits in scientific notation, rounded
/// in the given direction. Exact zero renders as `"0"`.
pub fn decimal(q: &Rational, dir: Direction) -> String {
    if q.is_zero() {
        return "0".into();
    }
    let mut e = decimal_exponent(q);
    let shift = SIG_DIGITS as i64 - 1 - e;
    let scaled = if shift >= 0 { q * Rational::from_integer(pow10(shift as usize)) } else { q / Rational::from_integer(pow10((-shift) as usize)) };
    let mut m = match dir {
        Direction::Down => scaled.floor().to_integer(),
        Direction::Up => scaled.ceil().to_integer(),
        Direction::Nearest => scaled.round().to_integer(),
    };
    // Rounding can carry into an extra digit; then |m| = 10^SIG_DIGITS exactly.
    if m.abs() >= pow10(SIG_DIGITS) {
        m /= BigInt::from(10);
        e += 1;
    }
    let neg = m.is_negative();
    let digits = m.abs().to_string();
    let (head, tail) = digits.split_at(1);
    let tail = tail.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{e}")
    } else {
        format!("{sign}{head}.{tail}e{e}")
    }
}

pub fn number(q: &Rational, dir: Direction) -> Value {
    json!({ "exact": q.to_string(), "decimal": decimal(q, dir) })
}

pub fn exact(q: &Rational) -> Value {
    number(q, Direction::Nearest)
}

pub fn lower(q: &Rational) -> Value {
    number(q, Direction::Down)
}

pub fn upper(q: &Rational) -> Value {
    number(q, Direction::Up)
}

/// `{value, lo, hi}` with the ends rounded outward.
pub fn certified(c: &CertifiedValue) -> Value {
    json!({ "value": exact(c.value()), "lo": lower(&c.lo()), "hi": upper(&c.hi()) })
}

pub fn vector(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(exact).collect())
}

pub fn optional<T>(v: Option<&T>, f: impl Fn(&T) -> Value) -> Value {
    v.map_or(Value::Null, f)
}

/// Flattens a JSON record into `field,exact,decimal` rows. Number pairs
/// occupy both value columns; other scalars fill `exact` only.
pub fn to_csv(record: &Value) -> String {
    let mut rows: Vec<[String; 3]> = Vec::new();
    flatten("", record, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["field", "exact", "decimal"]).expect("in-memory write");
    for r in &rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn flatten(path: &str, v: &Value, out: &mut Vec<[String; 3]>) {
    let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    match v {
        Value::Object(map) => {
            if let (Some(Value::String(e)), Some(Value::String(d)), 2) = (map.get("exact"), map.get("decimal"), map.len()) {
                out.push([path.to_string(), e.clone(), d.clone()]);
                return;
            }
            for (k, child) in map {
                flatten(&join(k), child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), child, out);
            }
        }
        Value::Null => out.push([path.to_string(), String::new(), String::new()]),
        Value::String(s) => out.push([path.to_string(), s.clone(), String::new()]),
        other => out.push([path.to_string(), other.to_string(), String::new()]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kostka_core::rational::{frac, int};

    #[test]
    fn outward_rounding() {
        let third = frac(1, 3);
        assert_eq!(decimal(&third, Direction::Down), "3.33333333333e-1");
        assert_eq!(decimal(&third, Direction::Up), "3.33333333334e-1");
        assert_eq!(decimal(&-third.clone(), Direction::Down), "-3.33333333334e-1");
        assert_eq!(decimal(&int(0), Direction::Up), "0");
        assert_eq!(decimal(&int(2), Direction::Nearest), "2e0");
        assert_eq!(decimal(&frac(17, 16), Direction::Nearest), "1.0625e0");
    }

    #[test]
    fn carry_into_new_digit() {
        let almost = int(1) - frac(1, 10i64.pow(15));
        assert_eq!(decimal(&almost, Direction::Up), "1e0");
        assert_eq!(decimal(&almost, Direction::Down), "9.99999999999e-1");
        assert_eq!(decimal(&frac(9_999_999_999_999, 10), Direction::Nearest), "1e12");
    }

    #[test]
    fn exponent_edges() {
        assert_eq!(decimal_exponent(&int(10)), 1);
        assert_eq!(decimal_exponent(&frac(1, 10)), -1);
        assert_eq!(decimal_exponent(&frac(99, 100)), -1);
        assert_eq!(decimal_exponent(&int(100)), 2);
    }

    #[test]
    fn csv_flattening() {
        let v = json!({ "a": number(&int(2), Direction::Nearest), "b": [1, null], "c": "x" });
        let text = to_csv(&v);
        assert_eq!(text, "field,exact,decimal\na,2,2e0\nb.0,1,\nb.1,,\nc,x,\n");
    }
}
