//! Outward-rounded interval arithmetic over dyadic rationals `m * 2^e`.
//!
//! The exponent is a machine integer, so magnitudes such as `exp(10^7)` are
//! representable without materializing multi-megabit integers. Every operation
//! rounds its lower endpoint toward `-inf` and its upper endpoint toward `+inf`,
//! so an `Interval` always encloses the real quantity it was computed for.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

impl Round {
    fn flip(self) -> Self {
        match self {
            Round::Down => Round::Up,
            Round::Up => Round::Down,
        }
    }
}

/// Exact dyadic rational `mant * 2^exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

fn floor_shift(m: &BigInt, s: u64) -> BigInt {
    // Division by 2^s rounding toward -inf.
    if s == 0 {
        return m.clone();
    }
    let d = BigInt::one() << s;
    m.div_floor(&d)
}

fn ceil_shift(m: &BigInt, s: u64) -> BigInt {
    -floor_shift(&-m, s)
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Dyadic::new(v, 0)
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn sign(&self) -> Sign {
        self.mant.sign()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    /// Position of the leading bit: `|self| < 2^top`.
    pub fn top(&self) -> i64 {
        self.exp + self.mant.bits() as i64
    }

    pub fn neg(&self) -> Self {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    /// Approximate value; saturates to +-inf outside the f64 range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let shift = (bits - 60).max(0);
        let m = (&self.mant >> shift as u64).to_f64().unwrap_or(0.0);
        let e = self.exp + shift;
        if e > 2000 {
            return m.signum() * f64::INFINITY;
        }
        if e < -2200 {
            return 0.0;
        }
        m * 2f64.powi(e as i32)
    }

    /// Round to an absolute exponent: result is a multiple of `2^e`.
    pub fn round_to_exp(&self, e: i64, dir: Round) -> Self {
        if self.is_zero() || self.exp >= e {
            return self.clone();
        }
        let s = (e - self.exp) as u64;
        let m = match dir {
            Round::Down => floor_shift(&self.mant, s),
            Round::Up => ceil_shift(&self.mant, s),
        };
        Dyadic::new(m, e)
    }

    /// Round to at most `prec` significant bits.
    pub fn round(&self, prec: u32, dir: Round) -> Self {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let e = self.exp + (bits - prec as u64) as i64;
        self.round_to_exp(e, dir)
    }

    pub fn round_nearest(&self, prec: u32) -> Self {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let s = bits - prec as u64;
        let half = BigInt::one() << (s - 1);
        let m = floor_shift(&(&self.mant + half), s);
        Dyadic::new(m, self.exp + s as i64)
    }

    pub fn add_exact(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        Dyadic::new(a + b, e)
    }

    /// Directed-rounded sum. Operands far below the result's precision are
    /// collapsed to a sticky value first so exponent gaps never blow up.
    pub fn add(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        if self.is_zero() {
            return other.round(prec, dir);
        }
        if other.is_zero() {
            return self.round(prec, dir);
        }
        let top = self.top().max(other.top());
        let cut = top - prec as i64 - 8;
        let shrink = |d: &Dyadic| if d.top() < cut { d.round_to_exp(cut, dir) } else { d.clone() };
        shrink(self).add_exact(&shrink(other)).round(prec, dir)
    }

    pub fn mul(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp).round(prec, dir)
    }

    pub fn div(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        assert!(!other.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let ab = self.mant.bits() as i64;
        let bb = other.mant.bits() as i64;
        let s = (prec as i64 + bb - ab + 2).max(0) as u64;
        let num = &self.mant << s;
        let q = match dir {
            Round::Down => num.div_floor(&other.mant),
            Round::Up => -(-num).div_floor(&other.mant),
        };
        Dyadic::new(q, self.exp - other.exp - s as i64).round(prec, dir)
    }

    /// Directed-rounded square root of a non-negative value.
    pub fn sqrt(&self, prec: u32, dir: Round) -> Dyadic {
        assert!(!self.is_negative(), "sqrt of negative dyadic");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let bits = self.mant.bits() as i64;
        let mut s = (2 * prec as i64 + 4 - bits).max(0);
        if (self.exp - s) % 2 != 0 {
            s += 1;
        }
        let m = &self.mant << s as u64;
        let r = m.sqrt();
        let e = (self.exp - s) / 2;
        let r = match dir {
            Round::Down => r,
            Round::Up => {
                if &r * &r == m {
                    r
                } else {
                    r + 1
                }
            }
        };
        Dyadic::new(r, e).round(prec, dir)
    }

    /// Directed rounding of a rational to a dyadic with `prec` significant bits.
    pub fn from_rational(q: &BigRational, prec: u32, dir: Round) -> Dyadic {
        if q.is_zero() {
            return Dyadic::zero();
        }
        let n = q.numer();
        let d = q.denom();
        if d.is_one() {
            return Dyadic::from_bigint(n.clone()).round(prec, dir);
        }
        let s = (prec as i64 + d.bits() as i64 - n.bits() as i64 + 2).max(0) as u64;
        let num = n << s;
        let m = match dir {
            Round::Down => num.div_floor(d),
            Round::Up => -(-num).div_floor(d),
        };
        Dyadic::new(m, -(s as i64)).round(prec, dir)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.mant.sign();
        let sb = other.mant.sign();
        let rank = |s: Sign| match s {
            Sign::Minus => 0,
            Sign::NoSign => 1,
            Sign::Plus => 2,
        };
        if sa != sb {
            return rank(sa).cmp(&rank(sb));
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        let ta = self.top();
        let tb = other.top();
        let mag = if ta != tb {
            ta.cmp(&tb)
        } else {
            let e = self.exp.min(other.exp);
            let a = self.mant.abs() << (self.exp - e) as u64;
            let b = other.mant.abs() << (other.exp - e) as u64;
            a.cmp(&b)
        };
        if sa == Sign::Minus {
            mag.reverse()
        } else {
            mag
        }
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

/// Closed interval `[lo, hi]` with dyadic endpoints and a working precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        debug_assert!(lo <= hi, "inverted interval {lo} > {hi}");
        Interval { lo, hi, prec }
    }

    pub fn point(d: Dyadic, prec: u32) -> Self {
        Interval {
            lo: d.round(prec, Round::Down),
            hi: d.round(prec, Round::Up),
            prec,
        }
    }

    pub fn from_int(v: i64, prec: u32) -> Self {
        Interval::point(Dyadic::from_int(v), prec)
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> Self {
        Interval::point(Dyadic::from_bigint(v.clone()), prec)
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        Interval {
            lo: Dyadic::from_rational(q, prec, Round::Down),
            hi: Dyadic::from_rational(q, prec, Round::Up),
            prec,
        }
    }

    /// Interval spanning two rationals (in either order).
    pub fn from_rational_bounds(a: &BigRational, b: &BigRational, prec: u32) -> Self {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Interval {
            lo: Dyadic::from_rational(lo, prec, Round::Down),
            hi: Dyadic::from_rational(hi, prec, Round::Up),
            prec,
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Interval {
            lo: self.lo.round(prec, Round::Down),
            hi: self.hi.round(prec, Round::Up),
            prec,
        }
    }

    pub fn lo_rational(&self) -> BigRational {
        self.lo.to_rational()
    }

    pub fn hi_rational(&self) -> BigRational {
        self.hi.to_rational()
    }

    pub fn mid_rational(&self) -> BigRational {
        (self.lo_rational() + self.hi_rational()) / BigInt::from(2)
    }

    pub fn rad_rational(&self) -> BigRational {
        (self.hi_rational() - self.lo_rational()) / BigInt::from(2)
    }

    /// Upper bound on the width `hi - lo`.
    pub fn width(&self) -> Dyadic {
        self.hi.add(&self.lo.neg(), 64, Round::Up)
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        &self.lo_rational() <= q && q <= &self.hi_rational()
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
            prec: self.prec.max(other.prec),
        }
    }

    /// Largest absolute value in the interval (rounded up).
    pub fn mag(&self) -> Dyadic {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: self.hi.neg(), hi: self.lo.neg(), prec: self.prec }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        let p = self.prec.max(other.prec);
        Interval {
            lo: self.lo.add(&other.lo, p, Round::Down),
            hi: self.hi.add(&other.hi, p, Round::Up),
            prec: p,
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let p = self.prec.max(other.prec);
        if !self.lo.is_negative() && !other.lo.is_negative() {
            return Interval {
                lo: self.lo.mul(&other.lo, p, Round::Down),
                hi: self.hi.mul(&other.hi, p, Round::Up),
                prec: p,
            };
        }
        let cands = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let lo = cands
            .iter()
            .map(|(a, b)| a.mul(b, p, Round::Down))
            .min()
            .expect("four candidates");
        let hi = cands
            .iter()
            .map(|(a, b)| a.mul(b, p, Round::Up))
            .max()
            .expect("four candidates");
        Interval { lo, hi, prec: p }
    }

    pub fn mul_int(&self, k: i64) -> Interval {
        self.mul(&Interval::from_int(k, self.prec))
    }

    pub fn mul_pow2(&self, k: i64) -> Interval {
        Interval { lo: self.lo.mul_pow2(k), hi: self.hi.mul_pow2(k), prec: self.prec }
    }

    pub fn div(&self, other: &Interval) -> Result<Interval> {
        if other.contains_zero() {
            return Err(Error::Indeterminate(
                "interval division by an interval containing zero".into(),
            ));
        }
        let p = self.prec.max(other.prec);
        let cands = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let lo = cands
            .iter()
            .map(|(a, b)| a.div(b, p, Round::Down))
            .min()
            .expect("four candidates");
        let hi = cands
            .iter()
            .map(|(a, b)| a.div(b, p, Round::Up))
            .max()
            .expect("four candidates");
        Ok(Interval { lo, hi, prec: p })
    }

    pub fn recip(&self) -> Result<Interval> {
        Interval::from_int(1, self.prec).div(self)
    }

    pub fn powi(&self, k: u32) -> Interval {
        let mut acc = Interval::from_int(1, self.prec);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn sqrt(&self) -> Result<Interval> {
        if self.lo.is_negative() {
            return Err(Error::Precondition("sqrt of an interval with negative part".into()));
        }
        let p = self.prec;
        Ok(Interval { lo: self.lo.sqrt(p, Round::Down), hi: self.hi.sqrt(p, Round::Up), prec: p })
    }

    pub fn exp(&self) -> Result<Interval> {
        let p = self.prec;
        let lo = exp_point(&self.lo, p)?.lo;
        let hi = exp_point(&self.hi, p)?.hi;
        Ok(Interval { lo, hi, prec: p })
    }

    pub fn ln(&self) -> Result<Interval> {
        if !self.lo.is_positive() {
            return Err(Error::Indeterminate("logarithm of an interval reaching zero".into()));
        }
        let p = self.prec;
        let lo = ln_point(&self.lo, p).lo;
        let hi = ln_point(&self.hi, p).hi;
        Ok(Interval { lo, hi, prec: p })
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
            prec: self.prec.max(other.prec),
        }
    }

    pub fn min(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
            prec: self.prec.max(other.prec),
        }
    }

    /// Widen symmetrically by a non-negative rational radius.
    pub fn inflate(&self, r: &BigRational) -> Interval {
        let ri = Interval::from_rational(r, self.prec);
        Interval {
            lo: self.lo.add(&ri.hi.neg(), self.prec, Round::Down),
            hi: self.hi.add(&ri.hi, self.prec, Round::Up),
            prec: self.prec,
        }
    }

    /// `true` when `hi - lo <= tol`.
    pub fn width_at_most(&self, tol: &BigRational) -> bool {
        self.width().to_rational() <= *tol
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

fn consts_cache() -> &'static Mutex<HashMap<(u8, u32), Interval>> {
    static CACHE: OnceLock<Mutex<HashMap<(u8, u32), Interval>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(tag: u8, prec: u32, f: impl FnOnce(u32) -> Interval) -> Interval {
    // Round the cache key up to a multiple of 64 bits so the table stays small.
    let key_prec = prec.div_ceil(64) * 64;
    if let Some(v) = consts_cache().lock().expect("constant cache poisoned").get(&(tag, key_prec)) {
        return v.with_prec(prec);
    }
    let v = f(key_prec);
    consts_cache()
        .lock()
        .expect("constant cache poisoned")
        .insert((tag, key_prec), v.clone());
    v.with_prec(prec)
}

/// `2 * atanh(z)` for a point `0 <= z <= 1/3`, enclosing the series tail.
fn two_atanh(z: &Interval, prec: u32) -> Interval {
    let w = prec + 16;
    let z = z.with_prec(w);
    let z2 = z.mul(&z);
    let mut power = z.clone();
    let mut sum = z.clone();
    let mut k: i64 = 1;
    let eps = Dyadic::new(BigInt::one(), -(w as i64) - 4);
    loop {
        power = power.mul(&z2);
        k += 2;
        let term = power.div(&Interval::from_int(k, w)).expect("odd integer divisor");
        sum = sum.add(&term);
        if term.mag() < eps {
            break;
        }
    }
    // Remaining tail: sum_{j>k} z^j/j <= z^(k+2) / (k+2) / (1 - z^2) <= 9/8 * z^(k+2)/(k+2)
    let next = power.mul(&z2).mag().mul(&Dyadic::new(BigInt::from(9), -3), w, Round::Up);
    let tail = Interval::new(next.neg(), next, w);
    sum.add(&tail).mul_int(2).with_prec(prec)
}

/// Certified enclosure of `ln 2`.
pub fn ln2(prec: u32) -> Interval {
    cached(0, prec, |p| {
        let third = Interval::from_int(1, p + 16).div(&Interval::from_int(3, p + 16)).expect("3 != 0");
        two_atanh(&third, p)
    })
}

fn atan_recip(k: i64, prec: u32) -> Interval {
    // atan(1/k) = sum (-1)^i / ((2i+1) k^(2i+1)); alternating with decreasing terms.
    let w = prec + 16;
    let kk = Interval::from_int(k * k, w);
    let mut power = Interval::from_int(1, w).div(&Interval::from_int(k, w)).expect("k != 0");
    let mut sum = power.clone();
    let eps = Dyadic::new(BigInt::one(), -(w as i64) - 4);
    let mut i: i64 = 0;
    loop {
        power = power.div(&kk).expect("k != 0");
        i += 1;
        let term = power.div(&Interval::from_int(2 * i + 1, w)).expect("odd divisor");
        if i % 2 == 1 {
            sum = sum.sub(&term);
        } else {
            sum = sum.add(&term);
        }
        if term.mag() < eps {
            let next = term.mag();
            return sum.add(&Interval::new(next.neg(), next, w)).with_prec(prec);
        }
    }
}

/// Certified enclosure of pi (Machin's formula).
pub fn pi(prec: u32) -> Interval {
    cached(1, prec, |p| {
        let a = atan_recip(5, p + 8).mul_int(16);
        let b = atan_recip(239, p + 8).mul_int(4);
        a.sub(&b).with_prec(p)
    })
}

/// Enclosure of `exp(x)` for a dyadic point.
pub fn exp_point(x: &Dyadic, prec: u32) -> Result<Interval> {
    if x.is_zero() {
        return Ok(Interval::from_int(1, prec));
    }
    let xf = x.to_f64();
    if !xf.is_finite() || xf.abs() > 1e15 {
        return Err(Error::Resource(format!("exponent argument {xf:e} out of range")));
    }
    let k = (xf / std::f64::consts::LN_2).round() as i64;
    let kbits = 64 - k.unsigned_abs().leading_zeros();
    const SQUARINGS: u32 = 8;
    let w = prec + kbits + SQUARINGS + 24;
    let xi = Interval::point(x.clone(), w);
    let r = xi.sub(&ln2(w + kbits).mul_int(k).with_prec(w));
    let r = r.mul_pow2(-(SQUARINGS as i64));
    // Taylor series with a geometric tail bound; |r| < 2^-8.
    let mut sum = Interval::from_int(1, w);
    let mut term = Interval::from_int(1, w);
    let eps = Dyadic::new(BigInt::one(), -(w as i64) - 4);
    let mut i: i64 = 0;
    loop {
        i += 1;
        term = term.mul(&r).div(&Interval::from_int(i, w))?;
        sum = sum.add(&term);
        if term.mag() < eps {
            break;
        }
    }
    // Tail after the last included term is bounded by |term| * |r| / (1 - |r|) <= |term|.
    let t = term.mag();
    sum = sum.add(&Interval::new(t.neg(), t, w));
    for _ in 0..SQUARINGS {
        sum = sum.mul(&sum);
    }
    Ok(sum.mul_pow2(k).with_prec(prec))
}

/// Enclosure of `ln(x)` for a positive dyadic point.
pub fn ln_point(x: &Dyadic, prec: u32) -> Interval {
    assert!(x.is_positive(), "ln of non-positive dyadic");
    let bits = x.mantissa().bits() as i64;
    // x = f * 2^k with f in [1, 2)
    let k = x.exponent() + bits - 1;
    let kbits = 64 - k.unsigned_abs().leading_zeros();
    let w = prec + kbits + 16;
    let f = Interval::point(Dyadic::new(x.mantissa().clone(), 1 - bits), w);
    let one = Interval::from_int(1, w);
    let z = f.sub(&one).div(&f.add(&one)).expect("f + 1 > 0");
    let lnf = two_atanh(&z, w);
    let res = if k == 0 { lnf } else { lnf.add(&ln2(w + kbits).mul_int(k)) };
    res.with_prec(prec)
}

/// Convert a rational interval bound into a certified `Dyadic` in the given direction.
pub fn rational_bound(q: &BigRational, prec: u32, dir: Round) -> Dyadic {
    Dyadic::from_rational(q, prec, dir)
}

#[allow(dead_code)]
pub(crate) fn flip(dir: Round) -> Round {
    dir.flip()
}
