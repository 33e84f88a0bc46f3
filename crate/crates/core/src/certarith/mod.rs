//! Certified scalar kernel: exact rationals with explicit error radii, exact
//! determinants, and series approximations of `exp` and `log` with proven
//! error bounds. The dyadic interval engine in [`dyadic`] backs the
//! adaptive-precision paths.

pub mod dyadic;
mod kernels;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use dyadic::{Dyadic, Interval, Round};
pub use kernels::{
    det_certified, det_error_bound, det_exact, exp_neg_approx, exp_pos_approx, log1m_exp_bound, log_approx,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorMode {
    Additive,
    Multiplicative,
}

/// A rational approximation with a rigorous error radius.
///
/// Additive: truth in `[value - error, value + error]`.
/// Multiplicative: `value > 0`, `error < 1`, truth in `[value (1 - error), value (1 + error)]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedValue {
    value: BigRational,
    error: BigRational,
    mode: ErrorMode,
}

impl CertifiedValue {
    pub fn exact(value: BigRational) -> Self {
        CertifiedValue { value, error: BigRational::zero(), mode: ErrorMode::Additive }
    }

    pub fn additive(value: BigRational, error: BigRational) -> Result<Self> {
        if error.is_negative() {
            return Err(Error::Precondition("negative error radius".into()));
        }
        Ok(CertifiedValue { value, error, mode: ErrorMode::Additive })
    }

    pub fn multiplicative(value: BigRational, error: BigRational) -> Result<Self> {
        if !value.is_positive() {
            return Err(Error::Precondition("multiplicative mode needs a positive value".into()));
        }
        if error.is_negative() || error >= BigRational::one() {
            return Err(Error::Precondition("multiplicative error must lie in [0, 1)".into()));
        }
        Ok(CertifiedValue { value, error, mode: ErrorMode::Multiplicative })
    }

    /// Additive value spanning `[lo, hi]`.
    pub fn from_bounds(lo: BigRational, hi: BigRational) -> Self {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let two = BigRational::from_integer(BigInt::from(2));
        CertifiedValue {
            value: (&lo + &hi) / &two,
            error: (hi - lo) / two,
            mode: ErrorMode::Additive,
        }
    }

    pub fn from_interval(iv: &Interval) -> Self {
        CertifiedValue::from_bounds(iv.lo_rational(), iv.hi_rational())
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn error(&self) -> &BigRational {
        &self.error
    }

    pub fn mode(&self) -> ErrorMode {
        self.mode
    }

    pub fn lo(&self) -> BigRational {
        match self.mode {
            ErrorMode::Additive => &self.value - &self.error,
            ErrorMode::Multiplicative => &self.value * (BigRational::one() - &self.error),
        }
    }

    pub fn hi(&self) -> BigRational {
        match self.mode {
            ErrorMode::Additive => &self.value + &self.error,
            ErrorMode::Multiplicative => &self.value * (BigRational::one() + &self.error),
        }
    }

    /// Half-width of the enclosure.
    pub fn radius(&self) -> BigRational {
        match self.mode {
            ErrorMode::Additive => self.error.clone(),
            ErrorMode::Multiplicative => &self.value * &self.error,
        }
    }

    pub fn to_additive(&self) -> CertifiedValue {
        match self.mode {
            ErrorMode::Additive => self.clone(),
            ErrorMode::Multiplicative => CertifiedValue::from_bounds(self.lo(), self.hi()),
        }
    }

    pub fn to_interval(&self, prec: u32) -> Interval {
        Interval::from_rational_bounds(&self.lo(), &self.hi(), prec)
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo() <= q && q <= &self.hi()
    }

    pub fn overlaps(&self, other: &CertifiedValue) -> bool {
        self.lo() <= other.hi() && other.lo() <= self.hi()
    }

    pub fn neg(&self) -> CertifiedValue {
        let a = self.to_additive();
        CertifiedValue { value: -a.value, error: a.error, mode: ErrorMode::Additive }
    }

    pub fn add(&self, other: &CertifiedValue) -> CertifiedValue {
        let a = self.to_additive();
        let b = other.to_additive();
        CertifiedValue { value: a.value + b.value, error: a.error + b.error, mode: ErrorMode::Additive }
    }

    pub fn sub(&self, other: &CertifiedValue) -> CertifiedValue {
        self.add(&other.neg())
    }

    pub fn add_rational(&self, q: &BigRational) -> CertifiedValue {
        let a = self.to_additive();
        CertifiedValue { value: a.value + q, error: a.error, mode: ErrorMode::Additive }
    }

    pub fn scale(&self, q: &BigRational) -> CertifiedValue {
        match self.mode {
            ErrorMode::Multiplicative if q.is_positive() => CertifiedValue {
                value: &self.value * q,
                error: self.error.clone(),
                mode: ErrorMode::Multiplicative,
            },
            _ => {
                let a = self.to_additive();
                CertifiedValue { value: a.value * q, error: a.error * q.abs(), mode: ErrorMode::Additive }
            }
        }
    }

    pub fn mul(&self, other: &CertifiedValue) -> CertifiedValue {
        if self.mode == ErrorMode::Multiplicative && other.mode == ErrorMode::Multiplicative {
            // (1+a)(1+b) - 1 = a + b + ab, and 1 - (1-a)(1-b) = a + b - ab.
            let e = &self.error + &other.error + &self.error * &other.error;
            if e < BigRational::one() {
                return CertifiedValue { value: &self.value * &other.value, error: e, mode: ErrorMode::Multiplicative };
            }
        }
        let corners = [
            self.lo() * other.lo(),
            self.lo() * other.hi(),
            self.hi() * other.lo(),
            self.hi() * other.hi(),
        ];
        let lo = corners.iter().min().expect("four corners").clone();
        let hi = corners.iter().max().expect("four corners").clone();
        CertifiedValue::from_bounds(lo, hi)
    }

    /// Certified `exp` of this value, rounded outward at `prec` bits.
    pub fn exp(&self, prec: u32) -> Result<CertifiedValue> {
        Ok(CertifiedValue::from_interval(&self.to_interval(prec).exp()?))
    }

    /// `Some(true)` if certainly `self < other`, `Some(false)` if certainly
    /// `self >= other`, `None` when the enclosures overlap.
    pub fn certainly_lt(&self, other: &CertifiedValue) -> Option<bool> {
        if self.hi() < other.lo() {
            Some(true)
        } else if self.lo() >= other.hi() {
            Some(false)
        } else {
            None
        }
    }

    pub fn lo_f64(&self) -> f64 {
        crate::rational::to_f64(&self.lo())
    }

    pub fn hi_f64(&self) -> f64 {
        crate::rational::to_f64(&self.hi())
    }

    pub fn value_f64(&self) -> f64 {
        crate::rational::to_f64(&self.value)
    }
}

impl fmt::Display for CertifiedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lo_f64(), self.hi_f64())
    }
}

/// Dense square matrix of exact rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn new(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Input("matrix is not square".into()));
        }
        Ok(RationalMatrix { n, entries: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        RationalMatrix { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        RationalMatrix::from_fn(n, |i, j| if i == j { BigRational::one() } else { BigRational::zero() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn max_abs_entry(&self) -> BigRational {
        self.entries.iter().map(|e| e.abs()).max().unwrap_or_else(BigRational::zero)
    }
}
