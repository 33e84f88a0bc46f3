//! Conditioning quantities of an instance: how far `mu` sits from the boundary
//! of the permutohedron, the inradius at the centroid, the composite condition
//! number `epsilon`, and the radius of the optimization domain.
//!
//! With `P_k` the sum of the `k` largest entries, `s_k = P_k(lambda) - P_k(mu)`
//! and `c_k = P_k(lambda) - k mean(lambda)`:
//!
//! * `tau = min(1, min_k s_k / c_k)`
//! * `r0 = min_k c_k sqrt(n / (k (n - k)))`
//! * `epsilon = (tau / sqrt n) min(r0, gap / (16 n^1.5))
//!            = tau min(min_k c_k / sqrt(k (n - k)), gap / (16 n^2))`

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::certarith::{CertifiedValue, Interval};
use crate::domain::{majorizes, prefix_slacks, Instance, Partition, Weight};
use crate::error::{Error, Result};
use crate::rational::{int, is_integral, Rational};

/// Working precision (bits) for the irrational quantities of the record.
const PREC: u32 = 160;

/// Constant multiplying `n^3 max(1, log(1/epsilon))` in the domain radius.
pub const RADIUS_CONSTANT: i64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditioningRecord {
    pub n: usize,
    pub lambda_gap: Rational,
    /// Euclidean distance from `mu` to the nearest majorization hyperplane.
    pub d_mu: CertifiedValue,
    pub tau: Rational,
    pub r0: CertifiedValue,
    /// `tau * lambda_gap / 4`.
    pub r: CertifiedValue,
    /// `r / (4 n^1.5)`.
    pub delta_prime: CertifiedValue,
    pub epsilon: CertifiedValue,
    /// `None` exactly when `epsilon = 0`.
    pub domain_radius: Option<CertifiedValue>,
    /// Volume of the full Gelfand-Tsetlin polytope of `lambda`.
    pub pgt_volume: Rational,
}

impl ConditioningRecord {
    pub fn is_boundary(&self) -> bool {
        self.tau.is_zero()
    }

    /// Integer radius `>= R`, used as the optimizer's working radius.
    pub fn radius_ceil(&self) -> Result<Rational> {
        let r = self
            .domain_radius
            .as_ref()
            .ok_or_else(|| Error::Unbounded("epsilon = 0; the optimization domain is unbounded".into()))?;
        Ok(Rational::from_integer(r.hi().ceil().to_integer()))
    }
}

/// `c_k = P_k(lambda) - k mean(lambda)` for `k = 1..n-1`.
pub fn centroid_slacks(lambda: &Partition) -> Vec<Rational> {
    let mean = lambda.mean();
    (1..lambda.n()).map(|k| lambda.prefix(k) - int(k as i64) * &mean).collect()
}

/// Exact `tau(lambda, mu)`.
pub fn compute_tau(lambda: &Partition, mu: &Weight) -> Result<Rational> {
    if !majorizes(lambda, mu)? {
        return Err(Error::Precondition("mu is outside the permutohedron of lambda".into()));
    }
    let s = prefix_slacks(lambda, mu);
    let c = centroid_slacks(lambda);
    let mut tau = Rational::one();
    for (sk, ck) in s.iter().zip(&c) {
        if ck.is_positive() {
            tau = tau.min(sk / ck);
        }
    }
    Ok(tau)
}

/// Exact `r0^2 = min_k c_k^2 n / (k (n - k))`.
pub fn r0_squared(lambda: &Partition) -> Rational {
    let n = lambda.n() as i64;
    centroid_slacks(lambda)
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = i as i64 + 1;
            c * c * int(n) / int(k * (n - k))
        })
        .min()
        .expect("n >= 2")
}

pub fn compute_r0(lambda: &Partition) -> CertifiedValue {
    let sq = Interval::from_rational(&r0_squared(lambda), PREC);
    CertifiedValue::from_interval(&sq.sqrt().expect("non-negative"))
}

/// Exact `d_mu^2 = min_k s_k^2 / k`.
pub fn d_mu_squared(lambda: &Partition, mu: &Weight) -> Rational {
    prefix_slacks(lambda, mu)
        .iter()
        .enumerate()
        .map(|(i, s)| s * s / int(i as i64 + 1))
        .min()
        .expect("n >= 2")
}

/// `epsilon` from `tau` and `lambda`, rounded outward.
pub fn compute_epsilon(tau: &Rational, lambda: &Partition) -> CertifiedValue {
    if tau.is_zero() {
        return CertifiedValue::exact(Rational::zero());
    }
    let n = lambda.n() as i64;
    let gap_term = lambda.gap() / int(16 * n * n);
    let mut best = Interval::from_rational(&gap_term, PREC);
    for (i, c) in centroid_slacks(lambda).iter().enumerate() {
        let k = i as i64 + 1;
        let root = Interval::from_int(k * (n - k), PREC).sqrt().expect("positive");
        let cand = Interval::from_rational(c, PREC).div(&root).expect("positive");
        best = best.min(&cand);
    }
    let eps = best.mul(&Interval::from_rational(tau, PREC));
    CertifiedValue::from_interval(&eps)
}

/// `vol pGT(lambda) = prod_{i<j} (lambda_i - lambda_j) / (j - i)`.
pub fn pgt_volume(lambda: &Partition) -> Rational {
    let p = lambda.parts();
    let n = p.len();
    let mut v = Rational::one();
    for i in 0..n {
        for j in i + 1..n {
            v *= (&p[i] - &p[j]) / int((j - i) as i64);
        }
    }
    v
}

/// `R = (1/eps) max(sqrt(n) max(0, log vol pGT), 64 n^3 max(1, log(1/eps)))`.
pub fn compute_domain_radius(epsilon: &CertifiedValue, lambda: &Partition) -> Result<CertifiedValue> {
    if !epsilon.lo().is_positive() {
        return Err(Error::Unbounded("epsilon = 0; the optimization domain is unbounded".into()));
    }
    let n = lambda.n() as i64;
    let eps = epsilon.to_interval(PREC);
    let inv = eps.recip()?;
    let zero = Interval::from_int(0, PREC);
    let one = Interval::from_int(1, PREC);
    let log_vol = Interval::from_rational(&pgt_volume(lambda), PREC).ln()?;
    let a = Interval::from_int(n, PREC).sqrt()?.mul(&log_vol.max(&zero));
    let b = Interval::from_int(RADIUS_CONSTANT * n * n * n, PREC).mul(&inv.ln()?.max(&one));
    Ok(CertifiedValue::from_interval(&inv.mul(&a.max(&b))))
}

/// Builds the full record for the (normalized) instance.
pub fn condition(instance: &Instance) -> Result<ConditioningRecord> {
    let lambda = &instance.lambda;
    let mu = &instance.mu;
    let n = lambda.n() as i64;
    let gap = lambda.gap();
    let tau = compute_tau(lambda, mu)?;
    let d_mu = CertifiedValue::from_interval(&Interval::from_rational(&d_mu_squared(lambda, mu), PREC).sqrt()?);
    let r = &tau * &gap / int(4);
    let n32 = Interval::from_int(n * n * n, PREC).sqrt()?;
    let delta_prime = Interval::from_rational(&r, PREC).div(&n32.mul_int(4))?;
    let epsilon = compute_epsilon(&tau, lambda);
    let domain_radius = if tau.is_zero() { None } else { Some(compute_domain_radius(&epsilon, lambda)?) };
    Ok(ConditioningRecord {
        n: lambda.n(),
        lambda_gap: gap,
        d_mu,
        tau,
        r0: compute_r0(lambda),
        r: CertifiedValue::exact(r),
        delta_prime: CertifiedValue::from_interval(&delta_prime),
        epsilon,
        domain_radius,
        pgt_volume: pgt_volume(lambda),
    })
}

/// Outcome of the a-priori lower bounds that every record must satisfy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FloorCheck {
    /// `r0 >= gap sqrt(n-1) / 2`.
    pub r0_floor: bool,
    /// `tau >= d_mu / (lambda_1 sqrt n)`.
    pub tau_floor: bool,
    /// `epsilon >= gap / (16 lambda_1 n^3)`; `None` unless the pair is integral and interior.
    pub epsilon_floor: Option<bool>,
}

impl FloorCheck {
    pub fn all_hold(&self) -> bool {
        self.r0_floor && self.tau_floor && self.epsilon_floor.unwrap_or(true)
    }
}

pub fn check_floors(instance: &Instance, record: &ConditioningRecord) -> FloorCheck {
    let lambda = &instance.lambda;
    let n = int(lambda.n() as i64);
    let gap = &record.lambda_gap;
    let r0_floor = r0_squared(lambda) * int(4) >= gap * gap * (&n - int(1));
    let l1 = lambda.largest();
    let tau_floor = &record.tau * &record.tau * l1 * l1 * &n >= d_mu_squared(lambda, &instance.mu);
    let integral = is_integral(lambda.parts()) && is_integral(instance.mu.entries());
    let epsilon_floor = (integral && instance.is_interior()).then(|| {
        let floor: BigRational = gap / (int(16) * l1 * &n * &n * &n);
        record.epsilon.lo() >= floor
    });
    FloorCheck { r0_floor, tau_floor, epsilon_floor }
}
