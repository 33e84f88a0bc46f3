//! Certified evaluation of `log S_lambda(x)` and its gradient, where
//!
//! `S_lambda(x) = det[exp(x_i lambda_j)] / V(x)`, `V(x) = prod_{i<j} (x_i - x_j)`.
//!
//! `x` is sorted (the function is symmetric) and nudged to distinct entries;
//! the nudge's bias is bounded because the gradient lies in the permutohedron
//! of `lambda`. Two evaluation paths share one contract (additive error at most
//! `delta`):
//!
//! * the budget path builds the exponential matrix from truncated series with
//!   a precision fixed in advance by a determinant lower bound, then takes an
//!   exact determinant;
//! * the interval path evaluates everything in outward-rounded dyadic interval
//!   arithmetic and doubles the precision until the enclosure is tight enough.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::certarith::{
    det_certified, exp_pos_approx, log1m_exp_bound, log_approx, CertifiedValue, Interval, RationalMatrix,
};
use crate::domain::Partition;
use crate::error::{Error, Result};
use crate::rational::{
    ceil_sqrt, factorial_int, floor_log2, frac, int, lcm_denominators, norm_sq, pow2, round_sig_nearest, Rational,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalPath {
    /// Budget path when its precision estimate fits `budget_bit_cap`, else intervals.
    Auto,
    Budget,
    Interval,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    pub path: EvalPath,
    /// Largest interval working precision before giving up.
    pub precision_bit_cap: u32,
    /// Largest per-entry precision (bits of `D'`) the budget path accepts.
    pub budget_bit_cap: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { path: EvalPath::Auto, precision_bit_cap: 1 << 14, budget_bit_cap: 768 }
    }
}

/// `ceil(|lambda|)`, a Lipschitz constant of `log S_lambda`.
pub fn lipschitz_bound(lambda: &Partition) -> BigInt {
    ceil_sqrt(&lambda.norm_sq()).max(BigInt::one())
}

/// `x_i + (n - i) delta / (2 n^2 L)` for `x` sorted non-increasing (1-based `i`).
pub fn perturb_distinct(x: &[Rational], delta: &Rational, l: &BigInt) -> Vec<Rational> {
    let n = x.len() as i64;
    let h = delta / Rational::from_integer(BigInt::from(2 * n * n) * l);
    x.iter().enumerate().map(|(i, xi)| xi + &h * int(n - 1 - i as i64)).collect()
}

/// Sorting permutation: `x[perm[k]]` is the `k`-th largest entry.
fn sort_desc(x: &[Rational]) -> (Vec<Rational>, Vec<usize>) {
    let mut perm: Vec<usize> = (0..x.len()).collect();
    perm.sort_by(|&a, &b| x[b].cmp(&x[a]).then(a.cmp(&b)));
    (perm.iter().map(|&k| x[k].clone()).collect(), perm)
}

/// Range of `grad . d` over gradients in the permutohedron, for `d` non-increasing.
fn bias_range(lambda: &[Rational], d: &[Rational]) -> (Rational, Rational) {
    let n = lambda.len();
    let hi = lambda.iter().zip(d).fold(Rational::zero(), |a, (l, di)| a + l * di);
    let lo = (0..n).fold(Rational::zero(), |a, i| a + &lambda[n - 1 - i] * &d[i]);
    (lo, hi)
}

fn vandermonde(x: &[Rational]) -> Rational {
    let mut v = Rational::one();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            v *= &x[i] - &x[j];
        }
    }
    v
}

fn check_inputs(lambda: &Partition, x: &[Rational], delta: &Rational) -> Result<()> {
    if x.len() != lambda.n() {
        return Err(Error::Input(format!("x has {} entries, lambda has {}", x.len(), lambda.n())));
    }
    if !delta.is_positive() || delta >= &Rational::one() {
        return Err(Error::Input(format!("tolerance {delta} must lie in (0, 1)")));
    }
    if !lambda.is_normalized() {
        return Err(Error::Precondition("lambda must have gaps >= 1 and last part >= 1".into()));
    }
    Ok(())
}

/// Precision plan for the budget path at a perturbed point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchurEvalPlan {
    pub x_hat: Vec<Rational>,
    pub l: BigInt,
    pub t: BigInt,
    pub lambda_hat: Vec<BigInt>,
    /// Lower bound on `log v`, where `v` bounds the exponential determinant from below.
    pub v_log_floor: Rational,
    /// `v' = 2^v_prime_log2 >= 1/v`.
    pub v_prime_log2: u64,
    /// Per-entry relative precision denominator.
    pub d_prime: BigInt,
    /// `max |x_hat_i lambda_j|`.
    pub tau_entry: Rational,
    /// `2^entry_bound_log2` bounds every matrix entry `exp(x_hat_i lambda_j)`.
    pub entry_bound_log2: u64,
}

impl SchurEvalPlan {
    /// `x` must be sorted non-increasing.
    pub fn new(lambda: &Partition, x: &[Rational], delta: &Rational) -> Result<Self> {
        let n = lambda.n();
        let ni = n as i64;
        let l = lipschitz_bound(lambda);
        let x_hat = perturb_distinct(x, delta, &l);
        let t = BigInt::from(2 * ni * (ni - 1)) * lcm_denominators(lambda.parts());
        let tq = Rational::from_integer(t.clone());
        let lambda_hat: Vec<BigInt> = lambda
            .parts()
            .iter()
            .enumerate()
            .map(|(i, p)| (p * &tq).to_integer() - BigInt::from(ni - 1 - i as i64))
            .collect();

        // |log v| <= |x||lambda_hat|/T + n^1.5 |x|/T + C(n,2) |log(1 - exp(-gap/T))|
        let lh: Vec<Rational> = lambda_hat.iter().map(|v| Rational::from_integer(v.clone())).collect();
        let x_norm = Rational::from_integer(ceil_sqrt(&norm_sq(&x_hat)));
        let lh_norm = Rational::from_integer(ceil_sqrt(&norm_sq(&lh)));
        let n15 = Rational::from_integer(ceil_sqrt(&int(ni * ni * ni)));
        let min_gap = delta / Rational::from_integer(BigInt::from(2 * ni * ni) * &l) / &tq;
        let pairs = int(ni * (ni - 1) / 2);
        let log_v_abs = &x_norm * (&lh_norm + &n15) / &tq + pairs * log1m_exp_bound(&min_gap)?;
        let v_log_floor = -log_v_abs.clone();
        let v_prime_log2 = (log_v_abs * frac(3, 2)).ceil().to_integer().to_u64().unwrap_or(u64::MAX);

        let tau_entry = x_hat
            .iter()
            .flat_map(|xi| lambda.parts().iter().map(move |lj| (xi * lj).abs()))
            .max()
            .expect("n >= 2");
        let max_arg = x_hat
            .iter()
            .flat_map(|xi| lambda.parts().iter().map(move |lj| xi * lj))
            .max()
            .expect("n >= 2");
        let entry_bound_log2 =
            (max_arg.max(Rational::zero()) * frac(3, 2)).ceil().to_integer().to_u64().unwrap_or(u64::MAX);

        // D' >= 2n max(1, 32 n! tau^n v' / delta), with tau the entry bound.
        let mut d_prime = None;
        if let (Some(vb), Some(eb)) = (
            v_prime_log2.checked_add(0).filter(|&b| b < 1 << 24),
            entry_bound_log2.checked_mul(n as u64).filter(|&b| b < 1 << 24),
        ) {
            let core = Rational::from_integer((BigInt::from(32) * factorial_int(n as u32)) << (vb + eb)) / delta;
            let m = core.ceil().to_integer().max(BigInt::one());
            d_prime = Some(BigInt::from(2 * ni) * m + 1);
        }
        let d_prime = d_prime.ok_or_else(|| Error::Resource("precision budget exceeds representable size".into()))?;
        Ok(SchurEvalPlan { x_hat, l, t, lambda_hat, v_log_floor, v_prime_log2, d_prime, tau_entry, entry_bound_log2 })
    }

    pub fn budget_bits(&self) -> u64 {
        self.d_prime.bits()
    }
}

/// Certified `log S_lambda(x)` with additive error at most `delta`.
pub fn log_schur(lambda: &Partition, x: &[Rational], delta: &Rational) -> Result<CertifiedValue> {
    log_schur_with(lambda, x, delta, &EvalConfig::default())
}

pub fn log_schur_with(lambda: &Partition, x: &[Rational], delta: &Rational, cfg: &EvalConfig) -> Result<CertifiedValue> {
    check_inputs(lambda, x, delta)?;
    let (xs, _) = sort_desc(x);
    match cfg.path {
        EvalPath::Budget => log_schur_budget(lambda, &xs, delta),
        EvalPath::Interval => log_schur_interval(lambda, &xs, delta, cfg),
        EvalPath::Auto => {
            let max_arg = xs
                .iter()
                .flat_map(|xi| lambda.parts().iter().map(move |lj| (xi * lj).abs()))
                .max()
                .expect("n >= 2");
            if max_arg <= int(64) {
                let plan = SchurEvalPlan::new(lambda, &xs, delta);
                if matches!(&plan, Ok(p) if p.budget_bits() <= cfg.budget_bit_cap) {
                    return log_schur_budget(lambda, &xs, delta);
                }
            }
            log_schur_interval(lambda, &xs, delta, cfg)
        }
    }
}

fn log_schur_budget(lambda: &Partition, xs: &[Rational], delta: &Rational) -> Result<CertifiedValue> {
    let n = lambda.n();
    let plan = SchurEvalPlan::new(lambda, xs, delta)?;
    let dq = Rational::from_integer(plan.d_prime.clone());
    let entry_delta = (int(4) * &dq).recip();
    let keep_bits = plan.d_prime.bits() as u32 + 4;
    let mut rows = Vec::with_capacity(n);
    for xi in &plan.x_hat {
        let mut row = Vec::with_capacity(n);
        for lj in lambda.parts() {
            let e = exp_pos_approx(&(xi * lj), &entry_delta)?;
            row.push(round_sig_nearest(&e, keep_bits));
        }
        rows.push(row);
    }
    let m = RationalMatrix::new(rows)?;
    let tau = pow2(plan.entry_bound_log2 as i64);
    let v = pow2(-(plan.v_prime_log2 as i64));
    let det = det_certified(&m, &dq.recip(), &tau, &v)?;
    if !det.value().is_positive() {
        return Err(Error::Indeterminate("approximate determinant is not positive".into()));
    }
    let rho = det.error().clone();
    let sixteenth = delta / int(16);
    let log_det = log_approx(det.value(), &sixteenth)?;
    let log_det_err = &sixteenth + int(2) * &rho;
    let eighth = delta / int(8);
    let log_v = log_approx(&vandermonde(&plan.x_hat), &eighth)?;

    let d: Vec<Rational> = plan.x_hat.iter().zip(xs).map(|(a, b)| a - b).collect();
    let (blo, bhi) = bias_range(lambda.parts(), &d);
    let center = log_det - log_v;
    let err = log_det_err + eighth;
    let out = CertifiedValue::from_bounds(&center - &err - bhi, &center + &err - blo);
    if out.error() > delta {
        return Err(Error::Indeterminate(format!("budget path missed its tolerance: {}", out.error())));
    }
    Ok(out)
}

/// Determinant by subset dynamic programming over rows (Laplace expansion).
fn det_subset(rows: &[Vec<Interval>], prec: u32) -> Interval {
    let n = rows.len();
    let full = 1usize << n;
    let mut dp: Vec<Option<Interval>> = vec![None; full];
    dp[0] = Some(Interval::from_int(1, prec));
    for mask in 0..full {
        let Some(cur) = dp[mask].take() else { continue };
        let i = mask.count_ones() as usize;
        if i == n {
            dp[mask] = Some(cur);
            continue;
        }
        for j in 0..n {
            if mask & (1 << j) != 0 {
                continue;
            }
            let inversions = (mask >> (j + 1)).count_ones();
            let mut term = cur.mul(&rows[i][j]);
            if inversions % 2 == 1 {
                term = term.neg();
            }
            let next = mask | (1 << j);
            dp[next] = Some(match dp[next].take() {
                Some(acc) => acc.add(&term),
                None => term,
            });
        }
    }
    dp[full - 1].take().expect("full mask reached")
}

/// Interval enclosures of `log S(x_hat)` and optionally its gradient at `x_hat`.
fn interval_eval(
    lambda: &[Rational],
    x_hat: &[Rational],
    want_grad: bool,
    prec: u32,
) -> Result<(Interval, Option<Vec<Interval>>)> {
    let n = lambda.len();
    let mut rows = Vec::with_capacity(n);
    for xi in x_hat {
        let mut row = Vec::with_capacity(n);
        for lj in lambda {
            row.push(Interval::from_rational(&(xi * lj), prec).exp()?);
        }
        rows.push(row);
    }
    let det = det_subset(&rows, prec);
    if !det.is_positive() {
        return Err(Error::Indeterminate("determinant enclosure reaches zero".into()));
    }
    let vand = Interval::from_rational(&vandermonde(x_hat), prec);
    let value = det.ln()?.sub(&vand.ln()?);
    if !want_grad {
        return Ok((value, None));
    }
    let lam: Vec<Interval> = lambda.iter().map(|l| Interval::from_rational(l, prec)).collect();
    let mut grad = Vec::with_capacity(n);
    for i in 0..n {
        let mut scaled = rows.clone();
        for j in 0..n {
            scaled[i][j] = rows[i][j].mul(&lam[j]);
        }
        let num = det_subset(&scaled, prec);
        let mut g = num.div(&det)?;
        for j in 0..n {
            if j != i {
                let gap = Interval::from_rational(&(&x_hat[i] - &x_hat[j]), prec);
                g = g.sub(&gap.recip()?);
            }
        }
        grad.push(g);
    }
    Ok((value, Some(grad)))
}

/// Starting precision: tolerance bits, cancellation from near-equal nodes, and
/// the magnitude of the exponents.
fn initial_precision(lambda: &[Rational], x_hat: &[Rational], delta: &Rational) -> u32 {
    let mut bits: i64 = 48 + (-floor_log2(delta)).max(0);
    let gap = lambda.windows(2).map(|w| &w[0] - &w[1]).min().expect("n >= 2");
    for i in 0..x_hat.len() {
        for j in i + 1..x_hat.len() {
            let prod = (&x_hat[i] - &x_hat[j]) * &gap;
            bits += (-floor_log2(&prod)).max(0) * 2;
        }
    }
    let max_arg = x_hat
        .iter()
        .flat_map(|xi| lambda.iter().map(move |lj| (xi * lj).abs()))
        .max()
        .expect("n >= 2");
    if !max_arg.is_zero() {
        bits += floor_log2(&max_arg).max(0) + 2;
    }
    bits.clamp(64, 1 << 20) as u32
}

fn log_schur_interval(lambda: &Partition, xs: &[Rational], delta: &Rational, cfg: &EvalConfig) -> Result<CertifiedValue> {
    let l = lipschitz_bound(lambda);
    let x_hat = perturb_distinct(xs, delta, &l);
    let d: Vec<Rational> = x_hat.iter().zip(xs).map(|(a, b)| a - b).collect();
    let (blo, bhi) = bias_range(lambda.parts(), &d);
    let mut prec = initial_precision(lambda.parts(), &x_hat, delta);
    loop {
        match interval_eval(lambda.parts(), &x_hat, false, prec) {
            Ok((v, _)) => {
                let out = CertifiedValue::from_bounds(v.lo_rational() - &bhi, v.hi_rational() - &blo);
                if out.error() <= delta {
                    return Ok(out);
                }
            }
            Err(Error::Indeterminate(_)) => {}
            Err(e) => return Err(e),
        }
        if prec >= cfg.precision_bit_cap {
            return Err(Error::Resource(format!("log S not resolved to {delta} within {prec} bits")));
        }
        prec = (prec * 2).min(cfg.precision_bit_cap);
    }
}

/// Certified gradient of `log S_lambda` at `x`, each coordinate within `delta`.
pub fn grad_log_schur(lambda: &Partition, x: &[Rational], delta: &Rational) -> Result<Vec<CertifiedValue>> {
    Ok(log_schur_and_grad(lambda, x, delta, &EvalConfig::default())?.1)
}

pub fn grad_log_schur_with(
    lambda: &Partition,
    x: &[Rational],
    delta: &Rational,
    cfg: &EvalConfig,
) -> Result<Vec<CertifiedValue>> {
    Ok(log_schur_and_grad(lambda, x, delta, cfg)?.1)
}

/// Value and gradient from one interval evaluation, both within `delta`.
///
/// The nudge is shrunk by `n L` relative to a value-only call. The gradient
/// bias is bounded by `(D^2 / 4) |d|`, where `D` is the permutohedron diameter
/// (the Hessian is a covariance of a law supported on it) and `d` the nudge.
pub fn log_schur_and_grad(
    lambda: &Partition,
    x: &[Rational],
    delta: &Rational,
    cfg: &EvalConfig,
) -> Result<(CertifiedValue, Vec<CertifiedValue>)> {
    check_inputs(lambda, x, delta)?;
    let n = lambda.n();
    let (xs, perm) = sort_desc(x);
    let l = lipschitz_bound(lambda);
    let pert = delta / Rational::from_integer(BigInt::from(n) * &l);
    let x_hat = perturb_distinct(&xs, &pert, &l);
    let d: Vec<Rational> = x_hat.iter().zip(&xs).map(|(a, b)| a - b).collect();
    let (blo, bhi) = bias_range(lambda.parts(), &d);
    let d_norm_up = Interval::from_rational(&norm_sq(&d), 64).sqrt()?.hi_rational();
    let grad_bias = lambda.diameter_sq() * d_norm_up / int(4);
    let mut prec = initial_precision(lambda.parts(), &x_hat, delta) + 32;
    loop {
        match interval_eval(lambda.parts(), &x_hat, true, prec) {
            Ok((v, Some(g))) => {
                let value = CertifiedValue::from_bounds(v.lo_rational() - &bhi, v.hi_rational() - &blo);
                let grads: Vec<CertifiedValue> = g
                    .iter()
                    .map(|gi| CertifiedValue::from_bounds(gi.lo_rational() - &grad_bias, gi.hi_rational() + &grad_bias))
                    .collect();
                if value.error() <= delta && grads.iter().all(|gv| gv.error() <= delta) {
                    let mut out = vec![CertifiedValue::exact(Rational::zero()); n];
                    for (k, &orig) in perm.iter().enumerate() {
                        out[orig] = grads[k].clone();
                    }
                    return Ok((value, out));
                }
            }
            Ok(_) => unreachable!("gradient requested"),
            Err(Error::Indeterminate(_)) => {}
            Err(e) => return Err(e),
        }
        if prec >= cfg.precision_bit_cap {
            return Err(Error::Resource(format!("gradient not resolved to {delta} within {prec} bits")));
        }
        prec = (prec * 2).min(cfg.precision_bit_cap);
    }
}

/// Certified comparison `log S_lambda(x) >= log S_mu(x)` for `lambda = mu + d`,
/// `d` non-increasing with non-negative prefix sums and zero total.
pub fn schur_monotonicity_check(lambda: &Partition, mu: &Partition, x: &[Rational]) -> Result<bool> {
    let n = lambda.n();
    if mu.n() != n || x.len() != n {
        return Err(Error::Input("length mismatch".into()));
    }
    let d: Vec<Rational> = lambda.parts().iter().zip(mu.parts()).map(|(a, b)| a - b).collect();
    if d.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Precondition("lambda - mu must be non-increasing".into()));
    }
    let mut acc = Rational::zero();
    for di in &d {
        acc += di;
        if acc.is_negative() {
            return Err(Error::Precondition("lambda - mu must have non-negative prefix sums".into()));
        }
    }
    if !acc.is_zero() {
        return Err(Error::Precondition("lambda - mu must sum to zero".into()));
    }
    if lambda == mu {
        return Ok(true);
    }
    if x.windows(2).all(|w| w[0] == w[1]) {
        // S(c 1) = exp(c |lambda|) vol pGT(lambda) and the totals agree.
        return Ok(crate::conditioning::pgt_volume(lambda) >= crate::conditioning::pgt_volume(mu));
    }
    let gap = lambda.gap().min(mu.gap());
    if !gap.is_positive() {
        return Err(Error::Precondition("both partitions need distinct parts".into()));
    }
    // Common rescale and shift: S_{b l + a}(x / b) = b^C(n,2) exp(a sum(x) / b) S_l(x).
    let beta = Rational::from_integer(gap.recip().ceil().to_integer().max(BigInt::one()));
    let alpha = Rational::one() - &beta * lambda.smallest().min(mu.smallest());
    let ln = lambda.affine(&beta, &alpha);
    let mn = mu.affine(&beta, &alpha);
    let xs: Vec<Rational> = x.iter().map(|v| v / &beta).collect();
    let mut delta = frac(1, 1 << 10);
    for _ in 0..12 {
        let a = log_schur(&ln, &xs, &delta)?;
        let b = log_schur(&mn, &xs, &delta)?;
        match a.certainly_lt(&b) {
            Some(lt) => return Ok(!lt),
            None => delta /= int(1 << 8),
        }
    }
    Err(Error::Indeterminate("Schur values not separated at the finest tolerance".into()))
}
