//! Certified volume bracket from the optimum of the reduced Schur objective.
//!
//! All constants are combined in log space as dyadic intervals and only the
//! final exponentials are rounded outward to rationals.

use itertools::Itertools;
use num_traits::{Signed, Zero};

use crate::certarith::{CertifiedValue, Interval};
use crate::certarith::dyadic::pi;
use crate::conditioning::ConditioningRecord;
use crate::domain::{Instance, Partition};
use crate::error::{Error, Result};
use crate::optimize::{OptimizationResult, OptimizeConfig};
use crate::rational::{factorial_int, int, Rational};

const PREC: u32 = 192;

/// Area of the projected permutohedron, exact or a closed-form ceiling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PshVolume {
    Exact(Rational),
    UpperBound(Rational),
}

impl PshVolume {
    pub fn upper(&self) -> &Rational {
        match self {
            PshVolume::Exact(v) | PshVolume::UpperBound(v) => v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, PshVolume::Exact(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumeBracket {
    /// `None` on the boundary, where no optimization is run.
    pub g_star: Option<CertifiedValue>,
    /// Lower bound on the true infimum that enters `lower`.
    pub g_lower: Option<Rational>,
    /// `lower <= V(lambda, mu)` for the original (un-normalized) pair.
    pub lower: Rational,
    /// `V(lambda, mu) <= upper`; `None` stands for `+inf`.
    pub upper: Option<Rational>,
    /// The estimate `F` at the computed minimizer; itself an upper bound.
    pub f_estimate: Option<CertifiedValue>,
    pub psh_volume: PshVolume,
    /// Encloses `log(upper / lower)`; `None` when unbounded.
    pub approximation_ratio_log: Option<CertifiedValue>,
    pub log_lower: Option<CertifiedValue>,
    pub log_upper: Option<CertifiedValue>,
}

impl VolumeBracket {
    /// `mu` on the boundary: the polytope is lower dimensional, so `[0, +inf)`.
    pub fn boundary(instance: &Instance, postnikov_threshold: usize) -> Self {
        VolumeBracket {
            g_star: None,
            g_lower: None,
            lower: Rational::zero(),
            upper: None,
            f_estimate: None,
            psh_volume: psh_volume(&instance.lambda, postnikov_threshold),
            approximation_ratio_log: None,
            log_lower: None,
            log_upper: None,
        }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        &self.lower <= v && self.upper.as_ref().is_none_or(|u| v <= u)
    }

    /// Whether `lower <= sqrt(q) <= upper`, decided exactly by squaring.
    pub fn contains_sqrt_scaled(&self, q: &Rational) -> bool {
        let lo_ok = self.lower.is_negative() || &self.lower * &self.lower <= *q;
        let hi_ok = self.upper.as_ref().is_none_or(|u| !u.is_negative() && *q <= u * u);
        lo_ok && hi_ok
    }
}

/// Volume of the unit ball in dimension `k`: `pi^(k/2) / Gamma(k/2 + 1)`.
pub fn ball_volume(k: usize) -> Result<CertifiedValue> {
    Ok(CertifiedValue::from_interval(&ball_volume_interval(k, PREC)?))
}

fn ball_volume_interval(k: usize, prec: u32) -> Result<Interval> {
    if k == 0 {
        return Err(Error::Input("ball dimension must be positive".into()));
    }
    let p = pi(prec);
    let m = (k / 2) as u32;
    // even k = 2m: pi^m / m!; odd k = 2m + 1: 2^(m+1) pi^m / (2m+1)!!
    let (num, den) = if k.is_multiple_of(2) {
        (Interval::from_int(1, prec), factorial_int(m))
    } else {
        let dfact = (0..=m).fold(num_bigint::BigInt::from(1), |a, i| a * (2 * i + 1));
        (Interval::from_int(1, prec).mul_pow2(m as i64 + 1), dfact)
    };
    num.mul(&p.powi(m)).div(&Interval::from_bigint(&den, prec))
}

/// Postnikov sum `(1/(n-1)!) sum_sigma (sum_i lambda_i sigma(i))^(n-1) / prod_j (sigma(j) - sigma(j+1))`
/// for `n <= threshold`, else the ceiling `lambda_1^(n-1) n^(2n)` of the shifted partition.
pub fn psh_volume(lambda: &Partition, threshold: usize) -> PshVolume {
    let n = lambda.n();
    if n > threshold {
        return PshVolume::UpperBound(psh_closed_form_bound(lambda));
    }
    let p = lambda.parts();
    let mut total = Rational::zero();
    for sigma in (1..=n as i64).permutations(n) {
        let lin = p.iter().zip(&sigma).fold(Rational::zero(), |a, (l, &s)| a + l * int(s));
        let den: i64 = sigma.windows(2).map(|w| w[0] - w[1]).product();
        total += num_traits::pow(lin, n - 1) / int(den);
    }
    PshVolume::Exact(total / Rational::from_integer(factorial_int(n as u32 - 1)))
}

/// `lambda_1^(n-1) n^(2n)` after shifting `lambda_n` to zero.
pub fn psh_closed_form_bound(lambda: &Partition) -> Rational {
    let n = lambda.n();
    let l1 = lambda.largest() - lambda.smallest();
    num_traits::pow(l1, n - 1) * num_traits::pow(int(n as i64), 2 * n)
}

struct LogConstants {
    /// `0.5 log (n-1)!`
    half_log_fact: Interval,
    /// `log Gamma((n+1)/2) - ((n-1)/2) log pi`, i.e. `-log b_(n-1)`.
    neg_log_ball: Interval,
    /// `-d log beta`
    log_scale: Interval,
}

fn log_constants(instance: &Instance) -> Result<LogConstants> {
    let n = instance.n();
    let half_log_fact = Interval::from_bigint(&factorial_int(n as u32 - 1), PREC).ln()?.mul_pow2(-1);
    let neg_log_ball = ball_volume_interval(n - 1, PREC)?.ln()?.neg();
    let log_scale = Interval::from_rational(&instance.volume_factor(), PREC).ln()?;
    Ok(LogConstants { half_log_fact, neg_log_ball, log_scale })
}

fn rq(q: &Rational) -> Interval {
    Interval::from_rational(q, PREC)
}

fn exp_bounds(log: &Interval) -> Result<(Rational, Rational)> {
    let e = log.exp()?;
    Ok((e.lo_rational(), e.hi_rational()))
}

/// Bracket for the original pair from a completed optimization.
///
/// `lower = sqrt((n-1)!) e^-n exp(g_lower) / psh` and
/// `upper = sqrt((n-1)!) e^(n/2) exp(g_star_up) / (b_(n-1) eps^(n-1))`,
/// both multiplied by `beta^-d`.
pub fn assemble_bracket(
    instance: &Instance,
    record: &ConditioningRecord,
    opt: &OptimizationResult,
    cfg: &OptimizeConfig,
) -> Result<VolumeBracket> {
    let n = instance.n();
    let psh = psh_volume(&instance.lambda, cfg.postnikov_threshold);
    if record.is_boundary() {
        return Ok(VolumeBracket::boundary(instance, cfg.postnikov_threshold));
    }
    let c = log_constants(instance)?;
    let n_i = n as i64;
    let log_lower = c
        .half_log_fact
        .sub(&Interval::from_int(n_i, PREC))
        .add(&rq(&opt.g_lower))
        .sub(&rq(psh.upper()).ln()?)
        .add(&c.log_scale);
    let log_eps = rq(&record.epsilon.lo()).ln()?;
    let upper_const = c
        .half_log_fact
        .add(&Interval::from_int(n_i, PREC).mul_pow2(-1))
        .add(&c.neg_log_ball)
        .sub(&log_eps.mul_int(n_i - 1))
        .add(&c.log_scale);
    let g_iv = opt.g_star.to_interval(PREC);
    let log_upper = upper_const.add(&rq(&opt.g_star.hi()));
    let log_f = upper_const.add(&g_iv);

    let (lower, _) = exp_bounds(&log_lower)?;
    let (_, upper) = exp_bounds(&log_upper)?;
    let f = log_f.exp()?;
    let ratio = log_upper.sub(&log_lower);
    Ok(VolumeBracket {
        g_star: Some(opt.g_star.clone()),
        g_lower: Some(opt.g_lower.clone()),
        lower,
        upper: Some(upper),
        f_estimate: Some(CertifiedValue::from_interval(&f)),
        psh_volume: psh,
        approximation_ratio_log: Some(CertifiedValue::from_interval(&ratio)),
        log_lower: Some(CertifiedValue::from_interval(&log_lower)),
        log_upper: Some(CertifiedValue::from_interval(&log_upper)),
    })
}

/// Closed-form bracket with `psh <= lambda_1^(n-1) n^(2n)` and
/// `eps >= 1/(16 lambda_1 n^3)`, valid for integral interior instances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedFormBracket {
    pub lower: Rational,
    pub upper: Rational,
}

pub fn closed_form_bracket(instance: &Instance, opt: &OptimizationResult) -> Result<ClosedFormBracket> {
    let n = instance.n();
    let n_i = n as i64;
    let c = log_constants(instance)?;
    let l1 = instance.lambda.largest() - instance.lambda.smallest();
    let log_lower = c
        .half_log_fact
        .sub(&Interval::from_int(n_i, PREC))
        .add(&rq(&opt.g_lower))
        .sub(&rq(&psh_closed_form_bound(&instance.lambda)).ln()?)
        .add(&c.log_scale);
    let inv_eps = l1 * int(16 * n_i * n_i * n_i);
    let log_upper = c
        .half_log_fact
        .add(&Interval::from_int(n_i, PREC).mul_pow2(-1))
        .add(&c.neg_log_ball)
        .add(&rq(&inv_eps).ln()?.mul_int(n_i - 1))
        .add(&rq(&opt.g_star.hi()))
        .add(&c.log_scale);
    Ok(ClosedFormBracket { lower: exp_bounds(&log_lower)?.0, upper: exp_bounds(&log_upper)?.1 })
}
