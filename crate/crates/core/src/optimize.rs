//! Minimization of `g(y) = log S_lambda((y, 0)) - (y, 0) . mu` over a ball.
//!
//! A deep-cut ellipsoid method localizes the minimizer using certified values
//! and gradients; a damped Newton polish then drives the gradient down so that
//! the convexity bound `g(z) >= g(y) - |grad g(y)| |z - y|` over the ball
//! yields a tight certified lower bound on the infimum.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::certarith::{log_approx, CertifiedValue, Interval};
use crate::conditioning::{pgt_volume, ConditioningRecord};
use crate::domain::Instance;
use crate::error::{Error, Result};
use crate::rational::{ceil_sqrt, dot, frac, int, norm_sq, round_sig_nearest, Rational};
use crate::schur::{log_schur_and_grad, log_schur_with, EvalConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimizeConfig {
    pub eps_opt: Rational,
    /// Accuracy of the final certified evaluations of `g` (origin and optimum).
    pub delta_eval: Rational,
    pub max_domain_doublings: u32,
    pub max_iterations: usize,
    pub max_newton_steps: usize,
    /// Significant bits kept in the ellipsoid center and shape matrix.
    pub ellipsoid_bits: u32,
    /// Largest `n` for which the permutohedron volume is summed exactly.
    pub postnikov_threshold: usize,
    pub eval: EvalConfig,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            eps_opt: frac(1, 1000),
            delta_eval: frac(1, 8000),
            max_domain_doublings: 8,
            max_iterations: 20_000,
            max_newton_steps: 40,
            ellipsoid_bits: 192,
            postnikov_threshold: 8,
            eval: EvalConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimizationResult {
    pub y_star: Vec<Rational>,
    /// Certified `g(y_star)`.
    pub g_star: CertifiedValue,
    /// Certified lower bound on `inf g`.
    pub g_lower: Rational,
    pub iterations: usize,
    pub newton_steps: usize,
    /// Upper bound on `|grad log S(x*) - mu|` with `x* = (y_star, 0)`.
    pub stationarity_residual: Rational,
    /// Residual upper bounds along accepted polish steps; strictly decreasing.
    pub residual_history: Vec<Rational>,
    pub domain_doublings: u32,
    /// Best certified upper value after each domain round; non-increasing.
    pub round_best: Vec<Rational>,
    /// Working radius `R` after any doublings.
    pub radius: Rational,
    pub origin_value: CertifiedValue,
    /// Lower bound with `v0 <= g(0) <= v0 + 1`.
    pub v0: Rational,
}

fn lift(y: &[Rational]) -> Vec<Rational> {
    let mut x = y.to_vec();
    x.push(Rational::zero());
    x
}

fn check_instance(instance: &Instance) -> Result<()> {
    if instance.n() < 3 {
        return Err(Error::Input("estimation needs n >= 3".into()));
    }
    Ok(())
}

/// Certified `g(y)` within `delta`.
pub fn ghat(instance: &Instance, y: &[Rational], delta: &Rational) -> Result<CertifiedValue> {
    ghat_with(instance, y, delta, &EvalConfig::default())
}

pub fn ghat_with(instance: &Instance, y: &[Rational], delta: &Rational, cfg: &EvalConfig) -> Result<CertifiedValue> {
    if y.len() + 1 != instance.n() {
        return Err(Error::Input(format!("y needs {} entries", instance.n() - 1)));
    }
    let x = lift(y);
    let ls = log_schur_with(&instance.lambda, &x, &(delta / int(2)), cfg)?;
    Ok(ls.add_rational(&-dot(&x, instance.mu.entries())))
}

/// Value, reduced gradient (length `n-1`), and full residual `grad log S - mu` (length `n`).
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: CertifiedValue,
    pub grad: Vec<CertifiedValue>,
    pub residual: Vec<CertifiedValue>,
}

impl Evaluation {
    fn midpoint_grad(&self) -> Vec<Rational> {
        self.grad.iter().map(|g| g.to_additive().value().clone()).collect()
    }

    /// Upper bound on the norm of every vector in the gradient box.
    pub fn grad_norm_up(&self) -> Rational {
        norm_up(&self.grad)
    }

    pub fn residual_norm_up(&self) -> Rational {
        norm_up(&self.residual)
    }

    /// Upper bound on the Euclidean norm of the gradient error radii.
    fn grad_error_up(&self) -> Rational {
        let s = self.grad.iter().fold(Rational::zero(), |a, g| {
            let r = g.radius();
            a + &r * &r
        });
        sqrt_up(&s)
    }
}

fn norm_up(v: &[CertifiedValue]) -> Rational {
    let s = v.iter().fold(Rational::zero(), |a, c| {
        let m = c.lo().abs().max(c.hi().abs());
        a + &m * &m
    });
    sqrt_up(&s)
}

fn sqrt_up(q: &Rational) -> Rational {
    Interval::from_rational(q, 96).sqrt().expect("non-negative").hi_rational()
}

fn sqrt_down(q: &Rational) -> Rational {
    Interval::from_rational(q, 96).sqrt().expect("non-negative").lo_rational()
}

pub fn evaluate(instance: &Instance, y: &[Rational], delta: &Rational, cfg: &EvalConfig) -> Result<Evaluation> {
    let x = lift(y);
    let (ls, grad) = log_schur_and_grad(&instance.lambda, &x, delta, cfg)?;
    let mu = instance.mu.entries();
    let value = ls.add_rational(&-dot(&x, mu));
    let residual: Vec<CertifiedValue> = grad.iter().zip(mu).map(|(g, m)| g.add_rational(&-m)).collect();
    Ok(Evaluation { value, grad: residual[..y.len()].to_vec(), residual })
}

/// `f(y) = max(g(y), v0 - C1 + C2 |y|)`, equal to `g` on the ball of radius
/// `R + 2` and affine in `|y|` beyond `3 (R + 2)`.
///
/// With `Lg = ceil(diameter of the permutohedron)` bounding the Lipschitz
/// constant of `g`: `C1 = 3 Lg (R + 2) + 1` and `C2 = 2 Lg + 1 / (R + 2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedObjective {
    pub v0: Rational,
    pub c1: Rational,
    pub c2: Rational,
    pub radius: Rational,
}

impl ExtendedObjective {
    pub fn new(instance: &Instance, radius: &Rational) -> Result<Self> {
        let v0 = origin_floor(instance)?;
        let lg = Rational::from_integer(ceil_sqrt(&instance.lambda.diameter_sq()).max(BigInt::one()));
        let r2 = radius + int(2);
        Ok(ExtendedObjective {
            v0,
            c1: int(3) * &lg * &r2 + int(1),
            c2: int(2) * &lg + r2.recip(),
            radius: radius.clone(),
        })
    }

    pub fn eval(&self, instance: &Instance, y: &[Rational], delta: &Rational, cfg: &EvalConfig) -> Result<CertifiedValue> {
        let nrm = Interval::from_rational(&norm_sq(y), 128).sqrt()?;
        let lin_lo = &self.v0 - &self.c1 + &self.c2 * nrm.lo_rational();
        let lin_hi = &self.v0 - &self.c1 + &self.c2 * nrm.hi_rational();
        let far = int(3) * (&self.radius + int(2));
        if nrm.lo_rational() >= far {
            return Ok(CertifiedValue::from_bounds(lin_lo, lin_hi));
        }
        let g = ghat_with(instance, y, delta, cfg)?;
        Ok(CertifiedValue::from_bounds(g.lo().max(lin_lo), g.hi().max(lin_hi)))
    }
}

/// `v0 = log_approx(vol pGT(lambda), 1/2) - 1/2`, so `v0 <= g(0) <= v0 + 1`.
pub fn origin_floor(instance: &Instance) -> Result<Rational> {
    Ok(log_approx(&pgt_volume(&instance.lambda), &frac(1, 2))? - frac(1, 2))
}

pub fn extended_objective(
    instance: &Instance,
    record: &ConditioningRecord,
    y: &[Rational],
    delta: &Rational,
) -> Result<CertifiedValue> {
    ExtendedObjective::new(instance, &record.radius_ceil()?)?.eval(instance, y, delta, &EvalConfig::default())
}

/// `eps / (8 * 2^ceil(log2 t))`.
fn schedule(eps: &Rational, t: usize) -> Rational {
    let k = usize::BITS - (t.max(1) - 1).leading_zeros();
    eps / Rational::from_integer(BigInt::from(8u32) << k as u64)
}

struct Best {
    y: Vec<Rational>,
    value: CertifiedValue,
}

struct EllipsoidOutcome {
    best: Best,
    iterations: usize,
}

fn round_vec(v: &[Rational], bits: u32) -> Vec<Rational> {
    v.iter().map(|q| round_sig_nearest(q, bits)).collect()
}

fn mat_vec(p: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    p.iter().map(|row| dot(row, v)).collect()
}

fn ellipsoid(
    instance: &Instance,
    ball: &Rational,
    seed: Option<Best>,
    cfg: &OptimizeConfig,
) -> Result<EllipsoidOutcome> {
    let m = instance.n() - 1;
    let mq = int(m as i64);
    let bits = cfg.ellipsoid_bits;
    let ball_sq = ball * ball;
    let mut c = vec![Rational::zero(); m];
    let mut p: Vec<Vec<Rational>> =
        (0..m).map(|i| (0..m).map(|j| if i == j { ball_sq.clone() } else { Rational::zero() }).collect()).collect();
    let mut best = seed;
    let mut lower = None::<Rational>;
    let mut iterations = 0;
    let min_alpha = -mq.recip() / int(2);
    let mut t = 0usize;
    while t < cfg.max_iterations {
        t += 1;
        iterations = t;
        let trace = (0..m).fold(Rational::zero(), |a, i| a + &p[i][i]);
        let (g, alpha) = if norm_sq(&c) > ball_sq {
            // Feasibility cut against the ball: c . z <= ball |c|.
            let cn = sqrt_down(&norm_sq(&c));
            let s = sqrt_up(&dot(&c, &mat_vec(&p, &c)));
            (c.clone(), (&cn * (&cn - ball) / s).min(frac(9, 10)))
        } else {
            let mut delta = schedule(&cfg.eps_opt, t);
            let mut cut = None;
            for _ in 0..4 {
                let ev = evaluate(instance, &c, &delta, &cfg.eval)?;
                let improved = best.as_ref().is_none_or(|b| ev.value.hi() < b.value.hi());
                if improved {
                    best = Some(Best { y: c.clone(), value: ev.value.clone() });
                }
                let g = ev.midpoint_grad();
                let pg = mat_vec(&p, &g);
                let gpg = dot(&g, &pg);
                let err_term = ev.grad_error_up() * sqrt_up(&trace);
                if gpg.is_zero() {
                    lower = Some(ev.value.lo() - err_term);
                    break;
                }
                let s_hi = sqrt_up(&gpg);
                let s_lo = sqrt_down(&gpg);
                let lb = ev.value.lo() - &s_hi - &err_term;
                if lower.as_ref().is_none_or(|l| &lb > l) {
                    lower = Some(lb);
                }
                let f_best = best.as_ref().expect("set above").value.hi();
                let num = ev.value.lo() - &f_best - &err_term;
                let alpha = if num.is_negative() { &num / &s_lo } else { &num / &s_hi };
                if alpha >= min_alpha {
                    cut = Some((g, alpha.min(frac(9, 10))));
                    break;
                }
                delta /= int(16);
            }
            let gap_closed = match (&best, &lower) {
                (Some(b), Some(l)) => b.value.hi() - l <= cfg.eps_opt,
                _ => false,
            };
            match cut {
                Some(cut) if !gap_closed => cut,
                _ => break,
            }
        };
        // Deep-cut update with depth alpha in (-1/m, 1).
        let pg = mat_vec(&p, &g);
        let s = sqrt_up(&dot(&g, &pg));
        let b: Vec<Rational> = pg.iter().map(|v| v / &s).collect();
        let one = Rational::one();
        let step = (&one + &mq * &alpha) / (&mq + &one);
        c = round_vec(&c.iter().zip(&b).map(|(ci, bi)| ci - &step * bi).collect::<Vec<_>>(), bits);
        let shrink = &mq * &mq * (&one - &alpha * &alpha) / (&mq * &mq - &one);
        let rank1 = int(2) * (&one + &mq * &alpha) / ((&mq + &one) * (&one + &alpha));
        for i in 0..m {
            for j in 0..m {
                let v = &shrink * (&p[i][j] - &rank1 * &b[i] * &b[j]);
                p[i][j] = round_sig_nearest(&v, bits);
            }
        }
        // Keep the shape matrix exactly symmetric.
        for i in 0..m {
            for j in 0..i {
                p[i][j] = p[j][i].clone();
            }
        }
    }
    let best = best.ok_or_else(|| Error::Resource("ellipsoid method made no evaluation".into()))?;
    Ok(EllipsoidOutcome { best, iterations })
}

fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let m = b.len();
    for k in 0..m {
        let piv = (k..m).max_by(|&i, &j| a[i][k].abs().cmp(&a[j][k].abs()))?;
        if a[piv][k].is_zero() {
            return None;
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..m {
            let f = &a[i][k] / &a[k][k];
            for j in k..m {
                let v = &f * &a[k][j];
                a[i][j] -= v;
            }
            let v = &f * &b[k];
            b[i] -= v;
        }
    }
    let mut x = vec![Rational::zero(); m];
    for k in (0..m).rev() {
        let s = (k + 1..m).fold(b[k].clone(), |acc, j| acc - &a[k][j] * &x[j]);
        x[k] = s / &a[k][k];
    }
    Some(x)
}

struct Polish {
    y: Vec<Rational>,
    eval: Evaluation,
    history: Vec<Rational>,
    steps: usize,
}

/// Damped Newton iterations with a finite-difference Hessian of certified
/// gradients. A step is accepted only if the certified residual bound drops.
fn newton_polish(
    instance: &Instance,
    start: &[Rational],
    limit: &Rational,
    target: &Rational,
    cfg: &OptimizeConfig,
) -> Result<Polish> {
    let m = start.len();
    let delta = (target / int(8 * m as i64)).min(frac(1, 1 << 20));
    let bits = cfg.ellipsoid_bits;
    let mut y = start.to_vec();
    let mut ev = evaluate(instance, &y, &delta, &cfg.eval)?;
    let mut res = ev.grad_norm_up();
    let mut history = vec![ev.residual_norm_up()];
    let mut steps = 0;
    let h = frac(1, 1 << 12);
    let limit_sq = limit * limit;
    while steps < cfg.max_newton_steps && &res > target {
        let mut hess = vec![vec![Rational::zero(); m]; m];
        for k in 0..m {
            let mut yp = y.clone();
            yp[k] += &h;
            let mut ym = y.clone();
            ym[k] -= &h;
            let gp = evaluate(instance, &yp, &delta, &cfg.eval)?.midpoint_grad();
            let gm = evaluate(instance, &ym, &delta, &cfg.eval)?.midpoint_grad();
            for i in 0..m {
                hess[i][k] = (&gp[i] - &gm[i]) / (int(2) * &h);
            }
        }
        for i in 0..m {
            for j in 0..i {
                let avg = (&hess[i][j] + &hess[j][i]) / int(2);
                hess[i][j] = round_sig_nearest(&avg, 64);
                hess[j][i] = hess[i][j].clone();
            }
            hess[i][i] = round_sig_nearest(&hess[i][i], 64);
        }
        let rhs: Vec<Rational> = ev.midpoint_grad().iter().map(|g| -round_sig_nearest(g, 64)).collect();
        let Some(dir) = solve(hess, rhs) else { break };
        let mut t = Rational::one();
        let mut accepted = false;
        for _ in 0..24 {
            let cand = round_vec(&y.iter().zip(&dir).map(|(a, d)| a + &t * d).collect::<Vec<_>>(), bits);
            if norm_sq(&cand) <= limit_sq {
                let cev = evaluate(instance, &cand, &delta, &cfg.eval)?;
                let cres = cev.grad_norm_up();
                if cres < res && cev.residual_norm_up() < *history.last().expect("non-empty") {
                    y = cand;
                    res = cres;
                    history.push(cev.residual_norm_up());
                    ev = cev;
                    accepted = true;
                    break;
                }
            }
            t /= int(2);
        }
        if !accepted {
            break;
        }
        steps += 1;
    }
    Ok(Polish { y, eval: ev, history, steps })
}

/// Minimizes `g` over the ball of radius `R + 3/2`, doubling `R` whenever the
/// best point leaves the radius-`(R + 1)` ball.
pub fn minimize(instance: &Instance, record: &ConditioningRecord, cfg: &OptimizeConfig) -> Result<OptimizationResult> {
    check_instance(instance)?;
    if record.is_boundary() {
        return Err(Error::Boundary("epsilon = 0; the infimum is not attained".into()));
    }
    let m = instance.n() - 1;
    let mut radius = record.radius_ceil()?;
    let v0 = origin_floor(instance)?;
    let origin = vec![Rational::zero(); m];
    let origin_value = ghat_with(instance, &origin, &cfg.delta_eval, &cfg.eval)?;
    let mut seed: Option<Best> = None;
    let mut total_iterations = 0;
    let mut round_best = Vec::new();
    for doublings in 0..=cfg.max_domain_doublings {
        let ball = &radius + frac(3, 2);
        let out = ellipsoid(instance, &ball, seed.take(), cfg)?;
        total_iterations += out.iterations;
        round_best.push(out.best.value.hi());
        let inner = &radius + int(1);
        if norm_sq(&out.best.y) > &inner * &inner {
            radius *= int(2);
            seed = Some(out.best);
            continue;
        }
        let y_norm = sqrt_up(&norm_sq(&out.best.y));
        let target = &cfg.eps_opt / (int(4) * (&y_norm + &radius + int(2)));
        let polish = newton_polish(instance, &out.best.y, &inner, &target, cfg)?;

        let p_norm = sqrt_up(&norm_sq(&polish.y));
        let g_lower =
            polish.eval.value.lo() - (polish.eval.grad_norm_up()) * (&p_norm + &radius + int(1));
        let final_delta = cfg.delta_eval.clone();
        let polished_value = ghat_with(instance, &polish.y, &final_delta, &cfg.eval)?;
        let ell_value = ghat_with(instance, &out.best.y, &final_delta, &cfg.eval)?;
        let (y_star, g_star) = if polished_value.hi() <= ell_value.hi() {
            (polish.y.clone(), polished_value)
        } else {
            (out.best.y.clone(), ell_value)
        };
        let resid_eval = if y_star == polish.y {
            polish.eval.clone()
        } else {
            evaluate(instance, &y_star, &final_delta, &cfg.eval)?
        };
        let g_lower = g_lower.min(g_star.lo());
        return Ok(OptimizationResult {
            y_star,
            g_star,
            g_lower,
            iterations: total_iterations,
            newton_steps: polish.steps,
            stationarity_residual: resid_eval.residual_norm_up(),
            residual_history: polish.history,
            domain_doublings: doublings,
            round_best,
            radius,
            origin_value,
            v0,
        });
    }
    Err(Error::Resource(format!(
        "minimizer kept leaving the domain after {} doublings",
        cfg.max_domain_doublings
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditioning::condition;
    use crate::rational::to_f64;

    #[test]
    fn schedule_halves_on_powers_of_two() {
        let e = frac(1, 1000);
        assert_eq!(schedule(&e, 1), &e / int(8));
        assert_eq!(schedule(&e, 2), &e / int(16));
        assert_eq!(schedule(&e, 3), &e / int(32));
        assert_eq!(schedule(&e, 4), &e / int(32));
        assert_eq!(schedule(&e, 5), &e / int(64));
    }

    #[test]
    fn ghat_at_origin_is_log_volume() {
        let inst = Instance::from_ints(&[3, 1, 0], &[2, 1, 1]).unwrap();
        let v = ghat(&inst, &[int(0), int(0)], &frac(1, 1_000_000)).unwrap();
        let vol = to_f64(&pgt_volume(&inst.lambda));
        assert!(v.contains(&round_sig_nearest(&Rational::from_float(vol.ln()).unwrap(), 30)) || (v.value_f64() - vol.ln()).abs() < 1e-6);
        let v0 = origin_floor(&inst).unwrap();
        assert!(v0 <= v.lo() && v.hi() <= v0 + int(1));
    }

    #[test]
    fn extended_objective_regimes() {
        let inst = Instance::from_ints(&[2, 1, 0], &[1, 1, 1]).unwrap();
        let radius = int(10);
        let ext = ExtendedObjective::new(&inst, &radius).unwrap();
        let cfg = EvalConfig::default();
        let d = frac(1, 1000);
        let y = vec![int(3), int(-2)];
        let f = ext.eval(&inst, &y, &d, &cfg).unwrap();
        let g = ghat_with(&inst, &y, &d, &cfg).unwrap();
        assert_eq!(f, g);
        let far = vec![int(40), int(0)];
        let f = ext.eval(&inst, &far, &d, &cfg).unwrap();
        let lin = &ext.v0 - &ext.c1 + &ext.c2 * int(40);
        assert!(f.contains(&lin));
        let f0 = ext.eval(&inst, &[int(0), int(0)], &d, &cfg).unwrap();
        assert_eq!(f0, ghat_with(&inst, &[int(0), int(0)], &d, &cfg).unwrap());
    }

    #[test]
    fn symmetric_instance_minimizer_is_origin() {
        let inst = Instance::from_ints(&[2, 1, 0], &[1, 1, 1]).unwrap();
        let rec = condition(&inst).unwrap();
        let res = minimize(&inst, &rec, &OptimizeConfig::default()).unwrap();
        let yn = to_f64(&norm_sq(&res.y_star)).sqrt();
        assert!(yn < 1e-2, "|y*| = {yn}");
        assert!(res.g_star.lo() <= frac(1, 100) && res.g_star.hi() >= frac(-1, 100));
        assert!(res.g_lower <= res.g_star.lo());
        assert!(res.residual_history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_small_n() {
        let inst = Instance::from_ints(&[1, 0], &[1, 0]).unwrap();
        let rec = condition(&inst).unwrap();
        assert!(minimize(&inst, &rec, &OptimizeConfig::default()).is_err());
    }
}
