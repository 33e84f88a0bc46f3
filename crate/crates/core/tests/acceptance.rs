//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs as a plain binary (`harness = false`) so the report reads top
//! to bottom.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use kostka_core::bounds::PshVolume;
use kostka_core::certarith::{det_certified, det_exact, exp_neg_approx, log_approx};
use kostka_core::conditioning::{check_floors, compute_r0, compute_tau, pgt_volume, r0_squared};
use kostka_core::domain::{majorizes, Partition, Weight};
use kostka_core::oracle::{exact_kostka_volume, kostka_count, logconcavity_probe, scaling_limit};
use kostka_core::rational::{frac, int, pow2, to_f64, Rational};
use kostka_core::schur::schur_monotonicity_check;
use kostka_core::{condition, estimate, grad_log_schur, log_schur, Estimate, Instance, OptimizeConfig, RationalMatrix};
use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform dyadic rational in `[lo, hi]` with denominator `2^bits`.
fn dyadic_in(rng: &mut impl Rng, lo: i64, hi: i64, bits: u32) -> Rational {
    let scale = 1i64 << bits;
    Rational::new(BigInt::from(rng.gen_range(lo * scale..=hi * scale)), BigInt::from(scale))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn norm_f64(v: &[Rational]) -> f64 {
    v.iter().map(|x| to_f64(x).powi(2)).sum::<f64>().sqrt()
}

struct SuiteRun {
    instance: Instance,
    estimate: Result<Estimate, String>,
    v_squared: Rational,
    seconds: f64,
}

fn run_suite() -> Vec<SuiteRun> {
    let cfg = OptimizeConfig::default();
    (0..INTERIOR_SUITE.len())
        .map(|i| {
            let instance = suite_instance(i);
            let v_squared = exact_kostka_volume(&instance, 6).expect("oracle volume").v_squared;
            let start = Instant::now();
            let estimate = estimate(&instance, &cfg).map_err(|e| e.to_string());
            SuiteRun { instance, estimate, v_squared, seconds: start.elapsed().as_secs_f64() }
        })
        .collect()
}

fn label(inst: &Instance) -> String {
    let fmt = |v: &[Rational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    format!("({})/({})", fmt(inst.original_lambda.parts()), fmt(inst.original_mu.entries()))
}

fn criterion_1(runs: &[SuiteRun]) -> Outcome {
    let mut worst = 0f64;
    for run in runs {
        let est = run.estimate.as_ref().map_err(|e| format!("{}: {e}", label(&run.instance)))?;
        ensure(est.bracket.contains_sqrt_scaled(&run.v_squared), || {
            format!(
                "{}: V = {:.6e} outside [{:.6e}, {:.6e}]",
                label(&run.instance),
                to_f64(&run.v_squared).sqrt(),
                to_f64(&est.bracket.lower),
                est.bracket.upper.as_ref().map_or(f64::INFINITY, to_f64)
            )
        })?;
        ensure(run.seconds < 60.0, || format!("{}: took {:.1}s", label(&run.instance), run.seconds))?;
        worst = worst.max(run.seconds);
    }
    Ok(format!("{} instances contained, slowest {:.2}s", runs.len(), worst))
}

fn criterion_2() -> Outcome {
    let inst = Instance::from_ints(&[2, 1, 0], &[1, 1, 1]).map_err(|e| e.to_string())?;
    let kv = exact_kostka_volume(&inst, 6).map_err(|e| e.to_string())?;
    ensure(kv.vtilde == int(1) && kv.v_squared == int(2), || format!("Vtilde = {}, V^2 = {}", kv.vtilde, kv.v_squared))?;
    let k = kostka_count(&[2, 1, 0], &[1, 1, 1]);
    ensure(k == BigUint::from(2u32), || format!("K = {k}"))?;
    let record = condition(&inst).map_err(|e| e.to_string())?;
    ensure(record.epsilon.lo() >= frac(1, 864), || format!("epsilon lower end {} < 1/864", record.epsilon.lo()))?;
    let cfg = OptimizeConfig::default();
    let est = estimate(&inst, &cfg).map_err(|e| e.to_string())?;
    ensure(est.bracket.psh_volume == PshVolume::Exact(int(3)), || format!("psh = {:?}", est.bracket.psh_volume))?;
    let opt = est.opt.as_ref().ok_or("no optimization result")?;
    let g_off = opt.g_star.value().abs();
    ensure(g_off <= &cfg.eps_opt + opt.g_star.radius(), || format!("g* = {}", to_f64(opt.g_star.value())))?;
    ensure(est.bracket.contains_sqrt_scaled(&int(2)), || "bracket misses sqrt 2".into())?;
    Ok(format!(
        "V^2 = 2, K = 2, eps >= {:.6}, psh = 3, g* = {:.2e}, bracket [{:.4e}, {:.4e}]",
        record.epsilon.lo_f64(),
        to_f64(opt.g_star.value()),
        to_f64(&est.bracket.lower),
        est.bracket.upper.as_ref().map_or(f64::INFINITY, to_f64)
    ))
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let delta = frac(1, 1_000_000);
    let mut count = 0;
    for n in [3usize, 4, 5] {
        let reps = if n == 5 { 4 } else { 3 };
        for _ in 0..reps {
            let raw = random_partition(&mut r, n, 4);
            let lambda = Instance::new(raw.clone(), Weight::center_of(&raw)).map_err(|e| e.to_string())?.lambda;
            let origin = vec![Rational::zero(); n];
            let val = log_schur(&lambda, &origin, &delta).map_err(|e| e.to_string())?;
            let vol = pgt_volume(&lambda);
            ensure(log_interval_contains(&val.lo(), &val.hi(), &vol), || {
                format!("lambda {:?}: [{}, {}] misses log {}", lambda.parts(), val.lo_f64(), val.hi_f64(), vol)
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} partitions, n in {{3,4,5}}"))
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let h = frac(1, 100_000);
    let delta = frac(1, 1_000_000_000_000_000);
    let mut worst = 0f64;
    for k in 0..20 {
        let n = 3 + k % 3;
        let raw = random_partition(&mut r, n, 3);
        let lambda = Instance::new(raw.clone(), Weight::center_of(&raw)).map_err(|e| e.to_string())?.lambda;
        let x: Vec<Rational> = (0..n).map(|_| dyadic_in(&mut r, -1, 1, 10)).collect();
        let grad = grad_log_schur(&lambda, &x, &delta).map_err(|e| e.to_string())?;
        for i in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += &h;
            xm[i] -= &h;
            let fp = log_schur(&lambda, &xp, &delta).map_err(|e| e.to_string())?;
            let fm = log_schur(&lambda, &xm, &delta).map_err(|e| e.to_string())?;
            let fd = (fp.value() - fm.value()) / (int(2) * &h);
            let dev = (fd.clone() - grad[i].value()).abs();
            // Finite-difference noise from the value radii, plus the relative budget.
            let allowed = frac(1, 1_000_000) * grad[i].value().abs().max(int(1))
                + grad[i].radius()
                + (fp.radius() + fm.radius()) / (int(2) * &h);
            worst = worst.max(to_f64(&dev) / to_f64(grad[i].value()).abs().max(1.0));
            ensure(dev <= allowed, || format!("lambda {:?} x {:?} coord {i}: fd {} vs {}", lambda.parts(), x, to_f64(&fd), grad[i].value_f64()))?;
        }
        // Coordinate sum equals |lambda| within the summed radii.
        let total: Rational = grad.iter().fold(Rational::zero(), |a, g| a + g.value());
        let rad: Rational = grad.iter().fold(Rational::zero(), |a, g| a + g.radius());
        ensure((&total - lambda.total()).abs() <= rad, || format!("gradient sum {} vs {}", to_f64(&total), lambda.total()))?;
        // The box meets SH(lambda): the center majorized up to slack k * max radius.
        let max_rad = grad.iter().map(|g| g.radius()).max().unwrap_or_else(Rational::zero);
        let mut mids: Vec<Rational> = grad.iter().map(|g| g.value().clone()).collect();
        mids.sort_by(|a, b| b.cmp(a));
        let mut acc = Rational::zero();
        for (j, m) in mids.iter().enumerate().take(n - 1) {
            acc += m;
            let slack = int(j as i64 + 1) * &max_rad;
            ensure(acc <= lambda.prefix(j + 1) + slack, || format!("gradient box leaves SH at prefix {}", j + 1))?;
        }
    }
    Ok(format!("20 points, worst relative deviation {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let cfg = OptimizeConfig { eps_opt: frac(1, 10_000), ..OptimizeConfig::default() };
    let mut parts = Vec::new();
    for (l, m) in [(&[4i64, 2, 0][..], &[2i64, 2, 2][..]), (&[6, 4, 2, 0], &[3, 3, 3, 3])] {
        let inst = Instance::from_ints(l, m).map_err(|e| e.to_string())?;
        let est = estimate(&inst, &cfg).map_err(|e| e.to_string())?;
        let opt = est.opt.ok_or("no optimization result")?;
        let ynorm = norm_f64(&opt.y_star);
        let res = to_f64(&opt.stationarity_residual);
        ensure(ynorm <= 1e-2 && res <= 1e-2, || format!("{}: |y*| = {ynorm:.2e}, residual {res:.2e}", label(&inst)))?;
        parts.push(format!("{}: |y*| = {ynorm:.1e}, residual {res:.1e}", label(&inst)));
    }
    Ok(parts.join("; "))
}

fn criterion_6() -> Outcome {
    let cases: &[(&[i64], &[i64])] = &[
        (&[3, 1, 0], &[2, 1, 1]),
        (&[5, 2, 0], &[3, 2, 2]),
        (&[4, 2, 1, 0], &[2, 2, 2, 1]),
        (&[5, 3, 1, 0], &[3, 2, 2, 2]),
        (&[6, 4, 2, 0], &[3, 3, 3, 3]),
    ];
    let mut finals = Vec::new();
    for (l, m) in cases {
        let inst = Instance::from_ints(l, m).map_err(|e| e.to_string())?;
        let vt = exact_kostka_volume(&inst, 6).map_err(|e| e.to_string())?.vtilde;
        let errs: Vec<Rational> = [8u32, 16, 32, 64]
            .iter()
            .map(|&big_n| scaling_limit(l, m, big_n).map(|s| (s - &vt).abs()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure(errs.windows(2).all(|w| w[1] < w[0]), || format!("{l:?}/{m:?}: errors not decreasing {errs:?}"))?;
        let rel = to_f64(&(errs[3].clone() / &vt));
        ensure(errs[3].clone() * int(10) <= vt, || format!("{l:?}/{m:?}: N=64 relative error {rel:.3}"))?;
        finals.push(format!("{rel:.3}"));
    }
    Ok(format!("N=64 relative errors [{}]", finals.join(", ")))
}

fn criterion_7(runs: &[SuiteRun]) -> Outcome {
    let mut r = rng(7);
    let tol = pow2(-40);
    for _ in 0..50 {
        let n = r.gen_range(3..=5);
        let lambda = random_partition(&mut r, n, 5);
        let mu = random_weight_inside(&mut r, &lambda, 3, 5);
        let tau = compute_tau(&lambda, &mu).map_err(|e| e.to_string())?;
        let bis = tau_bisection(&lambda, &mu, 60);
        ensure((&tau - &bis).abs() <= tol, || format!("tau {} vs bisection {}", to_f64(&tau), to_f64(&bis)))?;
        let inst = Instance::new(lambda, mu).map_err(|e| e.to_string())?;
        let record = condition(&inst).map_err(|e| e.to_string())?;
        ensure(check_floors(&inst, &record).all_hold(), || format!("floor fails on {}", label(&inst)))?;
    }
    for n in 2..=6 {
        for _ in 0..4 {
            let lambda = random_partition(&mut r, n, 6);
            let oracle = r0_squared_by_subsets(&lambda);
            ensure(r0_squared(&lambda) == oracle, || format!("r0^2 {:?}", lambda.parts()))?;
            let r0 = compute_r0(&lambda);
            let lo = r0.lo().max(Rational::zero());
            ensure(&lo * &lo <= oracle && oracle <= r0.hi() * r0.hi(), || format!("r0 interval misses {:?}", lambda.parts()))?;
        }
    }
    for run in runs {
        let record = condition(&run.instance).map_err(|e| e.to_string())?;
        let floors = check_floors(&run.instance, &record);
        ensure(floors.all_hold() && floors.epsilon_floor == Some(true), || format!("floor fails on {}", label(&run.instance)))?;
    }
    Ok(format!("50 tau instances within 2^-40, r0 for n in 2..=6, floors on {} suite instances", runs.len()))
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    for k in 0..100 {
        let x = dyadic_in(&mut r, 0, 50, 20);
        let delta = pow2(-(10 + (k % 5) * 10));
        let t = exp_neg_approx(&x, &delta).map_err(|e| e.to_string())?;
        let (lo, hi) = exp_neg_enclosure(&x);
        let one = int(1);
        ensure(&hi * (&one - &delta) <= t && t <= &lo * (&one + &delta), || format!("exp_neg_approx({}) outside bound", to_f64(&x)))?;
    }
    for k in 0..100 {
        // log-uniform in (1e-3, 1e3)
        let e: f64 = r.gen_range(-3.0..3.0);
        let x = Rational::from_float(10f64.powf(e)).ok_or("bad float")?;
        let delta = pow2(-(10 + (k % 5) * 10));
        let l = log_approx(&x, &delta).map_err(|e| e.to_string())?;
        let (lo, hi) = log_enclosure(&x);
        ensure(&hi - &delta <= l && l <= &lo + &delta, || format!("log_approx({}) outside bound", to_f64(&x)))?;
    }
    let entry_err = pow2(-48);
    let mut checked = 0;
    while checked < 100 {
        let n = if checked % 2 == 0 { 3 } else { 4 };
        let rows: Vec<Vec<Rational>> = (0..n).map(|_| (0..n).map(|_| int(r.gen_range(-9..=9))).collect()).collect();
        let exact = det_exact(&RationalMatrix::new(rows.clone()).map_err(|e| e.to_string())?);
        ensure(exact == cofactor_det(&rows), || "det_exact disagrees with cofactor expansion".into())?;
        if exact.is_zero() {
            continue;
        }
        let perturbed: Vec<Vec<Rational>> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| {
                        let u = Rational::new(BigInt::from(r.gen_range(-1000..=1000)), BigInt::from(1000));
                        v * (int(1) + &u * &entry_err)
                    })
                    .collect()
            })
            .collect();
        let m = RationalMatrix::new(perturbed).map_err(|e| e.to_string())?;
        let tau = m.max_abs_entry().max(int(9));
        let cv = det_certified(&m, &entry_err, &tau, &exact.abs()).map_err(|e| e.to_string())?;
        ensure(cv.contains(&exact), || format!("det_certified misses {exact}"))?;
        checked += 1;
    }
    Ok("100 exp_neg, 100 log, 100 determinant checks".into())
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    for k in 0..20 {
        let n = if k < 10 { 3 } else { 4 };
        let lambda = random_partition(&mut r, n, 3);
        let a = random_weight_inside(&mut r, &lambda, 2, 3);
        let b = random_weight_inside(&mut r, &lambda, 2, 3);
        let rep = logconcavity_probe(&lambda, &a, &b, 2, 6).map_err(|e| e.to_string())?;
        ensure(rep.holds(), || format!("midpoint inequality fails for {:?}", lambda.parts()))?;
    }
    Ok("20 segments, exact midpoint inequality".into())
}

fn criterion_10() -> Outcome {
    let mut r = rng(10);
    let delta = pow2(-40);
    let (ln2_lo, ln2_hi) = log_enclosure(&int(2));
    for _ in 0..20 {
        let n = r.gen_range(3..=5);
        let lambda = random_partition(&mut r, n, 3).affine(&int(1), &int(1));
        let x: Vec<Rational> = (0..n).map(|_| dyadic_in(&mut r, -2, 2, 8)).collect();
        let base = log_schur(&lambda, &x, &delta).map_err(|e| e.to_string())?;
        // Translation: S(x + c 1) = exp(c |lambda|) S(x).
        let c = dyadic_in(&mut r, -1, 1, 6);
        let shifted: Vec<Rational> = x.iter().map(|v| v + &c).collect();
        let tr = log_schur(&lambda, &shifted, &delta).map_err(|e| e.to_string())?;
        ensure(tr.overlaps(&base.add_rational(&(&c * lambda.total()))), || "translation identity fails".into())?;
        // Scaling: S_{2 lambda}(x) = 2^C(n,2) S_lambda(2 x).
        let doubled = lambda.affine(&int(2), &int(0));
        let x2: Vec<Rational> = x.iter().map(|v| v * int(2)).collect();
        let lhs = log_schur(&doubled, &x, &delta).map_err(|e| e.to_string())?;
        let rhs = log_schur(&lambda, &x2, &delta).map_err(|e| e.to_string())?;
        let pairs = int((n * (n - 1) / 2) as i64);
        let diff_lo = lhs.lo() - rhs.hi();
        let diff_hi = lhs.hi() - rhs.lo();
        ensure(diff_lo <= &pairs * &ln2_hi && &pairs * &ln2_lo <= diff_hi, || "scaling identity fails".into())?;
        // Permutation symmetry.
        let mut perm = x.clone();
        perm.rotate_left(1);
        perm.swap(0, n - 1);
        let pv = log_schur(&lambda, &perm, &delta).map_err(|e| e.to_string())?;
        ensure(pv.overlaps(&base), || "permutation symmetry fails".into())?;
    }
    for _ in 0..10 {
        let n = r.gen_range(3..=5);
        let lambda = random_partition(&mut r, n, 4);
        // mu = lambda - t (e_1 - e_n) with t below the smallest gap keeps lambda - mu valid.
        let t = lambda.gap() * frac(r.gen_range(1..=9), 10);
        let mut parts = lambda.parts().to_vec();
        parts[0] -= &t;
        parts[n - 1] += &t;
        let mu = Partition::new(parts).map_err(|e| e.to_string())?;
        ensure(majorizes(&lambda, &Weight::new(mu.parts().to_vec())).unwrap_or(false), || "constructed mu not majorized".into())?;
        let x: Vec<Rational> = (0..n).map(|_| dyadic_in(&mut r, -2, 2, 8)).collect();
        let ok = schur_monotonicity_check(&lambda, &mu, &x).map_err(|e| e.to_string())?;
        ensure(ok, || format!("monotonicity fails for {:?}", lambda.parts()))?;
    }
    Ok("20 identity points, 10 monotonicity triples".into())
}

fn criterion_11(runs: &[SuiteRun]) -> Outcome {
    const K0: i64 = 12;
    let mut fitted = f64::NEG_INFINITY;
    for run in runs {
        let est = run.estimate.as_ref().map_err(|e| format!("{}: {e}", label(&run.instance)))?;
        let ratio = est.bracket.approximation_ratio_log.as_ref().ok_or("no ratio")?;
        let n = run.instance.n() as i64;
        let l1 = run.instance.original_lambda.largest().clone();
        let (ln_n, _) = log_enclosure(&int(n));
        let (ln_l1, _) = log_enclosure(&l1);
        let envelope = int(n) * (frac(11, 2) * ln_n + int(2) * ln_l1 + int(K0));
        ensure(ratio.hi() <= envelope, || format!("{}: ratio log {:.3} > {:.3}", label(&run.instance), ratio.hi_f64(), to_f64(&envelope)))?;
        let nf = n as f64;
        let k = ratio.hi_f64() / nf - 5.5 * nf.ln() - 2.0 * to_f64(&l1).ln();
        fitted = fitted.max(k);
    }
    Ok(format!("envelope holds with K0 = {K0}; fitted K0 = {fitted:.3}"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let runs = run_suite();
    let results: Vec<(u32, Outcome)> = vec![
        (1, criterion_1(&runs)),
        (2, criterion_2()),
        (3, criterion_3()),
        (4, criterion_4()),
        (5, criterion_5()),
        (6, criterion_6()),
        (7, criterion_7(&runs)),
        (8, criterion_8()),
        (9, criterion_9()),
        (10, criterion_10()),
        (11, criterion_11(&runs)),
    ];
    let mut failed = 0;
    for (k, res) in &results {
        match res {
            Ok(detail) => println!("criterion {k}: PASS - {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {k}: FAIL - {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed in {:.1}s", results.len() - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
