//! Property tests for the structural invariants of each module.

mod common;

use common::{cofactor_det, r0_squared_by_subsets};
use kostka_core::bounds::psh_volume;
use kostka_core::certarith::{det_exact, log_approx};
use kostka_core::conditioning::{compute_tau, r0_squared};
use kostka_core::domain::{build_ptilde, majorizes, project_q, HalfspacePolytope, Partition, Weight};
use kostka_core::optimize::ghat;
use kostka_core::oracle::{enumerate_patterns, exact_volume, kostka_count, vertices};
use kostka_core::rational::{frac, int, Rational};
use kostka_core::{condition, CertifiedValue, Instance, RationalMatrix};
use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use std::collections::HashMap;

fn q(num: i64, den: i64) -> Rational {
    frac(num, den)
}

/// Distinct-part partition from consecutive gaps, last part `base`.
fn from_gaps(gaps: &[i64], base: i64) -> Partition {
    let mut parts = vec![base];
    for g in gaps.iter().rev() {
        parts.push(parts.last().unwrap() + g);
    }
    parts.reverse();
    Partition::from_ints(&parts).unwrap()
}

fn partition_strategy(n: std::ops::RangeInclusive<usize>, max_gap: i64) -> impl Strategy<Value = Partition> {
    n.prop_flat_map(move |n| prop::collection::vec(1..=max_gap, n - 1)).prop_map(|g| from_gaps(&g, 0))
}

/// Convex combination of permutations of `lambda` with the given weights.
fn mix(lambda: &Partition, perms: &[(Vec<usize>, i64)]) -> Weight {
    let n = lambda.n();
    let total: i64 = perms.iter().map(|p| p.1).sum();
    let mut acc = vec![Rational::zero(); n];
    for (perm, w) in perms {
        for i in 0..n {
            acc[i] += &lambda.parts()[perm[i]] * int(*w);
        }
    }
    Weight::new(acc.into_iter().map(|v| v / int(total)).collect())
}

fn instance_strategy(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (Partition, Weight)> {
    partition_strategy(n, 4).prop_flat_map(|lambda| {
        let n = lambda.n();
        let perm = Just((0..n).collect::<Vec<usize>>()).prop_shuffle();
        prop::collection::vec((perm, 1i64..=5), 1..=4).prop_map(move |perms| (lambda.clone(), mix(&lambda, &perms)))
    })
}

fn dyadic(range: i64, bits: u32) -> impl Strategy<Value = Rational> {
    let s = 1i64 << bits;
    (-range * s..=range * s).prop_map(move |v| Rational::new(BigInt::from(v), BigInt::from(s)))
}

fn sorted_vertices(poly: &HalfspacePolytope) -> Vec<Vec<Rational>> {
    let mut v = vertices(poly).unwrap().vertices;
    v.sort();
    v
}

/// pSH(lambda) as an H-polytope in the first `n - 1` coordinates.
fn psh_polytope(lambda: &Partition) -> HalfspacePolytope {
    let n = lambda.n();
    let total = lambda.total();
    let mut rows = Vec::new();
    for mask in 1u32..(1 << n) - 1 {
        let k = mask.count_ones() as usize;
        let bound = lambda.prefix(k);
        // sum_{i in S} x_i <= P_k, with x_n = total - sum_{i<n} x_i.
        let mut coeffs = vec![Rational::zero(); n - 1];
        let mut rhs = bound;
        for (i, c) in coeffs.iter_mut().enumerate() {
            if mask & (1 << i) != 0 {
                *c += int(1);
            }
        }
        if mask & (1 << (n - 1)) != 0 {
            for c in coeffs.iter_mut() {
                *c -= int(1);
            }
            rhs -= &total;
        }
        rows.push((coeffs, rhs));
    }
    HalfspacePolytope::new(n - 1, rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn q_is_shift_invariant(x in prop::collection::vec(dyadic(5, 6), 2..6), c in dyadic(5, 6)) {
        let shifted: Vec<Rational> = x.iter().map(|v| v + &c).collect();
        prop_assert_eq!(project_q(&x), project_q(&shifted));
    }

    #[test]
    fn center_is_majorized(lambda in partition_strategy(2..=6, 5)) {
        prop_assert!(majorizes(&lambda, &Weight::center_of(&lambda)).unwrap());
    }

    #[test]
    fn kostka_symmetric_in_mu(lambda in prop::collection::vec(0i64..=3, 3..=4), seed in any::<u64>()) {
        let mut l = lambda.clone();
        l.sort_by(|a, b| b.cmp(a));
        let total: i64 = l.iter().sum();
        let n = l.len();
        // Any weight with the right total; permute it by rotation and a swap.
        let mut mu = vec![0i64; n];
        let mut s = seed;
        for _ in 0..total {
            mu[(s % n as u64) as usize] += 1;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407) >> 7;
        }
        let base = kostka_count(&l, &mu);
        let mut rot = mu.clone();
        rot.rotate_left(1);
        prop_assert_eq!(&base, &kostka_count(&l, &rot));
        let mut sw = mu.clone();
        sw.swap(0, n - 1);
        prop_assert_eq!(&base, &kostka_count(&l, &sw));
    }

    #[test]
    fn certified_sum_and_product_are_sound(
        a in dyadic(20, 8), ea in 0i64..64, b in dyadic(20, 8), eb in 0i64..64,
        ta in -64i64..=64, tb in -64i64..=64,
    ) {
        let ra = q(ea, 256);
        let rb = q(eb, 256);
        let x = CertifiedValue::additive(a.clone(), ra.clone()).unwrap();
        let y = CertifiedValue::additive(b.clone(), rb.clone()).unwrap();
        // Representatives anywhere in the two intervals.
        let pa = &a + &ra * q(ta, 64);
        let pb = &b + &rb * q(tb, 64);
        prop_assert!(x.add(&y).contains(&(&pa + &pb)));
        prop_assert!(x.sub(&y).contains(&(&pa - &pb)));
        prop_assert!(x.mul(&y).contains(&(&pa * &pb)));
    }

    #[test]
    fn multiplicative_mode_is_sound(a in 1i64..1000, rel in 0i64..100, t in -100i64..=100) {
        let v = int(a);
        let r = q(rel, 1000);
        let x = CertifiedValue::multiplicative(v.clone(), r.clone()).unwrap();
        let rep = &v * (int(1) + &r * q(t, 100));
        prop_assert!(x.contains(&rep));
        prop_assert!(x.scale(&int(3)).contains(&(rep * int(3))));
    }

    #[test]
    fn log_approx_is_additive(xn in 1i64..100_000, xd in 1i64..100_000, yn in 1i64..100_000, yd in 1i64..100_000, k in 4i64..40) {
        let x = q(xn, xd);
        let y = q(yn, yd);
        let delta = Rational::new(BigInt::from(1), BigInt::from(1) << k as usize);
        let lxy = log_approx(&(&x * &y), &delta).unwrap();
        let lx = log_approx(&x, &delta).unwrap();
        let ly = log_approx(&y, &delta).unwrap();
        prop_assert!((lxy - lx - ly).abs() <= delta * int(3));
    }

    #[test]
    fn det_exact_matches_cofactor(n in 1usize..=5, seed in prop::collection::vec(-3i64..=3, 25)) {
        let rows: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| int(seed[i * 5 + j])).collect()).collect();
        let m = RationalMatrix::new(rows.clone()).unwrap();
        prop_assert_eq!(det_exact(&m), cofactor_det(&rows));
    }

    #[test]
    fn tau_grows_toward_center((lambda, mu) in instance_strategy(3..=5)) {
        let center = Weight::center_of(&lambda);
        let half: Vec<Rational> = mu.entries().iter().zip(center.entries()).map(|(a, b)| (a + b) / int(2)).collect();
        let t0 = compute_tau(&lambda, &mu).unwrap();
        let t1 = compute_tau(&lambda, &Weight::new(half)).unwrap();
        prop_assert!(t1 >= t0);
    }

    #[test]
    fn conditioning_relations((lambda, mu) in instance_strategy(3..=5)) {
        let inst = Instance::new(lambda, mu).unwrap();
        let rec = condition(&inst).unwrap();
        let n = int(inst.n() as i64);
        prop_assert_eq!(rec.r.value(), &(&rec.tau * &rec.lambda_gap / int(4)));
        // delta' = r / (4 n^(3/2)), checked on squares.
        let target = rec.r.value() * rec.r.value() / (int(16) * &n * &n * &n);
        let dl = rec.delta_prime.lo().max(Rational::zero());
        prop_assert!(&dl * &dl <= target && target <= rec.delta_prime.hi() * rec.delta_prime.hi());
        // epsilon never exceeds the gap term tau * gap / (16 n^2).
        prop_assert!(!rec.epsilon.lo().is_negative());
        prop_assert!(rec.epsilon.lo() <= &rec.tau * &rec.lambda_gap / (int(16) * &n * &n));
        prop_assert_eq!(r0_squared(&inst.lambda), r0_squared_by_subsets(&inst.lambda));
    }

    #[test]
    fn ghat_is_convex(
        (lambda, mu) in instance_strategy(3..=4),
        y1 in prop::collection::vec(dyadic(3, 6), 3),
        y2 in prop::collection::vec(dyadic(3, 6), 3),
        th in 1i64..16,
    ) {
        let inst = Instance::new(lambda, mu).unwrap();
        let m = inst.n() - 1;
        let theta = q(th, 16);
        let one_m = int(1) - &theta;
        let a: Vec<Rational> = y1[..m].to_vec();
        let b: Vec<Rational> = y2[..m].to_vec();
        let mid: Vec<Rational> = a.iter().zip(&b).map(|(u, v)| &theta * u + &one_m * v).collect();
        let delta = q(1, 1 << 20);
        let gm = ghat(&inst, &mid, &delta).unwrap();
        let ga = ghat(&inst, &a, &delta).unwrap();
        let gb = ghat(&inst, &b, &delta).unwrap();
        prop_assert!(gm.lo() <= &theta * ga.hi() + &one_m * gb.hi());
    }

    #[test]
    fn psh_volume_is_congruence_invariant(lambda in partition_strategy(3..=4, 4), c in -5i64..=5) {
        // lambda -> reverse(-lambda) + c maps the permutohedron to a congruent copy.
        let mut parts: Vec<Rational> = lambda.parts().iter().rev().map(|v| int(c) - v).collect();
        parts.sort_by(|a, b| b.cmp(a));
        let mirrored = Partition::new(parts).unwrap();
        let a = psh_volume(&lambda, 8);
        prop_assert_eq!(&a, &psh_volume(&mirrored, 8));
        prop_assert_eq!(a.upper(), &exact_volume(&psh_polytope(&lambda)).unwrap());
    }

    #[test]
    fn translated_pairs_translate_vertices((lambda, mu) in instance_strategy(3..=4), a in 1i64..=5) {
        let shift = int(a);
        let lt = lambda.affine(&int(1), &shift);
        let mt = mu.affine(&int(1), &shift);
        let v0 = sorted_vertices(&build_ptilde(&lambda, &mu).unwrap());
        let v1 = sorted_vertices(&build_ptilde(&lt, &mt).unwrap());
        let mut moved: Vec<Vec<Rational>> = v0.iter().map(|v| v.iter().map(|x| x + &shift).collect()).collect();
        moved.sort();
        prop_assert_eq!(moved, v1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn boundary_weights_have_zero_volume(lambda in partition_strategy(3..=4, 3), w in 1i64..=4, k in 1usize..=2) {
        // Mix only permutations fixing the top-k set {0..k}: prefix slack k is zero.
        let n = lambda.n();
        let k = k.min(n - 1);
        let mut p1: Vec<usize> = (0..n).collect();
        p1[k..].reverse();
        let mut p2: Vec<usize> = (0..n).collect();
        p2[..k].reverse();
        let mu = mix(&lambda, &[((0..n).collect(), w), (p1, 1), (p2, 2)]);
        let poly = build_ptilde(&lambda, &mu).unwrap();
        prop_assert_eq!(exact_volume(&poly).unwrap(), Rational::zero());
        let inst = Instance::new(lambda, mu).unwrap();
        prop_assert!(!inst.is_interior());
    }

    #[test]
    fn objective_is_coercive_at_the_domain_edge((lambda, mu) in instance_strategy(3..=4), dir in prop::collection::vec(-8i64..=8, 3)) {
        let inst = Instance::new(lambda, mu).unwrap();
        prop_assume!(inst.is_interior());
        let m = inst.n() - 1;
        let d: Vec<i64> = dir[..m].to_vec();
        prop_assume!(d.iter().any(|v| *v != 0));
        let rec = condition(&inst).unwrap();
        let r1 = rec.radius_ceil().unwrap() + int(1);
        // Scale so that |y| >= R + 1 with |y| <= R + 2.
        let nsq: i64 = d.iter().map(|v| v * v).sum();
        let root = (nsq as f64).sqrt().floor() as i64;
        let y: Vec<Rational> = d.iter().map(|v| int(*v) * &r1 / int(root)).collect();
        let delta = q(1, 1000);
        let at_edge = ghat(&inst, &y, &delta).unwrap();
        let origin = ghat(&inst, &vec![Rational::zero(); m], &delta).unwrap();
        prop_assert!(at_edge.lo() > origin.hi());
    }
}

/// Weight of a pattern listed from the top row: `mu_k = |row_{n-k}| - |row_{n-k+1}|`.
fn pattern_weight(p: &[Vec<i64>]) -> Vec<i64> {
    let sums: Vec<i64> = p.iter().rev().map(|r| r.iter().sum()).collect();
    (0..sums.len()).map(|k| sums[k] - if k == 0 { 0 } else { sums[k - 1] }).collect()
}

fn partitions_of(total: i64, n: usize, max: i64) -> Vec<Vec<i64>> {
    if n == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=max.min(total)).rev() {
        for mut rest in partitions_of(total - first, n - 1, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[test]
fn dp_matches_enumeration_exhaustively() {
    for n in 2..=4 {
        for total in 0..=8 {
            for lambda in partitions_of(total, n, total) {
                let mut counts: HashMap<Vec<i64>, u64> = HashMap::new();
                for p in enumerate_patterns(&lambda) {
                    *counts.entry(pattern_weight(&p)).or_default() += 1;
                }
                for (mu, c) in &counts {
                    assert_eq!(kostka_count(&lambda, mu), BigUint::from(*c), "lambda {lambda:?} mu {mu:?}");
                }
                // A weight with no pattern counts zero.
                let mut bad = vec![0i64; n];
                bad[n - 1] = total + 1;
                assert!(kostka_count(&lambda, &bad).is_zero());
            }
        }
    }
}
