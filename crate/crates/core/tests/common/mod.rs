//! Independent oracles for the integration and acceptance suites.
//!
//! These routines deliberately avoid the crate's certified kernels: series are
//! summed on truncated rationals with explicit tail bounds, determinants are
//! cofactor expansions, and conditioning quantities are recomputed by
//! bisection or by brute force over subsets.

#![allow(dead_code)]

use kostka_core::domain::{majorizes, Partition, Weight};
use kostka_core::rational::{frac, int, pow2, Rational};
use kostka_core::Instance;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

/// Fixed suite of integral instances with `n` in {3, 4}, `lambda_1 <= 8` and
/// `mu` strictly inside the permutohedron.
pub const INTERIOR_SUITE: &[(&[i64], &[i64])] = &[
    (&[2, 1, 0], &[1, 1, 1]),
    (&[3, 1, 0], &[2, 1, 1]),
    (&[3, 2, 0], &[2, 2, 1]),
    (&[4, 1, 0], &[2, 2, 1]),
    (&[4, 2, 0], &[2, 2, 2]),
    (&[4, 3, 0], &[3, 2, 2]),
    (&[5, 2, 0], &[3, 2, 2]),
    (&[5, 3, 1], &[3, 3, 3]),
    (&[6, 3, 0], &[3, 3, 3]),
    (&[6, 2, 1], &[4, 3, 2]),
    (&[7, 4, 1], &[4, 4, 4]),
    (&[8, 3, 0], &[4, 4, 3]),
    (&[8, 5, 2], &[6, 5, 4]),
    (&[8, 1, 0], &[4, 3, 2]),
    (&[7, 6, 2], &[5, 5, 5]),
    (&[3, 2, 1, 0], &[2, 2, 1, 1]),
    (&[3, 2, 1, 0], &[1, 2, 1, 2]),
    (&[4, 3, 2, 0], &[3, 3, 2, 1]),
    (&[4, 2, 1, 0], &[2, 2, 2, 1]),
    (&[4, 3, 1, 0], &[3, 2, 2, 1]),
    (&[5, 3, 1, 0], &[3, 2, 2, 2]),
    (&[6, 4, 2, 0], &[3, 3, 3, 3]),
    (&[8, 5, 2, 0], &[4, 4, 4, 3]),
    (&[8, 7, 1, 0], &[6, 5, 3, 2]),
    (&[5, 4, 2, 1], &[3, 3, 3, 3]),
    (&[6, 3, 2, 0], &[4, 3, 2, 2]),
    (&[7, 5, 3, 1], &[4, 4, 4, 4]),
    (&[8, 6, 3, 1], &[5, 5, 4, 4]),
];

/// `q` rounded down to a multiple of `2^-bits`.
fn floor_bits(q: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits;
    Rational::new((q * Rational::from_integer(scale.clone())).floor().to_integer(), scale)
}

/// Enclosure of `exp(x)` for `x >= 0` from the Taylor series of `exp(x / 2^s)`
/// with truncated terms and a geometric tail, squared back `s` times.
pub fn exp_enclosure(x: &Rational) -> (Rational, Rational) {
    assert!(!x.is_negative());
    let bits = 400u32;
    let mut s = 0u32;
    let mut y = x.clone();
    while y > frac(1, 2) {
        y /= int(2);
        s += 1;
    }
    // sum_{k<=K} y^k/k! with each term floored; error per term < 2^-bits.
    let mut term = Rational::one();
    let mut lo = Rational::one();
    let k = 240u32;
    for i in 1..=k {
        term = floor_bits(&(&term * &y / int(i as i64)), bits);
        lo += &term;
    }
    // Tail <= 2 y^(k+1)/(k+1)! <= 2^-k; truncation loss <= k 2^-bits.
    let slack = pow2(-(k as i64)) + Rational::from_integer(BigInt::from(k + 2)) * pow2(-(bits as i64));
    let mut hi = &lo + slack;
    for _ in 0..s {
        lo = floor_bits(&(&lo * &lo), bits);
        hi = -floor_bits(&-(&hi * &hi), bits);
    }
    (lo, hi)
}

/// Enclosure of `exp(-x)` for `x >= 0`.
pub fn exp_neg_enclosure(x: &Rational) -> (Rational, Rational) {
    let (lo, hi) = exp_enclosure(x);
    (hi.recip(), lo.recip())
}

/// Enclosure of `2 atanh(z) = log((1+z)/(1-z))` for `0 <= |z| <= 1/3`.
fn two_atanh(z: &Rational) -> (Rational, Rational) {
    let bits = 300u32;
    let z2 = z * z;
    let mut power = z.clone();
    let mut sum = Rational::zero();
    let mut k = 1i64;
    while power.abs() > pow2(-(bits as i64)) {
        sum += floor_bits(&(&power / int(k)), bits);
        power *= &z2;
        k += 2;
    }
    // Tail: |sum_{j>=k} z^j / j| <= |z|^k / (1 - z^2); truncation <= 300 * 2^-bits.
    let tail = power.abs() * int(9) / int(8) + int(300) * pow2(-(bits as i64));
    (int(2) * (&sum - &tail), int(2) * (&sum + &tail))
}

/// Enclosure of `log x` for `x > 0`.
pub fn log_enclosure(x: &Rational) -> (Rational, Rational) {
    assert!(x.is_positive());
    // x = 2^k m with m in [3/4, 3/2)
    let mut m = x.clone();
    let mut k = 0i64;
    while m >= frac(3, 2) {
        m /= int(2);
        k += 1;
    }
    while m < frac(3, 4) {
        m *= int(2);
        k -= 1;
    }
    let (l2lo, l2hi) = two_atanh(&frac(1, 3));
    let z = (&m - int(1)) / (&m + int(1));
    let (mlo, mhi) = two_atanh(&z);
    let (a, b) = if k >= 0 { (l2lo * int(k), l2hi * int(k)) } else { (l2hi * int(k), l2lo * int(k)) };
    (a + mlo, b + mhi)
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut total = Rational::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rational>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect()).collect();
        let c = &m[0][j] * cofactor_det(&minor);
        if j % 2 == 0 {
            total += c;
        } else {
            total -= c;
        }
    }
    total
}

/// `tau` by bisection on the dilation membership test: the largest `t` in
/// `[0, 1]` with `center + (mu - center) / (1 - t)` majorized by `lambda`.
pub fn tau_bisection(lambda: &Partition, mu: &Weight, steps: u32) -> Rational {
    let mean = lambda.mean();
    if mu.entries().iter().all(|m| *m == mean) {
        return Rational::one();
    }
    let feasible = |t: &Rational| {
        let f = (Rational::one() - t).recip();
        let pt: Vec<Rational> = mu.entries().iter().map(|m| &mean + (m - &mean) * &f).collect();
        majorizes(lambda, &Weight::new(pt)).unwrap()
    };
    let (mut lo, mut hi) = (Rational::zero(), Rational::one());
    if !feasible(&lo) {
        return Rational::zero();
    }
    for _ in 0..steps {
        let mid = (&lo + &hi) / int(2);
        if feasible(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Squared in-hyperplane distance from the centroid to the nearest facet of
/// the permutohedron, minimizing over all `2^n - 2` subset constraints
/// `sum_{i in S} x_i <= P_|S|(lambda)`.
pub fn r0_squared_by_subsets(lambda: &Partition) -> Rational {
    let n = lambda.n();
    let p = lambda.parts();
    let mean = lambda.mean();
    let nq = int(n as i64);
    let mut best: Option<Rational> = None;
    for mask in 1u32..(1 << n) - 1 {
        let k = mask.count_ones() as usize;
        let normal: Vec<Rational> =
            (0..n).map(|i| if mask & (1 << i) != 0 { Rational::one() } else { Rational::zero() }).collect();
        // Project the normal onto the sum-zero hyperplane.
        let shift = Rational::from_integer(BigInt::from(k)) / &nq;
        let proj: Vec<Rational> = normal.iter().map(|v| v - &shift).collect();
        let norm_sq = proj.iter().fold(Rational::zero(), |a, v| a + v * v);
        let rhs: Rational = p[..k].iter().fold(Rational::zero(), |a, v| a + v);
        let at_center = &mean * int(k as i64);
        let gap = rhs - at_center;
        let d2 = &gap * &gap / norm_sq;
        if best.as_ref().is_none_or(|b| &d2 < b) {
            best = Some(d2);
        }
    }
    best.expect("n >= 2")
}

pub fn random_partition(rng: &mut impl Rng, n: usize, max_gap: i64) -> Partition {
    let mut parts = vec![0i64; n];
    for i in (0..n - 1).rev() {
        parts[i] = parts[i + 1] + rng.gen_range(1..=max_gap);
    }
    Partition::from_ints(&parts).unwrap()
}

/// Random point of the permutohedron as a rational convex combination of
/// permutations of `lambda`, with integer weights in `1..=w`.
pub fn random_weight_inside(rng: &mut impl Rng, lambda: &Partition, terms: usize, w: i64) -> Weight {
    let n = lambda.n();
    let mut acc = vec![Rational::zero(); n];
    let mut total = 0i64;
    for _ in 0..terms {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            idx.swap(i, j);
        }
        let c = rng.gen_range(1..=w);
        total += c;
        for i in 0..n {
            acc[i] += &lambda.parts()[idx[i]] * int(c);
        }
    }
    Weight::new(acc.into_iter().map(|v| v / int(total)).collect())
}

pub fn suite_instance(i: usize) -> Instance {
    let (l, m) = INTERIOR_SUITE[i];
    Instance::from_ints(l, m).unwrap()
}

/// Whether `lo <= log(v) <= hi`, decided with the exp enclosure.
pub fn log_interval_contains(lo: &Rational, hi: &Rational, v: &Rational) -> bool {
    let exp_of = |x: &Rational| {
        if x.is_negative() {
            exp_neg_enclosure(&-x)
        } else {
            exp_enclosure(x)
        }
    };
    exp_of(lo).1 <= *v && *v <= exp_of(hi).0
}
