use num_bigint::BigInt;
use num_traits::One;

use super::kostka::kostka_count;
use super::polytope::exact_volume_with_cap;
use crate::certarith::{CertifiedValue, Interval};
use crate::domain::{build_ptilde, majorizes, Instance, Partition, Weight};
use crate::error::{Error, Result};
use crate::rational::{factorial_int, Rational};

/// Exact projected volume and the Hausdorff volume `V = sqrt((n-1)!) * Vtilde`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KostkaVolume {
    pub vtilde: Rational,
    /// `V^2 = (n-1)! Vtilde^2`, exact.
    pub v_squared: Rational,
    pub v: CertifiedValue,
}

impl KostkaVolume {
    fn from_vtilde(vtilde: Rational, n: usize) -> Self {
        let fact = Rational::from_integer(factorial_int(n as u32 - 1));
        let v_squared = &fact * &vtilde * &vtilde;
        let v = Interval::from_rational(&v_squared, 160).sqrt().expect("non-negative");
        KostkaVolume { vtilde, v_squared, v: CertifiedValue::from_interval(&v) }
    }
}

/// Volume of the Kostka polytope of the original (un-normalized) pair.
pub fn exact_kostka_volume(instance: &Instance, dim_cap: usize) -> Result<KostkaVolume> {
    let vtilde = exact_volume_with_cap(&instance.ptilde(), dim_cap)?;
    Ok(KostkaVolume::from_vtilde(vtilde, instance.n()))
}

/// `K(N lambda, N mu) / N^d` with `d = (n-1)(n-2)/2`.
pub fn scaling_limit(lambda: &[i64], mu: &[i64], big_n: u32) -> Result<Rational> {
    if big_n == 0 {
        return Err(Error::Input("scaling factor must be positive".into()));
    }
    let n = lambda.len();
    if n < 2 {
        return Err(Error::Input("need n >= 2".into()));
    }
    let k = big_n as i64;
    let l: Vec<i64> = lambda.iter().map(|v| v * k).collect();
    let m: Vec<i64> = mu.iter().map(|v| v * k).collect();
    let count = BigInt::from(kostka_count(&l, &m));
    let d = (n - 1) * (n - 2) / 2;
    Ok(Rational::new(count, num_traits::pow(BigInt::from(big_n), d)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogConcavityReport {
    /// `(mu(t), Vtilde(mu(t)))` for `t = 0, 1/steps, ..., 1`.
    pub points: Vec<(Vec<Rational>, Rational)>,
    /// Indices `i` where `Vtilde_i^2 < Vtilde_(i-1) Vtilde_(i+1)`.
    pub violations: Vec<usize>,
}

impl LogConcavityReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks discrete log-concavity of the volume along the segment `[mu_a, mu_b]`
/// with exact rationals. Both endpoints must lie in the permutohedron.
pub fn logconcavity_probe(
    lambda: &Partition,
    mu_a: &Weight,
    mu_b: &Weight,
    steps: usize,
    dim_cap: usize,
) -> Result<LogConcavityReport> {
    if steps < 2 {
        return Err(Error::Input("need at least two steps".into()));
    }
    for mu in [mu_a, mu_b] {
        if !majorizes(lambda, mu)? {
            return Err(Error::Precondition("segment endpoint outside the permutohedron".into()));
        }
    }
    let mut points = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = Rational::new(BigInt::from(i), BigInt::from(steps));
        let s = Rational::one() - &t;
        let mu: Vec<Rational> =
            mu_a.entries().iter().zip(mu_b.entries()).map(|(a, b)| &s * a + &t * b).collect();
        let poly = build_ptilde(lambda, &Weight::new(mu.clone()))?;
        let v = exact_volume_with_cap(&poly, dim_cap)?;
        points.push((mu, v));
    }
    let violations = (1..steps)
        .filter(|&i| {
            let v = &points[i].1;
            v * v < &points[i - 1].1 * &points[i + 1].1
        })
        .collect();
    Ok(LogConcavityReport { points, violations })
}
