use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{CertifiedValue, RationalMatrix};
use crate::error::{Error, Result};
use crate::rational::{factorial_int, floor_log2, frac, int, round_to_bits};

/// Smallest `k >= 0` with `2^k >= q`, for `q > 0`.
fn ceil_log2(q: &BigRational) -> u64 {
    if q <= &BigRational::one() {
        return 0;
    }
    let f = floor_log2(q);
    let exact = crate::rational::pow2(f) == *q;
    (if exact { f } else { f + 1 }) as u64
}

fn check_delta(delta: &BigRational) -> Result<()> {
    if !delta.is_positive() || delta >= &BigRational::one() {
        return Err(Error::Input(format!("tolerance {delta} must lie in (0, 1)")));
    }
    Ok(())
}

/// Approximates `exp(-x)` for `x >= 0` by `t = 1 / S_l(x)`, where `S_l` is the
/// degree-`l` Taylor polynomial of `exp` and `l >= 2 ceil(log2(1/delta) + x)`.
///
/// Guarantees `|exp(-x) - t| <= delta exp(-x)` and `|exp(x) - 1/t| <= delta exp(x)`.
pub fn exp_neg_approx(x: &BigRational, delta: &BigRational) -> Result<BigRational> {
    if x.is_negative() {
        return Err(Error::Input("negative argument; use the reciprocal form".into()));
    }
    check_delta(delta)?;
    if x.is_zero() {
        return Ok(BigRational::one());
    }
    let c = ceil_log2(&delta.recip()) + x.ceil().to_integer().to_u64().ok_or_else(|| {
        Error::Resource(format!("exponent argument {x} too large for a series evaluation"))
    })?;
    let l = (2 * c).max(2);
    let p = x.numer();
    let q = x.denom();
    // a_i = p^i q^(l-i) l!/i!, so S_l(x) = (sum a_i) / (q^l l!); every division below is exact.
    let denom = num_traits::pow(q.clone(), l as usize) * factorial_int(l as u32);
    let mut a = denom.clone();
    let mut numer = a.clone();
    for i in 0..l {
        a = a * p / (q * BigInt::from(i + 1));
        numer += &a;
    }
    Ok(BigRational::new(denom, numer))
}

/// Approximates `exp(u)` for any sign of `u` with relative error at most `delta`.
pub fn exp_pos_approx(u: &BigRational, delta: &BigRational) -> Result<BigRational> {
    if u.is_negative() {
        exp_neg_approx(&-u, delta)
    } else {
        Ok(exp_neg_approx(u, delta)?.recip())
    }
}

/// Exact determinant by fraction-free (Bareiss) elimination after clearing
/// each row's denominators.
pub fn det_exact(m: &RationalMatrix) -> BigRational {
    let n = m.n();
    if n == 0 {
        return BigRational::one();
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let row = m.row(i);
            let l = row.iter().fold(BigInt::one(), |acc, e| acc.lcm(e.denom()));
            scale *= &l;
            row.iter().map(|e| e.numer() * (&l / e.denom())).collect()
        })
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigRational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    BigRational::new(sign * &a[n - 1][n - 1], scale)
}

/// The relative determinant error bound `n! 2n tau^n delta' / v` for entries
/// perturbed by relative error at most `delta'`, entries bounded by `tau`, and
/// `|det| >= v`.
pub fn det_error_bound(n: usize, entry_rel_err: &BigRational, tau: &BigRational, v: &BigRational) -> BigRational {
    let nf = BigRational::from_integer(factorial_int(n as u32));
    nf * int(2 * n as i64) * num_traits::pow(tau.clone(), n) * entry_rel_err / v
}

/// Determinant of an entrywise-approximated matrix with a certified relative
/// error. The returned radius is `eta / (1 - eta)` relative to the computed
/// value, where `eta` is [`det_error_bound`]; this converts the bound relative
/// to the unknown true determinant into one relative to the reported value.
pub fn det_certified(
    m_approx: &RationalMatrix,
    entry_rel_err: &BigRational,
    tau: &BigRational,
    v: &BigRational,
) -> Result<CertifiedValue> {
    let n = m_approx.n();
    if entry_rel_err.is_negative() || *entry_rel_err >= frac(1, 2 * n.max(1) as i64) {
        return Err(Error::Precondition(format!("entry error {entry_rel_err} must be below 1/(2n)")));
    }
    if !v.is_positive() {
        return Err(Error::Precondition("determinant floor must be positive".into()));
    }
    let eta = det_error_bound(n, entry_rel_err, tau, v);
    if eta >= BigRational::one() {
        return Err(Error::Precondition(format!("determinant error bound {eta} is not below 1")));
    }
    let value = det_exact(m_approx);
    let rel = &eta / (BigRational::one() - &eta);
    if value.is_positive() {
        CertifiedValue::multiplicative(value, rel)
    } else {
        let err = value.abs() * rel;
        CertifiedValue::additive(value, err)
    }
}

fn log_three_halves(tol: &BigRational) -> BigRational {
    // -log(1 - 1/3) = sum_{i>=1} 3^-i / i; the tail after m terms is below 3^-(m+1) * 3/2.
    let third = frac(1, 3);
    let mut sum = BigRational::zero();
    let mut pw = BigRational::one();
    let mut i = 0i64;
    loop {
        i += 1;
        pw *= &third;
        sum += &pw / int(i);
        let tail = &pw * &third * frac(3, 2);
        if &tail <= tol {
            return sum;
        }
    }
}

/// Approximates `log x` with absolute error at most `delta`.
///
/// Writes `x = y (3/2)^k` with `y` in `[2/3, 1]` and sums the series of
/// `log(1 - z)` for `z = 1 - y <= 1/3`.
pub fn log_approx(x: &BigRational, delta: &BigRational) -> Result<BigRational> {
    if !x.is_positive() {
        return Err(Error::Input(format!("logarithm of non-positive {x}")));
    }
    check_delta(delta)?;
    if x.is_one() {
        return Ok(BigRational::zero());
    }
    if x < &BigRational::one() {
        return Ok(-log_approx(&x.recip(), delta)?);
    }
    let three_halves = frac(3, 2);
    let two_thirds = frac(2, 3);
    // log2(1.5) > 0.584, so k <= floor_log2(x) / 0.584 + 2.
    let mut k = ((floor_log2(x).max(0) as f64) / 0.585).floor() as i64;
    let mut y = x * num_traits::pow(two_thirds.clone(), k as usize);
    while y > BigRational::one() {
        y *= &two_thirds;
        k += 1;
    }
    while y < two_thirds {
        y *= &three_halves;
        k -= 1;
    }
    debug_assert!(k >= 0);

    let quarter = delta / int(4);
    let l15 = log_three_halves(&(&quarter / int(k + 1)));

    // Round z down to b bits; log(1 - .) is 2-Lipschitz on [0, 1/3 + 2^-b].
    let b = ceil_log2(&(int(16) / delta)) + 2;
    let z = round_to_bits(&(BigRational::one() - &y), b, false);
    let eighth = delta / int(8);
    let mut series = BigRational::zero();
    let mut pw = BigRational::one();
    let mut i = 0i64;
    let third = frac(1, 3);
    loop {
        i += 1;
        pw *= &z;
        if pw.is_zero() {
            break;
        }
        series += &pw / int(i);
        let tail = num_traits::pow(third.clone(), (i + 1) as usize) * frac(3, 2);
        if tail <= eighth {
            break;
        }
    }
    let t = int(k) * l15 - series;
    let b2 = ceil_log2(&(int(4) / delta));
    Ok(round_to_bits(&t, b2, false))
}

/// Upper bound on `|log(1 - exp(-z))|`: `max(1, log(2/z))` with the logarithm
/// rounded up.
pub fn log1m_exp_bound(z: &BigRational) -> Result<BigRational> {
    if !z.is_positive() {
        return Err(Error::Input(format!("log1m_exp_bound needs z > 0, got {z}")));
    }
    if z >= &int(2) {
        return Ok(BigRational::one());
    }
    let tol = frac(1, 64);
    let up = log_approx(&(int(2) / z), &tol)? + tol;
    Ok(up.max(BigRational::one()))
}
