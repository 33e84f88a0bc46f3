//! Partitions, weights, majorization, the Gelfand-Tsetlin H-representation,
//! and the shift/rescale normalization applied once per instance.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, sum, Rational};

/// Non-increasing tuple of at least two rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<Rational>,
}

impl Partition {
    pub fn new(parts: Vec<Rational>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::Input(format!("a partition needs at least 2 parts, got {}", parts.len())));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Input("partition parts must be non-increasing".into()));
        }
        Ok(Partition { parts })
    }

    pub fn from_ints(parts: &[i64]) -> Result<Self> {
        Partition::new(parts.iter().map(|&p| int(p)).collect())
    }

    pub fn n(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Rational] {
        &self.parts
    }

    pub fn total(&self) -> Rational {
        sum(&self.parts)
    }

    pub fn mean(&self) -> Rational {
        self.total() / int(self.n() as i64)
    }

    /// Smallest gap between consecutive parts.
    pub fn gap(&self) -> Rational {
        self.parts.windows(2).map(|w| &w[0] - &w[1]).min().expect("n >= 2")
    }

    /// Sum of the `k` largest parts.
    pub fn prefix(&self, k: usize) -> Rational {
        sum(&self.parts[..k])
    }

    pub fn largest(&self) -> &Rational {
        &self.parts[0]
    }

    pub fn smallest(&self) -> &Rational {
        &self.parts[self.n() - 1]
    }

    /// `beta * lambda + alpha * 1`, for `beta > 0`.
    pub fn affine(&self, beta: &Rational, alpha: &Rational) -> Partition {
        assert!(beta.is_positive());
        Partition { parts: self.parts.iter().map(|p| p * beta + alpha).collect() }
    }

    /// Squared Euclidean norm.
    pub fn norm_sq(&self) -> Rational {
        crate::rational::norm_sq(&self.parts)
    }

    /// Squared diameter of the permutohedron, `|lambda - reverse(lambda)|^2`.
    pub fn diameter_sq(&self) -> Rational {
        let n = self.n();
        (0..n).map(|i| {
            let d = &self.parts[i] - &self.parts[n - 1 - i];
            &d * &d
        }).fold(Rational::zero(), |a, b| a + b)
    }

    /// `true` when consecutive gaps are at least 1 and the last part is at least 1.
    pub fn is_normalized(&self) -> bool {
        self.smallest() >= &Rational::one() && self.gap() >= Rational::one()
    }
}

/// Target diagonal `mu`; its order is preserved.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Weight {
    entries: Vec<Rational>,
}

impl Weight {
    pub fn new(entries: Vec<Rational>) -> Self {
        Weight { entries }
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        Weight::new(entries.iter().map(|&p| int(p)).collect())
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn total(&self) -> Rational {
        sum(&self.entries)
    }

    pub fn sorted_desc(&self) -> Vec<Rational> {
        let mut v = self.entries.clone();
        v.sort_by(|a, b| b.cmp(a));
        v
    }

    pub fn affine(&self, beta: &Rational, alpha: &Rational) -> Weight {
        Weight { entries: self.entries.iter().map(|p| p * beta + alpha).collect() }
    }

    /// The constant weight `lambda_mean * 1`.
    pub fn center_of(lambda: &Partition) -> Weight {
        Weight { entries: vec![lambda.mean(); lambda.n()] }
    }
}

/// Slacks `s_k = P_k(lambda) - P_k(sorted mu)` for `k = 1..n-1`.
pub fn prefix_slacks(lambda: &Partition, mu: &Weight) -> Vec<Rational> {
    let sorted = mu.sorted_desc();
    let mut acc_l = Rational::zero();
    let mut acc_m = Rational::zero();
    (0..lambda.n() - 1)
        .map(|k| {
            acc_l += &lambda.parts()[k];
            acc_m += &sorted[k];
            &acc_l - &acc_m
        })
        .collect()
}

/// Whether `lambda` majorizes `mu`: sorted prefix sums of `mu` never exceed
/// those of `lambda`, and the totals agree.
pub fn majorizes(lambda: &Partition, mu: &Weight) -> Result<bool> {
    if lambda.n() != mu.n() {
        return Err(Error::Input(format!("length mismatch: lambda has {}, mu has {}", lambda.n(), mu.n())));
    }
    if lambda.total() != mu.total() {
        return Ok(false);
    }
    Ok(prefix_slacks(lambda, mu).iter().all(|s| !s.is_negative()))
}

/// A validated pair, stored both as given and after normalization.
///
/// `lambda`/`mu` are normalized: `lambda = beta * original + alpha`, with
/// consecutive gaps and the last part at least 1. Volumes transform as
/// `V(original) = beta^(-d) V(normalized)` with `d = (n-1)(n-2)/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub lambda: Partition,
    pub mu: Weight,
    pub shift_applied: Rational,
    pub scale_applied: Rational,
    pub original_lambda: Partition,
    pub original_mu: Weight,
}

impl Instance {
    pub fn new(lambda: Partition, mu: Weight) -> Result<Self> {
        normalize(&lambda, &mu)
    }

    pub fn from_ints(lambda: &[i64], mu: &[i64]) -> Result<Self> {
        Instance::new(Partition::from_ints(lambda)?, Weight::from_ints(mu))
    }

    pub fn n(&self) -> usize {
        self.lambda.n()
    }

    /// Dimension `(n-1)(n-2)/2` of the projected polytope.
    pub fn dim(&self) -> usize {
        let n = self.n();
        (n - 1) * (n - 2) / 2
    }

    /// `true` when every majorization constraint is slack.
    pub fn is_interior(&self) -> bool {
        prefix_slacks(&self.lambda, &self.mu).iter().all(|s| s.is_positive())
    }

    /// Multiplier `beta^(-d)` taking normalized volumes back to the original pair.
    pub fn volume_factor(&self) -> Rational {
        num_traits::pow(self.scale_applied.recip(), self.dim())
    }

    /// H-representation of the projected polytope for the original pair.
    pub fn ptilde(&self) -> HalfspacePolytope {
        build_ptilde(&self.original_lambda, &self.original_mu).expect("validated at construction")
    }

    /// H-representation of the projected polytope for the normalized pair.
    pub fn ptilde_normalized(&self) -> HalfspacePolytope {
        build_ptilde(&self.lambda, &self.mu).expect("validated at construction")
    }
}

/// Validates `(lambda, mu)` and maps it to `(beta lambda + alpha, beta mu + alpha)`
/// with `beta = ceil(1 / lambda_gap)` and `alpha = 1 - beta lambda_n`.
pub fn normalize(lambda: &Partition, mu: &Weight) -> Result<Instance> {
    if lambda.n() != mu.n() {
        return Err(Error::Input(format!("length mismatch: lambda has {}, mu has {}", lambda.n(), mu.n())));
    }
    if lambda.total() != mu.total() {
        return Err(Error::Input(format!("|lambda| = {} differs from |mu| = {}", lambda.total(), mu.total())));
    }
    if !majorizes(lambda, mu)? {
        return Err(Error::Input("lambda does not majorize mu".into()));
    }
    let gap = lambda.gap();
    if gap.is_zero() {
        return Err(Error::Degenerate("lambda has a repeated part; the polytope has zero volume".into()));
    }
    let beta = Rational::from_integer(gap.recip().ceil().to_integer().max(BigInt::one()));
    let alpha = Rational::one() - &beta * lambda.smallest();
    Ok(Instance {
        lambda: lambda.affine(&beta, &alpha),
        mu: mu.affine(&beta, &alpha),
        shift_applied: alpha,
        scale_applied: beta,
        original_lambda: lambda.clone(),
        original_mu: mu.clone(),
    })
}

/// `q(x) = (x_1 - x_n, ..., x_{n-1} - x_n)`.
pub fn project_q(x: &[Rational]) -> Vec<Rational> {
    let last = x.last().expect("non-empty vector");
    x[..x.len() - 1].iter().map(|v| v - last).collect()
}

/// Which family of interlacing inequalities a row comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSource {
    /// Bounds on the diagonal entry of row `n-1`, written through its row sum.
    DiagonalSum,
    /// Row `n-1` off-diagonal entries squeezed between consecutive parts of `lambda`.
    LastRow,
    /// Interlacing between two rows of free variables.
    Interlace,
    /// Diagonal of row `i` dominating the diagonal of row `i+1`.
    DiagonalLower,
    /// Diagonal of row `i` dominated by entry `(i+1, i)`.
    DiagonalUpper,
}

/// One inequality `coeffs . x <= rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfspaceRow {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
    pub source: RowSource,
    /// Pattern position `(i, j)` (1-based) of the entry constrained by this row.
    pub entry: (usize, usize),
}

/// `{x : A x <= b}` with exact rational data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfspacePolytope {
    pub dim: usize,
    pub rows: Vec<HalfspaceRow>,
}

impl HalfspacePolytope {
    pub fn new(dim: usize, rows: Vec<(Vec<Rational>, Rational)>) -> Result<Self> {
        if rows.iter().any(|(c, _)| c.len() != dim) {
            return Err(Error::Input("row length differs from the polytope dimension".into()));
        }
        Ok(HalfspacePolytope {
            dim,
            rows: rows
                .into_iter()
                .map(|(coeffs, rhs)| HalfspaceRow { coeffs, rhs, source: RowSource::Interlace, entry: (0, 0) })
                .collect(),
        })
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.rows.iter().all(|r| crate::rational::dot(&r.coeffs, x) <= r.rhs)
    }

    /// Unit cube `[0, 1]^dim`.
    pub fn cube(dim: usize) -> Self {
        let mut rows = Vec::new();
        for k in 0..dim {
            let mut up = vec![Rational::zero(); dim];
            up[k] = Rational::one();
            let mut lo = vec![Rational::zero(); dim];
            lo[k] = -Rational::one();
            rows.push((up, Rational::one()));
            rows.push((lo, Rational::zero()));
        }
        HalfspacePolytope::new(dim, rows).expect("consistent lengths")
    }
}

/// Affine form `coeffs . x + constant` in the free pattern variables.
#[derive(Clone)]
struct Affine {
    coeffs: Vec<Rational>,
    constant: Rational,
}

/// Index of free variable `x_{ij}`, `2 <= i <= n-1`, `1 <= j <= i-1` (1-based).
fn var_index(i: usize, j: usize) -> usize {
    (i - 1) * (i - 2) / 2 + (j - 1)
}

/// H-representation of the projection of `GT(lambda, mu)` onto its free
/// off-diagonal coordinates. Diagonal entries are eliminated through the row
/// sums `sum_j x_{ij} = mu_1 + ... + mu_i`; the top row is `lambda`.
pub fn build_ptilde(lambda: &Partition, mu: &Weight) -> Result<HalfspacePolytope> {
    let n = lambda.n();
    if mu.n() != n {
        return Err(Error::Input(format!("length mismatch: lambda has {n}, mu has {}", mu.n())));
    }
    let dim = (n - 1) * (n - 2) / 2;
    let zero = || vec![Rational::zero(); dim];
    let mut prefix = vec![Rational::zero(); n + 1];
    for i in 0..n {
        prefix[i + 1] = &prefix[i] + &mu.entries()[i];
    }
    let entry = |i: usize, j: usize| -> Affine {
        if i == n {
            return Affine { coeffs: zero(), constant: lambda.parts()[j - 1].clone() };
        }
        if j < i {
            let mut c = zero();
            c[var_index(i, j)] = Rational::one();
            return Affine { coeffs: c, constant: Rational::zero() };
        }
        let mut c = zero();
        for jj in 1..i {
            c[var_index(i, jj)] = -Rational::one();
        }
        Affine { coeffs: c, constant: prefix[i].clone() }
    };
    // a <= b  as  (a - b) . x <= b_const - a_const
    let row = |a: &Affine, b: &Affine, source: RowSource, at: (usize, usize)| HalfspaceRow {
        coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
        rhs: &b.constant - &a.constant,
        source,
        entry: at,
    };
    let mut rows = Vec::with_capacity(n * (n - 1));
    for i in 1..n {
        for j in 1..=i {
            let (upper_src, lower_src) = if i == n - 1 {
                if j < i {
                    (RowSource::LastRow, RowSource::LastRow)
                } else {
                    (RowSource::DiagonalSum, RowSource::DiagonalSum)
                }
            } else if j < i {
                (RowSource::Interlace, RowSource::Interlace)
            } else {
                (RowSource::DiagonalUpper, RowSource::DiagonalLower)
            };
            let here = entry(i, j);
            rows.push(row(&here, &entry(i + 1, j), upper_src, (i, j)));
            rows.push(row(&entry(i + 1, j + 1), &here, lower_src, (i, j)));
        }
    }
    Ok(HalfspacePolytope { dim, rows })
}

/// Convenience: rationals from a slice of `(numerator, denominator)` pairs.
pub fn rationals(pairs: &[(i64, i64)]) -> Vec<Rational> {
    pairs.iter().map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q))).collect()
}
