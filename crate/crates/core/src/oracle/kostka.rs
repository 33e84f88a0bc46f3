use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Number of integer Gelfand-Tsetlin patterns with top row `lambda` whose row
/// sums increase by `mu_1, ..., mu_n`. Zero when `mu` is not majorized.
///
/// Row-by-row DP from the top: the state is the current row, and each
/// transition enumerates the interlacing rows below it with the required sum.
pub fn kostka_count(lambda: &[i64], mu: &[i64]) -> BigUint {
    let n = lambda.len();
    if n != mu.len() || lambda.windows(2).any(|w| w[0] < w[1]) {
        return BigUint::zero();
    }
    if lambda.iter().sum::<i64>() != mu.iter().sum::<i64>() {
        return BigUint::zero();
    }
    let prefix: Vec<i64> = mu
        .iter()
        .scan(0i64, |s, &m| {
            *s += m;
            Some(*s)
        })
        .collect();
    let mut level: HashMap<Vec<i64>, BigUint> = HashMap::new();
    level.insert(lambda.to_vec(), BigUint::one());
    for k in (1..n).rev() {
        let target = prefix[k - 1];
        let mut next: HashMap<Vec<i64>, BigUint> = HashMap::new();
        for (row, count) in &level {
            let mut cur = Vec::with_capacity(k);
            for_each_interlacing(row, target, &mut cur, &mut |child| {
                *next.entry(child.to_vec()).or_insert_with(BigUint::zero) += count;
            });
        }
        if next.is_empty() {
            return BigUint::zero();
        }
        level = next;
    }
    level.into_values().fold(BigUint::zero(), |a, c| a + c)
}

/// Calls `f` on every row `r` of length `upper.len() - 1` with
/// `upper[j] >= r[j] >= upper[j+1]` and `sum r = target`.
fn for_each_interlacing(upper: &[i64], target: i64, cur: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
    let k = upper.len() - 1;
    let j = cur.len();
    let used: i64 = cur.iter().sum();
    if j == k {
        if used == target {
            f(cur);
        }
        return;
    }
    // Remaining entries j+1..k lie in [upper[i+1], upper[i]].
    let rest_min: i64 = (j + 1..k).map(|i| upper[i + 1]).sum();
    let rest_max: i64 = (j + 1..k).map(|i| upper[i]).sum();
    let lo = upper[j + 1].max(target - used - rest_max);
    let hi = upper[j].min(target - used - rest_min);
    for v in lo..=hi {
        cur.push(v);
        for_each_interlacing(upper, target, cur, f);
        cur.pop();
    }
}

/// All integer Gelfand-Tsetlin patterns with top row `lambda`, rows listed from
/// the top. Exhaustive and unpruned; intended for cross-checking at tiny sizes.
pub fn enumerate_patterns(lambda: &[i64]) -> Vec<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    let mut rows = vec![lambda.to_vec()];
    extend(&mut rows, &mut out);
    out
}

fn extend(rows: &mut Vec<Vec<i64>>, out: &mut Vec<Vec<Vec<i64>>>) {
    let last = rows.last().expect("non-empty").clone();
    if last.len() == 1 {
        out.push(rows.clone());
        return;
    }
    let k = last.len() - 1;
    // Odometer over the box prod_j [last[j+1], last[j]].
    let mut row: Vec<i64> = (0..k).map(|j| last[j + 1]).collect();
    loop {
        rows.push(row.clone());
        extend(rows, out);
        rows.pop();
        let mut j = 0;
        loop {
            if j == k {
                return;
            }
            if row[j] < last[j] {
                row[j] += 1;
                break;
            }
            row[j] = last[j + 1];
            j += 1;
        }
    }
}
