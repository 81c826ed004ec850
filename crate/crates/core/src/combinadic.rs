//! Lexicographic combinadic ranking of sorted index subsets.

use crate::error::{Error, Result};

/// `C(n, k)`, or `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn count(n: usize, k: usize) -> u128 {
    binomial(n, k).expect("binomial overflow")
}

/// The `z`-th sorted `k`-subset of `[0, n)` in lexicographic order.
pub fn subset_unrank(z: u64, n: usize, k: usize) -> Result<Vec<usize>> {
    let total = binomial(n, k).ok_or(Error::RankOutOfRange { rank: z, n, k })?;
    if (z as u128) >= total {
        return Err(Error::RankOutOfRange { rank: z, n, k });
    }
    let mut rest = z as u128;
    let mut out = Vec::with_capacity(k);
    let mut c = 0usize;
    for i in 0..k {
        loop {
            let below = count(n - c - 1, k - i - 1);
            if rest < below {
                out.push(c);
                c += 1;
                break;
            }
            rest -= below;
            c += 1;
        }
    }
    Ok(out)
}

/// Inverse of [`subset_unrank`]. `subset` must be strictly increasing and inside `[0, n)`.
pub fn subset_rank(subset: &[usize], n: usize) -> Result<u64> {
    let k = subset.len();
    let bad = || Error::InvalidConfig(format!("{subset:?} is not a sorted subset of [0, {n})"));
    if subset.windows(2).any(|w| w[0] >= w[1]) || subset.last().is_some_and(|&x| x >= n) {
        return Err(bad());
    }
    let mut rank: u128 = 0;
    let mut start = 0usize;
    for (i, &c) in subset.iter().enumerate() {
        for j in start..c {
            rank += count(n - j - 1, k - i - 1);
        }
        start = c + 1;
    }
    u64::try_from(rank).map_err(|_| bad())
}
