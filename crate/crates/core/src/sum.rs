//! Order-fixed pairwise summation.

const BLOCK: usize = 32;

/// Sums `term(j)` for `j` in `0..n` in a fixed pairwise tree, so the result
/// does not depend on how callers schedule the per-term work.
pub(crate) fn pairwise<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64,
{
    pairwise_range(0, n, &term)
}

fn pairwise_range<F>(lo: usize, hi: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64,
{
    if hi - lo <= BLOCK {
        let mut acc = 0.0;
        for j in lo..hi {
            acc += term(j);
        }
        acc
    } else {
        let mid = lo + (hi - lo) / 2;
        pairwise_range(lo, mid, term) + pairwise_range(mid, hi, term)
    }
}
