//! Reproducible summation.
//!
//! Every reduction in the crate goes through a fixed binary tree: a slice of
//! length `n > LEAF` is split at `n / 2` and the halves are summed
//! recursively, leaves are summed left to right. The tree depends only on the
//! slice length, so the serial and the rayon-parallel evaluation produce the
//! same bits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Leaf width of the reduction tree.
pub const LEAF: usize = 128;

/// Slices shorter than this are never split across threads.
const PAR_MIN: usize = 1 << 15;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumMethod {
    /// Plain pairwise summation.
    #[default]
    Pairwise,
    /// Pairwise tree with Neumaier-compensated leaves.
    Compensated,
}

pub trait Summand: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn leaf(values: &[Self], method: SumMethod) -> Self;
}

fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl Summand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn leaf(values: &[Self], method: SumMethod) -> Self {
        match method {
            SumMethod::Pairwise => values.iter().fold(0.0, |acc, v| acc + v),
            SumMethod::Compensated => neumaier(values.iter().copied()),
        }
    }
}

impl Summand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn leaf(values: &[Self], method: SumMethod) -> Self {
        match method {
            SumMethod::Pairwise => values
                .iter()
                .fold(Complex64::new(0.0, 0.0), |acc, v| acc + v),
            SumMethod::Compensated => Complex64::new(
                neumaier(values.iter().map(|v| v.re)),
                neumaier(values.iter().map(|v| v.im)),
            ),
        }
    }
}

/// Serial tree sum.
pub fn tree_sum<T: Summand>(values: &[T], method: SumMethod) -> T {
    if values.len() <= LEAF {
        return T::leaf(values, method);
    }
    let mid = values.len() / 2;
    tree_sum(&values[..mid], method).add(tree_sum(&values[mid..], method))
}

/// Same tree as [`tree_sum`], with large subtrees evaluated on the rayon pool.
pub fn par_tree_sum<T: Summand>(values: &[T], method: SumMethod) -> T {
    if values.len() < PAR_MIN {
        return tree_sum(values, method);
    }
    let mid = values.len() / 2;
    let (a, b) = rayon::join(
        || par_tree_sum(&values[..mid], method),
        || par_tree_sum(&values[mid..], method),
    );
    a.add(b)
}

/// Tree sums of the prefixes `values[..c]` for each checkpoint `c`.
pub fn prefix_sums<T: Summand>(values: &[T], checkpoints: &[usize], method: SumMethod) -> Vec<T> {
    checkpoints
        .iter()
        .map(|&c| par_tree_sum(&values[..c.min(values.len())], method))
        .collect()
}

/// Index of `n` in the two-sided ordering `0, 1, -1, 2, -2, ...`.
///
/// The first `2N + 1` entries of this ordering are exactly `-N..=N`, so a
/// single array serves every symmetric checkpoint.
pub fn two_sided_index(n: i64) -> usize {
    if n > 0 {
        (2 * n - 1) as usize
    } else {
        (-2 * n) as usize
    }
}

/// Inverse of [`two_sided_index`].
pub fn two_sided_value(i: usize) -> i64 {
    let i = i as i64;
    if i % 2 == 1 {
        (i + 1) / 2
    } else {
        -i / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let values: Vec<f64> = (0..200_000).map(|i| ((i as f64) * 0.7311).sin() / 3.0).collect();
        for method in [SumMethod::Pairwise, SumMethod::Compensated] {
            let s = tree_sum(&values, method);
            let p = par_tree_sum(&values, method);
            assert_eq!(s.to_bits(), p.to_bits());
        }
    }

    #[test]
    fn small_sums() {
        assert_eq!(tree_sum::<f64>(&[], SumMethod::Pairwise), 0.0);
        assert_eq!(tree_sum(&[1.0, 2.0, 3.0], SumMethod::Pairwise), 6.0);
        let v = vec![1.0; 1000];
        assert_eq!(tree_sum(&v, SumMethod::Pairwise), 1000.0);
    }

    #[test]
    fn compensated_recovers_cancellation() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(tree_sum(&v, SumMethod::Compensated), 1.0);
    }

    #[test]
    fn two_sided_ordering_round_trips() {
        for n in -50..=50 {
            assert_eq!(two_sided_value(two_sided_index(n)), n);
        }
        let first: Vec<i64> = (0..5).map(two_sided_value).collect();
        assert_eq!(first, vec![0, 1, -1, 2, -2]);
    }
}
