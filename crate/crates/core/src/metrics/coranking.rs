//! Co-ranking matrix and the mean relative rank errors derived from it.

use crate::error::{Error, Result};
use crate::neighborhoods::RankTable;

/// Joint histogram of (high-dimensional rank, low-dimensional rank) over all
/// ordered pairs `i != j`. Entry `(k, l)` is stored at `(k - 1, l - 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorankingMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl CorankingMatrix {
    /// Number of points the matrix was built from.
    pub fn points(&self) -> usize {
        self.n
    }

    /// Side length, `n - 1`.
    pub fn size(&self) -> usize {
        self.n - 1
    }

    /// `q_kl` for 1-based ranks.
    pub fn count(&self, k: usize, l: usize) -> u64 {
        self.counts[(k - 1) * self.size() + (l - 1)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (1..=self.size()).map(|r| self.count(r, r)).sum()
    }
}

pub fn coranking(high: &RankTable, low: &RankTable) -> Result<CorankingMatrix> {
    let n = high.len();
    if low.len() != n {
        return Err(Error::Input(format!(
            "rank tables cover {n} and {} points",
            low.len()
        )));
    }
    if n < 2 {
        return Err(Error::Input("co-ranking needs at least two points".into()));
    }
    let m = n - 1;
    let mut counts = vec![0u64; m * m];
    for i in 0..n {
        for (j, (&rk, &rl)) in high.row(i).iter().zip(low.row(i)).enumerate() {
            if j == i {
                continue;
            }
            counts[(rk as usize - 1) * m + (rl as usize - 1)] += 1;
        }
    }
    Ok(CorankingMatrix { n, counts })
}

/// Normalizer `H_K = n * sum_{k=1..K} |n - 2k + 1| / k`.
pub fn mrre_normalizer(n: usize, big_k: usize) -> f64 {
    let nf = n as f64;
    nf * (1..=big_k)
        .map(|k| (nf - 2.0 * k as f64 + 1.0).abs() / k as f64)
        .sum::<f64>()
}

/// Mean relative rank errors `(W_n, W_v)` at neighborhood size `K`.
///
/// `W_n` sums `|k - l| / l * q_kl` over pairs that are neighbors in the embedding
/// (`l <= K`, intrusion side); `W_v` sums `|k - l| / k * q_kl` over pairs that are
/// neighbors in the original space (`k <= K`, extrusion side). Both are divided by `H_K`.
pub fn mrre(q: &CorankingMatrix, big_k: usize) -> Result<(f64, f64)> {
    let m = q.size();
    if big_k == 0 || big_k > m {
        return Err(Error::Parameter(format!(
            "MRRE neighborhood size must be in [1, {m}], got {big_k}"
        )));
    }
    let mut w_n = 0.0;
    let mut w_v = 0.0;
    for k in 1..=m {
        for l in 1..=m {
            let c = q.count(k, l);
            if c == 0 || k == l {
                continue;
            }
            let diff = k.abs_diff(l) as f64 * c as f64;
            if l <= big_k {
                w_n += diff / l as f64;
            }
            if k <= big_k {
                w_v += diff / k as f64;
            }
        }
    }
    let h = mrre_normalizer(q.points(), big_k);
    Ok((w_n / h, w_v / h))
}
