//! Independent reference implementations used as test oracles.
#![allow(dead_code, clippy::needless_range_loop)]

use erpm::DataMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform points in `[-1, 1]^d`.
pub fn uniform_points(n: usize, d: usize, seed: u64) -> DataMatrix {
    let mut r = rng(seed);
    let data = (0..n * d).map(|_| r.random_range(-1.0..1.0)).collect();
    DataMatrix::from_row_major(n, d, data).unwrap()
}

pub fn to_dense(x: &DataMatrix) -> Dense {
    x.rows().map(|r| r.to_vec()).collect()
}

pub fn transpose(a: &Dense) -> Dense {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).map(|t| row[t] * b[t][j]).sum()).collect())
        .collect()
}

pub fn frobenius2(a: &Dense) -> f64 {
    a.iter().flatten().map(|v| v * v).sum()
}

/// Cyclic Jacobi eigensolver for a symmetric matrix: ascending eigenvalues and
/// eigenvectors as columns.
pub fn jacobi_eigen(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a.len();
    let mut m = a.clone();
    let mut v: Dense = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        let scale: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum::<f64>() + off;
        if off <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| m[a][a].total_cmp(&m[b][b]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&c| v[r][c]).collect()).collect();
    (values, vectors)
}

/// Singular values (descending) from the eigenvalues of the smaller Gram matrix.
pub fn singular_values_oracle(a: &Dense) -> Vec<f64> {
    let at = transpose(a);
    let gram = if a.len() <= at.len() { matmul(a, &at) } else { matmul(&at, a) };
    let (vals, _) = jacobi_eigen(&gram);
    let mut s: Vec<f64> = vals.into_iter().map(|v| v.max(0.0).sqrt()).collect();
    s.reverse();
    s
}

/// Spectral entropy written out directly from its definition.
pub fn entropy_oracle(sigma: &[f64]) -> f64 {
    let top = sigma.iter().cloned().fold(0.0, f64::max);
    let sq: Vec<f64> = sigma.iter().filter(|&&s| s > 1e-12 * top).map(|s| s * s).collect();
    let total: f64 = sq.iter().sum();
    -sq.iter().map(|v| v / total).map(|p| p * p.ln()).sum::<f64>()
}

/// Ranks by sorting every other point by (distance, index): `ranks[i][j]`, 0 on the diagonal.
pub fn naive_ranks(x: &Dense) -> Vec<Vec<usize>> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut others: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum(), j))
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut row = vec![0; n];
            for (pos, (_, j)) in others.iter().enumerate() {
                row[*j] = pos + 1;
            }
            row
        })
        .collect()
}

/// Haar-ish random orthogonal matrix by Gram-Schmidt on Gaussian columns.
pub fn random_orthogonal(d: usize, r: &mut ChaCha8Rng) -> Dense {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| r.sample(StandardNormal)).collect();
        for c in &cols {
            let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    transpose(&cols)
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let sab: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let saa: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let sbb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    sab / (saa * sbb).sqrt()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Least-squares affine map `truth ~ [emb, 1] B`; returns the residual normalized by
/// the centered variance of `truth`.
pub fn affine_fit_error(emb: &Dense, truth: &Dense) -> f64 {
    let n = emb.len();
    let design: Dense = emb.iter().map(|r| r.iter().cloned().chain([1.0]).collect()).collect();
    let dt = transpose(&design);
    let normal = matmul(&dt, &design);
    let rhs = matmul(&dt, truth);
    let coef = solve(&normal, &rhs);
    let fitted = matmul(&design, &coef);
    let cols = truth[0].len();
    let mean: Vec<f64> = (0..cols).map(|c| truth.iter().map(|r| r[c]).sum::<f64>() / n as f64).collect();
    let mut res = 0.0;
    let mut tot = 0.0;
    for i in 0..n {
        for c in 0..cols {
            res += (truth[i][c] - fitted[i][c]).powi(2);
            tot += (truth[i][c] - mean[c]).powi(2);
        }
    }
    res / tot
}

/// Gaussian elimination with partial pivoting, `a x = b` for several right-hand sides.
pub fn solve(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let m = b[0].len();
    let mut aug: Dense = (0..n).map(|i| a[i].iter().chain(&b[i]).cloned().collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs())).unwrap();
        aug.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = aug[row][col] / aug[col][col];
                for c in col..n + m {
                    aug[row][c] -= f * aug[col][c];
                }
            }
        }
    }
    (0..n).map(|i| (0..m).map(|j| aug[i][n + j] / aug[i][i]).collect()).collect()
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// MRRE in exact integer arithmetic, straight from pairwise ranks.
///
/// Every term is scaled by `L = lcm(1..n-1)`, so `W_n = num_n / denom` and
/// `W_v = num_v / denom` hold exactly.
pub struct ExactMrre {
    pub num_n: u128,
    pub num_v: u128,
    pub denom: u128,
}

impl ExactMrre {
    pub fn w_n(&self) -> f64 {
        self.num_n as f64 / self.denom as f64
    }

    pub fn w_v(&self) -> f64 {
        self.num_v as f64 / self.denom as f64
    }
}

pub fn lcm_upto(m: usize) -> u128 {
    (1..=m as u128).fold(1, |acc, v| acc / gcd(acc, v) * v)
}

pub fn exact_mrre(high: &[Vec<usize>], low: &[Vec<usize>], big_k: usize) -> ExactMrre {
    let n = high.len();
    let l = lcm_upto(n - 1);
    let (mut num_n, mut num_v) = (0u128, 0u128);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (rho, r) = (high[i][j], low[i][j]);
            let diff = rho.abs_diff(r) as u128;
            if r <= big_k {
                num_n += diff * (l / r as u128);
            }
            if rho <= big_k {
                num_v += diff * (l / rho as u128);
            }
        }
    }
    let denom: u128 = n as u128
        * (1..=big_k)
            .map(|k| (n as i128 - 2 * k as i128 + 1).unsigned_abs() * (l / k as u128))
            .sum::<u128>();
    ExactMrre { num_n, num_v, denom }
}

/// Co-ranking counts `q[k-1][l-1]` by a double loop over pairs.
pub fn naive_coranking(high: &[Vec<usize>], low: &[Vec<usize>]) -> Vec<Vec<u64>> {
    let n = high.len();
    let mut q = vec![vec![0u64; n - 1]; n - 1];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                q[high[i][j] - 1][low[i][j] - 1] += 1;
            }
        }
    }
    q
}

/// Relative distance between two floats in units of `f64::EPSILON`.
pub fn ulps_apart(a: f64, b: f64) -> f64 {
    (a - b).abs() / (f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
}

/// Mutual information of `(x_t, x_{t+lag})` from a fresh equal-width histogram.
pub fn ami_oracle(x: &[f64], lag: usize, bins: usize) -> f64 {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bin = |v: f64| (((v - lo) / (hi - lo) * bins as f64).floor() as usize).min(bins - 1);
    let pairs = x.len() - lag;
    let mut joint = vec![vec![0usize; bins]; bins];
    let mut a = vec![0usize; bins];
    let mut b = vec![0usize; bins];
    for t in 0..pairs {
        let (i, j) = (bin(x[t]), bin(x[t + lag]));
        joint[i][j] += 1;
        a[i] += 1;
        b[j] += 1;
    }
    let n = pairs as f64;
    let mut mi = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            if joint[i][j] > 0 {
                let pij = joint[i][j] as f64 / n;
                mi += pij * (pij / ((a[i] as f64 / n) * (b[j] as f64 / n))).ln();
            }
        }
    }
    mi.max(0.0)
}
