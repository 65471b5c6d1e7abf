//! Brute-force ground truth on small spaces.
//!
//! Everything here is recomputed with dense loops: its own greedy scan, the
//! textbook kernel formulas in `u = d/h`, full normalization over every center.
//! Nothing is shared with the sparse path except the distance oracle.

use serde::Serialize;
use thiserror::Error;

use crate::cover::Scale;
use crate::metric_space::{MetricError, MetricSpace};
use crate::operator::{self, OperatorError};
use crate::partition::{BumpKernel, PartitionError, PartitionOfUnity};
use crate::tolerance::EXACT_TOL;

pub const MAX_ORACLE_POINTS: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle is limited to {MAX_ORACLE_POINTS} points, space has {0}")]
    TooLarge(usize),
    #[error("invalid scale k={k}, rho={rho}")]
    InvalidScale { k: u32, rho: f64 },
    #[error("point {0} has no center within the support radius")]
    Uncovered(usize),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

fn textbook_phi(kernel: BumpKernel, u: f64) -> f64 {
    if u >= 1.0 {
        return 0.0;
    }
    match kernel {
        BumpKernel::Hat => (1.0 - u).max(0.0),
        BumpKernel::Cosine => (1.0 + (std::f64::consts::PI * u).cos()) / 2.0,
        BumpKernel::WendlandC2 => (1.0 - u).powi(4) * (4.0 * u + 1.0),
    }
}

/// Dense n×n table; entry `(x, t)` is `η_t(x)`, zero for non-centers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseOperator {
    pub n: usize,
    pub centers: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

impl DenseOperator {
    pub fn max_abs_diff(&self, other: &[Vec<f64>]) -> f64 {
        self.rows
            .iter()
            .zip(other)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// `max |P − I|` entrywise.
    pub fn identity_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (x, row) in self.rows.iter().enumerate() {
            for (t, &v) in row.iter().enumerate() {
                let target = if x == t { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    pub fn row_sum_defect(&self) -> f64 {
        self.rows.iter().map(|r| (r.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn check_size(space: &MetricSpace) -> Result<usize, OracleError> {
    match space.len() {
        n if n > MAX_ORACLE_POINTS => Err(OracleError::TooLarge(n)),
        n => Ok(n),
    }
}

/// `P^k` as an explicit dense matrix over the whole sample.
pub fn dense_pk(space: &MetricSpace, k: u32, rho: f64, kernel: BumpKernel) -> Result<DenseOperator, OracleError> {
    let n = check_size(space)?;
    if k == 0 || !(rho > 0.0 && rho <= 1.0) {
        return Err(OracleError::InvalidScale { k, rho });
    }
    let h = rho / f64::from(k);
    let r = rho / (2.0 * f64::from(k));

    let mut is_center = vec![false; n];
    for x in 0..n {
        let far_from_all = (0..x).filter(|&t| is_center[t]).all(|t| space.dist(x, t) >= r);
        is_center[x] = far_from_all;
    }
    let centers: Vec<usize> = (0..n).filter(|&t| is_center[t]).collect();

    let mut rows = vec![vec![0.0; n]; n];
    for (x, row) in rows.iter_mut().enumerate() {
        let mut z = 0.0;
        for t in 0..n {
            if is_center[t] {
                row[t] = textbook_phi(kernel, space.dist(x, t) / h);
                z += row[t];
            }
        }
        if !(z > 0.0) {
            return Err(OracleError::Uncovered(x));
        }
        for v in row.iter_mut() {
            *v /= z;
        }
    }
    Ok(DenseOperator { n, centers, rows })
}

/// Smallest `k` with `ρ/k ≤ min_{i≠j} d(i,j)`. From there on each point is its
/// own center and its only active center, so `P^k = I`.
pub fn identity_threshold(space: &MetricSpace, rho: f64) -> Result<u32, OracleError> {
    let min_distance = space.min_pairwise_distance()?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(OracleError::InvalidScale { k: 0, rho });
    }
    let mut k = (rho / min_distance).ceil().clamp(1.0, f64::from(u32::MAX)) as u32;
    // settle the float boundary with the same expression used for the support radius
    while rho / f64::from(k) > min_distance {
        k += 1;
    }
    while k > 1 && rho / f64::from(k - 1) <= min_distance {
        k -= 1;
    }
    Ok(k)
}

/// Rebuild `P^k` as `Σ_t η_t ⊗ e_t` from the sparse partition (only the
/// centers in `terms`, or all of them), and return `max |Σ − dense_pk|`.
pub fn rank_one_reconstruction(
    space: &MetricSpace,
    k: u32,
    rho: f64,
    kernel: BumpKernel,
    terms: Option<&[usize]>,
) -> Result<f64, OracleError> {
    let n = check_size(space)?;
    let dense = dense_pk(space, k, rho, kernel)?;
    let scale = Scale::new(k, rho).map_err(|_| OracleError::InvalidScale { k, rho })?;
    let pou = PartitionOfUnity::build(space, scale, kernel);
    let terms: Vec<usize> = terms.map_or_else(|| pou.net().centers().to_vec(), <[usize]>::to_vec);

    // column η_t(·) for every center, from the sparse rows
    let mut columns = vec![vec![0.0; n]; n];
    for x in 0..n {
        for (t, w) in pou.eval_all(x)? {
            columns[t][x] = w;
        }
    }
    let mut sum = vec![vec![0.0; n]; n];
    for &t in &terms {
        let u = &columns[t];
        let mut v = vec![0.0; n];
        v[t] = 1.0;
        let support: Vec<usize> = (0..n).filter(|&y| v[y] != 0.0).collect();
        for (x, row) in sum.iter_mut().enumerate() {
            for &y in &support {
                row[y] += u[x] * v[y];
            }
        }
    }
    Ok(dense.max_abs_diff(&sum))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub n: usize,
    pub k: u32,
    pub rho: f64,
    pub kernel: BumpKernel,
    pub tolerance: f64,
    pub dense_vs_sparse: f64,
    pub rank_one_deviation: f64,
    pub row_sum_defect: f64,
    pub identity_threshold: Option<u32>,
    /// `max |P^k − I|` at `k*`, `k*+1`, `k*+5`.
    pub identity_deviation: Option<f64>,
    pub pass: bool,
}

/// Every oracle comparison at one scale.
pub fn oracle_check(space: &MetricSpace, k: u32, rho: f64, kernel: BumpKernel) -> Result<OracleCheck, OracleError> {
    let n = check_size(space)?;
    let dense = dense_pk(space, k, rho, kernel)?;
    let scale = Scale::new(k, rho).map_err(|_| OracleError::InvalidScale { k, rho })?;
    let pou = PartitionOfUnity::build(space, scale, kernel);
    let all: Vec<usize> = (0..n).collect();
    let sparse = operator::as_matrix(&pou, &all)?.to_dense(n);
    let dense_vs_sparse = dense.max_abs_diff(&sparse);
    let rank_one_deviation = rank_one_reconstruction(space, k, rho, kernel, None)?;

    let (identity_threshold, identity_deviation) = if n >= 2 {
        let k_star = identity_threshold(space, rho)?;
        let mut worst: f64 = 0.0;
        for kk in [k_star, k_star.saturating_add(1), k_star.saturating_add(5)] {
            worst = worst.max(dense_pk(space, kk, rho, kernel)?.identity_deviation());
        }
        (Some(k_star), Some(worst))
    } else {
        (None, Some(dense.identity_deviation()))
    };
    let row_sum_defect = dense.row_sum_defect();
    let pass = dense_vs_sparse <= EXACT_TOL
        && rank_one_deviation <= EXACT_TOL
        && row_sum_defect <= crate::tolerance::PARTITION_SUM_TOL
        && identity_deviation.is_none_or(|d| d <= EXACT_TOL);
    Ok(OracleCheck {
        n,
        k,
        rho,
        kernel,
        tolerance: EXACT_TOL,
        dense_vs_sparse,
        rank_one_deviation,
        row_sum_defect,
        identity_threshold,
        identity_deviation,
        pass,
    })
}
