//! The finite-rank operator `P f = Σ_t f(t) η_t`, its rank-one partial sums and
//! the sup seminorm over a compact subset.
//!
//! `P` reads `f` only at centers. Each output value is summed over the active
//! centers in ascending index order, so results are bit-reproducible regardless
//! of how evaluation points are scheduled.

use std::io::{self, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::function::{ComplexFunction, FunctionError, FunctionOnM};
use crate::metric_space::{CompactSubset, MetricError};
use crate::partition::{PartitionError, PartitionOfUnity};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("function cannot be evaluated at center {center}: {source}")]
    Function { center: usize, source: FunctionError },
    #[error("index {0} is not a center of the net")]
    NotACenter(usize),
    #[error("seminorm over an empty set")]
    EmptySet,
    #[error("expected {expected} center values, got {found}")]
    CenterValueCount { expected: usize, found: usize },
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// `max |v|` over a nonempty slice.
pub fn seminorm(values: &[f64]) -> Result<f64, OperatorError> {
    if values.is_empty() {
        return Err(OperatorError::EmptySet);
    }
    Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())))
}

pub fn seminorm_complex(values: &[Complex64]) -> Result<f64, OperatorError> {
    if values.is_empty() {
        return Err(OperatorError::EmptySet);
    }
    Ok(values.iter().fold(0.0, |m, v| m.max(v.norm())))
}

/// The seminorm `‖g‖_T = max_{t∈T} |g(t)|` for a fixed subset `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Seminorm {
    subset: CompactSubset,
}

impl Seminorm {
    pub fn new(subset: CompactSubset) -> Self {
        Self { subset }
    }

    pub fn subset(&self) -> &CompactSubset {
        &self.subset
    }

    /// Evaluate on values indexed by cloud index.
    pub fn of(&self, cloud_values: &[f64]) -> f64 {
        self.subset.indices().iter().fold(0.0, |m, &i| m.max(cloud_values[i].abs()))
    }
}

/// Memoized `f(t)` over center positions.
struct CenterValues<'f> {
    f: &'f FunctionOnM,
    cache: Vec<Option<f64>>,
}

impl<'f> CenterValues<'f> {
    fn new(f: &'f FunctionOnM, centers: usize) -> Self {
        Self { f, cache: vec![None; centers] }
    }

    fn get(&mut self, pou: &PartitionOfUnity<'_>, t: usize) -> Result<f64, OperatorError> {
        let pos = pou.net().position(t).ok_or(OperatorError::NotACenter(t))?;
        if let Some(v) = self.cache[pos] {
            return Ok(v);
        }
        let v = self
            .f
            .eval(pou.space(), t)
            .map_err(|source| OperatorError::Function { center: t, source })?;
        self.cache[pos] = Some(v);
        Ok(v)
    }
}

fn check_eval_points(pou: &PartitionOfUnity<'_>, eval: &[usize]) -> Result<(), OperatorError> {
    let len = pou.space().len();
    match eval.iter().find(|&&x| x >= len) {
        Some(&index) => Err(MetricError::IndexOutOfRange { index, len }.into()),
        None => Ok(()),
    }
}

fn combine(
    pou: &PartitionOfUnity<'_>,
    f: &FunctionOnM,
    eval: &[usize],
    keep: Option<&[bool]>,
) -> Result<Vec<f64>, OperatorError> {
    check_eval_points(pou, eval)?;
    let mut values = CenterValues::new(f, pou.net().len());
    let mut out = Vec::with_capacity(eval.len());
    for &x in eval {
        let mut acc = 0.0;
        for (t, w) in pou.eval_all(x)? {
            if let Some(mask) = keep {
                let pos = pou.net().position(t).ok_or(OperatorError::NotACenter(t))?;
                if !mask[pos] {
                    continue;
                }
            }
            acc += values.get(pou, t)? * w;
        }
        out.push(acc);
    }
    Ok(out)
}

/// `(P f)(x)` for each `x` in `eval`.
pub fn apply(pou: &PartitionOfUnity<'_>, f: &FunctionOnM, eval: &[usize]) -> Result<Vec<f64>, OperatorError> {
    combine(pou, f, eval, None)
}

/// `P` on a complex function, part by part.
pub fn apply_complex(
    pou: &PartitionOfUnity<'_>,
    f: &ComplexFunction,
    eval: &[usize],
) -> Result<Vec<Complex64>, OperatorError> {
    let re = apply(pou, &f.re, eval)?;
    let im = apply(pou, &f.im, eval)?;
    Ok(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
}

/// `(P_N f)(x) = Σ_{t∈N} f(t) η_t(x)` for a subset `N` of the centers.
pub fn partial_sum_apply(
    pou: &PartitionOfUnity<'_>,
    f: &FunctionOnM,
    subset: &[usize],
    eval: &[usize],
) -> Result<Vec<f64>, OperatorError> {
    let mut keep = vec![false; pou.net().len()];
    for &t in subset {
        let pos = pou.net().position(t).ok_or(OperatorError::NotACenter(t))?;
        keep[pos] = true;
    }
    combine(pou, f, eval, Some(&keep))
}

/// `|M_T|`, the number of centers whose bumps do not vanish on `subset`.
pub fn rank_on(pou: &PartitionOfUnity<'_>, subset: &CompactSubset) -> Result<usize, OperatorError> {
    Ok(pou
        .net()
        .active_centers_on(pou.space(), subset)
        .map_err(PartitionError::from)?
        .len())
}

/// `P` restricted to evaluation points `eval`: a sparse row-stochastic table
/// with `W[x][t] = η_t(x)`. Columns are center positions in the net.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRankOperator {
    eval_points: Vec<usize>,
    centers: Vec<usize>,
    rows: Vec<Vec<(usize, f64)>>,
}

pub fn as_matrix(pou: &PartitionOfUnity<'_>, eval: &[usize]) -> Result<FiniteRankOperator, OperatorError> {
    check_eval_points(pou, eval)?;
    let net = pou.net();
    let rows = eval
        .iter()
        .map(|&x| {
            Ok(pou
                .eval_all(x)?
                .into_iter()
                .map(|(t, w)| (net.position(t).expect("active centers belong to the net"), w))
                .collect())
        })
        .collect::<Result<Vec<_>, OperatorError>>()?;
    Ok(FiniteRankOperator { eval_points: eval.to_vec(), centers: net.centers().to_vec(), rows })
}

impl FiniteRankOperator {
    pub fn eval_points(&self) -> &[usize] {
        &self.eval_points
    }

    /// Column labels: cloud indices of the centers.
    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    /// Row `i` as `(center position, weight)`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `max_x |Σ_t W[x][t] − 1|`.
    pub fn max_row_sum_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|&(_, w)| w).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `W · v` for `v` indexed by center position.
    pub fn apply_center_values(&self, values: &[f64]) -> Result<Vec<f64>, OperatorError> {
        if values.len() != self.centers.len() {
            return Err(OperatorError::CenterValueCount { expected: self.centers.len(), found: values.len() });
        }
        Ok(self
            .rows
            .iter()
            .map(|r| r.iter().fold(0.0, |acc, &(c, w)| acc + values[c] * w))
            .collect())
    }

    /// Dense `|eval| × n` table with columns indexed by cloud index.
    pub fn to_dense(&self, n: usize) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut dense = vec![0.0; n];
                for &(c, w) in r {
                    dense[self.centers[c]] = w;
                }
                dense
            })
            .collect()
    }

    /// `(row point, center, weight)` with cloud indices, row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .zip(&self.eval_points)
            .flat_map(move |(r, &x)| r.iter().map(move |&(c, w)| (x, self.centers[c], w)))
    }

    pub fn write_csv_triplets<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "weight"])?;
        for (x, t, weight) in self.triplets() {
            w.write_record([x.to_string(), t.to_string(), weight.to_string()])?;
        }
        w.flush()
    }
}
