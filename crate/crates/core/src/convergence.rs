//! Certified convergence of `P^k` to the identity on a compact subset.
//!
//! For `x ∈ T`, `(P f)(x) − f(x) = Σ_t (f(t) − f(x)) η_t(x)` with every active
//! `t` at distance `< ρ/k` from `x`. Hence
//!
//! ```text
//! ‖P f − f‖_T ≤ ω_f(ρ/k)   over the pair domain T ∪ M_T,
//! ```
//!
//! where `M_T` are the centers active somewhere on `T` and
//! `ω_f(δ) = max{|f(s) − f(x)| : d(s,x) < δ}`. The bound is exact for the
//! finite construction; it is the object the sweep certifies.

use serde::Serialize;
use thiserror::Error;

use crate::cover::{CoverError, Scale};
use crate::function::{FamilyMember, FunctionError, FunctionOnM};
use crate::metric_space::{CompactSubset, MetricSpace};
use crate::operator::{self, OperatorError};
use crate::parallel;
use crate::partition::{BumpKernel, PartitionError, PartitionOfUnity};
use crate::tolerance::EXACT_TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvergenceError {
    #[error("k list is empty")]
    EmptyScaleList,
    #[error("k list must be strictly increasing positive integers, got {0:?}")]
    UnorderedScaleList(Vec<u32>),
    #[error("function family is empty")]
    EmptyFamily,
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("ordering is not a permutation of the centers: {0}")]
    BadOrdering(String),
    #[error("function {name:?} at point {index}: {source}")]
    Function { name: String, index: usize, source: FunctionError },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Cover(#[from] CoverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub delta: f64,
    pub omega: f64,
    /// Pair `(s, x)` with `d(s,x) < δ` attaining `ω`; `(s, s)` when `ω = 0`.
    pub witness: Option<(usize, usize)>,
}

/// `ω(δ)` for several value vectors over one domain, in a single pair scan.
/// `values[f][i]` is function `f` at `domain[i]`.
pub fn family_modulus(space: &MetricSpace, domain: &[usize], values: &[Vec<f64>], delta: f64) -> Vec<ModulusEstimate> {
    let first = domain.first().map(|&s| (s, s));
    let mut out: Vec<ModulusEstimate> =
        values.iter().map(|_| ModulusEstimate { delta, omega: 0.0, witness: first }).collect();
    for (a, &s) in domain.iter().enumerate() {
        for (b, &x) in domain.iter().enumerate().skip(a + 1) {
            if !(space.dist(s, x) < delta) {
                continue;
            }
            for (est, v) in out.iter_mut().zip(values) {
                let gap = (v[a] - v[b]).abs();
                if gap > est.omega {
                    est.omega = gap;
                    est.witness = Some((s, x));
                }
            }
        }
    }
    out
}

/// Exhaustive modulus of continuity of `f` over `domain` at scale `delta`.
pub fn modulus(
    space: &MetricSpace,
    f: &FunctionOnM,
    domain: &[usize],
    delta: f64,
) -> Result<ModulusEstimate, FunctionError> {
    let values = domain.iter().map(|&i| f.eval(space, i)).collect::<Result<Vec<_>, _>>()?;
    Ok(family_modulus(space, domain, &[values], delta)[0])
}

/// Sorted union of a subset and the centers active on it.
fn pair_domain(subset: &CompactSubset, active: &[usize]) -> Vec<usize> {
    let mut domain: Vec<usize> = subset.indices().iter().chain(active).copied().collect();
    domain.sort_unstable();
    domain.dedup();
    domain
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    /// `‖P f − f‖_T`
    pub error: f64,
    /// Point of `T` where the error is attained.
    pub error_at: usize,
    pub bound: ModulusEstimate,
    pub ok: bool,
}

/// Compare `‖P f − f‖_T` with `ω_f(ρ/k)` over `T ∪ M_T`.
pub fn verify_bound(
    pou: &PartitionOfUnity<'_>,
    f: &FunctionOnM,
    subset: &CompactSubset,
) -> Result<BoundCheck, ConvergenceError> {
    let space = pou.space();
    let eval = subset.indices();
    let approx = operator::apply(pou, f, eval)?;
    let (mut error, mut error_at) = (0.0, eval[0]);
    for (&x, p) in eval.iter().zip(&approx) {
        let fx = f
            .eval(space, x)
            .map_err(|source| ConvergenceError::Function { name: f.label(), index: x, source })?;
        let gap = (p - fx).abs();
        if gap > error {
            (error, error_at) = (gap, x);
        }
    }
    let active = pou.net().active_centers_on(space, subset)?;
    let domain = pair_domain(subset, &active);
    let bound = modulus(space, f, &domain, pou.support_radius())
        .map_err(|source| ConvergenceError::Function { name: f.label(), index: domain[0], source })?;
    Ok(BoundCheck { error, error_at, ok: error <= bound.omega + EXACT_TOL, bound })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionResult {
    pub index: usize,
    pub name: String,
    pub error: f64,
    pub bound: f64,
    pub bound_witness: Option<(usize, usize)>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleReport {
    pub k: u32,
    pub support_radius: f64,
    pub net_size: usize,
    /// `|M_T|`
    pub rank: usize,
    pub max_multiplicity: usize,
    /// `sup_f ‖P f − f‖_T`
    pub family_error: f64,
    /// `sup_f ω_f(ρ/k)`
    pub family_bound: f64,
    pub bound_satisfied: bool,
    /// `max_{x∈T} |Σ_t η_t(x) − 1|`
    pub partition_defect: f64,
    pub functions: Vec<FunctionResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trend {
    /// Consecutive `(k, k')` pairs where the family error went up.
    pub error_increases: Vec<(u32, u32)>,
    pub family_error_nonincreasing: bool,
    pub bound_nonincreasing: bool,
    pub all_bounds_satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub kernel: BumpKernel,
    pub rho: f64,
    pub open_support_only: bool,
    pub subset_size: usize,
    pub functions: Vec<String>,
    pub scales: Vec<ScaleReport>,
    pub trend: Trend,
}

pub fn check_scale_list(k_list: &[u32]) -> Result<(), ConvergenceError> {
    if k_list.is_empty() {
        return Err(ConvergenceError::EmptyScaleList);
    }
    if k_list[0] == 0 || k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConvergenceError::UnorderedScaleList(k_list.to_vec()));
    }
    Ok(())
}

/// Rebuild net and partition at each `k`, and certify every family member.
/// Scales are processed independently and merged in `k_list` order.
pub fn sweep(
    space: &MetricSpace,
    family: &[FamilyMember],
    k_list: &[u32],
    rho: f64,
    kernel: BumpKernel,
    subset: &CompactSubset,
) -> Result<ConvergenceReport, ConvergenceError> {
    check_scale_list(k_list)?;
    if family.is_empty() {
        return Err(ConvergenceError::EmptyFamily);
    }
    let scales = k_list.iter().map(|&k| Scale::new(k, rho)).collect::<Result<Vec<_>, _>>()?;
    let scales: Vec<ScaleReport> = parallel::map_ordered(&scales, |&scale| sweep_scale(space, family, scale, kernel, subset))
        .into_iter()
        .collect::<Result<_, _>>()?;

    let error_increases = scales
        .windows(2)
        .filter(|w| w[1].family_error > w[0].family_error)
        .map(|w| (w[0].k, w[1].k))
        .collect::<Vec<_>>();
    let trend = Trend {
        family_error_nonincreasing: error_increases.is_empty(),
        error_increases,
        bound_nonincreasing: scales.windows(2).all(|w| w[1].family_bound <= w[0].family_bound),
        all_bounds_satisfied: scales.iter().all(|s| s.bound_satisfied),
    };
    Ok(ConvergenceReport {
        kernel,
        rho,
        open_support_only: rho == 1.0,
        subset_size: subset.len(),
        functions: family.iter().map(|m| m.name.clone()).collect(),
        scales,
        trend,
    })
}

fn sweep_scale(
    space: &MetricSpace,
    family: &[FamilyMember],
    scale: Scale,
    kernel: BumpKernel,
    subset: &CompactSubset,
) -> Result<ScaleReport, ConvergenceError> {
    let pou = PartitionOfUnity::build(space, scale, kernel);
    let eval = subset.indices();
    let rows = eval.iter().map(|&x| pou.eval_all(x)).collect::<Result<Vec<_>, _>>()?;

    let mut hit = vec![false; space.len()];
    let mut max_multiplicity = 0;
    let mut partition_defect: f64 = 0.0;
    for row in &rows {
        max_multiplicity = max_multiplicity.max(row.len());
        partition_defect = partition_defect.max((row.iter().map(|&(_, w)| w).sum::<f64>() - 1.0).abs());
        for &(t, _) in row {
            hit[t] = true;
        }
    }
    let active: Vec<usize> = (0..space.len()).filter(|&t| hit[t]).collect();
    let domain = pair_domain(subset, &active);

    // f on the pair domain, and its position map for row lookups
    let mut slot = vec![usize::MAX; space.len()];
    for (i, &p) in domain.iter().enumerate() {
        slot[p] = i;
    }
    let values = family
        .iter()
        .map(|m| {
            domain
                .iter()
                .map(|&p| {
                    m.function
                        .eval(space, p)
                        .map_err(|source| ConvergenceError::Function { name: m.name.clone(), index: p, source })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let bounds = family_modulus(space, &domain, &values, scale.support_radius());

    let functions: Vec<FunctionResult> = family
        .iter()
        .zip(&values)
        .zip(&bounds)
        .enumerate()
        .map(|(index, ((m, v), b))| {
            let error = eval
                .iter()
                .zip(&rows)
                .map(|(&x, row)| {
                    let p = row.iter().fold(0.0, |acc, &(t, w)| acc + v[slot[t]] * w);
                    (p - v[slot[x]]).abs()
                })
                .fold(0.0, f64::max);
            FunctionResult {
                index,
                name: m.name.clone(),
                error,
                bound: b.omega,
                bound_witness: b.witness,
                ok: error <= b.omega + EXACT_TOL,
            }
        })
        .collect();

    let family_error = functions.iter().map(|r| r.error).fold(0.0, f64::max);
    let family_bound = functions.iter().map(|r| r.bound).fold(0.0, f64::max);
    Ok(ScaleReport {
        k: scale.k(),
        support_radius: scale.support_radius(),
        net_size: pou.net().len(),
        rank: active.len(),
        max_multiplicity,
        family_error,
        family_bound,
        bound_satisfied: functions.iter().all(|r| r.ok),
        partition_defect,
        functions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "EQUICONTINUOUS_AT_SCALE")]
    EquicontinuousAtScale,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquicontinuityWitness {
    pub function: usize,
    pub name: String,
    pub s: usize,
    pub x: usize,
    pub distance: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquicontinuityReport {
    pub verdict: Verdict,
    pub delta: f64,
    pub epsilon: f64,
    /// `sup_f ω_f(δ)` over the domain.
    pub sup_modulus: f64,
    pub witness: Option<EquicontinuityWitness>,
}

/// Single-scale equicontinuity: pass iff `sup_f ω_f(δ) ≤ ε`, otherwise report
/// the function and pair realizing the largest gap.
pub fn equicontinuity_check(
    space: &MetricSpace,
    family: &[FamilyMember],
    domain: &CompactSubset,
    delta: f64,
    epsilon: f64,
) -> Result<EquicontinuityReport, ConvergenceError> {
    for (name, value) in [("delta", delta), ("epsilon", epsilon)] {
        if !(value > 0.0) {
            return Err(ConvergenceError::NonPositive { name, value });
        }
    }
    let points = domain.indices();
    let values = family
        .iter()
        .map(|m| {
            points
                .iter()
                .map(|&p| {
                    m.function
                        .eval(space, p)
                        .map_err(|source| ConvergenceError::Function { name: m.name.clone(), index: p, source })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let moduli = family_modulus(space, points, &values, delta);
    let worst = moduli
        .iter()
        .enumerate()
        .fold(None::<(usize, &ModulusEstimate)>, |best, (i, m)| match best {
            Some((_, b)) if b.omega >= m.omega => best,
            _ => Some((i, m)),
        });
    let sup_modulus = worst.map_or(0.0, |(_, m)| m.omega);
    if sup_modulus <= epsilon {
        return Ok(EquicontinuityReport {
            verdict: Verdict::EquicontinuousAtScale,
            delta,
            epsilon,
            sup_modulus,
            witness: None,
        });
    }
    let (function, m) = worst.expect("sup above epsilon implies a member");
    let (s, x) = m.witness.expect("positive modulus has a witness");
    Ok(EquicontinuityReport {
        verdict: Verdict::Fail,
        delta,
        epsilon,
        sup_modulus,
        witness: Some(EquicontinuityWitness {
            function,
            name: family[function].name.clone(),
            s,
            x,
            distance: space.dist(s, x),
            gap: m.omega,
        }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailSequence {
    /// `errors[m] = ‖P_{N_m} f − P f‖_T` for the prefix `N_m` of length `m`.
    pub errors: Vec<f64>,
    /// `|M_T|`
    pub active_count: usize,
    /// Shortest prefix containing `M_T`.
    pub covering_prefix: usize,
    /// First `m` with `errors[m] ≤ EXACT_TOL`.
    pub first_exact: Option<usize>,
}

/// Partial sums of the rank-one expansion along `ordering` (a permutation of
/// the centers), measured against the full operator on `subset`.
pub fn rank_one_tail(
    pou: &PartitionOfUnity<'_>,
    f: &FunctionOnM,
    subset: &CompactSubset,
    ordering: &[usize],
) -> Result<TailSequence, ConvergenceError> {
    let net = pou.net();
    let mut seen = vec![false; net.len()];
    for &t in ordering {
        let pos = net
            .position(t)
            .ok_or_else(|| ConvergenceError::BadOrdering(format!("{t} is not a center")))?;
        if std::mem::replace(&mut seen[pos], true) {
            return Err(ConvergenceError::BadOrdering(format!("{t} repeated")));
        }
    }
    if ordering.len() != net.len() {
        return Err(ConvergenceError::BadOrdering(format!(
            "{} of {} centers listed",
            ordering.len(),
            net.len()
        )));
    }

    let space = pou.space();
    let eval = subset.indices();
    let rows = eval.iter().map(|&x| pou.eval_all(x)).collect::<Result<Vec<_>, _>>()?;
    let mut center_value = vec![0.0; net.len()];
    for row in &rows {
        for &(t, _) in row {
            let pos = net.position(t).expect("active centers belong to the net");
            center_value[pos] = f
                .eval(space, t)
                .map_err(|source| OperatorError::Function { center: t, source })?;
        }
    }
    let partial = |keep: &[bool]| -> Vec<f64> {
        rows.iter()
            .map(|row| {
                row.iter().fold(0.0, |acc, &(t, w)| {
                    let pos = net.position(t).expect("active centers belong to the net");
                    if keep[pos] {
                        acc + center_value[pos] * w
                    } else {
                        acc
                    }
                })
            })
            .collect()
    };
    let full = partial(&vec![true; net.len()]);

    let active = net.active_centers_on(space, subset)?;
    let mut needed: usize = active.len();
    let mut is_active = vec![false; net.len()];
    for &t in &active {
        is_active[net.position(t).expect("active centers belong to the net")] = true;
    }
    let mut covering_prefix = if needed == 0 { 0 } else { usize::MAX };

    let mut keep = vec![false; net.len()];
    let mut errors = Vec::with_capacity(ordering.len() + 1);
    let gap = |keep: &[bool]| partial(keep).iter().zip(&full).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
    errors.push(gap(&keep));
    for (m, &t) in ordering.iter().enumerate() {
        let pos = net.position(t).expect("checked above");
        keep[pos] = true;
        if is_active[pos] {
            needed -= 1;
            if needed == 0 {
                covering_prefix = m + 1;
            }
        }
        errors.push(gap(&keep));
    }
    let first_exact = errors.iter().position(|&e| e <= EXACT_TOL);
    Ok(TailSequence { errors, active_count: active.len(), covering_prefix, first_exact })
}
