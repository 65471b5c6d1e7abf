use serde::Serialize;

use super::inputs::{load_family, resolve_subset};
use super::{CliError, RunConfig};
use crate::convergence::{self, ConvergenceReport};
use crate::cover::{Multiplicity, Net, Scale};
use crate::function::{FamilyMember, FunctionOnM};
use crate::metric_space::load::load_space;
use crate::metric_space::{CompactSubset, MetricSpace, ValidationReport};
use crate::operator;
use crate::oracle::{self, OracleCheck, MAX_ORACLE_POINTS};
use crate::partition::{BumpKernel, PartitionOfUnity};
use crate::tolerance::{EXACT_TOL, PARTITION_SUM_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunParameters {
    pub metric: &'static str,
    pub n: usize,
    pub subset_size: usize,
    pub k_list: Vec<u32>,
    pub rho: f64,
    pub kernel: BumpKernel,
    pub open_support_only: bool,
    pub strict: bool,
    pub seed: u64,
    pub trial_count: usize,
    pub functions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetCheck {
    pub k: u32,
    pub r: f64,
    pub centers: usize,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionCheck {
    pub k: u32,
    /// `max |Σ_t η_t(x) − 1|` over `T`.
    pub max_sum_defect: f64,
    pub weights_in_unit_interval: bool,
    /// Every nonzero weight has `d(x,t) < ρ/k`.
    pub support_contained: bool,
    pub multiplicity: Multiplicity,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSumCheck {
    pub k: u32,
    pub rank: usize,
    /// `max_f ‖P_{M_T} f − P f‖_T`
    pub max_gap: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub metric_axioms: bool,
    pub nets: bool,
    pub partition: bool,
    pub certified_bound: bool,
    pub partial_sums: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
}

/// Everything `run` computes, as written to the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub parameters: RunParameters,
    pub metric_validation: ValidationReport,
    pub nets: Vec<NetCheck>,
    pub partition: Vec<PartitionCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<ConvergenceReport>,
    pub partial_sums: Vec<PartialSumCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<OracleCheck>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_skipped: Option<String>,
    pub checks: CheckSummary,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    /// Human-readable witnesses for every failed check.
    pub failures: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.pass {
            0
        } else {
            1
        }
    }
}

fn default_family() -> Vec<FamilyMember> {
    vec![FamilyMember::new(FunctionOnM::Constant(1.0))]
}

/// Everything a subcommand reads from disk, checked for shape.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub space: MetricSpace,
    pub family: Vec<FamilyMember>,
    pub subset: CompactSubset,
}

/// Validate `config`, load the space, family (default: the constant 1) and `T`.
/// Every family member must evaluate at every point.
pub fn load_inputs(config: &RunConfig) -> Result<Inputs, CliError> {
    config.validate()?;
    let space = load_space(config.cloud.as_deref(), config.metric.as_deref())?;
    let family = match &config.family {
        Some(source) => load_family(source)?,
        None => default_family(),
    };
    if family.is_empty() {
        return Err(CliError::Input(String::from("function family is empty")));
    }
    let subset = resolve_subset(&config.subset, &space)?;
    for member in &family {
        member
            .function
            .sample(&space)
            .map_err(|e| CliError::Input(format!("function {:?}: {e}", member.name)))?;
    }
    Ok(Inputs { space, family, subset })
}

/// validate metric → nets → partitions → sweep → partial sums → (oracle).
///
/// Input problems are returned as `Err` (exit 2). Invariant failures are
/// recorded in the report with `pass = false` (exit 1).
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let inputs = load_inputs(config)?;
    run_on(&inputs.space, &inputs.family, &inputs.subset, config)
}

fn run_on(
    space: &MetricSpace,
    family: &[FamilyMember],
    subset: &CompactSubset,
    config: &RunConfig,
) -> Result<RunOutcome, CliError> {
    let mut failures = Vec::new();
    let parameters = RunParameters {
        metric: space.metric_name(),
        n: space.len(),
        subset_size: subset.len(),
        k_list: config.k_list.clone(),
        rho: config.rho,
        kernel: config.kernel,
        open_support_only: config.rho == 1.0,
        strict: config.strict,
        seed: config.seed,
        trial_count: config.trial_count,
        functions: family.iter().map(|m| m.name.clone()).collect(),
    };

    let metric_validation = space.validate(config.trial_count, config.seed);
    failures.extend(metric_validation.violations.iter().map(|v| format!("metric: {v}")));
    let metric_ok = metric_validation.is_valid();

    let mut report = RunReport {
        parameters,
        metric_validation,
        nets: Vec::new(),
        partition: Vec::new(),
        sweep: None,
        partial_sums: Vec::new(),
        oracle: None,
        oracle_skipped: None,
        checks: CheckSummary {
            metric_axioms: metric_ok,
            nets: false,
            partition: false,
            certified_bound: false,
            partial_sums: false,
            oracle: None,
        },
        pass: false,
    };
    if !metric_ok {
        return Ok(RunOutcome { report, failures });
    }

    let scales: Vec<Scale> = config
        .k_list
        .iter()
        .map(|&k| Scale::new(k, config.rho))
        .collect::<Result<_, _>>()
        .map_err(CliError::input)?;
    let invariant = |e: &dyn std::fmt::Display| CliError::Invariant(e.to_string());

    for &scale in &scales {
        let net = Net::build_greedy(space, scale);
        let verdict = net.verify(space);
        if let Err(e) = &verdict {
            failures.push(format!("net k={}: {e}", scale.k()));
        }
        report.nets.push(NetCheck {
            k: scale.k(),
            r: scale.net_radius(),
            centers: net.len(),
            ok: verdict.is_ok(),
            violation: verdict.err().map(|e| e.to_string()),
        });

        let pou = PartitionOfUnity::new(space, net, config.kernel);
        let check = check_partition(&pou, subset).map_err(|e| invariant(&e))?;
        if !check.ok {
            failures.push(format!("partition k={}: max sum defect {}", scale.k(), check.max_sum_defect));
        }
        report.partition.push(check);

        let active = pou.net().active_centers_on(space, subset).map_err(|e| invariant(&e))?;
        let mut max_gap: f64 = 0.0;
        for member in family {
            let full = operator::apply(&pou, &member.function, subset.indices()).map_err(|e| invariant(&e))?;
            let partial = operator::partial_sum_apply(&pou, &member.function, &active, subset.indices())
                .map_err(|e| invariant(&e))?;
            max_gap = full.iter().zip(&partial).fold(max_gap, |m, (a, b)| m.max((a - b).abs()));
        }
        let ok = max_gap <= EXACT_TOL;
        if !ok {
            failures.push(format!("partial sum k={}: gap {max_gap}", scale.k()));
        }
        report.partial_sums.push(PartialSumCheck { k: scale.k(), rank: active.len(), max_gap, ok });
    }

    let sweep = convergence::sweep(space, family, &config.k_list, config.rho, config.kernel, subset)
        .map_err(|e| invariant(&e))?;
    for s in &sweep.scales {
        for f in s.functions.iter().filter(|f| !f.ok) {
            failures.push(format!(
                "certified bound k={}: {} error {} > bound {} (witness {:?})",
                s.k, f.name, f.error, f.bound, f.bound_witness
            ));
        }
    }
    report.checks.certified_bound = sweep.trend.all_bounds_satisfied;
    report.sweep = Some(sweep);

    if config.oracle {
        if space.len() <= MAX_ORACLE_POINTS {
            let checks = config
                .k_list
                .iter()
                .map(|&k| oracle::oracle_check(space, k, config.rho, config.kernel))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| invariant(&e))?;
            for c in checks.iter().filter(|c| !c.pass) {
                failures.push(format!(
                    "oracle k={}: dense vs sparse {}, rank-one {}, identity {:?}",
                    c.k, c.dense_vs_sparse, c.rank_one_deviation, c.identity_deviation
                ));
            }
            report.checks.oracle = Some(checks.iter().all(|c| c.pass));
            report.oracle = Some(checks);
        } else {
            report.oracle_skipped = Some(format!("space has {} points, oracle cap is {MAX_ORACLE_POINTS}", space.len()));
        }
    }

    report.checks.nets = report.nets.iter().all(|c| c.ok);
    report.checks.partition = report.partition.iter().all(|c| c.ok);
    report.checks.partial_sums = report.partial_sums.iter().all(|c| c.ok);
    let c = &report.checks;
    report.pass = c.metric_axioms
        && c.nets
        && c.partition
        && c.certified_bound
        && c.partial_sums
        && c.oracle.unwrap_or(true);
    Ok(RunOutcome { report, failures })
}

pub fn check_partition(
    pou: &PartitionOfUnity<'_>,
    subset: &CompactSubset,
) -> Result<PartitionCheck, crate::partition::PartitionError> {
    let space = pou.space();
    let h = pou.support_radius();
    let mut max_sum_defect: f64 = 0.0;
    let mut weights_in_unit_interval = true;
    let mut support_contained = true;
    for &x in subset.indices() {
        let row = pou.eval_all(x)?;
        let sum: f64 = row.iter().map(|&(_, w)| w).sum();
        max_sum_defect = max_sum_defect.max((sum - 1.0).abs());
        for &(t, w) in &row {
            weights_in_unit_interval &= (0.0..=1.0).contains(&w);
            support_contained &= w == 0.0 || space.dist(x, t) < h;
        }
    }
    let multiplicity = pou.net().multiplicity(space, subset.indices())?;
    Ok(PartitionCheck {
        k: pou.scale().k(),
        max_sum_defect,
        weights_in_unit_interval,
        support_contained,
        multiplicity,
        ok: max_sum_defect <= PARTITION_SUM_TOL && weights_in_unit_interval && support_contained,
    })
}
