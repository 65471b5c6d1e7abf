use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use pou_approx::cli_io::{
    check_partition, flatten_report_csv, load_inputs, run, CliError, FamilySource, Inputs, RunConfig,
    SubsetSelector,
};
use pou_approx::convergence::{self, Verdict};
use pou_approx::cover::{Net, Scale};
use pou_approx::function::FunctionOnM;
use pou_approx::metric_space::load::load_space;
use pou_approx::operator;
use pou_approx::oracle::{self, OracleError};
use pou_approx::partition::{BumpKernel, PartitionOfUnity};

const DEFAULT_K_LIST: [u32; 7] = [1, 2, 4, 8, 16, 32, 64];

#[derive(Parser)]
#[command(name = "pou-approx", version, about = "Partition-of-unity approximation on metric point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Point cloud (CSV or JSON).
    #[arg(long)]
    cloud: Option<PathBuf>,
    /// euclidean | manhattan | chebyshev | discrete, or a metric file.
    #[arg(long)]
    metric: Option<String>,
    /// Scales, e.g. 1,2,4,8.
    #[arg(long, value_delimiter = ',')]
    k_list: Option<Vec<u32>>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    kernel: Option<BumpKernel>,
    /// Function family file (JSON specs or CSV columns).
    #[arg(long)]
    family: Option<PathBuf>,
    /// Short preset such as constant:3, projection:0, sin:8, cone:1@0. Repeatable.
    #[arg(long = "preset")]
    presets: Vec<String>,
    /// Inline JSON function spec. Repeatable.
    #[arg(long = "function")]
    functions: Vec<String>,
    /// Compact subset T: "all" or a file of indices.
    #[arg(long = "T")]
    subset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reject rho = 1.
    #[arg(long)]
    strict: bool,
    /// JSON run configuration; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random triangle triples checked when n > 64.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct ScaleArg {
    /// Single scale; overrides --k-list.
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms.
    ValidateMetric {
        #[command(flatten)]
        common: Common,
    },
    /// Greedy nets at each scale.
    BuildNet {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scale: ScaleArg,
    },
    /// Partition of unity at each scale, with its identities checked on T.
    BuildPou {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scale: ScaleArg,
        /// Write the weight table on T as CSV triplets (single scale only).
        #[arg(long)]
        triplets: Option<PathBuf>,
    },
    /// Evaluate P^k f on T.
    Apply {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scale: ScaleArg,
        #[arg(long)]
        triplets: Option<PathBuf>,
    },
    /// Errors and certified bounds over a family and a list of scales.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Single-scale equicontinuity check of the family on T.
    Equicontinuity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        epsilon: f64,
    },
    /// Compare the sparse operator against dense brute force (n <= 512).
    OracleCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Re-emit a JSON report, or flatten it to CSV.
    Report {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline: metric, nets, partitions, sweep, partial sums, oracle.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also run the dense oracle when n <= 512.
        #[arg(long)]
        oracle: bool,
    },
}

fn build_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::new(DEFAULT_K_LIST.to_vec()),
    };
    if let Some(cloud) = &common.cloud {
        config.cloud = Some(cloud.clone());
    }
    if let Some(metric) = &common.metric {
        config.metric = Some(metric.clone());
    }
    if let Some(k_list) = &common.k_list {
        config.k_list = k_list.clone();
    }
    if let Some(rho) = common.rho {
        config.rho = rho;
    }
    if let Some(kernel) = common.kernel {
        config.kernel = kernel;
    }
    if let Some(subset) = &common.subset {
        config.subset = SubsetSelector::Named(subset.clone());
    }
    if let Some(out) = &common.out {
        config.out = Some(out.clone());
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(trials) = common.trials {
        config.trial_count = trials;
    }
    config.strict |= common.strict;

    let mut inline = Vec::new();
    for preset in &common.presets {
        inline.push(FunctionOnM::short_spec(preset).map_err(|e| CliError::Input(format!("--preset: {e}")))?);
    }
    for spec in &common.functions {
        let value: Value =
            serde_json::from_str(spec).map_err(|e| CliError::Input(format!("--function: {e}")))?;
        inline.push(value);
    }
    match (&common.family, inline.is_empty()) {
        (Some(_), false) => {
            return Err(CliError::Input(String::from("give --family or --preset/--function, not both")))
        }
        (Some(path), true) => config.family = Some(FamilySource::Path(path.clone())),
        (None, false) => config.family = Some(FamilySource::Inline(inline)),
        (None, true) => {}
    }
    Ok(config)
}

fn scales(config: &RunConfig, scale: &ScaleArg) -> Result<Vec<Scale>, CliError> {
    let ks = match scale.k {
        Some(k) => vec![k],
        None => config.k_list.clone(),
    };
    ks.into_iter().map(|k| Scale::new(k, config.rho).map_err(CliError::input)).collect()
}

fn emit(value: &impl Serialize, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::input)?;
    text.push('\n');
    write_text(&text, out)
}

fn write_text(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

fn invariant(e: impl std::fmt::Display) -> CliError {
    CliError::Invariant(e.to_string())
}

/// Exit status for a report whose certified checks failed.
fn verdict(ok: bool, witness: impl FnOnce() -> String) -> Result<u8, CliError> {
    if ok {
        Ok(0)
    } else {
        eprintln!("invariant violated: {}", witness());
        Ok(1)
    }
}

fn dispatch(command: Command) -> Result<u8, CliError> {
    match command {
        Command::ValidateMetric { common } => {
            let config = build_config(&common)?;
            let space = load_space(config.cloud.as_deref(), config.metric.as_deref())?;
            let report = space.validate(config.trial_count, config.seed);
            emit(&report, config.out.as_deref())?;
            verdict(report.is_valid(), || {
                let shown: Vec<String> = report.violations.iter().take(5).map(ToString::to_string).collect();
                format!("{} metric violations: {}", report.violation_count, shown.join("; "))
            })
        }
        Command::BuildNet { common, scale } => {
            let config = build_config(&common)?;
            let space = load_space(config.cloud.as_deref(), config.metric.as_deref())?;
            let mut nets = Vec::new();
            let mut failures = Vec::new();
            for s in scales(&config, &scale)? {
                let net = Net::build_greedy(&space, s);
                let check = net.verify(&space);
                if let Err(e) = &check {
                    failures.push(format!("k={}: {e}", s.k()));
                }
                let ids: Vec<&str> = net.centers().iter().map(|&t| space.cloud().id(t)).collect();
                let mut record = serde_json::to_value(net.to_record()).map_err(CliError::input)?;
                record["support_radius"] = json!(s.support_radius());
                record["center_ids"] = json!(ids);
                record["verified"] = json!(check.is_ok());
                nets.push(record);
            }
            emit(&json!({ "metric": space.metric_name(), "n": space.len(), "nets": nets }), config.out.as_deref())?;
            verdict(failures.is_empty(), || failures.join("; "))
        }
        Command::BuildPou { common, scale, triplets } => {
            let config = build_config(&common)?;
            let Inputs { space, subset, .. } = load_inputs(&config)?;
            let scales = scales(&config, &scale)?;
            if triplets.is_some() && scales.len() != 1 {
                return Err(CliError::Input(String::from("--triplets needs a single scale (--k)")));
            }
            let mut rows = Vec::new();
            let mut failures = Vec::new();
            for s in scales {
                let pou = PartitionOfUnity::build(&space, s, config.kernel);
                let check = check_partition(&pou, &subset).map_err(invariant)?;
                if !check.ok {
                    failures.push(format!("k={}: sum defect {}", s.k(), check.max_sum_defect));
                }
                if let Some(path) = &triplets {
                    write_triplets(&pou, subset.indices(), path)?;
                }
                rows.push(json!({
                    "k": s.k(),
                    "support_radius": s.support_radius(),
                    "net_size": pou.net().len(),
                    "centers": pou.net().centers(),
                    "check": check,
                }));
            }
            let report = json!({
                "kernel": config.kernel,
                "rho": config.rho,
                "open_support_only": config.rho == 1.0,
                "subset_size": subset.len(),
                "scales": rows,
            });
            emit(&report, config.out.as_deref())?;
            verdict(failures.is_empty(), || failures.join("; "))
        }
        Command::Apply { common, scale, triplets } => {
            let config = build_config(&common)?;
            if config.family.is_none() {
                return Err(CliError::Input(String::from("apply needs --preset, --function or --family")));
            }
            let Inputs { space, family, subset } = load_inputs(&config)?;
            let scales = scales(&config, &scale)?;
            if triplets.is_some() && scales.len() != 1 {
                return Err(CliError::Input(String::from("--triplets needs a single scale (--k)")));
            }
            let eval = subset.indices();
            let mut rows = Vec::new();
            for s in scales {
                let pou = PartitionOfUnity::build(&space, s, config.kernel);
                let mut functions = Vec::new();
                for member in &family {
                    let values = operator::apply(&pou, &member.function, eval).map_err(invariant)?;
                    let exact = member.function.sample(&space).map_err(CliError::input)?;
                    let error = eval.iter().zip(&values).map(|(&x, v)| (v - exact[x]).abs()).fold(0.0, f64::max);
                    functions.push(json!({ "name": member.name, "values": values, "error": error }));
                }
                if let Some(path) = &triplets {
                    write_triplets(&pou, eval, path)?;
                }
                rows.push(json!({ "k": s.k(), "support_radius": s.support_radius(), "functions": functions }));
            }
            let report = json!({
                "kernel": config.kernel,
                "rho": config.rho,
                "eval_points": eval,
                "scales": rows,
            });
            emit(&report, config.out.as_deref())?;
            Ok(0)
        }
        Command::Sweep { common } => {
            let config = build_config(&common)?;
            let Inputs { space, family, subset } = load_inputs(&config)?;
            let report = convergence::sweep(&space, &family, &config.k_list, config.rho, config.kernel, &subset)
                .map_err(invariant)?;
            emit(&report, config.out.as_deref())?;
            verdict(report.trend.all_bounds_satisfied, || {
                let failed: Vec<String> = report
                    .scales
                    .iter()
                    .flat_map(|s| s.functions.iter().filter(|f| !f.ok).map(move |f| (s.k, f)))
                    .map(|(k, f)| format!("k={k} {}: error {} > bound {}", f.name, f.error, f.bound))
                    .collect();
                failed.join("; ")
            })
        }
        Command::Equicontinuity { common, delta, epsilon } => {
            let config = build_config(&common)?;
            let Inputs { space, family, subset } = load_inputs(&config)?;
            let report = convergence::equicontinuity_check(&space, &family, &subset, delta, epsilon)
                .map_err(CliError::input)?;
            emit(&report, config.out.as_deref())?;
            if report.verdict == Verdict::Fail {
                if let Some(w) = &report.witness {
                    eprintln!(
                        "not equicontinuous at scale: {} has |f({}) - f({})| = {} at distance {}",
                        w.name, w.s, w.x, w.gap, w.distance
                    );
                }
            }
            Ok(0)
        }
        Command::OracleCheck { common } => {
            let config = build_config(&common)?;
            config.validate()?;
            let space = load_space(config.cloud.as_deref(), config.metric.as_deref())?;
            let mut checks = Vec::new();
            for &k in &config.k_list {
                checks.push(oracle::oracle_check(&space, k, config.rho, config.kernel).map_err(|e| match e {
                    OracleError::TooLarge(_) => CliError::input(e),
                    other => invariant(other),
                })?);
            }
            let pass = checks.iter().all(|c| c.pass);
            emit(&json!({ "pass": pass, "checks": checks }), config.out.as_deref())?;
            verdict(pass, || {
                let failed: Vec<String> = checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| {
                        format!(
                            "k={}: dense vs sparse {}, rank-one {}, identity {:?}",
                            c.k, c.dense_vs_sparse, c.rank_one_deviation, c.identity_deviation
                        )
                    })
                    .collect();
                failed.join("; ")
            })
        }
        Command::Report { input, format, out } => {
            let text = pou_approx::metric_space::load::read_to_string(&input)?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}:{}: {e}", input.display(), e.line())))?;
            match format {
                Format::Json => emit(&value, out.as_deref())?,
                Format::Csv => {
                    let csv =
                        flatten_report_csv(&value).map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
                    write_text(&csv, out.as_deref())?;
                }
            }
            Ok(0)
        }
        Command::Run { common, oracle } => {
            let mut config = build_config(&common)?;
            config.oracle |= oracle;
            let outcome = run(&config)?;
            emit(&outcome.report, config.out.as_deref())?;
            verdict(outcome.report.pass, || outcome.failures.join("; "))
        }
    }
}

fn write_triplets(pou: &PartitionOfUnity<'_>, eval: &[usize], path: &Path) -> Result<(), CliError> {
    let matrix = operator::as_matrix(pou, eval).map_err(invariant)?;
    let file = fs::File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    matrix
        .write_csv_triplets(io::BufWriter::new(file))
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
