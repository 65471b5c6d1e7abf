//! Partition-of-unity approximation on finite metric spaces.
//!
//! A point cloud with a metric is covered by greedy nets at scales `ρ/k`; a
//! bump kernel normalized over the active centers gives a partition of unity
//! `{η_t}`, and `P f = Σ_t f(t) η_t` is a finite-rank operator that reproduces
//! constants and converges to the identity on every compact subset. The error
//! on `T` is certified by the modulus of continuity of `f` at the support radius.
//!
//! ```
//! use pou_approx::{operator, BumpKernel, FunctionOnM, MetricSpace, PartitionOfUnity, Scale};
//!
//! let space = MetricSpace::euclidean((0..=10).map(|i| vec![i as f64 / 10.0]).collect()).unwrap();
//! let pou = PartitionOfUnity::build(&space, Scale::new(4, 0.99).unwrap(), BumpKernel::Hat);
//! let all: Vec<usize> = (0..space.len()).collect();
//! let values = operator::apply(&pou, &FunctionOnM::Constant(3.0), &all).unwrap();
//! assert!(values.iter().all(|v| (v - 3.0).abs() <= 1e-12));
//! ```

pub mod cli_io;
pub mod convergence;
pub mod cover;
pub mod function;
pub mod metric_space;
pub mod operator;
pub mod oracle;
pub mod parallel;
pub mod partition;
pub mod tolerance;

pub use convergence::{equicontinuity_check, sweep, ConvergenceReport, EquicontinuityReport, Verdict};
pub use cover::{Net, Scale, DEFAULT_RHO};
pub use function::{FamilyMember, FunctionOnM};
pub use metric_space::{CompactSubset, MetricKind, MetricSpace, PointCloud};
pub use operator::FiniteRankOperator;
pub use partition::{BumpKernel, PartitionOfUnity};
