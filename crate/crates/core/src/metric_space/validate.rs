use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::MetricSpace;
use crate::tolerance::TRIANGLE_TOL;

/// All pairs are checked for symmetry and the zero diagonal up to this many points.
pub const ALL_PAIRS_CAP: usize = 2048;
/// All ordered triples are checked for the triangle inequality up to this many points.
pub const ALL_TRIPLES_CAP: usize = 64;
/// At most this many witnesses are kept in a report.
pub const MAX_REPORTED_VIOLATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonzeroDiagonal { i: usize, value: f64 },
    Negative { i: usize, j: usize, value: f64 },
    Asymmetric { i: usize, j: usize, forward: f64, backward: f64 },
    Indiscernible { i: usize, j: usize },
    Triangle { i: usize, j: usize, l: usize, direct: f64, via: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::NonzeroDiagonal { i, value } => write!(f, "d({i},{i}) = {value} != 0"),
            Violation::Negative { i, j, value } => write!(f, "d({i},{j}) = {value} < 0"),
            Violation::Asymmetric { i, j, forward, backward } => {
                write!(f, "d({i},{j}) = {forward} != d({j},{i}) = {backward}")
            }
            Violation::Indiscernible { i, j } => write!(f, "d({i},{j}) = 0 for distinct points"),
            Violation::Triangle { i, j, l, direct, via } => write!(
                f,
                "triangle inequality fails for (i,j,l) = ({i},{j},{l}): d(i,j) = {direct} > d(i,l) + d(l,j) = {via}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub metric: &'static str,
    pub n: usize,
    pub pairs_checked: usize,
    pub triples_checked: usize,
    pub all_pairs: bool,
    pub all_triples: bool,
    pub seed: u64,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violation_count == 0
    }

    fn record(&mut self, v: Violation) {
        self.violation_count += 1;
        if self.violations.len() < MAX_REPORTED_VIOLATIONS {
            self.violations.push(v);
        }
    }
}

pub(super) fn validate_metric(space: &MetricSpace, trial_count: usize, seed: u64) -> ValidationReport {
    let n = space.len();
    let mut report = ValidationReport {
        metric: space.metric_name(),
        n,
        pairs_checked: 0,
        triples_checked: 0,
        all_pairs: n <= ALL_PAIRS_CAP,
        all_triples: n <= ALL_TRIPLES_CAP,
        seed,
        violation_count: 0,
        violations: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for i in 0..n {
        let value = space.dist(i, i);
        if value != 0.0 {
            report.record(Violation::NonzeroDiagonal { i, value });
        }
    }
    let check_pair = |report: &mut ValidationReport, i: usize, j: usize| {
        report.pairs_checked += 1;
        let (forward, backward) = (space.dist(i, j), space.dist(j, i));
        if forward < 0.0 {
            report.record(Violation::Negative { i, j, value: forward });
        }
        if forward != backward {
            report.record(Violation::Asymmetric { i, j, forward, backward });
        }
        if forward == 0.0 {
            report.record(Violation::Indiscernible { i, j });
        }
    };
    if report.all_pairs {
        for i in 0..n {
            for j in (i + 1)..n {
                check_pair(&mut report, i, j);
            }
        }
    } else {
        for _ in 0..trial_count {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i != j {
                check_pair(&mut report, i.min(j), i.max(j));
            }
        }
    }

    let check_triple = |report: &mut ValidationReport, i: usize, j: usize, l: usize| {
        report.triples_checked += 1;
        let direct = space.dist(i, j);
        let via = space.dist(i, l) + space.dist(l, j);
        if direct > via + TRIANGLE_TOL * via.max(1.0) {
            report.record(Violation::Triangle { i, j, l, direct, via });
        }
    };
    if report.all_triples {
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    check_triple(&mut report, i, j, l);
                }
            }
        }
    } else {
        for _ in 0..trial_count {
            let (i, j, l) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
            check_triple(&mut report, i, j, l);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_space::{MetricKind, PointCloud};

    #[test]
    fn discrete_is_clean_for_any_seed() {
        let space = MetricSpace::new(PointCloud::anonymous(10).unwrap(), MetricKind::Discrete).unwrap();
        for seed in 0..5 {
            assert!(space.validate(100, seed).is_valid());
        }
    }

    #[test]
    fn planted_triangle_violation_is_named() {
        let n = 6;
        let mut table: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        table[1][4] = 3.0;
        table[4][1] = 3.0;
        let space =
            MetricSpace::new(PointCloud::anonymous(n).unwrap(), MetricKind::Precomputed { table }).unwrap();
        let report = space.validate(10, 7);
        assert!(report.all_triples);
        assert!(!report.is_valid());
        // every violating triple routes (1,4) or (4,1) through some third point
        for v in &report.violations {
            match *v {
                Violation::Triangle { i, j, l, direct, via } => {
                    assert!((i, j) == (1, 4) || (i, j) == (4, 1));
                    assert!(l != 1 && l != 4);
                    assert_eq!((direct, via), (3.0, 2.0));
                }
                ref other => panic!("unexpected violation {other}"),
            }
        }
        assert_eq!(report.violation_count, 2 * (n - 2));
    }

    #[test]
    fn sampled_triples_above_cap() {
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64 * 0.37 % 1.0, i as f64]).collect();
        let space = MetricSpace::euclidean(rows).unwrap();
        let report = space.validate(500, 3);
        assert!(!report.all_triples);
        assert_eq!(report.triples_checked, 500);
        assert!(report.is_valid());
    }
}
