//! Finite samples of a metric space and their distance oracle.
//!
//! A [`MetricSpace`] pairs a [`PointCloud`] with a [`MetricKind`]. Graph and
//! precomputed metrics are resolved to a dense all-pairs table at load, so every
//! distance query afterwards is O(1) (or O(dim) for coordinate metrics).
//! Everything is immutable after construction.

mod graph;
pub mod load;
mod validate;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use validate::{ValidationReport, Violation};

use crate::tolerance::TABLE_SYMMETRY_TOL;

/// Largest cloud accepted for graph metrics (the all-pairs table is n²).
pub const MAX_GRAPH_POINTS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("duplicate point id {id:?} at indices {first} and {second}")]
    DuplicateId { id: String, first: usize, second: usize },
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("point {index} has a non-finite coordinate")]
    NonFiniteCoordinate { index: usize },
    #[error("{metric} metric needs coordinates, point {index} has none")]
    MissingCoordinates { metric: &'static str, index: usize },
    #[error("points {first} and {second} coincide (distance 0)")]
    DuplicatePoint { first: usize, second: usize },
    #[error("index {index} out of range for a cloud of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("distance table is {rows}x{cols}, cloud has {n} points")]
    TableShape { rows: usize, cols: usize, n: usize },
    #[error("distance table entry ({i},{j}) is not finite")]
    NonFiniteDistance { i: usize, j: usize },
    #[error("edge {edge} = ({i},{j},{weight}) is invalid: {reason}")]
    InvalidEdge { edge: usize, i: usize, j: usize, weight: f64, reason: &'static str },
    #[error("graph is disconnected: no path between {i} and {j}")]
    Disconnected { i: usize, j: usize },
    #[error("graph metric supports at most {MAX_GRAPH_POINTS} points, got {n}")]
    GraphTooLarge { n: usize },
    #[error("need at least two points, got {n}")]
    TooFewPoints { n: usize },
    #[error("subset is empty")]
    EmptySubset,
    #[error("subset lists index {index} twice")]
    RepeatedIndex { index: usize },
    #[error("anchor has dimension {found}, cloud has dimension {expected}")]
    AnchorDimension { expected: usize, found: usize },
    #[error("{metric} metric has no coordinate form")]
    NotACoordinateMetric { metric: &'static str },
}

/// One sample point: an opaque id plus optional coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

impl Point {
    pub fn new(id: impl Into<String>, coords: Option<Vec<f64>>) -> Self {
        Self { id: id.into(), coords }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point>,
    dim: Option<usize>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Result<Self, MetricError> {
        if points.is_empty() {
            return Err(MetricError::EmptyCloud);
        }
        let mut seen = std::collections::HashMap::with_capacity(points.len());
        let mut dim = None;
        for (index, p) in points.iter().enumerate() {
            if let Some(first) = seen.insert(p.id.as_str(), index) {
                return Err(MetricError::DuplicateId { id: p.id.clone(), first, second: index });
            }
            if let Some(c) = &p.coords {
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(MetricError::NonFiniteCoordinate { index });
                }
                match dim {
                    None => dim = Some(c.len()),
                    Some(expected) if expected != c.len() => {
                        return Err(MetricError::DimensionMismatch { index, expected, found: c.len() })
                    }
                    _ => {}
                }
            }
        }
        Ok(Self { points, dim })
    }

    /// Cloud with ids `"0".."n-1"` and the given coordinates.
    pub fn from_coords(rows: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        Self::new(
            rows.into_iter()
                .enumerate()
                .map(|(i, c)| Point::new(i.to_string(), Some(c)))
                .collect(),
        )
    }

    /// Coordinate-free cloud of `n` points, for discrete, graph and tabulated metrics.
    pub fn anonymous(n: usize) -> Result<Self, MetricError> {
        Self::new((0..n).map(|i| Point::new(i.to_string(), None)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn coords(&self, i: usize) -> Option<&[f64]> {
        self.points.get(i).and_then(|p| p.coords.as_deref())
    }

    pub fn id(&self, i: usize) -> &str {
        &self.points[i].id
    }
}

/// Which distance the space uses. Graph and precomputed variants carry their data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    Euclidean,
    Manhattan,
    Chebyshev,
    /// Shortest-path distance over an undirected weighted edge list `(i, j, w)`.
    GraphShortestPath { edges: Vec<(usize, usize, f64)> },
    Discrete,
    /// Full n×n table, row-major.
    Precomputed { table: Vec<Vec<f64>> },
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Manhattan => "manhattan",
            MetricKind::Chebyshev => "chebyshev",
            MetricKind::GraphShortestPath { .. } => "graph_shortest_path",
            MetricKind::Discrete => "discrete",
            MetricKind::Precomputed { .. } => "precomputed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Norm {
    L2,
    L1,
    LInf,
}

impl Norm {
    fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Norm::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Norm::L1 => diffs.sum(),
            Norm::LInf => diffs.fold(0.0, f64::max),
        }
    }
}

/// Dense row-major n×n distance table.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DistanceTable {
    n: usize,
    data: Vec<f64>,
}

impl DistanceTable {
    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Oracle {
    Coordinates(Norm),
    Discrete,
    Table(DistanceTable),
}

/// A validated finite metric space: cloud + distance oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    cloud: PointCloud,
    kind: &'static str,
    oracle: Oracle,
}

impl MetricSpace {
    pub fn new(cloud: PointCloud, kind: MetricKind) -> Result<Self, MetricError> {
        let name = kind.name();
        let oracle = match kind {
            MetricKind::Euclidean => Oracle::Coordinates(Norm::L2),
            MetricKind::Manhattan => Oracle::Coordinates(Norm::L1),
            MetricKind::Chebyshev => Oracle::Coordinates(Norm::LInf),
            MetricKind::Discrete => Oracle::Discrete,
            MetricKind::GraphShortestPath { edges } => {
                Oracle::Table(graph::all_pairs_shortest_paths(cloud.len(), &edges)?)
            }
            MetricKind::Precomputed { table } => Oracle::Table(table_from_rows(cloud.len(), table)?),
        };
        if let Oracle::Coordinates(_) = oracle {
            if let Some(index) = (0..cloud.len()).find(|&i| cloud.coords(i).is_none()) {
                return Err(MetricError::MissingCoordinates { metric: name, index });
            }
            reject_duplicate_coords(&cloud)?;
        }
        if let Oracle::Table(t) = &oracle {
            for i in 0..t.n {
                for j in (i + 1)..t.n {
                    if t.get(i, j) == 0.0 {
                        return Err(MetricError::DuplicatePoint { first: i, second: j });
                    }
                }
            }
        }
        Ok(Self { cloud, kind: name, oracle })
    }

    pub fn euclidean(rows: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        Self::new(PointCloud::from_coords(rows)?, MetricKind::Euclidean)
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    pub fn metric_name(&self) -> &'static str {
        self.kind
    }

    pub fn has_coordinate_metric(&self) -> bool {
        matches!(self.oracle, Oracle::Coordinates(_))
    }

    /// Checked distance query.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64, MetricError> {
        let len = self.len();
        for index in [i, j] {
            if index >= len {
                return Err(MetricError::IndexOutOfRange { index, len });
            }
        }
        Ok(self.dist(i, j))
    }

    /// Unchecked distance query for hot loops.
    ///
    /// # Panics
    /// If `i` or `j` is out of range.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.oracle {
            Oracle::Coordinates(norm) => {
                let pts = self.cloud.points();
                // coordinate presence checked in `new`
                norm.distance(
                    pts[i].coords.as_deref().unwrap_or(&[]),
                    pts[j].coords.as_deref().unwrap_or(&[]),
                )
            }
            Oracle::Discrete => {
                assert!(i < self.len() && j < self.len(), "index out of range");
                if i == j {
                    0.0
                } else {
                    1.0
                }
            }
            Oracle::Table(t) => t.get(i, j),
        }
    }

    /// Distance from sample point `i` to an arbitrary coordinate vector, under
    /// the space's norm. Only defined for coordinate metrics.
    pub fn distance_to_coords(&self, i: usize, anchor: &[f64]) -> Result<f64, MetricError> {
        let Oracle::Coordinates(norm) = self.oracle else {
            return Err(MetricError::NotACoordinateMetric { metric: self.kind });
        };
        let len = self.len();
        let c = self
            .cloud
            .coords(i)
            .ok_or(MetricError::IndexOutOfRange { index: i, len })?;
        if c.len() != anchor.len() {
            return Err(MetricError::AnchorDimension { expected: c.len(), found: anchor.len() });
        }
        Ok(norm.distance(c, anchor))
    }

    pub fn validate(&self, trial_count: usize, seed: u64) -> ValidationReport {
        validate::validate_metric(self, trial_count, seed)
    }

    /// Smallest distance between two distinct sample points.
    pub fn min_pairwise_distance(&self) -> Result<f64, MetricError> {
        let n = self.len();
        if n < 2 {
            return Err(MetricError::TooFewPoints { n });
        }
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.dist(i, j);
                if d <= 0.0 {
                    return Err(MetricError::DuplicatePoint { first: i, second: j });
                }
                best = best.min(d);
            }
        }
        Ok(best)
    }
}

fn table_from_rows(n: usize, rows: Vec<Vec<f64>>) -> Result<DistanceTable, MetricError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        let cols = rows.iter().map(Vec::len).find(|&c| c != n).unwrap_or(n);
        return Err(MetricError::TableShape { rows: rows.len(), cols, n });
    }
    for (i, row) in rows.iter().enumerate() {
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(MetricError::NonFiniteDistance { i, j });
        }
    }
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (forward, backward) = (rows[i][j], rows[j][i]);
            // symmetrize sub-tolerance noise so d(i,j) == d(j,i) bit for bit;
            // larger asymmetry is kept for the validator to report
            let symmetric = i != j && (forward - backward).abs() <= TABLE_SYMMETRY_TOL;
            data.push(if symmetric { 0.5 * (forward + backward) } else { forward });
        }
    }
    Ok(DistanceTable { n, data })
}

fn reject_duplicate_coords(cloud: &PointCloud) -> Result<(), MetricError> {
    let mut order: Vec<usize> = (0..cloud.len()).collect();
    let key = |i: usize| cloud.coords(i).unwrap_or(&[]);
    let cmp = |a: &usize, b: &usize| -> Ordering {
        key(*a)
            .iter()
            .zip(key(*b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    };
    order.sort_by(cmp);
    for w in order.windows(2) {
        // -0.0 and 0.0 compare unequal under total_cmp but coincide as points
        if key(w[0]).iter().zip(key(w[1])).all(|(x, y)| x == y) {
            let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(MetricError::DuplicatePoint { first, second });
        }
    }
    Ok(())
}

/// A nonempty set of distinct sample indices, kept in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CompactSubset(Vec<usize>);

impl CompactSubset {
    pub fn new(mut indices: Vec<usize>, len: usize) -> Result<Self, MetricError> {
        if indices.is_empty() {
            return Err(MetricError::EmptySubset);
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= len) {
            return Err(MetricError::IndexOutOfRange { index, len });
        }
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(MetricError::RepeatedIndex { index: w[0] });
        }
        Ok(Self(indices))
    }

    /// The whole sample.
    pub fn all(space: &MetricSpace) -> Self {
        Self((0..space.len()).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }
}

impl fmt::Display for CompactSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} points", self.0.len())
    }
}
