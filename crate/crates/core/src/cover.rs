//! Greedy nets and the ball covers they induce.
//!
//! At scale `(k, ρ)` the net radius is `r = ρ/(2k)` and every bump is supported
//! in the ball of radius `h = ρ/k = 2r` around its center. The greedy scan gives
//! an r-net: every point lies within `< r` of a center and centers are pairwise
//! `≥ r` apart. Since `r < h`, every point sits strictly inside some support.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric_space::{CompactSubset, MetricError, MetricSpace};

pub const DEFAULT_RHO: f64 = 0.99;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("scale k must be a positive integer, got {0}")]
    InvalidK(u32),
    #[error("shrink factor rho must lie in (0, 1], got {0}")]
    InvalidRho(f64),
    #[error("point {x} has no center within the support radius")]
    Uncovered { x: usize },
    #[error("point {x} is at distance {nearest} from the nearest center, net radius is {radius}")]
    CoveringViolated { x: usize, nearest: f64, radius: f64 },
    #[error("centers {s} and {t} are {distance} apart, below the net radius {radius}")]
    SeparationViolated { s: usize, t: usize, distance: f64, radius: f64 },
    #[error("net radius {found} does not match rho/(2k) = {expected}")]
    RadiusMismatch { expected: f64, found: f64 },
    #[error("index {0} is not a center of the net")]
    NotACenter(usize),
    #[error("net has no centers")]
    Empty,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// The pair `(k, ρ)` fixing the net radius `ρ/(2k)` and support radius `ρ/k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scale {
    k: u32,
    rho: f64,
}

impl Scale {
    pub fn new(k: u32, rho: f64) -> Result<Self, CoverError> {
        if k == 0 {
            return Err(CoverError::InvalidK(k));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(CoverError::InvalidRho(rho));
        }
        Ok(Self { k, rho })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// h = ρ/k
    pub fn support_radius(&self) -> f64 {
        self.rho / f64::from(self.k)
    }

    /// r = ρ/(2k)
    pub fn net_radius(&self) -> f64 {
        self.rho / (2.0 * f64::from(self.k))
    }

    /// With ρ = 1 the closed support may touch the boundary of the open 1/k-ball.
    pub fn open_support_only(&self) -> bool {
        self.rho == 1.0
    }

    /// `d < ρ/k`: the bump centred at distance `d` may be nonzero.
    #[inline]
    pub fn within_support(&self, d: f64) -> bool {
        d < self.support_radius()
    }
}

/// Persistent form of a net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetRecord {
    pub k: u32,
    pub rho: f64,
    pub r: f64,
    pub centers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    scale: Scale,
    centers: Vec<usize>,
    // slot[i] = position of cloud point i in `centers`
    slot: Vec<Option<usize>>,
}

impl Net {
    /// Greedy scan in ascending index order: admit a point iff it is at distance
    /// `≥ r` from every center admitted so far.
    pub fn build_greedy(space: &MetricSpace, scale: Scale) -> Self {
        let r = scale.net_radius();
        let mut centers: Vec<usize> = Vec::new();
        for x in 0..space.len() {
            if centers.iter().all(|&t| space.dist(x, t) >= r) {
                centers.push(x);
            }
        }
        Self::from_centers(space.len(), scale, centers)
    }

    fn from_centers(n: usize, scale: Scale, centers: Vec<usize>) -> Self {
        let mut slot = vec![None; n];
        for (pos, &t) in centers.iter().enumerate() {
            slot[t] = Some(pos);
        }
        Self { scale, centers, slot }
    }

    /// Rebuild a persisted net, re-checking it against `space`.
    pub fn from_record(space: &MetricSpace, record: &NetRecord) -> Result<Self, CoverError> {
        let scale = Scale::new(record.k, record.rho)?;
        if record.r != scale.net_radius() {
            return Err(CoverError::RadiusMismatch { expected: scale.net_radius(), found: record.r });
        }
        if record.centers.is_empty() {
            return Err(CoverError::Empty);
        }
        let subset = CompactSubset::new(record.centers.clone(), space.len())?;
        let net = Self::from_centers(space.len(), scale, subset.indices().to_vec());
        net.verify(space)?;
        Ok(net)
    }

    pub fn to_record(&self) -> NetRecord {
        NetRecord {
            k: self.scale.k,
            rho: self.scale.rho,
            r: self.scale.net_radius(),
            centers: self.centers.clone(),
        }
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    /// Center indices in ascending order.
    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Position of cloud point `t` in [`Net::centers`], if it is a center.
    pub fn position(&self, t: usize) -> Option<usize> {
        self.slot.get(t).copied().flatten()
    }

    pub fn is_center(&self, t: usize) -> bool {
        self.position(t).is_some()
    }

    /// Exhaustive check of covering (`< r`) and separation (`≥ r`).
    pub fn verify(&self, space: &MetricSpace) -> Result<(), CoverError> {
        let radius = self.scale.net_radius();
        for x in 0..space.len() {
            let nearest = self.centers.iter().map(|&t| space.dist(x, t)).fold(f64::INFINITY, f64::min);
            if !(nearest < radius) {
                return Err(CoverError::CoveringViolated { x, nearest, radius });
            }
        }
        for (a, &s) in self.centers.iter().enumerate() {
            for &t in &self.centers[a + 1..] {
                let distance = space.dist(s, t);
                if distance < radius {
                    return Err(CoverError::SeparationViolated { s, t, distance, radius });
                }
            }
        }
        Ok(())
    }

    /// Centers whose bump can be nonzero at `x`: `{t : d(x,t) < ρ/k}`, ascending.
    pub fn active_centers(&self, space: &MetricSpace, x: usize) -> Result<Vec<usize>, CoverError> {
        if x >= space.len() {
            return Err(MetricError::IndexOutOfRange { index: x, len: space.len() }.into());
        }
        let active: Vec<usize> = self
            .centers
            .iter()
            .copied()
            .filter(|&t| self.scale.within_support(space.dist(x, t)))
            .collect();
        if active.is_empty() {
            return Err(CoverError::Uncovered { x });
        }
        Ok(active)
    }

    /// The finite set of centers whose bumps do not vanish on `subset`.
    pub fn active_centers_on(&self, space: &MetricSpace, subset: &CompactSubset) -> Result<Vec<usize>, CoverError> {
        let mut hit = vec![false; self.centers.len()];
        for &x in subset.indices() {
            for t in self.active_centers(space, x)? {
                if let Some(pos) = self.position(t) {
                    hit[pos] = true;
                }
            }
        }
        Ok(self.centers.iter().zip(&hit).filter(|(_, &h)| h).map(|(&t, _)| t).collect())
    }

    pub fn multiplicity(&self, space: &MetricSpace, eval_points: &[usize]) -> Result<Multiplicity, CoverError> {
        let mut histogram = BTreeMap::new();
        let mut max = 0;
        for &x in eval_points {
            let m = self.active_centers(space, x)?.len();
            max = max.max(m);
            *histogram.entry(m).or_insert(0) += 1;
        }
        Ok(Multiplicity { max, histogram })
    }
}

/// Distribution of active-center counts over a set of evaluation points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Multiplicity {
    pub max: usize,
    pub histogram: BTreeMap<usize, usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, step: f64) -> MetricSpace {
        MetricSpace::euclidean((0..n).map(|i| vec![i as f64 * step]).collect()).unwrap()
    }

    fn tenths() -> MetricSpace {
        MetricSpace::euclidean((0..=10).map(|i| vec![i as f64 / 10.0]).collect()).unwrap()
    }

    #[test]
    fn scale_validation() {
        assert_eq!(Scale::new(0, 0.5), Err(CoverError::InvalidK(0)));
        assert!(matches!(Scale::new(1, 0.0), Err(CoverError::InvalidRho(_))));
        assert!(matches!(Scale::new(1, 1.5), Err(CoverError::InvalidRho(_))));
        assert!(matches!(Scale::new(1, f64::NAN), Err(CoverError::InvalidRho(_))));
        let s = Scale::new(4, 1.0).unwrap();
        assert_eq!((s.support_radius(), s.net_radius()), (0.25, 0.125));
        assert!(s.open_support_only());
    }

    #[test]
    fn single_point() {
        let space = grid(1, 1.0);
        for k in [1, 7, 64] {
            let net = Net::build_greedy(&space, Scale::new(k, 0.99).unwrap());
            assert_eq!(net.centers(), &[0]);
            assert_eq!(net.active_centers(&space, 0).unwrap(), vec![0]);
            assert_eq!(net.multiplicity(&space, &[0]).unwrap().max, 1);
        }
    }

    #[test]
    fn tenths_grid_scan() {
        let space = tenths();
        let net = Net::build_greedy(&space, Scale::new(1, 1.0).unwrap());
        assert_eq!(net.centers(), &[0, 5, 10]);
        net.verify(&space).unwrap();
        // x = 0.2: d = 0.2, 0.3, 0.8 → all three lie inside the support radius 1
        assert_eq!(net.active_centers(&space, 2).unwrap(), vec![0, 5, 10]);
    }

    #[test]
    fn isolated_center_subset() {
        let space = MetricSpace::euclidean(vec![vec![0.0], vec![5.0], vec![10.0]]).unwrap();
        let net = Net::build_greedy(&space, Scale::new(1, 0.99).unwrap());
        let t = CompactSubset::new(vec![1], 3).unwrap();
        assert_eq!(net.active_centers_on(&space, &t).unwrap(), vec![1]);
    }

    #[test]
    fn grid_multiplicity_bounded_by_packing() {
        // support 2r on a line holds at most 4 r-separated centers strictly inside
        let space = grid(257, 1.0 / 256.0);
        for k in [1, 3, 8, 32] {
            let net = Net::build_greedy(&space, Scale::new(k, 0.99).unwrap());
            let all: Vec<usize> = (0..space.len()).collect();
            assert!(net.multiplicity(&space, &all).unwrap().max <= 4);
        }
    }

    #[test]
    fn record_round_trip_and_rejection() {
        let space = tenths();
        let net = Net::build_greedy(&space, Scale::new(2, 0.99).unwrap());
        let record = net.to_record();
        let json = serde_json::to_string(&record).unwrap();
        let back: NetRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(Net::from_record(&space, &back).unwrap(), net);

        let mut sparse = record.clone();
        sparse.centers = vec![0];
        assert!(matches!(Net::from_record(&space, &sparse), Err(CoverError::CoveringViolated { .. })));
        let mut crowded = record;
        crowded.centers = (0..=10).collect();
        assert!(matches!(Net::from_record(&space, &crowded), Err(CoverError::SeparationViolated { .. })));
    }

    #[test]
    fn out_of_range_query() {
        let space = tenths();
        let net = Net::build_greedy(&space, Scale::new(1, 0.99).unwrap());
        assert!(matches!(net.active_centers(&space, 99), Err(CoverError::Metric(_))));
    }
}
