//! Normalized compactly supported bumps over a net.
//!
//! For a center `t` and point `x`, the raw bump is `φ(d(x,t)/h)` with `h = ρ/k`
//! and the partition function is `η_t(x) = φ(d(x,t)/h) / Z(x)`, where
//! `Z(x) = Σ_s φ(d(x,s)/h)` runs over the centers active at `x` in ascending
//! index order.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::{CoverError, Net, Scale};
use crate::metric_space::MetricSpace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("partition denominator Z({x}) = {z} is not positive")]
    ZeroDenominator { x: usize, z: f64 },
    #[error("index {0} is not a center")]
    NotACenter(usize),
    #[error(transparent)]
    Cover(#[from] CoverError),
}

/// Profile `φ: [0,∞) → [0,1]` with `φ(0) = 1`, nonincreasing, positive on
/// `[0,1)` and zero on `[1,∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpKernel {
    /// `1 − u`
    Hat,
    /// `(1 + cos πu)/2`
    Cosine,
    /// `(1 − u)⁴ (4u + 1)`
    #[serde(rename = "wendland", alias = "wendland_c2")]
    WendlandC2,
}

impl BumpKernel {
    pub const ALL: [BumpKernel; 3] = [BumpKernel::Hat, BumpKernel::Cosine, BumpKernel::WendlandC2];

    pub fn name(self) -> &'static str {
        match self {
            BumpKernel::Hat => "hat",
            BumpKernel::Cosine => "cosine",
            BumpKernel::WendlandC2 => "wendland",
        }
    }

    /// φ(u).
    pub fn phi(self, u: f64) -> f64 {
        if u < 1.0 {
            self.profile(1.0 - u.max(0.0))
        } else {
            0.0
        }
    }

    /// φ written in the gap `v = 1 − u`, so that values near the support
    /// boundary stay positive instead of cancelling to zero.
    fn profile(self, v: f64) -> f64 {
        match self {
            BumpKernel::Hat => v,
            BumpKernel::Cosine => {
                let s = (FRAC_PI_2 * v).sin();
                s * s
            }
            BumpKernel::WendlandC2 => {
                let v2 = v * v;
                v2 * v2 * (5.0 - 4.0 * v)
            }
        }
    }

    /// Raw bump at distance `d` with support radius `h`: positive iff `d < h`.
    #[inline]
    pub fn weight(self, d: f64, h: f64) -> f64 {
        if d < h {
            self.profile((h - d) / h)
        } else {
            0.0
        }
    }
}

impl fmt::Display for BumpKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BumpKernel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hat" => Ok(BumpKernel::Hat),
            "cosine" => Ok(BumpKernel::Cosine),
            "wendland" | "wendland_c2" => Ok(BumpKernel::WendlandC2),
            other => Err(format!("unknown kernel {other:?} (expected hat, cosine or wendland)")),
        }
    }
}

/// The family `{η_t}` at one scale, bound to its space.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity<'a> {
    space: &'a MetricSpace,
    net: Net,
    kernel: BumpKernel,
}

impl<'a> PartitionOfUnity<'a> {
    pub fn new(space: &'a MetricSpace, net: Net, kernel: BumpKernel) -> Self {
        Self { space, net, kernel }
    }

    /// Greedy net at `scale`, then the normalized bumps over it.
    pub fn build(space: &'a MetricSpace, scale: Scale, kernel: BumpKernel) -> Self {
        Self::new(space, Net::build_greedy(space, scale), kernel)
    }

    pub fn space(&self) -> &'a MetricSpace {
        self.space
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn kernel(&self) -> BumpKernel {
        self.kernel
    }

    pub fn scale(&self) -> Scale {
        self.net.scale()
    }

    pub fn support_radius(&self) -> f64 {
        self.net.scale().support_radius()
    }

    /// All nonzero `η_t(x)` as `(t, weight)` pairs in ascending center order.
    pub fn eval_all(&self, x: usize) -> Result<Vec<(usize, f64)>, PartitionError> {
        let h = self.support_radius();
        let mut weights: Vec<(usize, f64)> = self
            .net
            .active_centers(self.space, x)?
            .into_iter()
            .map(|t| (t, self.kernel.weight(self.space.dist(x, t), h)))
            .collect();
        let z: f64 = weights.iter().map(|&(_, w)| w).sum();
        if !(z > 0.0) {
            return Err(PartitionError::ZeroDenominator { x, z });
        }
        for (_, w) in &mut weights {
            *w /= z;
        }
        Ok(weights)
    }

    /// `η_t(x)`; zero when `t` is not active at `x`.
    pub fn eval_bump(&self, t: usize, x: usize) -> Result<f64, PartitionError> {
        if !self.net.is_center(t) {
            return Err(PartitionError::NotACenter(t));
        }
        Ok(self
            .eval_all(x)?
            .into_iter()
            .find(|&(s, _)| s == t)
            .map_or(0.0, |(_, w)| w))
    }
}
