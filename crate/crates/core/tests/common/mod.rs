#![allow(dead_code)]

use pou_approx::function::{Anchor, Monomial};
use pou_approx::{BumpKernel, FamilyMember, FunctionOnM, MetricKind, MetricSpace, PointCloud};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const K_LIST: [u32; 7] = [1, 2, 4, 8, 16, 32, 64];
pub const RHO: f64 = 0.99;

pub struct Fixture {
    pub name: &'static str,
    pub space: MetricSpace,
}

/// `{0, 1/m, ..., 1}` on the line.
pub fn grid(m: usize) -> MetricSpace {
    MetricSpace::euclidean((0..=m).map(|i| vec![i as f64 / m as f64]).collect()).unwrap()
}

pub fn random_plane(n: usize, seed: u64) -> MetricSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
    MetricSpace::euclidean(rows).unwrap()
}

fn random_coords(n: usize, rng: &mut ChaCha8Rng) -> PointCloud {
    PointCloud::from_coords((0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect()).unwrap()
}

/// Discrete metric; coordinates are attached only so coordinate presets evaluate.
pub fn discrete(n: usize, seed: u64) -> MetricSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MetricSpace::new(random_coords(n, &mut rng), MetricKind::Discrete).unwrap()
}

/// Path graph with unit-length total, labelled by arc length.
pub fn path_graph(n: usize) -> MetricSpace {
    let step = 1.0 / (n - 1) as f64;
    let cloud = PointCloud::from_coords((0..n).map(|i| vec![i as f64 * step]).collect()).unwrap();
    let edges = (1..n).map(|i| (i - 1, i, step)).collect();
    MetricSpace::new(cloud, MetricKind::GraphShortestPath { edges }).unwrap()
}

/// Symmetric table with off-diagonal entries in `[0.5, 1]`, which always
/// satisfies the triangle inequality.
pub fn random_table(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = rng.random_range(0.5..=1.0);
            table[i][j] = d;
            table[j][i] = d;
        }
    }
    table
}

pub fn precomputed(n: usize, seed: u64) -> MetricSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
    let cloud = random_coords(n, &mut rng);
    MetricSpace::new(cloud, MetricKind::Precomputed { table: random_table(n, seed) }).unwrap()
}

pub fn acceptance_spaces() -> Vec<Fixture> {
    vec![
        Fixture { name: "grid-1d-257", space: grid(256) },
        Fixture { name: "plane-500", space: random_plane(500, 7) },
        Fixture { name: "discrete-50", space: discrete(50, 11) },
        Fixture { name: "path-graph-100", space: path_graph(100) },
        Fixture { name: "precomputed-64", space: precomputed(64, 13) },
    ]
}

/// constant, projection, cones with L ∈ {1, 5}, a polynomial, sin for ν ∈ {1,2,4,8}.
pub fn presets() -> Vec<FamilyMember> {
    let mut fs = vec![
        FunctionOnM::Constant(1.0),
        FunctionOnM::Projection { axis: 0 },
        FunctionOnM::Cone { lipschitz: 1.0, anchor: Anchor::Point(0) },
        FunctionOnM::Cone { lipschitz: 5.0, anchor: Anchor::Point(0) },
        FunctionOnM::Polynomial(vec![
            Monomial { coef: 1.0, powers: vec![0] },
            Monomial { coef: -2.0, powers: vec![1] },
            Monomial { coef: 3.0, powers: vec![2] },
        ]),
    ];
    fs.extend([1.0, 2.0, 4.0, 8.0].map(|nu| FunctionOnM::Sine { frequency: nu, axis: 0 }));
    fs.into_iter().map(FamilyMember::new).collect()
}

/// `max |f(s) − f(x)|` over pairs of `domain` with `d(s,x) < δ`, by double loop.
pub fn brute_modulus(space: &MetricSpace, values: &[f64], domain: &[usize], delta: f64) -> f64 {
    let mut omega: f64 = 0.0;
    for &s in domain {
        for &x in domain {
            if space.distance(s, x).unwrap() < delta {
                omega = omega.max((values[s] - values[x]).abs());
            }
        }
    }
    omega
}

/// Textbook kernel formulas in `u = d/h`.
pub fn phi(kernel: BumpKernel, u: f64) -> f64 {
    if u >= 1.0 {
        return 0.0;
    }
    match kernel {
        BumpKernel::Hat => 1.0 - u,
        BumpKernel::Cosine => 0.5 * (1.0 + (std::f64::consts::PI * u).cos()),
        BumpKernel::WendlandC2 => (1.0 - u).powi(4) * (1.0 + 4.0 * u),
    }
}

/// Greedy net: admit `x` iff it is at distance ≥ r from every earlier center.
pub fn reference_net(space: &MetricSpace, r: f64) -> Vec<usize> {
    let mut centers: Vec<usize> = Vec::new();
    for x in 0..space.len() {
        if centers.iter().all(|&t| space.distance(x, t).unwrap() >= r) {
            centers.push(x);
        }
    }
    centers
}

/// Dense `W[x][t]` built in test code from the reference net and textbook kernels.
pub fn reference_weights(space: &MetricSpace, k: u32, rho: f64, kernel: BumpKernel) -> Vec<Vec<f64>> {
    let h = rho / k as f64;
    let centers = reference_net(space, rho / (2.0 * k as f64));
    let n = space.len();
    (0..n)
        .map(|x| {
            let mut row = vec![0.0; n];
            for &t in &centers {
                row[t] = phi(kernel, space.distance(x, t).unwrap() / h);
            }
            let z: f64 = row.iter().sum();
            row.iter().map(|w| w / z).collect()
        })
        .collect()
}

pub fn matvec(w: &[Vec<f64>], f: &[f64]) -> Vec<f64> {
    w.iter().map(|row| row.iter().zip(f).map(|(a, b)| a * b).sum()).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
