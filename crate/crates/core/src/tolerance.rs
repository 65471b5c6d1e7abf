//! Numerical tolerances shared across the crate.

/// Bound on |Σ_t η_t(x) − 1| for every evaluated point.
pub const PARTITION_SUM_TOL: f64 = 1e-9;

/// Slack for identities that hold up to a handful of roundings: the certified
/// error bound, constant reproduction, partial-sum exactness, oracle agreement.
pub const EXACT_TOL: f64 = 1e-12;

/// Largest |d(i,j) − d(j,i)| accepted when loading a precomputed table.
pub const TABLE_SYMMETRY_TOL: f64 = 1e-12;

/// Relative slack for the triangle inequality, scaled by max(1, d(i,l) + d(l,j)).
pub const TRIANGLE_TOL: f64 = 1e-12;
