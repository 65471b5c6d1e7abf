mod common;

use std::collections::BTreeSet;

use common::{brute_modulus, max_abs_diff};
use num_complex::Complex64;
use pou_approx::function::ComplexFunction;
use pou_approx::{convergence, operator, BumpKernel, CompactSubset, FunctionOnM, MetricKind, MetricSpace, Net, PartitionOfUnity, PointCloud, Scale};
use proptest::prelude::*;

fn kernel() -> impl Strategy<Value = BumpKernel> {
    prop_oneof![Just(BumpKernel::Hat), Just(BumpKernel::Cosine), Just(BumpKernel::WendlandC2)]
}

fn coordinate_metric() -> impl Strategy<Value = MetricKind> {
    prop_oneof![Just(MetricKind::Euclidean), Just(MetricKind::Manhattan), Just(MetricKind::Chebyshev)]
}

/// Distinct lattice points in the unit square.
fn cloud(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::btree_set((0u32..=64, 0u32..=64), 1..max).prop_map(|set: BTreeSet<(u32, u32)>| {
        set.into_iter().map(|(a, b)| vec![a as f64 / 64.0, b as f64 / 64.0]).collect()
    })
}

fn space(max: usize) -> impl Strategy<Value = MetricSpace> {
    (cloud(max), coordinate_metric())
        .prop_map(|(rows, kind)| MetricSpace::new(PointCloud::from_coords(rows).unwrap(), kind).unwrap())
}

/// A space with two tabulated functions and a subset `T`.
fn scenario() -> impl Strategy<Value = (MetricSpace, Vec<f64>, Vec<f64>, Vec<usize>)> {
    space(40).prop_flat_map(|s| {
        let n = s.len();
        let values = prop::collection::vec(-10.0f64..10.0, n);
        (Just(s), values.clone(), values, prop::collection::btree_set(0..n, 1..=n))
            .prop_map(|(s, f, g, t)| (s, f, g, t.into_iter().collect()))
    })
}

fn scale() -> impl Strategy<Value = Scale> {
    (1u32..40, prop_oneof![Just(0.99), Just(1.0), 0.3f64..1.0]).prop_map(|(k, rho)| Scale::new(k, rho).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coordinate_metrics_satisfy_axioms(s in space(60), seed in any::<u64>()) {
        let report = s.validate(500, seed);
        prop_assert!(report.is_valid(), "{:?}", report.violations);
    }

    #[test]
    fn graph_metrics_satisfy_axioms(
        weights in prop::collection::vec(0.01f64..3.0, 2..30),
        chords in prop::collection::vec((0usize..30, 0usize..30, 0.01f64..3.0), 0..20),
    ) {
        let n = weights.len() + 1;
        let mut edges: Vec<_> = weights.iter().enumerate().map(|(i, &w)| (i, i + 1, w)).collect();
        edges.extend(chords.into_iter().filter(|&(i, j, _)| i < n && j < n && i != j));
        let s = MetricSpace::new(PointCloud::anonymous(n).unwrap(), MetricKind::GraphShortestPath { edges }).unwrap();
        prop_assert!(s.validate(500, 1).is_valid());
    }

    #[test]
    fn greedy_net_covers_and_separates(s in space(50), sc in scale()) {
        let net = Net::build_greedy(&s, sc);
        prop_assert!(net.verify(&s).is_ok());
        prop_assert_eq!(net.centers()[0], 0);
        let again = Net::build_greedy(&s, sc);
        prop_assert_eq!(net, again);
    }

    #[test]
    fn partition_identities((s, _, _, t) in scenario(), sc in scale(), k in kernel()) {
        let pou = PartitionOfUnity::build(&s, sc, k);
        for &x in &t {
            let row = pou.eval_all(x).unwrap();
            let sum: f64 = row.iter().map(|&(_, w)| w).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
            for &(c, w) in &row {
                prop_assert!((0.0..=1.0).contains(&w));
                prop_assert!(w > 0.0);
                prop_assert!(s.distance(x, c).unwrap() < sc.support_radius());
            }
            for &c in pou.net().centers() {
                if s.distance(x, c).unwrap() >= sc.support_radius() {
                    prop_assert_eq!(pou.eval_bump(c, x).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn constants_are_reproduced((s, _, _, t) in scenario(), sc in scale(), k in kernel(), c in -100.0f64..100.0) {
        let pou = PartitionOfUnity::build(&s, sc, k);
        let p = operator::apply(&pou, &FunctionOnM::Constant(c), &t).unwrap();
        prop_assert!(p.iter().all(|v| (v - c).abs() <= 1e-12 * c.abs().max(1.0)));
    }

    #[test]
    fn linearity((s, f, g, t) in scenario(), sc in scale(), k in kernel(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let pou = PartitionOfUnity::build(&s, sc, k);
        let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let lhs = operator::apply(&pou, &FunctionOnM::Tabulated(combo), &t).unwrap();
        let pf = operator::apply(&pou, &FunctionOnM::Tabulated(f), &t).unwrap();
        let pg = operator::apply(&pou, &FunctionOnM::Tabulated(g), &t).unwrap();
        for (i, l) in lhs.iter().enumerate() {
            let r = a * pf[i] + b * pg[i];
            prop_assert!((l - r).abs() <= 1e-12 * (a.abs() * pf[i].abs() + b.abs() * pg[i].abs()).max(1.0) * 10.0);
        }
    }

    #[test]
    fn positivity_and_contraction((s, f, _, t) in scenario(), sc in scale(), k in kernel()) {
        let pou = PartitionOfUnity::build(&s, sc, k);
        let abs: Vec<f64> = f.iter().map(|v| v.abs()).collect();
        let p = operator::apply(&pou, &FunctionOnM::Tabulated(abs), &t).unwrap();
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        let p = operator::apply(&pou, &FunctionOnM::Tabulated(f.clone()), &t).unwrap();
        let sup = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(operator::seminorm(&p).unwrap() <= sup * (1.0 + 1e-12));
    }

    #[test]
    fn matrix_agrees_with_sum((s, f, _, t) in scenario(), sc in scale(), k in kernel()) {
        let pou = PartitionOfUnity::build(&s, sc, k);
        let m = operator::as_matrix(&pou, &t).unwrap();
        prop_assert!(m.max_row_sum_defect() <= 1e-9);
        let center_values: Vec<f64> = m.centers().iter().map(|&c| f[c]).collect();
        let via_matrix = m.apply_center_values(&center_values).unwrap();
        let direct = operator::apply(&pou, &FunctionOnM::Tabulated(f.clone()), &t).unwrap();
        let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max_abs_diff(&via_matrix, &direct) <= 1e-12 * scale);
    }

    #[test]
    fn partial_sums_are_exact_on_active_centers((s, f, _, t) in scenario(), sc in scale(), k in kernel()) {
        let pou = PartitionOfUnity::build(&s, sc, k);
        let subset = CompactSubset::new(t.clone(), s.len()).unwrap();
        let active = pou.net().active_centers_on(&s, &subset).unwrap();
        let func = FunctionOnM::Tabulated(f);
        let full = operator::apply(&pou, &func, &t).unwrap();
        let partial = operator::partial_sum_apply(&pou, &func, &active, &t).unwrap();
        prop_assert!(max_abs_diff(&full, &partial) <= 1e-12);
        prop_assert_eq!(operator::rank_on(&pou, &subset).unwrap(), active.len());
    }

    #[test]
    fn certified_bound_holds((s, f, _, t) in scenario(), sc in scale(), k in kernel()) {
        let pou = PartitionOfUnity::build(&s, sc, k);
        let subset = CompactSubset::new(t, s.len()).unwrap();
        let check = convergence::verify_bound(&pou, &FunctionOnM::Tabulated(f.clone()), &subset).unwrap();
        prop_assert!(check.ok);
        let mut domain = subset.indices().to_vec();
        domain.extend(pou.net().active_centers_on(&s, &subset).unwrap());
        domain.sort_unstable();
        domain.dedup();
        prop_assert_eq!(check.bound.omega, brute_modulus(&s, &f, &domain, sc.support_radius()));
    }

    #[test]
    fn complex_functions_split_into_parts((s, f, g, t) in scenario(), sc in scale(), k in kernel()) {
        let pou = PartitionOfUnity::build(&s, sc, k);
        let cf = ComplexFunction { re: FunctionOnM::Tabulated(f.clone()), im: FunctionOnM::Tabulated(g.clone()) };
        let z = operator::apply_complex(&pou, &cf, &t).unwrap();
        let re = operator::apply(&pou, &FunctionOnM::Tabulated(f), &t).unwrap();
        let im = operator::apply(&pou, &FunctionOnM::Tabulated(g), &t).unwrap();
        for (i, v) in z.iter().enumerate() {
            prop_assert_eq!(*v, Complex64::new(re[i], im[i]));
        }
    }

    #[test]
    fn sweep_is_deterministic((s, f, g, t) in scenario(), k in kernel()) {
        let family = vec![
            pou_approx::FamilyMember::new(FunctionOnM::Tabulated(f)),
            pou_approx::FamilyMember::new(FunctionOnM::Tabulated(g)),
        ];
        let subset = CompactSubset::new(t, s.len()).unwrap();
        let a = convergence::sweep(&s, &family, &[1, 2, 4, 8], 0.99, k, &subset).unwrap();
        let b = convergence::sweep(&s, &family, &[1, 2, 4, 8], 0.99, k, &subset).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        prop_assert!(a.trend.all_bounds_satisfied);
    }
}
