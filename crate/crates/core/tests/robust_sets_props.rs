mod common;

use common::{in_ball, nested_robust};
use proptest::prelude::*;
use stableopt_core::{build_neighborhoods, robust_table, DistanceSpec, FiniteDomain};

fn points(max: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, dim), 1..max)
}

fn distances() -> impl Strategy<Value = DistanceSpec> {
    prop_oneof![
        Just(DistanceSpec::L2),
        Just(DistanceSpec::L1),
        Just(DistanceSpec::Linf),
        Just(DistanceSpec::WeightedLinf {
            weights: vec![0.5, 2.0]
        }),
    ]
}

proptest! {
    #[test]
    fn neighbourhoods_are_symmetric_and_reflexive(pts in points(40, 2), d in distances(), eps in 0.0f64..1.5) {
        let ps = build_neighborhoods(FiniteDomain::new(pts).unwrap(), d, eps).unwrap();
        for i in 0..ps.len() {
            prop_assert!(ps.neighbors(i).contains(&i));
            prop_assert!(ps.neighbors(i).windows(2).all(|w| w[0] < w[1]));
            for &j in ps.neighbors(i) {
                prop_assert!(ps.neighbors(j).contains(&i));
            }
        }
    }

    #[test]
    fn neighbourhoods_grow_with_epsilon(pts in points(40, 2), d in distances(), e1 in 0.0f64..1.0, extra in 0.0f64..1.0) {
        let dom = FiniteDomain::new(pts).unwrap();
        let small = build_neighborhoods(dom.clone(), d.clone(), e1).unwrap();
        let large = build_neighborhoods(dom, d, e1 + extra).unwrap();
        for i in 0..small.len() {
            for j in small.neighbors(i) {
                prop_assert!(large.neighbors(i).contains(j));
            }
        }
    }

    #[test]
    fn relabelling_points_permutes_neighbourhoods(pts in points(30, 2), eps in 0.0f64..1.5, shift in 0usize..30) {
        let n = pts.len();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&p| pts[p].clone()).collect();
        let a = build_neighborhoods(FiniteDomain::new(pts).unwrap(), DistanceSpec::L2, eps).unwrap();
        let b = build_neighborhoods(FiniteDomain::new(permuted).unwrap(), DistanceSpec::L2, eps).unwrap();
        for i in 0..n {
            let mut mapped: Vec<usize> = b.neighbors(i).iter().map(|&j| perm[j]).collect();
            mapped.sort_unstable();
            prop_assert_eq!(mapped, a.neighbors(perm[i]).to_vec());
        }
    }

    #[test]
    fn robust_table_matches_nested_loops(pts in points(60, 2), vals in prop::collection::vec(-5.0f64..5.0, 60), eps in 0.0f64..1.0) {
        let n = pts.len();
        let dom = FiniteDomain::new(pts.clone()).unwrap();
        let ps = build_neighborhoods(dom, DistanceSpec::L2, eps).unwrap();
        let values: Vec<f64> = vals[..n].to_vec();
        let table = robust_table(&ps, |x| {
            let i = pts.iter().position(|p| p.as_slice() == x).unwrap();
            values[i]
        }).unwrap();
        let close = |i: usize, j: usize| {
            let d: f64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            in_ball(d, eps)
        };
        let want = nested_robust(n, table.values(), close);
        prop_assert_eq!(table.robust_values(), &want[..]);
        for (r, v) in table.robust_values().iter().zip(table.values()) {
            prop_assert!(r <= v);
        }
    }
}
