use std::collections::BTreeSet;

use coarsebench_core::spaces::*;
use proptest::prelude::*;

fn plane_points() -> impl Strategy<Value = BTreeSet<(i64, i64)>> {
    prop::collection::btree_set((-4i64..=4, -4i64..=4), 1..=14)
}

fn to_space(points: &BTreeSet<(i64, i64)>, cheb: bool) -> FiniteMetricSpace {
    let metric = if cheb {
        GridMetric::Chebyshev
    } else {
        GridMetric::Taxicab
    };
    FiniteMetricSpace::from_coords("p", points.iter().map(|&(x, y)| vec![x, y]).collect(), metric).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grids_and_unions_are_metric(n in 1usize..=3, s in 0u64..=3, k in 1u64..=2) {
        build_grid_space(n, k, s, GridMetric::Taxicab, DEFAULT_POINT_CAP).unwrap().validate_metric().unwrap();
        build_grid_space(n, k, s, GridMetric::Chebyshev, DEFAULT_POINT_CAP).unwrap().validate_metric().unwrap();
        build_cup_c_space(&[1, 2, 4], n, s + 1, DEFAULT_POINT_CAP).unwrap().validate_metric().unwrap();
    }

    #[test]
    fn net_is_separated_dense_and_idempotent(points in plane_points(), cheb in any::<bool>(), r in 1u64..=4) {
        let x = to_space(&points, cheb);
        let (net, map) = greedy_r_net(&x, r).unwrap();
        for i in 0..net.len() {
            for j in i + 1..net.len() {
                prop_assert!(net.dist(i, j) >= r);
            }
        }
        for i in 0..x.len() {
            prop_assert!(x.dist_ids(x.id(i), map.apply_id(x.id(i)).unwrap()).unwrap() < r);
            let nearest = (0..net.len()).map(|j| x.dist_ids(x.id(i), net.id(j)).unwrap()).min().unwrap();
            prop_assert!(nearest < r);
        }
        prop_assert!(check_coarse_embedding(&map).violation.is_none());
        let (again, _) = greedy_r_net(&net, r).unwrap();
        prop_assert_eq!(again.ids(), net.ids());
    }

    #[test]
    fn subspaces_compose(points in plane_points(), seed in any::<u64>()) {
        let x = to_space(&points, false);
        let ids = x.ids().to_vec();
        let a: Vec<PointId> = ids.iter().copied().filter(|p| (seed >> (p % 64)) & 1 == 1 || *p == ids[0]).collect();
        let b: Vec<PointId> = a.iter().copied().step_by(2).collect();
        let via = x.subspace(&a).unwrap().subspace(&b).unwrap();
        let direct = x.subspace(&b).unwrap();
        prop_assert!(via.same_points_and_metric(&direct));
    }

    #[test]
    fn sum_basepoint_distances(sizes in prop::collection::vec(1i64..=3, 2..=4), start in 1u64..=3) {
        let parts: Vec<FiniteMetricSpace> = sizes
            .iter()
            .enumerate()
            .map(|(i, &len)| FiniteMetricSpace::from_coords(format!("part{i}"), (0..len).map(|v| vec![v]).collect(), GridMetric::Taxicab).unwrap())
            .collect();
        let gaps: Vec<u64> = (0..parts.len() as u64).map(|i| start + 2 * i).collect();
        let bases = vec![0; parts.len()];
        let (sum, part_ids) = build_asymptotic_sum_with_parts(&parts, &bases, &gaps).unwrap();
        sum.validate_metric().unwrap();
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                let want: u64 = gaps[i..=j].iter().sum();
                prop_assert_eq!(sum.dist_ids(part_ids[i][0], part_ids[j][0]).unwrap(), want);
            }
        }
    }
}

#[test]
fn sum_of_three_pairs() {
    let pair = |name: &str| FiniteMetricSpace::from_coords(name, vec![vec![0], vec![1]], GridMetric::Taxicab).unwrap();
    let (sum, parts) =
        build_asymptotic_sum_with_parts(&[pair("a"), pair("b"), pair("c")], &[0, 0, 0], &[2, 3, 5]).unwrap();
    assert_eq!(sum.dist_ids(parts[0][1], parts[2][1]).unwrap(), 12);
    sum.validate_metric().unwrap();
    assert!(build_asymptotic_sum(&[pair("a"), pair("b")], &[0, 0], &[3, 3]).is_err());
}

#[test]
fn cup_c_matches_set_comprehension() {
    let x = build_cup_c_space(&[1, 2, 4], 3, 4, DEFAULT_POINT_CAP).unwrap();
    let mut want: BTreeSet<Vec<i64>> = BTreeSet::new();
    for a in -4i64..=4 {
        for b in -4i64..=4 {
            for c in -4i64..=4 {
                let in_union = (b == 0 && c == 0) || (b % 2 == 0 && c == 0) || (b % 2 == 0 && c % 4 == 0);
                if in_union {
                    want.insert(vec![a, b, c]);
                }
            }
        }
    }
    let got: BTreeSet<Vec<i64>> = (0..x.len()).map(|i| x.coords(i).unwrap().to_vec()).collect();
    assert_eq!(got, want);
}

#[test]
fn net_on_a_segment() {
    let x = FiniteMetricSpace::from_coords("0..5", (0..=5).map(|v| vec![v]).collect(), GridMetric::Taxicab).unwrap();
    let (net, _) = greedy_r_net(&x, 2).unwrap();
    let coords: Vec<i64> = (0..net.len()).map(|i| net.coords(i).unwrap()[0]).collect();
    assert_eq!(coords, vec![0, 2, 4]);
}

#[test]
fn space_json_round_trip() {
    let x = build_cup_c_space(&[1, 2], 2, 2, DEFAULT_POINT_CAP).unwrap();
    let text = serde_json::to_string(&x).unwrap();
    let back: FiniteMetricSpace = serde_json::from_str(&text).unwrap();
    assert_eq!(back, x);
    assert!(serde_json::from_str::<FiniteMetricSpace>(
        r#"{"label":"bad","points":[0,1],"metric":{"kind":"matrix","rows":[[0,1],[2,0]]}}"#
    )
    .is_err());
}
