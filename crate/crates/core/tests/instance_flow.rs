mod common;

use common::*;
use flexpool_core::flow::{find_feasible_point, find_feasible_point_with, is_feasible, max_flow, FlowOrder};
use flexpool_core::instance::{Assignment, InstanceDoc};
use flexpool_core::oracle::hall_feasible;
use flexpool_core::polytope::{check_point, greedy_extreme_point, is_extreme_point, support_graph, GreedyOrder};
use flexpool_core::rational::{parse_q, q, qf};
use flexpool_core::{Error, ProblemInstance};

#[test]
fn hall_agrees_with_max_flow() {
    let mut r = rng(11);
    let mut feasible = 0;
    for _ in 0..300 {
        let inst = random_balanced(&mut r, 6, 6);
        let f = is_feasible(&inst);
        assert_eq!(hall_feasible(&inst).unwrap(), f, "{}", inst.to_json());
        feasible += f as usize;
    }
    assert!(feasible > 30 && feasible < 270, "degenerate sample: {feasible}");
}

#[test]
fn feasible_points_satisfy_marginals() {
    let mut r = rng(12);
    for k in 0..200 {
        let inst = random_feasible(&mut r, 6, 6);
        for order in [FlowOrder::Natural, FlowOrder::Reversed, FlowOrder::Shuffled(k)] {
            let x = find_feasible_point_with(&inst, order).expect("feasible by construction");
            check_point(&inst, &x).unwrap();
        }
    }
}

#[test]
fn max_flow_value_never_exceeds_totals() {
    let mut r = rng(13);
    for _ in 0..100 {
        let inst = random_balanced(&mut r, 5, 5);
        let edges: Vec<_> = inst.edges().iter().copied().collect();
        let (v, x) = max_flow(inst.demand(), inst.supply(), &edges);
        assert!(v <= inst.total());
        let (rows, cols) = x.marginals(inst.m(), inst.n()).unwrap();
        assert!(rows.iter().zip(inst.demand()).all(|(a, b)| a <= b));
        assert!(cols.iter().zip(inst.supply()).all(|(a, b)| a <= b));
        assert!(x.support().is_subset(inst.edges()));
    }
}

#[test]
fn greedy_points_are_extreme() {
    let mut r = rng(14);
    for _ in 0..100 {
        let (nu, mu) = random_rates(&mut r, 5, 5, 5);
        let x = greedy_extreme_point(&nu, &mu, &GreedyOrder::FirstAvailable).unwrap();
        assert!(is_extreme_point(&nu, &mu, &x).unwrap());
        let g = support_graph(nu.len(), mu.len(), &x);
        assert!(g.edges.len() <= nu.len() + mu.len() - 1);
    }
}

#[test]
fn json_round_trip_is_exact() {
    let mut r = rng(15);
    for _ in 0..50 {
        let inst = random_feasible(&mut r, 5, 5);
        let back = ProblemInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
        let x = find_feasible_point(&inst).unwrap();
        assert_eq!(Assignment::from_json(&x.to_json()).unwrap(), x);
    }
    let odd = ProblemInstance::new(vec![qf(1, 3), qf(2, 3)], vec![q(1)], [(1, 1), (2, 1)]).unwrap();
    let text = serde_json::to_string(&odd.to_json()).unwrap();
    assert!(text.contains("\"1/3\""));
    assert_eq!(ProblemInstance::from_json_str(&text).unwrap(), odd);
}

#[test]
fn validation_errors() {
    assert!(matches!(
        ProblemInstance::from_ints(&[1, 2], &[1, 1], &[(1, 1)]),
        Err(Error::UnbalancedTotals { .. })
    ));
    assert!(matches!(ProblemInstance::from_ints(&[1], &[1], &[(1, 2)]), Err(Error::EdgeOutOfRange(_))));
    assert!(matches!(ProblemInstance::from_ints(&[-1, 2], &[1], &[(1, 1)]), Err(Error::NegativeRate { .. })));
    assert!(matches!(
        ProblemInstance::from_json_str(r#"{"demand":[1],"supply":[1],"edges":[[1,1],[1,1]]}"#),
        Err(Error::DuplicateEdge(_))
    ));
    let float = ProblemInstance::from_json_str(r#"{"demand":[0.5],"supply":[0.5],"edges":[]}"#);
    assert!(float.unwrap_err().is_usage());
    assert!(matches!(ProblemInstance::from_json_str(r#"{"demand":[1]}"#), Err(Error::Malformed(_))));
    assert!(parse_q("3/0").is_err());
    let doc: InstanceDoc = serde_json::from_str(r#"{"m":2,"demand":[1],"supply":[1]}"#).unwrap();
    assert!(matches!(ProblemInstance::from_doc(doc), Err(Error::Malformed(_))));
}

#[test]
fn fig4_is_feasible() {
    let inst = fixture("fig4.json");
    assert!(is_feasible(&inst));
    assert!(hall_feasible(&inst).unwrap());
}

mod round_trip {
    use flexpool_core::rational::{from_json, to_json, Q};
    use flexpool_core::ProblemInstance;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rationals(n in any::<i64>(), d in 1i64..=i64::MAX) {
            let x = Q::new(BigInt::from(n), BigInt::from(d));
            let text = serde_json::to_string(&to_json(&x)).unwrap();
            let back = from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn instances(rates in proptest::collection::vec((1i64..50, 1i64..7), 1..6), mask in any::<u64>()) {
            let demand: Vec<Q> = rates.iter().map(|&(a, b)| Q::new(a.into(), b.into())).collect();
            let total: Q = demand.iter().sum();
            let supply = vec![total / Q::from_integer(2.into()); 2];
            let edges: Vec<(usize, usize)> = (0..demand.len() * 2)
                .filter(|k| mask >> k & 1 == 1)
                .map(|k| (k / 2 + 1, k % 2 + 1))
                .collect();
            let inst = ProblemInstance::new(demand, supply, edges).unwrap();
            let text = serde_json::to_string(&inst.to_json()).unwrap();
            prop_assert_eq!(ProblemInstance::from_json_str(&text).unwrap(), inst);
        }
    }
}
