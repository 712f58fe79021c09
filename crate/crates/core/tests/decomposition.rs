mod common;

use common::*;
use flexpool_core::decomposition::*;
use flexpool_core::flow::FlowOrder;
use flexpool_core::oracle::{crp_condition_oracle, redundancy_oracle, redundant_edges_oracle};
use flexpool_core::polytope::{bipartite_components, check_point};
use flexpool_core::rational::sum;
use flexpool_core::Edge;
use std::collections::BTreeSet;

#[test]
fn matches_per_edge_oracle() {
    let mut r = rng(21);
    let mut with_redundant = 0;
    for _ in 0..250 {
        let inst = random_feasible(&mut r, 6, 6);
        let fast = redundant_edges(&inst).unwrap();
        let slow = redundant_edges_oracle(&inst).unwrap();
        assert_eq!(fast, slow, "{}", inst.to_json());
        with_redundant += !fast.is_empty() as usize;
    }
    assert!(with_redundant > 50, "too few instances exercise redundancy: {with_redundant}");
}

#[test]
fn independent_of_starting_point() {
    let mut r = rng(22);
    for k in 0..200 {
        let inst = random_feasible(&mut r, 6, 6);
        let base = redundant_edges(&inst).unwrap();
        for order in [FlowOrder::Reversed, FlowOrder::Shuffled(k), FlowOrder::Shuffled(k + 1000)] {
            assert_eq!(redundant_edges_with(&inst, order).unwrap().redundant, base);
        }
        // Starting from the averaged witness as well.
        let x = full_support_point(&inst).unwrap();
        assert_eq!(redundant_edges_from_point(&inst, &x).unwrap().redundant, base);
    }
}

#[test]
fn components_are_crp_and_balanced() {
    let mut r = rng(23);
    for _ in 0..200 {
        let inst = random_feasible(&mut r, 6, 6);
        let dec = crp_decomposition(&inst).unwrap();
        check_decomposition(&inst, &dec).unwrap();
        let mut demands = BTreeSet::new();
        let mut supplies = BTreeSet::new();
        for c in &dec.components {
            let nu = sum(c.demands.iter().map(|&i| inst.nu(i)));
            let mu = sum(c.supplies.iter().map(|&j| inst.mu(j)));
            assert_eq!(nu, mu);
            let sub = component_instance(&inst, c).expect("positive rates");
            assert!(crp_condition_oracle(&sub).unwrap(), "component not CRP in {}", inst.to_json());
            assert!(crp_condition(&sub));
            demands.extend(c.demands.iter().copied());
            supplies.extend(c.supplies.iter().copied());
        }
        assert_eq!(demands.len(), inst.m());
        assert_eq!(supplies.len(), inst.n());
        assert!(dec.components.windows(2).all(|w| w[0].demands[0] < w[1].demands[0]));
    }
}

#[test]
fn crp_condition_matches_subset_scan() {
    let mut r = rng(24);
    let mut hits = 0;
    for _ in 0..300 {
        let inst = random_feasible(&mut r, 5, 5);
        let fast = crp_condition(&inst);
        assert_eq!(fast, crp_condition_oracle(&inst).unwrap(), "{}", inst.to_json());
        hits += fast as usize;
    }
    assert!(hits > 10);
}

#[test]
fn dag_is_acyclic_with_one_arc_per_redundant_edge() {
    let mut r = rng(25);
    for _ in 0..200 {
        let inst = random_feasible(&mut r, 6, 6);
        let dec = crp_decomposition(&inst).unwrap();
        let dag = crp_graph(&dec).unwrap();
        assert_eq!(dag.arc_count(), dec.redundant.len());
        let order = dag.topological_order().unwrap();
        let pos: Vec<usize> = {
            let mut p = vec![0; order.len()];
            for (k, &v) in order.iter().enumerate() {
                p[v] = k;
            }
            p
        };
        for &(a, b) in dag.arcs.keys() {
            assert!(pos[a] < pos[b]);
        }
        assert_eq!(ssc_basis(&dec, inst.m()).len(), dec.erp());
    }
}

#[test]
fn full_support_witness() {
    let mut r = rng(26);
    for _ in 0..200 {
        let inst = random_feasible(&mut r, 6, 6);
        let red = redundant_edges(&inst).unwrap();
        let kept: BTreeSet<Edge> = inst.edges().difference(&red).copied().collect();
        let x = full_support_point(&inst).unwrap();
        check_point(&inst, &x).unwrap();
        assert_eq!(x.support(), kept);
        for &e in &kept {
            let w = redundancy_oracle(&inst, e).unwrap().expect("non-redundant edge has a witness");
            assert!(w.get(e) > num_traits::Zero::zero());
        }
    }
}

#[test]
fn erp_at_least_connected_components() {
    let mut r = rng(27);
    for _ in 0..200 {
        let inst = random_feasible(&mut r, 6, 6);
        let dec = crp_decomposition(&inst).unwrap();
        let cc = bipartite_components(inst.m(), inst.n(), inst.edges()).count();
        assert!(dec.erp() >= cc);
        let pruned = inst.with_edges(inst.edges().difference(&dec.redundant).copied()).unwrap();
        assert_eq!(bipartite_components(inst.m(), inst.n(), pruned.edges()).count(), dec.erp());
    }
}

#[test]
fn work_is_bounded() {
    let mut r = rng(28);
    for size in [4usize, 8, 16, 32, 48] {
        for _ in 0..5 {
            let inst = random_feasible(&mut r, size, size);
            let run = redundant_edges_with(&inst, FlowOrder::Natural).unwrap();
            let (v, e) = ((inst.m() + inst.n()) as u64, inst.edges().len() as u64);
            assert!(run.work <= 4 * v * (v + e), "work {} for m+n={v}, |E|={e}", run.work);
        }
    }
}

#[test]
fn fig4_golden() {
    let inst = fixture("fig4.json");
    let dec = crp_decomposition(&inst).unwrap();
    let want: BTreeSet<Edge> = [edge(1, 3), edge(1, 5), edge(2, 4)].into();
    assert_eq!(dec.redundant, want);
    let parts: Vec<(Vec<usize>, Vec<usize>)> =
        dec.components.iter().map(|c| (c.demands.clone(), c.supplies.clone())).collect();
    assert_eq!(parts, vec![(vec![1], vec![2]), (vec![2, 3], vec![1, 3]), (vec![4, 5], vec![4, 5])]);
    assert_eq!(dec.erp(), 3);
    assert!(redundancy_oracle(&inst, edge(2, 4)).unwrap().is_none());
    assert!(redundancy_oracle(&inst, edge(4, 5)).unwrap().is_some());
    let dag = crp_graph(&dec).unwrap();
    let arcs: Vec<(usize, usize)> = dag.arcs.keys().copied().collect();
    assert_eq!(arcs, vec![(0, 1), (0, 2), (1, 2)]);
    assert_eq!(ssc_basis(&dec, 5), vec![vec![1, 0, 0, 0, 0], vec![0, 1, 1, 0, 0], vec![0, 0, 0, 1, 1]]);
    assert!(verify_decomposition(&inst, &[vec![4, 5], vec![2, 3], vec![1]]).unwrap());
    assert!(!verify_decomposition(&inst, &[vec![1, 2, 3], vec![4, 5]]).unwrap());
}

#[test]
fn fig7_dag() {
    let inst = fixture("fig7.json");
    let dec = crp_decomposition(&inst).unwrap();
    assert_eq!(dec.erp(), 4);
    let arcs: Vec<(usize, usize)> = crp_graph(&dec).unwrap().arcs.keys().copied().collect();
    assert_eq!(arcs, vec![(0, 1), (0, 3), (2, 3)]);
}
