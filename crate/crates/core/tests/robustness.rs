mod common;

use common::*;
use flexpool_core::decomposition::{crp_decomposition, redundant_edges};
use flexpool_core::flow::is_feasible;
use flexpool_core::rational::{q, qf, Q};
use flexpool_core::robustness::*;
use flexpool_core::{Error, ProblemInstance};
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn fig6(xi: &Q) -> ProblemInstance {
    ProblemInstance::new(
        vec![xi.clone(), q(1), q(1)],
        vec![xi.clone(), qf(11, 10), qf(9, 10)],
        [(1, 1), (2, 2), (3, 2), (3, 3)],
    )
    .unwrap()
}

/// Σω = 0 with ‖ω‖₁ drawn uniformly on a grid inside (0, 2δ).
fn sample_omega(r: &mut ChaCha8Rng, m: usize, delta: &Q) -> Vec<Q> {
    let grid = 64;
    let norm = delta * qf(r.gen_range(1..2 * grid), grid);
    let half = norm / q(2);
    let mut order: Vec<usize> = (0..m).collect();
    for k in (1..m).rev() {
        order.swap(k, r.gen_range(0..=k));
    }
    let split = r.gen_range(1..m);
    let mut omega = vec![Q::zero(); m];
    for (side, idx) in [(1, &order[..split]), (-1, &order[split..])] {
        let weights: Vec<i64> = idx.iter().map(|_| r.gen_range(1..=10)).collect();
        let total: i64 = weights.iter().sum();
        for (&i, w) in idx.iter().zip(weights) {
            omega[i] = &half * qf(side * w, total);
        }
    }
    omega
}

#[test]
fn redundant_edges_do_not_change_the_gap() {
    let mut r = rng(71);
    let mut defined = 0;
    for _ in 0..250 {
        let inst = random_feasible(&mut r, 5, 5);
        let (full, pruned) = gap_redundancy_invariance(&inst).unwrap();
        assert_eq!(full.value, pruned.value, "{}", inst.to_json());
        if let Some(v) = &full.value {
            assert!(v.is_positive());
            defined += 1;
        }
    }
    assert!(defined > 100);
}

#[test]
fn alternative_gap_never_exceeds_gap() {
    let mut r = rng(72);
    for _ in 0..250 {
        let inst = random_feasible(&mut r, 5, 5);
        let gap = crp_gap(&inst).unwrap();
        let alt = alt_crp_gap(&inst).unwrap();
        if let Some(g) = &gap.value {
            assert!(alt.value.as_ref().unwrap() <= g);
        }
        if redundant_edges(&inst).unwrap().is_empty() {
            assert_eq!(alt, gap);
        }
    }
}

#[test]
fn small_perturbations_never_raise_erp() {
    let mut r = rng(73);
    let mut instances = 0;
    while instances < 60 {
        let inst = random_feasible(&mut r, 5, 5);
        if inst.m() < 2 {
            continue;
        }
        let Some(delta) = crp_gap(&inst).unwrap().value else { continue };
        let before = crp_decomposition(&inst).unwrap().erp();
        let mut admissible = 0;
        for _ in 0..5000 {
            if admissible == 50 {
                break;
            }
            let omega = sample_omega(&mut r, inst.m(), &delta);
            let chk = check_perturbation(&inst, &omega).unwrap();
            if !chk.admissible {
                continue;
            }
            admissible += 1;
            assert_eq!(chk.erp_before, before);
            assert_eq!(chk.holds, Some(true), "ω={omega:?} on {}", inst.to_json());
        }
        if admissible == 50 {
            instances += 1;
        }
    }
}

#[test]
fn perturbation_admissibility() {
    let inst = fixture("fig4.json");
    assert_eq!(crp_gap(&inst).unwrap().value, Some(q(1)));
    let zero = check_perturbation(&inst, &vec![Q::zero(); 5]).unwrap();
    assert!(zero.admissible && zero.erp_after == Some(3));
    let small = check_perturbation(&inst, &[qf(1, 2), q(0), qf(-1, 2), q(0), q(0)]).unwrap();
    assert!(small.admissible);
    assert!(small.erp_after.unwrap() <= 3);
    let big = check_perturbation(&inst, &[q(2), q(0), q(-2), q(0), q(0)]).unwrap();
    assert!(!big.admissible && big.holds.is_none());
    assert!(matches!(check_perturbation(&inst, &[q(0)]), Err(Error::Malformed(_))));
    let single = ProblemInstance::from_ints(&[1], &[1], &[(1, 1)]).unwrap();
    assert_eq!(check_perturbation(&single, &[q(0)]), Err(Error::GapUndefined));
}

#[test]
fn braess_example() {
    for xi in [qf(1, 20), qf(1, 15), qf(1, 12)] {
        let inst = fig6(&xi);
        assert!(is_feasible(&inst));
        let cmp = compare_gaps_after_edge(&inst, edge(2, 1)).unwrap();
        assert_eq!(cmp.gap_before.value, Some(qf(1, 10)));
        assert_eq!(cmp.gap_after.value, Some(qf(1, 10)));
        assert_eq!(cmp.alt_before.value, Some(qf(1, 10)));
        assert_eq!(cmp.alt_after.value, Some(xi.clone()));
        assert_eq!(cmp.alt_after.argmin, Some(vec![2, 3]));
    }
    assert_eq!(fixture("fig6_right.json"), fig6(&qf(1, 20)).with_edge(edge(2, 1)).unwrap());
}
