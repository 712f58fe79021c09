mod common;

use common::*;
use flexpool_core::planning::*;
use flexpool_core::rational::q;
use flexpool_core::Q;
use rand::seq::index::sample;
use rand::Rng;

fn valid_ks(eta: usize, horizon: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << horizon) {
        let k: Vec<usize> = (1..=horizon).filter(|s| mask >> (s - 1) & 1 == 1).collect();
        if check_k(eta, horizon, &k).is_ok() {
            out.push(k);
        }
    }
    out
}

fn random_tables(r: &mut rand_chacha::ChaCha8Rng, eta: usize, horizon: usize) -> Objective {
    let rows = (0..horizon)
        .map(|_| {
            let mut acc = 0i64;
            (0..eta)
                .map(|_| {
                    acc += r.gen_range(0..=3);
                    q(acc)
                })
                .collect::<Vec<Q>>()
        })
        .collect();
    Objective::Tables(rows)
}

#[test]
fn structured_trajectories_follow_induction() {
    let mut r = rng(51);
    for eta in 1..=8 {
        let g0 = diagonal_instance(eta);
        let reps: Vec<(usize, usize)> = (1..=eta).map(|l| (l, l)).collect();
        for horizon in 1..=12 {
            let ks = valid_ks(eta, horizon);
            assert!(ks.contains(&Vec::new()));
            let picks = sample(&mut r, ks.len(), ks.len().min(12));
            for idx in picks {
                let k = &ks[idx];
                let s = structured_schedule(eta, horizon, k.len(), k).unwrap();
                let traj = erp_trajectory(&g0, &s.realize(&reps)).unwrap();
                assert_eq!(traj, induction_trajectory(eta, horizon, k), "eta={eta} K={horizon} k={k:?}");
            }
        }
    }
}

#[test]
fn no_edge_sequence_beats_the_structured_optimum() {
    let mut r = rng(52);
    for eta in 1..=4 {
        let g0 = diagonal_instance(eta);
        for horizon in 1..=3 {
            let mut objectives = vec![Objective::Sum, Objective::Final];
            objectives.extend((0..3).map(|_| random_tables(&mut r, eta, horizon)));
            for obj in &objectives {
                let plan = plan_schedule(eta, horizon, obj).unwrap();
                let (_, traj, best) = exhaustive_plan(&g0, horizon, obj).unwrap();
                assert!(best >= plan.value, "eta={eta} K={horizon} {obj:?}: {traj:?} beats {:?}", plan.trajectory);
                assert_eq!(best, plan.value);
            }
        }
    }
}

#[test]
fn dp_matches_brute_force_over_k() {
    for eta in 1..=7 {
        for horizon in 1..=9 {
            let brute = valid_ks(eta, horizon)
                .iter()
                .map(|k| Objective::Sum.total(&induction_trajectory(eta, horizon, k)))
                .min()
                .unwrap();
            assert_eq!(optimal_k(eta, horizon, &Objective::Sum).unwrap().1, brute);
        }
    }
}

#[test]
fn nine_components_eleven_steps() {
    let plan = plan_schedule(9, 11, &Objective::Sum).unwrap();
    assert_eq!(plan.value, q(61));
    assert_eq!(plan.trajectory, induction_trajectory(9, 11, &plan.schedule.k));
    let fig9 = induction_trajectory(9, 11, &[4, 8, 11]);
    assert_eq!(fig9, vec![9, 9, 9, 6, 6, 6, 6, 3, 3, 3, 1]);
    assert_eq!(Objective::Sum.total(&fig9), q(61));

    let last = plan_schedule(9, 11, &Objective::Final).unwrap();
    assert_eq!(last.schedule.k, vec![9]);
    assert_eq!(last.trajectory, vec![9, 9, 9, 9, 9, 9, 9, 9, 1, 1, 1]);
}

#[test]
fn reaching_one_takes_eta_steps() {
    for eta in 1..=8 {
        for horizon in eta..=eta + 3 {
            let plan = plan_schedule(eta, horizon, &Objective::Final).unwrap();
            let first = plan.trajectory.iter().position(|&v| v == 1).map(|p| p + 1);
            assert_eq!(first, Some(eta));
        }
        if eta > 1 {
            let short = plan_schedule(eta, eta - 1, &Objective::Final).unwrap();
            assert!(short.trajectory.iter().all(|&v| v > 1));
        }
    }
}

#[test]
fn two_components_one_step() {
    let plan = plan_schedule(2, 1, &Objective::Sum).unwrap();
    assert_eq!(plan.trajectory, vec![2]);
}

#[test]
fn scaling_trends() {
    let rows = scaling_table(&[4, 9, 16, 25]).unwrap();
    for w in rows.windows(2) {
        assert!(w[0].p <= w[1].p, "p should grow: {} then {}", w[0].p, w[1].p);
        assert!(w[1].ratio() < w[0].ratio(), "optimal/single-cycle should shrink");
    }
    // Θ(η^{3/2}) against Θ(η²).
    for row in &rows {
        let eta = row.eta as f64;
        let opt = flexpool_core::rational::to_f64(&row.optimal_sum);
        let single = flexpool_core::rational::to_f64(&row.single_cycle_sum);
        assert!(opt / eta.powf(1.5) > 0.5 && opt / eta.powf(1.5) < 4.0);
        assert!(single / (eta * eta) > 0.5 && single / (eta * eta) < 2.5);
    }
}

#[test]
fn fig8_trajectories() {
    let inst = fixture("fig7.json");
    let greedy = erp_trajectory(&inst, &[Some(edge(4, 3)), Some(edge(2, 1))]).unwrap();
    assert_eq!(greedy, vec![3, 2]);
    let patient = erp_trajectory(&inst, &[Some(edge(2, 3)), Some(edge(4, 1))]).unwrap();
    assert_eq!(patient, vec![4, 1]);
    let report = greedy_vs_optimal_report(&inst, 2, &Objective::Final).unwrap();
    assert_eq!(report.greedy_trajectory, vec![3, 2]);
    assert_eq!(*report.optimal_trajectory.last().unwrap(), 1);
    assert_eq!(report.optimal_value, q(1));
}

#[test]
fn diagonal_three_report_matches_enumeration() {
    let g = diagonal_instance(3);
    let report = greedy_vs_optimal_report(&g, 3, &Objective::Sum).unwrap();
    assert_eq!(report.method, "structured");
    let (_, _, best) = exhaustive_plan(&g, 3, &Objective::Sum).unwrap();
    assert_eq!(report.optimal_value, best);
    assert!(report.greedy_value >= best);
    let empty = greedy_vs_optimal_report(&g, 0, &Objective::Sum).unwrap();
    assert!(empty.greedy_trajectory.is_empty() && empty.optimal_trajectory.is_empty());
}
