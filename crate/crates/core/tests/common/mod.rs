#![allow(dead_code)]

use flexpool_core::rational::q;
use flexpool_core::{Edge, ProblemInstance, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> ProblemInstance {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture");
    ProblemInstance::from_json_str(&text).expect("valid fixture")
}

pub fn edge(i: usize, j: usize) -> Edge {
    Edge::new(i, j)
}

/// Feasible instance with all rates positive: a few balanced blocks, each
/// built around an integer transport plan, joined by random cross edges.
/// Cross edges mostly point from earlier to later blocks, which makes them
/// redundant unless they close a cycle.
pub fn random_feasible(r: &mut ChaCha8Rng, max_m: usize, max_n: usize) -> ProblemInstance {
    let m = r.gen_range(1..=max_m);
    let n = r.gen_range(1..=max_n);
    let blocks = r.gen_range(1..=m.min(n).min(3));
    let cut = |r: &mut ChaCha8Rng, len: usize| -> Vec<usize> {
        let mut owner: Vec<usize> = (0..len).map(|k| if k < blocks { k } else { r.gen_range(0..blocks) }).collect();
        owner.sort_unstable();
        owner
    };
    let row_block = cut(r, m);
    let col_block = cut(r, n);
    let mut x = vec![vec![0i64; n]; m];
    for i in 0..m {
        let cols: Vec<usize> = (0..n).filter(|&j| col_block[j] == row_block[i]).collect();
        x[i][cols[r.gen_range(0..cols.len())]] += r.gen_range(1..=3);
    }
    for j in 0..n {
        let rows: Vec<usize> = (0..m).filter(|&i| row_block[i] == col_block[j]).collect();
        x[rows[r.gen_range(0..rows.len())]][j] += r.gen_range(1..=3);
    }
    let density = r.gen_range(0.0..0.35);
    let extra = r.gen_range(0.0..0.3);
    let cross = r.gen_range(0.0..0.3);
    let backward = r.gen_range(0.0..0.15);
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let (a, b) = (row_block[i], col_block[j]);
            if a == b && r.gen_bool(density) {
                x[i][j] += r.gen_range(1..=2);
            }
            let keep = x[i][j] > 0
                || (a == b && r.gen_bool(extra))
                || (a < b && r.gen_bool(cross))
                || (a > b && r.gen_bool(backward));
            if keep {
                edges.push((i + 1, j + 1));
            }
        }
    }
    let demand: Vec<i64> = x.iter().map(|row| row.iter().sum()).collect();
    let supply: Vec<i64> = (0..n).map(|j| x.iter().map(|row| row[j]).sum()).collect();
    ProblemInstance::from_ints(&demand, &supply, &edges).expect("balanced by construction")
}

/// Balanced positive rates with a uniformly random edge set; often
/// infeasible.
pub fn random_balanced(r: &mut ChaCha8Rng, max_m: usize, max_n: usize) -> ProblemInstance {
    loop {
        let m = r.gen_range(1..=max_m);
        let n = r.gen_range(1..=max_n);
        let demand: Vec<i64> = (0..m).map(|_| r.gen_range(1..=4)).collect();
        let total: i64 = demand.iter().sum();
        if total < n as i64 {
            continue;
        }
        let supply = composition(r, total, n);
        let p = r.gen_range(0.2..0.8);
        let edges: Vec<(usize, usize)> =
            (1..=m).flat_map(|i| (1..=n).map(move |j| (i, j))).filter(|_| r.gen_bool(p)).collect();
        return ProblemInstance::from_ints(&demand, &supply, &edges).expect("balanced");
    }
}

/// Random positive integer parts of `total`.
pub fn composition(r: &mut ChaCha8Rng, total: i64, parts: usize) -> Vec<i64> {
    let mut out = vec![1i64; parts];
    for _ in 0..(total - parts as i64) {
        out[r.gen_range(0..parts)] += 1;
    }
    out
}

/// Random positive integer (ν, μ) with equal totals.
pub fn random_rates(r: &mut ChaCha8Rng, max_m: usize, max_n: usize, max_rate: i64) -> (Vec<Q>, Vec<Q>) {
    loop {
        let m = r.gen_range(1..=max_m);
        let n = r.gen_range(1..=max_n);
        let demand: Vec<i64> = (0..m).map(|_| r.gen_range(1..=max_rate)).collect();
        let total: i64 = demand.iter().sum();
        if total < n as i64 {
            continue;
        }
        let supply = composition(r, total, n);
        return (demand.into_iter().map(q).collect(), supply.into_iter().map(q).collect());
    }
}
