//! Exact max-flow (Edmonds–Karp) over rational capacities.

use crate::instance::{Assignment, Edge, ProblemInstance};
use crate::rational::Q;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

/// Order in which compatibility edges are offered to the flow solver.
///
/// Different orders generally return different feasible points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlowOrder {
    #[default]
    Natural,
    Reversed,
    Shuffled(u64),
}

struct Net {
    head: Vec<usize>,
    // `None` is an uncapacitated arc.
    cap: Vec<Option<Q>>,
    adj: Vec<Vec<usize>>,
}

impl Net {
    fn new(nodes: usize) -> Self {
        Net { head: Vec::new(), cap: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    fn arc(&mut self, from: usize, to: usize, cap: Option<Q>) -> usize {
        let id = self.head.len();
        self.head.push(to);
        self.cap.push(cap);
        self.adj[from].push(id);
        self.head.push(from);
        self.cap.push(Some(Q::zero()));
        self.adj[to].push(id + 1);
        id
    }

    fn open(&self, a: usize) -> bool {
        match &self.cap[a] {
            None => true,
            Some(c) => c.is_positive(),
        }
    }

    fn push(&mut self, a: usize, f: &Q) {
        if let Some(c) = &mut self.cap[a] {
            *c -= f;
        }
        if let Some(c) = &mut self.cap[a ^ 1] {
            *c += f;
        }
    }

    fn max_flow(&mut self, s: usize, t: usize) -> Q {
        let mut total = Q::zero();
        loop {
            let mut via = vec![usize::MAX; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &a in &self.adj[u] {
                    let v = self.head[a];
                    if !seen[v] && self.open(a) {
                        seen[v] = true;
                        via[v] = a;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut bottleneck: Option<Q> = None;
            let mut v = t;
            while v != s {
                let a = via[v];
                if let Some(c) = &self.cap[a] {
                    if bottleneck.as_ref().map_or(true, |b| c < b) {
                        bottleneck = Some(c.clone());
                    }
                }
                v = self.head[a ^ 1];
            }
            // Every s-t path starts with a capacitated source arc.
            let f = bottleneck.expect("augmenting path has a finite arc");
            let mut v = t;
            while v != s {
                let a = via[v];
                self.push(a, &f);
                v = self.head[a ^ 1];
            }
            total += f;
        }
    }
}

/// Maximum flow that can be routed from supplies to demands along the
/// given edges, with the given rates, plus the flow itself.
pub fn max_flow(demand: &[Q], supply: &[Q], edges: &[Edge]) -> (Q, Assignment) {
    let (m, n) = (demand.len(), supply.len());
    let s = 0;
    let t = m + n + 1;
    let mut net = Net::new(m + n + 2);
    for (k, mu) in supply.iter().enumerate() {
        net.arc(s, 1 + k, Some(mu.clone()));
    }
    let ids: Vec<usize> = edges.iter().map(|e| net.arc(e.j, n + e.i, None)).collect();
    for (k, nu) in demand.iter().enumerate() {
        net.arc(n + 1 + k, t, Some(nu.clone()));
    }
    let value = net.max_flow(s, t);
    let mut x = Assignment::new();
    for (e, id) in edges.iter().zip(ids) {
        // Flow on an arc equals the residual capacity of its reverse.
        let f = net.cap[id ^ 1].clone().expect("reverse arcs are capacitated");
        if f.is_positive() {
            x.set(*e, f).expect("positive");
        }
    }
    (value, x)
}

pub(crate) fn ordered_edges(inst: &ProblemInstance, order: FlowOrder) -> Vec<Edge> {
    let mut edges: Vec<Edge> = inst.edges().iter().copied().collect();
    match order {
        FlowOrder::Natural => {}
        FlowOrder::Reversed => edges.reverse(),
        FlowOrder::Shuffled(seed) => edges.shuffle(&mut ChaCha8Rng::seed_from_u64(seed)),
    }
    edges
}

/// A point of the flow polytope, or `None` if the polytope is empty.
pub fn find_feasible_point_with(inst: &ProblemInstance, order: FlowOrder) -> Option<Assignment> {
    let edges = ordered_edges(inst, order);
    let (value, x) = max_flow(inst.demand(), inst.supply(), &edges);
    (value == inst.total()).then_some(x)
}

pub fn find_feasible_point(inst: &ProblemInstance) -> Option<Assignment> {
    find_feasible_point_with(inst, FlowOrder::Natural)
}

pub fn is_feasible(inst: &ProblemInstance) -> bool {
    find_feasible_point(inst).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn routes_through_alternating_path() {
        // Natural order first sends supply 1 to demand 1; the second unit
        // must reroute it.
        let inst = ProblemInstance::from_ints(&[1, 1], &[1, 1], &[(1, 1), (1, 2), (2, 1)]).unwrap();
        let x = find_feasible_point(&inst).unwrap();
        assert_eq!(x.get(Edge::new(1, 2)), q(1));
        assert_eq!(x.get(Edge::new(2, 1)), q(1));
    }

    #[test]
    fn detects_infeasibility() {
        let inst = ProblemInstance::from_ints(&[2, 0], &[1, 1], &[(1, 1), (2, 2)]).unwrap();
        assert!(!is_feasible(&inst));
    }
}
