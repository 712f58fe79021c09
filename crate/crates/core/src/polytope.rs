//! Feasible points, support graphs and extreme points of the flow
//! polytope `T_E(nu, mu)`.

use crate::error::{Error, Result};
use crate::instance::{Assignment, Edge, ProblemInstance};
use crate::rational::Q;
use crate::unionfind::UnionFind;
use num_traits::Zero;
use std::collections::BTreeSet;

/// Connected components of a bipartite graph on `m` demands and `n`
/// supplies.
///
/// Parts are ordered by smallest demand index; parts without demands come
/// last, ordered by smallest supply index. Labels are 0-based positions in
/// `parts`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub parts: Vec<(Vec<usize>, Vec<usize>)>,
    pub demand_label: Vec<usize>,
    pub supply_label: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.parts.len()
    }
}

pub fn bipartite_components<'a>(
    m: usize,
    n: usize,
    edges: impl IntoIterator<Item = &'a Edge>,
) -> Components {
    let mut uf = UnionFind::new(m + n);
    for e in edges {
        uf.union(e.i - 1, m + e.j - 1);
    }
    let mut root_to_label = std::collections::HashMap::new();
    let mut parts: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    // Demands first, then supplies, so labels follow the required order.
    for v in 0..m + n {
        let r = uf.find(v);
        let label = *root_to_label.entry(r).or_insert_with(|| {
            parts.push((Vec::new(), Vec::new()));
            parts.len() - 1
        });
        if v < m {
            parts[label].0.push(v + 1);
        } else {
            parts[label].1.push(v - m + 1);
        }
    }
    let mut demand_label = vec![0; m];
    let mut supply_label = vec![0; n];
    for (l, (is, js)) in parts.iter().enumerate() {
        for &i in is {
            demand_label[i - 1] = l;
        }
        for &j in js {
            supply_label[j - 1] = l;
        }
    }
    Components { parts, demand_label, supply_label }
}

/// Support graph `B(x)` and its structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportGraph {
    pub edges: BTreeSet<Edge>,
    pub components: Components,
    pub acyclic: bool,
}

pub fn support_graph(m: usize, n: usize, x: &Assignment) -> SupportGraph {
    let edges = x.support();
    let components = bipartite_components(m, n, &edges);
    // A graph is a forest iff |E| = |V| - #components.
    let acyclic = edges.len() + components.count() == m + n;
    SupportGraph { edges, components, acyclic }
}

/// Checks `x` lies in the complete-bipartite polytope `T(nu, mu)`.
pub fn check_marginals(demand: &[Q], supply: &[Q], x: &Assignment) -> Result<()> {
    let (rows, cols) = x.marginals(demand.len(), supply.len())?;
    for (k, (r, nu)) in rows.iter().zip(demand).enumerate() {
        if r != nu {
            return Err(Error::NotFeasiblePoint(format!("row {} sums to {r}, expected {nu}", k + 1)));
        }
    }
    for (k, (c, mu)) in cols.iter().zip(supply).enumerate() {
        if c != mu {
            return Err(Error::NotFeasiblePoint(format!(
                "column {} sums to {c}, expected {mu}",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Checks `x ∈ T_E(nu, mu)`.
pub fn check_point(inst: &ProblemInstance, x: &Assignment) -> Result<()> {
    for (e, _) in x.iter() {
        if !inst.has_edge(*e) {
            return Err(Error::NotFeasiblePoint(format!("flow on non-edge {e}")));
        }
    }
    check_marginals(inst.demand(), inst.supply(), x)
}

/// A point of `T(nu, mu)` is extreme iff its support graph is acyclic.
pub fn is_extreme_point(demand: &[Q], supply: &[Q], x: &Assignment) -> Result<bool> {
    check_marginals(demand, supply, x)?;
    Ok(support_graph(demand.len(), supply.len(), x).acyclic)
}

/// Choice rule for [`greedy_extreme_point`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum GreedyOrder {
    /// Always pair the smallest remaining demand with the smallest
    /// remaining supply.
    #[default]
    FirstAvailable,
    /// Use these pairs in order, then fall back to first-available.
    Explicit(Vec<Edge>),
}

/// Greedy construction of an extreme point of `T(nu, mu)`.
///
/// Each step pairs a remaining demand `i` with a remaining supply `j`, puts
/// `min(nu_i, mu_j)` on it, and retires whichever side is exhausted (both
/// on a tie).
pub fn greedy_extreme_point(demand: &[Q], supply: &[Q], order: &GreedyOrder) -> Result<Assignment> {
    let is: Vec<usize> = (1..=demand.len()).collect();
    let js: Vec<usize> = (1..=supply.len()).collect();
    greedy_block(demand, supply, &is, &js, order)
}

/// [`greedy_extreme_point`] restricted to a block of demands and supplies
/// with equal totals; vertex indices stay global.
pub fn greedy_block(
    demand: &[Q],
    supply: &[Q],
    block_demands: &[usize],
    block_supplies: &[usize],
    order: &GreedyOrder,
) -> Result<Assignment> {
    let mut nu: Vec<Option<Q>> = vec![None; demand.len()];
    let mut mu: Vec<Option<Q>> = vec![None; supply.len()];
    for &i in block_demands {
        nu[i - 1] = Some(demand[i - 1].clone());
    }
    for &j in block_supplies {
        mu[j - 1] = Some(supply[j - 1].clone());
    }
    let explicit: &[Edge] = match order {
        GreedyOrder::Explicit(v) => v,
        GreedyOrder::FirstAvailable => &[],
    };
    let mut x = Assignment::new();
    let mut step = 0;
    loop {
        let next_i = nu.iter().position(Option::is_some);
        let next_j = mu.iter().position(Option::is_some);
        let (i, j) = match (next_i, next_j) {
            (Some(a), Some(b)) => match explicit.get(step) {
                Some(e) => {
                    let ok = e.i >= 1 && e.i <= nu.len() && e.j >= 1 && e.j <= mu.len();
                    if !ok || nu[e.i - 1].is_none() || mu[e.j - 1].is_none() {
                        return Err(Error::InvalidChoice(*e));
                    }
                    (e.i, e.j)
                }
                None => (a + 1, b + 1),
            },
            (None, None) => break,
            _ => {
                return Err(Error::UnbalancedTotals {
                    demand: "block".into(),
                    supply: "block".into(),
                })
            }
        };
        step += 1;
        let a = nu[i - 1].clone().expect("checked");
        let b = mu[j - 1].clone().expect("checked");
        let v = if a <= b { a.clone() } else { b.clone() };
        x.set(Edge::new(i, j), v.clone())?;
        nu[i - 1] = if a <= b { None } else { Some(&a - &v) };
        mu[j - 1] = if a >= b { None } else { Some(&b - &v) };
    }
    Ok(x)
}

/// Number of independent cycles of a bipartite graph.
pub fn cycle_rank(m: usize, n: usize, edges: &BTreeSet<Edge>) -> usize {
    let c = bipartite_components(m, n, edges).count();
    edges.len() + c - (m + n)
}

/// True when the two vectors have equal totals.
pub fn balanced(demand: &[Q], supply: &[Q]) -> bool {
    demand.iter().fold(Q::zero(), |a, x| a + x) == supply.iter().fold(Q::zero(), |a, x| a + x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn e(i: usize, j: usize) -> Edge {
        Edge::new(i, j)
    }

    #[test]
    fn greedy_default_order() {
        let nu = [q(2), q(1)];
        let mu = [q(2), q(1)];
        let x = greedy_extreme_point(&nu, &mu, &GreedyOrder::FirstAvailable).unwrap();
        assert_eq!(x.support(), BTreeSet::from([e(1, 1), e(2, 2)]));
        assert_eq!(x.get(e(1, 1)), q(2));
    }

    #[test]
    fn greedy_explicit_order() {
        let nu = [q(2), q(1)];
        let mu = [q(2), q(1)];
        let order = GreedyOrder::Explicit(vec![e(1, 2), e(1, 1), e(2, 1)]);
        let x = greedy_extreme_point(&nu, &mu, &order).unwrap();
        assert_eq!(x.get(e(1, 2)), q(1));
        assert_eq!(x.get(e(1, 1)), q(1));
        assert_eq!(x.get(e(2, 1)), q(1));
        assert!(is_extreme_point(&nu, &mu, &x).unwrap());
        let bad = GreedyOrder::Explicit(vec![e(1, 1), e(1, 2)]);
        assert_eq!(greedy_extreme_point(&nu, &mu, &bad), Err(Error::InvalidChoice(e(1, 2))));
    }

    #[test]
    fn cycle_support_is_not_extreme() {
        let nu = [q(1), q(1)];
        let mu = [q(1), q(1)];
        let mut x = Assignment::new();
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            x.set(e(i, j), qf(1, 2)).unwrap();
        }
        assert!(!is_extreme_point(&nu, &mu, &x).unwrap());
        let mut y = Assignment::new();
        y.set(e(1, 1), q(1)).unwrap();
        assert!(matches!(is_extreme_point(&nu, &mu, &y), Err(Error::NotFeasiblePoint(_))));
    }

    #[test]
    fn component_order_puts_demandless_parts_last() {
        let c = bipartite_components(2, 3, &[e(2, 1), e(1, 3)]);
        assert_eq!(c.parts, vec![(vec![1], vec![3]), (vec![2], vec![1]), (vec![], vec![2])]);
        assert_eq!(c.supply_label, vec![1, 2, 0]);
    }
}
