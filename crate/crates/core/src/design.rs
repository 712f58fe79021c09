//! Minimum-edge graphs with a prescribed ERP number.

use crate::decomposition::crp_decomposition;
use crate::error::{Error, Result};
use crate::instance::{require_positive, Assignment, Edge, ProblemInstance};
use crate::polytope::{bipartite_components, check_marginals, greedy_block, GreedyOrder};
use crate::rational::{self, common_denominator, Q};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;

/// Largest `m + n` accepted by the balanced-cover search.
pub const COVER_LIMIT: usize = 24;

/// Smallest ERP number a forest can achieve:
/// `max(1, m + n - <1, nu> / gcd(nu, mu))`.
pub fn d_star(demand: &[Q], supply: &[Q]) -> Result<usize> {
    require_positive(demand, supply)?;
    let g = rational::gcd_combined(demand.iter().chain(supply))?;
    let units = (rational::sum(demand) / g).to_integer();
    let units = units.to_usize().unwrap_or(usize::MAX);
    let mn = demand.len() + supply.len();
    Ok(if units >= mn { 1 } else { (mn - units).max(1) })
}

fn scaled_weights(demand: &[Q], supply: &[Q]) -> Result<Vec<i128>> {
    let l = common_denominator(demand.iter().chain(supply));
    let conv = |x: &Q| -> Result<i128> {
        let v: BigInt = (x * Q::from_integer(l.clone())).to_integer();
        v.to_i64().map(i128::from).ok_or(Error::SizeLimitExceeded {
            what: "scaled rate magnitude",
            size: v.bits() as usize,
            limit: 63,
        })
    };
    let mut w = Vec::with_capacity(demand.len() + supply.len());
    for x in demand {
        w.push(conv(x)?);
    }
    for x in supply {
        w.push(-conv(x)?);
    }
    Ok(w)
}

fn mask_sum(w: &[i128], mask: usize) -> i128 {
    let mut s = 0;
    let mut rest = mask;
    while rest != 0 {
        s += w[rest.trailing_zeros() as usize];
        rest &= rest - 1;
    }
    s
}

/// `dp[mask]` is the largest number of zero-sum blocks that a sequence
/// of the elements of `mask` can be cut into; for a zero-sum mask this is
/// its largest partition into zero-sum parts.
fn cover_table(w: &[i128]) -> Vec<u8> {
    let full = 1usize << w.len();
    let mut dp = vec![0u8; full];
    for mask in 1..full {
        let mut best = 0;
        let mut rest = mask;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            best = best.max(dp[mask ^ bit]);
            rest ^= bit;
        }
        dp[mask] = best + u8::from(mask_sum(w, mask) == 0);
    }
    dp
}

fn mask_elements(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|k| mask >> k & 1 == 1).collect()
}

/// A partition of demands and supplies into the largest possible number
/// of equal-total pairs `(I_l, J_l)`; its length is `d★`.
///
/// Ties are broken by taking, for the part holding the smallest remaining
/// vertex (demands before supplies), the lexicographically smallest
/// vertex list.
pub fn max_balanced_cover(demand: &[Q], supply: &[Q]) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    require_positive(demand, supply)?;
    let (m, n) = (demand.len(), supply.len());
    if m + n > COVER_LIMIT {
        return Err(Error::SizeLimitExceeded { what: "m + n", size: m + n, limit: COVER_LIMIT });
    }
    if !crate::polytope::balanced(demand, supply) {
        return Err(Error::UnbalancedTotals {
            demand: rational::sum(demand).to_string(),
            supply: rational::sum(supply).to_string(),
        });
    }
    let w = scaled_weights(demand, supply)?;
    let dp = cover_table(&w);
    let mut remaining = (1usize << (m + n)) - 1;
    let mut parts = Vec::new();
    while remaining != 0 {
        let low = remaining & remaining.wrapping_neg();
        let others = remaining ^ low;
        let target = dp[remaining];
        let mut best: Option<(Vec<usize>, usize)> = None;
        // Walk every submask of `others`, each joined with the low bit.
        let mut sub = others;
        loop {
            let part = sub | low;
            if mask_sum(&w, part) == 0 && 1 + dp[remaining ^ part] == target {
                let els = mask_elements(part);
                if best.as_ref().map_or(true, |(b, _)| els < *b) {
                    best = Some((els, part));
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & others;
        }
        let (els, part) = best.ok_or_else(|| Error::InvariantViolation("cover reconstruction".into()))?;
        let is = els.iter().filter(|&&k| k < m).map(|&k| k + 1).collect();
        let js = els.iter().filter(|&&k| k >= m).map(|&k| k - m + 1).collect();
        parts.push((is, js));
        remaining ^= part;
    }
    Ok(parts)
}

/// Largest ERP number any graph supporting the rates can have.
pub fn d_star_star(demand: &[Q], supply: &[Q]) -> Result<usize> {
    max_balanced_cover(demand, supply).map(|c| c.len())
}

fn check_target(demand: &[Q], supply: &[Q], d: usize) -> Result<(usize, usize)> {
    if d == 0 {
        return Err(Error::InvalidTarget);
    }
    let ds = d_star(demand, supply)?;
    let dss = d_star_star(demand, supply)?;
    if d > dss {
        return Err(Error::TargetAboveDstarStar { d, max: dss });
    }
    Ok((ds, dss))
}

/// Fewest edges of a graph with ERP number exactly `d`:
/// `m + n - d`, plus one when `d < d⋆` (a cycle is unavoidable).
pub fn min_edges(demand: &[Q], supply: &[Q], d: usize) -> Result<usize> {
    let (ds, _) = check_target(demand, supply, d)?;
    Ok(demand.len() + supply.len() - d + usize::from(d < ds))
}

/// A designed graph and the point of its polytope that certifies it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    pub edges: BTreeSet<Edge>,
    pub assignment: Assignment,
    pub erp: usize,
    pub d_star: usize,
    pub d_star_star: usize,
    pub used_cycle: bool,
}

impl Design {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "edges": self.edges,
            "edge_count": self.edge_count(),
            "assignment": self.assignment.to_json(),
            "erp": self.erp,
            "d_star": self.d_star,
            "d_star_star": self.d_star_star,
            "used_cycle": self.used_cycle,
        })
    }
}

/// Intermediate points of the construction.
#[derive(Debug, Clone, Default)]
pub struct DesignTrace {
    pub initial: Assignment,
    pub merges: Vec<Assignment>,
}

pub fn design_flexibility(demand: &[Q], supply: &[Q], d: usize) -> Result<Design> {
    design_with_trace(demand, supply, d).map(|(des, _)| des)
}

fn sorted_component_edges(x: &Assignment, labels: &[usize], count: usize) -> Vec<Vec<Edge>> {
    let mut out = vec![Vec::new(); count];
    for (e, _) in x.iter() {
        out[labels[e.i - 1]].push(*e);
    }
    out
}

/// Finds the first exchangeable pair: component labels in order, then
/// edges lexicographically.
fn find_exchange(x: &Assignment, by_comp: &[Vec<Edge>]) -> Option<(Edge, Edge)> {
    for c1 in 0..by_comp.len() {
        for c2 in c1 + 1..by_comp.len() {
            for &a in &by_comp[c1] {
                for &b in &by_comp[c2] {
                    if x.get(a) != x.get(b) {
                        return Some((a, b));
                    }
                }
            }
        }
    }
    None
}

/// Builds a graph with ERP number `d` and the minimum number of edges.
///
/// Starts from one greedy tree per part of a maximum balanced cover, then
/// repeatedly exchanges flow between two components (which joins them
/// and stays a forest) until `max(d, d⋆)` remain. When `d < d⋆`, a final
/// cyclic exchange across `d⋆ - d + 1` components merges them with one
/// extra edge.
pub fn design_with_trace(demand: &[Q], supply: &[Q], d: usize) -> Result<(Design, DesignTrace)> {
    let (ds, dss) = check_target(demand, supply, d)?;
    let (m, n) = (demand.len(), supply.len());
    let cover = max_balanced_cover(demand, supply)?;
    let mut x = Assignment::new();
    for (is, js) in &cover {
        let block = greedy_block(demand, supply, is, js, &GreedyOrder::FirstAvailable)?;
        for (e, v) in block.iter() {
            x.set(*e, v.clone())?;
        }
    }
    let mut trace = DesignTrace { initial: x.clone(), merges: Vec::new() };
    let goal = d.max(ds);
    loop {
        let comps = bipartite_components(m, n, &x.support());
        if comps.count() <= goal {
            break;
        }
        let by_comp = sorted_component_edges(&x, &comps.demand_label, comps.count());
        let (a, b) = find_exchange(&x, &by_comp).ok_or(Error::InternalMergeStuck)?;
        let (va, vb) = (x.get(a), x.get(b));
        let v = if va < vb { va.clone() } else { vb.clone() };
        x.set(a, va - &v)?;
        x.set(b, vb - &v)?;
        x.add(Edge::new(a.i, b.j), &v)?;
        x.add(Edge::new(b.i, a.j), &v)?;
        trace.merges.push(x.clone());
    }
    let used_cycle = d < ds;
    if used_cycle {
        let comps = bipartite_components(m, n, &x.support());
        let by_comp = sorted_component_edges(&x, &comps.demand_label, comps.count());
        let e = ds - d + 1;
        let reps: Vec<Edge> = by_comp.iter().take(e).map(|es| es[0]).collect();
        let min = reps.iter().map(|r| x.get(*r)).min().expect("at least two components");
        let h = min / rational::q(2);
        for (k, r) in reps.iter().enumerate() {
            let next = reps[(k + 1) % e];
            let cur = x.get(*r);
            x.set(*r, cur - &h)?;
            x.add(Edge::new(r.i, next.j), &h)?;
        }
    }
    check_marginals(demand, supply, &x)?;
    let edges = x.support();
    let erp = crp_decomposition(&ProblemInstance::new(demand.to_vec(), supply.to_vec(), edges.iter().copied())?)?.erp();
    let design = Design { edges, assignment: x, erp, d_star: ds, d_star_star: dss, used_cycle };
    if design.erp != d || design.edge_count() != m + n - d + usize::from(used_cycle) {
        return Err(Error::InvariantViolation(format!(
            "design reached ERP {} with {} edges for target {d}",
            design.erp,
            design.edge_count()
        )));
    }
    Ok((design, trace))
}

/// Whether some spanning tree supports a point with every edge positive,
/// which holds iff `<1, nu> >= (m + n - 1) gcd(nu, mu)`.
pub fn tree_design_exists(demand: &[Q], supply: &[Q]) -> Result<bool> {
    require_positive(demand, supply)?;
    let g = rational::gcd_combined(demand.iter().chain(supply))?;
    let k = (demand.len() + supply.len() - 1) as i64;
    Ok(rational::sum(demand) >= g * rational::q(k))
}

/// True when every entry of `x` is positive; used by the invariant checks.
pub fn strictly_positive(x: &Assignment) -> bool {
    x.iter().all(|(_, v)| v.is_positive() && !v.is_zero())
}
