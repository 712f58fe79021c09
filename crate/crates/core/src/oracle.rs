//! Brute-force reference procedures.
//!
//! These are deliberately independent of the fast algorithms: feasibility
//! by Hall's condition over all demand subsets, redundancy by forcing a
//! little flow through the edge, and the CRP condition by its subset
//! definition. They are exponential in `m` and limited accordingly.

use crate::error::{Error, Result};
use crate::flow::max_flow;
use crate::instance::{Assignment, Edge, ProblemInstance};
use crate::rational::{common_denominator, Q};
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;

pub const SUBSET_LIMIT: usize = 20;

fn check_subset_limit(m: usize) -> Result<()> {
    if m > SUBSET_LIMIT {
        return Err(Error::SizeLimitExceeded { what: "demand side", size: m, limit: SUBSET_LIMIT });
    }
    Ok(())
}

/// Bitmask of supplies adjacent to each demand.
pub(crate) fn neighbor_masks(inst: &ProblemInstance, edges: &BTreeSet<Edge>) -> Vec<u64> {
    let mut masks = vec![0u64; inst.m()];
    for e in edges {
        masks[e.i - 1] |= 1 << (e.j - 1);
    }
    masks
}

pub(crate) fn masked_sum(xs: &[Q], mask: u64) -> Q {
    let mut s = Q::zero();
    let mut rest = mask;
    while rest != 0 {
        let k = rest.trailing_zeros() as usize;
        s += &xs[k];
        rest &= rest - 1;
    }
    s
}

/// Feasibility by Hall's condition: every demand subset must be covered
/// by the supply of its neighborhood.
pub fn hall_feasible(inst: &ProblemInstance) -> Result<bool> {
    check_subset_limit(inst.m())?;
    if inst.n() > 64 {
        return Err(Error::SizeLimitExceeded { what: "supply side", size: inst.n(), limit: 64 });
    }
    let masks = neighbor_masks(inst, inst.edges());
    let m = inst.m();
    let mut nbr = vec![0u64; 1 << m];
    for c in 1usize..1 << m {
        let low = c.trailing_zeros() as usize;
        nbr[c] = nbr[c & (c - 1)] | masks[low];
        let need = masked_sum(inst.demand(), c as u64);
        let have = masked_sum(inst.supply(), nbr[c]);
        if need > have {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Decides whether `e` carries positive flow at some point of `T_E` and
/// returns such a point.
///
/// All cut capacities are multiples of `1/L`, with `L` the common
/// denominator of the data. So if any positive amount can be forced through
/// `e`, then `1/L` can be. Forcing `1/L` and asking the max-flow solver to
/// route the remainder decides the question exactly.
pub fn redundancy_oracle(inst: &ProblemInstance, e: Edge) -> Result<Option<Assignment>> {
    if !inst.has_edge(e) {
        return Err(Error::InvariantViolation(format!("{e} is not an edge")));
    }
    if !inst.nu(e.i).is_positive() || !inst.mu(e.j).is_positive() {
        return Ok(None);
    }
    let l = common_denominator(inst.demand().iter().chain(inst.supply()));
    let t = Q::new(1.into(), l);
    let mut nu = inst.demand().to_vec();
    let mut mu = inst.supply().to_vec();
    nu[e.i - 1] -= &t;
    mu[e.j - 1] -= &t;
    let edges: Vec<Edge> = inst.edges().iter().copied().collect();
    let (value, mut x) = max_flow(&nu, &mu, &edges);
    if value != inst.total() - &t {
        return Ok(None);
    }
    x.add(e, &t)?;
    Ok(Some(x))
}

/// `E_r` computed edge by edge with [`redundancy_oracle`].
pub fn redundant_edges_oracle(inst: &ProblemInstance) -> Result<BTreeSet<Edge>> {
    let mut out = BTreeSet::new();
    for &e in inst.edges() {
        if redundancy_oracle(inst, e)?.is_none() {
            out.insert(e);
        }
    }
    Ok(out)
}

/// The subset form of the CRP condition: balance plus
/// `sum nu(C) < sum mu(N_E(C))` for every nonempty proper demand subset.
pub fn crp_condition_oracle(inst: &ProblemInstance) -> Result<bool> {
    check_subset_limit(inst.m())?;
    let m = inst.m();
    let masks = neighbor_masks(inst, inst.edges());
    let full = (1usize << m) - 1;
    let mut nbr = vec![0u64; 1 << m];
    for c in 1usize..full {
        let low = c.trailing_zeros() as usize;
        nbr[c] = nbr[c & (c - 1)] | masks[low];
        if masked_sum(inst.demand(), c as u64) >= masked_sum(inst.supply(), nbr[c]) {
            return Ok(false);
        }
    }
    Ok(true)
}
