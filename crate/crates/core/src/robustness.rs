//! CRP gap: how far demand can shift before the decomposition coarsens.

use crate::decomposition::{crp_decomposition, redundant_edges};
use crate::error::{Error, Result};
use crate::flow::is_feasible;
use crate::instance::{Edge, ProblemInstance};
use crate::oracle::SUBSET_LIMIT;
use crate::rational::{self, common_denominator, Q};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;

/// A gap value with the demand set attaining it; `None` when no demand
/// set qualifies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gap {
    pub value: Option<Q>,
    pub argmin: Option<Vec<usize>>,
}

impl Gap {
    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "defined": self.is_defined(),
            "value": self.value.as_ref().map(rational::to_json),
            "argmin": self.argmin,
        })
    }
}

fn scaled(xs: &[Q], l: &BigInt) -> Result<Vec<i128>> {
    xs.iter()
        .map(|x| {
            let v = (x * Q::from_integer(l.clone())).to_integer();
            v.to_i64().map(i128::from).ok_or(Error::SizeLimitExceeded {
                what: "scaled rate magnitude",
                size: v.bits() as usize,
                limit: 63,
            })
        })
        .collect()
}

fn mask_list(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|k| mask >> k & 1 == 1).map(|k| k + 1).collect()
}

fn masks(m: usize, edges: impl IntoIterator<Item = Edge>) -> Vec<u64> {
    let mut out = vec![0u64; m];
    for e in edges {
        out[e.i - 1] |= 1 << (e.j - 1);
    }
    out
}

/// Minimises `sum mu(N_E(C)) - sum nu(C)` over nonempty `C` whose surplus
/// on the `gate` edges is positive.
fn gap_over(inst: &ProblemInstance, gate: &BTreeSet<Edge>) -> Result<Gap> {
    let (m, n) = (inst.m(), inst.n());
    if m > SUBSET_LIMIT {
        return Err(Error::SizeLimitExceeded { what: "demand side", size: m, limit: SUBSET_LIMIT });
    }
    if n > 64 {
        return Err(Error::SizeLimitExceeded { what: "supply side", size: n, limit: 64 });
    }
    let l = common_denominator(inst.demand().iter().chain(inst.supply()));
    let nu = scaled(inst.demand(), &l)?;
    let mu = scaled(inst.supply(), &l)?;
    let full_mask = masks(m, inst.edges().iter().copied());
    let gate_mask = masks(m, gate.iter().copied());
    let mu_sum = |mask: u64| -> i128 {
        let mut s = 0;
        let mut r = mask;
        while r != 0 {
            s += mu[r.trailing_zeros() as usize];
            r &= r - 1;
        }
        s
    };
    let size = 1usize << m;
    let mut nb_full = vec![0u64; size];
    let mut nb_gate = vec![0u64; size];
    let mut demand = vec![0i128; size];
    let mut best: Option<(i128, usize)> = None;
    for c in 1..size {
        let low = c.trailing_zeros() as usize;
        let prev = c & (c - 1);
        nb_full[c] = nb_full[prev] | full_mask[low];
        nb_gate[c] = nb_gate[prev] | gate_mask[low];
        demand[c] = demand[prev] + nu[low];
        if mu_sum(nb_gate[c]) - demand[c] <= 0 {
            continue;
        }
        let v = mu_sum(nb_full[c]) - demand[c];
        let better = match best {
            None => true,
            Some((bv, bc)) => v < bv || (v == bv && mask_list(c) < mask_list(bc)),
        };
        if better {
            best = Some((v, c));
        }
    }
    Ok(match best {
        None => Gap { value: None, argmin: None },
        Some((v, c)) => Gap {
            value: Some(Q::new(BigInt::from(v), l)),
            argmin: Some(mask_list(c)),
        },
    })
}

/// The CRP gap `δ`: qualifying sets need positive surplus on `E \ E_r`.
pub fn crp_gap(inst: &ProblemInstance) -> Result<Gap> {
    let red = redundant_edges(inst)?;
    let kept: BTreeSet<Edge> = inst.edges().difference(&red).copied().collect();
    gap_over(inst, &kept)
}

/// Variant that qualifies sets by their surplus on all of `E`. Unlike
/// [`crp_gap`] it can drop when an edge is added.
pub fn alt_crp_gap(inst: &ProblemInstance) -> Result<Gap> {
    if !is_feasible(inst) {
        return Err(Error::Infeasible);
    }
    gap_over(inst, inst.edges())
}

/// `(δ(E), δ(E \ E_r))`; the two always agree.
pub fn gap_redundancy_invariance(inst: &ProblemInstance) -> Result<(Gap, Gap)> {
    let red = redundant_edges(inst)?;
    let pruned = inst.with_edges(inst.edges().difference(&red).copied())?;
    Ok((crp_gap(inst)?, crp_gap(&pruned)?))
}

/// Result of shifting demand by `ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationCheck {
    pub admissible: bool,
    pub reasons: Vec<String>,
    pub erp_before: usize,
    pub erp_after: Option<usize>,
    /// `ERP(nu + ω) <= ERP(nu)`; `None` when not admissible.
    pub holds: Option<bool>,
}

impl PerturbationCheck {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "admissible": self.admissible,
            "reasons": self.reasons,
            "erp_before": self.erp_before,
            "erp_after": self.erp_after,
            "holds": self.holds,
        })
    }
}

/// A shift `ω` is admissible when it sums to zero, `‖ω‖₁ < 2δ`, and the
/// shifted demand is still servable. Admissible shifts never raise the
/// ERP number.
pub fn check_perturbation(inst: &ProblemInstance, omega: &[Q]) -> Result<PerturbationCheck> {
    if omega.len() != inst.m() {
        return Err(Error::Malformed(format!("ω has length {}, expected {}", omega.len(), inst.m())));
    }
    let delta = crp_gap(inst)?.value.ok_or(Error::GapUndefined)?;
    let erp_before = crp_decomposition(inst)?.erp();
    let mut reasons = Vec::new();
    if !rational::sum(omega).is_zero() {
        reasons.push("ω does not sum to zero".to_string());
    }
    let norm = omega.iter().fold(Q::zero(), |a, w| a + w.abs());
    if norm >= &delta * rational::q(2) {
        reasons.push(format!("‖ω‖₁ = {norm} is not below 2δ = {}", &delta * rational::q(2)));
    }
    let shifted: Vec<Q> = inst.demand().iter().zip(omega).map(|(a, b)| a + b).collect();
    if let Some(k) = shifted.iter().position(|x| x.is_negative()) {
        reasons.push(format!("shifted demand {} is negative", k + 1));
    }
    let mut erp_after = None;
    if reasons.is_empty() {
        let moved = inst.with_demand(shifted)?;
        if is_feasible(&moved) {
            erp_after = Some(crp_decomposition(&moved)?.erp());
        } else {
            reasons.push("shifted polytope is empty".to_string());
        }
    }
    Ok(PerturbationCheck {
        admissible: reasons.is_empty(),
        reasons,
        erp_before,
        erp_after,
        holds: erp_after.map(|a| a <= erp_before),
    })
}

/// Gaps before and after adding one edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeGapComparison {
    pub gap_before: Gap,
    pub gap_after: Gap,
    pub alt_before: Gap,
    pub alt_after: Gap,
}

pub fn compare_gaps_after_edge(inst: &ProblemInstance, e: Edge) -> Result<EdgeGapComparison> {
    let after = inst.with_edge(e)?;
    Ok(EdgeGapComparison {
        gap_before: crp_gap(inst)?,
        gap_after: crp_gap(&after)?,
        alt_before: alt_crp_gap(inst)?,
        alt_after: alt_crp_gap(&after)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn single_pair_has_no_gap() {
        let inst = ProblemInstance::from_ints(&[1], &[1], &[(1, 1)]).unwrap();
        assert!(!crp_gap(&inst).unwrap().is_defined());
        assert_eq!(check_perturbation(&inst, &[q(0)]), Err(Error::GapUndefined));
    }

    #[test]
    fn gap_of_complete_pair() {
        let inst = ProblemInstance::from_ints(&[1, 1], &[1, 1], &[(1, 1), (1, 2), (2, 1), (2, 2)]).unwrap();
        let g = crp_gap(&inst).unwrap();
        assert_eq!(g.value, Some(q(1)));
        assert_eq!(g.argmin, Some(vec![1]));
    }
}
