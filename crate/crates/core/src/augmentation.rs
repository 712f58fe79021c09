//! Effect of adding one edge on the ERP number.

use crate::decomposition::{crp_decomposition, crp_graph, CrpDag, CrpDecomposition};
use crate::error::{Error, Result};
use crate::instance::{Edge, ProblemInstance};
use std::collections::BTreeSet;

/// Outcome of adding an edge `(i, j)` that is not yet present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeEffect {
    pub edge: Edge,
    pub old_erp: usize,
    pub new_erp: usize,
    /// Components on a DAG path from the component of `j` to that of `i`
    /// (0-based labels); they merge into one.
    pub cycle_vertices: BTreeSet<usize>,
}

impl EdgeEffect {
    pub fn delta(&self) -> usize {
        self.old_erp - self.new_erp
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "edge": self.edge,
            "old_erp": self.old_erp,
            "new_erp": self.new_erp,
            "delta": self.delta(),
            "cycle_vertices": self.cycle_vertices.iter().map(|l| l + 1).collect::<Vec<_>>(),
        })
    }
}

/// Components lying on some path `l2 ⇝ l1` in the DAG, endpoints included.
pub fn cycle_vertices(dag: &CrpDag, l1: usize, l2: usize) -> BTreeSet<usize> {
    let down = dag.descendants(l2);
    if !down.contains(&l1) {
        return BTreeSet::new();
    }
    down.intersection(&dag.ancestors(l1)).copied().collect()
}

/// Prediction from an existing decomposition, without recomputing it.
pub fn edge_effect_from(
    inst: &ProblemInstance,
    dec: &CrpDecomposition,
    dag: &CrpDag,
    e: Edge,
) -> Result<EdgeEffect> {
    inst.check_pair(e)?;
    if inst.has_edge(e) {
        return Err(Error::EdgeAlreadyPresent(e));
    }
    let l1 = dec.component_of_demand(e.i);
    let l2 = dec.component_of_supply(e.j);
    let vc = cycle_vertices(dag, l1, l2);
    let old = dec.erp();
    Ok(EdgeEffect { edge: e, old_erp: old, new_erp: old - vc.len().saturating_sub(1), cycle_vertices: vc })
}

/// New ERP number after adding `e`: every component on a path from the
/// component of `j` back to that of `i` merges into one.
pub fn add_edge_effect(inst: &ProblemInstance, e: Edge) -> Result<EdgeEffect> {
    let dec = crp_decomposition(inst)?;
    let dag = crp_graph(&dec)?;
    edge_effect_from(inst, &dec, &dag, e)
}

/// [`add_edge_effect`], cross-checked by decomposing the augmented graph.
pub fn add_edge_effect_checked(inst: &ProblemInstance, e: Edge) -> Result<EdgeEffect> {
    let eff = add_edge_effect(inst, e)?;
    let actual = crp_decomposition(&inst.with_edge(e)?)?.erp();
    if actual != eff.new_erp {
        return Err(Error::InvariantViolation(format!(
            "adding {e}: predicted ERP {}, recomputed {actual}",
            eff.new_erp
        )));
    }
    Ok(eff)
}

/// The lexicographically smallest absent edge from `I_a` to `J_b`.
fn representative(inst: &ProblemInstance, dec: &CrpDecomposition, a: usize, b: usize) -> Option<Edge> {
    let (ca, cb) = (&dec.components[a], &dec.components[b]);
    ca.demands
        .iter()
        .flat_map(|&i| cb.supplies.iter().map(move |&j| Edge::new(i, j)))
        .find(|e| !inst.has_edge(*e))
}

/// A single edge that lowers the ERP number the most.
///
/// Only edges from a sink component to a source component need to be
/// tried. Ties go to the lexicographically smallest edge.
pub fn best_single_edge(inst: &ProblemInstance) -> Result<EdgeEffect> {
    let dec = crp_decomposition(inst)?;
    if dec.erp() == 1 {
        return Err(Error::AlreadyCrp);
    }
    let dag = crp_graph(&dec)?;
    let mut best: Option<EdgeEffect> = None;
    for &sink in &dag.sinks() {
        for &source in &dag.sources() {
            let Some(e) = representative(inst, &dec, sink, source) else { continue };
            let eff = edge_effect_from(inst, &dec, &dag, e)?;
            let better = match &best {
                None => true,
                Some(b) => (eff.new_erp, eff.edge) < (b.new_erp, b.edge),
            };
            if better {
                best = Some(eff);
            }
        }
    }
    best.ok_or_else(|| Error::InvariantViolation("no absent edge between a sink and a source".into()))
}

/// Exhaustive version of [`best_single_edge`]: tries every absent edge.
pub fn best_single_edge_exhaustive(inst: &ProblemInstance) -> Result<Option<EdgeEffect>> {
    let dec = crp_decomposition(inst)?;
    let dag = crp_graph(&dec)?;
    let mut best: Option<EdgeEffect> = None;
    for i in 1..=inst.m() {
        for j in 1..=inst.n() {
            let e = Edge::new(i, j);
            if inst.has_edge(e) {
                continue;
            }
            let eff = edge_effect_from(inst, &dec, &dag, e)?;
            if best.as_ref().map_or(true, |b| (eff.new_erp, eff.edge) < (b.new_erp, b.edge)) {
                best = Some(eff);
            }
        }
    }
    Ok(best)
}
