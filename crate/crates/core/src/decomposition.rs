//! Redundant edges, the CRP decomposition and its DAG.

use crate::error::{Error, Result};
use crate::flow::{find_feasible_point_with, FlowOrder};
use crate::instance::{Assignment, Edge, ProblemInstance};
use crate::oracle;
use crate::polytope::{bipartite_components, check_point};
use crate::rational::{self, Q};
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Redundant edges together with the number of elementary steps spent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedundancyRun {
    pub redundant: BTreeSet<Edge>,
    pub work: u64,
}

/// Edges carrying zero flow at every point of `T_E`.
pub fn redundant_edges(inst: &ProblemInstance) -> Result<BTreeSet<Edge>> {
    redundant_edges_with(inst, FlowOrder::Natural).map(|r| r.redundant)
}

/// [`redundant_edges`] seeded by the feasible point the solver returns
/// under `order`. The result does not depend on the order.
pub fn redundant_edges_with(inst: &ProblemInstance, order: FlowOrder) -> Result<RedundancyRun> {
    let x = find_feasible_point_with(inst, order).ok_or(Error::Infeasible)?;
    redundant_edges_from_point(inst, &x)
}

/// Alternating-path search from a known feasible point `x`.
///
/// From each supply `l`, alternate support edges (supply to demand) and
/// arbitrary edges (demand to supply). With `C` the demands reached, every
/// edge from outside `C` into `N_E(C)` is redundant.
pub fn redundant_edges_from_point(inst: &ProblemInstance, x: &Assignment) -> Result<RedundancyRun> {
    check_point(inst, x)?;
    let (m, n) = (inst.m(), inst.n());
    let e_adj = inst.demand_adjacency();
    let s_adj = inst.supply_adjacency();
    let mut b_adj = vec![Vec::new(); n];
    for (e, _) in x.iter() {
        b_adj[e.j - 1].push(e.i);
    }
    let mut redundant = BTreeSet::new();
    let mut work = 0u64;
    // An edge at a zero-rate vertex can never carry flow.
    for e in inst.edges() {
        if inst.nu(e.i).is_zero() || inst.mu(e.j).is_zero() {
            redundant.insert(*e);
        }
    }
    let mut in_c = vec![false; m];
    let mut in_n = vec![false; n];
    for lambda in 1..=n {
        in_c.iter_mut().for_each(|v| *v = false);
        in_n.iter_mut().for_each(|v| *v = false);
        work += (m + n) as u64;
        in_n[lambda - 1] = true;
        let mut reached = vec![lambda];
        let mut queue = VecDeque::from([lambda]);
        let mut demands = Vec::new();
        while let Some(j) = queue.pop_front() {
            for &i in &b_adj[j - 1] {
                work += 1;
                if in_c[i - 1] {
                    continue;
                }
                in_c[i - 1] = true;
                demands.push(i);
                for &j2 in &e_adj[i - 1] {
                    work += 1;
                    if !in_n[j2 - 1] {
                        in_n[j2 - 1] = true;
                        reached.push(j2);
                        queue.push_back(j2);
                    }
                }
            }
        }
        if demands.is_empty() {
            continue;
        }
        // Every reached supply is an E-neighbor of C: lambda has positive
        // flow into C, the rest were entered from C.
        for &j in &reached {
            for &i in &s_adj[j - 1] {
                work += 1;
                if !in_c[i - 1] {
                    redundant.insert(Edge::new(i, j));
                }
            }
        }
    }
    Ok(RedundancyRun { redundant, work })
}

/// One maximal CRP subgraph `G_l = (I_l, J_l, E_l)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrpComponent {
    pub demands: Vec<usize>,
    pub supplies: Vec<usize>,
    pub edges: Vec<Edge>,
}

impl CrpComponent {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "demands": self.demands,
            "supplies": self.supplies,
            "edges": self.edges,
        })
    }
}

/// Partition of the graph into maximal CRP subgraphs after deleting the
/// redundant edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrpDecomposition {
    pub redundant: BTreeSet<Edge>,
    pub components: Vec<CrpComponent>,
    demand_label: Vec<usize>,
    supply_label: Vec<usize>,
}

impl CrpDecomposition {
    /// The ERP number: how many maximal CRP subgraphs there are.
    pub fn erp(&self) -> usize {
        self.components.len()
    }

    /// 0-based label of the component holding demand `i`.
    pub fn component_of_demand(&self, i: usize) -> usize {
        self.demand_label[i - 1]
    }

    /// 0-based label of the component holding supply `j`.
    pub fn component_of_supply(&self, j: usize) -> usize {
        self.supply_label[j - 1]
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "erp": self.erp(),
            "redundant_edges": self.redundant,
            "components": self.components.iter().map(CrpComponent::to_json).collect::<Vec<_>>(),
        })
    }
}

pub fn crp_decomposition(inst: &ProblemInstance) -> Result<CrpDecomposition> {
    let redundant = redundant_edges(inst)?;
    Ok(decomposition_from_redundant(inst, redundant))
}

pub(crate) fn decomposition_from_redundant(
    inst: &ProblemInstance,
    redundant: BTreeSet<Edge>,
) -> CrpDecomposition {
    let kept: Vec<Edge> = inst.edges().difference(&redundant).copied().collect();
    let comps = bipartite_components(inst.m(), inst.n(), &kept);
    let mut components: Vec<CrpComponent> = comps
        .parts
        .iter()
        .map(|(is, js)| CrpComponent { demands: is.clone(), supplies: js.clone(), edges: Vec::new() })
        .collect();
    for e in kept {
        components[comps.demand_label[e.i - 1]].edges.push(e);
    }
    CrpDecomposition {
        redundant,
        components,
        demand_label: comps.demand_label,
        supply_label: comps.supply_label,
    }
}

/// A point of `T_E` whose support is exactly `E \ E_r`, built by averaging
/// one witness per non-redundant edge.
pub fn full_support_point(inst: &ProblemInstance) -> Result<Assignment> {
    let mut acc = Assignment::new();
    let mut count = 0i64;
    for &e in inst.edges() {
        if let Some(w) = oracle::redundancy_oracle(inst, e)? {
            for (f, v) in w.iter() {
                acc.add(*f, v)?;
            }
            count += 1;
        }
    }
    if count == 0 {
        // Only possible when every rate is zero.
        return crate::flow::find_feasible_point(inst).ok_or(Error::Infeasible);
    }
    Ok(acc.scaled(&rational::qf(1, count)))
}

/// The CRP condition: connected, and no edge is redundant.
pub fn crp_condition(inst: &ProblemInstance) -> bool {
    if bipartite_components(inst.m(), inst.n(), inst.edges()).count() != 1 {
        return false;
    }
    matches!(redundant_edges(inst), Ok(r) if r.is_empty())
}

/// Directed multigraph on components: each redundant edge `(i, j)` gives
/// an arc from the component of `i` to the component of `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrpDag {
    pub vertices: usize,
    /// `(from, to) -> multiplicity`, 0-based labels.
    pub arcs: BTreeMap<(usize, usize), usize>,
}

impl CrpDag {
    pub fn arc_count(&self) -> usize {
        self.arcs.values().sum()
    }

    fn successors(&self) -> Vec<Vec<usize>> {
        let mut s = vec![Vec::new(); self.vertices];
        for &(a, b) in self.arcs.keys() {
            s[a].push(b);
        }
        s
    }

    fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.vertices];
        for &(a, b) in self.arcs.keys() {
            p[b].push(a);
        }
        p
    }

    fn reach(adj: &[Vec<usize>], start: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Vertices reachable from `l`, including `l`.
    pub fn descendants(&self, l: usize) -> BTreeSet<usize> {
        Self::reach(&self.successors(), l)
    }

    /// Vertices that reach `l`, including `l`.
    pub fn ancestors(&self, l: usize) -> BTreeSet<usize> {
        Self::reach(&self.predecessors(), l)
    }

    pub fn sinks(&self) -> Vec<usize> {
        let s = self.successors();
        (0..self.vertices).filter(|&l| s[l].is_empty()).collect()
    }

    pub fn sources(&self) -> Vec<usize> {
        let p = self.predecessors();
        (0..self.vertices).filter(|&l| p[l].is_empty()).collect()
    }

    /// Kahn's algorithm; `None` if a directed cycle (or self-loop) exists.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg = vec![0usize; self.vertices];
        for &(a, b) in self.arcs.keys() {
            if a == b {
                return None;
            }
            indeg[b] += 1;
        }
        let succ = self.successors();
        let mut ready: VecDeque<usize> = (0..self.vertices).filter(|&l| indeg[l] == 0).collect();
        let mut order = Vec::with_capacity(self.vertices);
        while let Some(u) = ready.pop_front() {
            order.push(u);
            for &v in &succ[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    ready.push_back(v);
                }
            }
        }
        (order.len() == self.vertices).then_some(order)
    }

    /// Arcs as `[from, to, multiplicity]` with 1-based labels.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertices,
            "arcs": self.arcs.iter().map(|(&(a, b), &k)| [a + 1, b + 1, k]).collect::<Vec<_>>(),
        })
    }
}

pub fn crp_graph(dec: &CrpDecomposition) -> Result<CrpDag> {
    let mut arcs = BTreeMap::new();
    for e in &dec.redundant {
        let key = (dec.component_of_demand(e.i), dec.component_of_supply(e.j));
        *arcs.entry(key).or_insert(0) += 1;
    }
    let dag = CrpDag { vertices: dec.erp(), arcs };
    if dag.topological_order().is_none() {
        return Err(Error::InvariantViolation("CRP graph has a directed cycle".into()));
    }
    Ok(dag)
}

/// Indicator vectors of the demand sets `I_l`; they span the subspace the
/// heavy-traffic queue state collapses onto.
pub fn ssc_basis(dec: &CrpDecomposition, m: usize) -> Vec<Vec<u8>> {
    dec.components
        .iter()
        .map(|c| {
            let mut v = vec![0u8; m];
            for &i in &c.demands {
                v[i - 1] = 1;
            }
            v
        })
        .collect()
}

/// Builds the components induced by a demand cover: `J_l` is the
/// neighborhood of `I_l` minus everything claimed by earlier parts.
pub fn components_from_cover(inst: &ProblemInstance, cover: &[Vec<usize>]) -> Result<Vec<CrpComponent>> {
    let mut seen = vec![false; inst.m()];
    for part in cover {
        if part.is_empty() {
            return Err(Error::NotAPartition("empty part".into()));
        }
        for &i in part {
            if i == 0 || i > inst.m() {
                return Err(Error::NotAPartition(format!("demand {i} out of range")));
            }
            if std::mem::replace(&mut seen[i - 1], true) {
                return Err(Error::NotAPartition(format!("demand {i} appears twice")));
            }
        }
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(Error::NotAPartition(format!("demand {} is not covered", k + 1)));
    }
    let mut claimed = BTreeSet::new();
    let mut out = Vec::new();
    for part in cover {
        let demands: BTreeSet<usize> = part.iter().copied().collect();
        let supplies: BTreeSet<usize> =
            inst.neighborhood(&demands).difference(&claimed).copied().collect();
        claimed.extend(supplies.iter().copied());
        let edges = inst
            .edges()
            .iter()
            .filter(|e| demands.contains(&e.i) && supplies.contains(&e.j))
            .copied()
            .collect();
        out.push(CrpComponent {
            demands: demands.into_iter().collect(),
            supplies: supplies.into_iter().collect(),
            edges,
        });
    }
    Ok(out)
}

/// The component as a standalone instance (local indices), or `None` if
/// its rates are unbalanced.
pub fn component_instance(inst: &ProblemInstance, c: &CrpComponent) -> Option<ProblemInstance> {
    let di: BTreeMap<usize, usize> = c.demands.iter().enumerate().map(|(k, &i)| (i, k + 1)).collect();
    let sj: BTreeMap<usize, usize> = c.supplies.iter().enumerate().map(|(k, &j)| (j, k + 1)).collect();
    let nu: Vec<Q> = c.demands.iter().map(|&i| inst.nu(i).clone()).collect();
    let mu: Vec<Q> = c.supplies.iter().map(|&j| inst.mu(j).clone()).collect();
    let edges = c.edges.iter().map(|e| Edge::new(di[&e.i], sj[&e.j]));
    ProblemInstance::new(nu, mu, edges).ok()
}

/// Whether the cover induces a decomposition into CRP subgraphs covering
/// every supply. A valid cover reproduces [`crp_decomposition`].
pub fn verify_decomposition(inst: &ProblemInstance, cover: &[Vec<usize>]) -> Result<bool> {
    let comps = components_from_cover(inst, cover)?;
    let covered: usize = comps.iter().map(|c| c.supplies.len()).sum();
    if covered != inst.n() {
        return Ok(false);
    }
    Ok(comps.iter().all(|c| match component_instance(inst, c) {
        Some(sub) => crate::flow::is_feasible(&sub) && crp_condition(&sub),
        None => false,
    }))
}

/// Re-derives every structural property of a decomposition.
pub fn check_decomposition(inst: &ProblemInstance, dec: &CrpDecomposition) -> Result<()> {
    let fail = |s: String| Err(Error::InvariantViolation(s));
    let mut dseen = vec![0usize; inst.m()];
    let mut sseen = vec![0usize; inst.n()];
    let mut edge_total = 0;
    for (l, c) in dec.components.iter().enumerate() {
        c.demands.iter().for_each(|&i| dseen[i - 1] += 1);
        c.supplies.iter().for_each(|&j| sseen[j - 1] += 1);
        edge_total += c.edges.len();
        for e in &c.edges {
            if !c.demands.contains(&e.i) || !c.supplies.contains(&e.j) {
                return fail(format!("edge {e} leaves component {}", l + 1));
            }
        }
        let a = rational::sum(c.demands.iter().map(|&i| inst.nu(i)));
        let b = rational::sum(c.supplies.iter().map(|&j| inst.mu(j)));
        if a != b {
            return fail(format!("component {} is unbalanced", l + 1));
        }
        let sub = component_instance(inst, c).expect("balanced");
        let positive = sub.demand().iter().chain(sub.supply()).all(|x| x.is_positive());
        if positive && !crp_condition(&sub) {
            return fail(format!("component {} violates the CRP condition", l + 1));
        }
    }
    if dseen.iter().chain(&sseen).any(|&k| k != 1) {
        return fail("components do not partition the vertices".into());
    }
    if edge_total + dec.redundant.len() != inst.edges().len() {
        return fail("component edges and redundant edges do not partition E".into());
    }
    for e in &dec.redundant {
        if dec.component_of_demand(e.i) == dec.component_of_supply(e.j) {
            return fail(format!("redundant edge {e} lies inside a component"));
        }
    }
    crp_graph(dec).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize, j: usize) -> Edge {
        Edge::new(i, j)
    }

    fn diamond() -> ProblemInstance {
        ProblemInstance::from_ints(&[1, 1], &[1, 1], &[(1, 1), (2, 1), (2, 2)]).unwrap()
    }

    #[test]
    fn redundant_edge_found() {
        let inst = diamond();
        assert_eq!(redundant_edges(&inst).unwrap(), BTreeSet::from([e(2, 1)]));
        let dec = crp_decomposition(&inst).unwrap();
        assert_eq!(dec.erp(), 2);
        let dag = crp_graph(&dec).unwrap();
        assert_eq!(dag.arcs, BTreeMap::from([((1, 0), 1)]));
        check_decomposition(&inst, &dec).unwrap();
    }

    #[test]
    fn complete_graph_is_crp() {
        let inst = ProblemInstance::from_ints(&[1, 1], &[1, 1], &[(1, 1), (1, 2), (2, 1), (2, 2)]).unwrap();
        assert!(crp_condition(&inst));
        let x = full_support_point(&inst).unwrap();
        assert_eq!(x.support(), inst.edges().clone());
    }

    #[test]
    fn zero_supply_edges_are_redundant() {
        let inst = ProblemInstance::from_ints(&[1, 0], &[1, 0], &[(1, 1), (1, 2), (2, 2)]).unwrap();
        let r = redundant_edges(&inst).unwrap();
        assert_eq!(r, BTreeSet::from([e(1, 2), e(2, 2)]));
        let dec = crp_decomposition(&inst).unwrap();
        assert_eq!(dec.erp(), 3);
        check_decomposition(&inst, &dec).unwrap();
    }

    #[test]
    fn cover_errors() {
        let inst = diamond();
        assert!(matches!(verify_decomposition(&inst, &[vec![1]]), Err(Error::NotAPartition(_))));
        assert!(matches!(verify_decomposition(&inst, &[vec![1, 2], vec![2]]), Err(Error::NotAPartition(_))));
        assert!(verify_decomposition(&inst, &[vec![1], vec![2]]).unwrap());
        // Taking demand 2 first claims supply 1 and starves demand 1.
        assert!(!verify_decomposition(&inst, &[vec![2], vec![1]]).unwrap());
    }
}
