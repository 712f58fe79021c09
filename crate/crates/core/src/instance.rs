//! Problem instances, edges and flow assignments.
//!
//! Demand vertices `i` and supply vertices `j` live in separate index
//! spaces, both 1-based.

use crate::error::{Error, Result, Side};
use crate::rational::{self, Q};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// An edge between demand `i` and supply `j`; serialises as `[i, j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Edge {
    pub i: usize,
    pub j: usize,
}

impl Edge {
    pub const fn new(i: usize, j: usize) -> Self {
        Edge { i, j }
    }
}

impl From<[usize; 2]> for Edge {
    fn from(a: [usize; 2]) -> Self {
        Edge::new(a[0], a[1])
    }
}

impl From<Edge> for [usize; 2] {
    fn from(e: Edge) -> Self {
        [e.i, e.j]
    }
}

impl From<(usize, usize)> for Edge {
    fn from(p: (usize, usize)) -> Self {
        Edge::new(p.0, p.1)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// A validated instance: nonnegative rates with equal totals and a simple
/// edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    demand: Vec<Q>,
    supply: Vec<Q>,
    edges: BTreeSet<Edge>,
}

impl ProblemInstance {
    pub fn new<E: Into<Edge>>(
        demand: Vec<Q>,
        supply: Vec<Q>,
        edges: impl IntoIterator<Item = E>,
    ) -> Result<Self> {
        let m = demand.len();
        let n = supply.len();
        let mut set = BTreeSet::new();
        for e in edges {
            let e = e.into();
            if e.i == 0 || e.i > m || e.j == 0 || e.j > n {
                return Err(Error::EdgeOutOfRange(e));
            }
            if !set.insert(e) {
                return Err(Error::DuplicateEdge(e));
            }
        }
        check_rates(&demand, &supply)?;
        Ok(ProblemInstance { demand, supply, edges: set })
    }

    /// Convenience constructor from integer rates.
    pub fn from_ints(demand: &[i64], supply: &[i64], edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            demand.iter().map(|&x| rational::q(x)).collect(),
            supply.iter().map(|&x| rational::q(x)).collect(),
            edges.iter().copied(),
        )
    }

    pub fn m(&self) -> usize {
        self.demand.len()
    }

    pub fn n(&self) -> usize {
        self.supply.len()
    }

    pub fn demand(&self) -> &[Q] {
        &self.demand
    }

    pub fn supply(&self) -> &[Q] {
        &self.supply
    }

    /// Demand rate of vertex `i` (1-based).
    pub fn nu(&self, i: usize) -> &Q {
        &self.demand[i - 1]
    }

    /// Supply rate of vertex `j` (1-based).
    pub fn mu(&self, j: usize) -> &Q {
        &self.supply[j - 1]
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    pub fn total(&self) -> Q {
        rational::sum(&self.demand)
    }

    /// Same rates, different edge set.
    pub fn with_edges<E: Into<Edge>>(&self, edges: impl IntoIterator<Item = E>) -> Result<Self> {
        Self::new(self.demand.clone(), self.supply.clone(), edges)
    }

    /// Same graph and supply, different demand.
    pub fn with_demand(&self, demand: Vec<Q>) -> Result<Self> {
        if demand.len() != self.m() {
            return Err(Error::Malformed(format!(
                "demand vector has length {}, expected {}",
                demand.len(),
                self.m()
            )));
        }
        Self::new(demand, self.supply.clone(), self.edges.iter().copied())
    }

    /// The instance with one extra edge.
    pub fn with_edge(&self, e: Edge) -> Result<Self> {
        self.check_pair(e)?;
        if self.has_edge(e) {
            return Err(Error::EdgeAlreadyPresent(e));
        }
        let mut edges = self.edges.clone();
        edges.insert(e);
        Ok(ProblemInstance { edges, ..self.clone() })
    }

    /// Validates that `e` addresses existing vertices.
    pub fn check_pair(&self, e: Edge) -> Result<()> {
        if e.i == 0 || e.i > self.m() {
            return Err(Error::IndexOutOfRange { index: e.i, max: self.m() });
        }
        if e.j == 0 || e.j > self.n() {
            return Err(Error::IndexOutOfRange { index: e.j, max: self.n() });
        }
        Ok(())
    }

    /// Supplies adjacent to each demand, indexed by `i - 1`.
    pub fn demand_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m()];
        for e in &self.edges {
            adj[e.i - 1].push(e.j);
        }
        adj
    }

    /// Demands adjacent to each supply, indexed by `j - 1`.
    pub fn supply_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n()];
        for e in &self.edges {
            adj[e.j - 1].push(e.i);
        }
        adj
    }

    /// `N_E(C)` for a set of demands.
    pub fn neighborhood<'a>(&self, demands: impl IntoIterator<Item = &'a usize>) -> BTreeSet<usize> {
        let c: BTreeSet<usize> = demands.into_iter().copied().collect();
        self.edges.iter().filter(|e| c.contains(&e.i)).map(|e| e.j).collect()
    }

    pub fn to_doc(&self) -> InstanceDoc {
        InstanceDoc {
            m: Some(self.m()),
            n: Some(self.n()),
            demand: self.demand.clone(),
            supply: self.supply.clone(),
            edges: self.edges.iter().copied().collect(),
        }
    }

    pub fn from_doc(doc: InstanceDoc) -> Result<Self> {
        if let Some(m) = doc.m {
            if m != doc.demand.len() {
                return Err(Error::Malformed(format!("m = {m} but {} demand rates", doc.demand.len())));
            }
        }
        if let Some(n) = doc.n {
            if n != doc.supply.len() {
                return Err(Error::Malformed(format!("n = {n} but {} supply rates", doc.supply.len())));
            }
        }
        Self::new(doc.demand, doc.supply, doc.edges)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_doc()).expect("instance serialises")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let doc: InstanceDoc =
            serde_json::from_value(v.clone()).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::from_doc(doc)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::from_json(&v)
    }
}

fn check_rates(demand: &[Q], supply: &[Q]) -> Result<()> {
    for (k, x) in demand.iter().enumerate() {
        if x.is_negative() {
            return Err(Error::NegativeRate { side: Side::Demand, index: k + 1 });
        }
    }
    for (k, x) in supply.iter().enumerate() {
        if x.is_negative() {
            return Err(Error::NegativeRate { side: Side::Supply, index: k + 1 });
        }
    }
    let (a, b) = (rational::sum(demand), rational::sum(supply));
    if a != b {
        return Err(Error::UnbalancedTotals { demand: a.to_string(), supply: b.to_string() });
    }
    Ok(())
}

/// Rejects zero rates; several constructions need strictly positive data.
pub fn require_positive(demand: &[Q], supply: &[Q]) -> Result<()> {
    for (k, x) in demand.iter().enumerate() {
        if !x.is_positive() {
            return Err(Error::NonPositiveRate { side: Side::Demand, index: k + 1 });
        }
    }
    for (k, x) in supply.iter().enumerate() {
        if !x.is_positive() {
            return Err(Error::NonPositiveRate { side: Side::Supply, index: k + 1 });
        }
    }
    Ok(())
}

/// Wire format of an instance. Rates are integers or `"p/q"` strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(with = "rational::serde_qvec")]
    pub demand: Vec<Q>,
    #[serde(with = "rational::serde_qvec")]
    pub supply: Vec<Q>,
    #[serde(default)]
    pub edges: Vec<Edge>,
}

/// Sparse flow assignment holding only strictly positive entries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    entries: BTreeMap<Edge, Q>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, e: Edge) -> Q {
        self.entries.get(&e).cloned().unwrap_or_else(Q::zero)
    }

    /// Stores `v`; zero removes the entry. Negative values are an error.
    pub fn set(&mut self, e: Edge, v: Q) -> Result<()> {
        if v.is_negative() {
            return Err(Error::InvariantViolation(format!("negative flow {v} on {e}")));
        }
        if v.is_zero() {
            self.entries.remove(&e);
        } else {
            self.entries.insert(e, v);
        }
        Ok(())
    }

    pub fn add(&mut self, e: Edge, v: &Q) -> Result<()> {
        let cur = self.get(e);
        self.set(e, cur + v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Edge, &Q)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `B(x)`: the edges carrying positive flow.
    pub fn support(&self) -> BTreeSet<Edge> {
        self.entries.keys().copied().collect()
    }

    pub fn scaled(&self, c: &Q) -> Assignment {
        let mut out = Assignment::new();
        for (e, v) in &self.entries {
            out.set(*e, v * c).expect("nonnegative scale");
        }
        out
    }

    /// Row and column sums, `m` demand rows and `n` supply columns.
    pub fn marginals(&self, m: usize, n: usize) -> Result<(Vec<Q>, Vec<Q>)> {
        let mut rows = vec![Q::zero(); m];
        let mut cols = vec![Q::zero(); n];
        for (e, v) in &self.entries {
            if e.i == 0 || e.i > m || e.j == 0 || e.j > n {
                return Err(Error::EdgeOutOfRange(*e));
            }
            rows[e.i - 1] += v;
            cols[e.j - 1] += v;
        }
        Ok((rows, cols))
    }

    /// JSON triples `[i, j, "p/q"]`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.entries
                .iter()
                .map(|(e, v)| serde_json::json!([e.i, e.j, v.to_string()]))
                .collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = || Error::Malformed("assignment must be a list of [i, j, value]".into());
        let mut out = Assignment::new();
        for t in v.as_array().ok_or_else(bad)? {
            let t = t.as_array().ok_or_else(bad)?;
            if t.len() != 3 {
                return Err(bad());
            }
            let i = t[0].as_u64().ok_or_else(bad)? as usize;
            let j = t[1].as_u64().ok_or_else(bad)? as usize;
            let x = rational::from_json(&t[2])?;
            if x.is_negative() {
                return Err(Error::NotFeasiblePoint(format!("negative entry at ({i},{j})")));
            }
            out.set(Edge::new(i, j), x)?;
        }
        Ok(out)
    }
}
