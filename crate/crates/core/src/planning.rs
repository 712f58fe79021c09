//! Multi-step edge addition plans.
//!
//! Starting from `eta` disjoint CRP components, a budget of `K` single-edge
//! additions is spent to minimise `sum_k f_k(ERP after step k)` for
//! nondecreasing `f_k`. Optimal plans are chains of components closed into
//! cycles at steps `k_1 < ... < k_p`. With `k_0 = 0`, the ERP number after
//! step `k` is `max(eta - max{k_l - l : k_l <= k}, 1)`.

use crate::augmentation::{add_edge_effect, best_single_edge};
use crate::decomposition::crp_decomposition;
use crate::error::{Error, Result};
use crate::instance::{Edge, ProblemInstance};
use crate::rational::{self, q, Q};
use num_traits::{One, ToPrimitive, Zero};

/// Per-step cost functions `f_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Objective {
    /// `f_k(x) = x`.
    Sum,
    /// Only the ERP number after the last step counts.
    Final,
    /// `tables[k - 1][x - 1] = f_k(x)`; each row nondecreasing.
    Tables(Vec<Vec<Q>>),
}

impl Objective {
    pub fn validate(&self, eta: usize, horizon: usize) -> Result<()> {
        if let Objective::Tables(rows) = self {
            if rows.len() != horizon {
                return Err(Error::InvalidObjective(format!("{} rows for a budget of {horizon}", rows.len())));
            }
            for (k, row) in rows.iter().enumerate() {
                if row.len() < eta {
                    return Err(Error::InvalidObjective(format!("row {} has fewer than {eta} values", k + 1)));
                }
                if row.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::InvalidObjective(format!("row {} is not nondecreasing", k + 1)));
                }
            }
        }
        Ok(())
    }

    /// `f_step(erp)` with 1-based step.
    pub fn cost(&self, step: usize, horizon: usize, erp: usize) -> Q {
        match self {
            Objective::Sum => q(erp as i64),
            Objective::Final if step == horizon => q(erp as i64),
            Objective::Final => Q::zero(),
            Objective::Tables(rows) => rows[step - 1][erp - 1].clone(),
        }
    }

    pub fn total(&self, trajectory: &[usize]) -> Q {
        let h = trajectory.len();
        trajectory.iter().enumerate().map(|(k, &v)| self.cost(k + 1, h, v)).fold(Q::zero(), |a, b| a + b)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Objective::Sum => "sum",
            Objective::Final => "final",
            Objective::Tables(_) => "tables",
        }
    }
}

/// ERP number after each addition, recomputed from scratch and checked
/// against the single-edge prediction. `None` entries add nothing.
pub fn erp_trajectory(inst: &ProblemInstance, seq: &[Option<Edge>]) -> Result<Vec<usize>> {
    let mut cur = inst.clone();
    let mut erp = crp_decomposition(&cur)?.erp();
    let mut out = Vec::with_capacity(seq.len());
    for e in seq {
        if let Some(e) = *e {
            let predicted = add_edge_effect(&cur, e)?.new_erp;
            cur = cur.with_edge(e)?;
            erp = crp_decomposition(&cur)?.erp();
            if erp != predicted {
                return Err(Error::InvariantViolation(format!(
                    "adding {e}: predicted ERP {predicted}, recomputed {erp}"
                )));
            }
        }
        out.push(erp);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Chain,
    Cycle,
    /// The prescribed pair is internal to a component or runs past the
    /// last component; adding it cannot change anything, so nothing is
    /// added.
    Idle,
}

/// A structured plan on `eta` components, expressed in component indices:
/// step `(a, b)` joins the representative demand of component `a` to the
/// representative supply of component `b` (both 1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub eta: usize,
    pub horizon: usize,
    pub k: Vec<usize>,
    pub steps: Vec<Option<(usize, usize)>>,
    pub kinds: Vec<StepKind>,
}

impl Schedule {
    pub fn p(&self) -> usize {
        self.k.len()
    }

    /// Maps component pairs to edges given `(demand, supply)`
    /// representatives per component.
    pub fn realize(&self, reps: &[(usize, usize)]) -> Vec<Option<Edge>> {
        self.steps
            .iter()
            .map(|s| s.map(|(a, b)| Edge::new(reps[a - 1].0, reps[b - 1].1)))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "eta": self.eta,
            "horizon": self.horizon,
            "p": self.p(),
            "k": self.k,
            "steps": self.steps.iter().map(|s| s.map(|(a, b)| [a, b])).collect::<Vec<_>>(),
        })
    }
}

/// Checks `0 < k_1 < ... < k_p <= K` with `k_l <= eta + l - 1`.
pub fn check_k(eta: usize, horizon: usize, k: &[usize]) -> Result<()> {
    let mut prev = 0;
    for (idx, &kl) in k.iter().enumerate() {
        let l = idx + 1;
        if kl <= prev {
            return Err(Error::InvalidK(format!("k_{l} = {kl} does not exceed {prev}")));
        }
        if kl > eta + l - 1 {
            return Err(Error::InvalidK(format!("k_{l} = {kl} exceeds eta + {} = {}", l - 1, eta + l - 1)));
        }
        if kl > horizon {
            return Err(Error::InvalidK(format!("k_{l} = {kl} exceeds the budget {horizon}")));
        }
        prev = kl;
    }
    Ok(())
}

/// The chain-and-close plan for closing steps `k`.
///
/// A non-closing step `k` adds `(i_{k-c}, j_{k-c+1})`, where `c` counts
/// the closings so far. Closing step `k_l` adds
/// `(i_{k_l - l + 1}, j_{k_{l-1} - l + 2})`.
pub fn structured_schedule(eta: usize, horizon: usize, p: usize, k: &[usize]) -> Result<Schedule> {
    if eta == 0 {
        return Err(Error::InvalidK("eta must be positive".into()));
    }
    if p != k.len() {
        return Err(Error::InvalidK(format!("p = {p} but {} closing steps given", k.len())));
    }
    check_k(eta, horizon, k)?;
    let mut steps = Vec::with_capacity(horizon);
    let mut kinds = Vec::with_capacity(horizon);
    for step in 1..=horizon {
        let c = k.iter().filter(|&&kl| kl <= step).count();
        let (pair, kind) = if c > 0 && k[c - 1] == step {
            let prev = if c >= 2 { k[c - 2] } else { 0 };
            let a = step + 1 - c;
            let b = prev + 2 - c;
            if a == b {
                (None, StepKind::Idle)
            } else {
                (Some((a, b)), StepKind::Cycle)
            }
        } else {
            let a = step - c;
            if a + 1 > eta {
                (None, StepKind::Idle)
            } else {
                (Some((a, a + 1)), StepKind::Chain)
            }
        };
        steps.push(pair);
        kinds.push(kind);
    }
    Ok(Schedule { eta, horizon, k: k.to_vec(), steps, kinds })
}

/// ERP numbers a structured plan produces, without touching a graph.
pub fn induction_trajectory(eta: usize, horizon: usize, k: &[usize]) -> Vec<usize> {
    (1..=horizon)
        .map(|step| {
            let best = k
                .iter()
                .enumerate()
                .filter(|(_, &kl)| kl <= step)
                .map(|(idx, &kl)| kl - (idx + 1))
                .max()
                .unwrap_or(0);
            eta.saturating_sub(best).max(1)
        })
        .collect()
}

/// `eta` unit-rate demands, each paired with its own unit supply.
pub fn diagonal_instance(eta: usize) -> ProblemInstance {
    let ones = vec![Q::one(); eta];
    ProblemInstance::new(ones.clone(), ones, (1..=eta).map(|l| (l, l))).expect("balanced")
}

/// One closed-form candidate `(p, k)` and what it scores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedFormCandidate {
    pub p: usize,
    pub k: Vec<usize>,
    pub valid: bool,
    pub value: Option<Q>,
}

impl ClosedFormCandidate {
    fn evaluate(eta: usize, horizon: usize, p: usize, k: Vec<usize>, objective: &Objective) -> Self {
        let valid = check_k(eta, horizon, &k).is_ok();
        let value = valid.then(|| objective.total(&induction_trajectory(eta, horizon, &k)));
        ClosedFormCandidate { p, k, valid, value }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "k": self.k,
            "valid": self.valid,
            "value": self.value.as_ref().map(rational::to_json),
        })
    }
}

/// The sum-objective closed form, reported next to the DP optimum.
///
/// `argmin` uses the printed choice of `p`; `at_optimal_p` applies the
/// `k_i` formula at the DP's number of cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedForm {
    pub argmin: ClosedFormCandidate,
    pub at_optimal_p: ClosedFormCandidate,
    /// Set when either candidate is invalid or worse than the DP optimum.
    pub discrepancy: bool,
}

impl ClosedForm {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "argmin": self.argmin.to_json(),
            "at_optimal_p": self.at_optimal_p.to_json(),
            "discrepancy": self.discrepancy,
        })
    }
}

fn frac(x: &Q) -> Q {
    x - x.floor()
}

/// `g(p) = min{(eta - 1)/p + 1/2, K/(p + 1)} + p/2`.
fn g_of(eta: usize, horizon: usize, p: usize) -> (Q, bool) {
    let a = rational::qf(eta as i64 - 1, p as i64) + rational::qf(1, 2);
    let b = rational::qf(horizon as i64, p as i64 + 1);
    let budget_binds = b < a;
    let m = if budget_binds { b } else { a };
    (m + rational::qf(p as i64, 2), budget_binds)
}

/// Closed-form `(p, k)` for the sum objective.
pub fn sum_closed_form(eta: usize, horizon: usize) -> (usize, Vec<usize>) {
    let mut best: Option<(Q, usize)> = None;
    for pb in 1..=eta.max(1) {
        let (g, binds) = g_of(eta, horizon, pb);
        let f = frac(&g);
        let weight = q(pb as i64 + i64::from(binds));
        let pb_q = pb as i64;
        let score = weight * (&g * &g + &f - &f * &f) - rational::qf(pb_q * (pb_q + 1) * (2 * pb_q + 1), 6);
        if best.as_ref().map_or(true, |(s, _)| score < *s) {
            best = Some((score, pb));
        }
    }
    let p = best.map(|b| b.1).unwrap_or(1);
    (p, sum_closed_form_k(eta, horizon, p))
}

/// `k_i = floor(i g(p) - i(i - 1)/2)` for `i = 1..=p`.
pub fn sum_closed_form_k(eta: usize, horizon: usize, p: usize) -> Vec<usize> {
    if p == 0 {
        return Vec::new();
    }
    let (g, _) = g_of(eta, horizon, p);
    (1..=p)
        .map(|i| {
            let i_q = i as i64;
            let v = q(i_q) * &g - rational::qf(i_q * (i_q - 1), 2);
            rational::floor(&v).to_usize().unwrap_or(0)
        })
        .collect()
}

/// Closed form for the final-value objective: one cycle closed at
/// `min(eta, K)`.
pub fn final_closed_form(eta: usize, horizon: usize) -> (usize, Vec<usize>) {
    if horizon == 0 {
        return (0, Vec::new());
    }
    (1, vec![eta.min(horizon)])
}

/// An optimal structured plan and its trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub schedule: Schedule,
    pub trajectory: Vec<usize>,
    pub value: Q,
    pub objective: &'static str,
    pub closed_form: Option<ClosedForm>,
}

impl Plan {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "objective": self.objective,
            "schedule": self.schedule.to_json(),
            "trajectory": self.trajectory,
            "value": rational::to_json(&self.value),
            "closed_form": self.closed_form.as_ref().map(ClosedForm::to_json),
        })
    }
}

/// Dynamic program over closing steps `(l, k_l)`.
///
/// Ties prefer fewer cycles, then the lexicographically smallest `k`.
pub fn optimal_k(eta: usize, horizon: usize, objective: &Objective) -> Result<(Vec<usize>, Q)> {
    if eta == 0 {
        return Err(Error::InvalidK("eta must be positive".into()));
    }
    objective.validate(eta, horizon)?;
    let cost = |step: usize, v: usize| objective.cost(step, horizon, v);
    let seg = |from: usize, to: usize, v: usize| -> Q {
        (from..=to).fold(Q::zero(), |acc, s| acc + cost(s, v))
    };
    let value_after = |l: usize, kl: usize| (eta + l).saturating_sub(kl).max(1);
    // Best with no cycle at all.
    let mut best: (Q, Vec<usize>) = (seg(1, horizon, eta), Vec::new());
    // layer[k] = cheapest (cost of steps 1..k-1, k vector) with k_l = k.
    let mut layer: Vec<Option<(Q, Vec<usize>)>> = vec![None; horizon + 1];
    for k1 in 1..=horizon.min(eta) {
        layer[k1] = Some((seg(1, k1 - 1, eta), vec![k1]));
    }
    let mut l = 1;
    while layer.iter().any(Option::is_some) {
        for (kl, entry) in layer.iter().enumerate() {
            if let Some((c, ks)) = entry {
                let total = c + seg(kl, horizon, value_after(l, kl));
                if total < best.0 || (total == best.0 && ks.len() == best.1.len() && *ks < best.1) {
                    best = (total, ks.clone());
                }
            }
        }
        let mut next: Vec<Option<(Q, Vec<usize>)>> = vec![None; horizon + 1];
        let cap = horizon.min(eta + l);
        for (kl, entry) in layer.iter().enumerate() {
            let Some((c, ks)) = entry else { continue };
            let v = value_after(l, kl);
            for kn in kl + 1..=cap {
                let total = c + seg(kl, kn - 1, v);
                let mut ks2 = ks.clone();
                ks2.push(kn);
                let replace = match &next[kn] {
                    None => true,
                    Some((bc, bk)) => total < *bc || (total == *bc && ks2 < *bk),
                };
                if replace {
                    next[kn] = Some((total, ks2));
                }
            }
        }
        layer = next;
        l += 1;
    }
    Ok((best.1, best.0))
}

/// Optimal structured plan; for the sum objective the closed form is
/// evaluated alongside and any disagreement is flagged.
pub fn plan_schedule(eta: usize, horizon: usize, objective: &Objective) -> Result<Plan> {
    let (k, value) = match objective {
        Objective::Final => {
            let (_, k) = final_closed_form(eta, horizon);
            let traj = induction_trajectory(eta, horizon, &k);
            let v = objective.total(&traj);
            let (dk, dv) = optimal_k(eta, horizon, objective)?;
            if dv < v {
                (dk, dv)
            } else {
                (k, v)
            }
        }
        _ => optimal_k(eta, horizon, objective)?,
    };
    let schedule = structured_schedule(eta, horizon, k.len(), &k)?;
    let trajectory = induction_trajectory(eta, horizon, &k);
    let closed_form = matches!(objective, Objective::Sum).then(|| {
        let (p, ck) = sum_closed_form(eta, horizon);
        let argmin = ClosedFormCandidate::evaluate(eta, horizon, p, ck, objective);
        let kp = sum_closed_form_k(eta, horizon, k.len());
        let at_optimal_p = ClosedFormCandidate::evaluate(eta, horizon, k.len(), kp, objective);
        let off = |c: &ClosedFormCandidate| c.value.as_ref() != Some(&value);
        let discrepancy = off(&argmin) || off(&at_optimal_p);
        ClosedForm { argmin, at_optimal_p, discrepancy }
    });
    Ok(Plan { schedule, trajectory, value, objective: objective.name(), closed_form })
}

/// Greedy repeated best single edge against the best plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyReport {
    pub greedy_edges: Vec<Option<Edge>>,
    pub greedy_trajectory: Vec<usize>,
    pub greedy_value: Q,
    pub optimal_edges: Vec<Option<Edge>>,
    pub optimal_trajectory: Vec<usize>,
    pub optimal_value: Q,
    /// `"structured"` or `"exhaustive"`.
    pub method: &'static str,
}

impl GreedyReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "method": self.method,
            "greedy": {
                "edges": self.greedy_edges,
                "trajectory": self.greedy_trajectory,
                "value": rational::to_json(&self.greedy_value),
            },
            "optimal": {
                "edges": self.optimal_edges,
                "trajectory": self.optimal_trajectory,
                "value": rational::to_json(&self.optimal_value),
            },
        })
    }
}

/// Most edge sequences the exhaustive search may visit.
pub const EXHAUSTIVE_LIMIT: u128 = 2_000_000;

fn absent_edges(inst: &ProblemInstance) -> Vec<Edge> {
    (1..=inst.m())
        .flat_map(|i| (1..=inst.n()).map(move |j| Edge::new(i, j)))
        .filter(|e| !inst.has_edge(*e))
        .collect()
}

/// Best plan by trying every sequence of distinct new edges.
pub fn exhaustive_plan(
    inst: &ProblemInstance,
    horizon: usize,
    objective: &Objective,
) -> Result<(Vec<Option<Edge>>, Vec<usize>, Q)> {
    let absent = absent_edges(inst);
    let depth = horizon.min(absent.len());
    let count: u128 = (0..depth).map(|t| (absent.len() - t) as u128).product();
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::SizeLimitExceeded {
            what: "edge sequences",
            size: count.min(usize::MAX as u128) as usize,
            limit: EXHAUSTIVE_LIMIT as usize,
        });
    }
    struct Search<'a> {
        objective: &'a Objective,
        horizon: usize,
        depth: usize,
        best: Option<(Q, Vec<Option<Edge>>, Vec<usize>)>,
    }
    fn dfs(s: &mut Search, g: &ProblemInstance, seq: &mut Vec<Edge>, traj: &mut Vec<usize>, absent: &[Edge]) -> Result<()> {
        if seq.len() == s.depth {
            let mut t = traj.clone();
            let last = *t.last().unwrap_or(&crp_decomposition(g)?.erp());
            t.resize(s.horizon, last);
            let v = s.objective.total(&t);
            let edges: Vec<Option<Edge>> =
                seq.iter().map(|&e| Some(e)).chain(std::iter::repeat(None)).take(s.horizon).collect();
            if s.best.as_ref().map_or(true, |(b, be, _)| v < *b || (v == *b && edges < *be)) {
                s.best = Some((v, edges, t));
            }
            return Ok(());
        }
        for &e in absent {
            if g.has_edge(e) {
                continue;
            }
            let next = g.with_edge(e)?;
            seq.push(e);
            traj.push(crp_decomposition(&next)?.erp());
            dfs(s, &next, seq, traj, absent)?;
            seq.pop();
            traj.pop();
        }
        Ok(())
    }
    let mut s = Search { objective, horizon, depth, best: None };
    dfs(&mut s, inst, &mut Vec::new(), &mut Vec::new(), &absent)?;
    let (v, edges, traj) = s.best.expect("at least the empty sequence");
    Ok((edges, traj, v))
}

/// Repeatedly adds the best single edge.
pub fn greedy_plan(inst: &ProblemInstance, horizon: usize) -> Result<(Vec<Option<Edge>>, Vec<usize>)> {
    let mut cur = inst.clone();
    let mut edges = Vec::with_capacity(horizon);
    let mut traj = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        match best_single_edge(&cur) {
            Ok(eff) => {
                cur = cur.with_edge(eff.edge)?;
                edges.push(Some(eff.edge));
                traj.push(eff.new_erp);
            }
            Err(Error::AlreadyCrp) => {
                edges.push(None);
                traj.push(1);
            }
            Err(e) => return Err(e),
        }
    }
    Ok((edges, traj))
}

/// Compares greedy augmentation with the best plan.
///
/// Without redundant edges the structured optimum applies directly, using
/// the lowest-index demand and supply of each component as
/// representatives. Otherwise every edge sequence is searched.
pub fn greedy_vs_optimal_report(inst: &ProblemInstance, horizon: usize, objective: &Objective) -> Result<GreedyReport> {
    let dec = crp_decomposition(inst)?;
    objective.validate(dec.erp(), horizon)?;
    let (greedy_edges, greedy_trajectory) = greedy_plan(inst, horizon)?;
    let greedy_value = objective.total(&greedy_trajectory);
    let structured = dec.redundant.is_empty()
        && dec.components.iter().all(|c| !c.demands.is_empty() && !c.supplies.is_empty());
    let (optimal_edges, optimal_trajectory, optimal_value, method) = if structured {
        let plan = plan_schedule(dec.erp(), horizon, objective)?;
        let reps: Vec<(usize, usize)> = dec.components.iter().map(|c| (c.demands[0], c.supplies[0])).collect();
        let edges = plan.schedule.realize(&reps);
        let traj = erp_trajectory(inst, &edges)?;
        if traj != plan.trajectory {
            return Err(Error::InvariantViolation("structured plan trajectory mismatch".into()));
        }
        (edges, traj, plan.value, "structured")
    } else {
        let (e, t, v) = exhaustive_plan(inst, horizon, objective)?;
        (e, t, v, "exhaustive")
    };
    Ok(GreedyReport {
        greedy_edges,
        greedy_trajectory,
        greedy_value,
        optimal_edges,
        optimal_trajectory,
        optimal_value,
        method,
    })
}

/// One row of the scaling comparison between the optimal plan and a
/// single cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalingRow {
    pub eta: usize,
    pub horizon: usize,
    pub p: usize,
    pub k: Vec<usize>,
    pub optimal_sum: Q,
    pub single_cycle_sum: Q,
}

impl ScalingRow {
    pub fn ratio(&self) -> f64 {
        rational::to_f64(&(&self.optimal_sum / &self.single_cycle_sum))
    }
}

/// Sum-objective optimum against one cycle closed at `min(eta, K)`, with
/// `K = eta + ceil(sqrt(eta)) + 1`.
pub fn scaling_table(etas: &[usize]) -> Result<Vec<ScalingRow>> {
    etas.iter()
        .map(|&eta| {
            let root = (1..).find(|r: &usize| r * r >= eta).expect("finite");
            let horizon = eta + root + 1;
            let (k, optimal_sum) = optimal_k(eta, horizon, &Objective::Sum)?;
            let (_, k1) = final_closed_form(eta, horizon);
            let single_cycle_sum = Objective::Sum.total(&induction_trajectory(eta, horizon, &k1));
            Ok(ScalingRow { eta, horizon, p: k.len(), k, optimal_sum, single_cycle_sum })
        })
        .collect()
}
