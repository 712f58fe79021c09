//! Command-line front end.
//!
//! Every verb prints one JSON document (`simulate` prints CSV). Exit codes:
//! 0 on success, 1 on a domain error, 2 on usage, parse or I/O errors.

use crate::augmentation::{add_edge_effect_checked, best_single_edge};
use crate::decomposition::{check_decomposition, crp_decomposition, crp_graph, full_support_point, redundant_edges_with};
use crate::design::{design_flexibility, min_edges};
use crate::error::Error;
use crate::flow::{is_feasible, FlowOrder};
use crate::instance::{Assignment, Edge, ProblemInstance};
use crate::planning::{diagonal_instance, erp_trajectory, greedy_vs_optimal_report, induction_trajectory, plan_schedule, Objective};
use crate::polytope::check_point;
use crate::rational::{self, Q};
use crate::robustness::{alt_crp_gap, check_perturbation, crp_gap};
use crate::sim::{heavy_traffic_check, to_csv, RunConfig};
use crate::{oracle, planning};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use std::collections::BTreeSet;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "flexpool", version, about = "Flexibility analysis of bipartite supply/demand graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an instance and report whether its flow polytope is nonempty.
    Validate { input: String },
    /// Redundant edges, CRP components and the CRP DAG.
    Decompose { input: String },
    /// Minimum-edge graph on the instance's rates with the given ERP number.
    Design {
        input: String,
        #[arg(long)]
        erp: usize,
    },
    /// CRP gap, its variant, and optional perturbation checks.
    Gap {
        input: String,
        /// JSON file with {"omegas": [[...], ...]}.
        #[arg(long)]
        perturb: Option<String>,
    },
    /// Effect of adding one edge (`--edge i,j`) or the best such edge.
    Augment {
        input: String,
        #[arg(long, conflicts_with = "best")]
        edge: Option<String>,
        #[arg(long)]
        best: bool,
    },
    /// Optimal edge-addition plan on `eta` disjoint components, or greedy
    /// versus optimal on a given instance.
    Plan {
        #[arg(long)]
        eta: Option<usize>,
        #[arg(long)]
        budget: usize,
        /// sum | final | file:<path>
        #[arg(long, default_value = "sum")]
        objective: String,
        #[arg(long)]
        instance: Option<String>,
    },
    /// MaxWeight simulation sweep; prints CSV.
    Simulate {
        input: String,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.05])]
        eps: Vec<f64>,
        #[arg(long, default_value = "1e6")]
        horizon: String,
        #[arg(long)]
        warmup: Option<String>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Arrival heights c_i, comma separated.
        #[arg(long, value_delimiter = ',')]
        heights: Option<Vec<u32>>,
    },
    /// Replay a result document and re-check its invariants.
    Verify { input: String },
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Parse(Error),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Failure::Parse(e)
        } else {
            Failure::Domain(e)
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the CLI on `args` (including the program name).
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match dispatch(&cli) {
        Ok((code, out)) => Outcome { code, stdout: out, stderr: String::new() },
        Err(Failure::Usage(msg)) => Outcome { code: 2, stdout: String::new(), stderr: diagnostic("UsageError", &msg) },
        Err(Failure::Parse(e)) => Outcome { code: 2, stdout: String::new(), stderr: diagnostic(e.kind(), &e.to_string()) },
        Err(Failure::Domain(e)) => Outcome { code: 1, stdout: String::new(), stderr: diagnostic(e.kind(), &e.to_string()) },
    }
}

fn diagnostic(kind: &str, message: &str) -> String {
    let v = json!({"schema_version": SCHEMA_VERSION, "error": {"kind": kind, "message": message}});
    format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
}

fn read_text(path: &str) -> CliResult<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s).map_err(|e| Failure::Usage(e.to_string()))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))
}

fn read_json(path: &str) -> CliResult<Value> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Failure::Usage(format!("{path}: {e}")))
}

fn read_instance(path: &str) -> CliResult<ProblemInstance> {
    Ok(ProblemInstance::from_json(&read_json(path)?)?)
}

fn document(kind: &str, instance: Option<&ProblemInstance>, params: Value, result: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "instance": instance.map(ProblemInstance::to_json),
        "params": params,
        "result": result,
    })
}

fn pretty(v: &Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).expect("json"))
}

fn parse_edge(s: &str) -> CliResult<Edge> {
    let bad = || Failure::Usage(format!("edge must look like i,j: {s:?}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok(Edge::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_count(s: &str) -> CliResult<u64> {
    let v: f64 = s.trim().parse().map_err(|_| Failure::Usage(format!("not a step count: {s:?}")))?;
    if !(v >= 1.0 && v.fract() == 0.0 && v < 1e18) {
        return Err(Failure::Usage(format!("not a step count: {s:?}")));
    }
    Ok(v as u64)
}

fn parse_objective(s: &str) -> CliResult<Objective> {
    match s {
        "sum" => Ok(Objective::Sum),
        "final" => Ok(Objective::Final),
        _ => {
            let path = s.strip_prefix("file:").ok_or_else(|| Failure::Usage(format!("unknown objective {s:?}")))?;
            let v = read_json(path)?;
            let rows = v.get("tables").unwrap_or(&v);
            let bad = || Failure::Usage("tables must be a list of lists of rates".into());
            let rows = rows.as_array().ok_or_else(bad)?;
            let mut tables = Vec::with_capacity(rows.len());
            for row in rows {
                let row = row.as_array().ok_or_else(bad)?;
                tables.push(row.iter().map(rational::from_json).collect::<crate::Result<Vec<Q>>>()?);
            }
            Ok(Objective::Tables(tables))
        }
    }
}

fn objective_param(o: &Objective) -> Value {
    match o {
        Objective::Tables(rows) => json!({
            "tables": rows.iter().map(|r| r.iter().map(rational::to_json).collect::<Vec<_>>()).collect::<Vec<_>>()
        }),
        other => json!(other.name()),
    }
}

fn objective_from_param(v: &Value) -> CliResult<Objective> {
    match v {
        Value::String(s) if s == "sum" => Ok(Objective::Sum),
        Value::String(s) if s == "final" => Ok(Objective::Final),
        Value::Object(_) => {
            let bad = || Failure::Usage("bad objective tables".into());
            let rows = v["tables"].as_array().ok_or_else(bad)?;
            let mut tables = Vec::new();
            for row in rows {
                tables.push(row.as_array().ok_or_else(bad)?.iter().map(rational::from_json).collect::<crate::Result<Vec<Q>>>()?);
            }
            Ok(Objective::Tables(tables))
        }
        _ => Err(Failure::Usage("bad objective".into())),
    }
}

fn validate_result(inst: &ProblemInstance) -> CliResult<Value> {
    if !is_feasible(inst) {
        return Err(Failure::Domain(Error::Infeasible));
    }
    Ok(json!({
        "m": inst.m(),
        "n": inst.n(),
        "edge_count": inst.edges().len(),
        "total": rational::to_json(&inst.total()),
        "feasible": true,
    }))
}

fn decompose_result(inst: &ProblemInstance) -> CliResult<Value> {
    let dec = crp_decomposition(inst)?;
    let dag = crp_graph(&dec)?;
    let mut v = dec.to_json();
    v["dag"] = dag.to_json();
    v["ssc_basis"] = json!(crate::decomposition::ssc_basis(&dec, inst.m()));
    Ok(v)
}

fn gap_result(inst: &ProblemInstance, omegas: &[Vec<Q>]) -> CliResult<Value> {
    let gap = crp_gap(inst)?;
    let alt = alt_crp_gap(inst)?;
    let checks = omegas.iter().map(|w| check_perturbation(inst, w).map(|c| c.to_json())).collect::<crate::Result<Vec<_>>>()?;
    Ok(json!({"gap": gap.to_json(), "alt_gap": alt.to_json(), "perturbations": checks}))
}

fn read_omegas(v: &Value) -> CliResult<Vec<Vec<Q>>> {
    let bad = || Failure::Usage("perturbations must be {\"omegas\": [[...], ...]}".into());
    let list = v.get("omegas").unwrap_or(v).as_array().ok_or_else(bad)?;
    list.iter()
        .map(|w| {
            w.as_array().ok_or_else(bad)?.iter().map(|x| rational::from_json(x).map_err(Failure::from)).collect()
        })
        .collect()
}

fn omegas_param(omegas: &[Vec<Q>]) -> Value {
    json!(omegas.iter().map(|w| w.iter().map(rational::to_json).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn augment_result(inst: &ProblemInstance, edge: Option<Edge>) -> CliResult<Value> {
    let eff = match edge {
        Some(e) => add_edge_effect_checked(inst, e)?,
        None => best_single_edge(inst)?,
    };
    Ok(eff.to_json())
}

fn plan_result(eta: Option<usize>, budget: usize, objective: &Objective, inst: Option<&ProblemInstance>) -> CliResult<Value> {
    match (eta, inst) {
        (_, Some(inst)) => Ok(greedy_vs_optimal_report(inst, budget, objective)?.to_json()),
        (Some(eta), None) => Ok(plan_schedule(eta, budget, objective)?.to_json()),
        (None, None) => Err(Failure::Usage("plan needs --eta or --instance".into())),
    }
}

fn dispatch(cli: &Cli) -> CliResult<(i32, String)> {
    let out = match &cli.command {
        Command::Validate { input } => {
            let inst = read_instance(input)?;
            document("validate", Some(&inst), json!({}), validate_result(&inst)?)
        }
        Command::Decompose { input } => {
            let inst = read_instance(input)?;
            document("decompose", Some(&inst), json!({}), decompose_result(&inst)?)
        }
        Command::Design { input, erp } => {
            let inst = read_instance(input)?;
            let des = design_flexibility(inst.demand(), inst.supply(), *erp)?;
            let mut r = des.to_json();
            r["min_edges"] = json!(min_edges(inst.demand(), inst.supply(), *erp)?);
            document("design", Some(&inst), json!({"erp": erp}), r)
        }
        Command::Gap { input, perturb } => {
            let inst = read_instance(input)?;
            let omegas = match perturb {
                Some(p) => read_omegas(&read_json(p)?)?,
                None => Vec::new(),
            };
            document("gap", Some(&inst), json!({"omegas": omegas_param(&omegas)}), gap_result(&inst, &omegas)?)
        }
        Command::Augment { input, edge, best } => {
            let inst = read_instance(input)?;
            let edge = match (edge, best) {
                (Some(e), _) => Some(parse_edge(e)?),
                (None, true) => None,
                (None, false) => return Err(Failure::Usage("augment needs --edge i,j or --best".into())),
            };
            document("augment", Some(&inst), json!({"edge": edge}), augment_result(&inst, edge)?)
        }
        Command::Plan { eta, budget, objective, instance } => {
            let obj = parse_objective(objective)?;
            let inst = instance.as_deref().map(read_instance).transpose()?;
            let r = plan_result(*eta, *budget, &obj, inst.as_ref())?;
            document(
                "plan",
                inst.as_ref(),
                json!({"eta": eta, "budget": budget, "objective": objective_param(&obj)}),
                r,
            )
        }
        Command::Simulate { input, eps, horizon, warmup, reps, heights } => {
            let inst = read_instance(input)?;
            let cfg = RunConfig {
                horizon: parse_count(horizon)?,
                warmup: warmup.as_deref().map(parse_count).transpose()?,
                replications: *reps,
                seed: cli.seed,
                heights: heights.clone(),
            };
            let rows = heavy_traffic_check(&inst, eps, &cfg)?;
            return Ok((0, to_csv(&rows)));
        }
        Command::Verify { input } => {
            let doc = read_json(input)?;
            let report = verify_document(&doc)?;
            let code = if report["passed"] == json!(true) { 0 } else { 1 };
            return Ok((code, pretty(&report)));
        }
    };
    Ok((0, pretty(&out)))
}

struct Checks(Vec<Value>);

impl Checks {
    fn add(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        let detail: String = if ok { String::new() } else { detail.into() };
        self.0.push(json!({"name": name, "passed": ok, "detail": detail}));
    }

    fn add_result(&mut self, name: &str, r: crate::Result<()>) {
        match r {
            Ok(()) => self.add(name, true, ""),
            Err(e) => self.add(name, false, e.to_string()),
        }
    }

    fn passed(&self) -> bool {
        self.0.iter().all(|c| c["passed"] == json!(true))
    }
}

fn edges_from(v: &Value) -> CliResult<BTreeSet<Edge>> {
    serde_json::from_value(v.clone()).map_err(|e| Failure::Usage(format!("bad edge list: {e}")))
}

/// Re-derives a result document and checks the invariants of its module.
pub fn verify_document(doc: &Value) -> std::result::Result<Value, Error> {
    verify_inner(doc).map_err(|f| match f {
        Failure::Usage(m) => Error::Malformed(m),
        Failure::Parse(e) | Failure::Domain(e) => e,
    })
}

fn verify_inner(doc: &Value) -> CliResult<Value> {
    if doc["schema_version"] != json!(SCHEMA_VERSION) {
        return Err(Failure::Usage(format!("unsupported schema_version {}", doc["schema_version"])));
    }
    let kind = doc["kind"].as_str().ok_or_else(|| Failure::Usage("document has no kind".into()))?;
    let inst = match &doc["instance"] {
        Value::Null => None,
        v => Some(ProblemInstance::from_json(v)?),
    };
    let need = || inst.clone().ok_or_else(|| Failure::Usage(format!("{kind} document has no instance")));
    let params = &doc["params"];
    let claimed = &doc["result"];
    let mut c = Checks(Vec::new());
    match kind {
        "validate" => {
            let inst = need()?;
            let fresh = validate_result(&inst);
            c.add("replay", fresh.as_ref().ok() == Some(claimed), "result differs from recomputation");
            if inst.m() <= oracle::SUBSET_LIMIT && inst.n() <= 64 {
                c.add("hall condition", oracle::hall_feasible(&inst)? == is_feasible(&inst), "max-flow and Hall disagree");
            }
        }
        "decompose" => {
            let inst = need()?;
            c.add("replay", decompose_result(&inst)? == *claimed, "result differs from recomputation");
            let dec = crp_decomposition(&inst)?;
            c.add_result("structure", check_decomposition(&inst, &dec));
            if inst.m() <= oracle::SUBSET_LIMIT {
                let ora = oracle::redundant_edges_oracle(&inst)?;
                c.add("redundant edges match oracle", ora == dec.redundant, format!("oracle gives {ora:?}"));
            }
            let orders = [FlowOrder::Reversed, FlowOrder::Shuffled(1), FlowOrder::Shuffled(2)];
            let same = orders.iter().all(|&o| matches!(redundant_edges_with(&inst, o), Ok(r) if r.redundant == dec.redundant));
            c.add("independent of starting point", same, "another feasible point gave a different set");
            let x = full_support_point(&inst)?;
            let kept: BTreeSet<Edge> = inst.edges().difference(&dec.redundant).copied().collect();
            c.add("witness support", x.support() == kept, "averaged witness support differs from E \\ E_r");
            let dag = crp_graph(&dec)?;
            c.add("dag arcs", dag.arc_count() == dec.redundant.len(), "arc count differs from |E_r|");
        }
        "design" => {
            let inst = need()?;
            let d = params["erp"].as_u64().ok_or_else(|| Failure::Usage("design params need erp".into()))? as usize;
            let des = design_flexibility(inst.demand(), inst.supply(), d)?;
            let mut fresh = des.to_json();
            fresh["min_edges"] = json!(min_edges(inst.demand(), inst.supply(), d)?);
            c.add("replay", fresh == *claimed, "result differs from recomputation");
            let edges = edges_from(&claimed["edges"])?;
            let x = Assignment::from_json(&claimed["assignment"])?;
            let g = inst.with_edges(edges.iter().copied())?;
            c.add_result("assignment feasible", check_point(&g, &x));
            c.add("assignment support", x.support() == edges, "support differs from the edge set");
            let erp = crp_decomposition(&g)?.erp();
            c.add("erp", erp == d, format!("graph has ERP {erp}"));
            let need_edges = min_edges(inst.demand(), inst.supply(), d)?;
            c.add("edge count", edges.len() == need_edges, format!("{} edges, minimum is {need_edges}", edges.len()));
        }
        "gap" => {
            let inst = need()?;
            let omegas = read_omegas(&params["omegas"])?;
            c.add("replay", gap_result(&inst, &omegas)? == *claimed, "result differs from recomputation");
            let gap = crp_gap(&inst)?;
            let alt = alt_crp_gap(&inst)?;
            if let (Some(a), Some(g)) = (&alt.value, &gap.value) {
                c.add("variant gap bounded by gap", a <= g, "alternative gap exceeds the gap");
            }
            let red = crate::decomposition::redundant_edges(&inst)?;
            let pruned = inst.with_edges(inst.edges().difference(&red).copied())?;
            c.add("redundant edges do not matter", crp_gap(&pruned)?.value == gap.value, "gap changes when E_r is removed");
            for (k, w) in omegas.iter().enumerate() {
                let chk = check_perturbation(&inst, w)?;
                c.add(&format!("perturbation {}", k + 1), chk.holds != Some(false), "ERP increased");
            }
        }
        "augment" => {
            let inst = need()?;
            let edge: Option<Edge> =
                serde_json::from_value(params["edge"].clone()).map_err(|e| Failure::Usage(e.to_string()))?;
            c.add("replay", augment_result(&inst, edge)? == *claimed, "result differs from recomputation");
            let e: Edge = serde_json::from_value(claimed["edge"].clone()).map_err(|e| Failure::Usage(e.to_string()))?;
            let after = crp_decomposition(&inst.with_edge(e)?)?.erp();
            c.add("new erp", claimed["new_erp"] == json!(after), format!("recomputed ERP {after}"));
        }
        "plan" => {
            let budget = params["budget"].as_u64().ok_or_else(|| Failure::Usage("plan params need budget".into()))? as usize;
            let eta = params["eta"].as_u64().map(|v| v as usize);
            let obj = objective_from_param(&params["objective"])?;
            c.add("replay", plan_result(eta, budget, &obj, inst.as_ref())? == *claimed, "result differs from recomputation");
            if inst.is_none() {
                let eta = eta.ok_or_else(|| Failure::Usage("plan params need eta".into()))?;
                let plan = plan_schedule(eta, budget, &obj)?;
                c.add(
                    "induction",
                    plan.trajectory == induction_trajectory(eta, budget, &plan.schedule.k),
                    "trajectory differs from the closed induction",
                );
                if eta <= 40 {
                    let reps: Vec<(usize, usize)> = (1..=eta).map(|l| (l, l)).collect();
                    let traj = erp_trajectory(&diagonal_instance(eta), &plan.schedule.realize(&reps))?;
                    c.add("graph trajectory", traj == plan.trajectory, format!("graph gives {traj:?}"));
                }
                let brute = planning::optimal_k(eta, budget, &obj)?.1;
                c.add("optimal value", brute == plan.value, "DP value changed");
            } else {
                let g = inst.as_ref().expect("checked");
                let rep = greedy_vs_optimal_report(g, budget, &obj)?;
                c.add("optimal no worse than greedy", rep.optimal_value <= rep.greedy_value, "greedy beats optimal");
                let traj = erp_trajectory(g, &rep.greedy_edges)?;
                c.add("greedy trajectory", traj == rep.greedy_trajectory, "greedy trajectory differs on replay");
            }
        }
        other => return Err(Failure::Usage(format!("cannot verify documents of kind {other:?}"))),
    }
    let passed = c.passed();
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "kind": "verify",
        "target": kind,
        "checks": c.0,
        "passed": passed,
    }))
}
