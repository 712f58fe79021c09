//! Discrete-time MaxWeight simulation of a parallel server system.
//!
//! Queue `i` receives `a_i(k)` jobs per slot; server `j` offers `mu_j` units
//! of deterministic service to one compatible queue with the longest
//! backlog. Arrivals are two-point: `{0, c_i}` with mean
//! `lambda_i = (1 - eps) nu_i`.

use crate::decomposition::crp_decomposition;
use crate::error::{Error, Result};
use crate::flow::is_feasible;
use crate::instance::ProblemInstance;
use crate::rational::{to_f64, Q};
use num_traits::ToPrimitive;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Each server gives its full rate to a compatible queue of maximal length,
/// ties broken uniformly at random. `servers[j]` lists 0-based queues.
pub fn maxweight_schedule<R: RngCore>(q: &[i64], mu: &[i64], servers: &[Vec<usize>], rng: &mut R) -> Result<Vec<i64>> {
    let mut s = vec![0i64; q.len()];
    maxweight_into(q, mu, servers, rng, &mut s)?;
    Ok(s)
}

fn maxweight_into<R: RngCore>(q: &[i64], mu: &[i64], servers: &[Vec<usize>], rng: &mut R, s: &mut [i64]) -> Result<()> {
    s.iter_mut().for_each(|v| *v = 0);
    for (j, queues) in servers.iter().enumerate() {
        let mut best = i64::MIN;
        let mut pick = usize::MAX;
        let mut ties = 0u32;
        for &i in queues {
            let v = q[i];
            if v > best {
                best = v;
                pick = i;
                ties = 1;
            } else if v == best {
                // Reservoir sampling keeps each maximiser with equal odds.
                ties += 1;
                if rng.gen_range(0..ties) == 0 {
                    pick = i;
                }
            }
        }
        if pick == usize::MAX {
            return Err(Error::IsolatedServer(j + 1));
        }
        s[pick] += mu[j];
    }
    Ok(())
}

/// One slot of the queue recursion: `q' = max(q + a - s, 0)` and unused
/// service `u = q' - (q + a - s)`.
pub fn step(q: &[i64], a: &[i64], s: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let mut qn = Vec::with_capacity(q.len());
    let mut u = Vec::with_capacity(q.len());
    for k in 0..q.len() {
        let y = q[k] + a[k] - s[k];
        let v = y.max(0);
        let w = v - y;
        assert!(w >= 0 && w * v == 0, "unused service on a nonempty queue");
        qn.push(v);
        u.push(w);
    }
    (qn, u)
}

/// Two-point arrival law per queue: `c_i` jobs with probability `p_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalModel {
    pub heights: Vec<u32>,
    pub probs: Vec<f64>,
    pub means: Vec<f64>,
}

impl ArrivalModel {
    /// `c_i = ceil(2 nu_i)` unless heights are given.
    pub fn new(demand: &[Q], epsilon: f64, heights: Option<&[u32]>) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        let m = demand.len();
        let heights: Vec<u32> = match heights {
            Some(h) if h.len() != m => {
                return Err(Error::InvalidModel(format!("{} heights for {m} queues", h.len())))
            }
            Some(h) => h.to_vec(),
            None => demand
                .iter()
                .map(|nu| (nu * Q::from_integer(2.into())).ceil().to_integer().to_u32().unwrap_or(0))
                .collect(),
        };
        let mut probs = Vec::with_capacity(m);
        let mut means = Vec::with_capacity(m);
        for (k, (nu, &c)) in demand.iter().zip(&heights).enumerate() {
            let lambda = (1.0 - epsilon) * to_f64(nu);
            if lambda <= 0.0 {
                return Err(Error::InvalidModel(format!("queue {} has no arrivals", k + 1)));
            }
            let p = lambda / f64::from(c);
            // p = 1 would make arrivals deterministic and never zero.
            if c == 0 || p >= 1.0 {
                return Err(Error::InvalidModel(format!(
                    "queue {}: height {c} cannot carry mean {lambda} with P(a = 0) > 0",
                    k + 1
                )));
            }
            probs.push(p);
            means.push(lambda);
        }
        Ok(ArrivalModel { heights, probs, means })
    }

    /// Per-queue variance `c lambda - lambda^2`.
    pub fn variances(&self) -> Vec<f64> {
        self.heights.iter().zip(&self.means).map(|(&c, &l)| f64::from(c) * l - l * l).collect()
    }

    /// Variances of the `eps -> 0` law, `c nu - nu^2`.
    pub fn limit_variances(demand: &[Q], heights: &[u32]) -> Vec<f64> {
        demand
            .iter()
            .zip(heights)
            .map(|(nu, &c)| {
                let v = to_f64(nu);
                f64::from(c) * v - v * v
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub horizon: u64,
    /// Defaults to a tenth of the horizon.
    pub warmup: Option<u64>,
    pub replications: usize,
    pub seed: u64,
    pub heights: Option<Vec<u32>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { horizon: 1_000_000, warmup: None, replications: 5, seed: 0, heights: None }
    }
}

impl RunConfig {
    pub fn warmup_steps(&self) -> u64 {
        self.warmup.unwrap_or(self.horizon / 10)
    }
}

/// The simulated system: integer service rates and server adjacency.
#[derive(Debug, Clone)]
pub struct QueueSystem {
    pub mu: Vec<i64>,
    pub servers: Vec<Vec<usize>>,
    /// Demand sets of the CRP components, 0-based.
    pub components: Vec<Vec<usize>>,
    pub demand: Vec<Q>,
}

impl QueueSystem {
    pub fn new(inst: &ProblemInstance) -> Result<Self> {
        let mut mu = Vec::with_capacity(inst.n());
        for (k, x) in inst.supply().iter().enumerate() {
            if !x.is_integer() {
                return Err(Error::InvalidModel(format!("service rate of server {} is not an integer", k + 1)));
            }
            mu.push(x.to_integer().to_i64().ok_or_else(|| Error::InvalidModel("service rate too large".into()))?);
        }
        let servers: Vec<Vec<usize>> =
            inst.supply_adjacency().into_iter().map(|v| v.into_iter().map(|i| i - 1).collect()).collect();
        if let Some(j) = servers.iter().position(Vec::is_empty) {
            return Err(Error::IsolatedServer(j + 1));
        }
        if !is_feasible(inst) {
            return Err(Error::Infeasible);
        }
        let dec = crp_decomposition(inst)?;
        let components = dec
            .components
            .iter()
            .filter(|c| !c.demands.is_empty())
            .map(|c| c.demands.iter().map(|i| i - 1).collect())
            .collect();
        Ok(QueueSystem { mu, servers, components, demand: inst.demand().to_vec() })
    }
}

/// Post-warmup time averages of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationStats {
    pub mean_q: Vec<f64>,
    pub mean_norm: f64,
    pub mean_perp: f64,
    pub samples: u64,
}

fn project_perp_norm(q: &[i64], components: &[Vec<usize>]) -> f64 {
    let mut sq = 0.0;
    for comp in components {
        let avg = comp.iter().map(|&i| q[i] as f64).sum::<f64>() / comp.len() as f64;
        for &i in comp {
            let d = q[i] as f64 - avg;
            sq += d * d;
        }
    }
    sq.sqrt()
}

/// Runs one replication on its own ChaCha stream.
pub fn run_replication(sys: &QueueSystem, model: &ArrivalModel, cfg: &RunConfig, replication: u64) -> Result<ReplicationStats> {
    let m = model.heights.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(replication);
    // Bernoulli(p) as `next_u64() < p * 2^64`.
    let thresholds: Vec<u64> = model.probs.iter().map(|&p| (p * 18_446_744_073_709_551_616.0) as u64).collect();
    let heights: Vec<i64> = model.heights.iter().map(|&c| i64::from(c)).collect();
    let warmup = cfg.warmup_steps();
    let mut q = vec![0i64; m];
    let mut s = vec![0i64; m];
    let mut sums = vec![0u128; m];
    let (mut norm_sum, mut perp_sum) = (0.0f64, 0.0f64);
    let mut samples = 0u64;
    for k in 0..cfg.horizon {
        if k >= warmup {
            samples += 1;
            let mut sq = 0.0;
            for (acc, &v) in sums.iter_mut().zip(&q) {
                *acc += v as u128;
                sq += (v * v) as f64;
            }
            norm_sum += sq.sqrt();
            perp_sum += project_perp_norm(&q, &sys.components);
        }
        maxweight_into(&q, &sys.mu, &sys.servers, &mut rng, &mut s)?;
        for i in 0..m {
            let a = if rng.next_u64() < thresholds[i] { heights[i] } else { 0 };
            let y = q[i] + a - s[i];
            let next = y.max(0);
            debug_assert!((next - y) * next == 0);
            q[i] = next;
        }
    }
    let n = samples.max(1) as f64;
    Ok(ReplicationStats {
        mean_q: sums.iter().map(|&v| v as f64 / n).collect(),
        mean_norm: norm_sum / n,
        mean_perp: perp_sum / n,
        samples,
    })
}

/// Pooled estimates at one `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub epsilon: f64,
    pub replications: Vec<ReplicationStats>,
    pub mean_q: Vec<f64>,
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub ssc_ratio: f64,
    pub total: f64,
    pub total_se: f64,
    pub warmup: u64,
    pub seed: u64,
}

impl SimStats {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "epsilon": self.epsilon,
            "replications": self.replications.len(),
            "mean_q": self.mean_q,
            "lhs": self.lhs,
            "lhs_se": self.lhs_se,
            "rhs": self.rhs,
            "ratio": self.ratio(),
            "ssc_ratio": self.ssc_ratio,
            "total": self.total,
            "total_se": self.total_se,
            "warmup": self.warmup,
            "seed": self.seed,
        })
    }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `eps sum_l (1/|I_l|) (sum_{I_l} nu) E[sum_{I_l} q]` for one vector of means.
fn weighted_lhs(sys: &QueueSystem, epsilon: f64, mean_q: &[f64]) -> f64 {
    sys.components
        .iter()
        .map(|c| {
            let nu: f64 = c.iter().map(|&i| to_f64(&sys.demand[i])).sum();
            let q: f64 = c.iter().map(|&i| mean_q[i]).sum();
            nu * q / c.len() as f64
        })
        .sum::<f64>()
        * epsilon
}

/// `sum_l (1/|I_l|) sum_{I_l} sigma_i^2 / 2` with limit variances.
pub fn heavy_traffic_rhs(sys: &QueueSystem, heights: &[u32]) -> f64 {
    let var = ArrivalModel::limit_variances(&sys.demand, heights);
    sys.components
        .iter()
        .map(|c| c.iter().map(|&i| var[i] / 2.0).sum::<f64>() / c.len() as f64)
        .sum()
}

/// Simulates every replication (in parallel) and pools them with equal
/// weights.
pub fn simulate(inst: &ProblemInstance, epsilon: f64, cfg: &RunConfig) -> Result<SimStats> {
    let sys = QueueSystem::new(inst)?;
    let model = ArrivalModel::new(inst.demand(), epsilon, cfg.heights.as_deref())?;
    if cfg.replications == 0 {
        return Err(Error::InvalidModel("at least one replication is required".into()));
    }
    if cfg.warmup_steps() >= cfg.horizon {
        return Err(Error::InvalidModel("warmup must be shorter than the horizon".into()));
    }
    let reps: Vec<ReplicationStats> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| run_replication(&sys, &model, cfg, r))
        .collect::<Result<_>>()?;
    let m = inst.m();
    let mean_q: Vec<f64> = (0..m).map(|i| reps.iter().map(|r| r.mean_q[i]).sum::<f64>() / reps.len() as f64).collect();
    let lhs_each: Vec<f64> = reps.iter().map(|r| weighted_lhs(&sys, epsilon, &r.mean_q)).collect();
    let total_each: Vec<f64> = reps.iter().map(|r| r.mean_q.iter().sum()).collect();
    let (lhs, lhs_se) = mean_se(&lhs_each);
    let (total, total_se) = mean_se(&total_each);
    let norm: f64 = reps.iter().map(|r| r.mean_norm).sum();
    let perp: f64 = reps.iter().map(|r| r.mean_perp).sum();
    Ok(SimStats {
        epsilon,
        mean_q,
        lhs,
        lhs_se,
        rhs: heavy_traffic_rhs(&sys, &model.heights),
        ssc_ratio: if norm > 0.0 { perp / norm } else { 0.0 },
        total,
        total_se,
        warmup: cfg.warmup_steps(),
        seed: cfg.seed,
        replications: reps,
    })
}

/// Heavy-traffic comparison at each `eps`.
pub fn heavy_traffic_check(inst: &ProblemInstance, epsilons: &[f64], cfg: &RunConfig) -> Result<Vec<SimStats>> {
    epsilons.iter().map(|&e| simulate(inst, e, cfg)).collect()
}

/// Share of the queue vector outside the collapse subspace.
pub fn ssc_ratio(inst: &ProblemInstance, epsilon: f64, cfg: &RunConfig) -> Result<f64> {
    simulate(inst, epsilon, cfg).map(|s| s.ssc_ratio)
}

/// CSV with one row per `eps`.
pub fn to_csv(rows: &[SimStats]) -> String {
    let m = rows.first().map_or(0, |r| r.mean_q.len());
    let mut out = String::from("epsilon,replications,lhs,lhs_se,rhs,ratio,ssc_ratio,total,total_se");
    for i in 1..=m {
        out.push_str(&format!(",q{i}"));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.epsilon,
            r.replications.len(),
            r.lhs,
            r.lhs_se,
            r.rhs,
            r.ratio(),
            r.ssc_ratio,
            r.total,
            r.total_se
        ));
        for v in &r.mean_q {
            out.push_str(&format!(",{v:.6}"));
        }
        out.push('\n');
    }
    out
}

/// Checks that `s` is a schedule of the service polytope: each server's
/// rate split among its compatible queues.
pub fn is_feasible_schedule(s: &[i64], mu: &[i64], servers: &[Vec<usize>], split: &[Vec<(usize, i64)>]) -> bool {
    let mut got = vec![0i64; s.len()];
    for (j, parts) in split.iter().enumerate() {
        let mut total = 0;
        for &(i, x) in parts {
            if x < 0 || !servers[j].contains(&i) {
                return false;
            }
            got[i] += x;
            total += x;
        }
        if total != mu[j] {
            return false;
        }
    }
    got == s
}
