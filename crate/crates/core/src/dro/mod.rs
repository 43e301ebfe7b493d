//! Worst-case evaluation, the cutting-surface loop and exact minimax oracles.

mod normal;
mod poisson;

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use normal::{project_budget, NormalMethod, NormalMinimaxConfig};
pub use poisson::{enumerate_plans, MAX_NODES};

use crate::ambiguity::{extreme_set, prune_dominated, AmbiguitySet};
use crate::cost::{normal_cost_raw, poisson_cost_raw};
use crate::error::{Error, Result};
use crate::model::{DemandModel, Family, Instance, OrderPlan};

/// Member of a set that maximizes the cost of a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub index: usize,
    pub param: Vec<f64>,
    pub cost: f64,
}

fn member_cost(instance: &Instance, family: Family, param: &[f64], plan: &Plan) -> f64 {
    let t = instance.horizon();
    match (family, plan) {
        (Family::Normal, Plan::Real(q)) => normal_cost_raw(instance, &param[..t], &param[t..], q),
        (Family::Poisson, Plan::Int(q)) => poisson_cost_raw(instance, param, q),
        _ => unreachable!("plan kind follows the family"),
    }
}

enum Plan {
    Real(Vec<f64>),
    Int(Vec<i64>),
}

impl Plan {
    fn new(family: Family, plan: &OrderPlan) -> Result<Self> {
        Ok(match family {
            Family::Normal => Plan::Real(plan.quantities().to_vec()),
            Family::Poisson => Plan::Int(plan.to_integers()?),
        })
    }
}

fn worst_of(instance: &Instance, family: Family, members: &[Vec<f64>], plan: &Plan) -> (usize, f64) {
    let costs: Vec<f64> = members.par_iter().map(|p| member_cost(instance, family, p, plan)).collect();
    let mut best = (0, costs[0]);
    for (i, &c) in costs.iter().enumerate().skip(1) {
        if c > best.1 {
            best = (i, c);
        }
    }
    best
}

fn check_set(instance: &Instance, set: &AmbiguitySet) -> Result<()> {
    if set.is_empty() {
        return Err(Error::EmptyAmbiguitySet);
    }
    if set.horizon() != instance.horizon() {
        return Err(Error::Dimension { expected: instance.horizon(), got: set.horizon() });
    }
    Ok(())
}

/// Exhaustive maximization of the cost of `plan` over the set; ties go to
/// the first member in canonical order.
pub fn worst_case(instance: &Instance, set: &AmbiguitySet, plan: &OrderPlan) -> Result<WorstCase> {
    check_set(instance, set)?;
    instance.check_len(plan.len())?;
    let plan = Plan::new(set.family(), plan)?;
    let (index, cost) = worst_of(instance, set.family(), set.params(), &plan);
    Ok(WorstCase { index, param: set.params()[index].clone(), cost })
}

/// Settings shared by the minimax solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxConfig {
    pub normal: NormalMinimaxConfig,
    /// Wall-clock limit per solver call.
    pub timeout: Option<Duration>,
    /// Node limit of the exact Poisson search.
    pub max_nodes: u64,
}

impl Default for MinimaxConfig {
    fn default() -> Self {
        MinimaxConfig { normal: NormalMinimaxConfig::default(), timeout: Some(Duration::from_secs(120)), max_nodes: MAX_NODES }
    }
}

/// Settings of the cutting-surface loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsConfig {
    /// Absolute optimality tolerance; the loop stops when `C^k <= θ^k + eps/2`.
    pub eps: f64,
    pub k_max: usize,
    /// Starting member; the first member in canonical order is used when absent from the set.
    pub initial_member: Option<Vec<f64>>,
    pub minimax: MinimaxConfig,
}

impl Default for CsConfig {
    fn default() -> Self {
        CsConfig { eps: 1e-6, k_max: 10, initial_member: None, minimax: MinimaxConfig::default() }
    }
}

/// One pass of the cutting-surface loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub k: usize,
    pub subset_size: usize,
    pub plan: Vec<f64>,
    pub theta_k: f64,
    pub c_k: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveFlags {
    pub timed_out: bool,
    /// The member chosen on the extreme subset is not the worst case over the full set.
    pub worst_case_from_extreme_only: bool,
    pub k_max_exhausted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    CuttingSurface,
    FullMinimax,
}

/// Result of a distributionally robust solve. `objective` is always the
/// worst case over the full set of the reported plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: SolverKind,
    pub family: Family,
    pub plan: OrderPlan,
    pub worst_index: usize,
    pub worst_param: Vec<f64>,
    pub objective: f64,
    /// Worst member found by the solver itself and its cost at `plan`.
    pub selected_param: Vec<f64>,
    pub selected_cost: f64,
    /// Certified lower bound on the minimax value, when available.
    pub lower_bound: Option<f64>,
    pub iterations: Vec<Iteration>,
    pub wall_seconds: f64,
    pub flags: SolveFlags,
}

impl SolveReport {
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// Iteration trace as CSV with columns `k,subset_size,theta_k,C_k,wall_ms`.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,subset_size,theta_k,C_k,wall_ms")?;
        for it in &self.iterations {
            writeln!(out, "{},{},{},{},{}", it.k, it.subset_size, it.theta_k, it.c_k, it.wall_ms)?;
        }
        Ok(())
    }

    pub fn worst_model(&self) -> Result<DemandModel> {
        DemandModel::from_params(self.family, &self.worst_param)
    }
}

struct Subset {
    plan: OrderPlan,
    lower_bound: Option<f64>,
    timed_out: bool,
}

fn solve_subset(
    instance: &Instance,
    members: &[Vec<f64>],
    family: Family,
    cfg: &MinimaxConfig,
    deadline: Option<Instant>,
) -> Result<Subset> {
    match family {
        Family::Normal => {
            let out = normal::solve(instance, members, None, &cfg.normal, deadline);
            Ok(Subset {
                plan: OrderPlan::new(out.q)?,
                lower_bound: out.lower_bound,
                timed_out: out.timed_out,
            })
        }
        Family::Poisson => {
            let out = poisson::solve(instance, members, cfg.max_nodes, deadline)?;
            Ok(Subset {
                plan: OrderPlan::from_integers(&out.q)?,
                lower_bound: (!out.timed_out).then_some(out.value),
                timed_out: out.timed_out,
            })
        }
    }
}

fn check_members(instance: &Instance, members: &[Vec<f64>], family: Family) -> Result<()> {
    if members.is_empty() {
        return Err(Error::EmptyAmbiguitySet);
    }
    for m in members {
        let model = DemandModel::from_params(family, m)?;
        model.check_horizon(instance)?;
    }
    Ok(())
}

/// Minimizes `max_i C_i(q)` over a small member list.
pub fn subset_minimax(
    instance: &Instance,
    members: &[Vec<f64>],
    family: Family,
    config: &MinimaxConfig,
) -> Result<OrderPlan> {
    check_members(instance, members, family)?;
    let deadline = config.timeout.map(|d| Instant::now() + d);
    Ok(solve_subset(instance, members, family, config, deadline)?.plan)
}

/// Continuous minimax value for normal members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalSolution {
    pub plan: OrderPlan,
    pub value: f64,
    pub lower_bound: Option<f64>,
}

/// Normal minimax from an explicit starting plan (projected onto the budget first).
pub fn normal_minimax_from(
    instance: &Instance,
    members: &[Vec<f64>],
    start: &[f64],
    config: &NormalMinimaxConfig,
) -> Result<NormalSolution> {
    check_members(instance, members, Family::Normal)?;
    instance.check_len(start.len())?;
    let out = normal::solve(instance, members, Some(start), config, None);
    Ok(NormalSolution { plan: OrderPlan::new(out.q)?, value: out.value, lower_bound: out.lower_bound })
}

/// Reference minimax over the whole set. Normal sets are pruned of
/// dominated members first, which leaves the worst case unchanged because
/// the cost increases in every `σ_t`.
pub fn full_minimax(instance: &Instance, set: &AmbiguitySet, config: &MinimaxConfig) -> Result<SolveReport> {
    check_set(instance, set)?;
    let start = Instant::now();
    let deadline = config.timeout.map(|d| start + d);
    let family = set.family();
    let pruned;
    let members = match family {
        Family::Normal => {
            pruned = prune_dominated(set)?;
            pruned.params()
        }
        Family::Poisson => set.params(),
    };
    let sub = solve_subset(instance, members, family, config, deadline)?;
    let worst = worst_case(instance, set, &sub.plan)?;
    Ok(SolveReport {
        solver: SolverKind::FullMinimax,
        family,
        plan: sub.plan,
        worst_index: worst.index,
        selected_param: worst.param.clone(),
        selected_cost: worst.cost,
        worst_param: worst.param,
        objective: worst.cost,
        lower_bound: sub.lower_bound,
        iterations: Vec::new(),
        wall_seconds: start.elapsed().as_secs_f64(),
        flags: SolveFlags { timed_out: sub.timed_out, ..SolveFlags::default() },
    })
}

/// Cutting-surface loop: solve the minimax on a growing working set, adding
/// the worst extreme member of each plan until it is already covered.
pub fn cs_solve(instance: &Instance, set: &AmbiguitySet, config: &CsConfig) -> Result<SolveReport> {
    check_set(instance, set)?;
    if config.k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be positive".into()));
    }
    let start = Instant::now();
    let deadline = config.minimax.timeout.map(|d| start + d);
    let family = set.family();
    let ext = extreme_set(set)?;

    let first = config
        .initial_member
        .as_ref()
        .filter(|m| set.contains(m))
        .cloned()
        .unwrap_or_else(|| set.params()[0].clone());
    let mut working = vec![first];
    let mut iterations = Vec::new();
    // (C^k, plan, selected member)
    let mut best: Option<(f64, OrderPlan, Vec<f64>)> = None;
    let mut flags = SolveFlags::default();
    let mut lower_bound = None;

    for k in 1..=config.k_max {
        let t0 = Instant::now();
        let sub = solve_subset(instance, &working, family, &config.minimax, deadline)?;
        let plan = Plan::new(family, &sub.plan)?;
        let theta = working.iter().map(|m| member_cost(instance, family, m, &plan)).fold(f64::NEG_INFINITY, f64::max);
        let (wi, c_k) = worst_of(instance, family, ext.params(), &plan);
        let omega = ext.params()[wi].clone();
        iterations.push(Iteration {
            k,
            subset_size: working.len(),
            plan: sub.plan.quantities().to_vec(),
            theta_k: theta,
            c_k,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        });
        // the subset optimum bounds the full minimax from below
        lower_bound = sub.lower_bound.or(lower_bound);
        if best.as_ref().is_none_or(|(c, _, _)| c_k < *c) {
            best = Some((c_k, sub.plan.clone(), omega.clone()));
        }
        flags.timed_out |= sub.timed_out;
        let converged = c_k <= theta + config.eps / 2.0 || working.contains(&omega);
        if converged {
            best = Some((c_k, sub.plan, omega));
            break;
        }
        if k == config.k_max {
            flags.k_max_exhausted = true;
            break;
        }
        if flags.timed_out || deadline.is_some_and(|d| Instant::now() >= d) {
            flags.timed_out = true;
            break;
        }
        working.push(omega);
    }

    let (selected_cost, plan, selected_param) = best.expect("at least one iteration runs");
    let worst = worst_case(instance, set, &plan)?;
    flags.worst_case_from_extreme_only = worst.param != selected_param;
    Ok(SolveReport {
        solver: SolverKind::CuttingSurface,
        family,
        plan,
        worst_index: worst.index,
        worst_param: worst.param,
        objective: worst.cost,
        selected_param,
        selected_cost,
        lower_bound,
        iterations,
        wall_seconds: start.elapsed().as_secs_f64(),
        flags,
    })
}

/// Percentage gaps; `None` where the reference cost is zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GapMetrics {
    pub omega_gap_pct: Option<f64>,
    pub q_gap_pct: Option<f64>,
    pub ape_pct: Option<f64>,
    pub optimality_gap_pct: Option<f64>,
}

/// Inputs for the estimation-error metrics of a plan fitted to the MLE.
#[derive(Debug, Clone, PartialEq)]
pub struct MleContext<'a> {
    pub true_model: &'a DemandModel,
    pub mle_model: &'a DemandModel,
    pub mle_plan: &'a OrderPlan,
    /// `min_q C_true(q)`.
    pub true_optimal_cost: f64,
}

fn pct(num: f64, den: f64) -> Option<f64> {
    (den != 0.0 && num.is_finite() && den.is_finite()).then(|| 100.0 * num / den.abs())
}

/// ω-gap and q-gap of a cutting-surface report against a reference, plus
/// APE and optimality gap of the MLE plan when `mle` is given.
///
/// Denominators enter by absolute value so the sign of each gap keeps its
/// meaning when costs are negative.
pub fn gap_metrics(
    instance: &Instance,
    set: &AmbiguitySet,
    cs: &SolveReport,
    reference: &SolveReport,
    mle: Option<&MleContext<'_>>,
) -> Result<GapMetrics> {
    let cs_worst = worst_case(instance, set, &cs.plan)?;
    let ref_worst = worst_case(instance, set, &reference.plan)?;
    let plan = Plan::new(set.family(), &cs.plan)?;
    let picked = member_cost(instance, set.family(), &cs.selected_param, &plan);
    let mut gaps = GapMetrics {
        omega_gap_pct: pct(cs_worst.cost - picked, cs_worst.cost),
        q_gap_pct: pct(ref_worst.cost - cs_worst.cost, ref_worst.cost),
        ..GapMetrics::default()
    };
    if let Some(ctx) = mle {
        let true_cost = crate::cost::expected_cost(instance, ctx.true_model, ctx.mle_plan)?;
        let predicted = crate::cost::expected_cost(instance, ctx.mle_model, ctx.mle_plan)?;
        gaps.ape_pct = pct((true_cost - predicted).abs(), true_cost);
        gaps.optimality_gap_pct = pct((ctx.true_optimal_cost - true_cost).abs(), ctx.true_optimal_cost);
    }
    Ok(gaps)
}
