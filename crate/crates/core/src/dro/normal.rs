//! Convex minimax `min_q max_i C_i(q)` over `{q >= 0, w·q <= W}` for normal
//! members. Each `C_i` is convex in `q`, so the pointwise max is convex and
//! any linearization of a member is a global under-estimator.

use std::time::Instant;

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Variable};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{normal_cost_raw, normal_value_and_grad_q};
use crate::model::Instance;

/// Algorithm used for the continuous minimax.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormalMethod {
    /// Kelley cutting planes with an LP master; certifies its gap.
    #[default]
    CuttingPlane,
    /// Projected subgradient with diminishing steps.
    Subgradient,
}

/// Stopping rules for the continuous minimax.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalMinimaxConfig {
    pub method: NormalMethod,
    /// Cutting plane: stop when `UB − LB <= rel_gap·max(1, |UB|)`.
    pub rel_gap: f64,
    pub max_cuts_rounds: usize,
    /// Subgradient: stop when the best value improves by less than this over `window` steps.
    pub improvement_tol: f64,
    pub window: usize,
    pub max_steps: usize,
}

impl Default for NormalMinimaxConfig {
    fn default() -> Self {
        NormalMinimaxConfig {
            method: NormalMethod::CuttingPlane,
            rel_gap: 1e-10,
            max_cuts_rounds: 2000,
            improvement_tol: 1e-9,
            window: 200,
            max_steps: 20_000,
        }
    }
}

/// Result of one continuous minimax solve.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct NormalOutcome {
    pub q: Vec<f64>,
    pub value: f64,
    /// Certified lower bound on the optimum (cutting plane only).
    pub lower_bound: Option<f64>,
    pub iterations: usize,
    pub timed_out: bool,
    pub method: NormalMethod,
}

/// Euclidean projection onto `{q >= 0, w·q <= W}`.
pub fn project_budget(x: &[f64], w: &[f64], budget: f64) -> Vec<f64> {
    let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    let spend = |tau: f64| -> f64 { x.iter().zip(w).map(|(xi, wi)| wi * (xi - tau * wi).max(0.0)).sum() };
    if spend(0.0) <= budget {
        return clipped;
    }
    // q_i = max(x_i − τ w_i, 0); spend is continuous and non-increasing in τ
    let mut lo = 0.0;
    let mut hi = x.iter().zip(w).map(|(xi, wi)| xi / wi).fold(0.0, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spend(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    x.iter().zip(w).map(|(xi, wi)| (xi - hi * wi).max(0.0)).collect()
}

/// Member costs at `q`, in member order.
pub(crate) fn member_costs(instance: &Instance, members: &[Vec<f64>], q: &[f64]) -> Vec<f64> {
    let t = instance.horizon();
    let eval = |p: &Vec<f64>| normal_cost_raw(instance, &p[..t], &p[t..], q);
    if members.len() >= 256 {
        members.par_iter().map(eval).collect()
    } else {
        members.iter().map(eval).collect()
    }
}

/// First index attaining the maximum.
pub(crate) fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Projected start, defaulting to the mean of the member means.
fn start_point(instance: &Instance, members: &[Vec<f64>], start: Option<&[f64]>) -> Vec<f64> {
    if let Some(q) = start {
        return project_budget(q, instance.wholesale(), instance.budget());
    }
    let t = instance.horizon();
    let mean: Vec<f64> = (0..t)
        .map(|k| members.iter().map(|p| p[k]).sum::<f64>() / members.len() as f64)
        .collect();
    project_budget(&mean, instance.wholesale(), instance.budget())
}

pub(crate) fn solve(
    instance: &Instance,
    members: &[Vec<f64>],
    start: Option<&[f64]>,
    cfg: &NormalMinimaxConfig,
    deadline: Option<Instant>,
) -> NormalOutcome {
    if instance.budget() <= 0.0 {
        let q = vec![0.0; instance.horizon()];
        let value = argmax(&member_costs(instance, members, &q)).1;
        return NormalOutcome { q, value, lower_bound: Some(value), iterations: 0, timed_out: false, method: cfg.method };
    }
    match cfg.method {
        NormalMethod::CuttingPlane => cutting_plane(instance, members, start, cfg, deadline)
            .unwrap_or_else(|| subgradient(instance, members, start, cfg, deadline)),
        NormalMethod::Subgradient => subgradient(instance, members, start, cfg, deadline),
    }
}

fn expired(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

/// Projected subgradient with step `a/√k` along the normalized subgradient of
/// the active member, `a = W / Σ w_t`.
pub(crate) fn subgradient(
    instance: &Instance,
    members: &[Vec<f64>],
    start: Option<&[f64]>,
    cfg: &NormalMinimaxConfig,
    deadline: Option<Instant>,
) -> NormalOutcome {
    let t = instance.horizon();
    let w = instance.wholesale();
    let budget = instance.budget();
    let a = budget / w.iter().sum::<f64>();
    let mut q = start_point(instance, members, start);
    let mut best_q = q.clone();
    let mut best = f64::INFINITY;
    let mut history: Vec<f64> = Vec::new();
    let mut timed_out = false;
    let mut steps = 0;
    for k in 1..=cfg.max_steps {
        steps = k;
        let (i, value) = argmax(&member_costs(instance, members, &q));
        if value < best {
            best = value;
            best_q.clone_from(&q);
        }
        history.push(best);
        if history.len() > cfg.window {
            let old = history[history.len() - 1 - cfg.window];
            if old - best < cfg.improvement_tol * best.abs().max(1.0) {
                break;
            }
        }
        if expired(deadline) {
            timed_out = true;
            break;
        }
        let p = &members[i];
        let (_, g) = normal_value_and_grad_q(instance, &p[..t], &p[t..], &q);
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        let step = a / (k as f64).sqrt() / norm;
        let trial: Vec<f64> = q.iter().zip(&g).map(|(qi, gi)| qi - step * gi).collect();
        q = project_budget(&trial, w, budget);
    }
    NormalOutcome {
        q: best_q,
        value: best,
        lower_bound: None,
        iterations: steps,
        timed_out,
        method: NormalMethod::Subgradient,
    }
}

/// Most cuts added per round.
const CUTS_PER_ROUND: usize = 8;

/// Kelley's method in scaled variables `y_t = w_t q_t / W` and `θ' = θ − C₀`.
/// Returns `None` if the LP master fails, so the caller can fall back.
fn cutting_plane(
    instance: &Instance,
    members: &[Vec<f64>],
    start: Option<&[f64]>,
    cfg: &NormalMinimaxConfig,
    deadline: Option<Instant>,
) -> Option<NormalOutcome> {
    let n = instance.horizon();
    let w = instance.wholesale();
    let budget = instance.budget();
    // LP tolerances can leave Σy slightly above 1, so project back onto the budget
    let to_q = |y: &[f64]| -> Vec<f64> {
        let raw: Vec<f64> = y.iter().zip(w).map(|(yi, wi)| yi * budget / wi).collect();
        project_budget(&raw, w, budget)
    };

    let q0 = start_point(instance, members, start);
    let values0 = member_costs(instance, members, &q0);
    // the offset keeps θ' near zero so LP tolerances act on the residual only
    let offset = argmax(&values0).1;

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let ys: Vec<Variable> = (0..n).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let theta = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    lp.add_constraint(ys.iter().map(|&v| (v, 1.0)).collect::<LinearExpr>(), ComparisonOp::Le, 1.0);

    let cut = |i: usize, q: &[f64], value: f64| -> (LinearExpr, f64) {
        let p = &members[i];
        let (_, g) = normal_value_and_grad_q(instance, &p[..n], &p[n..], q);
        // θ' − Σ g_t (W / w_t) y_t >= C_i(q) − C₀ − g·q
        // terms in variable order; the sparse row needs sorted indices
        let mut expr = LinearExpr::empty();
        for t in 0..n {
            expr.add(ys[t], -g[t] * budget / w[t]);
        }
        expr.add(theta, 1.0);
        let rhs = value - offset - g.iter().zip(q).map(|(gi, qi)| gi * qi).sum::<f64>();
        (expr, rhs)
    };

    for i in top_members(&values0, f64::NEG_INFINITY) {
        let (expr, rhs) = cut(i, &q0, values0[i]);
        lp.add_constraint(expr, ComparisonOp::Ge, rhs);
    }
    let mut solution = lp.solve().ok()?;

    let (mut best_q, mut best) = (q0.clone(), argmax(&values0).1);
    let mut lower = f64::NEG_INFINITY;
    let mut timed_out = false;
    let mut rounds = 0;
    while rounds < cfg.max_cuts_rounds {
        rounds += 1;
        let y: Vec<f64> = ys.iter().map(|&v| *solution.var_value(v)).collect();
        let theta_lp = *solution.var_value(theta) + offset;
        lower = lower.max(theta_lp);
        let q = to_q(&y);
        let values = member_costs(instance, members, &q);
        let value = argmax(&values).1;
        if value < best {
            best = value;
            best_q.clone_from(&q);
        }
        if best - lower <= cfg.rel_gap * best.abs().max(1.0) {
            break;
        }
        if expired(deadline) {
            timed_out = true;
            break;
        }
        let mut added = false;
        for i in top_members(&values, theta_lp) {
            let (expr, rhs) = cut(i, &q, values[i]);
            solution = solution.add_constraint(expr, ComparisonOp::Ge, rhs).ok()?;
            added = true;
        }
        if !added {
            // LP point already satisfies every member within tolerance
            break;
        }
    }
    Some(NormalOutcome {
        q: best_q,
        value: best,
        lower_bound: Some(lower.min(best)),
        iterations: rounds,
        timed_out,
        method: NormalMethod::CuttingPlane,
    })
}

/// Indices of the largest member values above `floor`, at most `CUTS_PER_ROUND`.
fn top_members(values: &[f64], floor: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).filter(|&i| values[i] > floor).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(CUTS_PER_ROUND);
    idx
}
