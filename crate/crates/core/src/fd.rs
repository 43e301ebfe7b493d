//! Fixed-distribution (FD) heuristic for a known demand model.
//!
//! The KKT conditions of the budget-constrained problem give cumulative
//! order targets `Q_t = F̃_t⁻¹(P_t(ν))` for a budget multiplier `ν`, where
//! `F̃_t` is the CDF of cumulative demand up to `t`. FD raises `ν` from zero
//! until the plan either fits the budget or an order turns negative; in the
//! latter case one day is fixed to zero and the search restarts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cost::{normal_cost_raw, poisson_cost_raw};
use crate::error::{Error, Result};
use crate::model::{DemandModel, Instance, OrderPlan};
use crate::special::{poisson_quantile, probit};

/// Smallest probability handed to the normal quantile so targets stay finite.
const MIN_PROB: f64 = 1e-300;
/// Largest probability below one representable in `f64`.
const MAX_PROB: f64 = 1.0 - f64::EPSILON / 2.0;

/// Upper bound on `ν` that keeps every fractile non-negative:
/// `min{ b/(w_t − w_{t+1}) − 1 : w_t > w_{t+1} } ∪ { (b+p)/w_T − 1 }`.
pub fn nu_upper_bound(instance: &Instance) -> f64 {
    bound_over_days(instance, |_| true)
}

fn bound_over_days(instance: &Instance, active: impl Fn(usize) -> bool) -> f64 {
    let w = instance.wholesale();
    let n = instance.horizon();
    let b = instance.backorder_cost();
    let mut bound = f64::INFINITY;
    for t in (0..n - 1).filter(|&t| active(t)) {
        let drop = w[t] - w[t + 1];
        if drop > 0.0 {
            bound = bound.min(b / drop - 1.0);
        }
    }
    if active(n - 1) {
        bound = bound.min((b + instance.sale_price()) / w[n - 1] - 1.0);
    }
    bound
}

/// Fractile `P_t(ν)` for a zero-based period.
fn fractile(instance: &Instance, t: usize, nu: f64) -> f64 {
    let w = instance.wholesale();
    let (h, b, p) = (instance.holding_cost(), instance.backorder_cost(), instance.sale_price());
    if t + 1 == instance.horizon() {
        (b - (1.0 + nu) * w[t] + p) / (h + b + p)
    } else {
        (b - (1.0 + nu) * (w[t] - w[t + 1])) / (h + b)
    }
}

/// KKT stationary plan for a given multiplier and set of zeroed days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktCandidate {
    pub nu: f64,
    pub zero_days: BTreeSet<usize>,
    /// Order quantities; entries may be negative.
    pub q: Vec<f64>,
    /// `P_t(ν)` for every period, including zeroed ones.
    pub fractiles: Vec<f64>,
}

impl KktCandidate {
    pub fn spend(&self, instance: &Instance) -> f64 {
        instance.spend(&self.q)
    }

    pub fn has_negative(&self) -> bool {
        self.q.iter().any(|&q| q < 0.0)
    }
}

/// Cumulative-demand quantile `F̃_t⁻¹(prob)`, with `prob` already clamped to `[0, 1]`.
fn cumulative_quantile(model: &DemandModel, t: usize, prob: f64) -> f64 {
    match model {
        DemandModel::Normal { mu, sigma } => {
            let mean: f64 = mu[..=t].iter().sum();
            let sd = sigma[..=t].iter().map(|s| s * s).sum::<f64>().sqrt();
            mean + sd * probit(prob.clamp(MIN_PROB, MAX_PROB))
        }
        DemandModel::Poisson { lambda } => {
            let rate: f64 = lambda[..=t].iter().sum();
            poisson_quantile(prob, rate) as f64
        }
    }
}

/// Evaluates the adjusted KKT plan, clamping fractiles into `[0, 1]`.
fn candidate(instance: &Instance, model: &DemandModel, nu: f64, zero_days: &BTreeSet<usize>) -> KktCandidate {
    let n = instance.horizon();
    let fractiles: Vec<f64> = (0..n).map(|t| fractile(instance, t, nu)).collect();
    let mut q = vec![0.0; n];
    let mut placed = 0.0;
    for t in (0..n).filter(|t| !zero_days.contains(t)) {
        let target = cumulative_quantile(model, t, fractiles[t].clamp(0.0, 1.0));
        q[t] = target - placed;
        placed = target;
    }
    KktCandidate { nu, zero_days: zero_days.clone(), q, fractiles }
}

/// KKT plan for multiplier `nu` with the given days forced to zero.
///
/// Fails if any active day's fractile leaves `[0, 1]`.
pub fn kkt_solution(
    instance: &Instance,
    model: &DemandModel,
    nu: f64,
    zero_days: &BTreeSet<usize>,
) -> Result<KktCandidate> {
    model.check_horizon(instance)?;
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("multiplier must be finite and >= 0, got {nu}")));
    }
    if let Some(&d) = zero_days.iter().find(|&&d| d >= instance.horizon()) {
        return Err(Error::InvalidParameter(format!("zero day {d} outside the horizon")));
    }
    for t in (0..instance.horizon()).filter(|t| !zero_days.contains(t)) {
        let f = fractile(instance, t, nu);
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::MultiplierOutOfRange { nu, period: t, fractile: f });
        }
    }
    Ok(candidate(instance, model, nu, zero_days))
}

/// Step-size controls for the multiplier search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchConfig {
    pub tau: f64,
    pub delta0: f64,
    pub delta_min: f64,
    /// Budget slack; overrides the instance tolerance when set.
    pub eps_w: Option<f64>,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        LineSearchConfig { tau: 0.5, delta0: 1.0, delta_min: 1e-100, eps_w: None }
    }
}

impl LineSearchConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidParameter(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        if !(self.delta_min > 0.0 && self.delta_min <= self.delta0 && self.delta0.is_finite()) {
            return Err(Error::InvalidParameter("need 0 < delta_min <= delta0 < inf".into()));
        }
        if let Some(eps) = self.eps_w {
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(Error::InvalidParameter(format!("budget slack must be >= 0, got {eps}")));
            }
        }
        Ok(())
    }
}

/// How one round of the FD loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundOutcome {
    /// The clipped unconstrained plan already fits the budget.
    ClippedFits,
    /// The multiplier search reached a plan within budget.
    BudgetMet,
    /// An order turned negative first; a day was zeroed.
    NegativeOrder,
    /// The multiplier hit its upper bound first; a day was zeroed.
    BoundReached,
}

/// One pass through the FD loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdRound {
    pub zero_days: Vec<usize>,
    pub nu: f64,
    pub spend: f64,
    pub outcome: RoundOutcome,
    /// Day added to the zero set at the end of the round, if any.
    pub zeroed: Option<usize>,
    pub evaluations: usize,
}

/// Result of [`fd_solve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    pub plan: OrderPlan,
    pub cost: f64,
    pub spend: f64,
    pub nu: f64,
    pub zero_days: Vec<usize>,
    pub rounds: Vec<FdRound>,
    /// Some active day had a negative fractile at `ν = 0`.
    pub negative_fractile: bool,
}

fn raw_cost(instance: &Instance, model: &DemandModel, q: &[f64]) -> f64 {
    let c = match model {
        DemandModel::Normal { mu, sigma } => normal_cost_raw(instance, mu, sigma, q),
        DemandModel::Poisson { lambda } => {
            let qi: Vec<i64> = q.iter().map(|&x| x as i64).collect();
            poisson_cost_raw(instance, lambda, &qi)
        }
    };
    if c.is_finite() {
        c
    } else {
        f64::INFINITY
    }
}

/// Zero-day choice: the active day whose removal gives the cheapest plan at `nu`.
/// Ties go to the smallest index.
fn pick_zero_day(instance: &Instance, model: &DemandModel, nu: f64, zero_days: &BTreeSet<usize>) -> usize {
    let mut best: Option<(f64, usize)> = None;
    for t in (0..instance.horizon()).filter(|t| !zero_days.contains(t)) {
        let mut trial = zero_days.clone();
        trial.insert(t);
        let c = raw_cost(instance, model, &candidate(instance, model, nu, &trial).q);
        if best.is_none_or(|(bc, _)| c < bc) {
            best = Some((c, t));
        }
    }
    best.expect("at least one active day").1
}

enum SearchEnd {
    Feasible(KktCandidate),
    Negative(KktCandidate),
    Bound(f64),
}

/// Raises `ν` from zero until the first plan that fits the budget or has a
/// negative order. Event points are bracketed down to the step floor, then
/// the smallest evaluated event point is returned.
fn line_search(
    instance: &Instance,
    model: &DemandModel,
    zero_days: &BTreeSet<usize>,
    nu_ub: f64,
    cfg: &LineSearchConfig,
    eps: f64,
    evaluations: &mut usize,
) -> SearchEnd {
    let budget = instance.budget();
    let mut eval = |nu: f64| {
        *evaluations += 1;
        candidate(instance, model, nu, zero_days)
    };
    let is_event = |c: &KktCandidate| c.has_negative() || c.spend(instance) <= budget + eps;
    let finish = |c: KktCandidate| {
        if c.has_negative() {
            SearchEnd::Negative(c)
        } else {
            SearchEnd::Feasible(c)
        }
    };

    let start = eval(0.0);
    if start.has_negative() {
        return SearchEnd::Negative(start);
    }
    // no active fractile depends on ν, so the plan can never change
    if nu_ub.is_infinite() {
        return SearchEnd::Bound(0.0);
    }
    let mut nu: f64 = 0.0;
    let mut delta = cfg.delta0;
    let mut pending: Option<KktCandidate> = None;
    loop {
        // below this step, nu + delta is no longer distinguishable from nu
        let floor = cfg.delta_min.max(4.0 * f64::EPSILON * nu.max(1.0));
        while nu + delta > nu_ub && delta >= floor {
            delta *= cfg.tau;
        }
        if delta < floor {
            if let Some(c) = pending.take() {
                return finish(c);
            }
            let c = eval(nu_ub);
            return if is_event(&c) { finish(c) } else { SearchEnd::Bound(nu_ub) };
        }
        let trial = nu + delta;
        let c = eval(trial);
        if !is_event(&c) {
            nu = trial;
            continue;
        }
        let non_negative = !c.has_negative();
        if non_negative && (c.spend(instance) - budget).abs() <= eps {
            return SearchEnd::Feasible(c);
        }
        pending = Some(c);
        if delta * cfg.tau < floor {
            return finish(pending.take().expect("just stored"));
        }
        delta *= cfg.tau;
    }
}

/// Runs the FD heuristic and returns a plan with `q >= 0` and
/// `Σ w_t q_t <= W + eps_W`.
pub fn fd_solve(instance: &Instance, model: &DemandModel, config: &LineSearchConfig) -> Result<FdReport> {
    config.validate()?;
    model.check_horizon(instance)?;
    let eps = config.eps_w.unwrap_or(instance.budget_tolerance());
    let budget = instance.budget();
    let n = instance.horizon();
    let negative_fractile = (0..n).any(|t| fractile(instance, t, 0.0) < 0.0);

    let mut zero_days = BTreeSet::new();
    let mut rounds = Vec::new();
    loop {
        let start = candidate(instance, model, 0.0, &zero_days);
        let clipped: Vec<f64> = start.q.iter().map(|&q| q.max(0.0)).collect();
        let clipped_spend = instance.spend(&clipped);
        if clipped_spend <= budget + eps {
            rounds.push(FdRound {
                zero_days: zero_days.iter().copied().collect(),
                nu: 0.0,
                spend: clipped_spend,
                outcome: RoundOutcome::ClippedFits,
                zeroed: None,
                evaluations: 1,
            });
            return finish_report(instance, model, clipped, 0.0, zero_days, rounds, negative_fractile);
        }
        if zero_days.len() == n {
            return Err(Error::Infeasible(format!("zero plan still exceeds budget {budget}")));
        }

        let nu_ub = bound_over_days(instance, |t| !zero_days.contains(&t)).max(0.0);
        let mut evaluations = 0;
        let end = line_search(instance, model, &zero_days, nu_ub, config, eps, &mut evaluations);
        let zero_list: Vec<usize> = zero_days.iter().copied().collect();
        let (nu_star, outcome, spend) = match end {
            SearchEnd::Feasible(c) => {
                let spend = c.spend(instance);
                rounds.push(FdRound {
                    zero_days: zero_list,
                    nu: c.nu,
                    spend,
                    outcome: RoundOutcome::BudgetMet,
                    zeroed: None,
                    evaluations,
                });
                return finish_report(instance, model, c.q, c.nu, zero_days, rounds, negative_fractile);
            }
            SearchEnd::Negative(c) => {
                let spend = c.spend(instance);
                (c.nu, RoundOutcome::NegativeOrder, spend)
            }
            SearchEnd::Bound(nu) => {
                let spend = candidate(instance, model, nu, &zero_days).spend(instance);
                (nu, RoundOutcome::BoundReached, spend)
            }
        };
        let day = pick_zero_day(instance, model, nu_star, &zero_days);
        rounds.push(FdRound {
            zero_days: zero_list,
            nu: nu_star,
            spend,
            outcome,
            zeroed: Some(day),
            evaluations: evaluations + (n - zero_days.len()),
        });
        zero_days.insert(day);
    }
}

fn finish_report(
    instance: &Instance,
    model: &DemandModel,
    q: Vec<f64>,
    nu: f64,
    zero_days: BTreeSet<usize>,
    rounds: Vec<FdRound>,
    negative_fractile: bool,
) -> Result<FdReport> {
    let cost = raw_cost(instance, model, &q);
    let spend = instance.spend(&q);
    Ok(FdReport {
        plan: OrderPlan::new(q)?,
        cost,
        spend,
        nu,
        zero_days: zero_days.into_iter().collect(),
        rounds,
        negative_fractile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(t: usize, p: f64, h: f64, b: f64, w: Vec<f64>, budget: f64) -> Instance {
        Instance::new(t, p, h, b, w, budget).unwrap()
    }

    #[test]
    fn upper_bound_cases() {
        assert_eq!(nu_upper_bound(&inst(1, 1.0, 1.0, 1.0, vec![1.0], 1.0)), 1.0);
        assert_eq!(nu_upper_bound(&inst(2, 1.0, 1.0, 1.0, vec![2.0, 1.0], 1.0)), 0.0);
        assert_eq!(nu_upper_bound(&inst(2, 1.0, 1.0, 5.0, vec![1.0, 1.0], 1.0)), 5.0);
    }

    #[test]
    fn single_period_critical_fractile() {
        let i = inst(1, 1.0, 1.0, 1.0, vec![1.0], 100.0);
        let m = DemandModel::normal(vec![10.0], vec![2.0]).unwrap();
        let c = kkt_solution(&i, &m, 0.0, &BTreeSet::new()).unwrap();
        let expected = 10.0 + 2.0 * crate::special::std_normal_inv_cdf(1.0 / 3.0).unwrap();
        assert!((c.q[0] - expected).abs() < 1e-12);
        assert!((c.q[0] - 9.138_545_4).abs() < 1e-7);
        let m = DemandModel::poisson(vec![4.0]).unwrap();
        assert_eq!(kkt_solution(&i, &m, 0.0, &BTreeSet::new()).unwrap().q, vec![3.0]);
    }

    #[test]
    fn zeroed_first_day_moves_order_to_second() {
        let i = inst(2, 1.0, 1.0, 2.0, vec![1.0, 1.0], 100.0);
        let m = DemandModel::poisson(vec![4.0, 4.0]).unwrap();
        let free = kkt_solution(&i, &m, 0.0, &BTreeSet::new()).unwrap();
        let zeroed = kkt_solution(&i, &m, 0.0, &BTreeSet::from([0])).unwrap();
        assert_eq!(zeroed.q[0], 0.0);
        assert_eq!(zeroed.q[1], free.q[0] + free.q[1]);
    }

    #[test]
    fn multiplier_out_of_range() {
        let i = inst(1, 1.0, 1.0, 1.0, vec![1.0], 100.0);
        let m = DemandModel::normal(vec![10.0], vec![2.0]).unwrap();
        assert!(matches!(
            kkt_solution(&i, &m, 1.5, &BTreeSet::new()),
            Err(Error::MultiplierOutOfRange { period: 0, .. })
        ));
    }

    #[test]
    fn generous_budget_returns_clipped_plan() {
        let i = inst(2, 1.0, 1.0, 1.0, vec![1.0, 1.0], 1e6);
        let m = DemandModel::normal(vec![10.0, 10.0], vec![2.0, 2.0]).unwrap();
        let r = fd_solve(&i, &m, &LineSearchConfig::default()).unwrap();
        let c = kkt_solution(&i, &m, 0.0, &BTreeSet::new()).unwrap();
        let clipped: Vec<f64> = c.q.iter().map(|q| q.max(0.0)).collect();
        assert_eq!(r.plan.quantities(), clipped.as_slice());
        assert_eq!(r.rounds[0].outcome, RoundOutcome::ClippedFits);
    }

    #[test]
    fn binding_budget_is_respected() {
        let i = inst(2, 2.0, 2.0, 2.0, vec![2.0, 1.0], 6.0);
        let m = DemandModel::poisson(vec![5.0, 5.0]).unwrap();
        let r = fd_solve(&i, &m, &LineSearchConfig::default()).unwrap();
        assert!(r.spend <= 6.0 + 1e-6);
        assert!(r.plan.quantities().iter().all(|&q| q >= 0.0 && q.fract() == 0.0));
    }

    #[test]
    fn tight_normal_budget_hits_the_budget() {
        let i = inst(3, 2.0, 1.0, 2.0, vec![3.0, 2.0, 1.0], 20.0);
        let m = DemandModel::normal(vec![10.0, 12.0, 8.0], vec![2.0, 3.0, 2.0]).unwrap();
        let r = fd_solve(&i, &m, &LineSearchConfig::default()).unwrap();
        assert!(r.spend <= 20.0 + 1e-6);
        assert!(r.plan.quantities().iter().all(|&q| q >= 0.0));
    }

    #[test]
    fn zero_budget_orders_nothing() {
        let i = inst(2, 1.0, 1.0, 1.0, vec![1.0, 1.0], 0.0);
        let m = DemandModel::normal(vec![10.0, 10.0], vec![2.0, 2.0]).unwrap();
        let r = fd_solve(&i, &m, &LineSearchConfig::default()).unwrap();
        assert!(r.spend <= 1e-6);
    }

    #[test]
    fn bad_config_is_rejected() {
        let i = inst(1, 1.0, 1.0, 1.0, vec![1.0], 1.0);
        let m = DemandModel::poisson(vec![1.0]).unwrap();
        let cfg = LineSearchConfig { tau: 1.0, ..Default::default() };
        assert!(fd_solve(&i, &m, &cfg).is_err());
    }
}
