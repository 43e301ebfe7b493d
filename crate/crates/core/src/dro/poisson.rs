//! Exact integer minimax for Poisson members by depth-first branch and bound.
//!
//! The objective of a plan is `w·q + max_i Σ_t g_i,t(Q_t)` where `g_i,t` is the
//! member's period term at cumulative order `Q_t`. Plans are explored in
//! lexicographic order of `q`. At a node with `q_0..q_k` fixed, the bound
//!
//! ```text
//! LB = w·q_{0..k} + max_i [ Σ_{t<=k} g_i,t(Q_t) + Σ_{t>k} min_{Q' >= Q_k} g_i,t(Q') ]
//! ```
//!
//! is valid because later cumulative orders cannot fall below `Q_k`, later
//! purchases cost at least zero, and a max is at least each of its terms.
//! A node is pruned only when `LB` exceeds the incumbent by more than a
//! relative `1e-9`, so ties are never cut and the first plan in
//! lexicographic order with the smallest exact value is returned.

use std::time::Instant;

use crate::cost::{poisson_cost_raw, poisson_period_term};
use crate::error::{Error, Result};
use crate::model::Instance;

/// Default node budget; beyond it the caller is asked to shrink the budget.
pub const MAX_NODES: u64 = 10_000_000;

const PRUNE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PoissonOutcome {
    pub q: Vec<i64>,
    pub value: f64,
    pub nodes: u64,
    pub timed_out: bool,
}

/// Exact worst-case value `max_i C_i(q)` over members.
pub(crate) fn exact_value(instance: &Instance, members: &[Vec<f64>], q: &[i64]) -> f64 {
    members
        .iter()
        .map(|l| poisson_cost_raw(instance, l, q))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest affordable cumulative order in each period.
pub(crate) fn cumulative_caps(instance: &Instance) -> Vec<i64> {
    let limit = instance.budget() + instance.budget_tolerance();
    instance.wholesale().iter().map(|w| (limit / w).floor() as i64).collect()
}

struct Search<'a> {
    instance: &'a Instance,
    members: &'a [Vec<f64>],
    caps: Vec<i64>,
    /// `terms[i][t][Q]`.
    terms: Vec<Vec<Vec<f64>>>,
    /// `rest[i][k][Q] = Σ_{t>=k} min_{Q' >= Q} terms[i][t][Q']`, `Q <= caps[T-1]`.
    rest: Vec<Vec<Vec<f64>>>,
    limit: f64,
    q: Vec<i64>,
    best_q: Option<Vec<i64>>,
    best: f64,
    nodes: u64,
    max_nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
    overflow: bool,
}

impl<'a> Search<'a> {
    fn new(instance: &'a Instance, members: &'a [Vec<f64>], max_nodes: u64, deadline: Option<Instant>) -> Self {
        let n = instance.horizon();
        let caps = cumulative_caps(instance);
        let top = *caps.iter().max().unwrap_or(&0);
        let mut terms = Vec::with_capacity(members.len());
        let mut rest = Vec::with_capacity(members.len());
        for lambda in members {
            let mut lambda_cum = 0.0;
            let per_t: Vec<Vec<f64>> = (0..n)
                .map(|t| {
                    lambda_cum += lambda[t];
                    (0..=caps[t]).map(|big_q| poisson_period_term(instance, t, lambda_cum, lambda[t], big_q)).collect()
                })
                .collect();
            let mut r = vec![vec![0.0; top as usize + 1]; n + 1];
            for t in (0..n).rev() {
                let mut suffix_min = f64::INFINITY;
                let mut mins = vec![f64::INFINITY; top as usize + 1];
                for big_q in (0..=top as usize).rev() {
                    if big_q <= caps[t] as usize {
                        suffix_min = suffix_min.min(per_t[t][big_q]);
                    }
                    mins[big_q] = suffix_min;
                }
                for big_q in 0..=top as usize {
                    r[t][big_q] = r[t + 1][big_q] + mins[big_q];
                }
            }
            terms.push(per_t);
            rest.push(r);
        }
        Search {
            instance,
            members,
            caps,
            terms,
            rest,
            limit: instance.budget() + instance.budget_tolerance(),
            q: vec![0; n],
            best_q: None,
            best: f64::INFINITY,
            nodes: 0,
            max_nodes,
            deadline,
            timed_out: false,
            overflow: false,
        }
    }

    fn slack(&self) -> f64 {
        PRUNE_SLACK * (1.0 + self.best.abs())
    }

    fn visit(&mut self, k: usize, prev_q: i64, spend: f64, partial: &[f64]) {
        let n = self.instance.horizon();
        let w = self.instance.wholesale()[k];
        let mut next = vec![0.0; partial.len()];
        let mut qk = 0i64;
        loop {
            let big_q = prev_q + qk;
            let new_spend = spend + w * qk as f64;
            if big_q > self.caps[k] || new_spend > self.limit {
                break;
            }
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                self.overflow = true;
                return;
            }
            if self.nodes % 4096 == 0 && self.deadline.is_some_and(|d| Instant::now() >= d) {
                self.timed_out = true;
            }
            if self.timed_out && self.best_q.is_some() {
                return;
            }
            self.q[k] = qk;
            let mut bound = f64::NEG_INFINITY;
            for (i, p) in partial.iter().enumerate() {
                next[i] = p + self.terms[i][k][big_q as usize];
                bound = bound.max(next[i] + self.rest[i][k + 1][big_q as usize]);
            }
            bound += new_spend;
            if bound <= self.best + self.slack() {
                if k + 1 == n {
                    self.leaf();
                } else {
                    self.visit(k + 1, big_q, new_spend, &next);
                    if self.overflow {
                        return;
                    }
                }
            }
            qk += 1;
        }
    }

    fn leaf(&mut self) {
        let value = exact_value(self.instance, self.members, &self.q);
        if value < self.best {
            self.best = value;
            self.best_q = Some(self.q.clone());
        }
    }
}

/// Minimizes the worst-case Poisson cost over integer plans within budget.
pub(crate) fn solve(
    instance: &Instance,
    members: &[Vec<f64>],
    max_nodes: u64,
    deadline: Option<Instant>,
) -> Result<PoissonOutcome> {
    let mut search = Search::new(instance, members, max_nodes, deadline);
    let start = vec![0.0; members.len()];
    search.visit(0, 0, 0.0, &start);
    if search.overflow {
        return Err(Error::Resource(format!(
            "exact search visited more than {max_nodes} nodes; reduce the budget W"
        )));
    }
    let q = search.best_q.expect("the zero plan is always feasible");
    Ok(PoissonOutcome { value: search.best, q, nodes: search.nodes, timed_out: search.timed_out })
}

/// Visits every feasible integer plan in lexicographic order; stops early
/// and returns `false` once more than `limit` plans have been seen.
pub fn enumerate_plans(instance: &Instance, limit: usize, mut f: impl FnMut(&[i64])) -> bool {
    fn rec(
        instance: &Instance,
        caps: &[i64],
        k: usize,
        prev: i64,
        spend: f64,
        q: &mut Vec<i64>,
        seen: &mut usize,
        limit: usize,
        f: &mut dyn FnMut(&[i64]),
    ) -> bool {
        let n = instance.horizon();
        let budget = instance.budget() + instance.budget_tolerance();
        let w = instance.wholesale()[k];
        let mut qk = 0;
        while prev + qk <= caps[k] && spend + w * qk as f64 <= budget {
            q[k] = qk;
            if k + 1 == n {
                *seen += 1;
                if *seen > limit {
                    return false;
                }
                f(q);
            } else if !rec(instance, caps, k + 1, prev + qk, spend + w * qk as f64, q, seen, limit, f) {
                return false;
            }
            qk += 1;
        }
        true
    }
    let caps = cumulative_caps(instance);
    let mut q = vec![0; instance.horizon()];
    let mut seen = 0;
    rec(instance, &caps, 0, 0, 0.0, &mut q, &mut seen, limit, &mut f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_enumeration_on_small_instance() {
        let inst = Instance::new(2, 2.0, 2.0, 2.0, vec![2.0, 1.0], 6.0).unwrap();
        let members = vec![vec![4.0, 5.0], vec![5.0, 5.0], vec![6.0, 4.0]];
        let got = solve(&inst, &members, MAX_NODES, None).unwrap();
        let mut best: Option<(f64, Vec<i64>)> = None;
        assert!(enumerate_plans(&inst, 10_000, |q| {
            let v = exact_value(&inst, &members, q);
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, q.to_vec()));
            }
        }));
        let (value, q) = best.unwrap();
        assert_eq!(got.q, q);
        assert_eq!(got.value, value);
    }

    #[test]
    fn enumeration_counts_plans() {
        // w = (1, 1), W = 2: q1 + q2 <= 2 gives 6 plans
        let inst = Instance::new(2, 1.0, 1.0, 1.0, vec![1.0, 1.0], 2.0).unwrap();
        let mut count = 0;
        assert!(enumerate_plans(&inst, 100, |_| count += 1));
        assert_eq!(count, 6);
        assert!(!enumerate_plans(&inst, 5, |_| {}));
    }
}
