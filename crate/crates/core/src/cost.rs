//! Closed-form expected costs and derivatives.
//!
//! With `a_t = h + b + p·1{t=T}`, cumulative demand `D_t = Σ_{k<=t} X_k` and
//! cumulative orders `Q_t`, the expected cost of a plan is
//!
//! ```text
//! C(q) = Σ_t ( h·E[(Q_t − D_t)⁺] + b·E[(D_t − Q_t)⁺] + w_t q_t − p·E[X_t] ) + p·E[(D_T − Q_T)⁺]
//! ```
//!
//! which this module evaluates in closed form for normal and Poisson demand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cumulative, DemandModel, Family, Instance, OrderPlan};
use crate::special::{cdf_unchecked, std_normal_cdf, std_normal_pdf};

/// Standardized margins of the normal cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalCostTerms {
    /// `β_t = Σ_{k<=t}(μ_k − q_k) / s_t`.
    pub beta: Vec<f64>,
    /// `s_t = sqrt(Σ_{k<=t} σ_k²)`.
    pub s: Vec<f64>,
    /// Expected cumulative shortfall `Σ_{k<=t}(μ_k − q_k)`.
    pub margin: Vec<f64>,
}

impl NormalCostTerms {
    pub fn new(mu: &[f64], sigma: &[f64], q: &[f64]) -> Self {
        let n = mu.len();
        let mut beta = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        let mut margin = Vec::with_capacity(n);
        let (mut d, mut var) = (0.0, 0.0);
        for t in 0..n {
            d += mu[t] - q[t];
            var += sigma[t] * sigma[t];
            let st = var.sqrt();
            beta.push(d / st);
            s.push(st);
            margin.push(d);
        }
        NormalCostTerms { beta, s, margin }
    }
}

/// Cumulative rates and CDF values of the Poisson cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonCostTerms {
    /// `Λ_t = Σ_{k<=t} λ_k`.
    pub lambda_cum: Vec<f64>,
    /// `F̃_t(Q_t)`.
    pub cdf_at_q: Vec<f64>,
    /// `F̃_t(Q_t − 1)`.
    pub cdf_at_q_minus_one: Vec<f64>,
}

impl PoissonCostTerms {
    pub fn new(lambda: &[f64], q: &[i64]) -> Self {
        let lambda_cum = cumulative(lambda);
        let mut cdf_at_q = Vec::with_capacity(q.len());
        let mut cdf_at_q_minus_one = Vec::with_capacity(q.len());
        let mut big_q = 0i64;
        for (t, &qt) in q.iter().enumerate() {
            big_q += qt;
            cdf_at_q.push(cdf_unchecked(big_q, lambda_cum[t]));
            cdf_at_q_minus_one.push(cdf_unchecked(big_q - 1, lambda_cum[t]));
        }
        PoissonCostTerms { lambda_cum, cdf_at_q, cdf_at_q_minus_one }
    }
}

fn normal_params(model: &DemandModel) -> Result<(&[f64], &[f64])> {
    match model {
        DemandModel::Normal { mu, sigma } => Ok((mu, sigma)),
        other => Err(Error::FamilyMismatch { expected: "normal", got: other.family().name() }),
    }
}

fn poisson_params(model: &DemandModel) -> Result<&[f64]> {
    match model {
        DemandModel::Poisson { lambda } => Ok(lambda),
        other => Err(Error::FamilyMismatch { expected: "poisson", got: other.family().name() }),
    }
}

fn check(instance: &Instance, model: &DemandModel, plan: &OrderPlan) -> Result<()> {
    instance.check_len(model.horizon())?;
    instance.check_len(plan.len())
}

/// Expected cost under independent normal demand.
pub fn normal_cost(instance: &Instance, model: &DemandModel, plan: &OrderPlan) -> Result<f64> {
    let (mu, sigma) = normal_params(model)?;
    check(instance, model, plan)?;
    Ok(normal_cost_raw(instance, mu, sigma, plan.quantities()))
}

/// Normal cost for an arbitrary real vector `q` (negative entries allowed).
pub fn normal_cost_raw(instance: &Instance, mu: &[f64], sigma: &[f64], q: &[f64]) -> f64 {
    let h = instance.holding_cost();
    let p = instance.sale_price();
    let w = instance.wholesale();
    let terms = NormalCostTerms::new(mu, sigma, q);
    let mut cost = 0.0;
    for t in 0..mu.len() {
        let a = instance.period_weight(t);
        let beta = terms.beta[t];
        cost += (a * std_normal_cdf(beta) - h) * terms.margin[t] + a * std_normal_pdf(beta) * terms.s[t]
            + q[t] * w[t]
            - p * mu[t];
    }
    cost
}

/// Normal cost and its gradient in `q`, sharing one pass over the periods.
pub(crate) fn normal_value_and_grad_q(
    instance: &Instance,
    mu: &[f64],
    sigma: &[f64],
    q: &[f64],
) -> (f64, Vec<f64>) {
    let h = instance.holding_cost();
    let p = instance.sale_price();
    let w = instance.wholesale();
    let n = mu.len();
    let terms = NormalCostTerms::new(mu, sigma, q);
    let mut cost = 0.0;
    let mut slope = vec![0.0; n];
    for t in 0..n {
        let a = instance.period_weight(t);
        let (cdf, pdf) = (std_normal_cdf(terms.beta[t]), std_normal_pdf(terms.beta[t]));
        cost += (a * cdf - h) * terms.margin[t] + a * pdf * terms.s[t] + q[t] * w[t] - p * mu[t];
        slope[t] = a * cdf - h;
    }
    // ∂C/∂q_j = w_j − Σ_{t>=j} (a_t Φ(β_t) − h)
    let mut grad = vec![0.0; n];
    let mut suffix = 0.0;
    for j in (0..n).rev() {
        suffix += slope[j];
        grad[j] = w[j] - suffix;
    }
    (cost, grad)
}

/// Gradient of the normal cost with respect to the order quantities.
pub fn normal_cost_grad_q(instance: &Instance, model: &DemandModel, plan: &OrderPlan) -> Result<Vec<f64>> {
    let (mu, sigma) = normal_params(model)?;
    check(instance, model, plan)?;
    Ok(normal_value_and_grad_q(instance, mu, sigma, plan.quantities()).1)
}

/// Parameter sensitivities of the normal cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalParamGradient {
    pub dmu: Vec<f64>,
    pub dsigma: Vec<f64>,
}

/// Gradient of the normal cost with respect to `μ` and `σ`.
///
/// `∂C/∂μ_τ = Σ_{t>=τ}(a_t Φ(β_t) − h) − p` and
/// `∂C/∂σ_τ = Σ_{t>=τ} a_t φ(β_t) σ_τ / s_t`.
pub fn normal_cost_grad_params(
    instance: &Instance,
    model: &DemandModel,
    plan: &OrderPlan,
) -> Result<NormalParamGradient> {
    let (mu, sigma) = normal_params(model)?;
    check(instance, model, plan)?;
    let h = instance.holding_cost();
    let p = instance.sale_price();
    let n = mu.len();
    let terms = NormalCostTerms::new(mu, sigma, plan.quantities());
    let mut dmu = vec![0.0; n];
    let mut dsigma = vec![0.0; n];
    let (mut mu_suffix, mut sigma_suffix) = (0.0, 0.0);
    for t in (0..n).rev() {
        let a = instance.period_weight(t);
        mu_suffix += a * std_normal_cdf(terms.beta[t]) - h;
        sigma_suffix += a * std_normal_pdf(terms.beta[t]) / terms.s[t];
        dmu[t] = mu_suffix - p;
        dsigma[t] = sigma_suffix * sigma[t];
    }
    Ok(NormalParamGradient { dmu, dsigma })
}

/// Expected cost under independent Poisson demand. The plan must be integral.
pub fn poisson_cost(instance: &Instance, model: &DemandModel, plan: &OrderPlan) -> Result<f64> {
    let lambda = poisson_params(model)?;
    check(instance, model, plan)?;
    let q = plan.to_integers()?;
    Ok(poisson_cost_raw(instance, lambda, &q))
}

/// Contribution of period `t` excluding the purchase cost `w_t q_t`:
/// `a_t Q F̃(Q) − Λ a_t F̃(Q−1) + (b + p·1{t=T})(Λ − Q) − p λ_t`.
pub(crate) fn poisson_period_term(instance: &Instance, t: usize, lambda_cum: f64, lambda_t: f64, big_q: i64) -> f64 {
    let a = instance.period_weight(t);
    let qf = big_q as f64;
    a * qf * cdf_unchecked(big_q, lambda_cum) - lambda_cum * a * cdf_unchecked(big_q - 1, lambda_cum)
        + instance.shortage_weight(t) * (lambda_cum - qf)
        - instance.sale_price() * lambda_t
}

/// Poisson cost for an integer vector `q` (negative entries allowed).
pub fn poisson_cost_raw(instance: &Instance, lambda: &[f64], q: &[i64]) -> f64 {
    let w = instance.wholesale();
    let mut lambda_cum = 0.0;
    let mut big_q = 0i64;
    let mut cost = 0.0;
    for t in 0..lambda.len() {
        lambda_cum += lambda[t];
        big_q += q[t];
        cost += poisson_period_term(instance, t, lambda_cum, lambda[t], big_q) + w[t] * q[t] as f64;
    }
    cost
}

/// Gradient of the Poisson cost with respect to the rates:
/// `∂C/∂λ_k = Σ_{t>=k}(a_t − h − a_t F̃_t(Q_t − 1)) − p`.
pub fn poisson_cost_grad_lambda(instance: &Instance, model: &DemandModel, plan: &OrderPlan) -> Result<Vec<f64>> {
    let lambda = poisson_params(model)?;
    check(instance, model, plan)?;
    let q = plan.to_integers()?;
    let h = instance.holding_cost();
    let p = instance.sale_price();
    let terms = PoissonCostTerms::new(lambda, &q);
    let mut grad = vec![0.0; lambda.len()];
    let mut suffix = 0.0;
    for t in (0..lambda.len()).rev() {
        let a = instance.period_weight(t);
        suffix += a - h - a * terms.cdf_at_q_minus_one[t];
        grad[t] = suffix - p;
    }
    Ok(grad)
}

/// Expected cost for either family.
pub fn expected_cost(instance: &Instance, model: &DemandModel, plan: &OrderPlan) -> Result<f64> {
    match model.family() {
        Family::Normal => normal_cost(instance, model, plan),
        Family::Poisson => poisson_cost(instance, model, plan),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(t: usize) -> Instance {
        Instance::new(t, 1.0, 1.0, 1.0, vec![1.0; t], 100.0).unwrap()
    }

    #[test]
    fn normal_cost_at_the_mean() {
        let m = DemandModel::normal(vec![10.0], vec![2.0]).unwrap();
        let c = normal_cost(&unit(1), &m, &OrderPlan::new(vec![10.0]).unwrap()).unwrap();
        assert!((c - 6.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn normal_cost_ordering_nothing() {
        // (3Φ(5) − 1)·10 + 3φ(5)·2 − 10, with Φ(5), φ(5) taken to 16 digits
        let phi5 = 0.999_999_713_348_428_1;
        let pdf5 = 1.486_719_514_734_297_7e-6;
        let expected = (3.0 * phi5 - 1.0) * 10.0 + 3.0 * pdf5 * 2.0 - 10.0;
        let m = DemandModel::normal(vec![10.0], vec![2.0]).unwrap();
        let c = normal_cost(&unit(1), &m, &OrderPlan::zeros(1)).unwrap();
        assert!((c - expected).abs() < 1e-12, "{c} vs {expected}");
        assert!((c - 10.0000003).abs() < 1e-7);
    }

    #[test]
    fn poisson_cost_small_cases() {
        let m = DemandModel::poisson(vec![2.0]).unwrap();
        let c = poisson_cost(&unit(1), &m, &OrderPlan::zeros(1)).unwrap();
        assert!((c - 2.0).abs() < 1e-14);
        let m = DemandModel::poisson(vec![1.0]).unwrap();
        let c = poisson_cost(&unit(1), &m, &OrderPlan::new(vec![1.0]).unwrap()).unwrap();
        assert!((c - 3.0 * (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn poisson_cost_rejects_fractional_plan() {
        let m = DemandModel::poisson(vec![1.0]).unwrap();
        let plan = OrderPlan::new(vec![0.5]).unwrap();
        assert!(matches!(poisson_cost(&unit(1), &m, &plan), Err(Error::Domain(_))));
    }

    #[test]
    fn family_mismatch_is_reported() {
        let m = DemandModel::poisson(vec![1.0]).unwrap();
        assert!(matches!(
            normal_cost(&unit(1), &m, &OrderPlan::zeros(1)),
            Err(Error::FamilyMismatch { .. })
        ));
    }

    #[test]
    fn grad_q_vanishes_at_critical_fractile() {
        let m = DemandModel::normal(vec![10.0], vec![2.0]).unwrap();
        let z = crate::special::std_normal_inv_cdf(1.0 / 3.0).unwrap();
        let plan = OrderPlan::new(vec![10.0 + 2.0 * z]).unwrap();
        let g = normal_cost_grad_q(&unit(1), &m, &plan).unwrap();
        assert!(g[0].abs() < 1e-12);
    }

    #[test]
    fn lambda_gradient_with_no_orders() {
        let inst = Instance::new(3, 2.0, 1.0, 3.0, vec![1.0; 3], 10.0).unwrap();
        let m = DemandModel::poisson(vec![1.0, 2.0, 3.0]).unwrap();
        let g = poisson_cost_grad_lambda(&inst, &m, &OrderPlan::zeros(3)).unwrap();
        // Σ_{t>=k}(b + p·1{t=T}) − p
        assert_eq!(g, vec![9.0, 6.0, 3.0]);
    }

    #[test]
    fn value_and_gradient_agree_with_separate_calls() {
        let inst = Instance::new(2, 3.0, 1.0, 2.0, vec![2.0, 1.0], 10.0).unwrap();
        let (mu, sigma) = (vec![5.0, 7.0], vec![1.0, 2.0]);
        let q = vec![4.0, 3.5];
        let (c, g) = normal_value_and_grad_q(&inst, &mu, &sigma, &q);
        assert_eq!(c, normal_cost_raw(&inst, &mu, &sigma, &q));
        let m = DemandModel::normal(mu, sigma).unwrap();
        assert_eq!(g, normal_cost_grad_q(&inst, &m, &OrderPlan::new(q).unwrap()).unwrap());
    }
}
