//! Analytic costs and derivatives against independent oracles.

mod common;

use newsvendor_core::cost::*;
use newsvendor_core::model::{mc_cost, sample_demand};
use newsvendor_core::{DemandModel, Instance, OrderPlan};
use proptest::prelude::*;

/// Expected cost by direct summation over the cumulative-demand pmf:
/// `Σ_t (h E[I⁺] + b E[I⁻] + w_t q_t − p λ_t) + p E[I_T⁻]`.
fn poisson_truncated_sum(inst: &Instance, lambda: &[f64], q: &[i64]) -> f64 {
    let (h, b, p) = (inst.holding_cost(), inst.backorder_cost(), inst.sale_price());
    let mut rate = 0.0;
    let mut level = 0i64;
    let mut total = 0.0;
    let mut last_short = 0.0;
    for t in 0..lambda.len() {
        rate += lambda[t];
        level += q[t];
        let upto = (rate + 40.0 * rate.sqrt() + 60.0) as usize;
        let pmf = common::pmf_table(rate, upto);
        assert!(pmf[upto] < 1e-14);
        let (mut over, mut short) = (0.0, 0.0);
        for (x, px) in pmf.iter().enumerate() {
            let i = level - x as i64;
            if i > 0 {
                over += i as f64 * px;
            } else {
                short += (-i) as f64 * px;
            }
        }
        total += h * over + b * short + inst.wholesale()[t] * q[t] as f64 - p * lambda[t];
        last_short = short;
    }
    total + p * last_short
}

#[test]
fn poisson_single_unit_brute_force() {
    let inst = Instance::new(1, 1.0, 1.0, 1.0, vec![1.0], 10.0).unwrap();
    let oracle = poisson_truncated_sum(&inst, &[1.0], &[1]);
    let model = DemandModel::poisson(vec![1.0]).unwrap();
    let got = poisson_cost(&inst, &model, &OrderPlan::from_integers(&[1]).unwrap()).unwrap();
    assert!((oracle - 3.0 * (-1.0f64).exp()).abs() < 1e-14);
    assert!((got - oracle).abs() < 1e-12);
}

#[test]
fn poisson_matches_truncated_summation() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    runner
        .run(&common::poisson_case(), |(inst, model, q)| {
            let (lambda, _) = common::split(&model);
            let got = poisson_cost_raw(&inst, &lambda, &q);
            let oracle = poisson_truncated_sum(&inst, &lambda, &q);
            prop_assert!((got - oracle).abs() <= 1e-10, "{got} vs {oracle}");
            Ok(())
        })
        .unwrap();
}

#[test]
fn mc_single_period_examples() {
    let inst = Instance::new(1, 1.0, 1.0, 1.0, vec![1.0], 10.0).unwrap();
    let pois = DemandModel::poisson(vec![2.0]).unwrap();
    let est = mc_cost(&inst, &OrderPlan::zeros(1), &pois, 1_000_000, 11).unwrap();
    assert!((est.mean - 2.0).abs() <= 3.0 * est.std_error, "{est:?}");

    let norm = DemandModel::normal(vec![10.0], vec![2.0]).unwrap();
    let plan = OrderPlan::new(vec![10.0]).unwrap();
    let est = mc_cost(&inst, &plan, &norm, 1_000_000, 12).unwrap();
    let exact = 6.0 / (2.0 * std::f64::consts::PI).sqrt();
    assert!((est.mean - exact).abs() <= 3.0 * est.std_error, "{est:?}");
}

#[test]
fn normal_matches_monte_carlo() {
    let mut runner = proptest::test_runner::TestRunner::new(proptest::test_runner::Config {
        cases: 8,
        rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha,
        ..Default::default()
    });
    runner
        .run(&(common::normal_case(), any::<u64>()), |((inst, model, q), seed)| {
            let plan = OrderPlan::new(q).unwrap();
            let analytic = normal_cost(&inst, &model, &plan).unwrap();
            let est = mc_cost(&inst, &plan, &model, 1_000_000, seed).unwrap();
            prop_assert!((analytic - est.mean).abs() <= 3.0 * est.std_error, "{analytic} vs {est:?}");
            Ok(())
        })
        .unwrap();
}

#[test]
fn sample_means_converge_to_rates() {
    let model = DemandModel::poisson(vec![3.0, 9.0]).unwrap();
    let s = sample_demand(&model, 100_000, 5).unwrap();
    for (t, rate) in [3.0, 9.0].iter().enumerate() {
        let mean = s.period(t).sum::<f64>() / s.len() as f64;
        assert!((mean - rate).abs() <= 4.0 * (rate / s.len() as f64).sqrt());
    }
}

fn close(analytic: f64, numeric: f64) -> bool {
    (analytic - numeric).abs() <= 1e-6 * analytic.abs().max(1.0)
}

fn with(v: &[f64], j: usize, dx: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    out[j] += dx;
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn grad_q_matches_central_difference((inst, model, q) in common::normal_case()) {
        let (mu, sigma) = common::split(&model);
        let grad = normal_cost_grad_q(&inst, &model, &OrderPlan::new(q.clone()).unwrap()).unwrap();
        for j in 0..q.len() {
            let step = 1e-5 * (1.0 + q[j].abs());
            let fd = (normal_cost_raw(&inst, &mu, &sigma, &with(&q, j, step))
                - normal_cost_raw(&inst, &mu, &sigma, &with(&q, j, -step))) / (2.0 * step);
            prop_assert!(close(grad[j], fd), "j={j}: {} vs {fd}", grad[j]);
        }
    }

    #[test]
    fn param_gradients_match_central_difference((inst, model, q) in common::normal_case()) {
        let (mu, sigma) = common::split(&model);
        let g = normal_cost_grad_params(&inst, &model, &OrderPlan::new(q.clone()).unwrap()).unwrap();
        for j in 0..q.len() {
            let step = 1e-5 * (1.0 + mu[j].abs());
            let fd = (normal_cost_raw(&inst, &with(&mu, j, step), &sigma, &q)
                - normal_cost_raw(&inst, &with(&mu, j, -step), &sigma, &q)) / (2.0 * step);
            prop_assert!(close(g.dmu[j], fd), "dmu j={j}: {} vs {fd}", g.dmu[j]);
            let step = 1e-5 * sigma[j];
            let fd = (normal_cost_raw(&inst, &mu, &with(&sigma, j, step), &q)
                - normal_cost_raw(&inst, &mu, &with(&sigma, j, -step), &q)) / (2.0 * step);
            prop_assert!(close(g.dsigma[j], fd), "dsigma j={j}: {} vs {fd}", g.dsigma[j]);
            prop_assert!(g.dsigma[j] >= 0.0);
        }
    }

    #[test]
    fn lambda_gradient_matches_central_difference((inst, model, q) in common::poisson_case()) {
        let (lambda, _) = common::split(&model);
        let g = poisson_cost_grad_lambda(&inst, &model, &OrderPlan::from_integers(&q).unwrap()).unwrap();
        for k in 0..q.len() {
            let step = 1e-6 * lambda[k];
            let fd = (poisson_cost_raw(&inst, &with(&lambda, k, step), &q)
                - poisson_cost_raw(&inst, &with(&lambda, k, -step), &q)) / (2.0 * step);
            prop_assert!(close(g[k], fd), "k={k}: {} vs {fd}", g[k]);
        }
    }

    #[test]
    fn normal_cost_is_convex_in_q_and_mu((inst, model, q) in common::normal_case()) {
        let (mu, sigma) = common::split(&model);
        let c0 = normal_cost_raw(&inst, &mu, &sigma, &q);
        for j in 0..q.len() {
            let step = 0.1 * (1.0 + q[j].abs());
            let d2 = normal_cost_raw(&inst, &mu, &sigma, &with(&q, j, step)) - 2.0 * c0
                + normal_cost_raw(&inst, &mu, &sigma, &with(&q, j, -step));
            prop_assert!(d2 >= -1e-8, "q_{j}: {d2}");
            let step = 0.1 * mu[j];
            let d2 = normal_cost_raw(&inst, &with(&mu, j, step), &sigma, &q) - 2.0 * c0
                + normal_cost_raw(&inst, &with(&mu, j, -step), &sigma, &q);
            prop_assert!(d2 >= -1e-8, "mu_{j}: {d2}");
        }
    }

    #[test]
    fn normal_cost_increases_in_sigma((inst, model, q) in common::normal_case()) {
        let (mu, sigma) = common::split(&model);
        let c0 = normal_cost_raw(&inst, &mu, &sigma, &q);
        for j in 0..q.len() {
            let up = normal_cost_raw(&inst, &mu, &with(&sigma, j, 0.1 * sigma[j]), &q);
            prop_assert!(up - c0 >= -1e-8, "sigma_{j}: {}", up - c0);
        }
    }

    #[test]
    fn poisson_cost_is_convex_in_lambda((inst, model, q) in common::poisson_case()) {
        let (lambda, _) = common::split(&model);
        let c0 = poisson_cost_raw(&inst, &lambda, &q);
        for k in 0..q.len() {
            let step = 0.2 * lambda[k];
            let d2 = poisson_cost_raw(&inst, &with(&lambda, k, step), &q) - 2.0 * c0
                + poisson_cost_raw(&inst, &with(&lambda, k, -step), &q);
            prop_assert!(d2 >= -1e-8, "lambda_{k}: {d2}");
        }
    }

    #[test]
    fn lambda_gradient_at_zero_order(inst in common::instance(4)) {
        let t = inst.horizon();
        let model = DemandModel::poisson(vec![4.0; t]).unwrap();
        let g = poisson_cost_grad_lambda(&inst, &model, &OrderPlan::zeros(t)).unwrap();
        let (b, p) = (inst.backorder_cost(), inst.sale_price());
        for k in 0..t {
            let expected: f64 = (k..t).map(|s| b + if s + 1 == t { p } else { 0.0 }).sum::<f64>() - p;
            prop_assert!((g[k] - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn simulate_is_piecewise_linear_in_q((inst, model, q) in common::normal_case(), seed in 0u64..1000) {
        // for a fixed path, second differences vanish unless a kink lies inside the step
        let path = sample_demand(&model, 1, seed).unwrap().rows()[0].clone();
        let cost = |v: &[f64]| newsvendor_core::model::simulate_inventory(&inst, &OrderPlan::new(v.to_vec()).unwrap(), &path).unwrap();
        let mut levels = Vec::new();
        let (mut qc, mut xc) = (0.0, 0.0);
        for t in 0..q.len() {
            qc += q[t];
            xc += path[t];
            levels.push(qc - xc);
        }
        for j in 0..q.len() {
            let step = 1e-3;
            if q[j] < step || levels[j..].iter().any(|l| l.abs() <= 2.0 * step) {
                continue;
            }
            let d2 = cost(&with(&q, j, step)) - 2.0 * cost(&q) + cost(&with(&q, j, -step));
            prop_assert!(d2.abs() <= 1e-9 * (1.0 + cost(&q).abs()));
        }
    }
}
