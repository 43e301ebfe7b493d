#![allow(dead_code)]

use newsvendor_core::{DemandModel, Instance};
use proptest::prelude::*;

/// Non-increasing wholesale prices built from positive decrements.
fn wholesale(t: usize) -> impl Strategy<Value = Vec<f64>> {
    (0.2f64..3.0, prop::collection::vec(0.0f64..1.5, t - 1)).prop_map(|(last, steps)| {
        let mut w = vec![last];
        for s in steps.iter().rev() {
            w.push(w.last().unwrap() + s);
        }
        w.reverse();
        w
    })
}

pub fn instance(max_t: usize) -> impl Strategy<Value = Instance> {
    (1..=max_t).prop_flat_map(|t| {
        (Just(t), 0.5f64..6.0, 0.2f64..4.0, 0.5f64..6.0, wholesale(t), 5.0f64..80.0)
            .prop_map(|(t, p, h, b, w, big_w)| Instance::new(t, p, h, b, w, big_w).unwrap())
    })
}

pub fn normal_model(t: usize) -> impl Strategy<Value = DemandModel> {
    prop::collection::vec((2.0f64..25.0, 0.3f64..1.0), t).prop_map(|v| {
        // keeps 3σ <= μ as in the experiment design
        let mu: Vec<f64> = v.iter().map(|x| x.0).collect();
        let sigma: Vec<f64> = v.iter().map(|x| x.1 * x.0 / 3.0).collect();
        DemandModel::normal(mu, sigma).unwrap()
    })
}

pub fn poisson_model(t: usize) -> impl Strategy<Value = DemandModel> {
    prop::collection::vec(0.5f64..20.0, t).prop_map(|l| DemandModel::poisson(l).unwrap())
}

pub fn normal_case() -> impl Strategy<Value = (Instance, DemandModel, Vec<f64>)> {
    instance(4).prop_flat_map(|inst| {
        let t = inst.horizon();
        (Just(inst), normal_model(t), prop::collection::vec(0.0f64..25.0, t))
    })
}

pub fn poisson_case() -> impl Strategy<Value = (Instance, DemandModel, Vec<i64>)> {
    instance(4).prop_flat_map(|inst| {
        let t = inst.horizon();
        (Just(inst), poisson_model(t), prop::collection::vec(0i64..25, t))
    })
}

pub fn split(model: &DemandModel) -> (Vec<f64>, Vec<f64>) {
    match model {
        DemandModel::Normal { mu, sigma } => (mu.clone(), sigma.clone()),
        DemandModel::Poisson { lambda } => (lambda.clone(), Vec::new()),
    }
}

/// Poisson pmf by the product recursion, independent of the library's special functions.
pub fn pmf_table(rate: f64, upto: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(upto + 1);
    let mut v = (-rate).exp();
    out.push(v);
    for k in 1..=upto {
        v *= rate / k as f64;
        out.push(v);
    }
    out
}
