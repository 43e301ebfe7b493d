//! Problem data, demand models, demand simulation and the Monte-Carlo cost
//! oracle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default slack on the budget constraint.
pub const DEFAULT_BUDGET_TOLERANCE: f64 = 1e-6;

/// Paths simulated per RNG block. Fixed so results do not depend on the
/// number of worker threads.
const SAMPLE_BLOCK: usize = 4096;

/// Data of one budget-constrained multi-period newsvendor instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc", into = "InstanceDoc")]
pub struct Instance {
    horizon: usize,
    sale_price: f64,
    holding_cost: f64,
    backorder_cost: f64,
    wholesale: Vec<f64>,
    budget: f64,
    budget_tolerance: f64,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    #[serde(rename = "T")]
    horizon: usize,
    p: f64,
    h: f64,
    b: f64,
    w: Vec<f64>,
    #[serde(rename = "W")]
    budget: f64,
    #[serde(rename = "eps_W", default = "default_tolerance")]
    budget_tolerance: f64,
}

fn default_tolerance() -> f64 {
    DEFAULT_BUDGET_TOLERANCE
}

impl TryFrom<InstanceDoc> for Instance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        let mut inst = Instance::new(doc.horizon, doc.p, doc.h, doc.b, doc.w, doc.budget)?;
        inst.set_budget_tolerance(doc.budget_tolerance)?;
        Ok(inst)
    }
}

impl From<Instance> for InstanceDoc {
    fn from(i: Instance) -> Self {
        InstanceDoc {
            horizon: i.horizon,
            p: i.sale_price,
            h: i.holding_cost,
            b: i.backorder_cost,
            w: i.wholesale,
            budget: i.budget,
            budget_tolerance: i.budget_tolerance,
        }
    }
}

impl Instance {
    /// Builds and validates an instance. Wholesale prices must be positive
    /// and non-increasing over the horizon.
    pub fn new(
        horizon: usize,
        sale_price: f64,
        holding_cost: f64,
        backorder_cost: f64,
        wholesale: Vec<f64>,
        budget: f64,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        if wholesale.len() != horizon {
            return Err(Error::Dimension { expected: horizon, got: wholesale.len() });
        }
        for (name, v) in [
            ("p", sale_price),
            ("h", holding_cost),
            ("b", backorder_cost),
            ("W", budget),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if let Some(w) = wholesale.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter(format!("wholesale prices must be positive, got {w}")));
        }
        if let Some(t) = (1..horizon).find(|&t| wholesale[t - 1] < wholesale[t]) {
            return Err(Error::InvalidParameter(format!(
                "wholesale prices must be non-increasing (w_{} < w_{})",
                t,
                t + 1
            )));
        }
        Ok(Instance {
            horizon,
            sale_price,
            holding_cost,
            backorder_cost,
            wholesale,
            budget,
            budget_tolerance: DEFAULT_BUDGET_TOLERANCE,
        })
    }

    pub fn with_budget_tolerance(mut self, eps: f64) -> Result<Self> {
        self.set_budget_tolerance(eps)?;
        Ok(self)
    }

    fn set_budget_tolerance(&mut self, eps: f64) -> Result<()> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("budget tolerance must be >= 0, got {eps}")));
        }
        self.budget_tolerance = eps;
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn sale_price(&self) -> f64 {
        self.sale_price
    }

    pub fn holding_cost(&self) -> f64 {
        self.holding_cost
    }

    pub fn backorder_cost(&self) -> f64 {
        self.backorder_cost
    }

    pub fn wholesale(&self) -> &[f64] {
        &self.wholesale
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn budget_tolerance(&self) -> f64 {
        self.budget_tolerance
    }

    /// `a_t = h + b + p·1{t = T}` for a zero-based period index.
    pub fn period_weight(&self, t: usize) -> f64 {
        let terminal = if t + 1 == self.horizon { self.sale_price } else { 0.0 };
        self.holding_cost + self.backorder_cost + terminal
    }

    /// Backorder weight `b + p·1{t = T}`.
    pub(crate) fn shortage_weight(&self, t: usize) -> f64 {
        self.period_weight(t) - self.holding_cost
    }

    /// `Σ w_t q_t`.
    pub fn spend(&self, q: &[f64]) -> f64 {
        self.wholesale.iter().zip(q).map(|(w, q)| w * q).sum()
    }

    pub fn within_budget(&self, q: &[f64]) -> bool {
        self.spend(q) <= self.budget + self.budget_tolerance
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len == self.horizon {
            Ok(())
        } else {
            Err(Error::Dimension { expected: self.horizon, got: len })
        }
    }
}

/// Order quantities for every period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct OrderPlan {
    quantities: Vec<f64>,
}

impl TryFrom<Vec<f64>> for OrderPlan {
    type Error = Error;

    fn try_from(q: Vec<f64>) -> Result<Self> {
        OrderPlan::new(q)
    }
}

impl From<OrderPlan> for Vec<f64> {
    fn from(p: OrderPlan) -> Self {
        p.quantities
    }
}

impl OrderPlan {
    pub fn new(quantities: Vec<f64>) -> Result<Self> {
        if let Some(q) = quantities.iter().find(|q| !(**q >= 0.0 && q.is_finite())) {
            return Err(Error::InvalidParameter(format!("order quantities must be finite and >= 0, got {q}")));
        }
        Ok(OrderPlan { quantities })
    }

    pub fn zeros(horizon: usize) -> Self {
        OrderPlan { quantities: vec![0.0; horizon] }
    }

    pub fn from_integers(q: &[i64]) -> Result<Self> {
        OrderPlan::new(q.iter().map(|&x| x as f64).collect())
    }

    pub fn quantities(&self) -> &[f64] {
        &self.quantities
    }

    pub fn len(&self) -> usize {
        self.quantities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quantities.is_empty()
    }

    /// Cumulative orders `Q_t = Σ_{k<=t} q_k`.
    pub fn cumulative(&self) -> Vec<f64> {
        cumulative(&self.quantities)
    }

    pub fn spend(&self, instance: &Instance) -> f64 {
        instance.spend(&self.quantities)
    }

    pub fn is_integral(&self) -> bool {
        self.quantities.iter().all(|q| q.fract() == 0.0)
    }

    /// Integer view of an integral plan.
    pub fn to_integers(&self) -> Result<Vec<i64>> {
        if !self.is_integral() {
            return Err(Error::Domain("Poisson plans must be integer".into()));
        }
        Ok(self.quantities.iter().map(|&q| q as i64).collect())
    }
}

pub(crate) fn cumulative(q: &[f64]) -> Vec<f64> {
    q.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Demand family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    Poisson,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Poisson => "poisson",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(Family::Normal),
            "poisson" => Ok(Family::Poisson),
            other => Err(Error::InvalidParameter(format!("unknown family '{other}'"))),
        }
    }
}

/// Independent per-period demand model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDoc", into = "ModelDoc")]
pub enum DemandModel {
    Normal { mu: Vec<f64>, sigma: Vec<f64> },
    Poisson { lambda: Vec<f64> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ModelDoc {
    Normal { mu: Vec<f64>, sigma: Vec<f64> },
    Poisson { lambda: Vec<f64> },
}

impl TryFrom<ModelDoc> for DemandModel {
    type Error = Error;

    fn try_from(doc: ModelDoc) -> Result<Self> {
        match doc {
            ModelDoc::Normal { mu, sigma } => DemandModel::normal(mu, sigma),
            ModelDoc::Poisson { lambda } => DemandModel::poisson(lambda),
        }
    }
}

impl From<DemandModel> for ModelDoc {
    fn from(m: DemandModel) -> Self {
        match m {
            DemandModel::Normal { mu, sigma } => ModelDoc::Normal { mu, sigma },
            DemandModel::Poisson { lambda } => ModelDoc::Poisson { lambda },
        }
    }
}

impl DemandModel {
    pub fn normal(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::InvalidParameter("demand model needs at least one period".into()));
        }
        if sigma.len() != mu.len() {
            return Err(Error::Dimension { expected: mu.len(), got: sigma.len() });
        }
        if let Some(m) = mu.iter().find(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter(format!("normal mean must be finite, got {m}")));
        }
        if let Some(s) = sigma.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter(format!("normal sigma must be positive, got {s}")));
        }
        Ok(DemandModel::Normal { mu, sigma })
    }

    pub fn poisson(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidParameter("demand model needs at least one period".into()));
        }
        if let Some(l) = lambda.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParameter(format!("Poisson rate must be positive, got {l}")));
        }
        Ok(DemandModel::Poisson { lambda })
    }

    pub fn family(&self) -> Family {
        match self {
            DemandModel::Normal { .. } => Family::Normal,
            DemandModel::Poisson { .. } => Family::Poisson,
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            DemandModel::Normal { mu, .. } => mu.len(),
            DemandModel::Poisson { lambda } => lambda.len(),
        }
    }

    /// Per-period mean demand.
    pub fn means(&self) -> &[f64] {
        match self {
            DemandModel::Normal { mu, .. } => mu,
            DemandModel::Poisson { lambda } => lambda,
        }
    }

    /// Cumulative Poisson rates `Λ_t`; `None` for normal models.
    pub fn cumulative_rates(&self) -> Option<Vec<f64>> {
        match self {
            DemandModel::Poisson { lambda } => Some(cumulative(lambda)),
            DemandModel::Normal { .. } => None,
        }
    }

    /// Flat parameter vector: `(μ, σ)` concatenated for normal, `λ` for Poisson.
    pub fn to_params(&self) -> Vec<f64> {
        match self {
            DemandModel::Normal { mu, sigma } => mu.iter().chain(sigma).copied().collect(),
            DemandModel::Poisson { lambda } => lambda.clone(),
        }
    }

    pub fn from_params(family: Family, params: &[f64]) -> Result<Self> {
        match family {
            Family::Normal => {
                if params.len() % 2 != 0 {
                    return Err(Error::InvalidParameter("normal parameter vector must have even length".into()));
                }
                let t = params.len() / 2;
                DemandModel::normal(params[..t].to_vec(), params[t..].to_vec())
            }
            Family::Poisson => DemandModel::poisson(params.to_vec()),
        }
    }

    pub(crate) fn check_horizon(&self, instance: &Instance) -> Result<()> {
        instance.check_len(self.horizon())
    }
}

/// An N×T matrix of demand draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    draws: Vec<Vec<f64>>,
    seed: Option<u64>,
    source_model: Option<DemandModel>,
}

impl SampleSet {
    /// Wraps observed draws (one row per observation).
    pub fn from_rows(draws: Vec<Vec<f64>>) -> Result<Self> {
        let first = draws
            .first()
            .ok_or_else(|| Error::InvalidParameter("sample set needs at least one row".into()))?;
        let t = first.len();
        if t == 0 {
            return Err(Error::InvalidParameter("sample rows must be non-empty".into()));
        }
        if let Some(row) = draws.iter().find(|r| r.len() != t) {
            return Err(Error::Dimension { expected: t, got: row.len() });
        }
        if draws.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("sample values must be finite".into()));
        }
        Ok(SampleSet { draws, seed: None, source_model: None })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.draws[0].len()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn source_model(&self) -> Option<&DemandModel> {
        self.source_model.as_ref()
    }

    /// Column of draws for one period.
    pub fn period(&self, t: usize) -> impl Iterator<Item = f64> + '_ {
        self.draws.iter().map(move |r| r[t])
    }
}

fn block_rng(seed: u64, block: usize, period: usize) -> ChaCha8Rng {
    // splitmix64 of (seed, block) so neighbouring seeds do not share keys
    let mut z = seed ^ (block as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    let mut rng = ChaCha8Rng::seed_from_u64(z);
    rng.set_stream(period as u64);
    rng
}

/// Draws `len` demand paths starting at path `block * SAMPLE_BLOCK`.
fn draw_block(model: &DemandModel, seed: u64, block: usize, len: usize) -> Vec<Vec<f64>> {
    let horizon = model.horizon();
    let mut paths = vec![vec![0.0; horizon]; len];
    for t in 0..horizon {
        let mut rng = block_rng(seed, block, t);
        match model {
            DemandModel::Normal { mu, sigma } => {
                let dist = Normal::new(mu[t], sigma[t]).expect("validated normal parameters");
                for path in paths.iter_mut() {
                    path[t] = dist.sample(&mut rng);
                }
            }
            DemandModel::Poisson { lambda } => {
                let dist = Poisson::new(lambda[t]).expect("validated Poisson rate");
                for path in paths.iter_mut() {
                    path[t] = dist.sample(&mut rng);
                }
            }
        }
    }
    paths
}

fn block_lengths(n: usize) -> Vec<usize> {
    (0..n.div_ceil(SAMPLE_BLOCK))
        .map(|b| (n - b * SAMPLE_BLOCK).min(SAMPLE_BLOCK))
        .collect()
}

/// Draws `n` i.i.d. demand paths. Period `t` uses RNG stream `t`, so the
/// draws of early periods do not change when the horizon grows.
pub fn sample_demand(model: &DemandModel, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let draws: Vec<Vec<f64>> = block_lengths(n)
        .into_par_iter()
        .enumerate()
        .map(|(b, len)| draw_block(model, seed, b, len))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(SampleSet { draws, seed: Some(seed), source_model: Some(model.clone()) })
}

/// Realized cost of one demand path:
/// `p·I_T⁻ + Σ_t (h·I_t⁺ + b·I_t⁻ + w_t q_t − p·x_t)`.
///
/// Negative demands are accepted; the normal oracle keeps them.
pub fn simulate_inventory(instance: &Instance, plan: &OrderPlan, demand: &[f64]) -> Result<f64> {
    instance.check_len(plan.len())?;
    instance.check_len(demand.len())?;
    if demand.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("demand values must be finite".into()));
    }
    Ok(path_cost(instance, plan.quantities(), demand))
}

fn path_cost(instance: &Instance, q: &[f64], demand: &[f64]) -> f64 {
    let (h, b, p) = (instance.holding_cost, instance.backorder_cost, instance.sale_price);
    let mut level = 0.0;
    let mut cost = 0.0;
    for t in 0..instance.horizon {
        level += q[t] - demand[t];
        let over = level.max(0.0);
        let under = (-level).max(0.0);
        cost += h * over + b * under + instance.wholesale[t] * q[t] - p * demand[t];
    }
    cost + p * (-level).max(0.0)
}

/// Monte-Carlo estimate of an expected cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Sample mean and standard error of the realized cost over `n_samples`
/// i.i.d. demand paths. Normal draws are not truncated at zero.
pub fn mc_cost(
    instance: &Instance,
    plan: &OrderPlan,
    model: &DemandModel,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter("Monte-Carlo estimate needs at least 2 samples".into()));
    }
    instance.check_len(plan.len())?;
    model.check_horizon(instance)?;
    let q = plan.quantities();
    // per-block (count, mean, M2), combined in block order
    let parts: Vec<(f64, f64, f64)> = block_lengths(n_samples)
        .into_par_iter()
        .enumerate()
        .map(|(b, len)| {
            let paths = draw_block(model, seed, b, len);
            let mut mean = 0.0;
            let mut m2 = 0.0;
            for (i, path) in paths.iter().enumerate() {
                let c = path_cost(instance, q, path);
                let delta = c - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (c - mean);
            }
            (len as f64, mean, m2)
        })
        .collect();
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for (nb, mb, m2b) in parts {
        let total = n + nb;
        let delta = mb - mean;
        mean += delta * nb / total;
        m2 += m2b + delta * delta * n * nb / total;
        n = total;
    }
    let variance = m2 / (n - 1.0);
    Ok(McEstimate { mean, std_error: (variance / n).sqrt(), n_samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_instance(t: usize) -> Instance {
        Instance::new(t, 1.0, 1.0, 1.0, vec![1.0; t], 100.0).unwrap()
    }

    #[test]
    fn simulate_no_activity() {
        let inst = unit_instance(1);
        let plan = OrderPlan::new(vec![0.0]).unwrap();
        assert_eq!(simulate_inventory(&inst, &plan, &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn simulate_pure_backorder() {
        let inst = unit_instance(1);
        let plan = OrderPlan::new(vec![0.0]).unwrap();
        assert_eq!(simulate_inventory(&inst, &plan, &[2.0]).unwrap(), 2.0);
    }

    #[test]
    fn simulate_two_periods() {
        // I_1 = 2, I_2 = 1: (2 + 3 - 2) + (1 + 0 - 2) = 2
        let inst = Instance::new(2, 2.0, 1.0, 1.0, vec![1.0, 1.0], 100.0).unwrap();
        let plan = OrderPlan::new(vec![3.0, 0.0]).unwrap();
        assert_eq!(simulate_inventory(&inst, &plan, &[1.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn simulate_rejects_wrong_length() {
        let inst = unit_instance(2);
        let plan = OrderPlan::new(vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            simulate_inventory(&inst, &plan, &[1.0]),
            Err(Error::Dimension { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn instance_validation() {
        assert!(Instance::new(0, 1.0, 1.0, 1.0, vec![], 1.0).is_err());
        assert!(Instance::new(2, 1.0, 1.0, 1.0, vec![1.0, 2.0], 1.0).is_err());
        assert!(Instance::new(1, -1.0, 1.0, 1.0, vec![1.0], 1.0).is_err());
        assert!(Instance::new(1, 1.0, 1.0, 1.0, vec![0.0], 1.0).is_err());
        let inst = Instance::new(3, 1.0, 2.0, 3.0, vec![3.0, 2.0, 2.0], 5.0).unwrap();
        assert_eq!(inst.period_weight(0), 5.0);
        assert_eq!(inst.period_weight(2), 6.0);
    }

    #[test]
    fn instance_json_field_names() {
        let json = r#"{"T":2,"p":2,"h":1,"b":1,"w":[2,1],"W":6}"#;
        let inst: Instance = serde_json::from_str(json).unwrap();
        assert_eq!(inst.budget_tolerance(), DEFAULT_BUDGET_TOLERANCE);
        let back = serde_json::to_value(&inst).unwrap();
        for key in ["T", "p", "h", "b", "w", "W", "eps_W"] {
            assert!(back.get(key).is_some(), "missing {key}");
        }
        assert!(serde_json::from_str::<Instance>(r#"{"T":2,"p":2,"h":1,"b":1,"w":[1,2],"W":6}"#).is_err());
    }

    #[test]
    fn model_json_kinds() {
        let m: DemandModel = serde_json::from_str(r#"{"kind":"normal","mu":[10],"sigma":[2]}"#).unwrap();
        assert_eq!(m.family(), Family::Normal);
        let p: DemandModel = serde_json::from_str(r#"{"kind":"poisson","lambda":[1,2]}"#).unwrap();
        assert_eq!(p.cumulative_rates().unwrap(), vec![1.0, 3.0]);
        assert!(serde_json::from_str::<DemandModel>(r#"{"kind":"poisson","lambda":[0]}"#).is_err());
        assert!(serde_json::from_str::<DemandModel>(r#"{"kind":"normal","mu":[1],"sigma":[-1]}"#).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = DemandModel::poisson(vec![5.0, 5.0]).unwrap();
        let a = sample_demand(&m, 3, 42).unwrap();
        let b = sample_demand(&m, 3, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_substreams_are_stable_in_horizon() {
        let short = DemandModel::poisson(vec![5.0]).unwrap();
        let long = DemandModel::poisson(vec![5.0, 9.0, 2.0]).unwrap();
        let a = sample_demand(&short, 5000, 7).unwrap();
        let b = sample_demand(&long, 5000, 7).unwrap();
        assert!(a.period(0).eq(b.period(0)));
    }

    #[test]
    fn poisson_draws_are_non_negative_integers() {
        let m = DemandModel::poisson(vec![4.0]).unwrap();
        let s = sample_demand(&m, 1000, 1).unwrap();
        assert!(s.period(0).all(|x| x >= 0.0 && x.fract() == 0.0));
    }

    #[test]
    fn normal_sample_mean_is_tight() {
        let m = DemandModel::normal(vec![10.0], vec![0.001]).unwrap();
        let s = sample_demand(&m, 1000, 3).unwrap();
        let mean = s.period(0).sum::<f64>() / 1000.0;
        assert!((9.99..=10.01).contains(&mean));
    }

    #[test]
    fn mc_contract_with_two_samples() {
        let inst = unit_instance(1);
        let plan = OrderPlan::new(vec![1.0]).unwrap();
        let m = DemandModel::normal(vec![10.0], vec![2.0]).unwrap();
        let est = mc_cost(&inst, &plan, &m, 2, 9).unwrap();
        assert!(est.mean.is_finite());
        assert!(est.std_error > 0.0);
        assert!(mc_cost(&inst, &plan, &m, 1, 9).is_err());
    }

    #[test]
    fn spend_matches_sum() {
        let inst = Instance::new(3, 1.0, 1.0, 1.0, vec![0.3, 0.2, 0.1], 10.0).unwrap();
        let plan = OrderPlan::new(vec![1.0, 2.0, 3.0]).unwrap();
        let expected = 0.3 * 1.0 + 0.2 * 2.0 + 0.1 * 3.0;
        assert!((plan.spend(&inst) - expected).abs() <= 3.0 * f64::EPSILON);
    }
}
