//! Experiment configuration and deterministic instance generation.

use std::path::PathBuf;

use anyhow::{ensure, Result};
use newsvendor_core::{DemandModel, Family, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Cost triple `(p, h, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostCombo {
    pub p: f64,
    pub h: f64,
    pub b: f64,
}

/// Design grid of an experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub families: Vec<Family>,
    #[serde(rename = "T_list")]
    pub t_list: Vec<usize>,
    #[serde(rename = "M_list")]
    pub m_list: Vec<usize>,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub alpha: f64,
    pub costs: Vec<CostCombo>,
    /// `w_t = wholesale_step · (T − t + 1)`.
    pub wholesale_step: f64,
    /// `W = budget_short` for `T < long_horizon`, else `budget_long`.
    pub budget_short: f64,
    pub budget_long: f64,
    pub long_horizon: usize,
    /// Random true parameters per family and horizon.
    pub n_true_params: usize,
    /// Integer ranges for `μ⁰`/`λ⁰` and `σ⁰`.
    pub mean_range: (u32, u32),
    pub sd_range: (u32, u32),
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Wall-clock limit per solver call.
    pub timeout_s: f64,
}

impl ExperimentConfig {
    /// Desk-scale matrix: `T ∈ {2,3}`, `M ∈ {3,5}`, `N ∈ {10,25,50}`, three
    /// true parameters per family and 144 instances per family. Costs are the
    /// half fraction of `{100,200}³` with `p·h·b` at its high-high-high or
    /// one-high corners, which keeps every factor balanced.
    pub fn desk() -> Self {
        ExperimentConfig {
            families: vec![Family::Normal, Family::Poisson],
            t_list: vec![2, 3],
            m_list: vec![3, 5],
            n_list: vec![10, 25, 50],
            alpha: 0.05,
            costs: vec![
                CostCombo { p: 100.0, h: 100.0, b: 200.0 },
                CostCombo { p: 100.0, h: 200.0, b: 100.0 },
                CostCombo { p: 200.0, h: 100.0, b: 100.0 },
                CostCombo { p: 200.0, h: 200.0, b: 200.0 },
            ],
            wholesale_step: 100.0,
            budget_short: 4000.0,
            budget_long: 8000.0,
            long_horizon: 4,
            n_true_params: 3,
            mean_range: (1, 20),
            sd_range: (1, 10),
            seed: 20240601,
            output_dir: PathBuf::from("results"),
            timeout_s: 120.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.families.is_empty(), "families must be non-empty");
        ensure!(!self.t_list.is_empty() && self.t_list.iter().all(|&t| t >= 1), "T_list must hold horizons >= 1");
        ensure!(!self.m_list.is_empty() && self.m_list.iter().all(|&m| m >= 1), "M_list must hold grid sizes >= 1");
        ensure!(!self.n_list.is_empty() && self.n_list.iter().all(|&n| n >= 2), "N_list must hold sample sizes >= 2");
        ensure!(!self.costs.is_empty(), "costs must be non-empty");
        ensure!(self.alpha > 0.0 && self.alpha < 1.0, "alpha must lie in (0, 1)");
        ensure!(self.n_true_params >= 1, "n_true_params must be >= 1");
        ensure!(self.wholesale_step > 0.0, "wholesale_step must be positive");
        ensure!(self.mean_range.0 >= 1 && self.mean_range.0 <= self.mean_range.1, "mean_range must be 1 <= lo <= hi");
        ensure!(self.sd_range.0 >= 1 && self.sd_range.0 <= self.sd_range.1, "sd_range must be 1 <= lo <= hi");
        ensure!(
            self.sd_range.0 * 3 <= self.mean_range.1,
            "no normal parameter satisfies 3σ <= μ within the given ranges"
        );
        ensure!(self.timeout_s > 0.0, "timeout_s must be positive");
        Ok(())
    }

    pub fn budget(&self, horizon: usize) -> f64 {
        if horizon >= self.long_horizon {
            self.budget_long
        } else {
            self.budget_short
        }
    }

    pub fn wholesale(&self, horizon: usize) -> Vec<f64> {
        (1..=horizon).map(|t| self.wholesale_step * (horizon - t + 1) as f64).collect()
    }
}

/// One cell of the experiment matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub id: String,
    pub family: Family,
    pub instance: Instance,
    pub true_model: DemandModel,
    /// Index of the true parameter within its family and horizon.
    pub theta_index: usize,
    pub cost_index: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    pub sample_seed: u64,
}

/// Stable 64-bit mix of a seed and a tag sequence.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut z = seed;
    for &t in tags {
        z ^= t.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(z << 6).wrapping_add(z >> 2);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

fn family_tag(f: Family) -> u64 {
    match f {
        Family::Normal => 1,
        Family::Poisson => 2,
    }
}

/// Draws a true parameter; normal draws are rejected until `3σ_t <= μ_t` for every `t`.
fn draw_truth(cfg: &ExperimentConfig, family: Family, horizon: usize, rng: &mut ChaCha8Rng) -> DemandModel {
    let mean = |rng: &mut ChaCha8Rng| rng.random_range(cfg.mean_range.0..=cfg.mean_range.1) as f64;
    match family {
        Family::Poisson => DemandModel::poisson((0..horizon).map(|_| mean(rng)).collect()).expect("positive rates"),
        Family::Normal => loop {
            let mu: Vec<f64> = (0..horizon).map(|_| mean(rng)).collect();
            let sigma: Vec<f64> =
                (0..horizon).map(|_| rng.random_range(cfg.sd_range.0..=cfg.sd_range.1) as f64).collect();
            if mu.iter().zip(&sigma).all(|(m, s)| 3.0 * s <= *m) {
                break DemandModel::normal(mu, sigma).expect("positive parameters");
            }
        },
    }
}

/// Expands the design grid in a fixed order: family, T, θ⁰, cost, M, N.
/// Samples depend on (family, T, θ⁰, N) only, so cells that differ in `M`
/// or costs see the same data.
pub fn generate_instances(cfg: &ExperimentConfig) -> Result<Vec<InstanceSpec>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &family in &cfg.families {
        for &horizon in &cfg.t_list {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[family_tag(family), horizon as u64]));
            let truths: Vec<DemandModel> =
                (0..cfg.n_true_params).map(|_| draw_truth(cfg, family, horizon, &mut rng)).collect();
            for (ti, truth) in truths.iter().enumerate() {
                for (ci, c) in cfg.costs.iter().enumerate() {
                    let instance =
                        Instance::new(horizon, c.p, c.h, c.b, cfg.wholesale(horizon), cfg.budget(horizon))?;
                    for &m in &cfg.m_list {
                        for &n in &cfg.n_list {
                            let sample_seed = derive_seed(
                                cfg.seed,
                                &[family_tag(family), horizon as u64, ti as u64, n as u64, 0x5A],
                            );
                            out.push(InstanceSpec {
                                id: format!("{}-T{horizon}-th{ti}-c{ci}-M{m}-N{n}", family.name()),
                                family,
                                instance: instance.clone(),
                                true_model: truth.clone(),
                                theta_index: ti,
                                cost_index: ci,
                                m,
                                n,
                                alpha: cfg.alpha,
                                sample_seed,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
