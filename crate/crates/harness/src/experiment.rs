//! Per-instance pipeline and the result CSVs.
//!
//! Column sets are frozen; see `docs/csv-schema.md`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use newsvendor_core::ambiguity::{build_confidence_set, extreme_set, mle, region_contains, AmbiguitySet};
use newsvendor_core::cost::expected_cost;
use newsvendor_core::dro::{
    cs_solve, full_minimax, gap_metrics, subset_minimax, worst_case, CsConfig, MinimaxConfig,
};
use newsvendor_core::fd::{fd_solve, LineSearchConfig};
use newsvendor_core::model::sample_demand;
use newsvendor_core::{DemandModel, Error, Family, Instance, OrderPlan};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{generate_instances, ExperimentConfig, InstanceSpec};

pub const FD_FILE: &str = "fd_vs_ref.csv";
pub const MLE_FILE: &str = "mle_eval.csv";
pub const DRO_FILE: &str = "dro_eval.csv";
pub const INSTANCE_DIR: &str = "instances";

/// Relative slack when comparing a worst-case cost with a member cost.
const DOMINANCE_SLACK: f64 = 1e-9;

/// FD on the true model against the exact single-model optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdRow {
    pub id: String,
    pub family: Family,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub fd_cost: Option<f64>,
    pub ref_cost: Option<f64>,
    pub fd_gap_pct: Option<f64>,
    pub fd_spend: Option<f64>,
    pub budget: f64,
    pub within_budget: Option<bool>,
    pub fd_wall_ms: Option<f64>,
    pub ref_wall_ms: Option<f64>,
    pub error: String,
}

/// Plan fitted to the MLE, judged under the true model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleRow {
    pub id: String,
    pub family: Family,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub sample_seed: u64,
    pub mle_params: String,
    pub predicted_cost: Option<f64>,
    pub true_cost: Option<f64>,
    pub underestimates: Option<bool>,
    pub ape_pct: Option<f64>,
    pub true_optimal_cost: Option<f64>,
    pub optimality_gap_pct: Option<f64>,
    pub predicted_profit_actual_loss: Option<bool>,
    pub dro_worst_cost: Option<f64>,
    pub error: String,
}

/// Cutting surface against the full-set reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroRow {
    pub id: String,
    pub family: Family,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub base_size: Option<usize>,
    pub set_size: Option<usize>,
    pub extreme_size: Option<usize>,
    pub mle_injected: Option<bool>,
    pub cs_objective: Option<f64>,
    pub full_objective: Option<f64>,
    pub q_gap_pct: Option<f64>,
    pub omega_gap_pct: Option<f64>,
    pub selected_true_worst: Option<bool>,
    pub cs_iterations: Option<usize>,
    pub k_max_exhausted: Option<bool>,
    pub timed_out: Option<bool>,
    /// `θ⁰` lies in the continuous chi-square region.
    pub theta0_in_region: Option<bool>,
    pub dro_true_cost: Option<f64>,
    /// Worst-case cost bounds the true cost; checked only when `θ⁰` is a member.
    pub dominance_ok: Option<bool>,
    pub cs_wall_ms: Option<f64>,
    pub full_wall_ms: Option<f64>,
    pub error: String,
}

/// All rows produced for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceResult {
    pub fd: FdRow,
    pub mle: MleRow,
    pub dro: DroRow,
}

/// Short stable code for a failed stage.
pub fn error_code(err: &Error) -> &'static str {
    match err {
        Error::Dimension { .. } => "dimension",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::Domain(_) => "domain",
        Error::MultiplierOutOfRange { .. } => "multiplier_out_of_range",
        Error::Infeasible(_) => "infeasible",
        Error::DegenerateSample { .. } => "degenerate_sample",
        Error::EmptyAmbiguitySet => "empty_ambiguity_set",
        Error::FamilyMismatch { .. } => "family_mismatch",
        Error::Resource(_) => "resource",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

fn describe(err: &Error) -> String {
    format!("{}: {err}", error_code(err))
}

fn pct(num: f64, den: f64) -> Option<f64> {
    (den != 0.0 && num.is_finite() && den.is_finite()).then(|| 100.0 * num / den.abs())
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn join(params: &[f64]) -> String {
    params.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(";")
}

fn minimax_config(timeout_s: f64) -> MinimaxConfig {
    MinimaxConfig { timeout: Some(Duration::from_secs_f64(timeout_s)), ..MinimaxConfig::default() }
}

/// Exact minimizer of the expected cost under a single known model.
pub fn true_optimum(instance: &Instance, model: &DemandModel, cfg: &MinimaxConfig) -> Result<(OrderPlan, f64), Error> {
    let plan = subset_minimax(instance, &[model.to_params()], model.family(), cfg)?;
    let cost = expected_cost(instance, model, &plan)?;
    Ok((plan, cost))
}

fn fd_row(spec: &InstanceSpec, cfg: &MinimaxConfig) -> FdRow {
    let inst = &spec.instance;
    let mut row = FdRow {
        id: spec.id.clone(),
        family: spec.family,
        t: inst.horizon(),
        m: spec.m,
        n: spec.n,
        fd_cost: None,
        ref_cost: None,
        fd_gap_pct: None,
        fd_spend: None,
        budget: inst.budget(),
        within_budget: None,
        fd_wall_ms: None,
        ref_wall_ms: None,
        error: String::new(),
    };
    let started = Instant::now();
    let fd = match fd_solve(inst, &spec.true_model, &LineSearchConfig::default()) {
        Ok(r) => r,
        Err(e) => {
            row.error = describe(&e);
            return row;
        }
    };
    row.fd_wall_ms = Some(ms(started));
    row.fd_cost = Some(fd.cost);
    row.fd_spend = Some(fd.spend);
    row.within_budget = Some(fd.spend <= inst.budget() + inst.budget_tolerance());
    let started = Instant::now();
    match true_optimum(inst, &spec.true_model, cfg) {
        Ok((_, opt)) => {
            row.ref_wall_ms = Some(ms(started));
            row.ref_cost = Some(opt);
            row.fd_gap_pct = pct(fd.cost - opt, opt);
        }
        Err(e) => row.error = describe(&e),
    }
    row
}

struct Fitted {
    est_model: DemandModel,
    set: AmbiguitySet,
    in_region: bool,
}

fn fit(spec: &InstanceSpec) -> Result<Fitted, Error> {
    let samples = sample_demand(&spec.true_model, spec.n, spec.sample_seed)?;
    let est = mle(&samples, spec.family)?;
    let set = build_confidence_set(&est, spec.alpha, spec.m)?;
    let in_region = region_contains(&est, &spec.true_model, spec.alpha)?;
    Ok(Fitted { est_model: est.model, set, in_region })
}

fn empty_mle_row(spec: &InstanceSpec) -> MleRow {
    MleRow {
        id: spec.id.clone(),
        family: spec.family,
        t: spec.instance.horizon(),
        m: spec.m,
        n: spec.n,
        sample_seed: spec.sample_seed,
        mle_params: String::new(),
        predicted_cost: None,
        true_cost: None,
        underestimates: None,
        ape_pct: None,
        true_optimal_cost: None,
        optimality_gap_pct: None,
        predicted_profit_actual_loss: None,
        dro_worst_cost: None,
        error: String::new(),
    }
}

fn empty_dro_row(spec: &InstanceSpec) -> DroRow {
    DroRow {
        id: spec.id.clone(),
        family: spec.family,
        t: spec.instance.horizon(),
        m: spec.m,
        n: spec.n,
        base_size: None,
        set_size: None,
        extreme_size: None,
        mle_injected: None,
        cs_objective: None,
        full_objective: None,
        q_gap_pct: None,
        omega_gap_pct: None,
        selected_true_worst: None,
        cs_iterations: None,
        k_max_exhausted: None,
        timed_out: None,
        theta0_in_region: None,
        dro_true_cost: None,
        dominance_ok: None,
        cs_wall_ms: None,
        full_wall_ms: None,
        error: String::new(),
    }
}

fn mle_and_dro(spec: &InstanceSpec, timeout_s: f64) -> (MleRow, DroRow) {
    let inst = &spec.instance;
    let mut mrow = empty_mle_row(spec);
    let mut drow = empty_dro_row(spec);
    let minimax = minimax_config(timeout_s);
    let fail = |m: &mut MleRow, d: &mut DroRow, e: &Error| {
        m.error = describe(e);
        d.error = describe(e);
    };

    let fitted = match fit(spec) {
        Ok(f) => f,
        Err(e) => {
            fail(&mut mrow, &mut drow, &e);
            return (mrow, drow);
        }
    };
    mrow.mle_params = join(&fitted.est_model.to_params());
    drow.base_size = Some(fitted.set.base_size());
    drow.set_size = Some(fitted.set.len());
    drow.mle_injected = Some(fitted.set.mle_injected());
    drow.theta0_in_region = Some(fitted.in_region);

    let mut mle_stage = || -> Result<(), Error> {
        let fd = fd_solve(inst, &fitted.est_model, &LineSearchConfig::default())?;
        let true_cost = expected_cost(inst, &spec.true_model, &fd.plan)?;
        let (_, opt) = true_optimum(inst, &spec.true_model, &minimax)?;
        mrow.predicted_cost = Some(fd.cost);
        mrow.true_cost = Some(true_cost);
        mrow.underestimates = Some(fd.cost < true_cost);
        mrow.predicted_profit_actual_loss = Some(fd.cost < 0.0 && true_cost > 0.0);
        mrow.true_optimal_cost = Some(opt);
        mrow.ape_pct = pct((true_cost - fd.cost).abs(), true_cost);
        mrow.optimality_gap_pct = pct((opt - true_cost).abs(), opt);
        Ok(())
    };
    if let Err(e) = mle_stage() {
        mrow.error = describe(&e);
    }

    let mut dro_stage = || -> Result<(), Error> {
        drow.extreme_size = Some(extreme_set(&fitted.set)?.len());
        let started = Instant::now();
        let cs_cfg = CsConfig {
            initial_member: Some(fitted.est_model.to_params()),
            minimax: minimax.clone(),
            ..CsConfig::default()
        };
        let cs = cs_solve(inst, &fitted.set, &cs_cfg)?;
        drow.cs_wall_ms = Some(ms(started));
        let started = Instant::now();
        let full = full_minimax(inst, &fitted.set, &minimax)?;
        drow.full_wall_ms = Some(ms(started));
        let gaps = gap_metrics(inst, &fitted.set, &cs, &full, None)?;
        let true_cost = expected_cost(inst, &spec.true_model, &cs.plan)?;
        drow.cs_objective = Some(cs.objective);
        drow.full_objective = Some(full.objective);
        drow.q_gap_pct = gaps.q_gap_pct;
        drow.omega_gap_pct = gaps.omega_gap_pct;
        drow.selected_true_worst = Some(!cs.flags.worst_case_from_extreme_only);
        drow.cs_iterations = Some(cs.iterations.len());
        drow.k_max_exhausted = Some(cs.flags.k_max_exhausted);
        drow.timed_out = Some(cs.flags.timed_out || full.flags.timed_out);
        drow.dro_true_cost = Some(true_cost);
        if fitted.set.contains(&spec.true_model.to_params()) {
            let worst = worst_case(inst, &fitted.set, &cs.plan)?;
            drow.dominance_ok = Some(worst.cost >= true_cost - DOMINANCE_SLACK * true_cost.abs().max(1.0));
        }
        Ok(())
    };
    match dro_stage() {
        Ok(()) => mrow.dro_worst_cost = drow.cs_objective,
        Err(e) => drow.error = describe(&e),
    }
    (mrow, drow)
}

/// Runs every stage for one instance; failures become error rows.
pub fn run_instance(spec: &InstanceSpec, timeout_s: f64) -> InstanceResult {
    let fd = fd_row(spec, &minimax_config(timeout_s));
    let (mle, dro) = mle_and_dro(spec, timeout_s);
    InstanceResult { fd, mle, dro }
}

/// Writes rows through one serialized sink, in order, via a temp file and rename.
fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    {
        let mut w = csv::Writer::from_path(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Paths written by [`run_matrix`].
#[derive(Debug, Clone)]
pub struct MatrixOutput {
    pub fd_csv: PathBuf,
    pub mle_csv: PathBuf,
    pub dro_csv: PathBuf,
    pub instances: usize,
    pub failures: usize,
}

/// Runs the full matrix with `workers` threads (0 = rayon default).
/// Rows are buffered and written in instance order, so the CSVs do not
/// depend on scheduling.
pub fn run_matrix(cfg: &ExperimentConfig, workers: usize) -> Result<MatrixOutput> {
    let specs = generate_instances(cfg)?;
    let out = &cfg.output_dir;
    let inst_dir = out.join(INSTANCE_DIR);
    fs::create_dir_all(&inst_dir).with_context(|| format!("creating {}", inst_dir.display()))?;
    fs::write(out.join("config.json"), serde_json::to_string_pretty(cfg)?)?;
    for spec in &specs {
        let path = inst_dir.join(format!("{}.json", spec.id));
        fs::write(&path, serde_json::to_string_pretty(spec)?).with_context(|| format!("writing {}", path.display()))?;
    }

    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let results: Vec<InstanceResult> =
        pool.install(|| specs.par_iter().map(|s| run_instance(s, cfg.timeout_s)).collect());

    let failures = results
        .iter()
        .filter(|r| !(r.fd.error.is_empty() && r.mle.error.is_empty() && r.dro.error.is_empty()))
        .count();
    let fd: Vec<_> = results.iter().map(|r| r.fd.clone()).collect();
    let mle: Vec<_> = results.iter().map(|r| r.mle.clone()).collect();
    let dro: Vec<_> = results.iter().map(|r| r.dro.clone()).collect();
    let output = MatrixOutput {
        fd_csv: out.join(FD_FILE),
        mle_csv: out.join(MLE_FILE),
        dro_csv: out.join(DRO_FILE),
        instances: specs.len(),
        failures,
    };
    write_csv(&output.fd_csv, &fd)?;
    write_csv(&output.mle_csv, &mle)?;
    write_csv(&output.dro_csv, &dro)?;
    Ok(output)
}

/// Reads one of the result CSVs.
pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize().enumerate() {
        // header is line 1
        rows.push(rec.with_context(|| format!("{}:{}: malformed row", path.display(), i + 2))?);
    }
    Ok(rows)
}
