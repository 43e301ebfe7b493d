//! Maximum-likelihood confidence sets over demand parameters.
//!
//! A set is built in three steps: univariate intervals around the MLE, an
//! `M`-point grid on each interval, and a chi-square filter on the Cartesian
//! product. Members are stored as flat parameter vectors (`μ` then `σ` for
//! normal, `λ` for Poisson) in lexicographic order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DemandModel, Family, SampleSet};
use crate::special::chi2_quantile;

/// Floor applied to interval lower bounds for `σ` and `λ`.
pub const POSITIVITY_FLOOR: f64 = 1e-6;

/// Relative slack on the chi-square threshold so grid points that sit on
/// the boundary in exact arithmetic are kept.
const BOUNDARY_SLACK: f64 = 1e-9;

/// Largest Cartesian product the builder will enumerate.
const MAX_BASE_GRID: usize = 50_000_000;

/// Maximum-likelihood estimate from a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleEstimate {
    pub model: DemandModel,
    pub n: usize,
}

impl MleEstimate {
    pub fn family(&self) -> Family {
        self.model.family()
    }

    pub fn horizon(&self) -> usize {
        self.model.horizon()
    }

    pub fn params(&self) -> Vec<f64> {
        self.model.to_params()
    }
}

/// Per-period sample mean, and for normal data the `1/N` standard deviation.
pub fn mle(samples: &SampleSet, family: Family) -> Result<MleEstimate> {
    let n = samples.len();
    let horizon = samples.horizon();
    let means: Vec<f64> = (0..horizon).map(|t| samples.period(t).sum::<f64>() / n as f64).collect();
    let model = match family {
        Family::Normal => {
            if n < 2 {
                return Err(Error::InvalidParameter("normal MLE needs at least 2 samples".into()));
            }
            let mut sigma = Vec::with_capacity(horizon);
            for (t, &m) in means.iter().enumerate() {
                let var = samples.period(t).map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
                if var <= 0.0 {
                    return Err(Error::DegenerateSample { period: t });
                }
                sigma.push(var.sqrt());
            }
            DemandModel::normal(means, sigma)?
        }
        Family::Poisson => {
            if let Some(t) = (0..horizon).find(|&t| samples.period(t).any(|x| x < 0.0 || x.fract() != 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "Poisson samples must be non-negative integers (period {t})"
                )));
            }
            if let Some(t) = means.iter().position(|&m| m <= 0.0) {
                return Err(Error::DegenerateSample { period: t });
            }
            DemandModel::poisson(means)?
        }
    };
    Ok(MleEstimate { model, n })
}

fn check_theta(est: &MleEstimate, theta: &DemandModel) -> Result<()> {
    if theta.family() != est.family() {
        return Err(Error::FamilyMismatch { expected: est.family().name(), got: theta.family().name() });
    }
    if theta.horizon() != est.horizon() {
        return Err(Error::Dimension { expected: est.horizon(), got: theta.horizon() });
    }
    Ok(())
}

/// Chi-square statistic of `theta` around the MLE.
pub fn chi2_statistic(est: &MleEstimate, theta: &DemandModel) -> Result<f64> {
    check_theta(est, theta)?;
    Ok(statistic(est, &theta.to_params()))
}

fn statistic(est: &MleEstimate, params: &[f64]) -> f64 {
    let n = est.n as f64;
    match &est.model {
        DemandModel::Normal { mu, sigma } => {
            let t_len = mu.len();
            (0..t_len)
                .map(|t| {
                    let s2 = sigma[t] * sigma[t];
                    let dm = mu[t] - params[t];
                    let ds = sigma[t] - params[t_len + t];
                    n / s2 * dm * dm + 2.0 * n / s2 * ds * ds
                })
                .sum()
        }
        DemandModel::Poisson { lambda } => lambda
            .iter()
            .zip(params)
            .map(|(&l_hat, &l)| n / l_hat * (l_hat - l) * (l_hat - l))
            .sum(),
    }
}

/// Degrees of freedom of the chi-square region.
pub fn degrees_of_freedom(family: Family, horizon: usize) -> usize {
    match family {
        Family::Normal => 2 * horizon,
        Family::Poisson => horizon,
    }
}

/// `χ²_{df, 1−α}` for the region around an estimate.
pub fn region_threshold(family: Family, horizon: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    chi2_quantile(degrees_of_freedom(family, horizon), 1.0 - alpha)
}

/// Whether `theta` lies in the continuous confidence region.
pub fn region_contains(est: &MleEstimate, theta: &DemandModel, alpha: f64) -> Result<bool> {
    Ok(chi2_statistic(est, theta)? <= region_threshold(est.family(), est.horizon(), alpha)?)
}

/// Stage of the construction a set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    BaseGrid,
    ConfidenceFiltered,
    DominatedPruned,
    Extreme,
}

/// Finite set of candidate parameter vectors of one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguitySet {
    family: Family,
    horizon: usize,
    members: Vec<Vec<f64>>,
    alpha: f64,
    grid_points: usize,
    provenance: Provenance,
    /// Size of the Cartesian grid before filtering.
    base_size: usize,
    /// The MLE was not a grid point and was added explicitly.
    mle_injected: bool,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

impl AmbiguitySet {
    /// Builds a set from explicit members, validating each one.
    pub fn from_members(family: Family, members: Vec<DemandModel>, provenance: Provenance) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyAmbiguitySet)?;
        let horizon = first.horizon();
        let mut params = Vec::with_capacity(members.len());
        for m in &members {
            if m.family() != family {
                return Err(Error::FamilyMismatch { expected: family.name(), got: m.family().name() });
            }
            if m.horizon() != horizon {
                return Err(Error::Dimension { expected: horizon, got: m.horizon() });
            }
            params.push(m.to_params());
        }
        let base_size = params.len();
        Ok(Self::canonical(family, horizon, params, f64::NAN, 0, provenance, base_size, false))
    }

    #[allow(clippy::too_many_arguments)]
    fn canonical(
        family: Family,
        horizon: usize,
        mut members: Vec<Vec<f64>>,
        alpha: f64,
        grid_points: usize,
        provenance: Provenance,
        base_size: usize,
        mle_injected: bool,
    ) -> Self {
        members.sort_by(|a, b| lex_cmp(a, b));
        members.dedup();
        AmbiguitySet { family, horizon, members, alpha, grid_points, provenance, base_size, mle_injected }
    }

    fn derived(&self, members: Vec<Vec<f64>>, provenance: Provenance) -> Self {
        AmbiguitySet { members, provenance, ..self.clone() }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    pub fn mle_injected(&self) -> bool {
        self.mle_injected
    }

    /// Flat parameter vectors in canonical order.
    pub fn params(&self) -> &[Vec<f64>] {
        &self.members
    }

    pub fn model(&self, i: usize) -> DemandModel {
        DemandModel::from_params(self.family, &self.members[i]).expect("members are validated")
    }

    pub fn models(&self) -> Vec<DemandModel> {
        (0..self.len()).map(|i| self.model(i)).collect()
    }

    /// Canonical index of an exact parameter vector.
    pub fn position(&self, params: &[f64]) -> Option<usize> {
        self.members.binary_search_by(|m| lex_cmp(m, params)).ok()
    }

    pub fn contains(&self, params: &[f64]) -> bool {
        self.position(params).is_some()
    }

    /// Writes one JSON object per member.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, m) in self.members.iter().enumerate() {
            let line = JsonlMember {
                index: i,
                provenance: self.provenance,
                alpha: if self.alpha.is_finite() { Some(self.alpha) } else { None },
                grid_points: self.grid_points,
                model: self.model(i),
            };
            debug_assert_eq!(&line.model.to_params(), m);
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads a set written by [`AmbiguitySet::write_jsonl`].
    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut members = Vec::new();
        let mut meta: Option<(Provenance, Option<f64>, usize)> = None;
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: JsonlMember = serde_json::from_str(&line)
                .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", lineno + 1)))?;
            meta.get_or_insert((rec.provenance, rec.alpha, rec.grid_points));
            members.push(rec.model);
        }
        let (provenance, alpha, grid_points) = meta.ok_or(Error::EmptyAmbiguitySet)?;
        let family = members[0].family();
        let mut set = AmbiguitySet::from_members(family, members, provenance)?;
        set.alpha = alpha.unwrap_or(f64::NAN);
        set.grid_points = grid_points;
        Ok(set)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonlMember {
    index: usize,
    provenance: Provenance,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    grid_points: usize,
    model: DemandModel,
}

/// Uniform `m`-point grid on `[lo, hi]`; a point within rounding of `snap`
/// is replaced by `snap` exactly.
fn grid(lo: f64, hi: f64, m: usize, snap: f64) -> Vec<f64> {
    (0..m)
        .map(|i| {
            let v = if i + 1 == m { hi } else { lo + i as f64 * (hi - lo) / (m - 1) as f64 };
            if (v - snap).abs() <= 1e-12 * snap.abs().max(1.0) {
                snap
            } else {
                v
            }
        })
        .collect()
}

/// Per-coordinate grids of the base box, in flat-parameter order.
fn base_axes(est: &MleEstimate, chi2: f64, m: usize) -> Vec<Vec<f64>> {
    let n = est.n as f64;
    match &est.model {
        DemandModel::Normal { mu, sigma } => {
            let mut axes = Vec::with_capacity(2 * mu.len());
            for t in 0..mu.len() {
                let half = sigma[t] * (chi2 / n).sqrt();
                axes.push(grid(mu[t] - half, mu[t] + half, m, mu[t]));
            }
            for &s in sigma {
                let half = s * (chi2 / (2.0 * n)).sqrt();
                axes.push(grid((s - half).max(POSITIVITY_FLOOR), s + half, m, s));
            }
            axes
        }
        DemandModel::Poisson { lambda } => lambda
            .iter()
            .map(|&l| {
                let half = (chi2 * l / n).sqrt();
                grid((l - half).max(POSITIVITY_FLOOR), l + half, m, l)
            })
            .collect(),
    }
}

/// Grid discretisation of the confidence region, filtered by the
/// chi-square statistic. The MLE is added if it is not a grid point.
pub fn build_confidence_set(est: &MleEstimate, alpha: f64, m: usize) -> Result<AmbiguitySet> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 grid points, got {m}")));
    }
    let family = est.family();
    let horizon = est.horizon();
    let chi2 = region_threshold(family, horizon, alpha)?;
    let axes = base_axes(est, chi2, m);
    let base_size = axes
        .iter()
        .try_fold(1usize, |acc, a| acc.checked_mul(a.len()))
        .filter(|&s| s <= MAX_BASE_GRID)
        .ok_or_else(|| Error::Resource(format!("base grid {m}^{} exceeds {MAX_BASE_GRID} points", axes.len())))?;
    let limit = chi2 * (1.0 + BOUNDARY_SLACK);
    let dims = axes.len();
    let mut members: Vec<Vec<f64>> = (0..base_size)
        .into_par_iter()
        .filter_map(|mut idx| {
            // mixed radix, first coordinate most significant
            let mut point = vec![0.0; dims];
            for d in (0..dims).rev() {
                point[d] = axes[d][idx % m];
                idx /= m;
            }
            (statistic(est, &point) <= limit).then_some(point)
        })
        .collect();
    let mle_params = est.params();
    let mle_injected = !members.contains(&mle_params);
    if mle_injected {
        members.push(mle_params);
    }
    Ok(AmbiguitySet::canonical(
        family,
        horizon,
        members,
        alpha,
        m,
        Provenance::ConfidenceFiltered,
        base_size,
        mle_injected,
    ))
}

fn split(params: &[f64]) -> (&[f64], &[f64]) {
    params.split_at(params.len() / 2)
}

/// Removes normal members dominated in `σ` by a member with the same `μ`.
pub fn prune_dominated(set: &AmbiguitySet) -> Result<AmbiguitySet> {
    if set.family != Family::Normal {
        return Err(Error::FamilyMismatch { expected: "normal", got: set.family.name() });
    }
    let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for (i, p) in set.members.iter().enumerate() {
        let key = split(p).0.iter().map(|x| x.to_bits()).collect();
        groups.entry(key).or_default().push(i);
    }
    let mut keep = vec![true; set.len()];
    for idx in groups.values() {
        for &i in idx {
            let si = split(&set.members[i]).1;
            let dominated = idx.iter().any(|&j| {
                let sj = split(&set.members[j]).1;
                j != i && si.iter().zip(sj).all(|(a, b)| a <= b) && si.iter().zip(sj).any(|(a, b)| a < b)
            });
            keep[i] = !dominated;
        }
    }
    let members = set.members.iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| p.clone()).collect();
    Ok(set.derived(members, Provenance::DominatedPruned))
}

/// Candidate worst-case members.
///
/// Normal: among members with the largest `Σσ_t` for their `μ`, keep those
/// with some `μ_t` at its minimum or maximum given `σ`. Poisson: keep
/// members with some `λ_t` at its minimum or maximum over the set.
pub fn extreme_set(set: &AmbiguitySet) -> Result<AmbiguitySet> {
    if set.is_empty() {
        return Err(Error::EmptyAmbiguitySet);
    }
    let members = match set.family {
        Family::Normal => normal_extremes(&set.members),
        Family::Poisson => poisson_extremes(&set.members),
    };
    Ok(set.derived(members, Provenance::Extreme))
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

fn normal_extremes(members: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut best_sum: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    for p in members {
        let (mu, sigma) = split(p);
        let s: f64 = sigma.iter().sum();
        best_sum.entry(bits(mu)).and_modify(|b| *b = b.max(s)).or_insert(s);
    }
    let first: Vec<&Vec<f64>> = members
        .iter()
        .filter(|p| {
            let (mu, sigma) = split(p);
            let best = best_sum[&bits(mu)];
            sigma.iter().sum::<f64>() >= best - 1e-12 * best.abs().max(1.0)
        })
        .collect();

    // conditional μ range per σ vector within the first stage
    let mut ranges: BTreeMap<Vec<u64>, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for p in &first {
        let (mu, sigma) = split(p);
        let entry = ranges.entry(bits(sigma)).or_insert_with(|| (mu.to_vec(), mu.to_vec()));
        for t in 0..mu.len() {
            entry.0[t] = entry.0[t].min(mu[t]);
            entry.1[t] = entry.1[t].max(mu[t]);
        }
    }
    first
        .into_iter()
        .filter(|p| {
            let (mu, sigma) = split(p);
            let (lo, hi) = &ranges[&bits(sigma)];
            (0..mu.len()).any(|t| mu[t] == lo[t] || mu[t] == hi[t])
        })
        .cloned()
        .collect()
}

fn poisson_extremes(members: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dims = members[0].len();
    let lo: Vec<f64> = (0..dims).map(|t| members.iter().map(|p| p[t]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> =
        (0..dims).map(|t| members.iter().map(|p| p[t]).fold(f64::NEG_INFINITY, f64::max)).collect();
    members
        .iter()
        .filter(|p| (0..dims).any(|t| p[t] == lo[t] || p[t] == hi[t]))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(values: &[f64]) -> SampleSet {
        SampleSet::from_rows(values.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    fn poisson_est(lambda: Vec<f64>, n: usize) -> MleEstimate {
        MleEstimate { model: DemandModel::poisson(lambda).unwrap(), n }
    }

    fn normal_est(mu: Vec<f64>, sigma: Vec<f64>, n: usize) -> MleEstimate {
        MleEstimate { model: DemandModel::normal(mu, sigma).unwrap(), n }
    }

    #[test]
    fn mle_small_samples() {
        let p = mle(&column(&[1.0, 2.0, 3.0]), Family::Poisson).unwrap();
        assert_eq!(p.params(), vec![2.0]);
        let n = mle(&column(&[9.0, 11.0]), Family::Normal).unwrap();
        assert_eq!(n.params(), vec![10.0, 1.0]);
    }

    #[test]
    fn mle_degenerate() {
        assert!(matches!(
            mle(&column(&[3.0, 3.0]), Family::Normal),
            Err(Error::DegenerateSample { period: 0 })
        ));
        assert!(matches!(
            mle(&column(&[0.0, 0.0]), Family::Poisson),
            Err(Error::DegenerateSample { period: 0 })
        ));
        assert!(mle(&column(&[1.5]), Family::Poisson).is_err());
    }

    #[test]
    fn statistic_arithmetic() {
        let est = poisson_est(vec![2.0], 10);
        let theta = DemandModel::poisson(vec![3.0]).unwrap();
        assert_eq!(chi2_statistic(&est, &theta).unwrap(), 5.0);
        assert_eq!(chi2_statistic(&est, &est.model).unwrap(), 0.0);
        let est = normal_est(vec![10.0], vec![2.0], 10);
        let theta = DemandModel::normal(vec![11.0], vec![2.0]).unwrap();
        assert_eq!(chi2_statistic(&est, &theta).unwrap(), 2.5);
    }

    #[test]
    fn poisson_interval_and_boundary_inclusion() {
        let est = poisson_est(vec![2.0], 10);
        let set = build_confidence_set(&est, 0.05, 2).unwrap();
        // both endpoints sit exactly on the boundary; the MLE is injected
        let half = (3.841_458_820_694_124_f64 * 2.0 / 10.0).sqrt();
        assert!((half - 0.8766).abs() < 1e-4);
        assert_eq!(set.len(), 3);
        assert!(set.mle_injected());
        assert!((set.params()[0][0] - (2.0 - half)).abs() < 1e-12);
        assert!((set.params()[2][0] - (2.0 + half)).abs() < 1e-12);
    }

    #[test]
    fn normal_base_grid_size() {
        let est = normal_est(vec![10.0, 12.0], vec![2.0, 3.0], 25);
        let set = build_confidence_set(&est, 0.05, 3).unwrap();
        assert_eq!(set.base_size(), 81);
        assert!(set.contains(&est.params()));
        assert!(!set.mle_injected());
        let chi2 = region_threshold(Family::Normal, 2, 0.05).unwrap();
        for m in set.models() {
            assert!(chi2_statistic(&est, &m).unwrap() <= chi2 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn canonical_order_and_lookup() {
        let est = poisson_est(vec![4.0, 6.0], 20);
        let set = build_confidence_set(&est, 0.1, 5).unwrap();
        assert!(set.params().windows(2).all(|w| lex_cmp(&w[0], &w[1]) == Ordering::Less));
        for (i, p) in set.params().iter().enumerate() {
            assert_eq!(set.position(p), Some(i));
        }
    }

    #[test]
    fn dominance_examples() {
        let m = |mu: f64, s: f64| DemandModel::normal(vec![mu], vec![s]).unwrap();
        let set = AmbiguitySet::from_members(Family::Normal, vec![m(5.0, 2.0), m(5.0, 1.0)], Provenance::ConfidenceFiltered)
            .unwrap();
        assert_eq!(prune_dominated(&set).unwrap().params(), &[vec![5.0, 2.0]]);
        let set = AmbiguitySet::from_members(Family::Normal, vec![m(5.0, 2.0), m(6.0, 1.0)], Provenance::ConfidenceFiltered)
            .unwrap();
        assert_eq!(prune_dominated(&set).unwrap().len(), 2);
    }

    #[test]
    fn poisson_extreme_grid() {
        let mut members = Vec::new();
        for a in 1..=3 {
            for b in 1..=3 {
                members.push(DemandModel::poisson(vec![a as f64, b as f64]).unwrap());
            }
        }
        let set = AmbiguitySet::from_members(Family::Poisson, members, Provenance::ConfidenceFiltered).unwrap();
        let ext = extreme_set(&set).unwrap();
        assert_eq!(ext.len(), 8);
        assert!(!ext.contains(&[2.0, 2.0]));
        let single = AmbiguitySet::from_members(
            Family::Poisson,
            vec![DemandModel::poisson(vec![2.0]).unwrap()],
            Provenance::ConfidenceFiltered,
        )
        .unwrap();
        assert_eq!(extreme_set(&single).unwrap().params(), single.params());
    }

    #[test]
    fn normal_extreme_grid() {
        // full 3x3 grid for T = 1: (μ^l, σ^u) and (μ^u, σ^u) survive
        let mut members = Vec::new();
        for mu in [9.0, 10.0, 11.0] {
            for s in [1.0, 2.0, 3.0] {
                members.push(DemandModel::normal(vec![mu], vec![s]).unwrap());
            }
        }
        let set = AmbiguitySet::from_members(Family::Normal, members, Provenance::ConfidenceFiltered).unwrap();
        let ext = extreme_set(&set).unwrap();
        assert_eq!(ext.params(), &[vec![9.0, 3.0], vec![11.0, 3.0]]);
    }

    #[test]
    fn jsonl_round_trip() {
        let est = poisson_est(vec![3.0, 5.0], 10);
        let set = build_confidence_set(&est, 0.05, 3).unwrap();
        let mut buf = Vec::new();
        set.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), set.len());
        assert!(text.lines().next().unwrap().contains("\"kind\":\"poisson\""));
        let back = AmbiguitySet::read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back.params(), set.params());
        assert_eq!(back.provenance(), Provenance::ConfidenceFiltered);
    }

    #[test]
    fn mixed_families_rejected() {
        let r = AmbiguitySet::from_members(
            Family::Normal,
            vec![DemandModel::poisson(vec![1.0]).unwrap()],
            Provenance::BaseGrid,
        );
        assert!(matches!(r, Err(Error::FamilyMismatch { .. })));
        assert!(matches!(
            AmbiguitySet::from_members(Family::Normal, vec![], Provenance::BaseGrid),
            Err(Error::EmptyAmbiguitySet)
        ));
    }
}
