//! Aggregates the result CSVs into summary tables and SVG boxplots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use newsvendor_core::Family;
use serde::Serialize;

use crate::experiment::{read_rows, DroRow, FdRow, MleRow, DRO_FILE, FD_FILE, MLE_FILE};

/// Five-number summary plus mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Stats> {
        let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(Stats {
            count: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

fn share(flags: impl IntoIterator<Item = Option<bool>>) -> Option<f64> {
    let (mut yes, mut total) = (0usize, 0usize);
    for f in flags.into_iter().flatten() {
        total += 1;
        yes += f as usize;
    }
    (total > 0).then(|| yes as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdSummary {
    pub rows: usize,
    pub errors: usize,
    pub gap_pct: Option<Stats>,
    /// Share of instances with FD within 2.5% of the optimum.
    pub within_2_5_pct: Option<f64>,
    pub budget_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MleSummary {
    pub rows: usize,
    pub errors: usize,
    pub underestimate_share: Option<f64>,
    pub ape_pct: Option<Stats>,
    pub optimality_gap_pct: Option<Stats>,
    pub profit_loss: usize,
    /// Profit/loss instances where the DRO worst-case cost is positive.
    pub profit_loss_dro_positive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroSummary {
    pub rows: usize,
    pub errors: usize,
    pub q_gap_pct: Option<Stats>,
    pub mean_abs_q_gap_pct: Option<f64>,
    pub omega_gap_pct: Option<Stats>,
    pub selected_true_worst_share: Option<f64>,
    pub iterations: Option<Stats>,
    pub set_size: Option<Stats>,
    pub extreme_size: Option<Stats>,
    pub theta0_in_region_share: Option<f64>,
    pub dominance_violations: usize,
    pub timeouts: usize,
    pub cs_wall_ms: Option<Stats>,
    pub full_wall_ms: Option<Stats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub family: Family,
    pub fd: FdSummary,
    pub mle: MleSummary,
    pub dro: DroSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub families: Vec<FamilySummary>,
    /// Over all families.
    pub underestimate_share: Option<f64>,
    pub profit_loss_dro_positive: usize,
}

fn fd_summary(rows: &[&FdRow]) -> FdSummary {
    FdSummary {
        rows: rows.len(),
        errors: rows.iter().filter(|r| !r.error.is_empty()).count(),
        gap_pct: Stats::of(rows.iter().filter_map(|r| r.fd_gap_pct)),
        within_2_5_pct: share(rows.iter().map(|r| r.fd_gap_pct.map(|g| g <= 2.5))),
        budget_violations: rows.iter().filter(|r| r.within_budget == Some(false)).count(),
    }
}

fn mle_summary(rows: &[&MleRow]) -> MleSummary {
    let profit_loss: Vec<_> = rows.iter().filter(|r| r.predicted_profit_actual_loss == Some(true)).collect();
    MleSummary {
        rows: rows.len(),
        errors: rows.iter().filter(|r| !r.error.is_empty()).count(),
        underestimate_share: share(rows.iter().map(|r| r.underestimates)),
        ape_pct: Stats::of(rows.iter().filter_map(|r| r.ape_pct)),
        optimality_gap_pct: Stats::of(rows.iter().filter_map(|r| r.optimality_gap_pct)),
        profit_loss: profit_loss.len(),
        profit_loss_dro_positive: profit_loss.iter().filter(|r| r.dro_worst_cost.is_some_and(|c| c > 0.0)).count(),
    }
}

fn dro_summary(rows: &[&DroRow]) -> DroSummary {
    let q: Vec<f64> = rows.iter().filter_map(|r| r.q_gap_pct).collect();
    DroSummary {
        rows: rows.len(),
        errors: rows.iter().filter(|r| !r.error.is_empty()).count(),
        mean_abs_q_gap_pct: (!q.is_empty()).then(|| q.iter().map(|x| x.abs()).sum::<f64>() / q.len() as f64),
        q_gap_pct: Stats::of(q),
        omega_gap_pct: Stats::of(rows.iter().filter_map(|r| r.omega_gap_pct)),
        selected_true_worst_share: share(rows.iter().map(|r| r.selected_true_worst)),
        iterations: Stats::of(rows.iter().filter_map(|r| r.cs_iterations.map(|x| x as f64))),
        set_size: Stats::of(rows.iter().filter_map(|r| r.set_size.map(|x| x as f64))),
        extreme_size: Stats::of(rows.iter().filter_map(|r| r.extreme_size.map(|x| x as f64))),
        theta0_in_region_share: share(rows.iter().map(|r| r.theta0_in_region)),
        dominance_violations: rows.iter().filter(|r| r.dominance_ok == Some(false)).count(),
        timeouts: rows.iter().filter(|r| r.timed_out == Some(true)).count(),
        cs_wall_ms: Stats::of(rows.iter().filter_map(|r| r.cs_wall_ms)),
        full_wall_ms: Stats::of(rows.iter().filter_map(|r| r.full_wall_ms)),
    }
}

/// Builds the summary from rows already in memory.
pub fn summarize(fd: &[FdRow], mle: &[MleRow], dro: &[DroRow]) -> Summary {
    let mut families = Vec::new();
    for family in [Family::Normal, Family::Poisson] {
        let f: Vec<_> = fd.iter().filter(|r| r.family == family).collect();
        let m: Vec<_> = mle.iter().filter(|r| r.family == family).collect();
        let d: Vec<_> = dro.iter().filter(|r| r.family == family).collect();
        if f.is_empty() && m.is_empty() && d.is_empty() {
            continue;
        }
        families.push(FamilySummary { family, fd: fd_summary(&f), mle: mle_summary(&m), dro: dro_summary(&d) });
    }
    let all: Vec<_> = mle.iter().collect();
    let overall = mle_summary(&all);
    Summary {
        families,
        underestimate_share: overall.underestimate_share,
        profit_loss_dro_positive: overall.profit_loss_dro_positive,
    }
}

/// Reads the three CSVs from a results directory.
pub fn load(dir: &Path) -> Result<(Vec<FdRow>, Vec<MleRow>, Vec<DroRow>)> {
    Ok((read_rows(&dir.join(FD_FILE))?, read_rows(&dir.join(MLE_FILE))?, read_rows(&dir.join(DRO_FILE))?))
}

fn num(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

fn percent(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{:.2}%", 100.0 * v))
}

fn stats_row(out: &mut String, label: &str, s: Option<Stats>) {
    match s {
        Some(s) => {
            let _ = writeln!(
                out,
                "| {label} | {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |",
                s.count, s.mean, s.min, s.q1, s.median, s.q3, s.max
            );
        }
        None => {
            let _ = writeln!(out, "| {label} | 0 | n/a | n/a | n/a | n/a | n/a | n/a |");
        }
    }
}

/// Markdown tables, one block per family.
pub fn render_markdown(summary: &Summary) -> String {
    let mut out = String::from("# Experiment summary\n\n");
    let _ = writeln!(out, "MLE underestimates the true cost of its own plan: {}", percent(summary.underestimate_share));
    let _ = writeln!(
        out,
        "Predicted profit but actual loss, with positive DRO worst case: {} instance(s)\n",
        summary.profit_loss_dro_positive
    );
    for f in &summary.families {
        let _ = writeln!(out, "## {}\n", f.family);
        let _ = writeln!(out, "| metric | count | mean | min | q1 | median | q3 | max |");
        let _ = writeln!(out, "|---|---|---|---|---|---|---|---|");
        stats_row(&mut out, "FD gap vs optimum (%)", f.fd.gap_pct);
        stats_row(&mut out, "MLE APE (%)", f.mle.ape_pct);
        stats_row(&mut out, "MLE optimality gap (%)", f.mle.optimality_gap_pct);
        stats_row(&mut out, "CS q-gap (%)", f.dro.q_gap_pct);
        stats_row(&mut out, "CS ω-gap (%)", f.dro.omega_gap_pct);
        stats_row(&mut out, "CS iterations", f.dro.iterations);
        stats_row(&mut out, "|Ω′|", f.dro.set_size);
        stats_row(&mut out, "|extreme set|", f.dro.extreme_size);
        stats_row(&mut out, "CS wall (ms)", f.dro.cs_wall_ms);
        stats_row(&mut out, "full minimax wall (ms)", f.dro.full_wall_ms);
        let _ = writeln!(out);
        let _ = writeln!(out, "| indicator | value |");
        let _ = writeln!(out, "|---|---|");
        let _ = writeln!(out, "| instances | {} |", f.dro.rows);
        let _ = writeln!(out, "| error rows (fd / mle / dro) | {} / {} / {} |", f.fd.errors, f.mle.errors, f.dro.errors);
        let _ = writeln!(out, "| FD within 2.5% | {} |", percent(f.fd.within_2_5_pct));
        let _ = writeln!(out, "| FD budget violations | {} |", f.fd.budget_violations);
        let _ = writeln!(out, "| MLE underestimates | {} |", percent(f.mle.underestimate_share));
        let _ = writeln!(out, "| predicted profit, actual loss | {} |", f.mle.profit_loss);
        let _ = writeln!(out, "| … with positive DRO worst case | {} |", f.mle.profit_loss_dro_positive);
        let _ = writeln!(out, "| mean abs q-gap | {} |", num(f.dro.mean_abs_q_gap_pct));
        let _ = writeln!(out, "| CS selects full-set worst case | {} |", percent(f.dro.selected_true_worst_share));
        let _ = writeln!(out, "| θ⁰ in confidence region | {} |", percent(f.dro.theta0_in_region_share));
        let _ = writeln!(out, "| dominance violations | {} |", f.dro.dominance_violations);
        let _ = writeln!(out, "| timeouts | {} |", f.dro.timeouts);
        let _ = writeln!(out);
    }
    out
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Horizontal-axis boxplot (whiskers at min and max) of labelled groups.
pub fn boxplot_svg(title: &str, groups: &[(String, Option<Stats>)]) -> String {
    const W: f64 = 640.0;
    const ROW: f64 = 48.0;
    const LEFT: f64 = 110.0;
    const RIGHT: f64 = 30.0;
    const TOP: f64 = 40.0;
    let height = TOP + ROW * groups.len().max(1) as f64 + 40.0;
    let present: Vec<Stats> = groups.iter().filter_map(|g| g.1).collect();
    let (mut lo, mut hi) = present.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.min), b.max(s.max)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let x = |v: f64| LEFT + (v - lo) / (hi - lo) * (W - LEFT - RIGHT);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{height}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
    for (i, (label, st)) in groups.iter().enumerate() {
        let cy = TOP + ROW * i as f64 + ROW / 2.0;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT - 8.0, cy + 4.0, esc(label));
        let Some(st) = st else {
            let _ = writeln!(s, r#"<text x="{LEFT}" y="{}">no data</text>"#, cy + 4.0);
            continue;
        };
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{cy}" x2="{:.2}" y2="{cy}" stroke="black"/>"#, x(st.min), x(st.max));
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{}" width="{:.2}" height="{}" fill="#9ecae1" stroke="black"/>"##,
            x(st.q1),
            cy - 12.0,
            (x(st.q3) - x(st.q1)).max(1.0),
            24.0
        );
        let _ = writeln!(s, r#"<line x1="{m:.2}" y1="{}" x2="{m:.2}" y2="{}" stroke="black" stroke-width="2"/>"#, cy - 12.0, cy + 12.0, m = x(st.median));
    }
    let axis_y = TOP + ROW * groups.len().max(1) as f64 + 10.0;
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="black"/>"#, W - RIGHT);
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, x(v), axis_y + 16.0, format_tick(v));
    }
    s.push_str("</svg>\n");
    s
}

fn format_tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// Writes `summary.md`, `summary.json` and one boxplot per metric into `dir`.
pub fn write_report(dir: &Path) -> Result<(Summary, Vec<PathBuf>)> {
    let (fd, mle, dro) = load(dir)?;
    let summary = summarize(&fd, &mle, &dro);
    let mut written = Vec::new();
    let md = dir.join("summary.md");
    fs::write(&md, render_markdown(&summary))?;
    written.push(md);
    let js = dir.join("summary.json");
    fs::write(&js, serde_json::to_string_pretty(&summary)?)?;
    written.push(js);
    type Pick = fn(&FamilySummary) -> Option<Stats>;
    let plots: [(&str, &str, Pick); 4] = [
        ("fd_gap.svg", "FD gap vs optimum (%)", |f| f.fd.gap_pct),
        ("mle_ape.svg", "MLE absolute percentage error (%)", |f| f.mle.ape_pct),
        ("cs_q_gap.svg", "CS q-gap vs full minimax (%)", |f| f.dro.q_gap_pct),
        ("cs_omega_gap.svg", "CS ω-gap (%)", |f| f.dro.omega_gap_pct),
    ];
    for (file, title, pick) in plots {
        let groups: Vec<(String, Option<Stats>)> =
            summary.families.iter().map(|f| (f.family.to_string(), pick(f))).collect();
        let path = dir.join(file);
        fs::write(&path, boxplot_svg(title, &groups))?;
        written.push(path);
    }
    Ok((summary, written))
}
