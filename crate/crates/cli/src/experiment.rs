//! Grid experiments: one row per trial, one summary row per check.
//!
//! Every cell samples a single fixed instance from stream
//! `(cell << 32) | 0xFFFF_FFFF` of the master seed; trial `t` of cell `c`
//! uses stream `(c << 32) | t`. Trials run on the rayon pool and rows come
//! out in `(cell, trial)` order.
//!
//! Summary statistics over a per-trial quantity `x` (T trials, summed in
//! trial order): `mean = Σx / T`, `se = sqrt(max(Σx²/T - mean², 0) / T)`.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use balhyp_core::coloring::{
    available_colors, col_random_phase, full_coloring, ColParams, ColoringOptions,
};
use balhyp_core::indep::{raw_independent_set, IndParams};
use balhyp_core::models::{exists_balanced_is, sample_hknp, union_bound_bis};
use balhyp_core::rng::derive_seed;
use balhyp_core::sets::check_coloring;
use balhyp_core::stats::binomial_mean_sd;
use balhyp_core::{KPartiteHypergraph, Seed};
use clap::{Args, ValueEnum};
use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const TRIALS_HEADER: &str = "# balhyp-trials v1";
pub const SUMMARY_HEADER: &str = "# balhyp-summary v1";
const INSTANCE_TRIAL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Independent-set procedure on a random instance per cell.
    Bis,
    /// Full two-stage coloring on a random instance per cell.
    Color,
    /// Existence of balanced independent sets in fresh H(k, N, p) samples.
    Bound,
    /// Random coloring phase only: class sizes and lost colors.
    Concentration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentSpec {
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Uniformity values.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub k: Vec<usize>,
    /// Part sizes (N in bound mode).
    #[arg(long, value_delimiter = ',', default_value = "64")]
    pub n: Vec<usize>,
    /// Expected vertex degree of the per-cell instance; edge probability is d / n^(k-1).
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub d: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub eps: Vec<f64>,
    /// Set sides (bound mode).
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub s: Vec<usize>,
    /// Edge probabilities (bound mode).
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub p: Vec<f64>,
    /// Palette for concentration mode; default is the ledger q at the instance's max degree.
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long, default_value_t = 100)]
    pub trials: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Coloring retries (color mode).
    #[arg(long, default_value_t = 50)]
    pub retries: usize,
    /// Matching restarts (color mode).
    #[arg(long, default_value_t = 1000)]
    pub restarts: u64,
    /// Enumeration budget (bound mode).
    #[arg(long, default_value_t = balhyp_core::models::DEFAULT_ENUMERATION_BUDGET)]
    pub budget: u128,
    /// Trial rows.
    #[arg(long)]
    pub out: PathBuf,
    /// Summary rows; stdout when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Record wall time per trial (breaks byte-identical reruns).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: u32,
    pub k: usize,
    pub n: usize,
    pub d: Option<f64>,
    pub eps: Option<f64>,
    pub s: Option<usize>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub mode: Mode,
    pub cell: u32,
    pub trial: u32,
    pub k: usize,
    pub n: usize,
    pub d: Option<f64>,
    pub eps: Option<f64>,
    pub s: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<u32>,
    pub stream: u64,
    /// bis: raw `|I ∩ V_j|` for every part. concentration: size of class 1
    /// in every uniformly colored part. `;`-separated.
    pub sizes: String,
    pub side: Option<usize>,
    pub palette: Option<u32>,
    pub path: Option<String>,
    pub retries: Option<usize>,
    /// `|U_k|` after the (first) random phase.
    pub failed: Option<usize>,
    pub residual_max_degree: Option<usize>,
    pub clamped: Option<bool>,
    pub bad_shortfall: Option<bool>,
    /// Colors missing from `L(v*)`, one `0/1` character per color.
    pub lost: Option<String>,
    pub empty: Option<bool>,
    pub exists: Option<bool>,
    pub valid: bool,
    pub wall_us: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `|lhs - rhs| <= tol`.
    Within,
    /// `lhs >= rhs - tol`.
    Ge,
    /// `lhs <= rhs + tol`.
    Le,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub cell: u32,
    pub k: usize,
    pub n: usize,
    pub d: Option<f64>,
    pub eps: Option<f64>,
    pub s: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<u32>,
    pub check: String,
    pub trials: u32,
    pub lhs: f64,
    pub rhs: Option<f64>,
    pub se: f64,
    pub tol: Option<f64>,
    pub relation: Relation,
    pub verdict: String,
}

impl SummaryRow {
    pub fn passed(&self) -> bool {
        self.verdict != "fail"
    }
}

pub fn verdict(relation: Relation, lhs: f64, rhs: f64, tol: f64) -> &'static str {
    let ok = match relation {
        Relation::Within => (lhs - rhs).abs() <= tol,
        Relation::Ge => lhs >= rhs - tol,
        Relation::Le => lhs <= rhs + tol,
        Relation::Info => return "info",
    };
    if ok {
        "pass"
    } else {
        "fail"
    }
}

/// `(mean, se)` as documented in the module header.
pub fn mean_se(xs: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (mut t, mut sum, mut sumsq) = (0u64, 0.0, 0.0);
    for x in xs {
        t += 1;
        sum += x;
        sumsq += x * x;
    }
    if t == 0 {
        return (0.0, 0.0);
    }
    let mean = sum / t as f64;
    let var = (sumsq / t as f64 - mean * mean).max(0.0);
    (mean, (var / t as f64).sqrt())
}

pub fn parse_sizes(s: &str) -> Vec<usize> {
    if s.is_empty() {
        return Vec::new();
    }
    s.split(';')
        .map(|x| x.parse().expect("size column"))
        .collect()
}

fn join_sizes(xs: &[usize]) -> String {
    xs.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

pub fn cells(spec: &ExperimentSpec) -> Result<Vec<Cell>> {
    let mut out = Vec::new();
    for &k in &spec.k {
        for &n in &spec.n {
            match spec.mode {
                Mode::Bound => {
                    for &s in &spec.s {
                        for &p in &spec.p {
                            out.push(Cell {
                                index: 0,
                                k,
                                n,
                                d: None,
                                eps: None,
                                s: Some(s),
                                p: Some(p),
                            });
                        }
                    }
                }
                _ => {
                    for &d in &spec.d {
                        for &eps in &spec.eps {
                            out.push(Cell {
                                index: 0,
                                k,
                                n,
                                d: Some(d),
                                eps: Some(eps),
                                s: None,
                                p: None,
                            });
                        }
                    }
                }
            }
        }
    }
    ensure!(!out.is_empty(), "empty parameter grid");
    ensure!(out.len() <= u32::MAX as usize, "too many cells");
    for (i, c) in out.iter_mut().enumerate() {
        c.index = i as u32;
    }
    Ok(out)
}

/// Per-cell data shared by all its trials.
struct CellContext {
    cell: Cell,
    host: Option<KPartiteHypergraph>,
    ind_p: Option<f64>,
    q: Option<u32>,
    /// Lowest-index last-part vertex of maximum degree.
    probe: u32,
    /// Exact or bound-side values for the summary.
    bound: Option<f64>,
}

pub fn instance(seed: u64, cell: &Cell) -> Result<KPartiteHypergraph> {
    let d = cell.d.expect("instance cells carry d");
    let total = (cell.n as f64).powi(cell.k as i32 - 1);
    let pe = d / total;
    ensure!(
        (0.0..=1.0).contains(&pe),
        "d={d} needs edge probability {pe} > 1 at n={}",
        cell.n
    );
    Ok(sample_hknp(
        cell.k,
        cell.n,
        pe,
        Seed::for_trial(seed, cell.index, INSTANCE_TRIAL),
    )?)
}

fn context(spec: &ExperimentSpec, cell: Cell) -> Result<CellContext> {
    let mut ctx = CellContext {
        cell,
        host: None,
        ind_p: None,
        q: None,
        probe: 0,
        bound: None,
    };
    match spec.mode {
        Mode::Bound => {
            let (s, p) = (cell.s.unwrap(), cell.p.unwrap());
            ensure!(s <= cell.n, "s={s} exceeds N={}", cell.n);
            ctx.bound = Some(union_bound_bis(cell.k, cell.n as u64, s as u64, p)?);
        }
        Mode::Bis => {
            let h = instance(spec.seed, &cell)?;
            let p = IndParams::for_hypergraph_clamped(&h, cell.eps.unwrap())?.p;
            let last = cell.k - 1;
            let expected: f64 = (0..cell.n as u32)
                .map(|v| (1.0 - p.powi(last as i32)).powi(h.degree(last, v) as i32))
                .sum();
            ctx.ind_p = Some(p);
            ctx.bound = Some(expected);
            ctx.host = Some(h);
        }
        Mode::Color => ctx.host = Some(instance(spec.seed, &cell)?),
        Mode::Concentration => {
            let h = instance(spec.seed, &cell)?;
            let q = match spec.q {
                Some(q) => q,
                None => {
                    ColParams::new(cell.k, cell.eps.unwrap(), h.max_degree(), cell.n)
                        .context("no default palette for this cell; pass --q")?
                        .q
                }
            };
            ensure!(q >= 1, "q must be at least 1");
            ensure!(q <= 4096, "q={q} too large for the lost-color column");
            let last = cell.k - 1;
            let degrees = h.degrees(last);
            let max = degrees.iter().copied().max().unwrap_or(0);
            ctx.probe = degrees.iter().position(|&x| x == max).unwrap_or(0) as u32;
            let lose: f64 = 1.0 / (q as f64).powi(last as i32);
            ctx.bound = Some(1.0 - (1.0 - lose).powi(max as i32));
            ctx.q = Some(q);
            ctx.host = Some(h);
        }
    }
    Ok(ctx)
}

fn blank(spec: &ExperimentSpec, ctx: &CellContext, trial: u32) -> TrialRecord {
    let c = ctx.cell;
    TrialRecord {
        mode: spec.mode,
        cell: c.index,
        trial,
        k: c.k,
        n: c.n,
        d: c.d,
        eps: c.eps,
        s: c.s,
        p: c.p,
        q: ctx.q,
        stream: Seed::for_trial(spec.seed, c.index, trial).stream,
        sizes: String::new(),
        side: None,
        palette: None,
        path: None,
        retries: None,
        failed: None,
        residual_max_degree: None,
        clamped: None,
        bad_shortfall: None,
        lost: None,
        empty: None,
        exists: None,
        valid: true,
        wall_us: None,
    }
}

fn run_trial(spec: &ExperimentSpec, ctx: &CellContext, trial: u32) -> Result<TrialRecord> {
    let start = Instant::now();
    let seed = Seed::for_trial(spec.seed, ctx.cell.index, trial);
    let mut r = blank(spec, ctx, trial);
    match spec.mode {
        Mode::Bis => {
            let h = ctx.host.as_ref().unwrap();
            let raw = raw_independent_set(h, ctx.ind_p.unwrap(), seed)?;
            let sizes: Vec<usize> = raw.iter().map(Vec::len).collect();
            r.side = sizes.iter().copied().min();
            r.sizes = join_sizes(&sizes);
        }
        Mode::Color => {
            let h = ctx.host.as_ref().unwrap();
            let opts = ColoringOptions {
                seed: derive_seed(spec.seed, seed.stream),
                max_retries: spec.retries,
                matching_restarts: spec.restarts,
            };
            match full_coloring(h, ctx.cell.eps.unwrap(), opts) {
                Ok(rep) => {
                    r.palette = Some(rep.palette);
                    r.q = rep.params.map(|p| p.q);
                    r.path = Some(format!("{:?}", rep.path).to_lowercase());
                    r.retries = Some(rep.retries_used);
                    r.failed = rep.attempts.first().map(|a| a.failed);
                    let accepted = rep.attempts.iter().find(|a| a.accepted);
                    r.residual_max_degree = accepted.map(|a| a.residual_max_degree);
                    r.clamped = Some(rep.attempts.iter().any(|a| a.clamped));
                    r.bad_shortfall = Some(rep.attempts.iter().any(|a| a.bad_shortfall));
                    r.valid = check_coloring(h, &rep.coloring).passes(true);
                }
                Err(e) => {
                    r.path = Some("error".into());
                    r.valid = false;
                    log::warn!("cell {} trial {trial}: {e}", ctx.cell.index);
                }
            }
        }
        Mode::Bound => {
            let h = sample_hknp(ctx.cell.k, ctx.cell.n, ctx.cell.p.unwrap(), seed)?;
            r.exists = Some(exists_balanced_is(&h, ctx.cell.s.unwrap(), spec.budget)?);
        }
        Mode::Concentration => {
            let h = ctx.host.as_ref().unwrap();
            let q = ctx.q.unwrap();
            let state = col_random_phase(h, q, seed)?;
            let sizes: Vec<usize> = (0..h.k() - 1)
                .map(|j| state.coloring.class(j, 1).len())
                .collect();
            r.sizes = join_sizes(&sizes);
            r.failed = Some(state.failed.len());
            let list = available_colors(h, &state.coloring, ctx.probe);
            let mut lost = vec![b'1'; q as usize];
            for c in &list {
                lost[*c as usize - 1] = b'0';
            }
            r.lost = Some(String::from_utf8(lost).unwrap());
            r.empty = Some(list.is_empty());
        }
    }
    if spec.timing {
        r.wall_us = Some(start.elapsed().as_micros() as u64);
    }
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn row(
    ctx: &CellContext,
    q: Option<u32>,
    check: &str,
    trials: u32,
    lhs: f64,
    rhs: Option<f64>,
    se: f64,
    tol: Option<f64>,
    relation: Relation,
) -> SummaryRow {
    let c = ctx.cell;
    let verdict = verdict(relation, lhs, rhs.unwrap_or(f64::NAN), tol.unwrap_or(0.0)).to_string();
    SummaryRow {
        cell: c.index,
        k: c.k,
        n: c.n,
        d: c.d,
        eps: c.eps,
        s: c.s,
        p: c.p,
        q,
        check: check.into(),
        trials,
        lhs,
        rhs,
        se,
        tol,
        relation,
        verdict,
    }
}

fn summarize(spec: &ExperimentSpec, ctx: &CellContext, rows: &[TrialRecord]) -> Vec<SummaryRow> {
    let t = rows.len() as u32;
    let (k, n) = (ctx.cell.k, ctx.cell.n);
    let mut out = Vec::new();
    match spec.mode {
        Mode::Bis => {
            let p = ctx.ind_p.unwrap();
            let sizes: Vec<Vec<usize>> = rows.iter().map(|r| parse_sizes(&r.sizes)).collect();
            let (m, se) = mean_se(rows.iter().map(|r| r.side.unwrap() as f64));
            out.push(row(
                ctx,
                None,
                "mean_side",
                t,
                m,
                None,
                se,
                None,
                Relation::Info,
            ));
            let sd = binomial_mean_sd(n as u64, p, t as u64);
            for j in 0..k - 1 {
                let (m, se) = mean_se(sizes.iter().map(|s| s[j] as f64));
                let name = format!("ind_side_part{j}");
                out.push(row(
                    ctx,
                    None,
                    &name,
                    t,
                    m,
                    Some(n as f64 * p),
                    se,
                    Some(3.0 * sd),
                    Relation::Within,
                ));
            }
            let (m, se) = mean_se(sizes.iter().map(|s| s[k - 1] as f64));
            out.push(row(
                ctx,
                None,
                "ind_harris",
                t,
                m,
                ctx.bound,
                se,
                Some(3.0 * se),
                Relation::Ge,
            ));
        }
        Mode::Color => {
            let (m, se) = mean_se(rows.iter().map(|r| r.valid as u8 as f64));
            out.push(row(
                ctx,
                None,
                "validity",
                t,
                m,
                Some(1.0),
                se,
                Some(0.0),
                Relation::Ge,
            ));
            let (m, se) = mean_se(rows.iter().map(|r| r.palette.unwrap_or(0) as f64));
            out.push(row(
                ctx,
                None,
                "mean_palette",
                t,
                m,
                None,
                se,
                None,
                Relation::Info,
            ));
            let (m, se) = mean_se(
                rows.iter()
                    .map(|r| (r.path.as_deref() == Some("main")) as u8 as f64),
            );
            out.push(row(
                ctx,
                None,
                "main_path_rate",
                t,
                m,
                None,
                se,
                None,
                Relation::Info,
            ));
        }
        Mode::Bound => {
            let (m, se) = mean_se(rows.iter().map(|r| r.exists.unwrap() as u8 as f64));
            out.push(row(
                ctx,
                None,
                "bis_union_bound",
                t,
                m,
                ctx.bound,
                se,
                Some(3.0 * se),
                Relation::Le,
            ));
        }
        Mode::Concentration => {
            let q = ctx.q.unwrap();
            let sizes: Vec<Vec<usize>> = rows.iter().map(|r| parse_sizes(&r.sizes)).collect();
            let sd = binomial_mean_sd(n as u64, 1.0 / q as f64, t as u64);
            for j in 0..k - 1 {
                let (m, se) = mean_se(sizes.iter().map(|s| s[j] as f64));
                let name = format!("class_size_part{j}");
                out.push(row(
                    ctx,
                    Some(q),
                    &name,
                    t,
                    m,
                    Some(n as f64 / q as f64),
                    se,
                    Some(3.0 * sd),
                    Relation::Within,
                ));
            }
            let lost: Vec<&[u8]> = rows
                .iter()
                .map(|r| r.lost.as_deref().unwrap().as_bytes())
                .collect();
            let (m, se) = mean_se(lost.iter().map(|l| (l[0] == b'1') as u8 as f64));
            out.push(row(
                ctx,
                Some(q),
                "uncolored_harris",
                t,
                m,
                ctx.bound,
                se,
                Some(3.0 * se),
                Relation::Le,
            ));
            let product: f64 = (0..q as usize)
                .map(|c| mean_se(lost.iter().map(|l| (l[c] == b'1') as u8 as f64)).0)
                .product();
            let (m, se) = mean_se(rows.iter().map(|r| r.empty.unwrap() as u8 as f64));
            out.push(row(
                ctx,
                Some(q),
                "loss_product",
                t,
                m,
                Some(product),
                se,
                Some(3.0 * se),
                Relation::Le,
            ));
            let (m, se) = mean_se(rows.iter().map(|r| r.failed.unwrap() as f64));
            out.push(row(
                ctx,
                Some(q),
                "mean_failed",
                t,
                m,
                None,
                se,
                None,
                Relation::Info,
            ));
        }
    }
    out
}

pub struct Outcome {
    pub trials: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Runs every cell and trial; deterministic given the spec (except `wall_us`).
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Outcome> {
    ensure!(spec.trials >= 1, "trials must be at least 1");
    ensure!(spec.trials < INSTANCE_TRIAL, "too many trials");
    let cells = cells(spec)?;
    let contexts: Vec<CellContext> = cells
        .into_par_iter()
        .map(|c| context(spec, c))
        .collect::<Result<_>>()?;
    info!("{} cells x {} trials", contexts.len(), spec.trials);
    let jobs: Vec<(usize, u32)> = (0..contexts.len())
        .flat_map(|c| (0..spec.trials).map(move |t| (c, t)))
        .collect();
    let trials: Vec<TrialRecord> = jobs
        .into_par_iter()
        .map(|(c, t)| run_trial(spec, &contexts[c], t))
        .collect::<Result<_>>()?;
    let mut summary = Vec::new();
    for (ctx, rows) in contexts.iter().zip(trials.chunks(spec.trials as usize)) {
        summary.extend(summarize(spec, ctx, rows));
    }
    Ok(Outcome { trials, summary })
}

fn csv_text<T: Serialize>(header: &str, rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?;
    Ok(format!("{header}\n{body}"))
}

#[derive(Serialize)]
struct JsonDoc<'a, T> {
    schema: &'a str,
    rows: &'a [T],
}

fn json_text<T: Serialize>(header: &str, rows: &[T]) -> Result<String> {
    let schema = header.trim_start_matches("# ");
    Ok(serde_json::to_string_pretty(&JsonDoc { schema, rows })? + "\n")
}

pub fn render_trials(rows: &[TrialRecord], format: Format) -> Result<String> {
    match format {
        Format::Csv => csv_text(TRIALS_HEADER, rows),
        Format::Json => json_text(TRIALS_HEADER, rows),
    }
}

pub fn render_summary(rows: &[SummaryRow], format: Format) -> Result<String> {
    match format {
        Format::Csv => csv_text(SUMMARY_HEADER, rows),
        Format::Json => json_text(SUMMARY_HEADER, rows),
    }
}

/// Reads a trial CSV back (skipping the version row).
pub fn read_trials_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let Some(body) = text.strip_prefix(TRIALS_HEADER) else {
        bail!("missing {TRIALS_HEADER:?} version row");
    };
    let mut r = csv::Reader::from_reader(body.trim_start_matches('\n').as_bytes());
    r.deserialize().map(|x| x.map_err(Into::into)).collect()
}

pub fn read_summary_csv(text: &str) -> Result<Vec<SummaryRow>> {
    let Some(body) = text.strip_prefix(SUMMARY_HEADER) else {
        bail!("missing {SUMMARY_HEADER:?} version row");
    };
    let mut r = csv::Reader::from_reader(body.trim_start_matches('\n').as_bytes());
    r.deserialize().map(|x| x.map_err(Into::into)).collect()
}
