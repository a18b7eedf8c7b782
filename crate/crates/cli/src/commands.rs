use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use balhyp_core::coloring::{
    full_coloring, AttemptRecord, ColParams, ColoringOptions, ColoringPath,
};
use balhyp_core::indep::{best_of_trials, exact_alpha_b, IndParams};
use balhyp_core::io::{parse_khg, write_khg};
use balhyp_core::matching::{
    exact_pm_complement, fallback_coloring, DEFAULT_EXACT_NODES, DEFAULT_RESTARTS,
};
use balhyp_core::models::{
    ln_union_bound_bis, sample_hknp, trim_top_degree, union_bound_bis, DEFAULT_ENUMERATION_BUDGET,
};
use balhyp_core::sets::{check_coloring, is_balanced_independent, ColoringVerdict};
use balhyp_core::{KPartiteHypergraph, Seed};
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::exit::Rejected;
use crate::experiment::{render_summary, render_trials, run_experiment, ExperimentSpec};
use crate::formats::{flat_colors, parse_coloring, parse_set, to_json, ColoringFile, SetFile};

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn emit(out: &mut dyn Write, path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => Ok(out.write_all(contents.as_bytes())?),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load(path: &Path) -> Result<KPartiteHypergraph> {
    let text = read(path)?;
    let raw = parse_khg(&text).with_context(|| format!("{}", path.display()))?;
    KPartiteHypergraph::try_from(raw).with_context(|| format!("{}", path.display()))
}

/// `--json` with no path goes to stdout.
fn emit_json<T: Serialize>(
    out: &mut dyn Write,
    target: &Option<Option<PathBuf>>,
    value: &T,
) -> Result<()> {
    match target {
        None => Ok(()),
        Some(path) => emit(out, path.as_deref(), &to_json(value)?),
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Remove this many highest-degree vertices from every part.
    #[arg(long)]
    pub trim: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<()> {
    let mut h = sample_hknp(a.k, a.n, a.p, Seed::new(a.seed, a.stream))?;
    if let Some(t) = a.trim {
        h = trim_top_degree(&h, t)?.0;
    }
    emit(out, a.out.as_deref(), &write_khg(&h))
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// JSON coloring that must be a total proper balanced coloring.
    #[arg(long)]
    pub coloring: Option<PathBuf>,
    /// JSON set that must be a balanced independent set.
    #[arg(long)]
    pub set: Option<PathBuf>,
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let h = load(&a.input)?;
    writeln!(
        out,
        "hypergraph ok: k={} parts={:?} edges={} max_degree={}",
        h.k(),
        h.part_sizes(),
        h.num_edges(),
        h.max_degree()
    )?;
    if let Some(path) = &a.set {
        let set =
            parse_set(&read(path)?).map_err(|e| Rejected(format!("{}: {e:#}", path.display())))?;
        if set.k() != h.k() {
            return Err(Rejected(format!(
                "{}: set has {} parts, hypergraph has {}",
                path.display(),
                set.k(),
                h.k()
            ))
            .into());
        }
        if !is_balanced_independent(&h, &set)? {
            return Err(Rejected(format!(
                "{}: not a balanced independent set",
                path.display()
            ))
            .into());
        }
        writeln!(out, "set ok: side={}", set.side())?;
    }
    if let Some(path) = &a.coloring {
        let c = parse_coloring(&read(path)?)
            .map_err(|e| Rejected(format!("{}: {e:#}", path.display())))?;
        let shape_ok = c.rows().len() == h.k()
            && c.rows()
                .iter()
                .zip(h.part_sizes())
                .all(|(r, &n)| r.len() == n);
        if !shape_ok {
            return Err(Rejected(format!(
                "{}: coloring shape does not match the hypergraph",
                path.display()
            ))
            .into());
        }
        let v = check_coloring(&h, &c);
        if !v.passes(true) {
            return Err(Rejected(format!(
                "{}: coloring rejected (total={}, proper={}, balanced={})",
                path.display(),
                v.total,
                v.proper,
                v.balanced
            ))
            .into());
        }
        writeln!(out, "coloring ok: colors={}", c.colors_used())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct BisArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    /// Defaults to ceil(8 / delta) from the parameter ledger.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report (stdout when no path is given).
    #[arg(long, num_args = 0..=1)]
    pub json: Option<Option<PathBuf>>,
}

#[derive(Serialize)]
struct BisReport<'a> {
    params: IndParams,
    trials: usize,
    best_trial: usize,
    side: usize,
    raw_sizes: Vec<usize>,
    /// Raw part sizes of every trial.
    trial_sizes: &'a [Vec<usize>],
    set: Vec<Vec<u32>>,
}

pub fn cmd_bis(a: &BisArgs, out: &mut dyn Write) -> Result<()> {
    let h = load(&a.input)?;
    let params = IndParams::for_hypergraph_clamped(&h, a.eps)?;
    let trials = a.trials.unwrap_or_else(|| params.default_trials());
    let best = best_of_trials(&h, &params, trials, a.seed)?;
    let set = &best.best.balanced;
    assert!(
        is_balanced_independent(&h, set)?,
        "procedure returned a dependent set"
    );
    let report = BisReport {
        params,
        trials,
        best_trial: best.best_trial,
        side: set.side(),
        raw_sizes: best.best.raw_sizes(),
        trial_sizes: &best.trial_sizes,
        set: set.parts().to_vec(),
    };
    emit_json(out, &a.json, &report)?;
    if !matches!(a.json, Some(None)) {
        writeln!(out, "side {}", set.side())?;
        writeln!(out, "best_trial {} of {trials}", best.best_trial)?;
        writeln!(out, "p {}", params.p)?;
        writeln!(out, "target {}", params.target)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct ColorArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub retries: usize,
    #[arg(long, default_value_t = 1000)]
    pub restarts: u64,
    /// Write the coloring as a JSON coloring file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report (stdout when no path is given).
    #[arg(long, num_args = 0..=1)]
    pub json: Option<Option<PathBuf>>,
}

#[derive(Serialize)]
struct ColorReport<'a> {
    palette: u32,
    q: Option<u32>,
    delta_tilde_eff: Option<usize>,
    retries_used: usize,
    path: ColoringPath,
    validator: &'a ColoringVerdict,
    per_class_sizes: &'a [usize],
    params: Option<ColParams>,
    attempts: &'a [AttemptRecord],
    notes: &'a [String],
    colors: Vec<Vec<u32>>,
}

pub fn cmd_color(a: &ColorArgs, out: &mut dyn Write) -> Result<()> {
    let h = load(&a.input)?;
    let opts = ColoringOptions {
        seed: a.seed,
        max_retries: a.retries,
        matching_restarts: a.restarts,
    };
    let rep = full_coloring(&h, a.eps, opts)?;
    if let Some(path) = &a.out {
        write_atomic(path, &to_json(&ColoringFile::new(&h, &rep.coloring))?)?;
    }
    let report = ColorReport {
        palette: rep.palette,
        q: rep.params.map(|p| p.q),
        delta_tilde_eff: rep.params.map(|p| p.delta_tilde_eff),
        retries_used: rep.retries_used,
        path: rep.path,
        validator: &rep.verdict,
        per_class_sizes: &rep.per_class_sizes,
        params: rep.params,
        attempts: &rep.attempts,
        notes: &rep.notes,
        colors: flat_colors(&rep.coloring),
    };
    emit_json(out, &a.json, &report)?;
    if !matches!(a.json, Some(None)) {
        writeln!(out, "colors {}", rep.palette)?;
        writeln!(out, "path {:?}", rep.path)?;
        writeln!(out, "retries {}", rep.retries_used)?;
        for note in &rep.notes {
            writeln!(out, "note {note}")?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct FallbackArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_fallback(a: &FallbackArgs, out: &mut dyn Write) -> Result<()> {
    let h = load(&a.input)?;
    let fb = fallback_coloring(&h, a.seed, a.restarts)?;
    emit(
        out,
        a.out.as_deref(),
        &to_json(&ColoringFile::new(&h, &fb.coloring))?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactWhat {
    /// Largest balanced independent set side.
    Alpha,
    /// Whether the k-partite complement has a perfect matching.
    Pm,
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub what: ExactWhat,
    /// Candidate sets (alpha) or search nodes (pm).
    #[arg(long)]
    pub budget: Option<u128>,
    /// Write the witness set (alpha only).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_exact(a: &ExactArgs, out: &mut dyn Write) -> Result<()> {
    let h = load(&a.input)?;
    match a.what {
        ExactWhat::Alpha => {
            let budget = a.budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET);
            let (alpha, witness) = exact_alpha_b(&h, budget)?;
            if let Some(path) = &a.out {
                write_atomic(path, &to_json(&SetFile::new(&witness))?)?;
            }
            writeln!(out, "{alpha}")?;
        }
        ExactWhat::Pm => {
            let budget = a
                .budget
                .map_or(DEFAULT_EXACT_NODES, |b| b.min(u64::MAX as u128) as u64);
            let found = exact_pm_complement(&h, budget)?;
            writeln!(out, "{}", if found.is_some() { "yes" } else { "no" })?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long = "N")]
    pub big_n: u64,
    #[arg(long)]
    pub s: u64,
    #[arg(long)]
    pub p: f64,
}

/// Scientific notation of `value`; when it is out of `f64` range the
/// mantissa and exponent come from `ln_value`.
pub fn format_bound(value: f64, ln_value: f64) -> String {
    if ln_value == f64::NEG_INFINITY {
        return "0e0".into();
    }
    if value.is_finite() && value > 0.0 {
        return format!("{value:.5e}");
    }
    let log10 = ln_value / std::f64::consts::LN_10;
    let mut exp = log10.floor();
    let mut mantissa = (10f64.powf(log10 - exp) * 1e5).round() / 1e5;
    if mantissa >= 10.0 {
        mantissa /= 10.0;
        exp += 1.0;
    }
    format!("{mantissa:.5}e{exp}")
}

pub fn cmd_bound(a: &BoundArgs, out: &mut dyn Write) -> Result<()> {
    let ln = ln_union_bound_bis(a.k, a.big_n, a.s, a.p)?;
    let value = union_bound_bis(a.k, a.big_n, a.s, a.p)?;
    writeln!(out, "{}", format_bound(value, ln))?;
    Ok(())
}

pub fn cmd_experiment(spec: &ExperimentSpec, out: &mut dyn Write) -> Result<()> {
    let outcome = run_experiment(spec)?;
    write_atomic(&spec.out, &render_trials(&outcome.trials, spec.format)?)?;
    let summary = render_summary(&outcome.summary, spec.format)?;
    emit(out, spec.summary.as_deref(), &summary)?;
    let failed: Vec<&str> = outcome
        .summary
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.check.as_str())
        .collect();
    if !failed.is_empty() {
        log::warn!("checks failed: {}", failed.join(", "));
    }
    Ok(())
}
