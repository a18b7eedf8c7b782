//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if
//! any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use balhyp::experiment::{
    instance, run_experiment, Cell, ExperimentSpec, Format, Mode, SummaryRow,
};
use balhyp_core::coloring::{available_colors, full_coloring, ColParams, ColoringOptions};
use balhyp_core::indep::{best_of_trials, exact_alpha_b, run_ind, IndParams};
use balhyp_core::matching::{exact_pm_complement, fallback_coloring, find_pm_complement};
use balhyp_core::models::{sample_hknp, union_bound_bis, DEFAULT_ENUMERATION_BUDGET};
use balhyp_core::rng::derive_seed;
use balhyp_core::sets::{is_balanced_independent, is_proper_balanced_coloring};
use balhyp_core::{KPartiteHypergraph, PartialColoring, Seed};

const SEED: u64 = 20_240_601;

/// Deterministic draws for instance parameters.
struct Draws(u64, u64);

impl Draws {
    fn new(tag: u64) -> Self {
        Draws(derive_seed(SEED, tag), 0)
    }
    fn next(&mut self) -> u64 {
        self.1 += 1;
        derive_seed(self.0, self.1)
    }
    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
    fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Random balanced instance with max degree at most n/2.
fn bounded_instance(
    d: &mut Draws,
    ks: &[usize],
    n_range: (usize, usize),
    stream: u64,
) -> KPartiteHypergraph {
    let k = ks[d.below(ks.len() as u64) as usize];
    let n = n_range.0 + d.below((n_range.1 - n_range.0 + 1) as u64) as usize;
    loop {
        let degree = 0.3 + d.unit() * (n as f64 / 3.0);
        let p = (degree / (n as f64).powi(k as i32 - 1)).min(1.0);
        let h = sample_hknp(k, n, p, Seed::new(SEED ^ 0xA5, stream ^ d.next())).unwrap();
        if 2 * h.max_degree() <= n {
            return h;
        }
    }
}

fn spec(mode: Mode, k: usize, n: usize, d: f64, trials: u32, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        mode,
        k: vec![k],
        n: vec![n],
        d: vec![d],
        eps: vec![0.5],
        s: vec![2],
        p: vec![0.5],
        q: None,
        trials,
        seed,
        retries: 50,
        restarts: 1000,
        budget: DEFAULT_ENUMERATION_BUDGET,
        out: PathBuf::new(),
        summary: None,
        format: Format::Csv,
        timing: false,
    }
}

fn find<'a>(rows: &'a [SummaryRow], check: &str) -> &'a SummaryRow {
    rows.iter()
        .find(|r| r.check == check)
        .unwrap_or_else(|| panic!("no {check} row"))
}

fn show(r: &SummaryRow) -> String {
    format!(
        "{} lhs={:.6} rhs={:.6} tol={:.6} {}",
        r.check,
        r.lhs,
        r.rhs.unwrap_or(f64::NAN),
        r.tol.unwrap_or(f64::NAN),
        r.verdict
    )
}

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn validity() -> Outcome {
    let mut d = Draws::new(1);
    let cases = 10_000u64;
    let (mut ind_bad, mut full_bad, mut fb_bad, mut errors) = (0, 0, 0, 0);
    let mut main_path = 0;
    for i in 0..cases {
        let h = match i % 3 {
            0 => bounded_instance(&mut d, &[2], (4, 24), i),
            1 => bounded_instance(&mut d, &[3], (4, 16), i),
            _ => bounded_instance(&mut d, &[4], (4, 10), i),
        };
        let p = IndParams::for_hypergraph_clamped(&h, 0.5).unwrap().p;
        let out = run_ind(&h, p, Seed::new(SEED, i)).unwrap();
        if !is_balanced_independent(&h, &out.balanced).unwrap() {
            ind_bad += 1;
        }
        let opts = ColoringOptions {
            seed: SEED ^ i,
            max_retries: 3,
            matching_restarts: 200,
        };
        match full_coloring(&h, 0.5, opts) {
            Ok(rep) => {
                main_path += (rep.path == balhyp_core::coloring::ColoringPath::Main) as u32;
                if !is_proper_balanced_coloring(&h, &rep.coloring, true) {
                    full_bad += 1;
                }
            }
            Err(_) => errors += 1,
        }
        match fallback_coloring(&h, SEED ^ i, 200) {
            Ok(fb) => {
                if !is_proper_balanced_coloring(&h, &fb.coloring, true) {
                    fb_bad += 1;
                }
            }
            Err(_) => errors += 1,
        }
    }
    let ok = ind_bad + full_bad + fb_bad + errors == 0;
    (
        ok,
        format!("{cases} cases; invalid ind={ind_bad} full={full_bad} fallback={fb_bad}; errors={errors}; main-path colorings={main_path}"),
    )
}

fn oracle_dominance() -> Outcome {
    let mut d = Draws::new(2);
    let mut violations = 0;
    for i in 0..1000u64 {
        let k = 2 + d.below(2) as usize;
        let n = 1 + d.below(6) as usize;
        let p = d.unit() * 0.6;
        let h = sample_hknp(k, n, p, Seed::new(SEED ^ 2, i)).unwrap();
        let (alpha, _) = exact_alpha_b(&h, u128::MAX).unwrap();
        let params = IndParams::for_hypergraph_clamped(&h, 0.5).unwrap();
        let best = best_of_trials(&h, &params, 20, SEED ^ i).unwrap();
        violations += best.sides().iter().filter(|&&s| s > alpha).count();
    }
    let (mut edgeless_hits, mut one_edge_hits) = (0, 0);
    let controls = 100u64;
    for i in 0..controls {
        let k = 2 + d.below(2) as usize;
        let n = 1 + d.below(6) as usize;
        let empty = KPartiteHypergraph::empty(k, n).unwrap();
        let edge: Vec<u32> = (0..k).map(|_| d.below(n as u64) as u32).collect();
        let one = KPartiteHypergraph::balanced(k, n, vec![edge]).unwrap();
        for (h, hits) in [(&empty, &mut edgeless_hits), (&one, &mut one_edge_hits)] {
            let (alpha, _) = exact_alpha_b(h, u128::MAX).unwrap();
            let params = IndParams::for_hypergraph_clamped(h, 0.5).unwrap();
            let best = best_of_trials(h, &params, 200, SEED ^ i).unwrap();
            *hits += (best.best.side() == alpha) as u64;
        }
    }
    let ok = violations == 0 && edgeless_hits == controls && one_edge_hits * 10 >= controls * 6;
    (
        ok,
        format!(
            "1000 instances, {violations} trials above the oracle; edgeless controls {edgeless_hits}/{controls}; one-edge controls {one_edge_hits}/{controls}"
        ),
    )
}

fn matching_bound() -> Outcome {
    let mut d = Draws::new(3);
    let (mut found, mut over, total) = (0, 0, 500);
    for i in 0..total {
        let h = bounded_instance(&mut d, &[2, 3], (2, 64), i);
        if let Ok(fb) = fallback_coloring(&h, SEED ^ i, 2000) {
            found += 1;
            if fb.colors() as usize > h.k() * h.max_degree() + 1 {
                over += 1;
            }
        }
    }
    let (mut agree, mut tiny, mut exact_yes) = (0, 0, 0);
    for i in 0..500u64 {
        let k = 2 + d.below(2) as usize;
        let n = 1 + d.below(4) as usize;
        let p = d.unit();
        let h = sample_hknp(k, n, p, Seed::new(SEED ^ 3, i)).unwrap();
        let exact = exact_pm_complement(&h, u64::MAX).unwrap().is_some();
        let search = find_pm_complement(&h, SEED ^ i, 2000).is_ok();
        exact_yes += exact as u32;
        tiny += 1;
        agree += (exact == search) as u32;
    }
    let ok = found == total && over == 0 && agree == tiny;
    (
        ok,
        format!(
            "matching found on {found}/{total} instances with max degree <= n/2, {over} above kΔ+1; tiny agreement {agree}/{tiny} ({exact_yes} with a matching)"
        ),
    )
}

fn harris() -> Outcome {
    let bis = run_experiment(&spec(Mode::Bis, 2, 256, 32.0, 5000, SEED)).unwrap();
    let col = run_experiment(&spec(Mode::Concentration, 2, 256, 32.0, 5000, SEED)).unwrap();
    let l34 = find(&bis.summary, "ind_harris");
    let c421 = find(&col.summary, "uncolored_harris");

    // Recompute both right-hand sides from the instance.
    let cell = Cell {
        index: 0,
        k: 2,
        n: 256,
        d: Some(32.0),
        eps: Some(0.5),
        s: None,
        p: None,
    };
    let h = instance(SEED, &cell).unwrap();
    let p = IndParams::for_hypergraph(&h, 0.5).unwrap().p;
    let expected: f64 = (0..256)
        .map(|v| (1.0 - p).powi(h.degree(1, v) as i32))
        .sum();
    let q = ColParams::new(2, 0.5, h.max_degree(), 256).unwrap().q;
    let lost = 1.0 - (1.0 - 1.0 / q as f64).powi(h.max_degree() as i32);
    let rhs_ok =
        (l34.rhs.unwrap() - expected).abs() < 1e-9 && (c421.rhs.unwrap() - lost).abs() < 1e-12;
    let ok = rhs_ok && l34.verdict == "pass" && c421.verdict == "pass";
    (
        ok,
        format!(
            "q={q}; {}; {}; independent rhs agree={rhs_ok}",
            show(l34),
            show(c421)
        ),
    )
}

fn negative_correlation() -> Outcome {
    // Last-part degrees 1, 2, 3.
    let edges = vec![
        vec![0, 0],
        vec![0, 1],
        vec![1, 1],
        vec![0, 2],
        vec![1, 2],
        vec![2, 2],
    ];
    let h = KPartiteHypergraph::balanced(2, 3, edges).unwrap();
    let q = 2u32;
    let outcomes = 1u32 << 6;
    let mut empty = [0u32; 3];
    let mut lost = [[0u32; 2]; 3];
    for mask in 0..outcomes {
        let colors: Vec<Vec<Option<u32>>> = (0..2)
            .map(|part| {
                (0..3)
                    .map(|v| Some(1 + ((mask >> (part * 3 + v)) & 1)))
                    .collect()
            })
            .collect();
        let phi = PartialColoring::from_colors(q, colors).unwrap();
        for v in 0..3u32 {
            let list = available_colors(&h, &phi, v);
            empty[v as usize] += list.is_empty() as u32;
            for c in 1..=q {
                lost[v as usize][c as usize - 1] += (!list.contains(&c)) as u32;
            }
        }
    }
    let mut ok = true;
    let mut detail = Vec::new();
    for v in 0..3 {
        let pe = empty[v] as f64 / outcomes as f64;
        let prod: f64 = lost[v]
            .iter()
            .map(|&x| x as f64 / outcomes as f64)
            .product();
        // Closed forms for k = 2, q = 2 at degree v + 1.
        let deg = v as i32 + 1;
        let closed = (1.0 - 0.5f64.powi(deg - 1)).max(0.0);
        let closed_prod = (1.0 - 0.5f64.powi(deg)).powi(2);
        ok &=
            pe <= prod + 1e-12 && (pe - closed).abs() < 1e-12 && (prod - closed_prod).abs() < 1e-12;
        detail.push(format!("deg {deg}: P[empty]={pe} <= {prod}"));
    }
    (ok, format!("{outcomes} outcomes; {}", detail.join("; ")))
}

fn union_bound() -> Outcome {
    let (k, big_n, s) = (2usize, 10u64, 4u64);
    let c = 210f64 * 210.0;
    let p = 1.0 - (0.2 / c).powf(1.0 / 16.0);
    let bound = union_bound_bis(k, big_n, s, p).unwrap();
    let mut sp = spec(Mode::Bound, k, big_n as usize, 0.0, 2000, SEED);
    sp.s = vec![s as usize];
    sp.p = vec![p];
    let out = run_experiment(&sp).unwrap();
    let row = find(&out.summary, "bis_union_bound");
    let in_range = (0.05..=0.5).contains(&bound);
    let ok = in_range && row.verdict == "pass";
    (
        ok,
        format!(
            "p={p:.6} bound={bound:.6} in [0.05, 0.5]={in_range}; {}",
            show(row)
        ),
    )
}

fn concentration() -> Outcome {
    let bis = run_experiment(&spec(Mode::Bis, 3, 128, 16.0, 2000, SEED ^ 7)).unwrap();
    let col = run_experiment(&spec(Mode::Concentration, 3, 128, 16.0, 2000, SEED ^ 7)).unwrap();
    let rows: Vec<&SummaryRow> = bis
        .summary
        .iter()
        .chain(&col.summary)
        .filter(|r| r.check.starts_with("ind_side") || r.check.starts_with("class_size"))
        .collect();
    let ok = rows.len() == 4 && rows.iter().all(|r| r.verdict == "pass");
    (
        ok,
        rows.iter().map(|r| show(r)).collect::<Vec<_>>().join("; "),
    )
}

fn determinism() -> Outcome {
    let failures: Vec<String> = common::CASES
        .iter()
        .filter_map(|c| common::check_case(c).err())
        .collect();
    let subcommands: std::collections::BTreeSet<&str> =
        common::CASES.iter().map(|c| c.args[0]).collect();
    let ok = failures.is_empty() && common::CASES.len() >= 10 && subcommands.len() == 8;
    (
        ok,
        format!(
            "{} goldens over {} subcommands; failures: {failures:?}",
            common::CASES.len(),
            subcommands.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 validity suite", validity),
        ("2 oracle dominance", oracle_dominance),
        ("3 matching coloring bound", matching_bound),
        ("4 harris-type inequalities", harris),
        ("5 negative correlation (exact)", negative_correlation),
        ("6 union-bound consistency", union_bound),
        ("7 binomial concentration", concentration),
        ("8 determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        failed += !ok as u32;
        println!(
            "{} criterion {name} [{:.1}s]: {detail}",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
