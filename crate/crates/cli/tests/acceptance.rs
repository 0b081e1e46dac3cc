//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::{mean, RawEnsemble};
use eir_core::{
    bound_table, class_mass, competence_check, diagnostics, error_profile, make_pathology, CompetenceGrid,
    DiagnosticsReport, Exact, PathologySpec, PredictionMatrix, TieRule,
};
use eir_lab::logistic::Problem;
use eir_lab::{LinearModel, SweepConfig, SweepResult};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS_SEED: u64 = 20_240_601;
const CORPUS_SIZE: usize = 10_000;

/// Metric agreement with the brute-force oracles.
const ORACLE_TOL: f64 = 1e-10;
/// Slack on theorem inequalities and exact identities in `f64`.
const THEOREM_TOL: f64 = 1e-12;
/// Tie detection inside the majority-vote oracle.
const TIE_TOL: f64 = 1e-12;
const ORACLE_BUDGET: Duration = Duration::from_secs(30);
const SWEEP_BUDGET: Duration = Duration::from_secs(300);
const CART_CONSTANT_TOL: f64 = 1e-9;
const GRADIENT_REL_TOL: f64 = 1e-5;
const GRADIENT_CASES: u64 = 50;
const FD_STEP: f64 = 1e-5;
const TIGHTNESS_EPS: f64 = 1e-4;
const TIGHTNESS_RATIO: f64 = 1.999;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Entry {
    raw: RawEnsemble,
    pm: PredictionMatrix<f64>,
    lowest: DiagnosticsReport<f64>,
    pessimistic: DiagnosticsReport<f64>,
    competent: bool,
}

fn workspace_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b != 0.0).then(|| a / b)
}

fn close_opt(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() <= tol,
        (None, None) => true,
        _ => false,
    }
}

fn criterion_1(corpus: &[Entry], elapsed: Duration) -> Outcome {
    let mut mismatches = Vec::new();
    for (idx, e) in corpus.iter().enumerate() {
        let raw = &e.raw;
        let avg = common::oracle_avg_error(raw);
        let dis = common::oracle_pairwise_disagreement(raw);
        let margins = common::oracle_margins(raw);
        let sq: Vec<f64> = margins.iter().map(|v| v * v).collect();
        for (rule, r) in [(TieRule::LowestIndex, &e.lowest), (TieRule::Pessimistic, &e.pessimistic)] {
            let mv = common::oracle_mv_error(raw, rule, TIE_TOL);
            let ok = (r.avg_error - avg).abs() <= ORACLE_TOL
                && (r.mv_error - mv).abs() <= ORACLE_TOL
                && (r.disagreement - dis).abs() <= ORACLE_TOL
                && (r.tandem - common::oracle_tandem(raw)).abs() <= ORACLE_TOL
                && (r.margin_mean - mean(&margins)).abs() <= ORACLE_TOL
                && (r.margin_sq_mean - mean(&sq)).abs() <= ORACLE_TOL
                && close_opt(r.eir, ratio(avg - mv, avg), ORACLE_TOL)
                && close_opt(r.der, ratio(dis, avg), ORACLE_TOL);
            if !ok {
                mismatches.push((idx, rule));
            }
        }
    }
    Outcome::new(
        mismatches.is_empty() && elapsed < ORACLE_BUDGET,
        format!(
            "{} ensembles x 2 tie rules, {} mismatches (first: {:?}), metrics in {:.2?} (budget {:?})",
            corpus.len(),
            mismatches.len(),
            mismatches.first(),
            elapsed,
            ORACLE_BUDGET
        ),
    )
}

fn criterion_2(corpus: &[Entry]) -> Outcome {
    let competent: Vec<&Entry> = corpus.iter().filter(|e| e.competent).collect();
    let bad = competent
        .iter()
        .filter(|e| e.pessimistic.eir.is_some_and(|v| v < -THEOREM_TOL))
        .count();
    let worst = competent
        .iter()
        .filter_map(|e| e.pessimistic.eir)
        .fold(f64::INFINITY, f64::min);
    Outcome::new(
        bad == 0 && !competent.is_empty(),
        format!(
            "{} competent ensembles, {bad} with EIR < -{THEOREM_TOL:e}, min EIR {worst:.6}",
            competent.len()
        ),
    )
}

fn criterion_3(corpus: &[Entry]) -> Outcome {
    let mut competent_bad = 0;
    let mut competent_n = 0;
    let mut upper_bad = 0;
    for e in corpus {
        for r in [&e.lowest, &e.pessimistic] {
            if let (Some(eir), Some(der)) = (r.eir, r.der) {
                upper_bad += (eir > der + THEOREM_TOL) as usize;
            }
        }
        if !e.competent {
            continue;
        }
        let r = &e.pessimistic;
        let (Some(eir), Some(der)) = (r.eir, r.der) else { continue };
        competent_n += 1;
        let k = r.num_classes as f64;
        let lower = 2.0 * (k - 1.0) / k * der - (3.0 * k - 4.0) / k;
        if !(lower - THEOREM_TOL <= eir && eir <= der + THEOREM_TOL) {
            competent_bad += 1;
        }
    }
    Outcome::new(
        competent_bad == 0 && upper_bad == 0 && competent_n > 0,
        format!(
            "two-sided on {competent_n} competent: {competent_bad} violations; EIR <= DER on all ensembles, both tie rules: {upper_bad} violations"
        ),
    )
}

fn criterion_4(corpus: &[Entry]) -> Outcome {
    let mut worst_tandem: f64 = 0.0;
    let mut worst_dis: f64 = 0.0;
    for e in corpus {
        let w = common::oracle_error_mass(&e.raw);
        let w_sq: Vec<f64> = w.iter().map(|v| v * v).collect();
        worst_tandem = worst_tandem.max((mean(&w_sq) - e.lowest.tandem).abs());

        let mass = class_mass(&e.pm);
        let purity: Vec<f64> = mass.rows().map(|row| 1.0 - row.iter().map(|p| p * p).sum::<f64>()).collect();
        worst_dis = worst_dis.max((mean(&purity) - e.lowest.disagreement).abs());
    }
    Outcome::new(
        worst_tandem <= THEOREM_TOL && worst_dis <= THEOREM_TOL,
        format!("max |E[W^2] - tandem| = {worst_tandem:.2e}, max |E[1 - |mass|^2] - dis| = {worst_dis:.2e}"),
    )
}

fn strictly_incompetent(pm: &PredictionMatrix<f64>) -> bool {
    !competence_check(&error_profile(pm), &CompetenceGrid::Auto, 0.0)
        .expect("non-empty")
        .competent
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    for (eps, m) in [(0.1_f64, 10), (0.01, 7), (0.3, 25), (TIGHTNESS_EPS, 10)] {
        let pm = make_pathology(&PathologySpec::example1(eps, m)).expect("valid example1");
        let r = diagnostics(&pm, TieRule::LowestIndex);
        if (r.avg_error - (0.5 + eps)).abs() > THEOREM_TOL || r.mv_error != 1.0 || !strictly_incompetent(&pm) {
            failures.push(format!("example1(eps={eps}, m={m})"));
        }
    }
    let pm = make_pathology(&PathologySpec::example1(TIGHTNESS_EPS, 10)).expect("valid example1");
    let r = diagnostics(&pm, TieRule::LowestIndex);
    let tightness = r.mv_error / r.avg_error;
    if tightness < TIGHTNESS_RATIO {
        failures.push(format!("mv/avg = {tightness}"));
    }

    for (delta, eps, m) in [(0.1_f64, 0.05_f64, 10), (0.25, 0.1, 20), (0.05, 0.2, 100), (0.3, 0.01, 5)] {
        let pm = make_pathology(&PathologySpec::example2(delta, eps, m)).expect("valid example2");
        let r = diagnostics(&pm, TieRule::LowestIndex);
        let ok = (r.avg_error - delta * (1.0 + 2.0 * eps)).abs() <= THEOREM_TOL
            && (r.mv_error - 2.0 * delta).abs() <= THEOREM_TOL
            && (r.margin_mean - (1.0 - 2.0 * delta * (1.0 + 2.0 * eps))).abs() <= THEOREM_TOL
            && strictly_incompetent(&pm);
        if !ok {
            failures.push(format!("example2(delta={delta}, eps={eps}, m={m})"));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!("mv/avg at eps={TIGHTNESS_EPS:e} is {tightness:.6}; failures: {failures:?}"),
    )
}

/// Rebuilds a binary ensemble with small integer weights in exact arithmetic.
fn exact_binary(raw: &RawEnsemble, rng: &mut ChaCha8Rng) -> PredictionMatrix<Exact> {
    let ints: Vec<i64> = raw.preds.iter().map(|_| rng.random_range(1..=20)).collect();
    let total: i64 = ints.iter().sum();
    let weights = ints.iter().map(|&w| Exact::new(w, total)).collect();
    PredictionMatrix::new(raw.preds.clone(), raw.labels.clone(), raw.k, Some(weights)).expect("valid")
}

fn criterion_6(corpus: &[Entry]) -> Outcome {
    let mut bad = 0;
    let mut competent = 0;
    let mut identity_bad = 0;
    let mut binary = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED ^ 6);
    for e in corpus {
        if e.competent {
            competent += 1;
            let verdict = competence_check(&error_profile(&e.pm), &CompetenceGrid::Auto, 0.0).expect("non-empty");
            let t = bound_table(&e.lowest, &verdict);
            let mv = e.lowest.mv_error;
            let ok = mv <= t.second_order_ub + THEOREM_TOL
                && mv <= t.competent_ub + THEOREM_TOL
                && t.competent_ub <= t.first_order_ub + THEOREM_TOL
                && t.mv_lower <= mv + THEOREM_TOL;
            bad += (!ok) as usize;
        }
        if e.raw.k == 2 {
            binary += 1;
            let pm = exact_binary(&e.raw, &mut rng);
            let report = diagnostics(&pm, TieRule::LowestIndex);
            let verdict = competence_check(&error_profile(&pm), &CompetenceGrid::Auto, Exact::new(0, 1)).expect("non-empty");
            let t = bound_table(&report, &verdict);
            if Some(t.second_order_ub * Exact::new(2, 1)) != t.prior_binary_ub {
                identity_bad += 1;
            }
        }
    }
    Outcome::new(
        bad == 0 && identity_bad == 0 && competent > 0 && binary > 0,
        format!(
            "ordering on {competent} competent: {bad} violations; exact K=2 identity on {binary} binary: {identity_bad} violations"
        ),
    )
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn run_sweep_single_threaded(config: &str) -> (SweepResult, Duration) {
    let path = workspace_file(config);
    let cfg = SweepConfig::from_json(&std::fs::read_to_string(&path).expect("config exists")).expect("valid config");
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
    let start = Instant::now();
    let res = pool
        .install(|| cfg.run(path.parent().expect("has parent")))
        .expect("sweep runs");
    (res, start.elapsed())
}

fn criterion_7() -> Outcome {
    let (res, elapsed) = run_sweep_single_threaded("configs/random_features.json");
    let Some(t) = res.threshold_index() else {
        return Outcome::new(false, format!("no interpolation threshold, {elapsed:.2?}"));
    };
    let der: Vec<f64> = res.rows.iter().map(|r| r.der.unwrap_or(f64::NAN)).collect();
    let eir: Vec<f64> = res.rows.iter().map(|r| r.eir.unwrap_or(f64::NAN)).collect();
    let (der_peak, eir_peak) = (argmax(&der), argmax(&eir));
    let last = der.len() - 1;
    let pass = der_peak.abs_diff(t) <= 1 && eir_peak.abs_diff(t) <= 1 && der[last] < der[t] && elapsed < SWEEP_BUDGET;
    let caps = |i: usize| res.rows[i].capacity;
    Outcome::new(
        pass,
        format!(
            "threshold N={}, DER peak N={} ({:.4}), EIR peak N={} ({:.4}), DER final {:.4} vs threshold {:.4}, {elapsed:.2?} single-threaded",
            caps(t),
            caps(der_peak),
            der[der_peak],
            caps(eir_peak),
            eir[eir_peak],
            der[last],
            der[t]
        ),
    )
}

fn criterion_8() -> Outcome {
    let (res, elapsed) = run_sweep_single_threaded("configs/cart.json");
    let Some(t) = res.threshold_index() else {
        return Outcome::new(false, format!("no interpolation threshold, {elapsed:.2?}"));
    };
    let base = &res.rows[t];
    let spread = res.rows[t..]
        .iter()
        .map(|r| {
            let d = |a: Option<f64>, b: Option<f64>| match (a, b) {
                (Some(x), Some(y)) => (x - y).abs(),
                _ => f64::INFINITY,
            };
            d(r.eir, base.eir).max(d(r.der, base.der))
        })
        .fold(0.0, f64::max);
    Outcome::new(
        spread <= CART_CONSTANT_TOL && elapsed < SWEEP_BUDGET && t + 1 < res.rows.len(),
        format!(
            "threshold max_leaf_nodes={}, max EIR/DER drift past it {spread:.2e}, {elapsed:.2?}",
            base.capacity
        ),
    )
}

fn uniform_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-2.0..2.0))
}

fn flatten(m: &LinearModel) -> Vec<f64> {
    m.weights.iter().chain(&m.biases).copied().collect()
}

fn criterion_9() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..GRADIENT_CASES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, d) = (5, 8);
        let k = rng.random_range(2..=4);
        let z = uniform_matrix(n, d, &mut rng);
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let sw: Vec<f64> = (0..n).map(|_| rng.random_range(1..=3) as f64).collect();
        let l2 = rng.random_range(0.0..0.5);
        let problem = Problem::new(z.view(), &y, Some(&sw), k, l2).expect("valid instance");
        let at = LinearModel {
            weights: uniform_matrix(k, d, &mut rng),
            biases: (0..k).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        let analytic = flatten(&problem.gradient(&at));
        let mut numeric = Vec::with_capacity(analytic.len());
        for idx in 0..analytic.len() {
            let shifted = |delta: f64| {
                let mut m = at.clone();
                if idx < k * d {
                    m.weights[[idx / d, idx % d]] += delta;
                } else {
                    m.biases[idx - k * d] += delta;
                }
                problem.objective(&m)
            };
            numeric.push((shifted(FD_STEP) - shifted(-FD_STEP)) / (2.0 * FD_STEP));
        }
        let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = numeric.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        worst = worst.max(diff / norm);
    }
    Outcome::new(
        worst <= GRADIENT_REL_TOL,
        format!("{GRADIENT_CASES} instances of 5x8, max relative error {worst:.2e}"),
    )
}

fn run_cli(out: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_eir"))
        .arg("--out")
        .arg(out)
        .arg("--seed")
        .arg("3")
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn criterion_10() -> Outcome {
    let e1 = workspace_file("data/e1.csv");
    let rf = workspace_file("configs/random_features.json");
    let cart = workspace_file("configs/cart.json");
    let runs: [(&[&str], &[&str]); 3] = [
        (&["analyze", e1.to_str().unwrap()], &["report.json", "bounds.csv", "competence.csv"]),
        (&["train-sweep", rf.to_str().unwrap()], &["sweep.csv", "sweep.json"]),
        (&["train-sweep", cart.to_str().unwrap()], &["sweep.csv", "sweep.json"]),
    ];
    let mut compared = 0;
    let mut differing = Vec::new();
    for (args, files) in runs {
        let a = tempfile::tempdir().expect("tempdir");
        let b = tempfile::tempdir().expect("tempdir");
        if !run_cli(a.path(), args) || !run_cli(b.path(), args) {
            return Outcome::new(false, format!("`eir {}` failed", args.join(" ")));
        }
        for f in files {
            let read = |dir: &Path| std::fs::read(dir.join(f)).unwrap_or_default();
            compared += 1;
            let (x, y) = (read(a.path()), read(b.path()));
            if x.is_empty() || x != y {
                differing.push(format!("{} {f}", args[0]));
            }
        }
    }
    Outcome::new(
        differing.is_empty(),
        format!("{compared} files compared across two runs, differing: {differing:?}"),
    )
}

fn main() {
    let raws = common::corpus(CORPUS_SEED, CORPUS_SIZE);
    let start = Instant::now();
    let corpus: Vec<Entry> = raws
        .into_iter()
        .map(|raw| {
            let pm = raw.matrix();
            let lowest = diagnostics(&pm, TieRule::LowestIndex);
            let pessimistic = diagnostics(&pm, TieRule::Pessimistic);
            let competent = competence_check(&error_profile(&pm), &CompetenceGrid::Auto, 0.0)
                .expect("non-empty")
                .competent;
            Entry {
                raw,
                pm,
                lowest,
                pessimistic,
                competent,
            }
        })
        .collect();
    let metrics_time = start.elapsed();

    let criteria: Vec<(&str, Criterion)> = vec![
        ("oracle equivalence", Box::new(|| criterion_1(&corpus, metrics_time))),
        ("competent ensembles never hurt", Box::new(|| criterion_2(&corpus))),
        ("EIR between its DER bounds", Box::new(|| criterion_3(&corpus))),
        ("tandem and disagreement identities", Box::new(|| criterion_4(&corpus))),
        ("pathological closed forms", Box::new(criterion_5)),
        ("bound ordering", Box::new(|| criterion_6(&corpus))),
        ("random-features sweep peaks at threshold", Box::new(criterion_7)),
        ("CART sweep flat past threshold", Box::new(criterion_8)),
        ("logistic gradient check", Box::new(criterion_9)),
        ("byte-identical CLI outputs", Box::new(criterion_10)),
    ];

    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        failed += (!outcome.pass) as usize;
        println!(
            "[{}] criterion {:>2}: {name}: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
