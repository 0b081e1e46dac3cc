use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use eir_core::bounds::{bound_comparison, checks_to_csv, comparison_to_csv};
use eir_core::competence::{competence_curve, curve_to_csv};
use eir_core::plot::{LineChart, Series};
use eir_core::{
    error_profile, load_predictions, make_pathology, pathology_audit, verify_bounds_with_slack, BoundVerification,
    CompetenceVerdict, CurvePoint, PathologySpec, PredictionFormat, PredictionMatrix,
};
use eir_lab::{sweep, LabError, SweepConfig, SweepResult};

use crate::output::{
    config_error, fmt_opt, AnalysisReport, BoundsReport, CompetenceReport, EnsembleChecks, OutDir, SCHEMA_VERSION,
};
use crate::{Global, PathologyArg};

const STRICT_FAILURE: u8 = 3;

fn load(path: &Path) -> Result<PredictionMatrix<f64>> {
    let format = PredictionFormat::from_path(path)
        .with_context(|| format!("{}: expected a .csv or .json prediction file", path.display()))?;
    load_predictions(path, format).with_context(|| format!("reading {}", path.display()))
}

fn checked_slack(g: &Global) -> Result<f64> {
    if g.slack.is_finite() && g.slack >= 0.0 {
        Ok(g.slack)
    } else {
        Err(config_error(format!("--slack must be finite and non-negative, got {}", g.slack)))
    }
}

fn verdict_points(v: &CompetenceVerdict<f64>) -> Vec<CurvePoint<f64>> {
    v.t_grid
        .iter()
        .zip(&v.lhs)
        .zip(&v.rhs)
        .map(|((&t, &lhs), &rhs)| CurvePoint { t, lhs, rhs })
        .collect()
}

fn competence_chart(title: &str, points: &[CurvePoint<f64>]) -> LineChart {
    LineChart {
        title: title.to_string(),
        x_label: "t".into(),
        y_label: "probability".into(),
        log_x: false,
        series: vec![
            Series::new("P(t ≤ W < 1/2)", points.iter().map(|p| (p.t, p.lhs)).collect()),
            Series::new("P(1/2 ≤ W ≤ 1-t)", points.iter().map(|p| (p.t, p.rhs)).collect()),
        ],
        markers: Vec::new(),
    }
}

fn print_verdict(v: &CompetenceVerdict<f64>) {
    if v.competent {
        println!("competent (max violation {:.3e}, slack {})", v.max_violation, v.slack);
    } else {
        println!(
            "not competent: violation {:.6} at t = {} exceeds slack {}",
            v.max_violation,
            fmt_opt(v.violation_t),
            v.slack
        );
    }
}

/// Applies `--strict`: bound failures are only meaningful when the ensemble
/// is competent.
fn strict_outcome(g: &Global, verifications: &[(&str, &BoundVerification<f64>)]) -> ExitCode {
    if !g.strict {
        return ExitCode::SUCCESS;
    }
    let mut failed = false;
    for (name, v) in verifications {
        if !v.verdict.competent {
            println!("{name}: not competent, bound checks skipped");
            continue;
        }
        for c in v.failures() {
            failed = true;
            eprintln!(
                "{name}: {} violated: bound {} vs observed {} ({})",
                c.bound,
                fmt_opt(c.value),
                fmt_opt(c.observed),
                c.target
            );
        }
    }
    if failed {
        ExitCode::from(STRICT_FAILURE)
    } else {
        ExitCode::SUCCESS
    }
}

pub fn analyze(input: &Path, g: &Global) -> Result<ExitCode> {
    let slack = checked_slack(g)?;
    let pm = load(input)?;
    let v = verify_bounds_with_slack(&pm, g.tie_rule(), slack);
    let out = OutDir::create(&g.out)?;

    let points = verdict_points(&v.verdict);
    if g.json() {
        let report = AnalysisReport {
            schema_version: SCHEMA_VERSION,
            input: input.display().to_string(),
            tie_rule: g.tie_rule(),
            diagnostics: v.report.clone(),
            competence: v.verdict.clone(),
            bounds: v.table.clone(),
            checks: v.checks.clone(),
        };
        out.write_json("report.json", &report)?;
    }
    if g.csv() {
        out.write("bounds.csv", &checks_to_csv(&v.checks))?;
        out.write("competence.csv", &curve_to_csv(&points))?;
    }
    if g.svg {
        out.write("competence.svg", &competence_chart("Competence", &points).to_svg())?;
    }

    let r = &v.report;
    println!(
        "M={} m={} K={}",
        pm.num_classifiers(),
        pm.num_examples(),
        pm.num_classes()
    );
    println!("avg_error     {:.6}", r.avg_error);
    println!("mv_error      {:.6}", r.mv_error);
    println!("disagreement  {:.6}", r.disagreement);
    println!("tandem        {:.6}", r.tandem);
    println!("eir           {}", fmt_opt(r.eir));
    println!("der           {}", fmt_opt(r.der));
    print_verdict(&v.verdict);
    Ok(strict_outcome(g, &[(&input.display().to_string(), &v)]))
}

pub fn competence(input: &Path, points: usize, g: &Global) -> Result<ExitCode> {
    let slack = checked_slack(g)?;
    if points < 2 {
        return Err(config_error("--points must be at least 2"));
    }
    let pm = load(input)?;
    let v = verify_bounds_with_slack(&pm, g.tie_rule(), slack);
    let curve = competence_curve(&error_profile(&pm), points)?;
    let out = OutDir::create(&g.out)?;
    if g.json() {
        let report = CompetenceReport {
            schema_version: SCHEMA_VERSION,
            input: input.display().to_string(),
            verdict: v.verdict.clone(),
            curve: curve.clone(),
        };
        out.write_json("competence.json", &report)?;
    }
    if g.csv() {
        out.write("competence.csv", &curve_to_csv(&verdict_points(&v.verdict)))?;
        out.write("competence_curve.csv", &curve_to_csv(&curve))?;
    }
    if g.svg {
        out.write("competence.svg", &competence_chart("Competence", &curve).to_svg())?;
    }
    print_verdict(&v.verdict);
    if g.strict && !v.verdict.competent {
        return Ok(ExitCode::from(STRICT_FAILURE));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn bounds(inputs: &[PathBuf], g: &Global) -> Result<ExitCode> {
    let slack = checked_slack(g)?;
    let named: Vec<(String, PredictionMatrix<f64>)> = inputs
        .iter()
        .map(|p| Ok((p.display().to_string(), load(p)?)))
        .collect::<Result<_>>()?;
    let verifications: Vec<BoundVerification<f64>> = named
        .iter()
        .map(|(_, pm)| verify_bounds_with_slack(pm, g.tie_rule(), slack))
        .collect();
    let comparison = bound_comparison(&named);
    let out = OutDir::create(&g.out)?;
    if g.json() {
        let report = BoundsReport {
            schema_version: SCHEMA_VERSION,
            tie_rule: g.tie_rule(),
            ensembles: named
                .iter()
                .zip(&verifications)
                .map(|((name, _), v)| EnsembleChecks {
                    input: name.clone(),
                    competent: v.verdict.competent,
                    bounds: v.table.clone(),
                    checks: v.checks.clone(),
                })
                .collect(),
            comparison: comparison.clone(),
        };
        out.write_json("bounds.json", &report)?;
    }
    if g.csv() {
        out.write("comparison.csv", &comparison_to_csv(&comparison))?;
        if let [only] = verifications.as_slice() {
            out.write("bounds.csv", &checks_to_csv(&only.checks))?;
        }
    }

    println!("{:<30} {:>10} {:>10} {:>10}  tighter", "ensemble", "mv_error", "ours", "c_bound");
    for (row, v) in comparison.iter().zip(&verifications) {
        println!(
            "{:<30} {:>10.6} {:>10.6} {:>10}  {}",
            row.ensemble_id,
            v.report.mv_error,
            row.ours,
            row.c_bound.map_or("n/a".to_string(), |c| format!("{c:.6}")),
            row.tighter.as_str()
        );
    }
    let pairs: Vec<(&str, &BoundVerification<f64>)> =
        named.iter().map(|(n, _)| n.as_str()).zip(&verifications).collect();
    Ok(strict_outcome(g, &pairs))
}

pub fn pathological(
    kind: PathologyArg,
    epsilon: f64,
    delta: Option<f64>,
    m: usize,
    g: &Global,
) -> Result<ExitCode> {
    let (spec, name) = match (kind, delta) {
        (PathologyArg::Example1, _) => (PathologySpec::example1(epsilon, m), "example1"),
        (PathologyArg::Example2, Some(d)) => (PathologySpec::example2(d, epsilon, m), "example2"),
        (PathologyArg::Example2, None) => return Err(config_error("example2 needs --delta")),
    };
    let pm = make_pathology(&spec).map_err(|e| config_error(e.to_string()))?;
    let audit = pathology_audit(&spec).map_err(|e| config_error(e.to_string()))?;
    let out = OutDir::create(&g.out)?;
    if g.csv() {
        out.write(&format!("{name}.csv"), &eir_core::io::to_csv(&pm))?;
    }
    if g.json() {
        out.write(&format!("{name}.json"), &eir_core::io::to_json(&pm))?;
    }
    println!("{}", serde_json::to_string_pretty(&audit)?);
    Ok(ExitCode::SUCCESS)
}

fn lab_error(e: LabError) -> anyhow::Error {
    match e {
        LabError::Config(_) | LabError::Parameter(_) => config_error(e.to_string()),
        other => other.into(),
    }
}

fn sweep_chart(res: &SweepResult) -> LineChart {
    let series = |name: &str, f: fn(&sweep::SweepRow) -> Option<f64>| {
        let points = res
            .rows
            .iter()
            .map(|r| (r.capacity as f64, f(r).unwrap_or(f64::NAN)))
            .collect();
        Series::new(name, points)
    };
    LineChart {
        title: format!("EIR and DER vs {}", res.family.capacity_name()),
        x_label: res.family.capacity_name().to_string(),
        y_label: "value".into(),
        log_x: true,
        series: vec![series("EIR", |r| r.eir), series("DER", |r| r.der)],
        markers: res
            .interpolation_threshold
            .map(|t| (t as f64, "interpolation threshold".to_string()))
            .into_iter()
            .collect(),
    }
}

pub fn train_sweep(config: &Path, g: &Global) -> Result<ExitCode> {
    let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let mut cfg = SweepConfig::from_json(&text).map_err(lab_error)?;
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(rule) = g.tie_rule {
        cfg.tie_rule = rule.into();
    }
    let base = config.parent().unwrap_or(Path::new("."));
    let res = cfg.run(base).map_err(lab_error)?;
    let out = OutDir::create(&g.out)?;
    if g.csv() {
        out.write("sweep.csv", &sweep::to_csv(&res.rows))?;
    }
    if g.json() {
        out.write_json("sweep.json", &res)?;
    }
    if g.svg {
        out.write("sweep.svg", &sweep_chart(&res).to_svg())?;
    }

    println!(
        "{:>8} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "capacity", "avg_err", "mv_err", "eir", "der", "in_bag"
    );
    for r in &res.rows {
        println!(
            "{:>8} {:>9.4} {:>9.4} {:>9} {:>9} {:>9.4}{}",
            r.capacity,
            r.avg_error,
            r.mv_error,
            r.eir.map_or("n/a".into(), |v| format!("{v:.4}")),
            r.der.map_or("n/a".into(), |v| format!("{v:.4}")),
            r.mean_in_bag_error,
            if Some(r.capacity) == res.interpolation_threshold {
                "  <- interpolation threshold"
            } else {
                ""
            }
        );
    }
    if res.interpolation_threshold.is_none() {
        println!("no capacity on the grid interpolates every bootstrap sample");
    }
    Ok(ExitCode::SUCCESS)
}
