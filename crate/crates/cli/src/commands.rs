//! Subcommand implementations.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use c2lse::harness::{
    grid_compare, mean_pairwise_distance, run_replicates_on, sweep_epsilon, theory_diagnostics, ExperimentConfig, ReplicateSummary,
    TheoryReport,
};
use c2lse::problems::{load_tabular_dataset, GroundTruth, LevelSetProblem, TruthLabel};

use crate::config::{parse_config, resolved_toml};
use crate::output::{summary_csv, trace_csv, OutputDir};
use crate::svg;

fn fail_on_aborted(summary: &ReplicateSummary) -> Result<()> {
    let aborted = summary.aborted();
    if aborted.is_empty() {
        return Ok(());
    }
    let list: Vec<String> = aborted.iter().map(|(s, why)| format!("seed {s}: {why}")).collect();
    bail!("{} of {} runs aborted ({})", aborted.len(), summary.records.len(), list.join("; "))
}

/// Write the per-run file set for one replicate summary.
pub fn emit_results(out: &OutputDir, summary: &ReplicateSummary, problem: &LevelSetProblem, truth: &GroundTruth) -> Result<()> {
    let dim = problem.dim();
    out.write("trace.csv", &trace_csv(&summary.records, dim)?)?;
    out.write("summary.csv", &summary_csv(&summary.curve)?)?;
    out.write("resolved_config.toml", resolved_toml(&summary.config, dim)?.as_bytes())?;
    let title = format!("{} on {} (eps = {})", summary.config.method, problem.name, summary.config.epsilon);
    out.write("f1_curve.svg", svg::f1_curve(&summary.curve, &title).as_bytes())?;
    if dim == 2 {
        if let Some(first) = summary.records.first() {
            let queries: Vec<Vec<f64>> = first.queries().map(<[f64]>::to_vec).collect();
            let title = format!("{} queries, seed {}", summary.config.method, first.seed);
            out.write(
                "queries.svg",
                svg::query_scatter(&problem.bounds, truth, &queries, &title).as_bytes(),
            )?;
        }
    }
    Ok(())
}

fn prepare(config: &ExperimentConfig) -> Result<(LevelSetProblem, GroundTruth)> {
    let problem = config.load_problem()?;
    let truth = problem.build_ground_truth()?;
    Ok((problem, truth))
}

pub fn run(config_path: &Path, overrides: &[String], out: &Path) -> Result<ReplicateSummary> {
    let config = parse_config(config_path, overrides)?;
    let out = OutputDir::prepare(out)?;
    let (problem, truth) = prepare(&config)?;
    let summary = run_replicates_on(&config, &problem, &truth)?;
    emit_results(&out, &summary, &problem, &truth)?;
    if let Some(p) = summary.final_point() {
        println!(
            "final macro-F1 at iteration {}: {:.4} ± {:.4} over {} runs",
            p.iteration, p.mean_f1, p.std_f1, p.runs
        );
    }
    fail_on_aborted(&summary)?;
    Ok(summary)
}

fn final_stats(summary: &ReplicateSummary) -> (f64, f64) {
    summary.final_point().map_or((f64::NAN, f64::NAN), |p| (p.mean_f1, p.std_f1))
}

fn mean_query_spread(summary: &ReplicateSummary) -> f64 {
    let n = summary.records.len().max(1) as f64;
    summary
        .records
        .iter()
        .map(|r| mean_pairwise_distance(&r.queries().collect::<Vec<_>>()))
        .sum::<f64>()
        / n
}

pub fn sweep(config_path: &Path, overrides: &[String], epsilons: &[f64], out: &Path) -> Result<()> {
    let config = parse_config(config_path, overrides)?;
    let out = OutputDir::prepare(out)?;
    let rows = sweep_epsilon(&config, epsilons)?;
    let (problem, truth) = prepare(&config)?;
    let mut table = csv::Writer::from_writer(Vec::new());
    table.write_record(["epsilon", "final_f1_mean", "final_f1_std", "mean_pairwise_distance", "runs"])?;
    for row in &rows {
        emit_results(&out.subdir(&format!("epsilon_{}", row.epsilon))?, &row.summary, &problem, &truth)?;
        let (m, s) = final_stats(&row.summary);
        table.write_record([
            row.epsilon.to_string(),
            m.to_string(),
            s.to_string(),
            mean_query_spread(&row.summary).to_string(),
            row.summary.records.len().to_string(),
        ])?;
        println!("epsilon {}: final macro-F1 {m:.4} ± {s:.4}", row.epsilon);
    }
    out.write("sweep.csv", &table.into_inner()?)?;
    for row in &rows {
        fail_on_aborted(&row.summary)?;
    }
    Ok(())
}

fn shape_name(shape: &[usize]) -> String {
    shape.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

pub fn parse_grid_shape(s: &str) -> Result<Vec<usize>> {
    s.split('x')
        .map(|p| p.trim().parse::<usize>().map_err(|e| anyhow!("bad grid shape `{s}`: {e}")))
        .collect()
}

pub fn compare_grids(config_path: &Path, overrides: &[String], shapes: &[Vec<usize>], out: &Path) -> Result<()> {
    let config = parse_config(config_path, overrides)?;
    let out = OutputDir::prepare(out)?;
    let rows = grid_compare(&config, shapes)?;
    let (problem, truth) = prepare(&config)?;
    let mut table = csv::Writer::from_writer(Vec::new());
    table.write_record([
        "method",
        "candidate_grid",
        "grid_entry",
        "final_f1_mean",
        "final_f1_std",
        "total_inferences_mean",
    ])?;
    let mut continuous_written = false;
    for row in &rows {
        let grid = row.candidate_grid.as_deref().map(shape_name).unwrap_or_else(|| "continuous".into());
        match &row.candidate_grid {
            Some(g) => emit_results(
                &out.subdir(&format!("{}_{}", row.method, shape_name(g)))?,
                &row.summary,
                &problem,
                &truth,
            )?,
            None if !continuous_written => {
                emit_results(&out.subdir(row.method.as_str())?, &row.summary, &problem, &truth)?;
                continuous_written = true;
            }
            None => {}
        }
        table.write_record([
            row.method.to_string(),
            grid.clone(),
            shape_name(&row.grid_entry),
            row.final_f1_mean.to_string(),
            row.final_f1_std.to_string(),
            row.total_inferences_mean.to_string(),
        ])?;
        println!(
            "{} [{}] {grid}: final macro-F1 {:.4} ± {:.4}, {:.0} GP inferences",
            shape_name(&row.grid_entry),
            row.method,
            row.final_f1_mean,
            row.final_f1_std,
            row.total_inferences_mean
        );
    }
    out.write("grid_compare.csv", &table.into_inner()?)?;
    for row in &rows {
        fail_on_aborted(&row.summary)?;
    }
    Ok(())
}

pub enum TruthSource {
    Problem(String),
    Data {
        path: PathBuf,
        point_columns: Vec<String>,
        value_column: String,
        threshold: f64,
    },
}

/// Write `truth.csv` and return the superlevel fraction.
pub fn gen_truth(source: &TruthSource, out: &Path) -> Result<f64> {
    let out = OutputDir::prepare(out)?;
    let (problem, names) = match source {
        TruthSource::Problem(name) => {
            let p = LevelSetProblem::by_name(name)?;
            let names = (1..=p.dim()).map(|i| format!("x{i}")).collect();
            (p, names)
        }
        TruthSource::Data {
            path,
            point_columns,
            value_column,
            threshold,
        } => (
            load_tabular_dataset(path, point_columns, value_column, *threshold)?,
            point_columns.clone(),
        ),
    };
    let truth = problem.build_ground_truth()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = names;
    header.extend(["f".to_string(), "label".to_string()]);
    w.write_record(&header)?;
    for ((p, v), l) in truth.points.iter().zip(&truth.values).zip(&truth.labels) {
        let mut fields: Vec<String> = p.iter().map(f64::to_string).collect();
        fields.push(v.to_string());
        fields.push(
            match l {
                TruthLabel::Super => "super",
                TruthLabel::Sub => "sub",
            }
            .into(),
        );
        w.write_record(&fields)?;
    }
    out.write("truth.csv", &w.into_inner()?)?;
    let fraction = truth.superlevel_fraction();
    let n_super = truth.labels.iter().filter(|l| **l == TruthLabel::Super).count();
    println!(
        "{}: superlevel fraction {:.4}% ({n_super} of {} points, h = {})",
        problem.name,
        100.0 * fraction,
        truth.len(),
        problem.threshold
    );
    Ok(fraction)
}

/// Strip the informational `wall_ms` column so timing noise cannot mask a
/// genuine divergence.
fn comparable_rows(bytes: &[u8]) -> Result<Vec<Vec<String>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
    let mut rows = Vec::new();
    let mut wall = None;
    for rec in r.records() {
        let rec = rec?;
        let mut fields: Vec<String> = rec.iter().map(String::from).collect();
        let col = *wall.get_or_insert_with(|| fields.iter().position(|f| f == "wall_ms"));
        if let Some(c) = col {
            if c < fields.len() {
                fields.remove(c);
            }
        }
        rows.push(fields);
    }
    Ok(rows)
}

/// Re-execute the run described by the config beside `trace`, confirm it
/// reproduces the trace, and check the convergence inequalities per seed.
pub fn diagnose(trace: &Path, config_path: Option<&Path>, out: &Path) -> Result<Vec<TheoryReport>> {
    let default_config = trace.with_file_name("resolved_config.toml");
    let config_path = config_path.unwrap_or(&default_config);
    let config = parse_config(config_path, &[])?;
    let out = OutputDir::prepare(out)?;
    let recorded = fs::read(trace).with_context(|| format!("reading trace {}", trace.display()))?;
    let (problem, truth) = prepare(&config)?;
    let summary = run_replicates_on(&config, &problem, &truth)?;
    let replayed = trace_csv(&summary.records, problem.dim())?;
    let (a, b) = (comparable_rows(&recorded)?, comparable_rows(&replayed)?);
    if a != b {
        let first = a.iter().zip(&b).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
        bail!(
            "trace {} does not match a re-run of {} (first difference at line {})",
            trace.display(),
            config_path.display(),
            first + 1
        );
    }

    let reports: Vec<TheoryReport> = summary
        .records
        .iter()
        .map(|r| theory_diagnostics(r, config.noise_variance, config.epsilon, config.beta))
        .collect();
    let mut text = String::new();
    let mut table = csv::Writer::from_writer(Vec::new());
    table.write_record([
        "seed",
        "iterations",
        "c1",
        "information_gain",
        "gain_bound_holds",
        "averaged_acquisition_holds",
        "first_confident_iteration",
        "unknown_outside_epsilon",
        "low_confidence_outside_epsilon",
        "all_hold",
    ])?;
    for rep in &reports {
        let _ = writeln!(text, "{rep}\n");
        table.write_record([
            rep.seed.to_string(),
            rep.iterations.to_string(),
            rep.c1.to_string(),
            rep.information_gain.to_string(),
            rep.gain_lower_bound.holds.to_string(),
            rep.averaged_acquisition.as_ref().is_none_or(|c| c.holds()).to_string(),
            rep.first_confident_iteration.map(|i| i.to_string()).unwrap_or_default(),
            rep.unknown_outside_epsilon.to_string(),
            rep.low_confidence_outside_epsilon.to_string(),
            rep.all_hold().to_string(),
        ])?;
    }
    text.push_str(
        "Note: the realized information gain stands in for the maximum information gain;\n\
         the maximum is never smaller, so a violation here falsifies the bound but a pass\n\
         does not certify it with the true maximum.\n",
    );
    out.write("diagnostics.txt", text.as_bytes())?;
    out.write("diagnostics.csv", &table.into_inner()?)?;
    print!("{text}");
    fail_on_aborted(&summary)?;
    let failing: Vec<u64> = reports.iter().filter(|r| !r.all_hold()).map(|r| r.seed).collect();
    if !failing.is_empty() {
        bail!("theory checks violated for seeds {failing:?}");
    }
    Ok(reports)
}
