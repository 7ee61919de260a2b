//! `check`: build the run model once, check every formula against it,
//! and emit a JSON report. Also hosts `export-model`, which shares the
//! scenario-to-model plumbing.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use judgebench_core::anonspec::Expectation;
use judgebench_core::kripke::KripkeModel;
use judgebench_core::mck::Checker;
use rayon::prelude::*;
use serde::Serialize;

use crate::fail::Failure;
use crate::scenario::{load_scenario, resolve_formulas, CheckItem, Scenario, SCHEMA};

#[derive(Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub scenario: Scenario,
    pub model: ModelStats,
    pub formulas: Vec<FormulaReport>,
    pub all_match: bool,
    /// Timings and timestamps only; everything outside this key is
    /// byte-for-byte reproducible for a fixed scenario and seed.
    pub volatile: Volatile,
}

#[derive(Serialize)]
pub struct ModelStats {
    pub states: usize,
    pub edges: usize,
    pub initial_states: usize,
    /// Observation-class count per judge.
    pub obs_classes: Vec<usize>,
}

#[derive(Serialize)]
pub struct FormulaReport {
    pub name: String,
    pub formula: String,
    pub holds_on_init: bool,
    pub expected: Expectation,
    #[serde(rename = "match")]
    pub matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Serialize)]
pub struct Counterexample {
    pub state: u32,
    pub description: String,
    pub explanation: Vec<String>,
}

#[derive(Serialize)]
pub struct Volatile {
    pub unix_time_ms: u128,
    pub timings_ms: Timings,
}

#[derive(Serialize)]
pub struct Timings {
    pub build_model: u128,
    pub formulas: BTreeMap<String, u128>,
}

pub fn model_stats(model: &KripkeModel) -> ModelStats {
    let edges = (0..model.state_count() as u32)
        .map(|s| model.successors(s).len())
        .sum();
    ModelStats {
        states: model.state_count(),
        edges,
        initial_states: model.init_states().len(),
        obs_classes: (0..model.agents()).map(|a| model.class_count(a)).collect(),
    }
}

fn expectation_matches(expected: Expectation, holds: bool) -> bool {
    match expected {
        Expectation::Hold => holds,
        Expectation::Fail => !holds,
        Expectation::Unknown => true,
    }
}

fn check_item(model: &KripkeModel, item: &CheckItem) -> Result<(FormulaReport, u128), Failure> {
    let mut checker = Checker::new(model);
    let start = Instant::now();
    let result = checker.check(&item.formula)?;
    let counterexample = match result.failing_initial.first() {
        Some(&state) if !result.holds => Some(Counterexample {
            state,
            description: model.describe(state),
            explanation: checker.explain(&item.formula)?.lines,
        }),
        _ => None,
    };
    let elapsed = start.elapsed().as_millis();
    Ok((
        FormulaReport {
            name: item.name.clone(),
            formula: item.formula.to_string(),
            holds_on_init: result.holds,
            expected: item.expected,
            matches: expectation_matches(item.expected, result.holds),
            counterexample,
        },
        elapsed,
    ))
}

pub fn run_check(
    scenario: &Scenario,
    items: &[CheckItem],
    jobs: Option<usize>,
    state_cap: Option<usize>,
) -> Result<Report, Failure> {
    let build_start = Instant::now();
    let model = scenario.build_model(state_cap)?;
    let build_ms = build_start.elapsed().as_millis();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::input(e.to_string()))?;
    let mut checked: Vec<(FormulaReport, u128)> = pool.install(|| {
        items
            .par_iter()
            .map(|item| check_item(&model, item))
            .collect::<Result<_, Failure>>()
    })?;
    checked.sort_by(|(a, _), (b, _)| (&a.name, &a.formula).cmp(&(&b.name, &b.formula)));
    let mut formula_timings = BTreeMap::new();
    let mut formulas = Vec::with_capacity(checked.len());
    for (report, ms) in checked {
        formula_timings.insert(report.name.clone(), ms);
        formulas.push(report);
    }
    let all_match = formulas.iter().all(|f| f.matches);
    Ok(Report {
        schema: SCHEMA,
        scenario: scenario.clone(),
        model: model_stats(&model),
        formulas,
        all_match,
        volatile: Volatile {
            unix_time_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
            timings_ms: Timings {
                build_model: build_ms,
                formulas: formula_timings,
            },
        },
    })
}

pub fn cmd_check(
    path: &Path,
    jobs: Option<usize>,
    state_cap: Option<usize>,
    seed: Option<u64>,
) -> Result<u8, Failure> {
    let mut scenario = load_scenario(path)?;
    scenario.apply_seed(seed);
    let items = resolve_formulas(&scenario)?;
    if items.is_empty() {
        return Err(Failure::input(format!(
            "{}: scenario has no formulas to check",
            path.display()
        )));
    }
    let report = run_check(&scenario, &items, jobs, state_cap)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &scenario.output.report {
        Some(out) => {
            std::fs::write(out, json + "\n")
                .map_err(|e| Failure::input(format!("{}: {e}", out.display())))?;
            let summary = serde_json::json!({
                "schema": SCHEMA,
                "report": out,
                "formulas": report.formulas.len(),
                "all_match": report.all_match,
            });
            println!("{summary}");
        }
        None => println!("{json}"),
    }
    Ok(u8::from(!report.all_match))
}

pub fn cmd_export_model(
    path: &Path,
    out: &Path,
    state_cap: Option<usize>,
    seed: Option<u64>,
) -> Result<u8, Failure> {
    let mut scenario = load_scenario(path)?;
    scenario.apply_seed(seed);
    let model = scenario.build_model(state_cap)?;
    let doc = model.to_json();
    let text = serde_json::to_string_pretty(&doc).expect("model serializes");
    std::fs::write(out, text + "\n").map_err(|e| Failure::input(format!("{}: {e}", out.display())))?;
    let stats = model_stats(&model);
    let summary = serde_json::json!({
        "schema": SCHEMA,
        "model": out,
        "states": stats.states,
        "edges": stats.edges,
        "obs_classes": stats.obs_classes,
    });
    println!("{summary}");
    Ok(0)
}
