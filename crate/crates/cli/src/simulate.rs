//! `simulate`: sweep the protocol over the scenario's decision and
//! randomness space, optionally dumping per-run traces, and print a
//! verdict summary.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use judgebench_core::protocols::RecordingOptions;
use serde::Serialize;

use crate::fail::Failure;
use crate::scenario::{load_scenario, SCHEMA};

#[derive(Serialize)]
struct Summary<'a> {
    schema: &'static str,
    protocol: String,
    judges: usize,
    runs: u64,
    /// Runs per announced verdict value.
    verdicts: BTreeMap<String, u64>,
    /// Decision classes per verdict value; a class whose runs disagree
    /// (which a correct protocol never produces) counts under "mixed".
    class_verdicts: BTreeMap<String, u64>,
    classes: Vec<ClassSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    traces: Option<&'a Path>,
}

#[derive(Serialize)]
struct ClassSummary {
    decisions: String,
    verdicts: BTreeMap<String, u64>,
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn cmd_simulate(path: &Path, seed: Option<u64>) -> Result<u8, Failure> {
    let mut scenario = load_scenario(path)?;
    scenario.apply_seed(seed);
    let write_traces = scenario.output.traces.is_some();
    let recording = RecordingOptions {
        trace: write_traces,
        snapshots: false,
        ot_detail: scenario.ot_detail,
    };
    let runs = scenario.enumeration(recording)?;

    let mut trace_file = match &scenario.output.traces {
        Some(p) => {
            let file = std::fs::File::create(p)
                .map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
            Some(std::io::BufWriter::new(file))
        }
        None => None,
    };

    let mut total: u64 = 0;
    let mut verdicts: BTreeMap<String, u64> = BTreeMap::new();
    let mut classes: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for run in runs {
        total += 1;
        let verdict = run.execution.verdict_value.to_string();
        *verdicts.entry(verdict.clone()).or_insert(0) += 1;
        let decisions = bit_string(run.decisions.bits());
        *classes.entry(decisions.clone()).or_default().entry(verdict.clone()).or_insert(0) += 1;
        if let Some(out) = trace_file.as_mut() {
            let line = serde_json::json!({
                "decisions": decisions,
                "verdict": verdict,
                "randomness": run.randomness,
                "events": run.execution.events,
            });
            writeln!(out, "{line}").map_err(Failure::from)?;
        }
    }
    if let Some(mut out) = trace_file.take() {
        out.flush().map_err(Failure::from)?;
    }

    let mut class_verdicts: BTreeMap<String, u64> = BTreeMap::new();
    for outcome in classes.values() {
        let key = if outcome.len() == 1 {
            outcome.keys().next().unwrap().clone()
        } else {
            "mixed".to_string()
        };
        *class_verdicts.entry(key).or_insert(0) += 1;
    }
    let summary = Summary {
        schema: SCHEMA,
        protocol: scenario.protocol.to_string(),
        judges: scenario.judges(),
        runs: total,
        verdicts,
        class_verdicts,
        classes: classes
            .into_iter()
            .map(|(decisions, verdicts)| ClassSummary { decisions, verdicts })
            .collect(),
        traces: scenario.output.traces.as_deref(),
    };
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(0)
}
