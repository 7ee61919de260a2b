//! Scenario files drive every model-facing command: which protocol to
//! run, over which decision vectors and randomness, how judges observe
//! states, and which formulas to check against the resulting model.

use std::path::{Path, PathBuf};

use judgebench_core::anonspec::{
    gen_centralised_leader_raw, gen_centralised_suite, gen_correctness_family, gen_dcp_leak,
    gen_dcp_suite, gen_functionality, gen_perfect_individual, gen_three_judges_suite,
    gen_total_anonymity, Expectation, NamedFormula, PropertyError, VerdictKind,
};
use judgebench_core::kripke::{build_model, KripkeModel, ModelBuildOptions, ObservationMode};
use judgebench_core::majority::DecisionVector;
use judgebench_core::mck::{parse_formula, Formula};
use judgebench_core::protocols::{
    enumerate_runs, DecisionFilter, EnumerationOptions, OtDetail, ProtocolId, RandomnessSpace,
    RecordingOptions, RunEnumeration,
};
use serde::{Deserialize, Serialize};

use crate::fail::Failure;

pub const SCHEMA: &str = "judgebench/1";

/// `"all"` or one explicit 0/1 vector of length 2n+1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DecisionsSpec {
    Keyword(String),
    Bits(Vec<u8>),
}

impl Default for DecisionsSpec {
    fn default() -> Self {
        DecisionsSpec::Keyword("all".to_string())
    }
}

/// `"exhaustive"` or `{"sampled": {"count": …, "seed": …}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RandomnessSpec {
    Keyword(String),
    Sampled { sampled: SampledSpec },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledSpec {
    pub count: u64,
    pub seed: u64,
}

impl Default for RandomnessSpec {
    fn default() -> Self {
        RandomnessSpec::Keyword("exhaustive".to_string())
    }
}

/// One formula to check: either spelled out (`name` + `text`) or a
/// builtin suite id (`suite`) that expands to named formulas with their
/// own expectations.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FormulaEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expectation>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Where `check` writes its report; stdout when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    /// Where `simulate` writes run traces (JSON lines); skipped when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub traces: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub schema: Option<String>,
    pub protocol: ProtocolId,
    /// Pair count: the bench seats 2n+1 judges.
    pub n: usize,
    #[serde(default)]
    pub decisions: DecisionsSpec,
    #[serde(default)]
    pub randomness: RandomnessSpec,
    #[serde(default = "default_obs_mode")]
    pub obs_mode: ObservationMode,
    /// How much of each oblivious transfer the model states keep.
    #[serde(default = "default_ot_detail")]
    pub ot_detail: OtDetail,
    #[serde(default)]
    pub formulas: Vec<FormulaEntry>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_obs_mode() -> ObservationMode {
    ObservationMode::FullLocalState
}

fn default_ot_detail() -> OtDetail {
    OtDetail::Delivered
}

pub fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let mut scenario: Scenario = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        Failure::input(format!(
            "{}: at `{}`: {}",
            path.display(),
            e.path(),
            e.inner()
        ))
    })?;
    match scenario.schema.as_deref() {
        None => scenario.schema = Some(SCHEMA.to_string()),
        Some(SCHEMA) => {}
        Some(other) => {
            return Err(Failure::input(format!(
                "{}: schema `{other}` is not `{SCHEMA}`",
                path.display()
            )))
        }
    }
    if scenario.n == 0 {
        return Err(Failure::input("n must be at least 1 (the bench seats 2n+1 judges)"));
    }
    Ok(scenario)
}

impl Scenario {
    pub fn judges(&self) -> usize {
        2 * self.n + 1
    }

    pub fn decision_filter(&self) -> Result<DecisionFilter, Failure> {
        match &self.decisions {
            DecisionsSpec::Keyword(k) if k == "all" => Ok(DecisionFilter::All),
            DecisionsSpec::Keyword(k) => Err(Failure::input(format!(
                "decisions: expected \"all\" or a 0/1 list, got \"{k}\""
            ))),
            DecisionsSpec::Bits(bits) => {
                if bits.len() != self.judges() {
                    return Err(Failure::input(format!(
                        "decisions: {} entries for a bench of {} judges",
                        bits.len(),
                        self.judges()
                    )));
                }
                let vector = DecisionVector::from_bits(bits)
                    .map_err(|e| Failure::input(format!("decisions: {e}")))?;
                Ok(DecisionFilter::Fixed(vector))
            }
        }
    }

    /// Folds a `--seed` override into the scenario itself, so the echo
    /// in reports describes what actually ran.
    pub fn apply_seed(&mut self, seed: Option<u64>) {
        if let (Some(seed), RandomnessSpec::Sampled { sampled }) = (seed, &mut self.randomness) {
            sampled.seed = seed;
        }
    }

    pub fn randomness_space(&self) -> Result<RandomnessSpace, Failure> {
        match &self.randomness {
            RandomnessSpec::Keyword(k) if k == "exhaustive" => Ok(RandomnessSpace::Exhaustive),
            RandomnessSpec::Keyword(k) => Err(Failure::input(format!(
                "randomness: expected \"exhaustive\" or {{\"sampled\": …}}, got \"{k}\""
            ))),
            RandomnessSpec::Sampled { sampled } => Ok(RandomnessSpace::Sampled {
                count: sampled.count,
                seed: sampled.seed,
            }),
        }
    }

    pub fn enumeration(&self, recording: RecordingOptions) -> Result<RunEnumeration, Failure> {
        let options = EnumerationOptions {
            recording,
            decisions: self.decision_filter()?,
            randomness: self.randomness_space()?,
            ..EnumerationOptions::default()
        };
        Ok(enumerate_runs(self.protocol, self.judges(), options)?)
    }

    /// Builds the run model for `check`/`export-model`.
    pub fn build_model(&self, state_cap: Option<usize>) -> Result<KripkeModel, Failure> {
        let recording = RecordingOptions {
            trace: false,
            snapshots: true,
            ot_detail: self.ot_detail,
        };
        let runs = self.enumeration(recording)?;
        let mut options = ModelBuildOptions {
            observation: self.obs_mode,
            ..ModelBuildOptions::default()
        };
        if let Some(cap) = state_cap {
            options.state_cap = cap;
        }
        Ok(build_model(runs, &options)?)
    }
}

/// A resolved formula ready for the checker.
#[derive(Debug, Clone)]
pub struct CheckItem {
    pub name: String,
    pub formula: Formula,
    pub expected: Expectation,
}

impl From<NamedFormula> for CheckItem {
    fn from(nf: NamedFormula) -> CheckItem {
        CheckItem {
            name: nf.name,
            formula: nf.formula,
            expected: nf.expected,
        }
    }
}

fn suite_error(id: &str, e: PropertyError) -> Failure {
    Failure::input(format!("suite `{id}`: {e}"))
}

fn expand_suite(id: &str, pairs: usize) -> Result<Vec<CheckItem>, Failure> {
    let named: Vec<NamedFormula> = match id {
        "functionality" => {
            let formula = gen_functionality(pairs).map_err(|e| suite_error(id, e))?;
            return Ok(vec![CheckItem {
                name: "functionality".to_string(),
                formula,
                expected: Expectation::Hold,
            }]);
        }
        "correctness" => gen_correctness_family(pairs).map_err(|e| suite_error(id, e))?,
        "three_judges" => {
            if pairs != 1 {
                return Err(Failure::input(
                    "suite `three_judges` is fixed to the 3-judge bench (n = 1)",
                ));
            }
            gen_three_judges_suite()
        }
        "centralised" => gen_centralised_suite(pairs).map_err(|e| suite_error(id, e))?,
        "centralised_leader_raw" => {
            gen_centralised_leader_raw(pairs).map_err(|e| suite_error(id, e))?
        }
        "dcp" => gen_dcp_suite(pairs).map_err(|e| suite_error(id, e))?,
        "dcp_leak" => gen_dcp_leak(pairs).map_err(|e| suite_error(id, e))?,
        "perfect_individual_majority" => {
            gen_perfect_individual(pairs, VerdictKind::Majority).map_err(|e| suite_error(id, e))?
        }
        "perfect_individual_count" => {
            gen_perfect_individual(pairs, VerdictKind::Count).map_err(|e| suite_error(id, e))?
        }
        "total_anonymity_majority" => {
            gen_total_anonymity(pairs, VerdictKind::Majority).map_err(|e| suite_error(id, e))?
        }
        "total_anonymity_count" => {
            gen_total_anonymity(pairs, VerdictKind::Count).map_err(|e| suite_error(id, e))?
        }
        other => {
            return Err(Failure::input(format!(
                "unknown builtin suite `{other}`; known suites: functionality, correctness, \
                 three_judges, centralised, centralised_leader_raw, dcp, dcp_leak, \
                 perfect_individual_majority, perfect_individual_count, \
                 total_anonymity_majority, total_anonymity_count"
            )))
        }
    };
    Ok(named.into_iter().map(CheckItem::from).collect())
}

pub fn resolve_formulas(scenario: &Scenario) -> Result<Vec<CheckItem>, Failure> {
    let mut items = Vec::new();
    for (idx, entry) in scenario.formulas.iter().enumerate() {
        match (&entry.text, &entry.suite) {
            (Some(text), None) => {
                let name = entry.name.clone().ok_or_else(|| {
                    Failure::input(format!("formulas[{idx}]: entries with `text` need a `name`"))
                })?;
                let formula = parse_formula(text)
                    .map_err(|e| Failure::input(format!("formula `{name}`: {e}")))?;
                items.push(CheckItem {
                    name,
                    formula,
                    expected: entry.expected.unwrap_or(Expectation::Unknown),
                });
            }
            (None, Some(id)) => {
                if entry.name.is_some() || entry.expected.is_some() {
                    return Err(Failure::input(format!(
                        "formulas[{idx}]: suite entries expand to named formulas with their \
                         own expectations; drop `name`/`expected`"
                    )));
                }
                items.extend(expand_suite(id, scenario.n)?);
            }
            (Some(_), Some(_)) | (None, None) => {
                return Err(Failure::input(format!(
                    "formulas[{idx}]: give exactly one of `text` or `suite`"
                )))
            }
        }
    }
    Ok(items)
}
