//! Interpreted-system models: global states, transitions and per-judge
//! observation classes, assembled from enumerated protocol runs.
//!
//! Every run contributes its per-round global states as model states
//! (deduplicated across runs), transitions between consecutive rounds, and
//! a self-loop on its last state so the transition relation is total.
//! Observation classes partition the states by what a judge sees; two
//! states in the same class are indistinguishable to that judge, which is
//! exactly the accessibility relation the knowledge operator runs on.
//! States are renumbered into canonical byte order after collection, so a
//! model's identity does not depend on the order runs arrived in.

use crate::protocols::{EnumeratedRun, VerdictValue};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::HashMap;
use thiserror::Error;

pub const DEFAULT_STATE_CAP: usize = 2_000_000;

const MODEL_SCHEMA: &str = "judgebench/model/1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KripkeError {
    #[error("state cap {cap} exceeded while collecting run states")]
    StateCap { cap: usize },
    #[error("model building needs per-round snapshots in the recording options")]
    NoSnapshots,
    #[error("run has {got} judges, the model under construction has {expected}")]
    AgentMismatch { expected: usize, got: usize },
    #[error("no runs to build a model from")]
    NoRuns,
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("malformed model document: {0}")]
    Import(String),
}

/// What a judge's observation of a global state consists of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationMode {
    /// Round, announcements and the judge's full local state.
    FullLocalState,
    /// Only the announced verdict and the judge's own decision.
    VerdictAndOwnDecision,
}

#[derive(Debug, Clone, Copy)]
pub struct ModelBuildOptions {
    pub observation: ObservationMode,
    pub state_cap: usize,
}

impl Default for ModelBuildOptions {
    fn default() -> Self {
        ModelBuildOptions {
            observation: ObservationMode::FullLocalState,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

/// Labels of one state: everything the formula atoms can mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateInfo {
    pub round: u32,
    pub verdict: VerdictValue,
    /// Decision profile as a bitmask, judge `i` at bit `i`.
    pub decisions: u32,
}

/// A finite model with one transition relation and one observation
/// partition per judge. States are `u32` indices; successor and
/// predecessor lists are compressed sparse rows.
#[derive(Debug, Clone)]
pub struct KripkeModel {
    agents: usize,
    observation: ObservationMode,
    states: Vec<StateInfo>,
    init: Vec<u32>,
    is_init: Vec<bool>,
    succ_off: Vec<u32>,
    succ: Vec<u32>,
    pred_off: Vec<u32>,
    pred: Vec<u32>,
    /// Per agent, per state: the state's observation class.
    obs_class: Vec<Vec<u32>>,
    /// Per agent: class-indexed member lists, again as sparse rows.
    class_off: Vec<Vec<u32>>,
    class_members: Vec<Vec<u32>>,
}

fn bits_string(mask: u32, agents: usize) -> String {
    (0..agents)
        .map(|i| if mask >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Builds the model of every supplied run. Runs must carry snapshots and
/// agree on the bench size; states are shared wherever two runs pass
/// through identical global states.
pub fn build_model<I>(runs: I, options: &ModelBuildOptions) -> Result<KripkeModel, KripkeError>
where
    I: IntoIterator<Item = EnumeratedRun>,
{
    let mut agents = 0usize;
    let mut index: HashMap<Vec<u8>, u32> = HashMap::new();
    let mut states: Vec<StateInfo> = Vec::new();
    let mut obs_index: Vec<HashMap<Vec<u8>, u32>> = Vec::new();
    let mut obs_class: Vec<Vec<u32>> = Vec::new();
    let mut init: Vec<u32> = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();

    for run in runs {
        let exec = run.execution;
        if exec.snapshots.is_empty() {
            return Err(KripkeError::NoSnapshots);
        }
        if agents == 0 {
            agents = exec.judges;
            obs_index = vec![HashMap::new(); agents];
            obs_class = vec![Vec::new(); agents];
        } else if exec.judges != agents {
            return Err(KripkeError::AgentMismatch {
                expected: agents,
                got: exec.judges,
            });
        }
        let mut prev: Option<u32> = None;
        for snap in &exec.snapshots {
            let key = snap.canonical_bytes();
            let id = match index.get(&key) {
                Some(&id) => id,
                None => {
                    if states.len() >= options.state_cap {
                        return Err(KripkeError::StateCap {
                            cap: options.state_cap,
                        });
                    }
                    let id = states.len() as u32;
                    let mask = snap
                        .decision_bits()
                        .iter()
                        .enumerate()
                        .fold(0u32, |m, (i, &b)| m | (u32::from(b) << i));
                    states.push(StateInfo {
                        round: snap.round,
                        verdict: snap.verdict,
                        decisions: mask,
                    });
                    for (a, classes) in obs_class.iter_mut().enumerate() {
                        let ob = match options.observation {
                            ObservationMode::FullLocalState => snap.observation_full(a),
                            ObservationMode::VerdictAndOwnDecision => {
                                snap.observation_verdict_and_own(a)
                            }
                        };
                        let next = obs_index[a].len() as u32;
                        classes.push(*obs_index[a].entry(ob).or_insert(next));
                    }
                    index.insert(key, id);
                    id
                }
            };
            match prev {
                None => init.push(id),
                Some(p) => edges.push((p, id)),
            }
            prev = Some(id);
        }
        let last = prev.expect("run has snapshots");
        edges.push((last, last));
    }
    if states.is_empty() {
        return Err(KripkeError::NoRuns);
    }

    // Canonical renumbering: sort by state bytes, then remap everything.
    let mut order: Vec<(Vec<u8>, u32)> = index.into_iter().collect();
    order.sort();
    let mut perm: Vec<u32> = vec![0; states.len()];
    for (new_id, (_, old_id)) in order.iter().enumerate() {
        perm[*old_id as usize] = new_id as u32;
    }
    let mut sorted_states = vec![states[0]; states.len()];
    for (old, &new) in perm.iter().enumerate() {
        sorted_states[new as usize] = states[old];
    }
    let init: Vec<u32> = init.iter().map(|&s| perm[s as usize]).collect();
    let edges: Vec<(u32, u32)> = edges
        .iter()
        .map(|&(a, b)| (perm[a as usize], perm[b as usize]))
        .collect();
    let obs_class: Vec<Vec<u32>> = obs_class
        .into_iter()
        .map(|classes| {
            let mut sorted = vec![0u32; classes.len()];
            for (old, &new) in perm.iter().enumerate() {
                sorted[new as usize] = classes[old];
            }
            sorted
        })
        .collect();

    KripkeModel::from_parts(
        agents,
        options.observation,
        sorted_states,
        init,
        edges,
        obs_class,
    )
}

impl KripkeModel {
    /// Assembles and validates a model from raw parts. Initial and edge
    /// lists may contain duplicates; observation class ids may be sparse.
    /// Every state must have at least one successor.
    pub fn from_parts(
        agents: usize,
        observation: ObservationMode,
        states: Vec<StateInfo>,
        mut init: Vec<u32>,
        mut edges: Vec<(u32, u32)>,
        obs_class: Vec<Vec<u32>>,
    ) -> Result<KripkeModel, KripkeError> {
        let n = states.len();
        let invalid = |msg: String| Err(KripkeError::Invalid(msg));
        if agents == 0 {
            return invalid("a model needs at least one agent".into());
        }
        if n == 0 {
            return invalid("a model needs at least one state".into());
        }
        if init.is_empty() {
            return invalid("a model needs at least one initial state".into());
        }
        if let Some(&s) = init.iter().find(|&&s| s as usize >= n) {
            return invalid(format!("initial state {s} out of range ({n} states)"));
        }
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a as usize >= n || b as usize >= n) {
            return invalid(format!("edge {a} -> {b} out of range ({n} states)"));
        }
        if obs_class.len() != agents {
            return invalid(format!(
                "expected {agents} observation partitions, got {}",
                obs_class.len()
            ));
        }
        for (a, classes) in obs_class.iter().enumerate() {
            if classes.len() != n {
                return invalid(format!(
                    "agent {a} classifies {} states, the model has {n}",
                    classes.len()
                ));
            }
        }
        init.sort_unstable();
        init.dedup();
        edges.sort_unstable();
        edges.dedup();

        let mut succ_off = vec![0u32; n + 1];
        for &(a, _) in &edges {
            succ_off[a as usize + 1] += 1;
        }
        for i in 0..n {
            succ_off[i + 1] += succ_off[i];
        }
        if let Some(s) = (0..n).find(|&s| succ_off[s] == succ_off[s + 1]) {
            return invalid(format!("state {s} has no successor"));
        }
        let succ: Vec<u32> = edges.iter().map(|&(_, b)| b).collect();

        let mut pred_off = vec![0u32; n + 1];
        for &(_, b) in &edges {
            pred_off[b as usize + 1] += 1;
        }
        for i in 0..n {
            pred_off[i + 1] += pred_off[i];
        }
        let mut pred = vec![0u32; edges.len()];
        let mut cursor = pred_off.clone();
        for &(a, b) in &edges {
            pred[cursor[b as usize] as usize] = a;
            cursor[b as usize] += 1;
        }

        // Densify class ids in first-occurrence order and index members.
        let mut dense_obs = Vec::with_capacity(agents);
        let mut class_off = Vec::with_capacity(agents);
        let mut class_members = Vec::with_capacity(agents);
        for classes in &obs_class {
            let mut renumber: HashMap<u32, u32> = HashMap::new();
            let dense: Vec<u32> = classes
                .iter()
                .map(|&c| {
                    let next = renumber.len() as u32;
                    *renumber.entry(c).or_insert(next)
                })
                .collect();
            let count = renumber.len();
            let mut off = vec![0u32; count + 1];
            for &c in &dense {
                off[c as usize + 1] += 1;
            }
            for i in 0..count {
                off[i + 1] += off[i];
            }
            let mut members = vec![0u32; n];
            let mut cursor = off.clone();
            for (s, &c) in dense.iter().enumerate() {
                members[cursor[c as usize] as usize] = s as u32;
                cursor[c as usize] += 1;
            }
            dense_obs.push(dense);
            class_off.push(off);
            class_members.push(members);
        }

        let mut is_init = vec![false; n];
        for &s in &init {
            is_init[s as usize] = true;
        }

        Ok(KripkeModel {
            agents,
            observation,
            states,
            init,
            is_init,
            succ_off,
            succ,
            pred_off,
            pred,
            obs_class: dense_obs,
            class_off,
            class_members,
        })
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn observation(&self) -> ObservationMode {
        self.observation
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.len()
    }

    pub fn init_states(&self) -> &[u32] {
        &self.init
    }

    pub fn is_initial(&self, s: u32) -> bool {
        self.is_init[s as usize]
    }

    pub fn successors(&self, s: u32) -> &[u32] {
        let s = s as usize;
        &self.succ[self.succ_off[s] as usize..self.succ_off[s + 1] as usize]
    }

    pub fn predecessors(&self, s: u32) -> &[u32] {
        let s = s as usize;
        &self.pred[self.pred_off[s] as usize..self.pred_off[s + 1] as usize]
    }

    pub fn info(&self, s: u32) -> &StateInfo {
        &self.states[s as usize]
    }

    pub fn verdict(&self, s: u32) -> VerdictValue {
        self.states[s as usize].verdict
    }

    pub fn round(&self, s: u32) -> u32 {
        self.states[s as usize].round
    }

    pub fn decision(&self, s: u32, judge: usize) -> bool {
        self.states[s as usize].decisions >> judge & 1 == 1
    }

    pub fn decisions_mask(&self, s: u32) -> u32 {
        self.states[s as usize].decisions
    }

    /// The observation class of `s` for `agent`; two states share a class
    /// exactly when the agent cannot tell them apart.
    pub fn obs_class(&self, agent: usize, s: u32) -> u32 {
        self.obs_class[agent][s as usize]
    }

    pub fn class_count(&self, agent: usize) -> usize {
        self.class_off[agent].len() - 1
    }

    pub fn class_states(&self, agent: usize, class: u32) -> &[u32] {
        let c = class as usize;
        &self.class_members[agent]
            [self.class_off[agent][c] as usize..self.class_off[agent][c + 1] as usize]
    }

    pub fn obs_equiv(&self, agent: usize, s: u32, t: u32) -> bool {
        self.obs_class[agent][s as usize] == self.obs_class[agent][t as usize]
    }

    pub fn describe(&self, s: u32) -> String {
        let st = &self.states[s as usize];
        format!(
            "s{s}: round {}, verdict {}, decisions {}",
            st.round,
            st.verdict,
            bits_string(st.decisions, self.agents)
        )
    }

    /// Structural sanity checks; an empty report means the model is sound.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let n = self.states.len();
        for s in 0..n as u32 {
            if self.successors(s).is_empty() {
                problems.push(format!("state {s} has no successor"));
            }
            for &t in self.successors(s) {
                if !self.predecessors(t).contains(&s) {
                    problems.push(format!("edge {s} -> {t} missing from predecessor lists"));
                }
            }
        }
        for a in 0..self.agents {
            for c in 0..self.class_count(a) as u32 {
                let members = self.class_states(a, c);
                if members.is_empty() {
                    problems.push(format!("agent {a} class {c} is empty"));
                }
                for &s in members {
                    if self.obs_class(a, s) != c {
                        problems.push(format!("agent {a} state {s} not in its class"));
                    }
                }
            }
        }
        if self.init.is_empty() {
            problems.push("no initial states".into());
        }
        problems
    }

    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<serde_json::Value> = (0..self.states.len())
            .map(|i| {
                let st = &self.states[i];
                let verdict = match st.verdict {
                    VerdictValue::Unknown => json!("unknown"),
                    VerdictValue::Value(v) => json!(v),
                };
                json!({
                    "round": st.round,
                    "verdict": verdict,
                    "decisions": bits_string(st.decisions, self.agents),
                    "obs": (0..self.agents)
                        .map(|a| self.obs_class[a][i])
                        .collect::<Vec<u32>>(),
                })
            })
            .collect();
        let edges: Vec<[u32; 2]> = (0..self.states.len() as u32)
            .flat_map(|s| self.successors(s).iter().map(move |&t| [s, t]))
            .collect();
        json!({
            "schema": MODEL_SCHEMA,
            "agents": self.agents,
            "observation": self.observation,
            "states": states,
            "init": self.init,
            "edges": edges,
        })
    }

    pub fn from_json(doc: &serde_json::Value) -> Result<KripkeModel, KripkeError> {
        #[derive(Deserialize)]
        struct StateDoc {
            round: u32,
            verdict: serde_json::Value,
            decisions: String,
            obs: Vec<u32>,
        }
        #[derive(Deserialize)]
        struct ModelDoc {
            schema: String,
            agents: usize,
            observation: ObservationMode,
            states: Vec<StateDoc>,
            init: Vec<u32>,
            edges: Vec<(u32, u32)>,
        }
        let doc: ModelDoc = serde_json::from_value(doc.clone())
            .map_err(|e| KripkeError::Import(e.to_string()))?;
        if doc.schema != MODEL_SCHEMA {
            return Err(KripkeError::Import(format!(
                "unsupported schema {:?}, expected {MODEL_SCHEMA:?}",
                doc.schema
            )));
        }
        let mut states = Vec::with_capacity(doc.states.len());
        let mut obs_class: Vec<Vec<u32>> = vec![Vec::with_capacity(doc.states.len()); doc.agents];
        for (i, st) in doc.states.iter().enumerate() {
            let verdict = match &st.verdict {
                v if v.as_str() == Some("unknown") => VerdictValue::Unknown,
                v => {
                    let num = v
                        .as_u64()
                        .filter(|&n| n < u8::MAX as u64)
                        .ok_or_else(|| {
                            KripkeError::Import(format!("state {i}: bad verdict {v}"))
                        })?;
                    VerdictValue::Value(num as u8)
                }
            };
            if st.decisions.len() != doc.agents
                || st.decisions.chars().any(|c| c != '0' && c != '1')
            {
                return Err(KripkeError::Import(format!(
                    "state {i}: decisions {:?} is not a {}-judge bit string",
                    st.decisions, doc.agents
                )));
            }
            let mask = st
                .decisions
                .chars()
                .enumerate()
                .fold(0u32, |m, (j, c)| m | (u32::from(c == '1') << j));
            if st.obs.len() != doc.agents {
                return Err(KripkeError::Import(format!(
                    "state {i}: expected {} class ids, got {}",
                    doc.agents,
                    st.obs.len()
                )));
            }
            for (a, &c) in st.obs.iter().enumerate() {
                obs_class[a].push(c);
            }
            states.push(StateInfo {
                round: st.round,
                verdict,
                decisions: mask,
            });
        }
        KripkeModel::from_parts(
            doc.agents,
            doc.observation,
            states,
            doc.init,
            doc.edges,
            obs_class,
        )
    }
}
