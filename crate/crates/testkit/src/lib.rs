//! Test-only helpers shared across the workspace: randomized Kripke
//! models, randomized formulas, and a deliberately naive CTL+K evaluator.
//!
//! The naive evaluator answers "does this formula hold in this state?"
//! by direct recursion — depth-first searches for the path operators and
//! per-state class scans for knowledge — instead of the set-based
//! fixpoints the real checker uses. Agreement between the two on random
//! inputs is strong evidence that neither is wrong in the same way.

use judgebench_core::kripke::{KripkeModel, ObservationMode, StateInfo};
use judgebench_core::mck::{Atom, Formula};
use judgebench_core::protocols::VerdictValue;
use rand::Rng;
use std::collections::{HashMap, HashSet, VecDeque};

/// Random model with up to `max_states` states, 1–3 agents, arbitrary
/// labels, a total transition relation and arbitrary observation
/// partitions. Always valid by construction.
pub fn random_model(rng: &mut impl Rng, max_states: usize) -> KripkeModel {
    let n = rng.gen_range(1..=max_states.max(1));
    let agents = rng.gen_range(1..=3usize);
    let states = (0..n)
        .map(|_| StateInfo {
            round: rng.gen_range(0..4),
            verdict: match rng.gen_range(0..4) {
                0 => VerdictValue::Unknown,
                1 => VerdictValue::Value(0),
                2 => VerdictValue::Value(1),
                _ => VerdictValue::Value(rng.gen_range(0..6)),
            },
            decisions: rng.gen_range(0..1u32 << agents),
        })
        .collect();
    let mut edges = Vec::new();
    for s in 0..n as u32 {
        for _ in 0..rng.gen_range(1..=3) {
            edges.push((s, rng.gen_range(0..n) as u32));
        }
    }
    let init = (0..rng.gen_range(1..=n.min(4)))
        .map(|_| rng.gen_range(0..n) as u32)
        .collect();
    let obs_class = (0..agents)
        .map(|_| {
            let classes = rng.gen_range(1..=n);
            (0..n).map(|_| rng.gen_range(0..classes) as u32).collect()
        })
        .collect();
    KripkeModel::from_parts(
        agents,
        ObservationMode::FullLocalState,
        states,
        init,
        edges,
        obs_class,
    )
    .expect("randomly generated parts are always valid")
}

/// Random formula mentioning only agents and judges below `agents`,
/// with nesting at most `depth`.
pub fn random_formula(rng: &mut impl Rng, agents: usize, depth: usize) -> Formula {
    if depth == 0 {
        return match rng.gen_range(0..8) {
            0 => Formula::truth(),
            1 => Formula::falsity(),
            2 => Formula::verdict_unknown(),
            3 => Formula::verdict(rng.gen_range(0..6)),
            4 | 5 => Formula::decision(rng.gen_range(0..agents), rng.gen()),
            _ => {
                let bits: Vec<bool> = (0..agents).map(|_| rng.gen()).collect();
                Formula::profile(&bits)
            }
        };
    }
    match rng.gen_range(0..14) {
        0 => Formula::not(child(rng, agents, depth)),
        1 => Formula::and(child(rng, agents, depth), child(rng, agents, depth)),
        2 => Formula::or(child(rng, agents, depth), child(rng, agents, depth)),
        3 => Formula::implies(child(rng, agents, depth), child(rng, agents, depth)),
        4 => {
            let agent = rng.gen_range(0..agents);
            Formula::knows(agent, child(rng, agents, depth))
        }
        5 => {
            let agent = rng.gen_range(0..agents);
            Formula::possible(agent, child(rng, agents, depth))
        }
        6 => Formula::ex(child(rng, agents, depth)),
        7 => Formula::ax(child(rng, agents, depth)),
        8 => Formula::ef(child(rng, agents, depth)),
        9 => Formula::af(child(rng, agents, depth)),
        10 => Formula::eg(child(rng, agents, depth)),
        11 => Formula::ag(child(rng, agents, depth)),
        12 => Formula::eu(child(rng, agents, depth), child(rng, agents, depth)),
        _ => Formula::au(child(rng, agents, depth), child(rng, agents, depth)),
    }
}

fn child(rng: &mut impl Rng, agents: usize, depth: usize) -> Formula {
    let sub_depth = rng.gen_range(0..depth);
    random_formula(rng, agents, sub_depth)
}

/// Straight-line recursive evaluator, one state at a time.
pub struct NaiveChecker<'m> {
    model: &'m KripkeModel,
}

impl<'m> NaiveChecker<'m> {
    pub fn new(model: &'m KripkeModel) -> NaiveChecker<'m> {
        NaiveChecker { model }
    }

    pub fn holds(&self, f: &Formula, s: u32) -> bool {
        let m = self.model;
        match f {
            Formula::Atom(a) => self.atom(a, s),
            Formula::Not(g) => !self.holds(g, s),
            Formula::And(a, b) => self.holds(a, s) && self.holds(b, s),
            Formula::Or(a, b) => self.holds(a, s) || self.holds(b, s),
            Formula::Implies(a, b) => !self.holds(a, s) || self.holds(b, s),
            Formula::Knows(agent, g) => self
                .class_of(*agent, s)
                .all(|t| self.holds(g, t)),
            Formula::Possible(agent, g) => self
                .class_of(*agent, s)
                .any(|t| self.holds(g, t)),
            Formula::Ex(g) => m.successors(s).iter().any(|&t| self.holds(g, t)),
            Formula::Ax(g) => m.successors(s).iter().all(|&t| self.holds(g, t)),
            Formula::Ef(g) => self.reachable(s).iter().any(|&t| self.holds(g, t)),
            Formula::Ag(g) => self.reachable(s).iter().all(|&t| self.holds(g, t)),
            Formula::Eg(g) => self.cycle_within(s, g, &mut HashSet::new(), &mut HashMap::new()),
            Formula::Af(g) => self.all_paths_reach(s, g, &mut HashSet::new(), &mut HashMap::new()),
            Formula::Eu(a, b) => self.some_path_until(s, a, b, &mut HashSet::new()),
            Formula::Au(a, b) => {
                self.all_paths_until(s, a, b, &mut HashSet::new(), &mut HashMap::new())
            }
        }
    }

    fn atom(&self, a: &Atom, s: u32) -> bool {
        match a {
            Atom::True => true,
            Atom::False => false,
            Atom::VerdictUnknown => self.model.verdict(s) == VerdictValue::Unknown,
            Atom::Verdict(v) => self.model.verdict(s) == VerdictValue::Value(*v),
            Atom::Decision(j, b) => self.model.decisions_mask(s) >> *j & 1 == u32::from(*b),
            Atom::Profile { mask, .. } => self.model.decisions_mask(s) == *mask,
        }
    }

    fn class_of(&self, agent: usize, s: u32) -> impl Iterator<Item = u32> + '_ {
        let class = self.model.obs_class(agent, s);
        (0..self.model.state_count() as u32)
            .filter(move |&t| self.model.obs_class(agent, t) == class)
    }

    fn reachable(&self, s: u32) -> Vec<u32> {
        let mut seen = HashSet::from([s]);
        let mut queue = VecDeque::from([s]);
        let mut out = Vec::new();
        while let Some(t) = queue.pop_front() {
            out.push(t);
            for &u in self.model.successors(t) {
                if seen.insert(u) {
                    queue.push_back(u);
                }
            }
        }
        out
    }

    /// EG: a cycle of `g`-states is reachable through `g`-states.
    fn cycle_within(
        &self,
        s: u32,
        g: &Formula,
        stack: &mut HashSet<u32>,
        done: &mut HashMap<u32, bool>,
    ) -> bool {
        if !self.holds(g, s) {
            return false;
        }
        if stack.contains(&s) {
            return true;
        }
        if let Some(&v) = done.get(&s) {
            return v;
        }
        stack.insert(s);
        let succ: Vec<u32> = self.model.successors(s).to_vec();
        let v = succ.iter().any(|&t| self.cycle_within(t, g, stack, done));
        stack.remove(&s);
        done.insert(s, v);
        v
    }

    /// AF: every path eventually hits `g`. A revisit on the current path
    /// is a real cycle avoiding `g`, so that path never gets there.
    fn all_paths_reach(
        &self,
        s: u32,
        g: &Formula,
        stack: &mut HashSet<u32>,
        done: &mut HashMap<u32, bool>,
    ) -> bool {
        if self.holds(g, s) {
            return true;
        }
        if stack.contains(&s) {
            return false;
        }
        if let Some(&v) = done.get(&s) {
            return v;
        }
        stack.insert(s);
        let succ: Vec<u32> = self.model.successors(s).to_vec();
        let v = succ
            .iter()
            .all(|&t| self.all_paths_reach(t, g, stack, done));
        stack.remove(&s);
        done.insert(s, v);
        v
    }

    /// EU: reachability to a `b`-state through `a`-states.
    fn some_path_until(&self, s: u32, a: &Formula, b: &Formula, seen: &mut HashSet<u32>) -> bool {
        if self.holds(b, s) {
            return true;
        }
        if !self.holds(a, s) || !seen.insert(s) {
            return false;
        }
        let succ: Vec<u32> = self.model.successors(s).to_vec();
        succ.iter().any(|&t| self.some_path_until(t, a, b, seen))
    }

    /// AU: every path stays in `a` until it hits `b`; a cycle that never
    /// hits `b` refutes it.
    fn all_paths_until(
        &self,
        s: u32,
        a: &Formula,
        b: &Formula,
        stack: &mut HashSet<u32>,
        done: &mut HashMap<u32, bool>,
    ) -> bool {
        if self.holds(b, s) {
            return true;
        }
        if !self.holds(a, s) || stack.contains(&s) {
            return false;
        }
        if let Some(&v) = done.get(&s) {
            return v;
        }
        stack.insert(s);
        let succ: Vec<u32> = self.model.successors(s).to_vec();
        let v = succ
            .iter()
            .all(|&t| self.all_paths_until(t, a, b, stack, done));
        stack.remove(&s);
        done.insert(s, v);
        v
    }

    /// Truth value at every state, computed bottom-up with the same
    /// per-state search algorithms. Scales to large models, unlike
    /// [`holds`](Self::holds) which re-evaluates subformulas on the fly.
    pub fn satisfying_vector(&self, f: &Formula) -> Vec<bool> {
        let n = self.model.state_count();
        let states = || 0..n as u32;
        match f {
            Formula::Atom(a) => states().map(|s| self.atom(a, s)).collect(),
            Formula::Not(g) => self.satisfying_vector(g).iter().map(|v| !v).collect(),
            Formula::And(a, b) => zip_with(
                &self.satisfying_vector(a),
                &self.satisfying_vector(b),
                |x, y| x && y,
            ),
            Formula::Or(a, b) => zip_with(
                &self.satisfying_vector(a),
                &self.satisfying_vector(b),
                |x, y| x || y,
            ),
            Formula::Implies(a, b) => zip_with(
                &self.satisfying_vector(a),
                &self.satisfying_vector(b),
                |x, y| !x || y,
            ),
            Formula::Knows(agent, g) | Formula::Possible(agent, g) => {
                let sub = self.satisfying_vector(g);
                let uniform = matches!(f, Formula::Knows(..));
                let mut per_class: HashMap<u32, bool> = HashMap::new();
                for s in states() {
                    let e = per_class
                        .entry(self.model.obs_class(*agent, s))
                        .or_insert(uniform);
                    *e = if uniform {
                        *e && sub[s as usize]
                    } else {
                        *e || sub[s as usize]
                    };
                }
                states()
                    .map(|s| per_class[&self.model.obs_class(*agent, s)])
                    .collect()
            }
            Formula::Ex(g) => {
                let sub = self.satisfying_vector(g);
                states()
                    .map(|s| self.model.successors(s).iter().any(|&t| sub[t as usize]))
                    .collect()
            }
            Formula::Ax(g) => {
                let sub = self.satisfying_vector(g);
                states()
                    .map(|s| self.model.successors(s).iter().all(|&t| sub[t as usize]))
                    .collect()
            }
            Formula::Ef(g) => {
                let sub = self.satisfying_vector(g);
                states()
                    .map(|s| self.reachable(s).iter().any(|&t| sub[t as usize]))
                    .collect()
            }
            Formula::Ag(g) => {
                let sub = self.satisfying_vector(g);
                states()
                    .map(|s| self.reachable(s).iter().all(|&t| sub[t as usize]))
                    .collect()
            }
            Formula::Eg(g) => {
                let sub = self.satisfying_vector(g);
                let mut done = HashMap::new();
                states()
                    .map(|s| self.cycle_within_vec(s, &sub, &mut HashSet::new(), &mut done))
                    .collect()
            }
            Formula::Af(g) => {
                let sub = self.satisfying_vector(g);
                let mut done = HashMap::new();
                states()
                    .map(|s| self.all_reach_vec(s, &sub, &mut HashSet::new(), &mut done))
                    .collect()
            }
            Formula::Eu(a, b) => {
                let va = self.satisfying_vector(a);
                let vb = self.satisfying_vector(b);
                states()
                    .map(|s| self.some_until_vec(s, &va, &vb, &mut HashSet::new()))
                    .collect()
            }
            Formula::Au(a, b) => {
                let va = self.satisfying_vector(a);
                let vb = self.satisfying_vector(b);
                let mut done = HashMap::new();
                states()
                    .map(|s| self.all_until_vec(s, &va, &vb, &mut HashSet::new(), &mut done))
                    .collect()
            }
        }
    }

    fn cycle_within_vec(
        &self,
        s: u32,
        g: &[bool],
        stack: &mut HashSet<u32>,
        done: &mut HashMap<u32, bool>,
    ) -> bool {
        if !g[s as usize] {
            return false;
        }
        if stack.contains(&s) {
            return true;
        }
        if let Some(&v) = done.get(&s) {
            return v;
        }
        stack.insert(s);
        let v = self
            .model
            .successors(s)
            .to_vec()
            .iter()
            .any(|&t| self.cycle_within_vec(t, g, stack, done));
        stack.remove(&s);
        done.insert(s, v);
        v
    }

    fn all_reach_vec(
        &self,
        s: u32,
        g: &[bool],
        stack: &mut HashSet<u32>,
        done: &mut HashMap<u32, bool>,
    ) -> bool {
        if g[s as usize] {
            return true;
        }
        if stack.contains(&s) {
            return false;
        }
        if let Some(&v) = done.get(&s) {
            return v;
        }
        stack.insert(s);
        let v = self
            .model
            .successors(s)
            .to_vec()
            .iter()
            .all(|&t| self.all_reach_vec(t, g, stack, done));
        stack.remove(&s);
        done.insert(s, v);
        v
    }

    fn some_until_vec(&self, s: u32, a: &[bool], b: &[bool], seen: &mut HashSet<u32>) -> bool {
        if b[s as usize] {
            return true;
        }
        if !a[s as usize] || !seen.insert(s) {
            return false;
        }
        self.model
            .successors(s)
            .to_vec()
            .iter()
            .any(|&t| self.some_until_vec(t, a, b, seen))
    }

    fn all_until_vec(
        &self,
        s: u32,
        a: &[bool],
        b: &[bool],
        stack: &mut HashSet<u32>,
        done: &mut HashMap<u32, bool>,
    ) -> bool {
        if b[s as usize] {
            return true;
        }
        if !a[s as usize] || stack.contains(&s) {
            return false;
        }
        if let Some(&v) = done.get(&s) {
            return v;
        }
        stack.insert(s);
        let v = self
            .model
            .successors(s)
            .to_vec()
            .iter()
            .all(|&t| self.all_until_vec(t, a, b, stack, done));
        stack.remove(&s);
        done.insert(s, v);
        v
    }
}

fn zip_with(a: &[bool], b: &[bool], f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}
