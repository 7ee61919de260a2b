//! Generators for the functionality and anonymity properties of the
//! judge protocols, expressed in the checker's atom language.
//!
//! The atom language only has verdict and per-judge decision atoms, so
//! relational conditions — "the verdict matches judge i's decision",
//! "the pair split", "this count is compatible with both of j's
//! decisions" — are expanded here into propositional combinations. Every
//! generator is deterministic: the same inputs produce the same list.

use crate::majority::{compatible, majority, DecisionVector, MajorityError};
use crate::mck::Formula;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PropertyError {
    #[error("observer and subject must differ, both are judge {0}")]
    SameJudge(usize),
    #[error("need at least {need} pair(s) of judges, got {got}")]
    TooFewPairs { need: usize, got: usize },
    #[error(transparent)]
    Majority(#[from] MajorityError),
}

/// What a property is expected to do on its protocol's model. `Unknown`
/// marks protocol-agnostic families whose outcome depends on the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Hold,
    Fail,
    Unknown,
}

/// Which schema a generated formula instantiates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropertyKind {
    Functionality,
    ConditionalAnonymity {
        observer: usize,
        subject: usize,
        condition: Formula,
    },
    NonLeaderAnonymity { observer: usize, subject: usize },
    LeaderConditional { pair: usize },
    ThreeJudgesConditional { observer: usize, subject: usize },
    DcpConditional { observer: usize, subject: usize },
    PerfectIndividual { observer: usize, subject: usize },
    TotalAnonymity { observer: usize, profile: Vec<bool> },
    KnowledgeLeak { observer: usize, subject: usize },
}

/// A property instance: a checkable formula with a stable name and the
/// outcome it should produce. Serializes as `{name, formula, expected}`
/// with the formula in concrete syntax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedFormula {
    pub name: String,
    pub formula: Formula,
    pub expected: Expectation,
    pub kind: PropertyKind,
}

impl Serialize for NamedFormula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("NamedFormula", 3)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("formula", &self.formula.to_string())?;
        st.serialize_field("expected", &self.expected)?;
        st.end()
    }
}

/// Whether the verdict is announced as the count of guilty decisions
/// (modular-sum models) or as the majority bit (everything else).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Majority,
    Count,
}

fn d(judge: usize, value: bool) -> Formula {
    Formula::decision(judge, value)
}

fn verdict_bit(value: bool) -> Formula {
    Formula::verdict(u8::from(value))
}

/// `v = d_i`, expanded over atoms: (d_i=1 & v=1) | (d_i=0 & v=0).
pub fn verdict_equals_decision(judge: usize) -> Formula {
    Formula::or(
        Formula::and(d(judge, true), verdict_bit(true)),
        Formula::and(d(judge, false), verdict_bit(false)),
    )
}

/// The observer can rule out neither value of the subject's decision.
pub fn ignorance_of(observer: usize, subject: usize) -> Formula {
    Formula::and(
        Formula::not(Formula::knows(observer, d(subject, true))),
        Formula::not(Formula::knows(observer, d(subject, false))),
    )
}

/// Every judge eventually learns the verdict: the conjunction over all
/// `2*pairs + 1` judges of AF(K_i(v=1) | K_i(v=0)).
pub fn gen_functionality(pairs: usize) -> Result<Formula, PropertyError> {
    if pairs < 1 {
        return Err(PropertyError::TooFewPairs { need: 1, got: pairs });
    }
    let judges = 2 * pairs + 1;
    Ok(Formula::conj((0..judges).map(|i| {
        Formula::af(Formula::or(
            Formula::knows(i, verdict_bit(true)),
            Formula::knows(i, verdict_bit(false)),
        ))
    })))
}

/// The announced verdict always matches the majority, stated without a
/// majority symbol: any `pairs + 1` judges deciding the same way force
/// the verdict, so each such coalition with the opposite verdict is
/// unreachable — AG((d_a=b & … & v=!b) -> false).
pub fn gen_correctness_family(pairs: usize) -> Result<Vec<NamedFormula>, PropertyError> {
    if pairs < 1 {
        return Err(PropertyError::TooFewPairs { need: 1, got: pairs });
    }
    let judges = 2 * pairs + 1;
    let mut out = Vec::new();
    for coalition in subsets_of_size(judges, pairs + 1) {
        for bit in [true, false] {
            let premise = Formula::and(
                Formula::conj(coalition.iter().map(|&i| d(i, bit))),
                verdict_bit(!bit),
            );
            let tag = coalition
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join("_");
            out.push(NamedFormula {
                name: format!(
                    "correctness_{}_{tag}",
                    if bit { "guilty" } else { "innocent" }
                ),
                formula: Formula::ag(Formula::implies(premise, Formula::falsity())),
                expected: Expectation::Hold,
                kind: PropertyKind::Functionality,
            });
        }
    }
    Ok(out)
}

/// AG(condition -> (!K_observer(d_subject=1) & !K_observer(d_subject=0))).
pub fn gen_conditional(
    observer: usize,
    subject: usize,
    condition: Formula,
) -> Result<Formula, PropertyError> {
    if observer == subject {
        return Err(PropertyError::SameJudge(observer));
    }
    Ok(Formula::ag(Formula::implies(
        condition,
        ignorance_of(observer, subject),
    )))
}

/// For every ordered pair of the three judges: the conditional formula
/// with premise v = d_observer (expected to hold — a judge the verdict
/// agrees with learns nothing) and the unconditional one (expected to
/// fail — an outvoted judge knows how the other two decided).
pub fn gen_three_judges_suite() -> Vec<NamedFormula> {
    let mut out = Vec::new();
    for observer in 0..3 {
        for subject in 0..3 {
            if observer == subject {
                continue;
            }
            out.push(NamedFormula {
                name: format!("three_judges_conditional_{observer}_{subject}"),
                formula: gen_conditional(
                    observer,
                    subject,
                    verdict_equals_decision(observer),
                )
                .expect("indices differ"),
                expected: Expectation::Hold,
                kind: PropertyKind::ThreeJudgesConditional { observer, subject },
            });
            out.push(NamedFormula {
                name: format!("three_judges_unconditional_{observer}_{subject}"),
                formula: gen_conditional(observer, subject, Formula::truth())
                    .expect("indices differ"),
                expected: Expectation::Fail,
                kind: PropertyKind::ConditionalAnonymity {
                    observer,
                    subject,
                    condition: Formula::truth(),
                },
            });
        }
    }
    out
}

/// Anonymity on the centralised protocol: non-leaders learn nothing
/// about anyone unconditionally; the leader learns nothing about a pair
/// member provided that pair split its votes.
pub fn gen_centralised_suite(pairs: usize) -> Result<Vec<NamedFormula>, PropertyError> {
    if pairs < 2 {
        return Err(PropertyError::TooFewPairs { need: 2, got: pairs });
    }
    let judges = 2 * pairs + 1;
    let mut out = Vec::new();
    for observer in 1..judges {
        for subject in 0..judges {
            if observer == subject {
                continue;
            }
            out.push(NamedFormula {
                name: format!("centralised_nonleader_{observer}_{subject}"),
                formula: Formula::ag(ignorance_of(observer, subject)),
                expected: Expectation::Hold,
                kind: PropertyKind::NonLeaderAnonymity { observer, subject },
            });
        }
    }
    for pair in 1..=pairs {
        let (a, b) = (2 * pair - 1, 2 * pair);
        let split = Formula::or(
            Formula::and(d(a, true), d(b, false)),
            Formula::and(d(a, false), d(b, true)),
        );
        let body = Formula::conj(
            [a, b].into_iter()
                .flat_map(|m| [true, false].map(|bit| {
                    Formula::not(Formula::knows(0, d(m, bit)))
                })),
        );
        out.push(NamedFormula {
            name: format!("centralised_leader_conditional_pair{pair}"),
            formula: Formula::ag(Formula::implies(split, body)),
            expected: Expectation::Hold,
            kind: PropertyKind::LeaderConditional { pair },
        });
    }
    Ok(out)
}

/// The unconditioned leader formulas, one per non-leader. Each fails:
/// when a pair agrees, the leader's AND and OR shares reveal both votes.
pub fn gen_centralised_leader_raw(pairs: usize) -> Result<Vec<NamedFormula>, PropertyError> {
    if pairs < 2 {
        return Err(PropertyError::TooFewPairs { need: 2, got: pairs });
    }
    let judges = 2 * pairs + 1;
    Ok((1..judges)
        .map(|subject| NamedFormula {
            name: format!("centralised_leader_raw_{subject}"),
            formula: Formula::ag(ignorance_of(0, subject)),
            expected: Expectation::Fail,
            kind: PropertyKind::ConditionalAnonymity {
                observer: 0,
                subject,
                condition: Formula::truth(),
            },
        })
        .collect())
}

/// Anonymity on the modular-sum protocol, whose models announce the
/// count: a judge learns nothing about another whenever the count is
/// interior (1 < v < 2n), or extreme with the observer on the heavy
/// side — (v=1 & d_i=0) or (v=2n & d_i=1).
pub fn gen_dcp_suite(pairs: usize) -> Result<Vec<NamedFormula>, PropertyError> {
    if pairs < 1 {
        return Err(PropertyError::TooFewPairs { need: 1, got: pairs });
    }
    let judges = 2 * pairs + 1;
    let mut out = Vec::new();
    for observer in 0..judges {
        let premise = Formula::disj(
            (2..2 * pairs)
                .map(|c| Formula::verdict(c as u8))
                .chain([
                    Formula::and(verdict_bit(true), d(observer, false)),
                    Formula::and(Formula::verdict(2 * pairs as u8), d(observer, true)),
                ]),
        );
        for subject in 0..judges {
            if observer == subject {
                continue;
            }
            out.push(NamedFormula {
                name: format!("dcp_conditional_{observer}_{subject}"),
                formula: Formula::ag(Formula::implies(
                    premise.clone(),
                    ignorance_of(observer, subject),
                )),
                expected: Expectation::Hold,
                kind: PropertyKind::DcpConditional { observer, subject },
            });
        }
    }
    Ok(out)
}

/// The complementary leaks on the modular-sum protocol: a lone
/// dissenter learns every other vote. With count 2n and d_i=0, judge i
/// is the only innocent voter, so K_i(d_j=1) for every j; symmetrically
/// for count 1 and d_i=1.
pub fn gen_dcp_leak(pairs: usize) -> Result<Vec<NamedFormula>, PropertyError> {
    if pairs < 1 {
        return Err(PropertyError::TooFewPairs { need: 1, got: pairs });
    }
    let judges = 2 * pairs + 1;
    let mut out = Vec::new();
    for observer in 0..judges {
        for subject in 0..judges {
            if observer == subject {
                continue;
            }
            out.push(NamedFormula {
                name: format!("dcp_leak_high_{observer}_{subject}"),
                formula: Formula::ag(Formula::implies(
                    Formula::and(
                        Formula::verdict(2 * pairs as u8),
                        d(observer, false),
                    ),
                    Formula::knows(observer, d(subject, true)),
                )),
                expected: Expectation::Hold,
                kind: PropertyKind::KnowledgeLeak { observer, subject },
            });
            out.push(NamedFormula {
                name: format!("dcp_leak_low_{observer}_{subject}"),
                formula: Formula::ag(Formula::implies(
                    Formula::and(verdict_bit(true), d(observer, true)),
                    Formula::knows(observer, d(subject, false)),
                )),
                expected: Expectation::Hold,
                kind: PropertyKind::KnowledgeLeak { observer, subject },
            });
        }
    }
    Ok(out)
}

/// Perfect individual anonymity: for each ordered pair, the premise
/// enumerates the (d_i, v) label combinations under which both values
/// of d_j occur in some full profile, so whenever the observation is
/// genuinely ambiguous the observer must not know d_j.
pub fn gen_perfect_individual(
    pairs: usize,
    kind: VerdictKind,
) -> Result<Vec<NamedFormula>, PropertyError> {
    if pairs < 1 {
        return Err(PropertyError::TooFewPairs { need: 1, got: pairs });
    }
    let judges = 2 * pairs + 1;
    let mut out = Vec::new();
    for observer in 0..judges {
        for subject in 0..judges {
            if observer == subject {
                continue;
            }
            let mut terms = Vec::new();
            for own in [true, false] {
                match kind {
                    VerdictKind::Majority => {
                        for v in [true, false] {
                            if compatible(observer, subject, own, false, v, judges)? {
                                terms.push(Formula::and(d(observer, own), verdict_bit(v)));
                            }
                        }
                    }
                    VerdictKind::Count => {
                        for count in 0..=judges {
                            if both_subject_values_reach_count(
                                observer, subject, own, count, judges,
                            ) {
                                terms.push(Formula::and(
                                    d(observer, own),
                                    Formula::verdict(count as u8),
                                ));
                            }
                        }
                    }
                }
            }
            out.push(NamedFormula {
                name: format!("perfect_individual_{observer}_{subject}"),
                formula: Formula::ag(Formula::implies(
                    Formula::disj(terms),
                    ignorance_of(observer, subject),
                )),
                expected: Expectation::Unknown,
                kind: PropertyKind::PerfectIndividual { observer, subject },
            });
        }
    }
    Ok(out)
}

/// Total anonymity: whenever a judge's own decision and the verdict are
/// consistent with a full profile, the judge must consider that exact
/// profile possible — AG((d_i=profile_i & v=f(profile)) -> P_i(profile)).
pub fn gen_total_anonymity(
    pairs: usize,
    kind: VerdictKind,
) -> Result<Vec<NamedFormula>, PropertyError> {
    if pairs < 1 {
        return Err(PropertyError::TooFewPairs { need: 1, got: pairs });
    }
    let judges = 2 * pairs + 1;
    let mut out = Vec::new();
    for observer in 0..judges {
        for profile in DecisionVector::enumerate_all(judges) {
            let bits = profile.bits().to_vec();
            let verdict = match kind {
                VerdictKind::Majority => verdict_bit(majority(&profile)?),
                VerdictKind::Count => Formula::verdict(profile.ones() as u8),
            };
            let premise = Formula::and(d(observer, bits[observer]), verdict);
            let tag: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
            out.push(NamedFormula {
                name: format!("total_anonymity_{observer}_profile{tag}"),
                formula: Formula::ag(Formula::implies(
                    premise,
                    Formula::possible(observer, Formula::profile(&bits)),
                )),
                expected: Expectation::Unknown,
                kind: PropertyKind::TotalAnonymity {
                    observer,
                    profile: bits,
                },
            });
        }
    }
    Ok(out)
}

/// Can the bench reach `count` guilty votes with the observer's
/// decision fixed, under both values of the subject's decision?
fn both_subject_values_reach_count(
    observer: usize,
    subject: usize,
    own: bool,
    count: usize,
    judges: usize,
) -> bool {
    let fits = |subject_value: bool| {
        DecisionVector::enumerate_all(judges).any(|dv| {
            let bits = dv.bits();
            bits[observer] == own && bits[subject] == subject_value && dv.ones() == count
        })
    };
    fits(false) && fits(true)
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mck::parse_formula;

    #[test]
    fn functionality_conjunction_covers_every_judge() {
        let one = gen_functionality(1).unwrap();
        assert_eq!(one.to_string().matches("AF ").count(), 3);
        let two = gen_functionality(2).unwrap();
        assert_eq!(two.to_string().matches("AF ").count(), 5);
        assert!(two.to_string().contains("K 4 v=1"));
        assert_eq!(
            gen_functionality(0).unwrap_err(),
            PropertyError::TooFewPairs { need: 1, got: 0 }
        );
    }

    #[test]
    fn correctness_family_blocks_outvoted_verdicts() {
        let fam = gen_correctness_family(1).unwrap();
        // C(3,2) coalitions x 2 verdicts.
        assert_eq!(fam.len(), 6);
        let texts: Vec<String> = fam.iter().map(|f| f.formula.to_string()).collect();
        assert!(
            texts.contains(&"AG (d0=1 & d1=1 & v=0 -> false)".to_string()),
            "{texts:?}"
        );
        assert!(texts.contains(&"AG (d1=0 & d2=0 & v=1 -> false)".to_string()));
        assert_eq!(gen_correctness_family(2).unwrap().len(), 20);
    }

    #[test]
    fn conditional_formula_shapes() {
        assert_eq!(
            gen_conditional(1, 1, Formula::truth()).unwrap_err(),
            PropertyError::SameJudge(1)
        );
        let raw = gen_conditional(0, 1, Formula::truth()).unwrap();
        assert_eq!(raw.to_string(), "AG (true -> !K 0 d1=1 & !K 0 d1=0)");
        let conditioned = gen_conditional(0, 1, verdict_equals_decision(0)).unwrap();
        assert_eq!(
            conditioned,
            parse_formula("AG ((d0=1 & v=1 | d0=0 & v=0) -> !K 0 d1=1 & !K 0 d1=0)").unwrap()
        );
    }

    #[test]
    fn three_judges_suite_pairs_conditioned_with_raw() {
        let suite = gen_three_judges_suite();
        assert_eq!(suite.len(), 12);
        assert_eq!(
            suite.iter().filter(|f| f.expected == Expectation::Hold).count(),
            6
        );
        assert_eq!(suite, gen_three_judges_suite());
    }

    #[test]
    fn centralised_suite_arity_and_split_premise() {
        let suite = gen_centralised_suite(2).unwrap();
        assert_eq!(suite.len(), 18);
        let non_leader = suite
            .iter()
            .filter(|f| matches!(f.kind, PropertyKind::NonLeaderAnonymity { .. }))
            .count();
        assert_eq!(non_leader, 16);
        let pair1 = suite
            .iter()
            .find(|f| f.name == "centralised_leader_conditional_pair1")
            .unwrap();
        assert_eq!(
            pair1.formula,
            parse_formula(
                "AG ((d1=1 & d2=0 | d1=0 & d2=1) -> \
                 !K 0 d1=1 & !K 0 d1=0 & !K 0 d2=1 & !K 0 d2=0)"
            )
            .unwrap()
        );
        let three = gen_centralised_suite(3).unwrap();
        assert_eq!(
            three
                .iter()
                .filter(|f| matches!(f.kind, PropertyKind::LeaderConditional { .. }))
                .count(),
            3
        );
        assert_eq!(three.len(), 36 + 3);
        assert_eq!(
            gen_centralised_suite(1).unwrap_err(),
            PropertyError::TooFewPairs { need: 2, got: 1 }
        );
        assert_eq!(gen_centralised_leader_raw(2).unwrap().len(), 4);
    }

    #[test]
    fn dcp_premise_instantiates_count_bounds() {
        let three = gen_dcp_suite(1).unwrap();
        assert_eq!(three.len(), 6);
        // No interior counts at one pair: 1 < v < 2 is empty.
        assert_eq!(
            three[0].formula,
            parse_formula(
                "AG ((v=1 & d0=0 | v=2 & d0=1) -> !K 0 d1=1 & !K 0 d1=0)"
            )
            .unwrap()
        );
        let five = gen_dcp_suite(2).unwrap();
        assert_eq!(five.len(), 20);
        let text = five[0].formula.to_string();
        assert!(text.contains("v=2 | v=3"), "{text}");
        assert!(text.contains("v=1 & d0=0"), "{text}");
        assert!(text.contains("v=4 & d0=1"), "{text}");
    }

    #[test]
    fn dcp_leaks_point_at_the_lone_dissenter() {
        let leaks = gen_dcp_leak(1).unwrap();
        assert_eq!(leaks.len(), 12);
        let high = leaks.iter().find(|f| f.name == "dcp_leak_high_0_1").unwrap();
        assert_eq!(
            high.formula,
            parse_formula("AG (v=2 & d0=0 -> K 0 d1=1)").unwrap()
        );
        let low = leaks.iter().find(|f| f.name == "dcp_leak_low_2_0").unwrap();
        assert_eq!(
            low.formula,
            parse_formula("AG (v=1 & d2=1 -> K 2 d0=0)").unwrap()
        );
    }

    #[test]
    fn perfect_individual_premise_follows_compatibility() {
        let suite = gen_perfect_individual(1, VerdictKind::Majority).unwrap();
        assert_eq!(suite.len(), 6);
        let pair01 = &suite[0];
        assert_eq!(pair01.name, "perfect_individual_0_1");
        // At three judges the compatible combinations are exactly v = d_0:
        // an agreeing verdict leaves the other two votes open, while a
        // disagreeing one forces them.
        assert_eq!(
            pair01.formula,
            gen_conditional(0, 1, verdict_equals_decision(0)).unwrap()
        );
        // At five judges a guilty observer with a guilty verdict no longer
        // pins anyone down.
        let five = gen_perfect_individual(2, VerdictKind::Majority).unwrap();
        let text = five[0].formula.to_string();
        assert!(text.contains("d0=1 & v=1"), "{text}");
        assert!(text.contains("d0=0 & v=0"), "{text}");
        assert!(text.contains("d0=1 & v=0"), "{text}");
        assert!(text.contains("d0=0 & v=1"), "{text}");
        // Count flavour at three judges: only the middle counts are
        // ambiguous, matching the modular-sum premise.
        let count = gen_perfect_individual(1, VerdictKind::Count).unwrap();
        assert_eq!(
            count[0].formula,
            parse_formula(
                "AG ((d0=1 & v=2 | d0=0 & v=1) -> !K 0 d1=1 & !K 0 d1=0)"
            )
            .unwrap()
        );
    }

    #[test]
    fn total_anonymity_premise_pins_profile_labels() {
        let suite = gen_total_anonymity(1, VerdictKind::Majority).unwrap();
        assert_eq!(suite.len(), 24);
        let unanimous = suite
            .iter()
            .find(|f| f.name == "total_anonymity_0_profile111")
            .unwrap();
        assert_eq!(
            unanimous.formula,
            parse_formula("AG (d0=1 & v=1 -> P 0 profile=111)").unwrap()
        );
        let count = gen_total_anonymity(1, VerdictKind::Count).unwrap();
        let lone = count
            .iter()
            .find(|f| f.name == "total_anonymity_1_profile010")
            .unwrap();
        assert_eq!(
            lone.formula,
            parse_formula("AG (d1=1 & v=1 -> P 1 profile=010)").unwrap()
        );
        assert_eq!(suite, gen_total_anonymity(1, VerdictKind::Majority).unwrap());
    }

    #[test]
    fn named_formulas_serialize_with_formula_text() {
        let suite = gen_three_judges_suite();
        let json = serde_json::to_value(&suite[0]).unwrap();
        assert_eq!(json["name"], "three_judges_conditional_0_1");
        assert_eq!(json["expected"], "hold");
        assert!(json["formula"].as_str().unwrap().starts_with("AG ("));
    }
}
