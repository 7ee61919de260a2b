//! Monotone threshold formulas over pair aggregates.
//!
//! The leader of the centralised protocol learns, for every pair of judges,
//! the AND and the OR of the pair's decisions, i.e. whether the pair cast
//! two, at least one, or zero guilty votes. "At least k guilty votes among
//! n pairs" is therefore expressible with and/or alone, without negation.
//! [`build_threshold_formula`] constructs such a formula by dynamic
//! programming over pair counts; [`threshold_oracle`] is the independent
//! counting route the formulas are checked against.

use crate::majority::{DecisionVector, MajorityError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ThresholdError {
    #[error("paired decisions require an even vector, got length {0}")]
    OddLength(usize),
    #[error("threshold {k} out of range 0..={max}")]
    ThresholdOutOfRange { k: usize, max: usize },
    #[error("formula mentions pair {pair} but the vector has only {pairs} pairs")]
    PairOutOfRange { pair: usize, pairs: usize },
    #[error("pair index must start at 1")]
    ZeroPair,
    #[error(transparent)]
    Decisions(#[from] MajorityError),
}

/// Negation-free formula over the per-pair aggregates. Pair indices are
/// 1-based: pair `i` covers decision positions `2i-2` and `2i-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThresholdFormula {
    /// Both judges of the pair voted guilty.
    PairAnd(usize),
    /// At least one judge of the pair voted guilty.
    PairOr(usize),
    /// Only produced for the degenerate thresholds k = 0 and k > 2n.
    Const(bool),
    And(Box<ThresholdFormula>, Box<ThresholdFormula>),
    Or(Box<ThresholdFormula>, Box<ThresholdFormula>),
}

use ThresholdFormula::*;

fn and(a: ThresholdFormula, b: ThresholdFormula) -> ThresholdFormula {
    match (a, b) {
        (Const(true), x) | (x, Const(true)) => x,
        (Const(false), _) | (_, Const(false)) => Const(false),
        (a, b) => And(Box::new(a), Box::new(b)),
    }
}

fn or(a: ThresholdFormula, b: ThresholdFormula) -> ThresholdFormula {
    match (a, b) {
        (Const(false), x) | (x, Const(false)) => x,
        (Const(true), _) | (_, Const(true)) => Const(true),
        (a, b) => Or(Box::new(a), Box::new(b)),
    }
}

impl ThresholdFormula {
    /// Swaps and/or and the two aggregate kinds. For a monotone threshold
    /// formula this computes the boolean dual.
    pub fn dual(&self) -> ThresholdFormula {
        match self {
            PairAnd(i) => PairOr(*i),
            PairOr(i) => PairAnd(*i),
            Const(b) => Const(!b),
            And(a, b) => Or(Box::new(a.dual()), Box::new(b.dual())),
            Or(a, b) => And(Box::new(a.dual()), Box::new(b.dual())),
        }
    }

    /// Largest pair index mentioned, if any.
    pub fn max_pair(&self) -> Option<usize> {
        match self {
            PairAnd(i) | PairOr(i) => Some(*i),
            Const(_) => None,
            And(a, b) | Or(a, b) => a.max_pair().max(b.max_pair()),
        }
    }

    pub fn mentions_const(&self) -> bool {
        match self {
            Const(_) => true,
            PairAnd(_) | PairOr(_) => false,
            And(a, b) | Or(a, b) => a.mentions_const() || b.mentions_const(),
        }
    }
}

impl std::fmt::Display for ThresholdFormula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PairAnd(i) => write!(f, "and{i}"),
            PairOr(i) => write!(f, "or{i}"),
            Const(b) => write!(f, "{}", u8::from(*b)),
            And(a, b) => write!(f, "({a} & {b})"),
            Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

/// Counting route: do at least `k` of the paired judges vote guilty?
pub fn threshold_oracle(dv: &DecisionVector, k: usize) -> Result<bool, ThresholdError> {
    if dv.len() % 2 != 0 {
        return Err(ThresholdError::OddLength(dv.len()));
    }
    if k > dv.len() {
        return Err(ThresholdError::ThresholdOutOfRange { k, max: dv.len() });
    }
    Ok(dv.ones() >= k)
}

/// Monotone formula equivalent to "at least `k` guilty votes among
/// `n_pairs` pairs", built by recursion on the last pair: it contributes
/// two votes (its AND holds), one vote (its OR holds), or none.
pub fn build_threshold_formula(
    n_pairs: usize,
    k: usize,
) -> Result<ThresholdFormula, ThresholdError> {
    if n_pairs == 0 {
        return Err(ThresholdError::ZeroPair);
    }
    if k > 2 * n_pairs {
        return Err(ThresholdError::ThresholdOutOfRange {
            k,
            max: 2 * n_pairs,
        });
    }
    fn at_least(pairs: usize, k: isize) -> ThresholdFormula {
        if k <= 0 {
            return Const(true);
        }
        if k > 2 * pairs as isize {
            return Const(false);
        }
        let two = and(PairAnd(pairs), at_least(pairs - 1, k - 2));
        let one = and(PairOr(pairs), at_least(pairs - 1, k - 1));
        or(or(two, one), at_least(pairs - 1, k))
    }
    Ok(at_least(n_pairs, k as isize))
}

pub fn eval_threshold_formula(
    f: &ThresholdFormula,
    dv: &DecisionVector,
) -> Result<bool, ThresholdError> {
    if dv.len() % 2 != 0 {
        return Err(ThresholdError::OddLength(dv.len()));
    }
    let pairs = dv.len() / 2;
    let pair = |i: usize| -> Result<(bool, bool), ThresholdError> {
        if i == 0 {
            return Err(ThresholdError::ZeroPair);
        }
        if i > pairs {
            return Err(ThresholdError::PairOutOfRange { pair: i, pairs });
        }
        Ok((dv.d(2 * i - 2)?, dv.d(2 * i - 1)?))
    };
    match f {
        PairAnd(i) => pair(*i).map(|(a, b)| a && b),
        PairOr(i) => pair(*i).map(|(a, b)| a || b),
        Const(b) => Ok(*b),
        And(a, b) => Ok(eval_threshold_formula(a, dv)? && eval_threshold_formula(b, dv)?),
        Or(a, b) => Ok(eval_threshold_formula(a, dv)? || eval_threshold_formula(b, dv)?),
    }
}

/// A hand-written four-judge formula that looks like a 2-of-4 check but
/// gets the doubly-split bench (1,0,1,0) wrong: its last clause ties the
/// first pair's vote to the wrong aggregate of the second pair. Kept as
/// a fixture documenting why the formulas here are built by the
/// pair-count recursion and judged against the counting oracle.
pub fn plausible_two_of_four() -> ThresholdFormula {
    or(or(PairAnd(1), PairAnd(2)), and(PairOr(1), PairAnd(2)))
}

/// Dual of [`plausible_two_of_four`]; miscounts (1,0,1,0) the other way.
pub fn plausible_three_of_four() -> ThresholdFormula {
    and(and(PairOr(1), PairOr(2)), or(PairAnd(1), PairOr(2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(bits: &[u8]) -> DecisionVector {
        DecisionVector::from_bits(bits).unwrap()
    }

    #[test]
    fn oracle_counts_ones() {
        assert!(threshold_oracle(&dv(&[1, 0, 1, 1]), 3).unwrap());
        assert!(!threshold_oracle(&dv(&[1, 0, 1, 0]), 3).unwrap());
        assert!(threshold_oracle(&dv(&[0, 0, 0, 0]), 0).unwrap());
    }

    #[test]
    fn oracle_rejects_bad_input() {
        assert_eq!(
            threshold_oracle(&dv(&[1, 0, 1]), 1).unwrap_err(),
            ThresholdError::OddLength(3)
        );
        assert_eq!(
            threshold_oracle(&dv(&[1, 0]), 3).unwrap_err(),
            ThresholdError::ThresholdOutOfRange { k: 3, max: 2 }
        );
    }

    #[test]
    fn both_votes_of_a_single_pair() {
        assert_eq!(build_threshold_formula(1, 2).unwrap(), PairAnd(1));
    }

    #[test]
    fn plausible_four_judge_formulas_miscount_split_pairs() {
        let split = dv(&[1, 0, 1, 0]);
        assert!(threshold_oracle(&split, 2).unwrap());
        assert!(!eval_threshold_formula(&plausible_two_of_four(), &split).unwrap());
        assert!(!threshold_oracle(&split, 3).unwrap());
        assert!(eval_threshold_formula(&plausible_three_of_four(), &split).unwrap());
        // They are also each other's duals, so the miscounts mirror.
        assert_eq!(plausible_two_of_four().dual(), plausible_three_of_four());
        // The constructed formulas do not share the defect.
        assert!(eval_threshold_formula(
            &build_threshold_formula(2, 2).unwrap(),
            &split
        )
        .unwrap());
        assert!(!eval_threshold_formula(
            &build_threshold_formula(2, 3).unwrap(),
            &split
        )
        .unwrap());
    }

    #[test]
    fn one_guilty_vote_per_pair_reaches_two() {
        let f = build_threshold_formula(2, 2).unwrap();
        assert!(eval_threshold_formula(&f, &dv(&[1, 0, 1, 0])).unwrap());
        assert!(!eval_threshold_formula(&f, &dv(&[1, 0, 0, 0])).unwrap());
    }

    #[test]
    fn formulas_match_oracle_exhaustively() {
        for n_pairs in 1..=3usize {
            for k in 0..=2 * n_pairs {
                let f = build_threshold_formula(n_pairs, k).unwrap();
                if k >= 1 {
                    assert!(!f.mentions_const(), "n={n_pairs} k={k}: {f}");
                }
                for input in DecisionVector::enumerate_all(2 * n_pairs) {
                    assert_eq!(
                        eval_threshold_formula(&f, &input).unwrap(),
                        threshold_oracle(&input, k).unwrap(),
                        "n={n_pairs} k={k} input={input:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn majority_formula_is_dual_of_half_formula() {
        // "at least n+1 of 2n" and "at least n of 2n" are boolean duals.
        for n_pairs in 1..=3usize {
            let maj = build_threshold_formula(n_pairs, n_pairs + 1).unwrap();
            let half_dual = build_threshold_formula(n_pairs, n_pairs).unwrap().dual();
            for input in DecisionVector::enumerate_all(2 * n_pairs) {
                assert_eq!(
                    eval_threshold_formula(&maj, &input).unwrap(),
                    eval_threshold_formula(&half_dual, &input).unwrap(),
                    "n={n_pairs} input={input:?}"
                );
            }
        }
    }

    #[test]
    fn eval_rejects_out_of_range_pair() {
        assert_eq!(
            eval_threshold_formula(&PairAnd(3), &dv(&[1, 0, 1, 0])).unwrap_err(),
            ThresholdError::PairOutOfRange { pair: 3, pairs: 2 }
        );
        assert_eq!(
            eval_threshold_formula(&PairAnd(1), &dv(&[1, 0, 1])).unwrap_err(),
            ThresholdError::OddLength(3)
        );
    }

    #[test]
    fn monotone_in_every_position() {
        for n_pairs in 1..=3usize {
            for k in 0..=2 * n_pairs {
                let f = build_threshold_formula(n_pairs, k).unwrap();
                for input in DecisionVector::enumerate_all(2 * n_pairs) {
                    if !eval_threshold_formula(&f, &input).unwrap() {
                        continue;
                    }
                    // Raising any vote keeps the formula satisfied.
                    for flip in 0..input.len() {
                        let mut raised = input.bits().to_vec();
                        raised[flip] = true;
                        let raised = DecisionVector::new(raised).unwrap();
                        assert!(eval_threshold_formula(&f, &raised).unwrap());
                    }
                }
            }
        }
    }
}
