//! Decision vectors and the majority function.
//!
//! Judges cast bits (1 = guilty, 0 = innocent); the verdict is the majority
//! bit. Everything here works on plain values and serves as the reference
//! the secure protocols are tested against. `compatible` is the
//! decision-compatibility predicate used when generating anonymity
//! properties: it asks whether an observer's own decision together with the
//! announced verdict still admits both possible decisions of another judge.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MajorityError {
    #[error("decision vector must not be empty")]
    Empty,
    #[error("decision values must be 0 or 1, got {0}")]
    NotABit(u8),
    #[error("majority needs an odd bench, got {0} judges")]
    EvenBench(usize),
    #[error("judge index {index} out of range for a bench of {total}")]
    JudgeOutOfRange { index: usize, total: usize },
    #[error("observer and subject must be distinct judges")]
    SameJudge,
    #[error("compatibility search supports at most {max} judges, got {got}")]
    BenchTooLarge { max: usize, got: usize },
}

/// Outcome of a protocol run. `Pending` appears only in intermediate
/// states, before the announcing judge has spoken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Guilty,
    Innocent,
    Pending,
}

impl Verdict {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Verdict::Guilty
        } else {
            Verdict::Innocent
        }
    }

    /// The announced bit, if any.
    pub fn bit(self) -> Option<bool> {
        match self {
            Verdict::Guilty => Some(true),
            Verdict::Innocent => Some(false),
            Verdict::Pending => None,
        }
    }
}

/// An ordered tuple of decisions, one bit per judge.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionVector(Vec<bool>);

/// A fully specified assignment of decisions to the bench. Same shape as a
/// decision vector; the distinct name marks where a value is quantified
/// over in anonymity formulas rather than fed into a protocol.
pub type DecisionProfile = DecisionVector;

impl std::fmt::Debug for DecisionVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", u8::from(b))?;
        }
        Ok(())
    }
}

impl DecisionVector {
    pub fn new(bits: Vec<bool>) -> Result<Self, MajorityError> {
        if bits.is_empty() {
            return Err(MajorityError::Empty);
        }
        Ok(DecisionVector(bits))
    }

    /// Builds a vector from 0/1 values, rejecting anything else.
    pub fn from_bits(bits: &[u8]) -> Result<Self, MajorityError> {
        let mut out = Vec::with_capacity(bits.len());
        for &b in bits {
            match b {
                0 => out.push(false),
                1 => out.push(true),
                other => return Err(MajorityError::NotABit(other)),
            }
        }
        Self::new(out)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Decision of judge `i`.
    pub fn d(&self, i: usize) -> Result<bool, MajorityError> {
        self.0.get(i).copied().ok_or(MajorityError::JudgeOutOfRange {
            index: i,
            total: self.0.len(),
        })
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// All 2^judges decision vectors, in index order: vector `v` has judge
    /// `i` guilty iff bit `i` of `v` is set.
    pub fn enumerate_all(judges: usize) -> impl Iterator<Item = DecisionVector> {
        assert!(judges >= 1 && judges < usize::BITS as usize);
        (0usize..1 << judges)
            .map(move |v| DecisionVector((0..judges).map(|i| v >> i & 1 == 1).collect()))
    }
}

/// Majority bit of an odd bench.
pub fn majority(dv: &DecisionVector) -> Result<bool, MajorityError> {
    if dv.len() % 2 == 0 {
        return Err(MajorityError::EvenBench(dv.len()));
    }
    Ok(dv.ones() > dv.len() / 2)
}

/// Whether verdict `v` together with observer `i`'s own decision `d_i`
/// leaves judge `j`'s decision undetermined: there must be full decision
/// profiles agreeing with `d_i` at `i` that assign `d_j` and `!d_j` at `j`
/// respectively, both with majority `v`. The outcome does not depend on
/// which value is passed as `d_j`; the argument only labels the two
/// searches.
pub fn compatible(
    i: usize,
    j: usize,
    d_i: bool,
    d_j: bool,
    v: bool,
    total: usize,
) -> Result<bool, MajorityError> {
    const MAX_BENCH: usize = 25;
    if total % 2 == 0 {
        return Err(MajorityError::EvenBench(total));
    }
    if total > MAX_BENCH {
        return Err(MajorityError::BenchTooLarge {
            max: MAX_BENCH,
            got: total,
        });
    }
    if i >= total {
        return Err(MajorityError::JudgeOutOfRange { index: i, total });
    }
    if j >= total {
        return Err(MajorityError::JudgeOutOfRange { index: j, total });
    }
    if i == j {
        return Err(MajorityError::SameJudge);
    }

    let need = total / 2 + 1;
    let rest = total - 2;
    let exists = |val_j: bool| -> bool {
        let fixed = usize::from(d_i) + usize::from(val_j);
        (0usize..1 << rest).any(|m| (fixed + m.count_ones() as usize >= need) == v)
    };
    Ok(exists(d_j) && exists(!d_j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(bits: &[u8]) -> DecisionVector {
        DecisionVector::from_bits(bits).unwrap()
    }

    #[test]
    fn majority_of_three() {
        assert!(majority(&dv(&[1, 0, 1])).unwrap());
        assert!(!majority(&dv(&[1, 0, 0])).unwrap());
    }

    #[test]
    fn majority_of_five() {
        assert!(!majority(&dv(&[1, 1, 0, 0, 0])).unwrap());
        assert!(majority(&dv(&[1, 1, 0, 1, 0])).unwrap());
    }

    #[test]
    fn majority_of_single_judge_is_its_bit() {
        assert!(majority(&dv(&[1])).unwrap());
        assert!(!majority(&dv(&[0])).unwrap());
    }

    #[test]
    fn majority_rejects_even_bench() {
        assert_eq!(
            majority(&dv(&[1, 0])).unwrap_err(),
            MajorityError::EvenBench(2)
        );
    }

    #[test]
    fn majority_agrees_with_sorted_median() {
        // Independent route: the middle element of the sorted bit list.
        for judges in [1usize, 3, 5, 7] {
            for vec in DecisionVector::enumerate_all(judges) {
                let mut sorted = vec.bits().to_vec();
                sorted.sort_unstable();
                assert_eq!(majority(&vec).unwrap(), sorted[judges / 2], "{vec:?}");
            }
        }
    }

    #[test]
    fn from_bits_rejects_non_bits() {
        assert_eq!(
            DecisionVector::from_bits(&[1, 2]).unwrap_err(),
            MajorityError::NotABit(2)
        );
        assert_eq!(
            DecisionVector::from_bits(&[]).unwrap_err(),
            MajorityError::Empty
        );
    }

    #[test]
    fn enumerate_all_is_exhaustive_and_ordered() {
        let all: Vec<_> = DecisionVector::enumerate_all(3).collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], dv(&[0, 0, 0]));
        assert_eq!(all[1], dv(&[1, 0, 0]));
        assert_eq!(all[5], dv(&[1, 0, 1]));
        assert_eq!(all[7], dv(&[1, 1, 1]));
    }

    #[test]
    fn compatible_three_judges() {
        // Guilty observer, innocent verdict: the other two must both be
        // innocent, so neither subject value is open.
        assert!(!compatible(0, 1, true, false, false, 3).unwrap());
        // Guilty observer, guilty verdict leaves the subject open.
        assert!(compatible(0, 1, true, false, true, 3).unwrap());
        // Verdict equal to the observer's decision is exactly the open case.
        for d_i in [false, true] {
            for v in [false, true] {
                assert_eq!(compatible(0, 2, d_i, true, v, 3).unwrap(), d_i == v);
            }
        }
    }

    #[test]
    fn compatible_five_judges() {
        assert!(compatible(0, 1, false, false, true, 5).unwrap());
        // At five judges every (d_i, v) combination stays open.
        for d_i in [false, true] {
            for v in [false, true] {
                assert!(compatible(2, 4, d_i, false, v, 5).unwrap());
            }
        }
    }

    #[test]
    fn compatible_ignores_subject_argument() {
        for total in [3usize, 5, 7] {
            for i in 0..total {
                for j in (0..total).filter(|&j| j != i) {
                    for d_i in [false, true] {
                        for v in [false, true] {
                            assert_eq!(
                                compatible(i, j, d_i, false, v, total).unwrap(),
                                compatible(i, j, d_i, true, v, total).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn compatible_matches_direct_profile_search() {
        // Independent route: scan all full profiles and collect which
        // subject values appear with the requested majority.
        for total in [3usize, 5] {
            for i in 0..total {
                for j in (0..total).filter(|&j| j != i) {
                    for d_i in [false, true] {
                        for v in [false, true] {
                            let mut seen = [false, false];
                            for p in DecisionVector::enumerate_all(total) {
                                if p.d(i).unwrap() == d_i && majority(&p).unwrap() == v {
                                    seen[usize::from(p.d(j).unwrap())] = true;
                                }
                            }
                            assert_eq!(
                                compatible(i, j, d_i, false, v, total).unwrap(),
                                seen[0] && seen[1]
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn compatible_rejects_bad_arguments() {
        assert_eq!(
            compatible(0, 0, true, true, true, 3).unwrap_err(),
            MajorityError::SameJudge
        );
        assert_eq!(
            compatible(0, 3, true, true, true, 3).unwrap_err(),
            MajorityError::JudgeOutOfRange { index: 3, total: 3 }
        );
        assert_eq!(
            compatible(0, 1, true, true, true, 4).unwrap_err(),
            MajorityError::EvenBench(4)
        );
    }
}
