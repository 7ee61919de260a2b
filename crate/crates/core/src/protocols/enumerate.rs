//! Exhaustive and sampled enumeration of protocol runs.
//!
//! A run is fixed by the decision vector and the protocol's randomness.
//! The randomness decomposes into independent digits (coins, pad bits,
//! ring secrets), so the exhaustive space is a mixed-radix counter and a
//! sample is one draw per digit. Enumeration order is deterministic:
//! decision vectors ascend in index order, randomness in counter order.

use super::exec::Execution;
use super::{
    run_centralised, run_dcp_sum, run_three_judges, CentralisedRandomness, MmRandomness, OtDetail,
    PairRandomness, ProtocolError, ProtocolId, RecordingOptions, StepFiveRule,
};
use crate::majority::DecisionVector;
use crate::ot::{BitString, OtInitPackage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Default cap on the number of runs one enumeration may produce.
pub const DEFAULT_RUN_BOUND: u64 = 10_000_000;

/// What to enumerate and how to record it.
#[derive(Debug, Clone)]
pub struct EnumerationOptions {
    pub recording: RecordingOptions,
    /// Step-five variant for the three-judge protocol; ignored elsewhere.
    pub rule: StepFiveRule,
    pub decisions: DecisionFilter,
    pub randomness: RandomnessSpace,
    /// Hard cap on the number of runs the request may produce.
    pub run_bound: u64,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            recording: RecordingOptions::default(),
            rule: StepFiveRule::Prose,
            decisions: DecisionFilter::All,
            randomness: RandomnessSpace::Exhaustive,
            run_bound: DEFAULT_RUN_BOUND,
        }
    }
}

/// Which decision vectors to run.
#[derive(Debug, Clone)]
pub enum DecisionFilter {
    All,
    Fixed(DecisionVector),
}

/// Whether to sweep the whole randomness space or sample it. Sampling
/// draws `count` randomness assignments per decision vector from one
/// stream seeded with `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomnessSpace {
    Exhaustive,
    Sampled { count: u64, seed: u64 },
}

/// The randomness a single run consumed, in protocol-specific shape.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ProtocolRandomness {
    ThreeJudges(MmRandomness),
    Centralised(CentralisedRandomness),
    DcpSum { secrets: Vec<u64> },
}

#[derive(Debug, Clone)]
pub struct EnumeratedRun {
    pub decisions: DecisionVector,
    pub randomness: ProtocolRandomness,
    pub execution: Execution,
}

/// Validates the request and returns the run iterator.
pub fn enumerate_runs(
    protocol: ProtocolId,
    judges: usize,
    opts: EnumerationOptions,
) -> Result<RunEnumeration, ProtocolError> {
    super::check_bench(judges)?;
    if protocol == ProtocolId::ThreeJudges && judges != 3 {
        return Err(ProtocolError::WrongBench {
            protocol: "three_judges_mm",
            expected: 3,
            got: judges,
        });
    }
    if let DecisionFilter::Fixed(dv) = &opts.decisions {
        if dv.len() != judges {
            return Err(ProtocolError::WrongBench {
                protocol: protocol.name(),
                expected: judges,
                got: dv.len(),
            });
        }
    }
    let radices = randomness_radices(protocol, judges, opts.recording.ot_detail);
    let dec_count: u128 = match &opts.decisions {
        DecisionFilter::All => 1u128 << judges,
        DecisionFilter::Fixed(_) => 1,
    };
    let rand_count: u128 = match opts.randomness {
        RandomnessSpace::Exhaustive => radices.iter().map(|&r| r as u128).product(),
        RandomnessSpace::Sampled { count, .. } => {
            if count == 0 {
                return Err(ProtocolError::EmptySample);
            }
            count as u128
        }
    };
    let total = dec_count * rand_count;
    if total > opts.run_bound as u128 {
        return Err(ProtocolError::RunSpaceTooLarge {
            runs: total,
            bound: opts.run_bound,
        });
    }
    let rng = match opts.randomness {
        RandomnessSpace::Sampled { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        RandomnessSpace::Exhaustive => None,
    };
    Ok(RunEnumeration {
        protocol,
        judges,
        opts,
        radices,
        rand_count: rand_count as u64,
        total: total as u64,
        idx: 0,
        rng,
    })
}

/// Iterator over the requested runs; see [`enumerate_runs`].
#[derive(Debug)]
pub struct RunEnumeration {
    protocol: ProtocolId,
    judges: usize,
    opts: EnumerationOptions,
    radices: Vec<u64>,
    rand_count: u64,
    total: u64,
    idx: u64,
    rng: Option<ChaCha8Rng>,
}

impl RunEnumeration {
    pub fn protocol(&self) -> ProtocolId {
        self.protocol
    }

    pub fn judges(&self) -> usize {
        self.judges
    }

    pub fn total_runs(&self) -> u64 {
        self.total
    }

    fn decisions_at(&self, dec_idx: u64) -> DecisionVector {
        match &self.opts.decisions {
            DecisionFilter::Fixed(dv) => dv.clone(),
            DecisionFilter::All => DecisionVector::new(
                (0..self.judges).map(|i| dec_idx >> i & 1 == 1).collect(),
            )
            .expect("bench validated"),
        }
    }

    fn digits_at(&mut self, rand_idx: u64) -> Vec<u64> {
        match self.opts.randomness {
            RandomnessSpace::Exhaustive => {
                let mut v = rand_idx;
                self.radices
                    .iter()
                    .map(|&r| {
                        let digit = v % r;
                        v /= r;
                        digit
                    })
                    .collect()
            }
            RandomnessSpace::Sampled { .. } => {
                let rng = self.rng.as_mut().expect("sampling rng");
                self.radices.iter().map(|&r| rng.gen_range(0..r)).collect()
            }
        }
    }
}

impl Iterator for RunEnumeration {
    type Item = EnumeratedRun;

    fn next(&mut self) -> Option<EnumeratedRun> {
        if self.idx >= self.total {
            return None;
        }
        let dec_idx = self.idx / self.rand_count;
        let rand_idx = self.idx % self.rand_count;
        self.idx += 1;
        let decisions = self.decisions_at(dec_idx);
        let digits = self.digits_at(rand_idx);
        let randomness = decode_randomness(
            self.protocol,
            self.judges,
            self.opts.recording.ot_detail,
            &digits,
        );
        let execution = match &randomness {
            ProtocolRandomness::ThreeJudges(r) => {
                run_three_judges(&decisions, r, self.opts.rule, self.opts.recording)
                    .expect("validated run")
                    .1
            }
            ProtocolRandomness::Centralised(r) => {
                run_centralised(&decisions, r, self.opts.recording)
                    .expect("validated run")
                    .1
            }
            ProtocolRandomness::DcpSum { secrets } => {
                run_dcp_sum(&decisions, secrets, self.opts.recording)
                    .expect("validated run")
                    .1
            }
        };
        Some(EnumeratedRun {
            decisions,
            randomness,
            execution,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.idx) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for RunEnumeration {}

/// The independent randomness digits of one run, as radices. Coins and pad
/// bits are base 2, ring secrets base 2n+2. At delivered-bit detail the
/// transfers run ideally, so pad digits disappear.
fn randomness_radices(protocol: ProtocolId, judges: usize, detail: OtDetail) -> Vec<u64> {
    match protocol {
        ProtocolId::ThreeJudges => match detail {
            OtDetail::Delivered => vec![2; 2],
            OtDetail::Transcript => vec![2; 2 + 4 * 3],
        },
        ProtocolId::Centralised => {
            let pairs = (judges - 1) / 2;
            match detail {
                OtDetail::Delivered => vec![2; 2 * pairs],
                OtDetail::Transcript => vec![2; (2 + 2 * 3) * pairs],
            }
        }
        ProtocolId::DcpSum => vec![judges as u64 + 1; judges],
    }
}

fn decode_randomness(
    protocol: ProtocolId,
    judges: usize,
    detail: OtDetail,
    digits: &[u64],
) -> ProtocolRandomness {
    let mut it = digits.iter().copied();
    let mut bit = || it.next().expect("digit count matches radices") == 1;
    let pkg = |bit: &mut dyn FnMut() -> bool| {
        let r0 = BitString::single(bit());
        let r1 = BitString::single(bit());
        let d = bit();
        OtInitPackage::new(r0, r1, d).expect("pads have equal length")
    };
    match protocol {
        ProtocolId::ThreeJudges => {
            let share_and = bit();
            let share_or = bit();
            let full = detail == OtDetail::Transcript;
            ProtocolRandomness::ThreeJudges(MmRandomness {
                share_and,
                share_or,
                ot_and_to_c: full.then(|| pkg(&mut bit)),
                ot_or_to_c: full.then(|| pkg(&mut bit)),
                ot_b_to_a: full.then(|| pkg(&mut bit)),
                ot_c_to_a: full.then(|| pkg(&mut bit)),
            })
        }
        ProtocolId::Centralised => {
            let pairs = (judges - 1) / 2;
            let full = detail == OtDetail::Transcript;
            ProtocolRandomness::Centralised(CentralisedRandomness {
                pairs: (0..pairs)
                    .map(|_| PairRandomness {
                        share_and: bit(),
                        share_or: bit(),
                        ot_and: full.then(|| pkg(&mut bit)),
                        ot_or: full.then(|| pkg(&mut bit)),
                    })
                    .collect(),
            })
        }
        ProtocolId::DcpSum => ProtocolRandomness::DcpSum {
            secrets: digits.to_vec(),
        },
    }
}
