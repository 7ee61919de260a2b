//! The three secure-majority protocols and their run enumeration.
//!
//! All protocols compute the majority verdict of an odd bench while hiding
//! the individual decisions:
//!
//! * [`run_three_judges`]: three judges, four oblivious transfers. Judge 1
//!   splits its decision into xor shares, judge 2 picks shares matching its
//!   own decision, judge 0 combines one masked share from each and
//!   announces the verdict.
//! * [`run_centralised`]: 2n+1 judges. The non-leaders work in pairs; each
//!   pair derives xor shares of its AND and its OR and sends all four share
//!   bits to the leader, who counts guilty votes and announces.
//! * [`run_dcp_sum`]: a dining-cryptographers style sum. Adjacent judges on
//!   a ring share secrets mod 2n+2; everyone broadcasts its decision
//!   blinded by the difference of its two secrets, and the announcements
//!   telescope to the guilty count.
//!
//! Every run is recorded as a list of events plus per-round global states,
//! so the same execution feeds trace export, functionality sweeps and
//! model building.

mod centralised;
mod dcp;
mod enumerate;
mod exec;
mod three_judges;

pub use centralised::{run_centralised, CentralisedRandomness, PairRandomness};
pub use dcp::{random_secrets, run_dcp_sum, DcpState};
pub use enumerate::{
    enumerate_runs, DecisionFilter, EnumeratedRun, EnumerationOptions, ProtocolRandomness,
    RandomnessSpace, RunEnumeration, DEFAULT_RUN_BOUND,
};
pub use exec::{Execution, GlobalState, LocalState};
pub use three_judges::{run_three_judges, MmRandomness, StepFiveRule};

use crate::ot::OtError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("bench must be odd and have at least 3 judges, got {0}")]
    BadBench(usize),
    #[error("{protocol} runs on {expected} judges, got {got}")]
    WrongBench {
        protocol: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("expected {expected} ring secrets, got {got}")]
    SecretCount { expected: usize, got: usize },
    #[error("ring secret {value} out of range 0..{modulus}")]
    SecretOutOfRange { value: u64, modulus: u64 },
    #[error("expected randomness for {expected} pairs, got {got}")]
    PairCount { expected: usize, got: usize },
    #[error("share set does not split the owner's decision")]
    ShareInvariant,
    #[error(transparent)]
    Ot(#[from] OtError),
    #[error(transparent)]
    Decisions(#[from] crate::majority::MajorityError),
    #[error("{runs} runs exceed the enumeration bound {bound}; sample the randomness instead")]
    RunSpaceTooLarge { runs: u128, bound: u64 },
    #[error("sampled enumeration draws nothing from an empty randomness space")]
    EmptySample,
}

/// Wire identifiers for the three protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolId {
    #[serde(rename = "three_judges_mm")]
    ThreeJudges,
    #[serde(rename = "centralised")]
    Centralised,
    #[serde(rename = "dcp_sum")]
    DcpSum,
}

impl ProtocolId {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolId::ThreeJudges => "three_judges_mm",
            ProtocolId::Centralised => "centralised",
            ProtocolId::DcpSum => "dcp_sum",
        }
    }

    /// Bench size for parameter `n` (2n+1 judges).
    pub fn judges(self, n: usize) -> usize {
        2 * n + 1
    }
}

impl std::fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How messages travel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    PrivatePointToPoint,
    ObliviousTransfer,
    Broadcast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Receiver {
    Judge(usize),
    All,
}

/// One recorded payload. Bit strings appear as 0/1 arrays.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    Bit { value: u8 },
    Num { value: u64 },
    /// Wire view of one oblivious transfer: the receiver's masked choice
    /// and the two masked messages, plus the value the receiver unmasked.
    /// Only the two endpoints of the transfer observe any of this.
    Ot {
        e: u8,
        f0: Vec<u8>,
        f1: Vec<u8>,
        delivered: Vec<u8>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub round: u32,
    pub sender: usize,
    pub receiver: Receiver,
    pub kind: ChannelKind,
    pub label: String,
    pub payload: Payload,
}

/// Everything one judge legitimately sees in a run: its decision, the
/// randomness dealt to it, the events it observed (broadcasts, messages
/// addressed to it, and its own sends) and the final verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentView {
    pub agent: usize,
    pub own_decision: u8,
    pub own_randomness: Vec<RandomnessItem>,
    pub observed: Vec<ObservedItem>,
    pub verdict: crate::majority::Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomnessItem {
    pub label: String,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedItem {
    pub round: u32,
    pub label: String,
    pub payload: Payload,
}

/// Verdict atom value of a state: the announced bit for the two majority
/// protocols, the announced guilty count for the modular sum, or unknown
/// while the run is still in progress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VerdictValue {
    Unknown,
    Value(u8),
}

impl VerdictValue {
    pub(crate) fn tag(self) -> u8 {
        match self {
            VerdictValue::Unknown => u8::MAX,
            VerdictValue::Value(v) => {
                debug_assert!(v < u8::MAX);
                v
            }
        }
    }
}

impl std::fmt::Display for VerdictValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VerdictValue::Unknown => f.write_str("unknown"),
            VerdictValue::Value(v) => write!(f, "{v}"),
        }
    }
}

/// Xor shares of one judge's decision, as dealt to the pair protocols.
/// `b_and ^ b_and_prime` recovers the decision itself, `b_or ^ b_or_prime`
/// its negation; the free choice in each pair is the owner's coin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShareSet {
    b_and: bool,
    b_and_prime: bool,
    b_or: bool,
    b_or_prime: bool,
}

impl ShareSet {
    /// Derives a share set for decision `b` from the two free coins.
    pub fn for_decision(b: bool, coin_and: bool, coin_or: bool) -> ShareSet {
        ShareSet {
            b_and: coin_and,
            b_and_prime: coin_and ^ b,
            b_or: coin_or,
            b_or_prime: coin_or ^ !b,
        }
    }

    /// Validates externally supplied shares against the owner's decision.
    pub fn new(
        b_and: bool,
        b_and_prime: bool,
        b_or: bool,
        b_or_prime: bool,
        b: bool,
    ) -> Result<ShareSet, ProtocolError> {
        if b_and ^ b_and_prime != b || b_or ^ b_or_prime != !b {
            return Err(ProtocolError::ShareInvariant);
        }
        Ok(ShareSet {
            b_and,
            b_and_prime,
            b_or,
            b_or_prime,
        })
    }

    pub fn b_and(&self) -> bool {
        self.b_and
    }

    pub fn b_and_prime(&self) -> bool {
        self.b_and_prime
    }

    pub fn b_or(&self) -> bool {
        self.b_or
    }

    pub fn b_or_prime(&self) -> bool {
        self.b_or_prime
    }
}

/// Whether oblivious transfers leave pad material in recorded model
/// states. `Delivered` keeps only the bit the receiver ends up with, which
/// is all the information the exchange carries; `Transcript` additionally
/// records the dealt pads and the masked wire messages, enlarging the
/// state space without changing what anyone can infer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OtDetail {
    Delivered,
    Transcript,
}

/// Which parts of a run to keep.
#[derive(Debug, Clone, Copy)]
pub struct RecordingOptions {
    /// Keep events and labeled randomness for trace export.
    pub trace: bool,
    /// Keep one global state per round for model building.
    pub snapshots: bool,
    /// Pad handling in recorded states, see [`OtDetail`].
    pub ot_detail: OtDetail,
}

impl Default for RecordingOptions {
    fn default() -> Self {
        RecordingOptions {
            trace: true,
            snapshots: false,
            ot_detail: OtDetail::Transcript,
        }
    }
}

pub(crate) fn check_bench(judges: usize) -> Result<(), ProtocolError> {
    if judges < 3 || judges % 2 == 0 {
        return Err(ProtocolError::BadBench(judges));
    }
    Ok(())
}
