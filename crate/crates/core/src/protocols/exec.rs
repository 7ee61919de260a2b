//! Run recording: wire events, per-judge views, per-round global states.

use super::{
    AgentView, ChannelKind, ObservedItem, OtDetail, Payload, ProtocolError, Receiver,
    RandomnessItem, RecordingOptions, TraceEvent, VerdictValue,
};
use crate::majority::{DecisionVector, Verdict};
use crate::ot::{self, BitString, OtInitPackage};

/// Snapshot of everything after a given round: the announced verdict (if
/// any), all broadcast payloads, and per judge its decision, the private
/// randomness it holds and the values privately delivered to it. Two runs
/// of a protocol pass through the same global state exactly when all of
/// these coincide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalState {
    pub round: u32,
    pub verdict: VerdictValue,
    pub public: Vec<u8>,
    pub locals: Vec<LocalState>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalState {
    pub decision: bool,
    pub randomness: Vec<u8>,
    pub inbox: Vec<u8>,
}

fn push_segment(out: &mut Vec<u8>, bytes: &[u8]) {
    let len = u16::try_from(bytes.len()).expect("segment fits u16");
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(bytes);
}

impl GlobalState {
    /// Unambiguous byte form; states are deduplicated and ordered by it.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.public.len() + 8 * self.locals.len());
        out.extend_from_slice(&self.round.to_le_bytes());
        out.push(self.verdict.tag());
        push_segment(&mut out, &self.public);
        for local in &self.locals {
            out.push(u8::from(local.decision));
            push_segment(&mut out, &local.randomness);
            push_segment(&mut out, &local.inbox);
        }
        out
    }

    /// What judge `agent` observes of this state: the global round, the
    /// announcements, and its own local state.
    pub fn observation_full(&self, agent: usize) -> Vec<u8> {
        let local = &self.locals[agent];
        let mut out = Vec::with_capacity(16 + self.public.len() + 8);
        out.extend_from_slice(&self.round.to_le_bytes());
        out.push(self.verdict.tag());
        push_segment(&mut out, &self.public);
        out.push(u8::from(local.decision));
        push_segment(&mut out, &local.randomness);
        push_segment(&mut out, &local.inbox);
        out
    }

    /// Restricted observation: only the verdict and the judge's own
    /// decision, nothing else (not even the round).
    pub fn observation_verdict_and_own(&self, agent: usize) -> Vec<u8> {
        vec![self.verdict.tag(), u8::from(self.locals[agent].decision)]
    }

    pub fn decision_bits(&self) -> Vec<bool> {
        self.locals.iter().map(|l| l.decision).collect()
    }
}

/// A completed run.
#[derive(Debug, Clone)]
pub struct Execution {
    pub judges: usize,
    pub decisions: DecisionVector,
    /// Announced bit or count, for state labelling.
    pub verdict_value: VerdictValue,
    /// The majority reading of the outcome.
    pub verdict: Verdict,
    pub events: Vec<TraceEvent>,
    pub snapshots: Vec<GlobalState>,
    pub(crate) rand_items: Vec<Vec<RandomnessItem>>,
}

impl Execution {
    /// Reconstructs what each judge saw, from the recorded events. An
    /// oblivious transfer shows its wire messages to both endpoints but
    /// the unmasked value only to the receiver; private messages show up
    /// for sender and receiver; broadcasts for everyone.
    pub fn agent_views(&self) -> Vec<AgentView> {
        let mut views: Vec<AgentView> = (0..self.judges)
            .map(|agent| AgentView {
                agent,
                own_decision: u8::from(self.decisions.bits()[agent]),
                own_randomness: self.rand_items[agent].clone(),
                observed: Vec::new(),
                verdict: self.verdict,
            })
            .collect();
        for ev in &self.events {
            let mut show = |agent: usize, payload: Payload| {
                views[agent].observed.push(ObservedItem {
                    round: ev.round,
                    label: ev.label.clone(),
                    payload,
                });
            };
            match (ev.kind, ev.receiver) {
                (ChannelKind::Broadcast, _) => {
                    for agent in 0..self.judges {
                        show(agent, ev.payload.clone());
                    }
                }
                (ChannelKind::PrivatePointToPoint, Receiver::Judge(to)) => {
                    show(ev.sender, ev.payload.clone());
                    if to != ev.sender {
                        show(to, ev.payload.clone());
                    }
                }
                (ChannelKind::ObliviousTransfer, Receiver::Judge(to)) => {
                    let sender_side = match &ev.payload {
                        Payload::Ot { e, f0, f1, .. } => Payload::Ot {
                            e: *e,
                            f0: f0.clone(),
                            f1: f1.clone(),
                            delivered: Vec::new(),
                        },
                        other => other.clone(),
                    };
                    show(ev.sender, sender_side);
                    show(to, ev.payload.clone());
                }
                (kind, Receiver::All) => {
                    debug_assert!(kind == ChannelKind::Broadcast);
                    for agent in 0..self.judges {
                        show(agent, ev.payload.clone());
                    }
                }
            }
        }
        views
    }
}

/// Incremental recording of one run; the protocol drivers push randomness
/// deals, messages and round boundaries into it.
pub(crate) struct Recorder {
    opts: RecordingOptions,
    judges: usize,
    decisions: DecisionVector,
    round: u32,
    verdict_value: VerdictValue,
    verdict: Verdict,
    events: Vec<TraceEvent>,
    rand_items: Vec<Vec<RandomnessItem>>,
    rand_bytes: Vec<Vec<u8>>,
    inbox: Vec<Vec<u8>>,
    public: Vec<u8>,
    snapshots: Vec<GlobalState>,
}

impl Recorder {
    pub(crate) fn new(decisions: &DecisionVector, opts: RecordingOptions) -> Recorder {
        let judges = decisions.len();
        Recorder {
            opts,
            judges,
            decisions: decisions.clone(),
            round: 0,
            verdict_value: VerdictValue::Unknown,
            verdict: Verdict::Pending,
            events: Vec::new(),
            rand_items: vec![Vec::new(); judges],
            rand_bytes: vec![Vec::new(); judges],
            inbox: vec![Vec::new(); judges],
            public: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    fn trace_rand(&mut self, agent: usize, label: String, payload: Payload) {
        if self.opts.trace {
            self.rand_items[agent].push(RandomnessItem { label, payload });
        }
    }

    /// A coin private to `agent` that carries protocol information (share
    /// choices, ring secrets). Always part of the agent's model state.
    pub(crate) fn deal_coin(&mut self, agent: usize, label: &str, bit: bool) {
        self.trace_rand(agent, label.to_string(), Payload::Bit { value: bit.into() });
        self.rand_bytes[agent].push(bit.into());
    }

    pub(crate) fn deal_secret(&mut self, agent: usize, label: &str, value: u64) {
        debug_assert!(value < u8::MAX as u64);
        self.trace_rand(agent, label.to_string(), Payload::Num { value });
        self.rand_bytes[agent].push(value as u8);
    }

    /// Initialiser package for one transfer: pads to the sender, the
    /// selection bit and its pad to the receiver. Pure pad material, so it
    /// enters model states only at transcript detail.
    pub(crate) fn deal_ot_package(
        &mut self,
        label: &str,
        sender: usize,
        receiver: usize,
        pkg: &OtInitPackage,
    ) {
        if self.opts.trace {
            let (r0, r1) = pkg.sender_share();
            let (d, r_d) = pkg.receiver_share();
            let bits = |s: &BitString| -> Vec<u8> { s.bits().iter().map(|&b| u8::from(b)).collect() };
            self.trace_rand(
                sender,
                format!("{label}.pads"),
                Payload::Ot {
                    e: 0,
                    f0: bits(r0),
                    f1: bits(r1),
                    delivered: Vec::new(),
                },
            );
            self.trace_rand(receiver, format!("{label}.d"), Payload::Bit { value: d.into() });
            self.trace_rand(
                receiver,
                format!("{label}.pad"),
                Payload::Ot {
                    e: 0,
                    f0: bits(r_d),
                    f1: Vec::new(),
                    delivered: Vec::new(),
                },
            );
        }
        if self.opts.ot_detail == OtDetail::Transcript {
            let (r0, r1) = pkg.sender_share();
            for s in [r0, r1] {
                for &b in s.bits() {
                    self.rand_bytes[sender].push(b.into());
                }
            }
            let (d, r_d) = pkg.receiver_share();
            self.rand_bytes[receiver].push(d.into());
            for &b in r_d.bits() {
                self.rand_bytes[receiver].push(b.into());
            }
        }
    }

    /// One single-bit oblivious transfer. With a package the real exchange
    /// runs and its wire messages are recorded; without one the chosen bit
    /// is delivered directly (an ideal transfer).
    pub(crate) fn ot_bit(
        &mut self,
        label: &str,
        sender: usize,
        receiver: usize,
        m0: bool,
        m1: bool,
        choice: bool,
        pkg: Option<&OtInitPackage>,
    ) -> Result<bool, ProtocolError> {
        let delivered = match pkg {
            Some(pkg) => {
                let (bit, transcript) = ot::transfer_bit(m0, m1, choice, pkg)?;
                if self.opts.trace {
                    self.events.push(TraceEvent {
                        round: self.round,
                        sender,
                        receiver: Receiver::Judge(receiver),
                        kind: ChannelKind::ObliviousTransfer,
                        label: label.to_string(),
                        payload: Payload::Ot {
                            e: transcript.e.into(),
                            f0: transcript.f0.bits().iter().map(|&b| u8::from(b)).collect(),
                            f1: transcript.f1.bits().iter().map(|&b| u8::from(b)).collect(),
                            delivered: transcript
                                .delivered
                                .bits()
                                .iter()
                                .map(|&b| u8::from(b))
                                .collect(),
                        },
                    });
                }
                if self.opts.ot_detail == OtDetail::Transcript {
                    self.inbox[sender].push(transcript.e.into());
                    self.inbox[receiver].push(transcript.f0.bits()[0].into());
                    self.inbox[receiver].push(transcript.f1.bits()[0].into());
                }
                bit
            }
            None => {
                if choice {
                    m1
                } else {
                    m0
                }
            }
        };
        self.inbox[receiver].push(delivered.into());
        Ok(delivered)
    }

    pub(crate) fn private_bit(&mut self, label: &str, sender: usize, receiver: usize, bit: bool) {
        if self.opts.trace {
            self.events.push(TraceEvent {
                round: self.round,
                sender,
                receiver: Receiver::Judge(receiver),
                kind: ChannelKind::PrivatePointToPoint,
                label: label.to_string(),
                payload: Payload::Bit { value: bit.into() },
            });
        }
        self.inbox[receiver].push(bit.into());
    }

    pub(crate) fn broadcast_num(&mut self, label: &str, sender: usize, value: u64) {
        debug_assert!(value < u8::MAX as u64);
        if self.opts.trace {
            self.events.push(TraceEvent {
                round: self.round,
                sender,
                receiver: Receiver::All,
                kind: ChannelKind::Broadcast,
                label: label.to_string(),
                payload: Payload::Num { value },
            });
        }
        self.public.push(value as u8);
    }

    /// The verdict announcement of the two majority protocols.
    pub(crate) fn announce_verdict(&mut self, sender: usize, bit: bool) {
        if self.opts.trace {
            self.events.push(TraceEvent {
                round: self.round,
                sender,
                receiver: Receiver::All,
                kind: ChannelKind::Broadcast,
                label: "verdict".to_string(),
                payload: Payload::Bit { value: bit.into() },
            });
        }
        self.verdict_value = VerdictValue::Value(bit.into());
        self.verdict = Verdict::from_bit(bit);
    }

    /// The publicly computable outcome of the modular-sum protocol.
    pub(crate) fn settle_count(&mut self, count: u64, majority: bool) {
        debug_assert!(count < u8::MAX as u64);
        self.verdict_value = VerdictValue::Value(count as u8);
        self.verdict = Verdict::from_bit(majority);
    }

    /// Closes the current round, snapshotting the global state.
    pub(crate) fn end_round(&mut self) {
        if self.opts.snapshots {
            self.snapshots.push(GlobalState {
                round: self.round,
                verdict: self.verdict_value,
                public: self.public.clone(),
                locals: (0..self.judges)
                    .map(|i| LocalState {
                        decision: self.decisions.bits()[i],
                        randomness: self.rand_bytes[i].clone(),
                        inbox: self.inbox[i].clone(),
                    })
                    .collect(),
            });
        }
        self.round += 1;
    }

    pub(crate) fn finish(self) -> Execution {
        Execution {
            judges: self.judges,
            decisions: self.decisions,
            verdict_value: self.verdict_value,
            verdict: self.verdict,
            events: self.events,
            snapshots: self.snapshots,
            rand_items: self.rand_items,
        }
    }
}
