//! The three-judge protocol.
//!
//! Judge 1 splits its decision `b` into xor shares, one pair recovering
//! `b` (the AND pair) and one recovering `!b` (the OR pair). Judge 2 uses
//! two oblivious transfers to pick, from each pair, the share matching its
//! own decision `c`; the picked AND shares xor to `b & c`, the picked OR
//! shares to `!(b | c)`. Judge 0 then obliviously fetches the AND pick
//! from both when its own decision is 0 and the OR pick when it is 1, and
//! announces the xor (negated in the OR case). Since the majority of three
//! bits is `b & c` when `a = 0` and `b | c` when `a = 1`, the announced
//! bit is the verdict, and nobody has seen more than masked shares.

use super::exec::{Execution, Recorder};
use super::{ProtocolError, RecordingOptions, ShareSet};
use crate::majority::{DecisionVector, Verdict};
use crate::ot::{ot_init, OtInitPackage};
use rand::Rng;
use serde::Serialize;

/// How judge 0 drives step five. [`StepFiveRule::Prose`] selects the share
/// kind named by its own decision and announces `xor` / `!xor` for AND /
/// OR; [`StepFiveRule::AsPrinted`] inverts the selection bit and swaps the
/// announcements, which computes OR when the majority is AND and vice
/// versa — kept as a regression fixture for the functionality sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepFiveRule {
    Prose,
    AsPrinted,
}

/// All coins of one run. The two share coins are judge 1's free choices;
/// the four optional packages are the trusted initialiser's material for
/// the four transfers. `None` runs a transfer ideally (the chosen message
/// is handed over directly), which leaves the delivered values unchanged.
#[derive(Debug, Clone, Serialize)]
pub struct MmRandomness {
    pub share_and: bool,
    pub share_or: bool,
    pub ot_and_to_c: Option<OtInitPackage>,
    pub ot_or_to_c: Option<OtInitPackage>,
    pub ot_b_to_a: Option<OtInitPackage>,
    pub ot_c_to_a: Option<OtInitPackage>,
}

impl MmRandomness {
    /// Ideal transfers, explicit share coins.
    pub fn from_coins(share_and: bool, share_or: bool) -> MmRandomness {
        MmRandomness {
            share_and,
            share_or,
            ot_and_to_c: None,
            ot_or_to_c: None,
            ot_b_to_a: None,
            ot_c_to_a: None,
        }
    }

    /// Fresh coins and initialiser packages for every transfer.
    pub fn seeded<R: Rng>(rng: &mut R) -> MmRandomness {
        MmRandomness {
            share_and: rng.gen(),
            share_or: rng.gen(),
            ot_and_to_c: Some(ot_init(1, rng).expect("k is positive")),
            ot_or_to_c: Some(ot_init(1, rng).expect("k is positive")),
            ot_b_to_a: Some(ot_init(1, rng).expect("k is positive")),
            ot_c_to_a: Some(ot_init(1, rng).expect("k is positive")),
        }
    }
}

const A: usize = 0;
const B: usize = 1;
const C: usize = 2;

pub fn run_three_judges(
    decisions: &DecisionVector,
    randomness: &MmRandomness,
    rule: StepFiveRule,
    opts: RecordingOptions,
) -> Result<(Verdict, Execution), ProtocolError> {
    if decisions.len() != 3 {
        return Err(ProtocolError::WrongBench {
            protocol: "three_judges_mm",
            expected: 3,
            got: decisions.len(),
        });
    }
    let a = decisions.d(A)?;
    let b = decisions.d(B)?;
    let c = decisions.d(C)?;
    let mut rec = Recorder::new(decisions, opts);

    // Round 0: randomness only. Judge 1 draws its share coins; the
    // initialiser deals pads for the four transfers.
    rec.deal_coin(B, "share_and", randomness.share_and);
    rec.deal_coin(B, "share_or", randomness.share_or);
    let deals: [(&str, usize, usize, &Option<OtInitPackage>); 4] = [
        ("ot_and_to_c", B, C, &randomness.ot_and_to_c),
        ("ot_or_to_c", B, C, &randomness.ot_or_to_c),
        ("ot_b_to_a", B, A, &randomness.ot_b_to_a),
        ("ot_c_to_a", C, A, &randomness.ot_c_to_a),
    ];
    for (label, sender, receiver, pkg) in deals {
        if let Some(pkg) = pkg {
            rec.deal_ot_package(label, sender, receiver, pkg);
        }
    }
    rec.end_round();

    // Round 1: judge 2 picks one share of each kind. Choosing with its own
    // decision makes the picked AND pair xor to `b & c` and the picked OR
    // pair xor to `!(b | c)`.
    let shares = ShareSet::for_decision(b, randomness.share_and, randomness.share_or);
    let c_and = rec.ot_bit(
        "and_share",
        B,
        C,
        shares.b_and(),
        shares.b_and_prime(),
        c,
        randomness.ot_and_to_c.as_ref(),
    )?;
    let c_or = rec.ot_bit(
        "or_share",
        B,
        C,
        shares.b_or_prime(),
        shares.b_or(),
        c,
        randomness.ot_or_to_c.as_ref(),
    )?;
    rec.end_round();

    // Round 2: judge 0 fetches the pick matching the majority function its
    // own decision selects (AND for 0, OR for 1).
    let choice = match rule {
        StepFiveRule::Prose => a,
        StepFiveRule::AsPrinted => !a,
    };
    let pick_b = rec.ot_bit(
        "pick_b",
        B,
        A,
        shares.b_and(),
        shares.b_or(),
        choice,
        randomness.ot_b_to_a.as_ref(),
    )?;
    let pick_c = rec.ot_bit(
        "pick_c",
        C,
        A,
        c_and,
        c_or,
        choice,
        randomness.ot_c_to_a.as_ref(),
    )?;
    rec.end_round();

    // Round 3: the announcement. The AND picks xor to the verdict
    // directly, the OR picks to its negation.
    let xor = pick_b ^ pick_c;
    let announced = match (rule, a) {
        (StepFiveRule::Prose, false) => xor,
        (StepFiveRule::Prose, true) => !xor,
        (StepFiveRule::AsPrinted, false) => !xor,
        (StepFiveRule::AsPrinted, true) => xor,
    };
    rec.announce_verdict(A, announced);
    rec.end_round();

    let exec = rec.finish();
    Ok((exec.verdict, exec))
}
