//! The centralised protocol for benches of 2n+1 judges.
//!
//! Judges 1..2n work in pairs (2i-1, 2i). Within a pair the first judge
//! splits its decision into AND and OR shares exactly as in the three-judge
//! protocol and the second judge obliviously picks the shares matching its
//! own decision, flipping the picked OR share so the pair's share bits xor
//! to the pair's AND and OR outright. All four bits travel on private
//! channels to judge 0, who recovers AND and OR per pair. Since
//! `(x & y) + (x | y) = x + y`, summing those and its own decision gives
//! the leader the exact guilty count; it announces whether the count
//! reaches n+1. The leader learns the count and each pair's AND/OR — for a
//! split pair that reveals nothing about which member voted guilty.

use super::exec::{Execution, Recorder};
use super::{check_bench, ProtocolError, RecordingOptions, ShareSet};
use crate::majority::{DecisionVector, Verdict};
use crate::ot::{ot_init, OtInitPackage};
use rand::Rng;
use serde::Serialize;

/// Coins for one pair: the first member's share choices and, optionally,
/// initialiser packages for the pair's two transfers.
#[derive(Debug, Clone, Serialize)]
pub struct PairRandomness {
    pub share_and: bool,
    pub share_or: bool,
    pub ot_and: Option<OtInitPackage>,
    pub ot_or: Option<OtInitPackage>,
}

impl PairRandomness {
    pub fn from_coins(share_and: bool, share_or: bool) -> PairRandomness {
        PairRandomness {
            share_and,
            share_or,
            ot_and: None,
            ot_or: None,
        }
    }

    pub fn seeded<R: Rng>(rng: &mut R) -> PairRandomness {
        PairRandomness {
            share_and: rng.gen(),
            share_or: rng.gen(),
            ot_and: Some(ot_init(1, rng).expect("k is positive")),
            ot_or: Some(ot_init(1, rng).expect("k is positive")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CentralisedRandomness {
    pub pairs: Vec<PairRandomness>,
}

impl CentralisedRandomness {
    pub fn from_coins(coins: &[(bool, bool)]) -> CentralisedRandomness {
        CentralisedRandomness {
            pairs: coins
                .iter()
                .map(|&(a, o)| PairRandomness::from_coins(a, o))
                .collect(),
        }
    }

    pub fn seeded<R: Rng>(pairs: usize, rng: &mut R) -> CentralisedRandomness {
        CentralisedRandomness {
            pairs: (0..pairs).map(|_| PairRandomness::seeded(rng)).collect(),
        }
    }
}

pub fn run_centralised(
    decisions: &DecisionVector,
    randomness: &CentralisedRandomness,
    opts: RecordingOptions,
) -> Result<(Verdict, Execution), ProtocolError> {
    let judges = decisions.len();
    check_bench(judges)?;
    let pairs = (judges - 1) / 2;
    if randomness.pairs.len() != pairs {
        return Err(ProtocolError::PairCount {
            expected: pairs,
            got: randomness.pairs.len(),
        });
    }
    let mut rec = Recorder::new(decisions, opts);

    // Round 0: share coins for each pair's first member, transfer pads.
    for (i, pr) in randomness.pairs.iter().enumerate() {
        let first = 2 * i + 1;
        let second = 2 * i + 2;
        rec.deal_coin(first, &format!("share_and_{}", i + 1), pr.share_and);
        rec.deal_coin(first, &format!("share_or_{}", i + 1), pr.share_or);
        if let Some(pkg) = &pr.ot_and {
            rec.deal_ot_package(&format!("ot_and_{}", i + 1), first, second, pkg);
        }
        if let Some(pkg) = &pr.ot_or {
            rec.deal_ot_package(&format!("ot_or_{}", i + 1), first, second, pkg);
        }
    }
    rec.end_round();

    // Round 1: within each pair, the second judge obliviously picks the
    // share of each kind matching its decision.
    let mut picked = Vec::with_capacity(pairs);
    for (i, pr) in randomness.pairs.iter().enumerate() {
        let first = 2 * i + 1;
        let second = 2 * i + 2;
        let shares = ShareSet::for_decision(decisions.d(first)?, pr.share_and, pr.share_or);
        let choice = decisions.d(second)?;
        let delivered_and = rec.ot_bit(
            &format!("and_share_{}", i + 1),
            first,
            second,
            shares.b_and(),
            shares.b_and_prime(),
            choice,
            pr.ot_and.as_ref(),
        )?;
        let delivered_or = rec.ot_bit(
            &format!("or_share_{}", i + 1),
            first,
            second,
            shares.b_or_prime(),
            shares.b_or(),
            choice,
            pr.ot_or.as_ref(),
        )?;
        picked.push((shares, delivered_and, delivered_or));
    }
    rec.end_round();

    // Round 2: every pair member reports its two share bits to the leader.
    // The second member flips its OR bit: the picked pair then xors to
    // d_first | d_second instead of its negation.
    let mut count = u64::from(decisions.d(0)?);
    for (i, (shares, delivered_and, delivered_or)) in picked.iter().enumerate() {
        let first = 2 * i + 1;
        let second = 2 * i + 2;
        rec.private_bit(&format!("report_and_{}a", i + 1), first, 0, shares.b_and());
        rec.private_bit(&format!("report_or_{}a", i + 1), first, 0, shares.b_or());
        rec.private_bit(&format!("report_and_{}b", i + 1), second, 0, *delivered_and);
        rec.private_bit(&format!("report_or_{}b", i + 1), second, 0, !*delivered_or);
        let pair_and = shares.b_and() ^ *delivered_and;
        let pair_or = shares.b_or() ^ !*delivered_or;
        count += u64::from(pair_and) + u64::from(pair_or);
    }
    rec.end_round();

    // Round 3: the leader announces whether the guilty count reaches n+1.
    let guilty = count >= (pairs as u64) + 1;
    rec.announce_verdict(0, guilty);
    rec.end_round();

    let exec = rec.finish();
    Ok((exec.verdict, exec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majority::majority;
    use crate::protocols::OtDetail;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_coin_vectors(pairs: usize) -> Vec<Vec<(bool, bool)>> {
        (0..1u32 << (2 * pairs))
            .map(|m| {
                (0..pairs)
                    .map(|i| (m & (1 << (2 * i)) != 0, m & (1 << (2 * i + 1)) != 0))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn matches_majority_exhaustively_for_five_judges() {
        for dec in DecisionVector::enumerate_all(5) {
            let expect = majority(&dec).unwrap();
            for coins in all_coin_vectors(2) {
                let randomness = CentralisedRandomness::from_coins(&coins);
                let (verdict, _) =
                    run_centralised(&dec, &randomness, RecordingOptions::default()).unwrap();
                assert_eq!(verdict, Verdict::from_bit(expect), "decisions {dec:?}");
            }
        }
    }

    #[test]
    fn matches_majority_with_real_transfers_for_seven_judges() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dec in DecisionVector::enumerate_all(7) {
            let expect = majority(&dec).unwrap();
            let randomness = CentralisedRandomness::seeded(3, &mut rng);
            let (verdict, _) = run_centralised(
                &dec,
                &randomness,
                RecordingOptions {
                    trace: true,
                    snapshots: true,
                    ot_detail: OtDetail::Transcript,
                },
            )
            .unwrap();
            assert_eq!(verdict, Verdict::from_bit(expect), "decisions {dec:?}");
        }
    }

    #[test]
    fn split_pair_reports_are_order_blind() {
        // When a pair disagrees, the four bits the leader receives are a
        // function of the pair's coins alone, so both orderings of the
        // disagreement produce byte-identical leader inboxes.
        let snapshot_opts = RecordingOptions {
            trace: false,
            snapshots: true,
            ot_detail: OtDetail::Delivered,
        };
        for coins in all_coin_vectors(2) {
            let randomness = CentralisedRandomness::from_coins(&coins);
            let leader_inbox = |bits: &[u8]| {
                let dec = DecisionVector::from_bits(bits).unwrap();
                let (_, exec) = run_centralised(&dec, &randomness, snapshot_opts).unwrap();
                exec.snapshots[2].locals[0].inbox.clone()
            };
            assert_eq!(leader_inbox(&[0, 0, 1, 1, 1]), leader_inbox(&[0, 1, 0, 1, 1]));
            assert_eq!(leader_inbox(&[1, 1, 1, 0, 1]), leader_inbox(&[1, 1, 1, 1, 0]));
        }
    }

    #[test]
    fn agreeing_pair_is_readable_from_reports() {
        // Both members guilty vs both innocent must differ in the leader's
        // inbox whatever the coins: the pair's AND equals the shared vote.
        for coins in all_coin_vectors(1) {
            let randomness = CentralisedRandomness::from_coins(&coins);
            let snapshot_opts = RecordingOptions {
                trace: false,
                snapshots: true,
                ot_detail: OtDetail::Delivered,
            };
            let both_guilty = DecisionVector::from_bits(&[0, 1, 1]).unwrap();
            let both_innocent = DecisionVector::from_bits(&[0, 0, 0]).unwrap();
            let (_, g) = run_centralised(&both_guilty, &randomness, snapshot_opts).unwrap();
            let (_, i) = run_centralised(&both_innocent, &randomness, snapshot_opts).unwrap();
            assert_ne!(
                g.snapshots[2].locals[0].inbox,
                i.snapshots[2].locals[0].inbox
            );
        }
    }

    #[test]
    fn pair_randomness_must_cover_the_bench() {
        let dec = DecisionVector::from_bits(&[1, 0, 1, 0, 1]).unwrap();
        let randomness = CentralisedRandomness::from_coins(&[(false, false)]);
        let err = run_centralised(&dec, &randomness, RecordingOptions::default()).unwrap_err();
        assert_eq!(err, ProtocolError::PairCount { expected: 2, got: 1 });
    }

    #[test]
    fn even_benches_are_rejected() {
        let dec = DecisionVector::from_bits(&[1, 0, 1, 0]).unwrap();
        let randomness = CentralisedRandomness::from_coins(&[(false, false)]);
        let err = run_centralised(&dec, &randomness, RecordingOptions::default()).unwrap_err();
        assert_eq!(err, ProtocolError::BadBench(4));
    }
}
