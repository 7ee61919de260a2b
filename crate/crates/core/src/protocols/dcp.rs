//! The modular-sum protocol, dining-cryptographers style.
//!
//! The 2n+1 judges sit on a ring. Adjacent judges share a uniform secret
//! modulo 2n+2, so judge i holds the secrets s_{i-1} and s_i. Everyone
//! broadcasts its decision blinded by the difference of its two secrets,
//! `a_i = s_i - s_{i-1} + d_i (mod 2n+2)`; the differences telescope away
//! in the sum of all announcements, which is therefore the guilty count.
//! The count stays below the modulus, so the verdict (count >= n+1) is
//! public immediately after the single broadcast round.

use super::exec::{Execution, Recorder};
use super::{check_bench, ProtocolError, RecordingOptions};
use crate::majority::{DecisionVector, Verdict};
use rand::Rng;
use serde::Serialize;

/// The arithmetic of one run: the ring secrets, what was broadcast, and
/// the recovered count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DcpState {
    pub modulus: u64,
    pub secrets: Vec<u64>,
    pub announcements: Vec<u64>,
    pub count: u64,
    pub verdict: Verdict,
}

/// Uniform ring secrets for a bench of the given size.
pub fn random_secrets<R: Rng>(judges: usize, rng: &mut R) -> Vec<u64> {
    let modulus = judges as u64 + 1;
    (0..judges).map(|_| rng.gen_range(0..modulus)).collect()
}

pub fn run_dcp_sum(
    decisions: &DecisionVector,
    secrets: &[u64],
    opts: RecordingOptions,
) -> Result<(DcpState, Execution), ProtocolError> {
    let judges = decisions.len();
    check_bench(judges)?;
    if secrets.len() != judges {
        return Err(ProtocolError::SecretCount {
            expected: judges,
            got: secrets.len(),
        });
    }
    let modulus = judges as u64 + 1;
    for &s in secrets {
        if s >= modulus {
            return Err(ProtocolError::SecretOutOfRange { value: s, modulus });
        }
    }
    let mut rec = Recorder::new(decisions, opts);

    // Round 0: secret s_i goes to both ring neighbours i and i+1. Each
    // judge records its predecessor's secret first, then its own.
    for i in 0..judges {
        let prev = (i + judges - 1) % judges;
        rec.deal_secret(i, &format!("s{prev}"), secrets[prev]);
        rec.deal_secret(i, &format!("s{i}"), secrets[i]);
    }
    rec.end_round();

    // Round 1: the blinded announcements. Their sum telescopes to the
    // guilty count, which everyone reads off the same round.
    let mut announcements = Vec::with_capacity(judges);
    let mut sum = 0u64;
    for i in 0..judges {
        let prev = (i + judges - 1) % judges;
        let a = (secrets[i] + modulus - secrets[prev] + u64::from(decisions.d(i)?)) % modulus;
        rec.broadcast_num(&format!("a{i}"), i, a);
        announcements.push(a);
        sum = (sum + a) % modulus;
    }
    let majority = sum >= (judges as u64 + 1) / 2;
    rec.settle_count(sum, majority);
    rec.end_round();

    let exec = rec.finish();
    Ok((
        DcpState {
            modulus,
            secrets: secrets.to_vec(),
            announcements,
            count: sum,
            verdict: exec.verdict,
        },
        exec,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majority::majority;
    use crate::protocols::{OtDetail, VerdictValue};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn snapshot_opts() -> RecordingOptions {
        RecordingOptions {
            trace: true,
            snapshots: true,
            ot_detail: OtDetail::Delivered,
        }
    }

    fn all_secret_vectors(judges: usize) -> Vec<Vec<u64>> {
        let modulus = judges as u64 + 1;
        let total = modulus.pow(judges as u32);
        (0..total)
            .map(|mut v| {
                (0..judges)
                    .map(|_| {
                        let digit = v % modulus;
                        v /= modulus;
                        digit
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn worked_three_judge_run() {
        // Secrets (1, 3, 2) and decisions (1, 0, 1) announce (0, 2, 0):
        // a_0 = 1 - 2 + 1, a_1 = 3 - 1 + 0, a_2 = 2 - 3 + 1 (mod 4). The
        // sum 2 is the guilty count and reaches the majority threshold.
        let decisions = DecisionVector::from_bits(&[1, 0, 1]).unwrap();
        let (state, exec) = run_dcp_sum(&decisions, &[1, 3, 2], snapshot_opts()).unwrap();
        assert_eq!(state.modulus, 4);
        assert_eq!(state.announcements, vec![0, 2, 0]);
        assert_eq!(state.count, 2);
        assert_eq!(state.verdict, Verdict::Guilty);
        assert_eq!(exec.snapshots.len(), 2);
        assert_eq!(exec.snapshots[0].verdict, VerdictValue::Unknown);
        assert_eq!(exec.snapshots[1].verdict, VerdictValue::Value(2));
        assert_eq!(exec.snapshots[1].public, vec![0, 2, 0]);
        // Judge 1 holds s_0 and s_1.
        assert_eq!(exec.snapshots[0].locals[1].randomness, vec![1, 3]);
    }

    #[test]
    fn count_is_exact_for_every_secret_vector() {
        for dec in DecisionVector::enumerate_all(3) {
            let expect_count = dec.ones() as u64;
            let expect_verdict = Verdict::from_bit(majority(&dec).unwrap());
            for secrets in all_secret_vectors(3) {
                let (state, _) =
                    run_dcp_sum(&dec, &secrets, RecordingOptions::default()).unwrap();
                assert_eq!(state.count, expect_count, "decisions {dec:?}");
                assert_eq!(state.verdict, expect_verdict);
            }
        }
    }

    #[test]
    fn count_is_exact_on_sampled_wider_benches() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for judges in [5usize, 7, 9] {
            for _ in 0..50 {
                let bits: Vec<u8> = (0..judges).map(|_| rng.gen_range(0..2u8)).collect();
                let dec = DecisionVector::from_bits(&bits).unwrap();
                let secrets = random_secrets(judges, &mut rng);
                let (state, _) =
                    run_dcp_sum(&dec, &secrets, RecordingOptions::default()).unwrap();
                assert_eq!(state.count, dec.ones() as u64);
            }
        }
    }

    #[test]
    fn equal_counts_induce_identical_announcement_multisets() {
        // Over all secret vectors, the announcements only depend on the
        // decisions through their sum: any two single-guilty benches
        // produce the same multiset of announcement vectors.
        let collect = |bits: &[u8]| {
            let dec = DecisionVector::from_bits(bits).unwrap();
            let mut all: Vec<Vec<u64>> = all_secret_vectors(3)
                .into_iter()
                .map(|s| {
                    run_dcp_sum(&dec, &s, RecordingOptions::default())
                        .unwrap()
                        .0
                        .announcements
                })
                .collect();
            all.sort();
            all
        };
        let first = collect(&[1, 0, 0]);
        assert_eq!(first, collect(&[0, 1, 0]));
        assert_eq!(first, collect(&[0, 0, 1]));
        assert_ne!(first, collect(&[1, 1, 0]));
    }

    #[test]
    fn input_validation() {
        let dec = DecisionVector::from_bits(&[1, 0, 1]).unwrap();
        assert_eq!(
            run_dcp_sum(&dec, &[1, 2], RecordingOptions::default()).unwrap_err(),
            ProtocolError::SecretCount { expected: 3, got: 2 }
        );
        assert_eq!(
            run_dcp_sum(&dec, &[1, 2, 4], RecordingOptions::default()).unwrap_err(),
            ProtocolError::SecretOutOfRange { value: 4, modulus: 4 }
        );
        let even = DecisionVector::from_bits(&[1, 0]).unwrap();
        assert_eq!(
            run_dcp_sum(&even, &[0, 0], RecordingOptions::default()).unwrap_err(),
            ProtocolError::BadBench(2)
        );
    }
}
