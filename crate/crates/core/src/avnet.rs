//! Computationally anonymous majority voting in a prime-order subgroup
//! of the integers mod p — the number-theoretic counterpart to the
//! information-theoretic protocols elsewhere in this crate.
//!
//! Three broadcast phases over a ring of 2n+1 judges:
//!
//! 1. every judge i publishes g^{x_i}; from the publics alone anyone can
//!    form g^{y_i} with y_i = Σ_{j<i} x_j − Σ_{j>i} x_j, and judge i
//!    publishes the nonce g^{N_i} = (g^{y_i})^{x_i}. The nonces cancel:
//!    ∏ g^{N_i} = 1, because Σ x_i·y_i telescopes to zero.
//! 2. the majority counts M = {n+1, …, 2n+1} are encoded as g^k and
//!    pushed around the ring; each judge raises every value to its x_i
//!    and secretly permutes the list. The final set M' is
//!    {g^{k·X} : k ∈ M} with X = ∏ x_i, in an order nobody controls.
//! 3. judge i opens z_{i,1} = (g^{N_i}·g^{v_i})^{x_i} and the ring
//!    applies the remaining exponents; the product of the final column
//!    is Z = g^{(Σv)·X} since the nonces cancel. The verdict is guilty
//!    exactly when Z lands in M'.
//!
//! Anonymity here is computational (discrete log), not information
//! theoretic, so these runs are deliberately *not* fed into the
//! knowledge checker: every judge's view pins the votes down uniquely
//! once exponents are visible, and an epistemic analysis would report
//! vacuous knowledge instead of the intended hardness assumption.
//!
//! Parameters are desk-scale (q up to 61 bits) with 128-bit
//! intermediates; this is a protocol simulator, not a cryptosystem.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AvNetError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("subgroup order {q} does not divide {p} - 1")]
    OrderDoesNotDivide { p: u64, q: u64 },
    #[error("{g} does not generate a subgroup of order {q}")]
    BadGenerator { g: u64, q: u64 },
    #[error("unknown group preset `{0}` (expected small, medium or large)")]
    UnknownPreset(String),
    #[error("bench of {0} judges: need an odd count of at least one")]
    BadBench(usize),
    #[error("group order {q} is too small for {judges} judges; counts would collide")]
    GroupTooSmall { q: u64, judges: usize },
    #[error("secret #{index} is {value}; secrets must lie in 1..{q}")]
    SecretOutOfRange { index: usize, value: u64, q: u64 },
    #[error("expected {expected} {what}, got {got}")]
    ArityMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("permutation #{0} is not a bijection on the count set")]
    NotAPermutation(usize),
    #[error("nonce product is {0}, not 1: the pairwise masks failed to cancel")]
    NonceCancellation(u64),
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the fixed base set covers all of u64.
fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let trailing = (n - 1).trailing_zeros();
    let odd_part = (n - 1) >> trailing;
    'witness: for a in BASES {
        let mut x = pow_mod(a, odd_part, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..trailing {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A prime-order subgroup ⟨g⟩ of the multiplicative group mod p.
/// Group elements live mod p; exponents live mod q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupParams {
    pub p: u64,
    pub q: u64,
    pub g: u64,
}

impl GroupParams {
    pub fn new(p: u64, q: u64, g: u64) -> Result<GroupParams, AvNetError> {
        if !is_prime(p) {
            return Err(AvNetError::NotPrime(p));
        }
        if !is_prime(q) {
            return Err(AvNetError::NotPrime(q));
        }
        if (p - 1) % q != 0 {
            return Err(AvNetError::OrderDoesNotDivide { p, q });
        }
        // q is prime, so any g ≠ 1 with g^q = 1 has order exactly q.
        if g <= 1 || g >= p || pow_mod(g, q, p) != 1 {
            return Err(AvNetError::BadGenerator { g, q });
        }
        Ok(GroupParams { p, q, g })
    }

    pub fn preset(name: &str) -> Result<GroupParams, AvNetError> {
        match name {
            "small" => GroupParams::new(23, 11, 2),
            "medium" => GroupParams::new(2039, 1019, 4),
            // 61-bit safe prime: p = 2q + 1, g = 2² is a quadratic residue.
            "large" => GroupParams::new(2_305_843_009_213_699_919, 1_152_921_504_606_849_959, 4),
            other => Err(AvNetError::UnknownPreset(other.to_string())),
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }

    pub fn pow(&self, base: u64, exp: u64) -> u64 {
        pow_mod(base, exp % self.q, self.p)
    }

    /// g^exp, with the exponent reduced mod q.
    pub fn pow_g(&self, exp: u64) -> u64 {
        self.pow(self.g, exp)
    }

    pub fn inv(&self, a: u64) -> u64 {
        pow_mod(a, self.p - 2, self.p)
    }

    /// Below this size the discrete log is desk-computable; callers
    /// should surface a warning rather than refuse to run.
    pub fn below_recommended_size(&self) -> bool {
        self.q < 1 << 16
    }
}

/// Reserved slot for a Schnorr-style proof of exponent knowledge.
/// All parties here are honest-but-curious, so the proof is a tagged
/// assertion that always verifies.
#[derive(Debug, Clone, Serialize)]
pub struct ProofOfKnowledge {
    pub claim: String,
}

impl ProofOfKnowledge {
    pub fn verify(&self) -> bool {
        true
    }
}

/// Outcome of the first broadcast round, kept per judge. The secrets
/// stay in the struct because the simulator plays every role.
#[derive(Debug, Clone, Serialize)]
pub struct AvNetRound1 {
    /// x_i, each in 1..q.
    pub secrets: Vec<u64>,
    /// g^{x_i}.
    pub publics: Vec<u64>,
    /// g^{y_i}, derived from the publics alone.
    pub blinds: Vec<u64>,
    /// g^{N_i} = (g^{y_i})^{x_i}; the product over the bench is 1.
    pub nonces: Vec<u64>,
    pub proofs: Vec<ProofOfKnowledge>,
}

fn check_bench(gp: &GroupParams, judges: usize) -> Result<(), AvNetError> {
    if judges == 0 || judges % 2 == 0 {
        return Err(AvNetError::BadBench(judges));
    }
    // Counts 0..=2n+1 must map to distinct powers of g.
    if gp.q <= judges as u64 {
        return Err(AvNetError::GroupTooSmall { q: gp.q, judges });
    }
    Ok(())
}

pub fn random_secrets(gp: &GroupParams, judges: usize, rng: &mut impl Rng) -> Vec<u64> {
    (0..judges).map(|_| rng.gen_range(1..gp.q)).collect()
}

pub fn step1_nonces(gp: &GroupParams, secrets: &[u64]) -> Result<AvNetRound1, AvNetError> {
    let judges = secrets.len();
    check_bench(gp, judges)?;
    for (index, &value) in secrets.iter().enumerate() {
        if value == 0 || value >= gp.q {
            return Err(AvNetError::SecretOutOfRange {
                index,
                value,
                q: gp.q,
            });
        }
    }
    let publics: Vec<u64> = secrets.iter().map(|&x| gp.pow_g(x)).collect();
    let blinds: Vec<u64> = (0..judges)
        .map(|i| {
            let before = publics[..i].iter().fold(1, |acc, &v| gp.mul(acc, v));
            let after = publics[i + 1..].iter().fold(1, |acc, &v| gp.mul(acc, v));
            gp.mul(before, gp.inv(after))
        })
        .collect();
    let nonces: Vec<u64> = (0..judges).map(|i| gp.pow(blinds[i], secrets[i])).collect();
    let product = nonces.iter().fold(1, |acc, &v| gp.mul(acc, v));
    if product != 1 {
        return Err(AvNetError::NonceCancellation(product));
    }
    let proofs = (0..judges)
        .map(|i| ProofOfKnowledge {
            claim: format!("judge {i} knows the exponent of {}", publics[i]),
        })
        .collect();
    Ok(AvNetRound1 {
        secrets: secrets.to_vec(),
        publics,
        blinds,
        nonces,
        proofs,
    })
}

/// The shuffled encoding of the majority counts. `rounds[i]` is the
/// list after judge i's exponent-and-permute pass; `final_set` is the
/// last of them, equal to {g^{k·X} : k ∈ M} as a set but in an order
/// no single judge controls.
#[derive(Debug, Clone, Serialize)]
pub struct AvNetShuffle {
    /// M = {n+1, …, 2n+1}.
    pub majority_counts: Vec<u64>,
    pub rounds: Vec<Vec<u64>>,
    pub final_set: Vec<u64>,
}

pub fn random_permutations(judges: usize, size: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    (0..judges)
        .map(|_| {
            let mut perm: Vec<usize> = (0..size).collect();
            perm.shuffle(rng);
            perm
        })
        .collect()
}

/// `permutations[i][j]` names the slot of the incoming list whose value
/// judge i places at position j.
pub fn step2_shuffle(
    gp: &GroupParams,
    r1: &AvNetRound1,
    permutations: &[Vec<usize>],
) -> Result<AvNetShuffle, AvNetError> {
    let judges = r1.secrets.len();
    if permutations.len() != judges {
        return Err(AvNetError::ArityMismatch {
            what: "permutations",
            expected: judges,
            got: permutations.len(),
        });
    }
    let n = (judges - 1) / 2;
    let majority_counts: Vec<u64> = (n as u64 + 1..=2 * n as u64 + 1).collect();
    let size = majority_counts.len();
    for (i, perm) in permutations.iter().enumerate() {
        let mut seen = vec![false; size];
        if perm.len() != size || !perm.iter().all(|&j| j < size && !std::mem::replace(&mut seen[j], true)) {
            return Err(AvNetError::NotAPermutation(i));
        }
    }
    let mut values: Vec<u64> = majority_counts.iter().map(|&k| gp.pow_g(k)).collect();
    let mut rounds = Vec::with_capacity(judges);
    for (i, perm) in permutations.iter().enumerate() {
        let powed: Vec<u64> = values.iter().map(|&v| gp.pow(v, r1.secrets[i])).collect();
        values = perm.iter().map(|&j| powed[j]).collect();
        rounds.push(values.clone());
    }
    let final_set = values;
    Ok(AvNetShuffle {
        majority_counts,
        rounds,
        final_set,
    })
}

/// The tally chain. `rounds[r-1]` holds z_{·,r}; `product` is
/// Z = ∏ z_{i,2n+1} = g^{(Σv)·X}.
#[derive(Debug, Clone, Serialize)]
pub struct AvNetVotes {
    pub rounds: Vec<Vec<u64>>,
    pub product: u64,
}

pub fn step3_votes_and_verdict(
    gp: &GroupParams,
    r1: &AvNetRound1,
    shuffle: &AvNetShuffle,
    votes: &[bool],
) -> Result<(bool, AvNetVotes), AvNetError> {
    let judges = r1.secrets.len();
    if votes.len() != judges {
        return Err(AvNetError::ArityMismatch {
            what: "votes",
            expected: judges,
            got: votes.len(),
        });
    }
    // z_{i,1} = (g^{N_i} · g^{v_i})^{x_i}: formed from public values and
    // the judge's own exponent only.
    let mut column: Vec<u64> = (0..judges)
        .map(|i| {
            let masked = gp.mul(r1.nonces[i], if votes[i] { gp.g } else { 1 });
            gp.pow(masked, r1.secrets[i])
        })
        .collect();
    let mut rounds = Vec::with_capacity(judges);
    rounds.push(column.clone());
    for _ in 1..judges {
        column = (0..judges)
            .map(|i| gp.pow(column[(i + judges - 1) % judges], r1.secrets[i]))
            .collect();
        rounds.push(column.clone());
    }
    let product = column.iter().fold(1, |acc, &v| gp.mul(acc, v));
    let verdict = shuffle.final_set.contains(&product);
    Ok((verdict, AvNetVotes { rounds, product }))
}

/// X = ∏ x_i mod q.
pub fn exponent_product(gp: &GroupParams, secrets: &[u64]) -> u64 {
    secrets.iter().fold(1, |acc, &x| mul_mod(acc, x, gp.q))
}

/// g^{(Σv)·X} computed purely on the exponent side — the independent
/// route against which the chain product is checked.
pub fn tally_from_exponents(gp: &GroupParams, secrets: &[u64], votes: &[bool]) -> u64 {
    let sum = votes.iter().filter(|&&v| v).count() as u64 % gp.q;
    gp.pow_g(mul_mod(sum, exponent_product(gp, secrets), gp.q))
}

/// Full protocol transcript in broadcast order.
#[derive(Debug, Clone, Serialize)]
pub struct AvNetTranscript {
    pub group: GroupParams,
    /// g^{x_i} in judge order.
    pub round1: Vec<u64>,
    pub shuffle_rounds: Vec<Vec<u64>>,
    pub vote_rounds: Vec<Vec<u64>>,
    pub verdict: u8,
}

/// Run all three steps with fresh secrets and permutations.
pub fn run_avnet(
    gp: &GroupParams,
    votes: &[bool],
    rng: &mut impl Rng,
) -> Result<(bool, AvNetTranscript), AvNetError> {
    check_bench(gp, votes.len())?;
    let secrets = random_secrets(gp, votes.len(), rng);
    let r1 = step1_nonces(gp, &secrets)?;
    let n = (votes.len() - 1) / 2;
    let permutations = random_permutations(votes.len(), n + 1, rng);
    let shuffle = step2_shuffle(gp, &r1, &permutations)?;
    let (verdict, tally) = step3_votes_and_verdict(gp, &r1, &shuffle, votes)?;
    let transcript = AvNetTranscript {
        group: *gp,
        round1: r1.publics,
        shuffle_rounds: shuffle.rounds,
        vote_rounds: tally.rounds,
        verdict: verdict as u8,
    };
    Ok((verdict, transcript))
}
