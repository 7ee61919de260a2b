//! 1-out-of-2 oblivious transfer with a trusted initialiser.
//!
//! Before the protocol a trusted party deals correlated randomness and
//! leaves: the sender holds two pad strings `(r0, r1)`, the receiver holds
//! a random bit `d` together with `r_d`. To obtain message `m_c` out of
//! `(m0, m1)` the receiver announces `e = c ^ d`; the sender answers
//! `f0 = m0 ^ r_e` and `f1 = m1 ^ r_{1-e}`; the receiver unmasks `f_c`
//! with `r_d`. The sender never sees `c` in the clear and the receiver
//! only ever holds one pad, so the other message stays masked.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OtError {
    #[error("bit strings must have at least one bit")]
    Empty,
    #[error("bit values must be 0 or 1, got {0}")]
    NotABit(u8),
    #[error("bit string lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// Fixed-length string of bits.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BitString(Vec<bool>);

impl std::fmt::Debug for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", u8::from(b))?;
        }
        Ok(())
    }
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Result<Self, OtError> {
        if bits.is_empty() {
            return Err(OtError::Empty);
        }
        Ok(BitString(bits))
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self, OtError> {
        let mut out = Vec::with_capacity(bits.len());
        for &b in bits {
            match b {
                0 => out.push(false),
                1 => out.push(true),
                other => return Err(OtError::NotABit(other)),
            }
        }
        Self::new(out)
    }

    pub fn single(bit: bool) -> Self {
        BitString(vec![bit])
    }

    pub fn random(k: usize, rng: &mut impl Rng) -> Result<Self, OtError> {
        if k == 0 {
            return Err(OtError::Empty);
        }
        Ok(BitString((0..k).map(|_| rng.gen::<bool>()).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Componentwise exclusive or; both strings must have equal length.
    pub fn xor(&self, other: &BitString) -> Result<BitString, OtError> {
        if self.len() != other.len() {
            return Err(OtError::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(BitString(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }

    /// All 2^k strings of length k, in index order (bit i of the index is
    /// position i of the string).
    pub fn enumerate_all(k: usize) -> impl Iterator<Item = BitString> {
        assert!(k >= 1 && k < usize::BITS as usize);
        (0usize..1 << k).map(move |v| BitString((0..k).map(|i| v >> i & 1 == 1).collect()))
    }
}

/// The correlated randomness dealt by the trusted initialiser.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtInitPackage {
    r0: BitString,
    r1: BitString,
    d: bool,
}

impl OtInitPackage {
    pub fn new(r0: BitString, r1: BitString, d: bool) -> Result<Self, OtError> {
        if r0.len() != r1.len() {
            return Err(OtError::LengthMismatch {
                left: r0.len(),
                right: r1.len(),
            });
        }
        Ok(OtInitPackage { r0, r1, d })
    }

    /// What the sender receives from the initialiser.
    pub fn sender_share(&self) -> (&BitString, &BitString) {
        (&self.r0, &self.r1)
    }

    /// What the receiver receives from the initialiser: `d` and `r_d`.
    pub fn receiver_share(&self) -> (bool, &BitString) {
        (self.d, if self.d { &self.r1 } else { &self.r0 })
    }

    pub fn k(&self) -> usize {
        self.r0.len()
    }
}

/// Outcome of one transfer. `e`, `f0` and `f1` are the wire messages;
/// `delivered` is the value the receiver unmasks, which correctness says
/// equals `m_c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtTranscript {
    pub e: bool,
    pub f0: BitString,
    pub f1: BitString,
    pub delivered: BitString,
}

/// Deals a fresh initialiser package of width `k`.
pub fn ot_init(k: usize, rng: &mut impl Rng) -> Result<OtInitPackage, OtError> {
    let r0 = BitString::random(k, rng)?;
    let r1 = BitString::random(k, rng)?;
    OtInitPackage::new(r0, r1, rng.gen::<bool>())
}

/// Runs the transfer of `(m0, m1)` under choice bit `c`.
pub fn ot_execute(
    m0: &BitString,
    m1: &BitString,
    c: bool,
    pkg: &OtInitPackage,
) -> Result<OtTranscript, OtError> {
    if m0.len() != m1.len() {
        return Err(OtError::LengthMismatch {
            left: m0.len(),
            right: m1.len(),
        });
    }
    if m0.len() != pkg.k() {
        return Err(OtError::LengthMismatch {
            left: m0.len(),
            right: pkg.k(),
        });
    }
    let e = c ^ pkg.d;
    let r = |bit: bool| if bit { &pkg.r1 } else { &pkg.r0 };
    let f0 = m0.xor(r(e))?;
    let f1 = m1.xor(r(!e))?;
    let (_, r_d) = pkg.receiver_share();
    let delivered = if c { f1.xor(r_d)? } else { f0.xor(r_d)? };
    Ok(OtTranscript {
        e,
        f0,
        f1,
        delivered,
    })
}

/// Single-bit convenience wrapper; the protocols only ever transfer bits.
pub fn transfer_bit(
    m0: bool,
    m1: bool,
    c: bool,
    pkg: &OtInitPackage,
) -> Result<(bool, OtTranscript), OtError> {
    let t = ot_execute(&BitString::single(m0), &BitString::single(m1), c, pkg)?;
    let bit = t.delivered.bits()[0];
    Ok((bit, t))
}
