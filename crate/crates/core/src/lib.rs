//! Simulation and epistemic model checking for secure-majority protocols.
//!
//! A bench of 2n+1 judges wants to publish the majority of their private
//! guilty/innocent decisions and nothing more. This crate implements three
//! information-theoretic protocols for that task (a three-judge protocol
//! built on 1-out-of-2 oblivious transfer, its leader-based generalisation
//! to any odd bench, and a dining-cryptographers style modular sum), plus a
//! computational variant based on anonymous veto networks. Protocol runs
//! can be enumerated exhaustively, turned into interpreted-system models,
//! and checked against CTL+K formulas with the embedded explicit-state
//! model checker; the [`anonspec`] module generates the functionality and
//! conditional-anonymity properties those protocols are supposed to meet.

pub mod anonspec;
pub mod avnet;
pub mod kripke;
pub mod majority;
pub mod mck;
pub mod ot;
pub mod protocols;
pub mod threshold;
