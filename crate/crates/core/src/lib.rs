//! Entanglement concentration of a two-mode squeezed vacuum (TMSV) by photon
//! subtraction.
//!
//! Every state the protocol produces is *shifted diagonal*,
//! `Σ a_n |n-c⟩_A |n-d⟩_B`, so the fast engine in [`fock`] and [`protocol`]
//! works on a single amplitude vector. The analytic detection probabilities,
//! negativities and efficiencies of the standard (iterated) and adaptive
//! schemes live in [`closed_form`]; [`dense`] is an independent brute-force
//! propagation on a full two-mode amplitude table used to check both.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;

pub mod closed_form;
pub mod dense;
pub mod fock;
pub mod metrics;
pub mod pattern;
pub mod protocol;
pub mod sampler;
pub mod sweep;

pub use error::{Error, Result};
pub use fock::{Arm, Conditioned, ProtocolParams, Scheme, ShiftedDiagonalState};
pub use metrics::{EfficiencyReport, OutcomeRecord};
pub use pattern::{Click, DetectionPattern};
pub use sweep::SweepRecord;
