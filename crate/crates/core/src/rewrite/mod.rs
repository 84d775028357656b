//! Constructive membership in a black-box Sp(2n, q).
//!
//! Given oracle access to a group `G ≅ Sp(2n, q)` through the handles of its
//! standard generators and a target handle `g`, [`rewrite`] returns a
//! straight-line program over the generators that evaluates exactly to `g`.
//!
//! The reduction runs in four stages, each right-multiplying the current
//! element by a correction whose program is known:
//!
//! 1. clear entry `(1, 2n)` (the set `S`);
//! 2. clear row 1 down to `⟨e_1⟩` (the stabilizer `T`);
//! 3. repeat on the `s`-conjugate so that `⟨f_1⟩` is also stabilized (`G₁`);
//! 4. read off the embedded `Sp(2n−2, q)` block by conjugating root elements,
//!    rewrite it in the natural representation and fix the torus and centre.
//!
//! Membership questions are answered by a [`Probe`]. The black-box probe
//! ([`ScanProbe`]) only multiplies, inverts and compares; the white-box probe
//! in [`crate::natrep`] reads matrix entries.

mod bounds;
mod kit;
mod pipeline;
mod probe;

pub use bounds::{check_bounds, Bounds, FROZEN};
pub use kit::{GenKit, Word};
pub use pipeline::{Corners, Pipeline, StepRecord, Step, RewriteResult};
pub use probe::{entry_is_zero, in_s, in_t, Coord, Probe, ScanProbe};

use thiserror::Error;

use crate::blackbox::{GroupOracle, OracleError};
use crate::gf::FieldError;
use crate::slp::SlpError;

#[derive(Debug, Error)]
pub enum RewriteError {
    #[error("{step}: {reason}")]
    StepFailed {
        step: &'static str,
        reason: &'static str,
    },
    #[error("element is not in the group: {0}")]
    NotInGroup(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Slp(#[from] SlpError),
    #[error("matrix does not preserve the symplectic form")]
    NotSymplectic,
    #[error("matrix does not have determinant 1")]
    DetNotOne,
}

pub(crate) fn failed<T>(step: &'static str, reason: &'static str) -> Result<T, RewriteError> {
    Err(RewriteError::StepFailed { step, reason })
}

/// Writes `g` as a program over `oracle.generators()`.
///
/// The result is checked with one final equality test. Inputs that are not
/// group members surface as [`RewriteError::NotInGroup`].
pub fn rewrite<O: GroupOracle>(oracle: &O, g: &O::Elem) -> Result<RewriteResult, RewriteError> {
    let pipeline = Pipeline::black(oracle)?;
    pipeline.run(g).map_err(|e| match e {
        RewriteError::StepFailed { step, reason } => {
            RewriteError::NotInGroup(format!("{step}: {reason}"))
        }
        other => other,
    })
}
