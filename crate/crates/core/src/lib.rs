//! Constructive membership for black-box symplectic groups Sp(2n, q), q odd.
//!
//! Given handles for the standard generators of a group isomorphic to
//! Sp(2n, q) and a target handle, [`rewrite::rewrite`] produces a
//! straight-line program over the generators that evaluates to the target,
//! using only multiplication, inversion and equality.

pub mod blackbox;
pub mod cli;
pub mod gf;
pub mod matrix;
pub mod natrep;
pub mod rewrite;
pub mod slp;
pub mod spn;
