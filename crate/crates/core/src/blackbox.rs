//! Black-box groups: opaque element handles behind multiply, invert and
//! equality oracles, with per-group call counters.
//!
//! [`GroupOracle`] is the entire interface the rewriting pipeline sees. Two
//! backends implement it: [`MatrixGroup`], the natural copy of Sp(2n, q),
//! and [`BBGroup`], an isomorphic copy obtained by conjugating every element
//! with a hidden random invertible matrix.

use std::cell::Cell;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::gf::Fq;
use crate::matrix::{Matrix, MatrixError};
use crate::spn::{standard_generators, GroupParams};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("element handles belong to different groups")]
    MixedGroups,
    #[error("element is not invertible")]
    Singular,
    #[error("element has the wrong shape for this group")]
    WrongShape,
}

impl From<MatrixError> for OracleError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::Singular => OracleError::Singular,
            MatrixError::DimensionMismatch { .. } | MatrixError::FieldMismatch => {
                OracleError::WrongShape
            }
        }
    }
}

/// Multiply, invert and equality oracles over opaque elements.
pub trait GroupOracle {
    type Elem: Clone;

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, OracleError>;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, OracleError>;
    fn equal(&self, a: &Self::Elem, b: &Self::Elem) -> Result<bool, OracleError>;
    fn identity(&self) -> Self::Elem;
    /// Handles of `(s, t, δ, u, v, x)`, in slot order.
    fn generators(&self) -> &[Self::Elem];
    /// The (public) isomorphism type: rank and field.
    fn params(&self) -> &GroupParams;
    fn stats(&self) -> OracleStats;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OracleStats {
    pub mul: u64,
    pub inv: u64,
    pub eq: u64,
}

impl OracleStats {
    pub fn total(&self) -> u64 {
        self.mul + self.inv + self.eq
    }

    pub fn plus(&self, other: &OracleStats) -> OracleStats {
        OracleStats {
            mul: self.mul + other.mul,
            inv: self.inv + other.inv,
            eq: self.eq + other.eq,
        }
    }

    /// Calls made since `earlier` was taken.
    pub fn since(&self, earlier: &OracleStats) -> OracleStats {
        OracleStats {
            mul: self.mul - earlier.mul,
            inv: self.inv - earlier.inv,
            eq: self.eq - earlier.eq,
        }
    }
}

impl fmt::Display for OracleStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stats: mul={} inv={} eq={}", self.mul, self.inv, self.eq)
    }
}

#[derive(Default)]
struct Counters {
    mul: Cell<u64>,
    inv: Cell<u64>,
    eq: Cell<u64>,
}

impl Counters {
    fn bump(cell: &Cell<u64>) {
        cell.set(cell.get() + 1);
    }

    fn snapshot(&self) -> OracleStats {
        OracleStats {
            mul: self.mul.get(),
            inv: self.inv.get(),
            eq: self.eq.get(),
        }
    }

    fn reset(&self) {
        self.mul.set(0);
        self.inv.set(0);
        self.eq.set(0);
    }
}

/// The natural matrix copy of Sp(2n, q) used as an oracle.
pub struct MatrixGroup {
    params: GroupParams,
    gens: Vec<Matrix>,
    counters: Counters,
}

impl MatrixGroup {
    pub fn new(params: GroupParams) -> MatrixGroup {
        let gens = standard_generators(&params).to_vec();
        MatrixGroup {
            params,
            gens,
            counters: Counters::default(),
        }
    }

    pub fn reset_stats(&self) {
        self.counters.reset();
    }

    fn check(&self, m: &Matrix) -> Result<(), OracleError> {
        if m.dim() != self.params.dim() || **m.field() != **self.params.field() {
            return Err(OracleError::WrongShape);
        }
        Ok(())
    }
}

impl GroupOracle for MatrixGroup {
    type Elem = Matrix;

    fn mul(&self, a: &Matrix, b: &Matrix) -> Result<Matrix, OracleError> {
        Counters::bump(&self.counters.mul);
        self.check(a)?;
        Ok(a.try_mul(b)?)
    }

    fn inv(&self, a: &Matrix) -> Result<Matrix, OracleError> {
        Counters::bump(&self.counters.inv);
        self.check(a)?;
        Ok(a.inverse()?)
    }

    fn equal(&self, a: &Matrix, b: &Matrix) -> Result<bool, OracleError> {
        Counters::bump(&self.counters.eq);
        self.check(a)?;
        self.check(b)?;
        Ok(a == b)
    }

    fn identity(&self) -> Matrix {
        self.params.identity()
    }

    fn generators(&self) -> &[Matrix] {
        &self.gens
    }

    fn params(&self) -> &GroupParams {
        &self.params
    }

    fn stats(&self) -> OracleStats {
        self.counters.snapshot()
    }
}

static NEXT_GROUP_ID: AtomicU64 = AtomicU64::new(1);

/// An opaque element of a [`BBGroup`]. Its representation is not reachable
/// from outside this module:
///
/// ```compile_fail
/// fn peek(e: &bbsp::blackbox::BBElem) -> &bbsp::matrix::Matrix {
///     &e.repr
/// }
/// ```
#[derive(Clone)]
pub struct BBElem {
    group: u64,
    repr: Matrix,
}

impl fmt::Debug for BBElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BBElem(group {})", self.group)
    }
}

/// A scrambled copy of Sp(2n, q): each natural element `g` is represented
/// by `c⁻¹ g c` for a hidden invertible matrix `c` drawn from a seed.
///
/// Counters use interior mutability and are not thread-safe; a group belongs
/// to one rewriting session at a time.
pub struct BBGroup {
    id: u64,
    params: GroupParams,
    scramble: Matrix,
    scramble_inv: Matrix,
    gens: Vec<BBElem>,
    counters: Counters,
}

impl BBGroup {
    /// Wraps the natural copy behind a scramble drawn from `seed`.
    pub fn new(params: GroupParams, seed: u64) -> BBGroup {
        let field = params.field().clone();
        let d = params.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (scramble, scramble_inv) = loop {
            let rows = (0..d)
                .map(|_| {
                    (0..d)
                        .map(|_| field.elem(rng.gen_range(0..field.q()) as u64).unwrap())
                        .collect::<Vec<Fq>>()
                })
                .collect();
            let c = Matrix::from_rows(&field, rows).expect("square");
            if let Ok(ci) = c.inverse() {
                break (c, ci);
            }
        };
        let id = NEXT_GROUP_ID.fetch_add(1, Ordering::Relaxed);
        let mut group = BBGroup {
            id,
            params,
            scramble,
            scramble_inv,
            gens: Vec::new(),
            counters: Counters::default(),
        };
        group.gens = standard_generators(&group.params)
            .to_vec()
            .iter()
            .map(|g| group.wrap(g))
            .collect();
        group
    }

    fn wrap(&self, natural: &Matrix) -> BBElem {
        BBElem {
            group: self.id,
            repr: self.scramble_inv.mul(natural).mul(&self.scramble),
        }
    }

    fn check(&self, e: &BBElem) -> Result<(), OracleError> {
        if e.group == self.id {
            Ok(())
        } else {
            Err(OracleError::MixedGroups)
        }
    }

    /// Hands a natural-representation matrix to the black box. Nothing is
    /// checked beyond shape and invertibility, so non-members can be
    /// imported.
    pub fn import(&self, natural: &Matrix) -> Result<BBElem, OracleError> {
        if natural.dim() != self.params.dim() || **natural.field() != **self.params.field() {
            return Err(OracleError::WrongShape);
        }
        natural.inverse()?;
        Ok(self.wrap(natural))
    }

    /// The natural matrix behind a handle. Verification only.
    #[cfg(any(test, feature = "shadow"))]
    pub fn shadow(&self, e: &BBElem) -> Matrix {
        assert_eq!(e.group, self.id, "handle from another group");
        self.scramble.mul(&e.repr).mul(&self.scramble_inv)
    }

    pub fn reset_stats(&self) {
        self.counters.reset();
    }
}

impl GroupOracle for BBGroup {
    type Elem = BBElem;

    fn mul(&self, a: &BBElem, b: &BBElem) -> Result<BBElem, OracleError> {
        Counters::bump(&self.counters.mul);
        self.check(a)?;
        self.check(b)?;
        Ok(BBElem {
            group: self.id,
            repr: a.repr.mul(&b.repr),
        })
    }

    fn inv(&self, a: &BBElem) -> Result<BBElem, OracleError> {
        Counters::bump(&self.counters.inv);
        self.check(a)?;
        Ok(BBElem {
            group: self.id,
            repr: a.repr.inverse()?,
        })
    }

    fn equal(&self, a: &BBElem, b: &BBElem) -> Result<bool, OracleError> {
        Counters::bump(&self.counters.eq);
        self.check(a)?;
        self.check(b)?;
        Ok(a.repr == b.repr)
    }

    fn identity(&self) -> BBElem {
        BBElem {
            group: self.id,
            repr: self.params.identity(),
        }
    }

    fn generators(&self) -> &[BBElem] {
        &self.gens
    }

    fn params(&self) -> &GroupParams {
        &self.params
    }

    fn stats(&self) -> OracleStats {
        self.counters.snapshot()
    }
}
