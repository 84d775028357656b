//! Rewriting explicit matrices of Sp(2m, q) in the standard generators.
//!
//! The same pipeline as the black-box rewriter, with a probe that reads
//! entries instead of scanning: every search becomes an entry ratio and a
//! discrete logarithm.

use std::sync::Arc;

use crate::blackbox::{GroupOracle, MatrixGroup};
use crate::gf::{Field, Fq};
use crate::matrix::Matrix;
use crate::rewrite::{Coord, GenKit, Pipeline, Probe, RewriteError, RewriteResult};
use crate::slp::{power, Slp};
use crate::spn::{is_symplectic, slot, GroupParams};

/// `μ` as a sum of at most two even powers of `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoSquares {
    Zero,
    /// `μ = ω^{2a}`.
    One(u32),
    /// `μ = ω^{2a} + ω^{2b}`, `a ≤ b`, smallest pair first.
    Two(u32, u32),
}

pub fn two_squares(field: &Field, mu: Fq) -> TwoSquares {
    if mu.is_zero() {
        return TwoSquares::Zero;
    }
    let half = (field.q() - 1) / 2;
    let log = field.dlog(mu).expect("nonzero");
    if log.is_multiple_of(2) {
        return TwoSquares::One(log / 2);
    }
    for a in 0..half {
        let rest = field.sub(mu, field.omega_pow(2 * a as i64));
        if !rest.is_zero() && field.is_square(rest) {
            let b = field.dlog(rest).expect("nonzero") / 2;
            if b >= a {
                return TwoSquares::Two(a, b);
            }
        }
    }
    unreachable!("every element of a finite field of odd order is a sum of two squares")
}

/// Answers the pipeline's questions by reading entries.
pub struct EntryProbe;

impl EntryProbe {
    fn last(kit: &GenKit<Matrix>) -> usize {
        kit.params().dim() - 1
    }

    fn field(kit: &GenKit<Matrix>) -> &Arc<Field> {
        kit.params().field()
    }
}

impl Probe<MatrixGroup> for EntryProbe {
    fn in_s(&self, _: &MatrixGroup, kit: &GenKit<Matrix>, h: &Matrix) -> Result<bool, RewriteError> {
        Ok(h.get(0, Self::last(kit)).is_zero())
    }

    fn entry_is_zero(
        &self,
        _: &MatrixGroup,
        _: &GenKit<Matrix>,
        g: &Matrix,
        col: usize,
    ) -> Result<bool, RewriteError> {
        Ok(g.get(0, col).is_zero())
    }

    fn find_zalpha(
        &self,
        _: &MatrixGroup,
        kit: &GenKit<Matrix>,
        g: &Matrix,
    ) -> Result<Option<u32>, RewriteError> {
        let f = Self::field(kit);
        let last = Self::last(kit);
        let pivot = g.get(0, last - 1);
        if pivot.is_zero() {
            return Ok(None);
        }
        let alpha = f.neg(f.div(g.get(0, last), pivot)?);
        Ok(f.dlog(alpha).ok())
    }

    fn find_ell(&self, _: &MatrixGroup, kit: &GenKit<Matrix>, g: &Matrix) -> Result<Option<Fq>, RewriteError> {
        let f = Self::field(kit);
        let corner = g.get(0, Self::last(kit));
        let g11 = g.get(0, 0);
        if g11.is_zero() {
            return Ok(corner.is_zero().then_some(Fq::ZERO));
        }
        Ok(Some(f.neg(f.div(corner, g11)?)))
    }

    fn find_k0(
        &self,
        o: &MatrixGroup,
        kit: &GenKit<Matrix>,
        g: &Matrix,
        b: &Matrix,
    ) -> Result<Option<(u32, Matrix)>, RewriteError> {
        let f = Self::field(kit);
        let c = g.get(0, Self::last(kit) - 1);
        let g11 = g.get(0, 0);
        if c.is_zero() || g11.is_zero() {
            return Ok(None);
        }
        let k = f.dlog(f.inv(f.mul(g11, c))?)?;
        let delta = &o.generators()[slot::DELTA];
        let dk = power(o, delta, k as i64)?;
        let y = o.mul(&o.mul(&dk, b)?, &o.inv(&dk)?)?;
        Ok(Some((k, y)))
    }

    fn coordinate(
        &self,
        _: &MatrixGroup,
        kit: &GenKit<Matrix>,
        y: &Matrix,
        col: usize,
    ) -> Result<Option<Coord>, RewriteError> {
        let v = y.get(0, col);
        Ok(Some(if v.is_zero() {
            Coord::Zero
        } else {
            Coord::Pow(Self::field(kit).dlog(v)?)
        }))
    }

    fn recover_block(
        &self,
        _: &MatrixGroup,
        kit: &GenKit<Matrix>,
        g: &Matrix,
    ) -> Result<Option<Matrix>, RewriteError> {
        let f = Self::field(kit);
        let d = kit.params().dim();
        let lambda = f.inv(g.get(0, 0))?;
        Ok(Some(g.block(1, d - 2).scale(lambda)))
    }

    fn find_torus(
        &self,
        o: &MatrixGroup,
        kit: &GenKit<Matrix>,
        r: &Matrix,
    ) -> Result<Option<(u32, bool)>, RewriteError> {
        let f = Self::field(kit);
        let lambda = r.get(0, 0);
        if lambda.is_zero() {
            return Ok(None);
        }
        let delta = &o.generators()[slot::DELTA];
        let minus_one = f.neg(Fq::ONE);
        let mut hits = Vec::new();
        for (scalar, minus) in [(Fq::ONE, false), (minus_one, true)] {
            let k = f.dlog(f.mul(lambda, scalar))?;
            let expect = power(o, delta, k as i64)?.scale(scalar);
            if *r == expect {
                hits.push((k, minus));
            }
        }
        Ok(hits.into_iter().min())
    }
}

/// A program over the standard generators of Sp(2m, q) evaluating to `m`.
pub fn rewrite_natural(m: &Matrix, params: &GroupParams) -> Result<Slp, RewriteError> {
    Ok(rewrite_natural_traced(m, params)?.slp)
}

/// [`rewrite_natural`] with the matrix-oracle counts and step trace.
pub fn rewrite_natural_traced(m: &Matrix, params: &GroupParams) -> Result<RewriteResult, RewriteError> {
    if m.dim() != params.dim() || !is_symplectic(m, params).map_err(|_| RewriteError::NotSymplectic)? {
        return Err(RewriteError::NotSymplectic);
    }
    let group = MatrixGroup::new(params.clone());
    let pipeline = Pipeline::with_probe(&group, |_, _| Ok(EntryProbe))?;
    pipeline.run(m)
}

/// A program over `s`, `t`, `δ` evaluating to the 2×2 matrix `m`.
pub fn sl2_rewrite(m: &Matrix) -> Result<Slp, RewriteError> {
    if m.dim() != 2 {
        return Err(RewriteError::DetNotOne);
    }
    if m.det() != Fq::ONE {
        return Err(RewriteError::DetNotOne);
    }
    let params = GroupParams::new(1, m.field().clone()).expect("rank 1");
    rewrite_natural(m, &params)
}
