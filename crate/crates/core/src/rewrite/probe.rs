//! Membership questions the pipeline asks, and their black-box answers.

use crate::blackbox::GroupOracle;
use crate::gf::Fq;
use crate::matrix::Matrix;

use super::kit::{GenKit, Word};
use super::RewriteError;

/// A Q-coordinate: zero, or `ω^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    Zero,
    Pow(u32),
}

/// The oracle-abstraction seam. Every answer is unique for genuine group
/// members, so any two probes lead the pipeline to the same program.
///
/// `None` answers mean the search found nothing, which only happens for
/// non-members.
pub trait Probe<O: GroupOracle> {
    /// Is entry `(1, 2n)` of `h` zero?
    fn in_s(&self, o: &O, kit: &GenKit<O::Elem>, h: &O::Elem) -> Result<bool, RewriteError>;

    /// Is entry `(1, col)` of `g` zero?
    fn entry_is_zero(
        &self,
        o: &O,
        kit: &GenKit<O::Elem>,
        g: &O::Elem,
        col: usize,
    ) -> Result<bool, RewriteError>;

    /// The `k` with `g·z_{ω^k} ∈ S`.
    fn find_zalpha(&self, o: &O, kit: &GenKit<O::Elem>, g: &O::Elem)
        -> Result<Option<u32>, RewriteError>;

    /// The `μ` with `g·ℓ(μ) ∈ S`; zero is tried first.
    fn find_ell(&self, o: &O, kit: &GenKit<O::Elem>, g: &O::Elem) -> Result<Option<Fq>, RewriteError>;

    /// The `k` for which `g·b^{δ^{-k}}` has a zero `(1, 2n−1)` entry,
    /// together with that conjugate of `b`.
    fn find_k0(
        &self,
        o: &O,
        kit: &GenKit<O::Elem>,
        g: &O::Elem,
        b: &O::Elem,
    ) -> Result<Option<(u32, O::Elem)>, RewriteError>;

    /// Coordinate `col` (a middle column) of a Q-element `y`.
    fn coordinate(
        &self,
        o: &O,
        kit: &GenKit<O::Elem>,
        y: &O::Elem,
        col: usize,
    ) -> Result<Option<Coord>, RewriteError>;

    /// The middle block of `g ∈ G₁` divided by `g_{1,1}`, read off the
    /// conjugates `x_i(1)^g`.
    fn recover_block(
        &self,
        o: &O,
        kit: &GenKit<O::Elem>,
        g: &O::Elem,
    ) -> Result<Option<Matrix>, RewriteError> {
        let params = kit.params();
        let field = params.field();
        let d = params.dim();
        let g_inv = o.inv(g)?;
        let mut block = Matrix::zero(field, d - 2);
        for i in 1..d - 1 {
            let x = &kit.x_one[i].as_ref().expect("middle column").elem;
            let y = o.mul(&o.mul(&g_inv, x)?, g)?;
            for j in 1..d - 1 {
                match self.coordinate(o, kit, &y, j)? {
                    Some(Coord::Zero) => {}
                    Some(Coord::Pow(k)) => block.set(i - 1, j - 1, field.omega_pow(k as i64)),
                    None => return Ok(None),
                }
            }
        }
        Ok(Some(block))
    }

    /// The least `k` (and sign, `true` for `−I`) with `r·δ^{-k} = ±I`.
    fn find_torus(
        &self,
        o: &O,
        kit: &GenKit<O::Elem>,
        r: &O::Elem,
    ) -> Result<Option<(u32, bool)>, RewriteError>;
}

fn conj<O: GroupOracle + ?Sized>(o: &O, a: &O::Elem, by: &O::Elem) -> Result<O::Elem, RewriteError> {
    Ok(o.mul(&o.mul(&o.inv(by)?, a)?, by)?)
}

/// `h ∈ S` through the test `q^{q^h} = q`: seven oracle calls.
pub fn in_s<O: GroupOracle + ?Sized>(
    o: &O,
    kit: &GenKit<O::Elem>,
    h: &O::Elem,
) -> Result<bool, RewriteError> {
    let q = &kit.q_elem.elem;
    let qh = conj(o, q, h)?;
    let qqh = conj(o, q, &qh)?;
    Ok(o.equal(&qqh, q)?)
}

/// Zero test of entry `(1, col)`, as `in_s(g·w_col)`.
pub fn entry_is_zero<O: GroupOracle + ?Sized>(
    o: &O,
    kit: &GenKit<O::Elem>,
    g: &O::Elem,
    col: usize,
) -> Result<bool, RewriteError> {
    let moved = o.mul(g, &kit.to_f1[col].elem)?;
    in_s(o, kit, &moved)
}

/// `h ∈ T`: `q^h` commutes with the transvections centred on `e_1^⊥`.
pub fn in_t<O: GroupOracle + ?Sized>(
    o: &O,
    kit: &GenKit<O::Elem>,
    h: &O::Elem,
) -> Result<bool, RewriteError> {
    let a = conj(o, &kit.q_elem.elem, h)?;
    for c in &kit.centers {
        if !o.equal(&o.mul(&a, c)?, &o.mul(c, &a)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Answers by exhaustive scans over precomputed handles.
pub struct ScanProbe<E> {
    /// `z_{ω^k}`.
    zalpha: Vec<E>,
    /// `ℓ(ω^k)`.
    ell: Vec<E>,
    /// `x_j(ω^k)^{-1}` per middle column.
    x_inv: Vec<Vec<E>>,
}

impl<E: Clone> ScanProbe<E> {
    pub fn new<O: GroupOracle<Elem = E>>(o: &O, kit: &GenKit<E>) -> Result<ScanProbe<E>, RewriteError> {
        let params = kit.params();
        let field = params.field();
        let steps = field.q() as usize - 1;
        let delta = &o.generators()[crate::spn::slot::DELTA];
        let chain = |start: E, len: usize| delta_chain(o, delta, &kit.delta_inv, start, len);

        let zalpha = match &kit.z_one {
            Some(z) => chain(z.elem.clone(), steps)?,
            None => Vec::new(),
        };

        // even and odd exponents of the long-root coordinate form two chains
        let t = o.generators()[crate::spn::slot::T].clone();
        let ell_omega = Word::eval(o, kit.ell(field.omega()))?.elem;
        let half = steps.div_ceil(2);
        let even = chain(t, half)?;
        let odd = chain(ell_omega, steps / 2)?;
        let mut ell = Vec::with_capacity(steps);
        for k in 0..steps {
            ell.push(if k % 2 == 0 { even[k / 2].clone() } else { odd[k / 2].clone() });
        }

        let mut x_inv = vec![Vec::new(); params.dim()];
        for (col, x) in kit.x_one.iter().enumerate() {
            if let Some(x) = x {
                x_inv[col] = chain(o.inv(&x.elem)?, steps)?;
            }
        }
        Ok(ScanProbe { zalpha, ell, x_inv })
    }
}

/// `start, c(start), c²(start), …` with `c(h) = δ·h·δ⁻¹`. Each step
/// multiplies short-root coordinates by `ω` and the long-root coordinate
/// by `ω²`.
fn delta_chain<O: GroupOracle>(
    o: &O,
    delta: &O::Elem,
    delta_inv: &O::Elem,
    start: O::Elem,
    len: usize,
) -> Result<Vec<O::Elem>, RewriteError> {
    let mut out = Vec::with_capacity(len);
    let mut h = start;
    while out.len() < len {
        out.push(h.clone());
        if out.len() < len {
            h = o.mul(&o.mul(delta, &h)?, delta_inv)?;
        }
    }
    Ok(out)
}

impl<O: GroupOracle> Probe<O> for ScanProbe<O::Elem> {
    fn in_s(&self, o: &O, kit: &GenKit<O::Elem>, h: &O::Elem) -> Result<bool, RewriteError> {
        in_s(o, kit, h)
    }

    fn entry_is_zero(
        &self,
        o: &O,
        kit: &GenKit<O::Elem>,
        g: &O::Elem,
        col: usize,
    ) -> Result<bool, RewriteError> {
        entry_is_zero(o, kit, g, col)
    }

    fn find_zalpha(
        &self,
        o: &O,
        kit: &GenKit<O::Elem>,
        g: &O::Elem,
    ) -> Result<Option<u32>, RewriteError> {
        for (k, z) in self.zalpha.iter().enumerate() {
            if in_s(o, kit, &o.mul(g, z)?)? {
                return Ok(Some(k as u32));
            }
        }
        Ok(None)
    }

    fn find_ell(&self, o: &O, kit: &GenKit<O::Elem>, g: &O::Elem) -> Result<Option<Fq>, RewriteError> {
        if in_s(o, kit, g)? {
            return Ok(Some(Fq::ZERO));
        }
        let field = kit.params().field();
        for (k, l) in self.ell.iter().enumerate() {
            if in_s(o, kit, &o.mul(g, l)?)? {
                return Ok(Some(field.omega_pow(k as i64)));
            }
        }
        Ok(None)
    }

    fn find_k0(
        &self,
        o: &O,
        kit: &GenKit<O::Elem>,
        g: &O::Elem,
        b: &O::Elem,
    ) -> Result<Option<(u32, O::Elem)>, RewriteError> {
        let col = kit.params().dim() - 2;
        let delta = &o.generators()[crate::spn::slot::DELTA];
        let mut y = b.clone();
        let steps = kit.params().q() - 1;
        for k in 0..steps {
            if entry_is_zero(o, kit, &o.mul(g, &y)?, col)? {
                return Ok(Some((k, y)));
            }
            if k + 1 < steps {
                y = o.mul(&o.mul(delta, &y)?, &kit.delta_inv)?;
            }
        }
        Ok(None)
    }

    fn coordinate(
        &self,
        o: &O,
        kit: &GenKit<O::Elem>,
        y: &O::Elem,
        col: usize,
    ) -> Result<Option<Coord>, RewriteError> {
        if entry_is_zero(o, kit, y, col)? {
            return Ok(Some(Coord::Zero));
        }
        for (k, xi) in self.x_inv[col].iter().enumerate() {
            if entry_is_zero(o, kit, &o.mul(y, xi)?, col)? {
                return Ok(Some(Coord::Pow(k as u32)));
            }
        }
        Ok(None)
    }

    fn find_torus(
        &self,
        o: &O,
        kit: &GenKit<O::Elem>,
        r: &O::Elem,
    ) -> Result<Option<(u32, bool)>, RewriteError> {
        let id = o.identity();
        let minus = &kit.minus_identity.elem;
        let steps = kit.params().q() - 1;
        let mut y = r.clone();
        for k in 0..steps {
            if o.equal(&y, &id)? {
                return Ok(Some((k, false)));
            }
            if o.equal(&y, minus)? {
                return Ok(Some((k, true)));
            }
            if k + 1 < steps {
                y = o.mul(&y, &kit.delta_inv)?;
            }
        }
        Ok(None)
    }
}
