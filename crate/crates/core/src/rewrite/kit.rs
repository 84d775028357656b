//! Programs for the element families the pipeline multiplies by.

use crate::blackbox::GroupOracle;
use crate::gf::Fq;
use crate::natrep::{two_squares, TwoSquares};
use crate::slp::Slp;
use crate::spn::{slot, GroupParams};

use super::RewriteError;

/// A program together with its value in some group.
#[derive(Clone, Debug)]
pub struct Word<E> {
    pub slp: Slp,
    pub elem: E,
}

impl<E: Clone> Word<E> {
    /// Evaluates `slp` over the oracle's generators.
    pub fn eval<O>(oracle: &O, slp: Slp) -> Result<Word<E>, RewriteError>
    where
        O: GroupOracle<Elem = E> + ?Sized,
    {
        let elem = slp.eval(oracle, oracle.generators())?;
        Ok(Word { slp, elem })
    }
}

fn gen(s: usize) -> Slp {
    Slp::slot(s)
}

/// `δ^k · w · δ^{-k}`, the conjugate `w^{δ^{-k}}`.
pub(crate) fn delta_scale(w: &Slp, k: u32) -> Slp {
    if k == 0 {
        return w.clone();
    }
    w.conj(&gen(slot::DELTA).pow(-(k as i64))).expect("same arity")
}

/// The cached programs and handles of one rewriting session.
///
/// Column arguments are 0-based positions in the basis order
/// `e_1, …, e_n, f_n, …, f_1`; "middle" columns are `1..2n−1`.
pub struct GenKit<E> {
    params: GroupParams,
    pub(crate) q_elem: Word<E>,
    pub(crate) delta_inv: E,
    pub(crate) s: Word<E>,
    pub(crate) s_inv: E,
    pub(crate) minus_identity: Word<E>,
    /// `z_1 = x^s`, n ≥ 2.
    pub(crate) z_one: Option<Word<E>>,
    /// `x_j(1)` for middle columns.
    pub(crate) x_one: Vec<Option<Word<E>>>,
    /// Moves column `j` to column `2n` up to sign.
    pub(crate) to_f1: Vec<Word<E>>,
    /// Moves column `j` to column 1 up to sign.
    pub(crate) to_e1: Vec<Word<E>>,
    /// Moves middle column `j` to column `2n−1` up to sign, fixing `e_1`
    /// and `f_1`.
    pub(crate) to_f2: Vec<Option<Word<E>>>,
    /// Transvections with centres `e_1, …, e_n, f_n, …, f_2`.
    pub(crate) centers: Vec<E>,
    sub_gens: Vec<Slp>,
}

impl<E: Clone> GenKit<E> {
    pub fn build<O: GroupOracle<Elem = E> + ?Sized>(oracle: &O) -> Result<GenKit<E>, RewriteError> {
        let params = oracle.params().clone();
        let n = params.n();
        let d = params.dim();
        let (s, t, u, v, x) = (
            gen(slot::S),
            gen(slot::T),
            gen(slot::U),
            gen(slot::V),
            gen(slot::X),
        );
        let word = |slp: Slp| Word::eval(oracle, slp);

        let q_elem = word(t.conj(&s)?)?;
        let delta_inv = oracle.inv(&oracle.generators()[slot::DELTA])?;
        let s_word = word(s.clone())?;
        let s_inv = oracle.inv(&s_word.elem)?;

        let minus_identity = Slp::product(
            &(0..n)
                .map(|i| {
                    let si = if i == 0 { s.clone() } else { s.conj(&v.pow(i as i64)).expect("same arity") };
                    si.pow(2)
                })
                .collect::<Vec<_>>(),
        )?;
        let minus_identity = word(minus_identity)?;

        let mut to_f1 = vec![None; d];
        let mut to_e1 = vec![None; d];
        for i in 1..=n {
            // v^m sends e_i to e_1 and f_i to f_1
            let m = (n - i + 1) % n;
            let m = (m != 0).then(|| v.pow(m as i64));
            let (e, f) = (params.e(i), params.f(i));
            to_f1[e] = Some(match &m {
                Some(m) => m.mul(&s)?,
                None => s.clone(),
            });
            to_f1[f] = Some(m.clone().unwrap_or_else(Slp::identity));
            to_e1[e] = Some(m.clone().unwrap_or_else(Slp::identity));
            to_e1[f] = Some(match &m {
                Some(m) => m.mul(&s)?,
                None => s.clone(),
            });
        }
        let to_f1 = to_f1
            .into_iter()
            .map(|w| word(w.expect("every column")))
            .collect::<Result<Vec<_>, _>>()?;
        let to_e1 = to_e1
            .into_iter()
            .map(|w| word(w.expect("every column")))
            .collect::<Result<Vec<_>, _>>()?;

        let mut centers = Vec::with_capacity(d.saturating_sub(1));
        for p in to_e1.iter().take(d - 1) {
            let pq = oracle.mul(&p.elem, &q_elem.elem)?;
            centers.push(oracle.mul(&pq, &oracle.inv(&p.elem)?)?);
        }

        let mut z_one = None;
        let mut x_one = vec![None; d];
        let mut to_f2 = vec![None; d];
        let mut sub_gens = Vec::new();
        if n >= 2 {
            let z1 = x.conj(&s)?;
            // v·u fixes e_1, f_1 and cycles e_2 → e_3 → … → e_n → e_2.
            let vp = v.mul(&u)?;
            let sp = s.conj(&u)?;
            let x_e2 = z1.inv();
            let x_f2 = x_e2.conj(&sp)?;
            for i in 2..=n {
                let shift = (i != 2).then(|| vp.pow((i - 2) as i64));
                let lift = |w: &Slp| match &shift {
                    Some(c) => w.conj(c).expect("same arity"),
                    None => w.clone(),
                };
                x_one[params.e(i)] = Some(word(lift(&x_e2))?);
                x_one[params.f(i)] = Some(word(lift(&x_f2))?);

                let m = (n - i + 1) % (n - 1);
                let cycle = (m != 0).then(|| vp.pow(m as i64));
                to_f2[params.f(i)] = Some(word(cycle.clone().unwrap_or_else(Slp::identity))?);
                to_f2[params.e(i)] = Some(word(match &cycle {
                    Some(c) => c.mul(&sp)?,
                    None => sp.clone(),
                })?);
            }
            z_one = Some(word(z1)?);
            let delta = gen(slot::DELTA);
            sub_gens = if n >= 3 {
                vec![sp, t.conj(&u)?, delta.conj(&u)?, u.conj(&v)?, vp, x.conj(&v)?]
            } else {
                let id = Slp::identity();
                vec![sp, t.conj(&u)?, delta.conj(&u)?, id.clone(), id.clone(), id]
            };
        }

        Ok(GenKit {
            params,
            q_elem,
            delta_inv,
            s: s_word,
            s_inv,
            minus_identity,
            z_one,
            x_one,
            to_f1,
            to_e1,
            to_f2,
            centers,
            sub_gens,
        })
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    /// `q = t^s`, the transvection `v ↦ v + ⟨v, e_1⟩ e_1`.
    pub fn q_elem(&self) -> &Word<E> {
        &self.q_elem
    }

    /// Program for `−I`.
    pub fn minus_identity(&self) -> &Word<E> {
        &self.minus_identity
    }

    /// `z_α`: `e_1 ↦ e_1 − α e_2`, `f_2 ↦ f_2 + α f_1`. Requires n ≥ 2.
    pub fn zalpha(&self, alpha: Fq) -> Slp {
        if alpha.is_zero() {
            return Slp::identity();
        }
        let k = self.params.field().dlog(alpha).expect("nonzero");
        self.zalpha_pow(k)
    }

    pub(crate) fn zalpha_pow(&self, k: u32) -> Slp {
        let z1 = self.z_one.as_ref().expect("z_α needs n >= 2");
        delta_scale(&z1.slp, k)
    }

    /// `x_j(α)`: the unipotent element with `e_1 ↦ e_1 + α b_j` and only
    /// the compensating `f_1` terms elsewhere. `col` must be a middle column.
    pub fn xi(&self, col: usize, alpha: Fq) -> Slp {
        if alpha.is_zero() {
            return Slp::identity();
        }
        let k = self.params.field().dlog(alpha).expect("nonzero");
        self.xi_pow(col, k)
    }

    pub(crate) fn xi_pow(&self, col: usize, k: u32) -> Slp {
        let x = self.x_one[col].as_ref().expect("middle column");
        delta_scale(&x.slp, k)
    }

    /// `ℓ(μ)`: `e_1 ↦ e_1 + μ f_1`.
    pub fn ell(&self, mu: Fq) -> Slp {
        let t = gen(slot::T);
        match two_squares(self.params.field(), mu) {
            TwoSquares::Zero => Slp::identity(),
            TwoSquares::One(a) => delta_scale(&t, a),
            TwoSquares::Two(a, b) => delta_scale(&t, a)
                .mul(&delta_scale(&t, b))
                .expect("same arity"),
        }
    }

    /// A word in `s`, `v` moving column `col` to column `2n` up to sign.
    pub fn perm_word(&self, col: usize) -> &Slp {
        &self.to_f1[col].slp
    }

    /// Programs for the standard generators of the `Sp(2n−2, q)` acting on
    /// `e_2, …, e_n, f_n, …, f_2`. Empty for n = 1.
    pub fn sub_gens(&self) -> &[Slp] {
        &self.sub_gens
    }
}
