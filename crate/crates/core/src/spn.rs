//! The natural copy of Sp(2n, q).
//!
//! Basis order is `e_1, ..., e_n, f_n, ..., f_1`: `e_i` is index `i - 1` and
//! `f_i` is index `2n - i` (0-based). Matrices act on row vectors from the
//! right, so row `i` of a group element is the image of basis vector `i`, and
//! the product `a · b` applies `a` first.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf::{parse_coeff_list, Field, FieldError, Fq};
use crate::matrix::Matrix;
use crate::slp::{Instr, Slp, NGENS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpnError {
    #[error("rank n must be at least 1")]
    InvalidRank,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("word length must be at least 1")]
    ZeroWordLength,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Slot indices of the standard generators inside an [`Slp`].
pub mod slot {
    pub const S: usize = 0;
    pub const T: usize = 1;
    pub const DELTA: usize = 2;
    pub const U: usize = 3;
    pub const V: usize = 4;
    pub const X: usize = 5;

    pub const NAMES: [&str; 6] = ["s", "t", "delta", "u", "v", "x"];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupParams {
    n: usize,
    field: Arc<Field>,
}

impl GroupParams {
    pub fn new(n: usize, field: Arc<Field>) -> Result<GroupParams, SpnError> {
        if n == 0 {
            return Err(SpnError::InvalidRank);
        }
        Ok(GroupParams { n, field })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    /// Index of `e_i` (1-based `i`).
    pub fn e(&self, i: usize) -> usize {
        debug_assert!((1..=self.n).contains(&i));
        i - 1
    }

    /// Index of `f_i` (1-based `i`).
    pub fn f(&self, i: usize) -> usize {
        debug_assert!((1..=self.n).contains(&i));
        2 * self.n - i
    }

    /// The index paired with `idx` by the form (`e_i` ↔ `f_i`).
    pub fn partner(&self, idx: usize) -> usize {
        2 * self.n - 1 - idx
    }

    /// The parameters of the embedded Sp(2n-2, q) acting on `e_2, ..., f_2`.
    pub fn reduced(&self) -> Option<GroupParams> {
        (self.n > 1).then(|| GroupParams {
            n: self.n - 1,
            field: self.field.clone(),
        })
    }

    pub fn identity(&self) -> Matrix {
        Matrix::identity(&self.field, self.dim())
    }
}

/// Gram matrix of the form: `⟨e_i, f_i⟩ = 1`, `⟨f_i, e_i⟩ = -1`.
pub fn form_matrix(field: &Arc<Field>, n: usize) -> Matrix {
    let d = 2 * n;
    let mut j = Matrix::zero(field, d);
    for i in 0..d {
        let v = if i < n { Fq::ONE } else { field.neg(Fq::ONE) };
        j.set(i, d - 1 - i, v);
    }
    j
}

pub fn is_symplectic(m: &Matrix, params: &GroupParams) -> Result<bool, SpnError> {
    if m.dim() != params.dim() {
        return Err(SpnError::DimensionMismatch {
            expected: params.dim(),
            found: m.dim(),
        });
    }
    let j = form_matrix(params.field(), params.n());
    Ok(m.mul(&j).mul(&m.transpose()) == j)
}

/// The standard generating set `(s, t, δ, u, v, x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSet {
    pub s: Matrix,
    pub t: Matrix,
    pub delta: Matrix,
    pub u: Matrix,
    pub v: Matrix,
    pub x: Matrix,
}

impl GenSet {
    /// Generators in slot order.
    pub fn to_vec(&self) -> Vec<Matrix> {
        vec![
            self.s.clone(),
            self.t.clone(),
            self.delta.clone(),
            self.u.clone(),
            self.v.clone(),
            self.x.clone(),
        ]
    }
}

/// Builds the generators from their basis images; unlisted basis vectors are
/// fixed. For n = 1, `u`, `v` and `x` are the identity.
///
/// `x` is the short root element `f_1 ↦ f_1 + e_2`, `f_2 ↦ f_2 + e_1`, which
/// is what makes `x^s` the element `e_1 ↦ e_1 - e_2`, `f_2 ↦ f_2 + f_1`.
pub fn standard_generators(params: &GroupParams) -> GenSet {
    let f = params.field();
    let n = params.n();
    let d = params.dim();
    let one = Fq::ONE;
    let minus_one = f.neg(one);
    let omega = f.omega();
    let omega_inv = f.inv(omega).expect("ω is nonzero");
    let (e1, f1) = (params.e(1), params.f(1));

    let id = params.identity();

    let mut s = id.clone();
    s.set(e1, e1, Fq::ZERO);
    s.set(e1, f1, one);
    s.set(f1, f1, Fq::ZERO);
    s.set(f1, e1, minus_one);

    let mut t = id.clone();
    t.set(e1, f1, one);

    let mut delta = id.clone();
    delta.set(e1, e1, omega);
    delta.set(f1, f1, omega_inv);

    if n == 1 {
        return GenSet {
            s,
            t,
            delta,
            u: id.clone(),
            v: id.clone(),
            x: id,
        };
    }
    let (e2, f2) = (params.e(2), params.f(2));

    let mut u = Matrix::zero(f, d);
    for i in 0..d {
        let image = match i {
            _ if i == e1 => e2,
            _ if i == e2 => e1,
            _ if i == f1 => f2,
            _ if i == f2 => f1,
            _ => i,
        };
        u.set(i, image, one);
    }

    let mut v = Matrix::zero(f, d);
    for i in 1..=n {
        let next = i % n + 1;
        v.set(params.e(i), params.e(next), one);
        v.set(params.f(i), params.f(next), one);
    }

    let mut x = id;
    x.set(f1, e2, one);
    x.set(f2, e1, one);

    GenSet {
        s,
        t,
        delta,
        u,
        v,
        x,
    }
}

/// A seeded random word of `word_length` generator or inverse-generator
/// factors, together with the program that records it. For n = 1 only
/// `s`, `t`, `δ` are drawn.
pub fn random_element(
    params: &GroupParams,
    gens: &GenSet,
    word_length: usize,
    seed: u64,
) -> Result<(Matrix, Slp), SpnError> {
    if word_length == 0 {
        return Err(SpnError::ZeroWordLength);
    }
    let slots = if params.n() == 1 { 3 } else { NGENS };
    let mats = gens.to_vec();
    let inverses: Vec<Matrix> = mats
        .iter()
        .map(|m| m.inverse().expect("generators are invertible"))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = params.identity();
    let mut instrs = Vec::new();
    let mut last: Option<usize> = None;
    for _ in 0..word_length {
        let slot = rng.gen_range(0..slots);
        let invert = rng.gen_bool(0.5);
        instrs.push(Instr::Gen(slot));
        let mut factor = instrs.len() - 1;
        if invert {
            instrs.push(Instr::Inv(factor));
            factor = instrs.len() - 1;
            acc = acc.mul(&inverses[slot]);
        } else {
            acc = acc.mul(&mats[slot]);
        }
        last = Some(match last {
            None => factor,
            Some(prev) => {
                instrs.push(Instr::Mul(prev, factor));
                instrs.len() - 1
            }
        });
    }
    let slp = Slp::from_parts(NGENS, instrs, last.expect("word_length >= 1"))
        .expect("recorded program is well formed");
    Ok((acc, slp))
}

/// Writes the SPN text form: a header line followed by `2n` rows.
pub fn write_spn(m: &Matrix, params: &GroupParams) -> String {
    let mut out = format!("SPN n={} {}\n", params.n(), params.field());
    for i in 0..m.dim() {
        let row: Vec<String> = m.row(i).iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

/// Parses every SPN matrix in `text`. Blank lines and lines starting with
/// `#` are skipped between matrices.
pub fn parse_spn_all(text: &str) -> Result<Vec<(GroupParams, Matrix)>, SpnError> {
    let mut out = Vec::new();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    while let Some((lineno, header)) = lines.next() {
        let params = parse_header(header).map_err(|msg| SpnError::Parse { line: lineno, msg })?;
        let field = params.field().clone();
        let d = params.dim();
        let mut rows = Vec::with_capacity(d);
        for r in 0..d {
            let (lineno, line) = lines.next().ok_or(SpnError::Parse {
                line: lineno + r + 1,
                msg: format!("expected {d} rows, found {r}"),
            })?;
            let row = line
                .split_whitespace()
                .map(|tok| {
                    let v: u64 = tok.parse().map_err(|_| SpnError::Parse {
                        line: lineno,
                        msg: format!("bad entry {tok:?}"),
                    })?;
                    field.elem(v).map_err(|e| SpnError::Parse {
                        line: lineno,
                        msg: e.to_string(),
                    })
                })
                .collect::<Result<Vec<Fq>, _>>()?;
            if row.len() != d {
                return Err(SpnError::Parse {
                    line: lineno,
                    msg: format!("expected {d} entries, found {}", row.len()),
                });
            }
            rows.push(row);
        }
        if let Some(&(lineno, next)) = lines.peek() {
            if !next.starts_with("SPN") {
                return Err(SpnError::Parse {
                    line: lineno,
                    msg: format!("expected {d} rows, found more"),
                });
            }
        }
        let m = Matrix::from_rows(&field, rows).expect("row lengths checked");
        out.push((params, m));
    }
    Ok(out)
}

/// Parses exactly one SPN matrix.
pub fn parse_spn(text: &str) -> Result<(GroupParams, Matrix), SpnError> {
    let mut all = parse_spn_all(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => Err(SpnError::Parse {
            line: 1,
            msg: "no SPN header".into(),
        }),
        k => Err(SpnError::Parse {
            line: 1,
            msg: format!("expected one matrix, found {k}"),
        }),
    }
}

fn parse_header(line: &str) -> Result<GroupParams, String> {
    let rest = line
        .strip_prefix("SPN")
        .ok_or_else(|| format!("expected SPN header, found {line:?}"))?;
    let (mut n, mut p, mut k, mut modulus) = (None, None, None, None);
    for token in rest.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, found {token:?}"))?;
        let num = || value.parse::<u32>().map_err(|_| format!("bad value {value:?}"));
        match key {
            "n" => n = Some(num()? as usize),
            "p" => p = Some(num()?),
            "k" => k = Some(num()?),
            "mod" => modulus = Some(parse_coeff_list(value).map_err(|e| e.to_string())?),
            _ => return Err(format!("unknown header key {key:?}")),
        }
    }
    let n = n.ok_or("missing n=")?;
    let p = p.ok_or("missing p=")?;
    let field = Field::new(p, k.unwrap_or(1), modulus.as_deref()).map_err(|e| e.to_string())?;
    GroupParams::new(n, field).map_err(|e| e.to_string())
}
