//! Straight-line programs over a fixed tuple of generator slots.
//!
//! A program is a list of instructions where every operand refers to an
//! earlier instruction. Programs are immutable; the combinators below
//! concatenate their operands with re-indexed references.
//!
//! The canonical text form is
//!
//! ```text
//! SLPv1 ngens=6
//! 0: gen 0
//! 1: pow 0 5
//! 2: mul 1 0
//! return 2
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::blackbox::{GroupOracle, OracleError};

/// Number of standard generator slots.
pub const NGENS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlpError {
    #[error("generator slot {slot} out of range for {ngens} slots")]
    BadSlot { slot: usize, ngens: usize },
    #[error("programs have different arities ({0} and {1})")]
    MixedArity(usize, usize),
    #[error("instruction {index} refers to {target}, which is not an earlier instruction")]
    BadRef { index: usize, target: usize },
    #[error("program has no instructions")]
    Empty,
    #[error("expected {expected} substitution images, got {found}")]
    ImageCount { expected: usize, found: usize },
    #[error("no value supplied for generator slot {0}")]
    MissingGenerator(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instr {
    Gen(usize),
    Mul(usize, usize),
    Inv(usize),
    Pow(usize, i64),
}

impl Instr {
    fn shifted(self, by: usize) -> Instr {
        match self {
            Instr::Gen(s) => Instr::Gen(s),
            Instr::Mul(a, b) => Instr::Mul(a + by, b + by),
            Instr::Inv(a) => Instr::Inv(a + by),
            Instr::Pow(a, e) => Instr::Pow(a + by, e),
        }
    }

    fn refs(self) -> impl Iterator<Item = usize> {
        let (a, b) = match self {
            Instr::Gen(_) => (None, None),
            Instr::Mul(a, b) => (Some(a), Some(b)),
            Instr::Inv(a) | Instr::Pow(a, _) => (Some(a), None),
        };
        a.into_iter().chain(b)
    }

    /// Contribution to [`Slp::cost`].
    pub fn cost(self) -> usize {
        match self {
            Instr::Pow(_, e) => pow_cost(e),
            _ => 1,
        }
    }
}

/// `2⌊log₂|e|⌋ + 2`, the square-and-multiply cost charged for `Pow`.
pub fn pow_cost(e: i64) -> usize {
    let m = e.unsigned_abs();
    if m == 0 {
        2
    } else {
        2 * (63 - m.leading_zeros() as usize) + 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slp {
    ngens: usize,
    instrs: Vec<Instr>,
    result: usize,
}

impl Slp {
    /// Checks the acyclicity invariant and slot ranges.
    pub fn from_parts(ngens: usize, instrs: Vec<Instr>, result: usize) -> Result<Slp, SlpError> {
        if instrs.is_empty() {
            return Err(SlpError::Empty);
        }
        for (index, &ins) in instrs.iter().enumerate() {
            if let Instr::Gen(slot) = ins {
                if slot >= ngens {
                    return Err(SlpError::BadSlot { slot, ngens });
                }
            }
            if let Some(target) = ins.refs().find(|&r| r >= index) {
                return Err(SlpError::BadRef { index, target });
            }
        }
        if result >= instrs.len() {
            return Err(SlpError::BadRef {
                index: instrs.len(),
                target: result,
            });
        }
        Ok(Slp {
            ngens,
            instrs,
            result,
        })
    }

    pub fn generator(slot: usize) -> Result<Slp, SlpError> {
        Slp::from_parts(NGENS, vec![Instr::Gen(slot)], 0)
    }

    /// Generator program for a slot that is known to be valid.
    pub(crate) fn slot(slot: usize) -> Slp {
        Slp::generator(slot).expect("valid slot")
    }

    /// `g_0^{-1} · g_0`.
    pub fn identity() -> Slp {
        Slp::slot(0).pow(0)
    }

    pub fn ngens(&self) -> usize {
        self.ngens
    }

    pub fn instrs(&self) -> &[Instr] {
        &self.instrs
    }

    pub fn result(&self) -> usize {
        self.result
    }

    /// Number of instructions.
    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    /// Length with `Pow` charged at its square-and-multiply cost.
    pub fn cost(&self) -> usize {
        self.instrs.iter().map(|i| i.cost()).sum()
    }

    fn push(&mut self, ins: Instr) -> usize {
        self.instrs.push(ins);
        self.instrs.len() - 1
    }

    /// Appends `other` and returns the new index of its result.
    fn append(&mut self, other: &Slp) -> Result<usize, SlpError> {
        if self.ngens != other.ngens {
            return Err(SlpError::MixedArity(self.ngens, other.ngens));
        }
        let off = self.instrs.len();
        self.instrs
            .extend(other.instrs.iter().map(|i| i.shifted(off)));
        Ok(other.result + off)
    }

    pub fn mul(&self, other: &Slp) -> Result<Slp, SlpError> {
        let mut out = self.clone();
        let b = out.append(other)?;
        out.result = out.push(Instr::Mul(self.result, b));
        Ok(out)
    }

    pub fn inv(&self) -> Slp {
        let mut out = self.clone();
        out.result = out.push(Instr::Inv(self.result));
        out
    }

    /// `by^{-1} · self · by`.
    pub fn conj(&self, by: &Slp) -> Result<Slp, SlpError> {
        let mut out = self.clone();
        let b = out.append(by)?;
        let b_inv = out.push(Instr::Inv(b));
        let left = out.push(Instr::Mul(b_inv, self.result));
        out.result = out.push(Instr::Mul(left, b));
        Ok(out)
    }

    /// `self^e`. Exponents `1` and `-1` add no `Pow`; `0` yields
    /// `self^{-1} · self`.
    pub fn pow(&self, e: i64) -> Slp {
        let mut out = self.clone();
        out.result = match e {
            1 => return out,
            -1 => out.push(Instr::Inv(self.result)),
            0 => {
                let inv = out.push(Instr::Inv(self.result));
                out.push(Instr::Mul(inv, self.result))
            }
            _ => out.push(Instr::Pow(self.result, e)),
        };
        out
    }

    /// Left-to-right product of `factors`; the empty product is
    /// [`Slp::identity`].
    pub fn product<'a>(factors: impl IntoIterator<Item = &'a Slp>) -> Result<Slp, SlpError> {
        let mut iter = factors.into_iter();
        let Some(first) = iter.next() else {
            return Ok(Slp::identity());
        };
        let mut out = first.clone();
        for f in iter {
            let acc = out.result;
            let b = out.append(f)?;
            out.result = out.push(Instr::Mul(acc, b));
        }
        Ok(out)
    }

    /// Replaces every generator slot `i` by the program `images[i]`. Each
    /// image that is used is emitted once, in slot order, ahead of the body.
    pub fn substitute(&self, images: &[Slp]) -> Result<Slp, SlpError> {
        if images.len() != self.ngens {
            return Err(SlpError::ImageCount {
                expected: self.ngens,
                found: images.len(),
            });
        }
        let ngens = images[0].ngens;
        let mut used = vec![false; self.ngens];
        for ins in &self.instrs {
            if let Instr::Gen(s) = *ins {
                used[s] = true;
            }
        }
        let mut out = Slp {
            ngens,
            instrs: Vec::new(),
            result: 0,
        };
        let mut image_result = vec![usize::MAX; self.ngens];
        for (slot, image) in images.iter().enumerate().filter(|(s, _)| used[*s]) {
            image_result[slot] = out.append(image)?;
        }
        let mut map = Vec::with_capacity(self.instrs.len());
        for &ins in &self.instrs {
            let idx = match ins {
                Instr::Gen(s) => image_result[s],
                Instr::Mul(a, b) => out.push(Instr::Mul(map[a], map[b])),
                Instr::Inv(a) => out.push(Instr::Inv(map[a])),
                Instr::Pow(a, e) => out.push(Instr::Pow(map[a], e)),
            };
            map.push(idx);
        }
        out.result = map[self.result];
        Ok(out)
    }

    /// Evaluates the program in one forward pass over `oracle`, with
    /// `gens[i]` as the value of slot `i`.
    pub fn eval<O: GroupOracle + ?Sized>(
        &self,
        oracle: &O,
        gens: &[O::Elem],
    ) -> Result<O::Elem, SlpError> {
        let mut values: Vec<O::Elem> = Vec::with_capacity(self.instrs.len());
        for &ins in &self.instrs {
            let v = match ins {
                Instr::Gen(s) => gens.get(s).cloned().ok_or(SlpError::MissingGenerator(s))?,
                Instr::Mul(a, b) => oracle.mul(&values[a], &values[b])?,
                Instr::Inv(a) => oracle.inv(&values[a])?,
                Instr::Pow(a, e) => power(oracle, &values[a], e)?,
            };
            values.push(v);
        }
        Ok(values.swap_remove(self.result))
    }
}

/// Square-and-multiply through the oracle.
pub fn power<O: GroupOracle + ?Sized>(
    oracle: &O,
    x: &O::Elem,
    e: i64,
) -> Result<O::Elem, OracleError> {
    if e == 0 {
        return Ok(oracle.identity());
    }
    let mut base = if e < 0 { oracle.inv(x)? } else { x.clone() };
    let mut m = e.unsigned_abs();
    let mut acc: Option<O::Elem> = None;
    loop {
        if m & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => oracle.mul(&a, &base)?,
            });
        }
        m >>= 1;
        if m == 0 {
            break;
        }
        base = oracle.mul(&base, &base)?;
    }
    Ok(acc.expect("e != 0"))
}

impl fmt::Display for Slp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SLPv1 ngens={}", self.ngens)?;
        for (i, ins) in self.instrs.iter().enumerate() {
            match *ins {
                Instr::Gen(s) => writeln!(f, "{i}: gen {s}")?,
                Instr::Mul(a, b) => writeln!(f, "{i}: mul {a} {b}")?,
                Instr::Inv(a) => writeln!(f, "{i}: inv {a}")?,
                Instr::Pow(a, e) => writeln!(f, "{i}: pow {a} {e}")?,
            }
        }
        write!(f, "return {}", self.result)
    }
}

impl FromStr for Slp {
    type Err = SlpError;

    fn from_str(text: &str) -> Result<Slp, SlpError> {
        let err = |line: usize, msg: String| SlpError::Parse { line, msg };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty input".into()))?;
        let ngens: usize = header
            .strip_prefix("SLPv1 ngens=")
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| err(1, format!("expected \"SLPv1 ngens=<n>\", found {header:?}")))?;

        let mut instrs = Vec::new();
        let mut result = None;
        for (line, text) in lines {
            if text.is_empty() {
                continue;
            }
            if result.is_some() {
                return Err(err(line, "content after return".into()));
            }
            if let Some(r) = text.strip_prefix("return ") {
                let r: usize = r
                    .trim()
                    .parse()
                    .map_err(|_| err(line, format!("bad return reference {r:?}")))?;
                if r >= instrs.len() {
                    return Err(err(line, format!("return refers to missing instruction {r}")));
                }
                result = Some(r);
                continue;
            }
            let (idx, body) = text
                .split_once(':')
                .ok_or_else(|| err(line, format!("expected \"<i>: <op>\", found {text:?}")))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| err(line, format!("bad instruction index {idx:?}")))?;
            if idx != instrs.len() {
                return Err(err(line, format!("expected index {}, found {idx}", instrs.len())));
            }
            let words: Vec<&str> = body.split_whitespace().collect();
            let num = |s: &str| -> Result<usize, SlpError> {
                s.parse().map_err(|_| err(line, format!("bad operand {s:?}")))
            };
            let ins = match words.as_slice() {
                ["gen", s] => Instr::Gen(num(s)?),
                ["mul", a, b] => Instr::Mul(num(a)?, num(b)?),
                ["inv", a] => Instr::Inv(num(a)?),
                ["pow", a, e] => Instr::Pow(
                    num(a)?,
                    e.parse().map_err(|_| err(line, format!("bad exponent {e:?}")))?,
                ),
                _ => return Err(err(line, format!("unknown instruction {body:?}"))),
            };
            if let Instr::Gen(slot) = ins {
                if slot >= ngens {
                    return Err(err(line, format!("slot {slot} out of range")));
                }
            }
            if let Some(target) = ins.refs().find(|&r| r >= idx) {
                return Err(err(line, format!("reference {target} is not an earlier instruction")));
            }
            instrs.push(ins);
        }
        let result = result.ok_or_else(|| err(text.lines().count().max(1), "missing return".into()))?;
        Slp::from_parts(ngens, instrs, result)
    }
}
