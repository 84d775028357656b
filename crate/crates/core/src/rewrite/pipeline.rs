//! The four reduction steps, generic over the probe.

use std::cell::Cell;

use serde::Serialize;

use crate::blackbox::{GroupOracle, OracleStats};
use crate::matrix::Matrix;
use crate::natrep::rewrite_natural;
use crate::slp::Slp;
use crate::spn::{form_matrix, slot};

use super::kit::{GenKit, Word};
use super::probe::{Coord, Probe, ScanProbe};
use super::{failed, RewriteError};

/// Which column moves a correction may make.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Free,
    /// Corrections must stabilize `⟨f_1⟩`, so that conjugating them by `s`
    /// keeps `⟨e_1⟩` fixed.
    FixF1,
}

/// Outcome of the corner preparation before Step 2.
#[derive(Debug, Clone)]
pub enum Corners<E> {
    /// Entries `(1,1)` and `(1,2n−1)` are now nonzero; `(1,2n)` is zero.
    Ready(Vec<Word<E>>),
    /// Row 1 is already in `⟨e_1⟩`.
    Degenerate(Vec<Word<E>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Kit,
    Step1,
    Step2,
    Step3,
    Recover,
    Step4,
    Verify,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub step: Step,
    pub calls: OracleStats,
    /// Cost of the program this step contributed.
    pub slp_cost: usize,
}

#[derive(Debug, Clone)]
pub struct RewriteResult {
    pub slp: Slp,
    /// All oracle calls of this rewrite, including the final check.
    pub stats: OracleStats,
    pub trace: Vec<StepRecord>,
    /// How often Step 2 needed the trailing long-root correction.
    pub long_root_fixes: u32,
}

impl RewriteResult {
    pub fn calls(&self, step: Step) -> u64 {
        self.trace
            .iter()
            .filter(|r| r.step == step)
            .map(|r| r.calls.total())
            .sum()
    }

    /// Oracle calls spent finding the program, without the final check.
    pub fn search_calls(&self) -> u64 {
        self.trace
            .iter()
            .filter(|r| r.step != Step::Verify)
            .map(|r| r.calls.total())
            .sum()
    }
}

/// One rewriting session: an oracle, its kit and a probe.
pub struct Pipeline<'a, O: GroupOracle, P> {
    o: &'a O,
    kit: GenKit<O::Elem>,
    probe: P,
    kit_calls: OracleStats,
    long_root_fixes: Cell<u32>,
}

impl<'a, O: GroupOracle> Pipeline<'a, O, ScanProbe<O::Elem>> {
    /// The black-box pipeline.
    pub fn black(o: &'a O) -> Result<Self, RewriteError> {
        Pipeline::with_probe(o, ScanProbe::new)
    }
}

impl<'a, O: GroupOracle, P: Probe<O>> Pipeline<'a, O, P> {
    pub fn with_probe(
        o: &'a O,
        make_probe: impl FnOnce(&O, &GenKit<O::Elem>) -> Result<P, RewriteError>,
    ) -> Result<Self, RewriteError> {
        let before = o.stats();
        let kit = GenKit::build(o)?;
        let probe = make_probe(o, &kit)?;
        Ok(Pipeline {
            o,
            kit_calls: o.stats().since(&before),
            kit,
            probe,
            long_root_fixes: Cell::new(0),
        })
    }

    pub fn kit(&self) -> &GenKit<O::Elem> {
        &self.kit
    }

    pub fn probe(&self) -> &P {
        &self.probe
    }

    fn n(&self) -> usize {
        self.kit.params().n()
    }

    fn word(&self, slp: Slp) -> Result<Word<O::Elem>, RewriteError> {
        Word::eval(self.o, slp)
    }

    fn apply(&self, g: &O::Elem, factors: &[Word<O::Elem>]) -> Result<O::Elem, RewriteError> {
        let mut cur = g.clone();
        for f in factors {
            cur = self.o.mul(&cur, &f.elem)?;
        }
        Ok(cur)
    }

    /// A correction `z` with `g·z ∈ S`.
    pub fn step1(&self, g: &O::Elem) -> Result<Slp, RewriteError> {
        Ok(product(&self.step1_in(g, Mode::Free)?))
    }

    fn step1_in(&self, g: &O::Elem, mode: Mode) -> Result<Vec<Word<O::Elem>>, RewriteError> {
        let (o, kit) = (self.o, &self.kit);
        if self.probe.in_s(o, kit, g)? {
            return Ok(Vec::new());
        }
        if self.n() == 1 {
            if mode == Mode::Free && self.probe.entry_is_zero(o, kit, g, 0)? {
                return Ok(vec![kit.s.clone()]);
            }
            return self.ell_fix(g, "step 1");
        }
        if let Some(k) = self.probe.find_zalpha(o, kit, g)? {
            return Ok(vec![self.word(kit.zalpha_pow(k))?]);
        }
        // entry (1, 2n−1) is zero
        match mode {
            Mode::Free => {
                let u = self.word(Slp::slot(slot::U))?;
                if !self.probe.in_s(o, kit, &o.mul(g, &u.elem)?)? {
                    return failed("step 1", "no z_α and u does not reach S");
                }
                Ok(vec![u])
            }
            Mode::FixF1 => self.ell_fix(g, "step 1"),
        }
    }

    /// `[ℓ(μ)]` clearing entry `(1, 2n)`; empty when it is already zero.
    fn ell_fix(&self, g: &O::Elem, step: &'static str) -> Result<Vec<Word<O::Elem>>, RewriteError> {
        match self.probe.find_ell(self.o, &self.kit, g)? {
            Some(mu) if mu.is_zero() => Ok(Vec::new()),
            Some(mu) => Ok(vec![self.word(self.kit.ell(mu))?]),
            None => failed(step, "no long-root element clears entry (1, 2n)"),
        }
    }

    /// Moves nonzero entries of row 1 into columns 1 and `2n−1`, for
    /// `g ∈ S`.
    pub fn prepare_corners(&self, g: &O::Elem) -> Result<Corners<O::Elem>, RewriteError> {
        self.corners_in(g, Mode::Free)
    }

    fn corners_in(&self, g: &O::Elem, mode: Mode) -> Result<Corners<O::Elem>, RewriteError> {
        let (o, kit) = (self.o, &self.kit);
        let n = self.n();
        if n == 1 {
            return Ok(Corners::Degenerate(Vec::new()));
        }
        let d = 2 * n;
        let last = d - 1;
        let params = kit.params();
        let zeros = |h: &O::Elem| -> Result<Vec<bool>, RewriteError> {
            (0..last).map(|j| self.probe.entry_is_zero(o, kit, h, j)).collect()
        };
        let mut zero = zeros(g)?;
        let mut factors = Vec::new();
        if zero[0] {
            if mode == Mode::FixF1 {
                return failed("step 3", "entry (1,1) vanished");
            }
            let lone = (1..last).find(|&j| !zero[j] && zero[params.partner(j)]);
            let cur = match lone {
                Some(j) => {
                    factors.push(kit.to_e1[j].clone());
                    self.apply(g, &factors)?
                }
                None => {
                    // every nonzero entry sits in a hyperbolic pair
                    let Some(j) = (1..last).find(|&j| !zero[j]) else {
                        return failed("step 2", "row 1 is zero");
                    };
                    factors.push(kit.to_e1[j].clone());
                    let moved = self.apply(g, &factors)?;
                    let fix = self.ell_fix(&moved, "step 2")?;
                    factors.extend(fix);
                    self.apply(g, &factors)?
                }
            };
            zero = zeros(&cur)?;
            if zero[0] {
                return failed("step 2", "entry (1,1) still zero");
            }
        }
        let Some(j) = (1..last).find(|&j| !zero[j]) else {
            return Ok(Corners::Degenerate(factors));
        };
        if zero[last - 1] {
            factors.push(kit.to_f2[j].clone().expect("middle column"));
        }
        Ok(Corners::Ready(factors))
    }

    /// The element `b = (x^{q^g} x^{-1})^s`, a Q-element whose coordinates
    /// are `−g_{1,i}·g_{1,2n−1}`.
    pub fn b_element(&self, g: &O::Elem) -> Result<O::Elem, RewriteError> {
        let o = self.o;
        let gens = o.generators();
        let x = &gens[slot::X];
        let qg = o.mul(&o.mul(&o.inv(g)?, &self.kit.q_elem.elem)?, g)?;
        let xq = o.mul(&o.mul(&o.inv(&qg)?, x)?, &qg)?;
        let b0 = o.mul(&xq, &o.inv(x)?)?;
        Ok(o.mul(&o.mul(&self.kit.s_inv, &b0)?, &self.kit.s.elem)?)
    }

    /// A correction `z` with `g·z ∈ T`, for `g` prepared by
    /// [`Pipeline::prepare_corners`].
    pub fn step2(&self, g: &O::Elem) -> Result<Slp, RewriteError> {
        Ok(product(&self.step2_in(g)?))
    }

    fn step2_in(&self, g: &O::Elem) -> Result<Vec<Word<O::Elem>>, RewriteError> {
        let (o, kit) = (self.o, &self.kit);
        let d = kit.params().dim();
        let b = self.b_element(g)?;
        let Some((_, z0)) = self.probe.find_k0(o, kit, g, &b)? else {
            return failed("step 2", "no scaling of b clears entry (1, 2n−1)");
        };
        let mut factors = Vec::new();
        for col in 1..d - 1 {
            match self.probe.coordinate(o, kit, &z0, col)? {
                Some(Coord::Zero) => {}
                Some(Coord::Pow(k)) => factors.push(self.word(kit.xi_pow(col, k))?),
                None => return failed("step 2", "coordinate of z₀ not found"),
            }
        }
        let cur = self.apply(g, &factors)?;
        let fix = self.ell_fix(&cur, "step 2")?;
        if !fix.is_empty() {
            self.long_root_fixes.set(self.long_root_fixes.get() + 1);
        }
        factors.extend(fix);
        Ok(factors)
    }

    /// Steps 1 and 2 in the given mode.
    fn to_t(&self, g: &O::Elem, mode: Mode) -> Result<Vec<Word<O::Elem>>, RewriteError> {
        let mut factors = self.step1_in(g, mode)?;
        let cur = self.apply(g, &factors)?;
        match self.corners_in(&cur, mode)? {
            Corners::Degenerate(p) => factors.extend(p),
            Corners::Ready(p) => {
                let cur = self.apply(&cur, &p)?;
                factors.extend(p);
                factors.extend(self.step2_in(&cur)?);
            }
        }
        Ok(factors)
    }

    /// A correction `z` fixing `⟨e_1⟩` with `g·z ∈ G₁`, for `g ∈ T`.
    pub fn step3(&self, g: &O::Elem) -> Result<Slp, RewriteError> {
        Ok(product(&self.step3_in(g)?))
    }

    fn step3_in(&self, g: &O::Elem) -> Result<Vec<Word<O::Elem>>, RewriteError> {
        let o = self.o;
        let s = &self.kit.s;
        let h = o.mul(&o.mul(&self.kit.s_inv, g)?, &s.elem)?;
        let inner = self.to_t(&h, Mode::FixF1)?;
        if inner.is_empty() {
            return Ok(inner);
        }
        let p = product(&inner);
        let elem = self.apply(&s.elem, &inner)?;
        let elem = o.mul(&elem, &self.kit.s_inv)?;
        Ok(vec![Word {
            slp: p.conj(&s.slp.inv())?,
            elem,
        }])
    }

    /// The middle block of `g ∈ G₁` divided by `g_{1,1}`.
    pub fn recover_block(&self, g: &O::Elem) -> Result<Matrix, RewriteError> {
        match self.probe.recover_block(self.o, &self.kit, g)? {
            Some(m) => Ok(m),
            None => failed("step 4", "block entry not found"),
        }
    }

    /// A program for `g ∈ G₁`.
    pub fn step4(&self, g: &O::Elem) -> Result<Word<O::Elem>, RewriteError> {
        let block = if self.n() == 1 { None } else { Some(self.recover_block(g)?) };
        self.finish(g, block.as_ref())
    }

    fn finish(&self, g: &O::Elem, block: Option<&Matrix>) -> Result<Word<O::Elem>, RewriteError> {
        let (o, kit) = (self.o, &self.kit);
        let Some(block) = block else {
            let id = Word {
                slp: Slp::identity(),
                elem: o.identity(),
            };
            return match self.torus(g, id, true)? {
                Some(w) => Ok(w),
                None => failed("step 4", "no torus element matches"),
            };
        };
        let small = kit.params().reduced().expect("n >= 2");
        let field = small.field();
        let m = small.dim();
        let form = form_matrix(field, small.n());
        let r = block.mul(&form).mul(&block.transpose()).get(0, m - 1);
        let Some(c) = field.inv(r).ok().and_then(|ri| field.sqrt(ri)) else {
            return failed("step 4", "block is not a scaled symplectic matrix");
        };
        for c in [c, field.neg(c)] {
            let scaled = block.scale(c);
            let inner = match rewrite_natural(&scaled, &small) {
                Ok(slp) => slp,
                Err(RewriteError::NotSymplectic) => continue,
                Err(e) => return Err(e),
            };
            let z4 = self.word(inner.substitute(kit.sub_gens())?)?;
            if let Some(w) = self.torus(g, z4, false)? {
                return Ok(w);
            }
        }
        failed("step 4", "no torus element matches")
    }

    /// `±δ^k·z` equal to `g`, if the residual `g·z^{-1}` is central times a
    /// power of `δ`.
    fn torus(
        &self,
        g: &O::Elem,
        z: Word<O::Elem>,
        z_is_identity: bool,
    ) -> Result<Option<Word<O::Elem>>, RewriteError> {
        let (o, kit) = (self.o, &self.kit);
        let residual = if z_is_identity { g.clone() } else { o.mul(g, &o.inv(&z.elem)?)? };
        let Some((k, minus)) = self.probe.find_torus(o, kit, &residual)? else {
            return Ok(None);
        };
        let mut factors = Vec::new();
        if minus {
            factors.push(kit.minus_identity.slp.clone());
        }
        if k != 0 {
            factors.push(Slp::slot(slot::DELTA).pow(k as i64));
        }
        if !z_is_identity || factors.is_empty() {
            factors.push(z.slp);
        }
        Ok(Some(Word {
            slp: Slp::product(&factors)?,
            elem: g.clone(),
        }))
    }

    /// Runs all steps on `g` and checks the result.
    pub fn run(&self, g: &O::Elem) -> Result<RewriteResult, RewriteError> {
        let o = self.o;
        let start = o.stats();
        let mut trace = vec![StepRecord {
            step: Step::Kit,
            calls: self.kit_calls,
            slp_cost: 0,
        }];
        let mut factors: Vec<Word<O::Elem>> = Vec::new();
        let mut cur = g.clone();

        let mut record = |step: Step, before: OracleStats, slp_cost: usize| {
            trace.push(StepRecord {
                step,
                calls: o.stats().since(&before),
                slp_cost,
            });
        };

        let before = o.stats();
        let z = self.step1_in(&cur, Mode::Free)?;
        cur = self.apply(&cur, &z)?;
        record(Step::Step1, before, cost(&z));
        factors.extend(z);

        let before = o.stats();
        let mut z = Vec::new();
        if self.n() >= 2 {
            match self.corners_in(&cur, Mode::Free)? {
                Corners::Degenerate(p) => z.extend(p),
                Corners::Ready(p) => {
                    let ready = self.apply(&cur, &p)?;
                    z.extend(p);
                    z.extend(self.step2_in(&ready)?);
                }
            }
        }
        cur = self.apply(&cur, &z)?;
        record(Step::Step2, before, cost(&z));
        factors.extend(z);

        let before = o.stats();
        let z = self.step3_in(&cur)?;
        cur = self.apply(&cur, &z)?;
        record(Step::Step3, before, cost(&z));
        factors.extend(z);

        let before = o.stats();
        let block = if self.n() == 1 { None } else { Some(self.recover_block(&cur)?) };
        record(Step::Recover, before, 0);

        let before = o.stats();
        let z4 = self.finish(&cur, block.as_ref())?;
        let z4_cost = z4.slp.cost();
        let slp = if factors.is_empty() {
            z4.slp
        } else {
            z4.slp.mul(&product(&factors).inv())?
        };
        record(Step::Step4, before, z4_cost);

        let before = o.stats();
        let value = slp.eval(o, o.generators())?;
        let ok = o.equal(&value, g)?;
        record(Step::Verify, before, 0);
        if !ok {
            return Err(RewriteError::NotInGroup("program does not evaluate to the input".into()));
        }
        Ok(RewriteResult {
            slp,
            stats: o.stats().since(&start).plus(&self.kit_calls),
            trace,
            long_root_fixes: self.long_root_fixes.get(),
        })
    }
}

fn product<E>(factors: &[Word<E>]) -> Slp {
    Slp::product(factors.iter().map(|w| &w.slp)).expect("programs share arity")
}

fn cost<E>(factors: &[Word<E>]) -> usize {
    factors.iter().map(|w| w.slp.cost()).sum()
}
