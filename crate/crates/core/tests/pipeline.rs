use std::collections::HashSet;

use bbsp::blackbox::{BBElem, BBGroup, GroupOracle, MatrixGroup};
use bbsp::gf::{Field, Fq};
use bbsp::matrix::Matrix;
use bbsp::natrep::rewrite_natural;
use bbsp::rewrite::{
    entry_is_zero, in_s, in_t, rewrite, Corners, Pipeline, RewriteError, Step,
};
use bbsp::slp::Slp;
use bbsp::spn::{random_element, standard_generators, GroupParams};

fn params(n: usize, q: u64) -> GroupParams {
    GroupParams::new(n, Field::of_order(q).unwrap()).unwrap()
}

fn sample(p: &GroupParams, count: u64, seed0: u64) -> Vec<Matrix> {
    let gens = standard_generators(p);
    (0..count)
        .map(|i| random_element(p, &gens, 50, seed0 + i).unwrap().0)
        .collect()
}

fn whole_group(p: &GroupParams) -> Vec<Matrix> {
    let gens = standard_generators(p).to_vec();
    let key = |m: &Matrix| (0..m.dim()).flat_map(|i| m.row(i).to_vec()).collect::<Vec<Fq>>();
    let mut seen = HashSet::new();
    let mut all = vec![p.identity()];
    seen.insert(key(&all[0]));
    let mut i = 0;
    while i < all.len() {
        for g in &gens {
            let next = all[i].mul(g);
            if seen.insert(key(&next)) {
                all.push(next);
            }
        }
        i += 1;
    }
    all
}

fn eval_bb(bb: &BBGroup, slp: &Slp) -> BBElem {
    slp.eval(bb, bb.generators()).unwrap()
}

fn row_in_e1(m: &Matrix) -> bool {
    (1..m.dim()).all(|j| m.get(0, j).is_zero())
}

fn row_in_f1(m: &Matrix) -> bool {
    let last = m.dim() - 1;
    (0..last).all(|j| m.get(last, j).is_zero())
}

#[test]
fn membership_tests_agree_with_shadow_on_all_of_sp2_3() {
    let p = params(1, 3);
    let all = whole_group(&p);
    assert_eq!(all.len(), 24);
    let bb = BBGroup::new(p.clone(), 3);
    let pipe = Pipeline::black(&bb).unwrap();
    for m in &all {
        let h = bb.import(m).unwrap();
        assert_eq!(in_s(&bb, pipe.kit(), &h).unwrap(), m.get(0, 1).is_zero());
        assert_eq!(in_t(&bb, pipe.kit(), &h).unwrap(), row_in_e1(m));
        for col in 0..2 {
            assert_eq!(entry_is_zero(&bb, pipe.kit(), &h, col).unwrap(), m.get(0, col).is_zero());
        }
        let z = pipe.step1(&h).unwrap();
        assert!(bb.shadow(&bb.mul(&h, &eval_bb(&bb, &z)).unwrap()).get(0, 1).is_zero());
    }
}

#[test]
fn small_examples() {
    let p = params(1, 3);
    let bb = BBGroup::new(p, 9);
    let pipe = Pipeline::black(&bb).unwrap();
    let kit = pipe.kit();
    let gens = bb.generators();
    let id = bb.identity();
    assert!(in_s(&bb, kit, &id).unwrap());
    assert!(!in_s(&bb, kit, &gens[1]).unwrap());
    assert!(!entry_is_zero(&bb, kit, &id, 0).unwrap());
    assert!(entry_is_zero(&bb, kit, &id, 1).unwrap());
    assert!(!entry_is_zero(&bb, kit, &gens[1], 1).unwrap());
    assert!(in_t(&bb, kit, &gens[2]).unwrap());
    assert!(!in_t(&bb, kit, &gens[0]).unwrap());

    let before = bb.stats();
    in_s(&bb, kit, &gens[0]).unwrap();
    assert_eq!(bb.stats().since(&before).total(), 7);
}

#[test]
fn in_s_and_entry_tests_on_sp4_3() {
    let p = params(2, 3);
    let bb = BBGroup::new(p.clone(), 11);
    let pipe = Pipeline::black(&bb).unwrap();
    let mut hits = 0;
    for m in sample(&p, 500, 1000) {
        let h = bb.import(&m).unwrap();
        let s = in_s(&bb, pipe.kit(), &h).unwrap();
        assert_eq!(s, m.get(0, 3).is_zero());
        hits += s as u32;
        assert_eq!(in_t(&bb, pipe.kit(), &h).unwrap(), row_in_e1(&m));
        for col in 0..4 {
            assert_eq!(entry_is_zero(&bb, pipe.kit(), &h, col).unwrap(), m.get(0, col).is_zero());
        }
    }
    // both outcomes occur
    assert!(hits > 0 && hits < 500);
}

#[test]
fn b_element_reproduces_the_gamma_formulas() {
    for (n, q) in [(2, 3), (2, 5), (3, 3), (3, 5)] {
        let p = params(n, q);
        let f = p.field().clone();
        let d = 2 * n;
        let bb = BBGroup::new(p.clone(), 21);
        let pipe = Pipeline::black(&bb).unwrap();
        let mut checked = 0;
        let mut seed = 0;
        while checked < 100 {
            seed += 1;
            let (m, _) = random_element(&p, &standard_generators(&p), 50, seed).unwrap();
            let (g11, c, corner) = (m.get(0, 0), m.get(0, d - 2), m.get(0, d - 1));
            if !corner.is_zero() || g11.is_zero() || c.is_zero() {
                continue;
            }
            checked += 1;
            let b = bb.shadow(&pipe.b_element(&bb.import(&m).unwrap()).unwrap());
            assert_eq!(b.get(0, 0), Fq::ONE);
            for i in 1..d - 1 {
                assert_eq!(b.get(0, i), f.neg(f.mul(m.get(0, i), c)), "n={n} q={q} i={i}");
            }
            let two = f.from_int(2);
            let inner = f.sub(f.sub(f.mul(two, g11), f.mul(f.mul(g11, g11), corner)), c);
            assert_eq!(b.get(0, d - 1), f.neg(f.mul(c, inner)));
        }
    }
}

#[test]
fn step_postconditions_hold_in_the_shadow() {
    for (n, q, count) in [(2, 3, 200), (2, 5, 60), (3, 3, 100), (3, 9, 20), (4, 3, 20)] {
        let p = params(n, q);
        let d = 2 * n;
        let bb = BBGroup::new(p.clone(), 5);
        let pipe = Pipeline::black(&bb).unwrap();
        for m in sample(&p, count, 77) {
            let g = bb.import(&m).unwrap();
            let z1 = pipe.step1(&g).unwrap();
            let g = bb.mul(&g, &eval_bb(&bb, &z1)).unwrap();
            assert!(bb.shadow(&g).get(0, d - 1).is_zero());

            let g = match pipe.prepare_corners(&g).unwrap() {
                Corners::Degenerate(p) => {
                    let z = Slp::product(p.iter().map(|w| &w.slp)).unwrap();
                    let g = bb.mul(&g, &eval_bb(&bb, &z)).unwrap();
                    assert!(row_in_e1(&bb.shadow(&g)));
                    g
                }
                Corners::Ready(p) => {
                    let z = Slp::product(p.iter().map(|w| &w.slp)).unwrap();
                    let g = bb.mul(&g, &eval_bb(&bb, &z)).unwrap();
                    let sh = bb.shadow(&g);
                    assert!(sh.get(0, d - 1).is_zero());
                    assert!(!sh.get(0, 0).is_zero() && !sh.get(0, d - 2).is_zero());
                    let z2 = pipe.step2(&g).unwrap();
                    let g = bb.mul(&g, &eval_bb(&bb, &z2)).unwrap();
                    assert!(row_in_e1(&bb.shadow(&g)));
                    g
                }
            };

            let z3 = pipe.step3(&g).unwrap();
            let g = bb.mul(&g, &eval_bb(&bb, &z3)).unwrap();
            let sh = bb.shadow(&g);
            assert!(row_in_e1(&sh) && row_in_f1(&sh), "n={n} q={q}");

            let block = pipe.recover_block(&g).unwrap();
            let f = p.field();
            let expect = sh.block(1, d - 2).scale(f.inv(sh.get(0, 0)).unwrap());
            assert_eq!(block, expect);

            let z4 = pipe.step4(&g).unwrap();
            assert!(bb.equal(&eval_bb(&bb, &z4.slp), &g).unwrap());
        }
    }
}

#[test]
fn step3_and_step4_on_delta() {
    let p = params(2, 5);
    let bb = BBGroup::new(p.clone(), 5);
    let pipe = Pipeline::black(&bb).unwrap();
    let delta = bb.generators()[2].clone();
    let z3 = pipe.step3(&delta).unwrap();
    assert!(bb.shadow(&eval_bb(&bb, &z3)).is_identity());
    let z4 = pipe.step4(&delta).unwrap();
    assert!(bb.equal(&eval_bb(&bb, &z4.slp), &delta).unwrap());
    let block = pipe.recover_block(&delta).unwrap();
    let f = p.field();
    assert_eq!(block, Matrix::identity(f, 2).scale(f.inv(f.omega()).unwrap()));
}

#[test]
fn black_rewrite_round_trips() {
    for (n, q, trials) in [(1, 3, 30), (1, 9, 30), (2, 3, 30), (2, 9, 20), (3, 5, 10), (4, 3, 5)] {
        let p = params(n, q);
        let gens = standard_generators(&p);
        let bb = BBGroup::new(p.clone(), 1);
        for seed in 0..trials {
            let (m, word) = random_element(&p, &gens, 50, seed).unwrap();
            let g = eval_bb(&bb, &word);
            let res = rewrite(&bb, &g).unwrap();
            assert!(bb.equal(&eval_bb(&bb, &res.slp), &g).unwrap());
            let plain = MatrixGroup::new(p.clone());
            assert_eq!(res.slp.eval(&plain, plain.generators()).unwrap(), m);
        }
    }
}

#[test]
fn identity_takes_the_fast_path() {
    let bb = BBGroup::new(params(2, 5), 4);
    let id = bb.identity();
    let res = rewrite(&bb, &id).unwrap();
    assert!(bb.shadow(&eval_bb(&bb, &res.slp)).is_identity());
    let step1 = res.trace.iter().find(|r| r.step == Step::Step1).unwrap();
    assert_eq!(step1.slp_cost, 0);
    assert!(step1.calls.total() <= 12);
}

#[test]
fn scramble_seed_does_not_change_the_program() {
    let p = params(2, 5);
    let gens = standard_generators(&p);
    let a = BBGroup::new(p.clone(), 1);
    let b = BBGroup::new(p.clone(), 2);
    for seed in 0..10 {
        let (_, word) = random_element(&p, &gens, 50, seed).unwrap();
        let ra = rewrite(&a, &eval_bb(&a, &word)).unwrap();
        let rb = rewrite(&b, &eval_bb(&b, &word)).unwrap();
        assert_eq!(ra.slp.to_string(), rb.slp.to_string());
        assert_eq!(ra.stats, rb.stats);
    }
}

#[test]
fn white_and_black_agree() {
    let p = params(2, 3);
    let bb = BBGroup::new(p.clone(), 8);
    for m in sample(&p, 30, 500) {
        let white = rewrite_natural(&m, &p).unwrap();
        let black = rewrite(&bb, &bb.import(&m).unwrap()).unwrap();
        assert_eq!(white.to_string(), black.slp.to_string());
    }
}

#[test]
fn corrupted_handles_are_rejected() {
    for (n, q) in [(1, 5), (2, 3), (2, 5), (3, 3)] {
        let p = params(n, q);
        let f = p.field();
        let bb = BBGroup::new(p.clone(), 6);
        let mut bad = p.identity();
        bad.set(0, 0, f.omega());
        for m in sample(&p, 5, 40) {
            let h = bb.import(&m.mul(&bad)).unwrap();
            match rewrite(&bb, &h) {
                Err(RewriteError::NotInGroup(_)) => {}
                other => panic!("n={n} q={q}: expected NotInGroup, got {:?}", other.map(|r| r.slp.len())),
            }
        }
    }
}
