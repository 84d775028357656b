use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use bbsp::blackbox::{GroupOracle, MatrixGroup};
use bbsp::gf::Field;
use bbsp::spn::{parse_spn, standard_generators, write_spn, GroupParams};

fn bbsp(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_bbsp"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn params(n: usize, q: u64) -> GroupParams {
    GroupParams::new(n, Field::of_order(q).unwrap()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gens_rank_one_prints_identities_for_u_v_x() {
    let out = bbsp(&["gens", "--n", "1", "--p", "3"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# s\nSPN n=1 p=3 k=1 mod=0,1\n0 1\n2 0\n# t\n"));
    for name in ["u", "v", "x"] {
        assert!(text.contains(&format!("# {name}\nSPN n=1 p=3 k=1 mod=0,1\n1 0\n0 1\n")));
    }
}

#[test]
fn gens_pipe_into_verify() {
    let gens = stdout(&bbsp(&["gens", "--n", "2", "--p", "3"], None));
    let out = bbsp(&["verify"], Some(&gens));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "ok: 6 symplectic\n");
}

#[test]
fn even_characteristic_is_an_input_error() {
    let out = bbsp(&["gens", "--n", "1", "--p", "2"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("even"));
}

#[test]
fn rewrite_identity() {
    let p = params(2, 3);
    let id = write_spn(&p.identity(), &p);
    for extra in [&[][..], &["--white"][..]] {
        let mut args = vec!["rewrite", "--verify"];
        args.extend_from_slice(extra);
        let out = bbsp(&args, Some(&id));
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert!(stdout(&out).starts_with("SLPv1 ngens=6\n"));
    }
}

#[test]
fn rewrite_rejects_non_symplectic_and_garbage() {
    let out = bbsp(&["rewrite"], Some("SPN n=1 p=3 k=1 mod=0,1\n1 1\n1 1\n"));
    assert_eq!(out.status.code(), Some(2));
    let out = bbsp(&["rewrite"], Some("not a matrix\n"));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 1"));
}

#[test]
fn random_piped_into_rewrite_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let m = stdout(&bbsp(&["random", "--n", "2", "--p", "5", "--seed", "7"], None));
    let out = bbsp(&["rewrite", "--verify", "--stats"], Some(&m));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stats = stderr(&out);
    assert!(stats.starts_with("stats: mul="), "{stats}");
    assert!(stats.contains(" inv=") && stats.contains(" eq=") && stats.contains(" slp_len="));

    let slp = dir.path().join("out.slp");
    std::fs::write(&slp, stdout(&out)).unwrap();
    let back = bbsp(&["eval", "--slp", path_str(&slp), "--n", "2", "--p", "5"], None);
    assert_eq!(back.status.code(), Some(0));
    assert_eq!(stdout(&back), m);
}

#[test]
fn white_and_black_programs_match() {
    let m = stdout(&bbsp(&["random", "--n", "2", "--p", "3", "--seed", "2"], None));
    let black = bbsp(&["rewrite", "--seed", "5"], Some(&m));
    let white = bbsp(&["rewrite", "--white"], Some(&m));
    assert_eq!(stdout(&black), stdout(&white));
}

#[test]
fn eval_generator_zero_is_s() {
    let dir = tempfile::tempdir().unwrap();
    let slp = dir.path().join("s.slp");
    std::fs::write(&slp, "SLPv1 ngens=6\n0: gen 0\nreturn 0\n").unwrap();
    let out = bbsp(&["eval", "--slp", path_str(&slp), "--n", "2", "--p", "3"], None);
    assert_eq!(out.status.code(), Some(0));
    let p = params(2, 3);
    let (_, m) = parse_spn(&stdout(&out)).unwrap();
    assert_eq!(m, standard_generators(&p).to_vec()[0]);
}

#[test]
fn eval_malformed_program_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let slp = dir.path().join("bad.slp");
    std::fs::write(&slp, "SLPv1 ngens=6\n0: gen 0\n1: mul 0 7\nreturn 1\n").unwrap();
    let out = bbsp(&["eval", "--slp", path_str(&slp), "--n", "1", "--p", "3"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn random_is_deterministic_and_symplectic() {
    let args = ["random", "--n", "3", "--p", "3", "--k", "2", "--seed", "4"];
    let a = stdout(&bbsp(&args, None));
    assert_eq!(a, stdout(&bbsp(&args, None)));
    assert_eq!(bbsp(&["verify"], Some(&a)).status.code(), Some(0));
}

#[test]
fn random_word_length_one_is_a_generator() {
    let dir = tempfile::tempdir().unwrap();
    let slp = dir.path().join("w.slp");
    let out = bbsp(
        &["random", "--n", "2", "--p", "5", "--word-length", "1", "--slp", path_str(&slp)],
        None,
    );
    let p = params(2, 5);
    let (_, m) = parse_spn(&stdout(&out)).unwrap();
    let gens = standard_generators(&p).to_vec();
    let g = MatrixGroup::new(p.clone());
    let invs: Vec<_> = gens.iter().map(|x| g.inv(x).unwrap()).collect();
    assert!(gens.contains(&m) || invs.contains(&m));
    let back = bbsp(&["eval", "--slp", path_str(&slp), "--n", "2", "--p", "5"], None);
    assert_eq!(stdout(&back), stdout(&out));
}

#[test]
fn selftest_single_trial() {
    let out = bbsp(&["selftest", "--cells", "1:3,2:5", "--trials", "1"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().count(), 3);
}

#[test]
fn selftest_json_has_stable_keys() {
    let out = bbsp(&["selftest", "--cells", "2:3", "--trials", "2", "--json"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["cells"][0]["passed"], 2);
    let keys = ["\"n\"", "\"q\"", "\"trials\"", "\"passed\"", "\"max_calls\"", "\"mean_calls\""];
    let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn selftest_corrupt_reports_not_in_group() {
    let out = bbsp(&["selftest", "--cells", "2:5", "--trials", "1", "--corrupt"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("not in the group"), "{}", stdout(&out));
}

#[test]
fn bad_cell_spec_and_help() {
    assert_eq!(bbsp(&["selftest", "--cells", "2-5"], None).status.code(), Some(2));
    assert_eq!(bbsp(&["--help"], None).status.code(), Some(0));
    assert_eq!(bbsp(&["frobnicate"], None).status.code(), Some(2));
}
