//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a rewrite or check fails, 2 on bad input.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::blackbox::{BBGroup, GroupOracle, MatrixGroup};
use crate::gf::{parse_coeff_list, Field};
use crate::natrep::rewrite_natural_traced;
use crate::rewrite::{check_bounds, rewrite, RewriteError, FROZEN};
use crate::slp::Slp;
use crate::spn::{
    is_symplectic, parse_spn, parse_spn_all, random_element, slot, standard_generators, write_spn,
    GroupParams,
};

#[derive(Debug, Parser)]
#[command(name = "bbsp", version, about = "Constructive membership in black-box Sp(2n, q)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    /// Rank: the group is Sp(2n, q).
    #[arg(long)]
    pub n: usize,
    /// Characteristic.
    #[arg(long)]
    pub p: u32,
    /// Extension degree, q = p^k.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Monic modulus coefficients `c0,...,ck`; defaults to the smallest
    /// irreducible one.
    #[arg(long)]
    pub modulus: Option<String>,
}

impl GroupArgs {
    fn params(&self) -> Result<GroupParams, CliError> {
        let modulus = match &self.modulus {
            Some(m) => Some(parse_coeff_list(m).map_err(input)?),
            None => None,
        };
        let field = Field::new(self.p, self.k, modulus.as_deref()).map_err(input)?;
        GroupParams::new(self.n, field).map_err(input)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the six standard generators.
    Gens(GroupArgs),
    /// Write a matrix as a program over the standard generators.
    Rewrite {
        /// SPN matrix file; stdin when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Rewrite the visible matrix directly instead of through a black box.
        #[arg(long)]
        white: bool,
        /// Re-evaluate the program and compare with the input.
        #[arg(long)]
        verify: bool,
        /// Print oracle counts and program length to stderr.
        #[arg(long)]
        stats: bool,
        /// Scramble seed of the black box.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Evaluate a program over the standard generators.
    Eval {
        #[arg(long)]
        slp: PathBuf,
        #[command(flatten)]
        group: GroupArgs,
    },
    /// Print a seeded random group element.
    Random {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 50)]
        word_length: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the program that produced the element.
        #[arg(long)]
        slp: Option<PathBuf>,
    },
    /// Check that every matrix in the input preserves the form.
    Verify {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Round-trip random elements over a grid of (n, q) cells.
    Selftest {
        /// Cells as `n:q`, comma separated; the full grid when absent.
        #[arg(long, value_delimiter = ',')]
        cells: Vec<String>,
        #[arg(long, default_value_t = 20)]
        trials: u64,
        #[arg(long)]
        json: bool,
        /// Multiply every target by a non-member before rewriting.
        #[arg(long)]
        corrupt: bool,
        /// Scramble seed of the black boxes.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Input(_) | CliError::Io(_) => 2,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// The cells exercised when `selftest` gets no `--cells`.
pub const DEFAULT_GRID: [(usize, u64); 17] = [
    (1, 3),
    (1, 5),
    (1, 7),
    (1, 9),
    (2, 3),
    (2, 5),
    (2, 7),
    (2, 9),
    (3, 3),
    (3, 5),
    (3, 7),
    (3, 9),
    (2, 11),
    (2, 13),
    (2, 25),
    (2, 27),
    (4, 3),
];

pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match dispatch(&cli.command, &mut out, &mut io::stderr()) {
        Ok(code) => code,
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

/// Runs one subcommand. Returns the exit code for outcomes that are not
/// errors (a selftest with failing cells returns 1).
pub fn dispatch(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Gens(group) => {
            let params = group.params()?;
            for (name, m) in slot::NAMES.iter().zip(standard_generators(&params).to_vec()) {
                writeln!(out, "# {name}")?;
                write!(out, "{}", write_spn(&m, &params))?;
            }
        }
        Command::Rewrite {
            input: path,
            white,
            verify,
            stats,
            seed,
        } => {
            let (params, m) = parse_spn(&read_input(path)?).map_err(input)?;
            if !is_symplectic(&m, &params).map_err(input)? {
                return Err(input("input matrix does not preserve the symplectic form"));
            }
            let result = if *white {
                rewrite_natural_traced(&m, &params)
            } else {
                let bb = BBGroup::new(params.clone(), *seed);
                let handle = bb.import(&m).map_err(input)?;
                rewrite(&bb, &handle)
            }
            .map_err(|e| match e {
                RewriteError::NotSymplectic | RewriteError::DetNotOne => input(e),
                other => CliError::Failed(other.to_string()),
            })?;
            writeln!(out, "{}", result.slp)?;
            if *stats {
                let s = result.stats;
                writeln!(
                    err,
                    "stats: mul={} inv={} eq={} slp_len={}",
                    s.mul,
                    s.inv,
                    s.eq,
                    result.slp.len()
                )?;
            }
            if *verify {
                let group = MatrixGroup::new(params);
                let value = result
                    .slp
                    .eval(&group, group.generators())
                    .map_err(|e| CliError::Failed(e.to_string()))?;
                if value != m {
                    return Err(CliError::Failed("program does not evaluate to the input".into()));
                }
            }
        }
        Command::Eval { slp, group } => {
            let params = group.params()?;
            let text = fs::read_to_string(slp).map_err(|e| input(format!("{}: {e}", slp.display())))?;
            let program: Slp = text.parse().map_err(input)?;
            let g = MatrixGroup::new(params.clone());
            let value = program.eval(&g, g.generators()).map_err(input)?;
            write!(out, "{}", write_spn(&value, &params))?;
        }
        Command::Random {
            group,
            word_length,
            seed,
            slp,
        } => {
            let params = group.params()?;
            let gens = standard_generators(&params);
            let (m, program) = random_element(&params, &gens, *word_length, *seed).map_err(input)?;
            write!(out, "{}", write_spn(&m, &params))?;
            if let Some(path) = slp {
                fs::write(path, format!("{program}\n"))?;
            }
        }
        Command::Verify { input: path } => {
            let all = parse_spn_all(&read_input(path)?).map_err(input)?;
            if all.is_empty() {
                return Err(input("no matrices in input"));
            }
            for (i, (params, m)) in all.iter().enumerate() {
                if !is_symplectic(m, params).map_err(input)? {
                    writeln!(out, "matrix {}: not symplectic", i + 1)?;
                    return Ok(1);
                }
            }
            writeln!(out, "ok: {} symplectic", all.len())?;
        }
        Command::Selftest {
            cells,
            trials,
            json,
            corrupt,
            seed,
        } => {
            let grid = if cells.is_empty() {
                DEFAULT_GRID.to_vec()
            } else {
                cells.iter().map(|c| parse_cell(c)).collect::<Result<_, _>>()?
            };
            let fields = grid
                .iter()
                .map(|&(n, q)| {
                    let field = Field::of_order(q).map_err(input)?;
                    GroupParams::new(n, field).map_err(input)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let reports: Vec<CellReport> = fields
                .into_par_iter()
                .map(|params| run_cell(params, *trials, *seed, *corrupt))
                .collect();
            let pass = reports.iter().all(|r| r.pass);
            if *json {
                let doc = SelftestReport { pass, cells: reports };
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable"))?;
            } else {
                write_table(out, &reports)?;
            }
            return Ok(if pass { 0 } else { 1 });
        }
    }
    Ok(0)
}

fn parse_cell(s: &str) -> Result<(usize, u64), CliError> {
    let (n, q) = s
        .split_once(':')
        .ok_or_else(|| input(format!("cell {s:?} is not of the form n:q")))?;
    let n = n.trim().parse().map_err(|_| input(format!("bad rank in cell {s:?}")))?;
    let q = q.trim().parse().map_err(|_| input(format!("bad order in cell {s:?}")))?;
    Ok((n, q))
}

#[derive(Debug, Serialize)]
struct SelftestReport {
    pass: bool,
    cells: Vec<CellReport>,
}

#[derive(Debug, Serialize)]
pub struct CellReport {
    pub n: usize,
    pub q: u32,
    pub trials: u64,
    pub passed: u64,
    pub max_calls: u64,
    pub mean_calls: f64,
    pub max_slp_len: usize,
    pub max_slp_cost: usize,
    pub within_bounds: bool,
    pub pass: bool,
    pub failure: Option<String>,
}

/// Round-trips `trials` random elements through a fresh black box.
pub fn run_cell(params: GroupParams, trials: u64, seed: u64, corrupt: bool) -> CellReport {
    let (n, q) = (params.n(), params.q());
    let gens = standard_generators(&params);
    let bb = BBGroup::new(params.clone(), seed);
    let spoiler = corrupt.then(|| {
        let field: &Arc<Field> = params.field();
        let mut m = params.identity();
        m.set(0, 0, field.omega());
        bb.import(&m).expect("invertible")
    });
    let mut report = CellReport {
        n,
        q,
        trials,
        passed: 0,
        max_calls: 0,
        mean_calls: 0.0,
        max_slp_len: 0,
        max_slp_cost: 0,
        within_bounds: true,
        pass: false,
        failure: None,
    };
    let mut total_calls = 0u64;
    for trial in 1..=trials {
        let outcome = (|| -> Result<(u64, usize, usize, Option<String>), String> {
            let (_, word) = random_element(&params, &gens, 50, trial).map_err(|e| e.to_string())?;
            let mut g = word.eval(&bb, bb.generators()).map_err(|e| e.to_string())?;
            if let Some(x) = &spoiler {
                g = bb.mul(&g, x).map_err(|e| e.to_string())?;
            }
            let res = rewrite(&bb, &g).map_err(|e| e.to_string())?;
            let over = check_bounds(&res, n, q, &FROZEN).err();
            Ok((res.search_calls(), res.slp.len(), res.slp.cost(), over))
        })();
        match outcome {
            Ok((calls, len, cost, over)) => {
                report.passed += 1;
                total_calls += calls;
                report.max_calls = report.max_calls.max(calls);
                report.max_slp_len = report.max_slp_len.max(len);
                report.max_slp_cost = report.max_slp_cost.max(cost);
                if let Some(msg) = over {
                    report.within_bounds = false;
                    report.failure.get_or_insert(format!("trial {trial}: {msg}"));
                }
            }
            Err(msg) => {
                report.failure.get_or_insert(format!("trial {trial}: {msg}"));
            }
        }
    }
    if report.passed > 0 {
        report.mean_calls = total_calls as f64 / report.passed as f64;
    }
    report.pass = report.passed == trials && report.within_bounds;
    report
}

fn write_table(out: &mut dyn Write, reports: &[CellReport]) -> io::Result<()> {
    writeln!(
        out,
        "{:>2} {:>4} {:>7} {:>10} {:>11} {:>8} {:>9}  result",
        "n", "q", "ok", "max_calls", "mean_calls", "max_len", "max_cost"
    )?;
    for r in reports {
        let ok = format!("{}/{}", r.passed, r.trials);
        let result = match (&r.failure, r.pass) {
            (_, true) => "pass".to_string(),
            (Some(msg), false) => format!("FAIL {msg}"),
            (None, false) => "FAIL".to_string(),
        };
        writeln!(
            out,
            "{:>2} {:>4} {:>7} {:>10} {:>11.1} {:>8} {:>9}  {}",
            r.n, r.q, ok, r.max_calls, r.mean_calls, r.max_slp_len, r.max_slp_cost, result
        )?;
    }
    Ok(())
}
