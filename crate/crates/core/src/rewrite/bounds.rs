//! Frozen complexity constants and the check against them.

use serde::Serialize;

use super::pipeline::{RewriteResult, Step};

/// Per-step and total ceilings, as multiples of the claimed growth rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    /// Step 1 calls ≤ `c1·q`.
    pub c1: f64,
    /// Step 2 and Step 3 calls, each ≤ `c2·n·q`.
    pub c2: f64,
    /// Block recovery calls ≤ `c3·n²·q`.
    pub c3: f64,
    /// All search calls ≤ `c·n²·q`.
    pub c: f64,
    /// Program cost ≤ `c_prime·n²·log₂ q`.
    pub c_prime: f64,
}

/// Measured maxima over the acceptance grid, with headroom.
pub const FROZEN: Bounds = Bounds {
    c1: 20.0,
    c2: 45.0,
    c3: 40.0,
    c: 65.0,
    c_prime: 30.0,
};

/// Checks one rewrite against `bounds`; the error lists every ceiling that
/// was exceeded.
pub fn check_bounds(result: &RewriteResult, n: usize, q: u32, bounds: &Bounds) -> Result<(), String> {
    let (n, qf) = (n as f64, q as f64);
    let checks = [
        ("step1", result.calls(Step::Step1) as f64, bounds.c1 * qf),
        ("step2", result.calls(Step::Step2) as f64, bounds.c2 * n * qf),
        ("step3", result.calls(Step::Step3) as f64, bounds.c2 * n * qf),
        ("recover", result.calls(Step::Recover) as f64, bounds.c3 * n * n * qf),
        ("total", result.search_calls() as f64, bounds.c * n * n * qf),
        ("slp", result.slp.cost() as f64, bounds.c_prime * n * n * qf.log2()),
    ];
    let over: Vec<String> = checks
        .iter()
        .filter(|(_, got, max)| got > max)
        .map(|(name, got, max)| format!("{name} {got} > {max:.1}"))
        .collect();
    if over.is_empty() {
        Ok(())
    } else {
        Err(over.join(", "))
    }
}
