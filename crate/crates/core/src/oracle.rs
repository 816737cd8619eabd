//! Definition-level reference implementations used to cross-check the solver.
//!
//! Nothing here calls into `steps` or `engine` logic; only the result types
//! and the integer square root from `arith` are shared.

use std::cmp::Ordering;

use num_traits::{ToPrimitive, Zero};

use crate::arith::{self, Nat, Sign};
use crate::engine::PellSolution;
use crate::error::{Error, Result};
use crate::steps::{Best, BestChoice};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Largest `y` tried by [`brute_force_pell`].
    pub y_limit: u64,
    /// Scan `m` up to `⌊√n⌋ + scan_window·k` in [`brute_force_best`].
    pub scan_window: u64,
}

impl OracleBudget {
    pub fn new(y_limit: u64, scan_window: u64) -> Result<Self> {
        if y_limit == 0 || scan_window == 0 {
            return Err(Error::Budget(format!(
                "y_limit and scan_window must be at least 1 (got {y_limit}, {scan_window})"
            )));
        }
        Ok(OracleBudget { y_limit, scan_window })
    }
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { y_limit: 10_000_000, scan_window: 2 }
    }
}

fn require_nonsquare(n: &Nat) -> Result<()> {
    if arith::is_square(n) {
        Err(Error::NonsquareRequired(n.clone()))
    } else {
        Ok(())
    }
}

/// First `y = 1, 2, …, y_limit` for which `n·y² − 1` or `n·y² + 1` is a perfect
/// square, i.e. the solution of `x² − n·y² = ±1` with the smallest `y`.
pub fn brute_force_pell(n: &Nat, budget: OracleBudget) -> Option<PellSolution> {
    if arith::is_square(n) {
        return None;
    }
    match fits_u128(n, budget.y_limit) {
        Some(nw) => brute_force_pell_u128(nw, budget.y_limit),
        None => brute_force_pell_big(n, budget.y_limit),
    }
}

// n·y_limit² + 1 must not overflow.
fn fits_u128(n: &Nat, y_limit: u64) -> Option<u128> {
    let nw = n.to_u128()?;
    let y2 = (y_limit as u128).checked_mul(y_limit as u128)?;
    nw.checked_mul(y2)?.checked_add(1)?;
    Some(nw)
}

fn brute_force_pell_u128(n: u128, y_limit: u64) -> Option<PellSolution> {
    // ny² advanced by n(2y − 1)
    let mut ny2: u128 = 0;
    for y in 1..=y_limit {
        ny2 += n * (2 * y as u128 - 1);
        for (candidate, sign) in [(ny2 - 1, Sign::Minus), (ny2 + 1, Sign::Plus)] {
            if arith::is_square_u128(candidate) {
                return Some(PellSolution { x: Nat::from(arith::isqrt_u128(candidate)), y: Nat::from(y), sign });
            }
        }
    }
    None
}

fn brute_force_pell_big(n: &Nat, y_limit: u64) -> Option<PellSolution> {
    for y in 1..=y_limit {
        let yn = Nat::from(y);
        let ny2 = n * &yn * &yn;
        for (candidate, sign) in [(&ny2 - 1u32, Sign::Minus), (&ny2 + 1u32, Sign::Plus)] {
            let x = arith::isqrt(&candidate);
            if &x * &x == candidate {
                return Some(PellSolution { x, y: yn, sign });
            }
        }
    }
    None
}

/// Minimiser(s) of `|m² − n|` over the positive `m ≡ r (mod k)` up to
/// `⌊√n⌋ + scan_window·k`, by direct scan.
pub fn brute_force_best(n: &Nat, k: &Nat, r: &Nat, budget: OracleBudget) -> Result<BestChoice> {
    require_nonsquare(n)?;
    if k.is_zero() {
        return Err(Error::InvalidModulus);
    }
    if k * k >= *n {
        return Err(Error::ModulusTooLarge { k: k.clone(), n: n.clone() });
    }
    if r >= k {
        return Err(Error::ResidueOutOfRange { r: r.clone(), k: k.clone() });
    }
    let root = arith::isqrt(n);
    let limit = &root + k * budget.scan_window;

    let mut m = if r.is_zero() { k.clone() } else { r.clone() };
    let mut best: Vec<Nat> = Vec::new();
    let mut best_gap: Option<Nat> = None;
    let mut saw_above = false;
    while m <= limit {
        let sq = &m * &m;
        let gap = if sq > *n {
            saw_above = true;
            &sq - n
        } else {
            n - &sq
        };
        match best_gap.as_ref().map(|g| gap.cmp(g)) {
            None | Some(Ordering::Less) => {
                best_gap = Some(gap);
                best = vec![m.clone()];
            }
            Some(Ordering::Equal) => best.push(m.clone()),
            Some(Ordering::Greater) => {}
        }
        m += k;
    }
    if !saw_above {
        return Err(Error::Budget(format!("scan up to {limit} never passes sqrt({n})")));
    }
    let mut it = best.into_iter();
    match (it.next(), it.next(), it.next()) {
        (Some(only), None, None) => Ok(Best::Strict(only)),
        (Some(minus), Some(plus), None) => Ok(Best::Twin { minus, plus }),
        _ => unreachable!("|m^2 - n| takes each value at most twice along a class"),
    }
}

/// Number of terms in one period of the continued fraction of `√n`, i.e. the
/// number of steps of the classical `(P, Q, a)` recurrence until the
/// denominator returns to 1.
pub fn cf_step_count(n: &Nat) -> Result<u64> {
    require_nonsquare(n)?;
    let a0 = arith::isqrt(n);
    let mut p = Nat::zero();
    let mut q = Nat::from(1u32);
    let mut a = a0.clone();
    let mut count = 0u64;
    loop {
        p = &a * &q - &p;
        q = (n - &p * &p) / &q;
        a = (&a0 + &p) / &q;
        count += 1;
        if q == Nat::from(1u32) {
            return Ok(count);
        }
    }
}
