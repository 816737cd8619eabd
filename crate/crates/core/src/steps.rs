//! Step algebra: best-mod-k selection, the equivalent characterisations of
//! best-ness, steps, reduced steps, successors and reversal.
//!
//! Throughout, `n` is a nonsquare positive integer. A positive `m` is *best mod
//! k* when `|m² − n|` is minimal over the positive members of its residue
//! class. A *step* is a triple `(k, m, k′)` with `k² < n`, `|m² − n| = k·k′` and
//! `m` best mod `k`; it is *reduced* when `m` is also best mod `k′`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign as BigSign};
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{self, decimal, signed_gap, Nat, Sign};
use crate::error::{Error, Result};

/// A validated nonsquare `n ≥ 2` together with `⌊√n⌋`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Radicand {
    n: Nat,
    root: Nat,
}

impl Radicand {
    pub fn new(n: Nat) -> Result<Self> {
        let root = arith::isqrt(&n);
        if &root * &root == n {
            return Err(Error::NonsquareRequired(n));
        }
        Ok(Radicand { n, root })
    }

    pub fn n(&self) -> &Nat {
        &self.n
    }

    /// `⌊√n⌋`, which is strictly below `√n`.
    pub fn root(&self) -> &Nat {
        &self.root
    }

    /// `k < √n`, decided as `k ≤ ⌊√n⌋`.
    pub fn below_root(&self, k: &Nat) -> bool {
        *k <= self.root
    }

    pub fn select_best(&self, k: &Nat, r: &Nat) -> Result<BestChoice> {
        if k.is_zero() {
            return Err(Error::InvalidModulus);
        }
        if !self.below_root(k) {
            return Err(Error::ModulusTooLarge { k: k.clone(), n: self.n.clone() });
        }
        if r >= k {
            return Err(Error::ResidueOutOfRange { r: r.clone(), k: k.clone() });
        }
        Ok(self.straddling_best(k, r))
    }

    // Caller guarantees 1 ≤ k ≤ ⌊√n⌋ and r < k.
    fn straddling_best(&self, k: &Nat, r: &Nat) -> BestChoice {
        let s = &self.root;
        // largest member of the class not above ⌊√n⌋; r < k ≤ s so s − r is safe
        let lower = s - (s - r) % k;
        assert!(!lower.is_zero(), "residue class {r} mod {k} has no positive member below sqrt({})", self.n);
        let upper = &lower + k;
        let below = &self.n - &lower * &lower;
        let above = &upper * &upper - &self.n;
        match below.cmp(&above) {
            Ordering::Less => Best::Strict(lower),
            Ordering::Greater => Best::Strict(upper),
            Ordering::Equal => Best::Twin { minus: lower, plus: upper },
        }
    }

    /// Successor(s) of a step: `m′ ≡ −m (mod k′)` best mod `k′`, `k″ = |m′² − n| / k′`.
    pub fn successor(&self, s: &Step) -> Best<Step> {
        let residue =
            canonical_residue(&-BigInt::from(s.m.clone()), &s.kp).expect("a step has a positive right modulus");
        let choice = self.select_best(&s.kp, &residue).expect("the right modulus of a step lies below sqrt(n)");
        choice.map(|m| {
            Step::from_parts(&self.n, s.kp.clone(), m).expect("successor division |m'^2 - n| / k' must be exact")
        })
    }
}

/// Two-sided picks for twin situations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// The smaller of the two twins.
    #[default]
    Minus,
    Plus,
}

impl Branch {
    pub fn other(self) -> Branch {
        match self {
            Branch::Minus => Branch::Plus,
            Branch::Plus => Branch::Minus,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Minus => "minus",
            Branch::Plus => "plus",
        })
    }
}

/// Outcome of a best-mod-k selection: one strict minimiser, or two tied twins
/// with `plus = minus + k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Best<T> {
    Strict(T),
    Twin { minus: T, plus: T },
}

pub type BestChoice = Best<Nat>;

impl<T> Best<T> {
    pub fn is_twin(&self) -> bool {
        matches!(self, Best::Twin { .. })
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> Best<U> {
        match self {
            Best::Strict(v) => Best::Strict(f(v)),
            Best::Twin { minus, plus } => Best::Twin { minus: f(minus), plus: f(plus) },
        }
    }

    pub fn pick(self, branch: Branch) -> T {
        match (self, branch) {
            (Best::Strict(v), _) => v,
            (Best::Twin { minus, .. }, Branch::Minus) => minus,
            (Best::Twin { plus, .. }, Branch::Plus) => plus,
        }
    }

    pub fn as_ref(&self) -> Best<&T> {
        match self {
            Best::Strict(v) => Best::Strict(v),
            Best::Twin { minus, plus } => Best::Twin { minus, plus },
        }
    }

    pub fn into_vec(self) -> Vec<T> {
        match self {
            Best::Strict(v) => vec![v],
            Best::Twin { minus, plus } => vec![minus, plus],
        }
    }
}

impl<T: PartialEq> Best<T> {
    pub fn contains(&self, v: &T) -> bool {
        match self {
            Best::Strict(x) => x == v,
            Best::Twin { minus, plus } => minus == v || plus == v,
        }
    }
}

/// Three-valued outcome of a non-strict inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsStrict,
    HoldsEqual,
    Fails,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self != Verdict::Fails
    }

    /// Verdict of `lhs ≤ rhs`.
    fn at_most(ord: Ordering) -> Verdict {
        match ord {
            Ordering::Less => Verdict::HoldsStrict,
            Ordering::Equal => Verdict::HoldsEqual,
            Ordering::Greater => Verdict::Fails,
        }
    }
}

/// A triple `(k, m, k′)` with the sign `eps` of `m² − n`, so `m² − n = eps·k·k′`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Step {
    #[serde(with = "decimal")]
    pub k: Nat,
    #[serde(with = "decimal")]
    pub m: Nat,
    #[serde(with = "decimal")]
    pub kp: Nat,
    pub eps: Sign,
}

impl Step {
    pub fn new(k: Nat, m: Nat, kp: Nat, eps: Sign) -> Self {
        Step { k, m, kp, eps }
    }

    /// Builds `(k, m, |m² − n| / k)` when `k` divides `m² − n`.
    pub fn from_parts(n: &Nat, k: Nat, m: Nat) -> Option<Step> {
        if k.is_zero() || m.is_zero() {
            return None;
        }
        let (gap, eps) = signed_gap(n, &m)?;
        let (kp, rem) = gap.div_rem(&k);
        rem.is_zero().then_some(Step { k, m, kp, eps })
    }

    pub fn is_self_reverse(&self) -> bool {
        self.k == self.kp
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.k, self.m, self.kp)
    }
}

/// The representative of `x mod k` in `[0, k)`.
pub fn canonical_residue(x: &BigInt, k: &Nat) -> Result<Nat> {
    if k.is_zero() {
        return Err(Error::InvalidModulus);
    }
    let modulus = BigInt::from(k.clone());
    let r = x.mod_floor(&modulus);
    Ok(r.to_biguint().expect("mod_floor by a positive modulus is nonnegative"))
}

/// Best element(s) of the positive class `r mod k`, compared through the two
/// members straddling `√n`.
pub fn select_best(n: &Nat, k: &Nat, r: &Nat) -> Result<BestChoice> {
    Radicand::new(n.clone())?.select_best(k, r)
}

/// Whether `m` is best mod `k`.
///
/// `x ↦ |x² − n|` strictly decreases on `(0, √n)` and strictly increases on
/// `(√n, ∞)`, so along the progression `m mod k` it is unimodal with at most one
/// tie (across `√n`). A member no larger than both of its class neighbours is
/// therefore a global minimiser, and two comparisons suffice.
pub fn is_best(n: &Nat, k: &Nat, m: &Nat) -> bool {
    if k.is_zero() || m.is_zero() {
        return false;
    }
    let Some((gap, _)) = signed_gap(n, m) else {
        return true;
    };
    let gap_of = |x: &Nat| signed_gap(n, x).map_or_else(Nat::zero, |(g, _)| g);
    if gap > gap_of(&(m + k)) {
        return false;
    }
    if m > k && gap > gap_of(&(m - k)) {
        return false;
    }
    true
}

/// `k′² + k²/4 ≤ n`, evaluated as `4k′² + k² ≤ 4n`.
pub fn cond2(n: &Nat, k: &Nat, kp: &Nat) -> Verdict {
    let lhs: Nat = ((kp * kp) << 2u32) + k * k;
    let rhs: Nat = n << 2u32;
    Verdict::at_most(lhs.cmp(&rhs))
}

/// `m ≥ k′ + eps·k/2`, evaluated as `2k′ + eps·k ≤ 2m`.
pub fn cond3(_n: &Nat, k: &Nat, kp: &Nat, m: &Nat, eps: Sign) -> Verdict {
    let rhs = BigInt::from_biguint(BigSign::Plus, m << 1u32);
    let lhs = BigInt::from_biguint(BigSign::Plus, kp << 1u32) + eps.apply(BigInt::from(k.clone()));
    Verdict::at_most(lhs.cmp(&rhs))
}

pub fn is_step(n: &Nat, s: &Step) -> bool {
    if s.k.is_zero() || s.m.is_zero() || s.kp.is_zero() {
        return false;
    }
    if &s.k * &s.k >= *n {
        return false;
    }
    match signed_gap(n, &s.m) {
        Some((gap, eps)) if gap == &s.k * &s.kp && eps == s.eps => is_best(n, &s.k, &s.m),
        _ => false,
    }
}

/// Whether a step is reduced, i.e. its reverse is a step. Decided through the
/// characterisation `k² + k′²/4 ≤ n` at modulus `k′`.
pub fn is_reduced(n: &Nat, s: &Step) -> bool {
    cond2(n, &s.kp, &s.k).holds()
}

/// Successor(s) of a step. Panics when `s` is not a step of `n`.
pub fn successor(n: &Nat, s: &Step) -> Best<Step> {
    let rad = Radicand::new(n.clone()).expect("successor requires a nonsquare n");
    rad.successor(s)
}

pub fn reverse(s: &Step) -> Step {
    Step { k: s.kp.clone(), m: s.m.clone(), kp: s.k.clone(), eps: s.eps }
}

/// Convenience for tests and bindings.
pub fn step_u64(k: u64, m: u64, kp: u64, eps: Sign) -> Step {
    Step::new(Nat::from(k), Nat::from(m), Nat::from(kp), eps)
}
