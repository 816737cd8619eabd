//! The cyclic algorithm itself.
//!
//! Stage `i` picks `m_i ≡ −m_{i−1} (mod k_i)` best mod `k_i`, then
//!
//! ```text
//! a_{i+1} = (a_i·m_i + n·b_i) / k_i
//! b_{i+1} = (a_i + m_i·b_i) / k_i
//! k_{i+1} = |m_i² − n| / k_i
//! ```
//!
//! starting from `m_{−1} = 0, a_0 = 1, b_0 = 0, k_0 = 1` and stopping at the
//! first `k_{i+1} = 1`. All three divisions are exact; a remainder is a bug and
//! panics.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{decimal, signed_gap, Nat, Sign};
use crate::error::{Error, Result};
use crate::steps::{canonical_residue, is_reduced, is_step, reverse, Best, Branch, Radicand, Step};

/// Which twin the run follows when a tie occurs.
pub type TwinPolicy = Branch;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub i: usize,
    #[serde(with = "decimal")]
    pub k: Nat,
    #[serde(with = "decimal")]
    pub m: Nat,
    #[serde(with = "decimal")]
    pub k_next: Nat,
    pub eps: Sign,
    #[serde(with = "decimal")]
    pub a_next: Nat,
    #[serde(with = "decimal")]
    pub b_next: Nat,
}

impl StageRecord {
    pub fn step(&self) -> Step {
        Step::new(self.k.clone(), self.m.clone(), self.k_next.clone(), self.eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fork {
    pub index: usize,
    pub branch: Branch,
}

/// `x² − n·y² = sign`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PellSolution {
    #[serde(with = "decimal")]
    pub x: Nat,
    #[serde(with = "decimal")]
    pub y: Nat,
    pub sign: Sign,
}

impl PellSolution {
    pub fn satisfies(&self, n: &Nat) -> bool {
        let lhs = &self.x * &self.x;
        let rhs = n * &self.y * &self.y;
        match self.sign {
            Sign::Plus => lhs == rhs + 1u32,
            Sign::Minus => lhs + 1u32 == rhs,
        }
    }
}

impl fmt::Display for PellSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x={} y={} sign={}", self.x, self.y, self.sign)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    #[serde(with = "decimal")]
    pub n: Nat,
    pub stages: Vec<StageRecord>,
    pub fork: Option<Fork>,
    pub solution: PellSolution,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn steps(&self) -> Vec<Step> {
        self.stages.iter().map(StageRecord::step).collect()
    }

    /// `k_0, k_1, …, k_L` including the final `1`.
    pub fn k_sequence(&self) -> Vec<Nat> {
        let mut ks: Vec<Nat> = self.stages.iter().map(|s| s.k.clone()).collect();
        if let Some(last) = self.stages.last() {
            ks.push(last.k_next.clone());
        }
        ks
    }

    pub fn m_sequence(&self) -> Vec<Nat> {
        self.stages.iter().map(|s| s.m.clone()).collect()
    }

    /// Whether the step list reads the same backwards with each triple reversed.
    pub fn is_palindrome(&self) -> bool {
        let steps = self.steps();
        is_mirrored(&steps)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serialization cannot fail")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Trace> {
        serde_json::from_str(s)
    }
}

pub(crate) fn is_mirrored(steps: &[Step]) -> bool {
    let len = steps.len();
    (0..len).all(|t| steps[len - 1 - t] == reverse(&steps[t]))
}

fn exact_div(num: Nat, den: &Nat, what: &str) -> Nat {
    let (q, r) = num.div_rem(den);
    assert!(r.is_zero(), "{what}: division by {den} is not exact");
    q
}

/// One application of the `a, b` recurrences.
fn next_pair(n: &Nat, a: &Nat, b: &Nat, k: &Nat, m: &Nat) -> (Nat, Nat) {
    let a_next = exact_div(a * m + n * b, k, "a recurrence");
    let b_next = exact_div(a + m * b, k, "b recurrence");
    (a_next, b_next)
}

fn residue_of_negated(m: &Nat, k: &Nat) -> Nat {
    canonical_residue(&-BigInt::from(m.clone()), k).expect("stage modulus is positive")
}

/// Runs the algorithm to the first `k = 1`, resolving a twin by `twin_policy`.
pub fn run(n: &Nat, twin_policy: TwinPolicy) -> Result<Trace> {
    let rad = Radicand::new(n.clone())?;
    let mut a = Nat::one();
    let mut b = Nat::zero();
    let mut k = Nat::one();
    let mut prev_m = Nat::zero();
    let mut sign = Sign::Plus;
    let mut fork = None;
    let mut stages = Vec::new();

    for i in 0.. {
        let r = residue_of_negated(&prev_m, &k);
        let choice = rad.select_best(&k, &r).expect("stage modulus stays below sqrt(n)");
        if choice.is_twin() && fork.is_none() {
            fork = Some(Fork { index: i, branch: twin_policy });
        }
        let m = choice.pick(twin_policy);
        let (gap, eps) = signed_gap(n, &m).expect("n is nonsquare");
        let k_next = exact_div(gap, &k, "k recurrence");
        let (a_next, b_next) = next_pair(n, &a, &b, &k, &m);
        sign = sign * eps;
        stages.push(StageRecord {
            i,
            k: k.clone(),
            m: m.clone(),
            k_next: k_next.clone(),
            eps,
            a_next: a_next.clone(),
            b_next: b_next.clone(),
        });
        if k_next.is_one() {
            break;
        }
        a = a_next;
        b = b_next;
        k = k_next;
        prev_m = m;
    }

    let last = stages.last().expect("at least one stage");
    let solution = PellSolution { x: last.a_next.clone(), y: last.b_next.clone(), sign };
    Ok(Trace { n: n.clone(), stages, fork, solution })
}

/// Both outcomes of a run: one trace, or the two twin variants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Branches {
    Single(Trace),
    Forked { minus: Trace, plus: Trace },
}

impl Branches {
    pub fn primary(&self) -> &Trace {
        match self {
            Branches::Single(t) => t,
            Branches::Forked { minus, .. } => minus,
        }
    }

    pub fn traces(&self) -> Vec<&Trace> {
        match self {
            Branches::Single(t) => vec![t],
            Branches::Forked { minus, plus } => vec![minus, plus],
        }
    }
}

/// Runs both twin policies and checks that the variants merge: same
/// `k`-sequence, `m`-sequences swapped at the two centre stages, same `(a, b)`
/// except right after the fork, same solution.
pub fn run_both_branches(n: &Nat) -> Result<Branches> {
    let minus = run(n, Branch::Minus)?;
    let Some(fork) = minus.fork else {
        return Ok(Branches::Single(minus));
    };
    let plus = run(n, Branch::Plus)?;
    compare_branches(&minus, &plus, fork.index).map_err(Error::BranchMismatch)?;
    Ok(Branches::Forked { minus, plus })
}

fn compare_branches(minus: &Trace, plus: &Trace, j: usize) -> std::result::Result<(), String> {
    if plus.fork.map(|f| f.index) != Some(j) {
        return Err(format!("fork index differs: {:?} vs {:?}", minus.fork, plus.fork));
    }
    if minus.len() != plus.len() {
        return Err(format!("lengths differ: {} vs {}", minus.len(), plus.len()));
    }
    if minus.k_sequence() != plus.k_sequence() {
        return Err("k-sequences differ".into());
    }
    if j + 1 >= minus.len() {
        return Err(format!("fork at {j} has no following stage"));
    }
    let (mm, pm) = (minus.m_sequence(), plus.m_sequence());
    for t in 0..mm.len() {
        let expected = match t {
            t if t == j => &mm[j + 1],
            t if t == j + 1 => &mm[j],
            _ => &mm[t],
        };
        if &pm[t] != expected {
            return Err(format!("m-sequences differ unexpectedly at stage {t}"));
        }
    }
    if mm[j] == mm[j + 1] {
        return Err(format!("twin values at stages {j}, {} coincide", j + 1));
    }
    for (t, (x, y)) in minus.stages.iter().zip(&plus.stages).enumerate() {
        let same = x.a_next == y.a_next && x.b_next == y.b_next;
        if t == j && same {
            return Err(format!("(a, b) after the fork at stage {t} should differ"));
        }
        if t != j && !same {
            return Err(format!("(a, b) differ at stage {t}"));
        }
    }
    if minus.solution != plus.solution {
        return Err(format!("solutions differ: {} vs {}", minus.solution, plus.solution));
    }
    Ok(())
}

/// Same result as [`run`], but stops walking once the middle of the sequence is
/// recognised and completes the `(k, m)` list by mirroring.
///
/// Midpoint configurations, for the step just produced at index `j`:
/// a twin (length `2j+2`, the partner twin reversed at `j+1`), a self-reverse
/// step `(k, m, k)` (length `2j+1`), or `(k, m, k′)` directly after
/// `(k′, m, k)` (length `2j`).
pub fn run_with_midpoint_shortcut(n: &Nat, twin_policy: TwinPolicy) -> Result<Trace> {
    let rad = Radicand::new(n.clone())?;
    let mut steps: Vec<Step> = Vec::new();
    let mut fork = None;
    let mut k = Nat::one();
    let mut prev_m = Nat::zero();

    for j in 0.. {
        let r = residue_of_negated(&prev_m, &k);
        let choice = rad.select_best(&k, &r).expect("stage modulus stays below sqrt(n)");
        let twin = choice.is_twin();
        let step =
            Step::from_parts(n, k.clone(), choice.clone().pick(twin_policy)).expect("k recurrence must be exact");

        if step.kp.is_one() {
            steps.push(step);
            break;
        }
        if twin {
            fork = Some(Fork { index: j, branch: twin_policy });
            let partner = Step::from_parts(n, k.clone(), choice.pick(twin_policy.other()))
                .expect("twin partner shares the modulus");
            steps.push(step);
            steps.push(reverse(&partner));
            mirror_complete(&mut steps, 2 * j + 2);
            break;
        }
        if step.is_self_reverse() {
            steps.push(step);
            mirror_complete(&mut steps, 2 * j + 1);
            break;
        }
        if j > 0 && steps[j - 1] == reverse(&step) {
            steps.push(step);
            mirror_complete(&mut steps, 2 * j);
            break;
        }
        k = step.kp.clone();
        prev_m = step.m.clone();
        steps.push(step);
    }

    Ok(trace_from_steps(n, steps, fork))
}

/// Extends a prefix to `len` steps with `step[len−1−t] = reverse(step[t])`.
fn mirror_complete(steps: &mut Vec<Step>, len: usize) {
    for slot in steps.len()..len {
        let mirrored = reverse(&steps[len - 1 - slot]);
        steps.push(mirrored);
    }
    assert!(steps.last().is_some_and(|s| s.kp.is_one()), "mirrored sequence must end at k = 1");
}

fn trace_from_steps(n: &Nat, steps: Vec<Step>, fork: Option<Fork>) -> Trace {
    let mut a = Nat::one();
    let mut b = Nat::zero();
    let mut sign = Sign::Plus;
    let mut stages = Vec::with_capacity(steps.len());
    for (i, s) in steps.into_iter().enumerate() {
        let (a_next, b_next) = next_pair(n, &a, &b, &s.k, &s.m);
        sign = sign * s.eps;
        stages.push(StageRecord {
            i,
            k: s.k,
            m: s.m,
            k_next: s.kp,
            eps: s.eps,
            a_next: a_next.clone(),
            b_next: b_next.clone(),
        });
        a = a_next;
        b = b_next;
    }
    let solution = PellSolution { x: a, y: b, sign };
    Trace { n: n.clone(), stages, fork, solution }
}

/// Named invariant checked by [`verify_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Input,
    Index,
    Start,
    Chain,
    Congruence,
    StepProduct,
    Step,
    ModulusBound,
    Reduced,
    Integrality,
    Determinant,
    Norm,
    Halting,
    Solution,
    Coprime,
    Fork,
    Palindrome,
    TwinShape,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckFailure {
    pub check: Check,
    pub stage: Option<usize>,
    pub detail: String,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stage {
            Some(i) => write!(f, "{:?} at stage {i}: {}", self.check, self.detail),
            None => write!(f, "{:?}: {}", self.check, self.detail),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub failures: Vec<CheckFailure>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failed_at(&self, check: Check, stage: usize) -> bool {
        self.failures.iter().any(|f| f.check == check && f.stage == Some(stage))
    }

    pub fn has(&self, check: Check) -> bool {
        self.failures.iter().any(|f| f.check == check)
    }

    fn fail(&mut self, check: Check, stage: Option<usize>, detail: impl Into<String>) {
        self.failures.push(CheckFailure { check, stage, detail: detail.into() });
    }
}

/// Re-derives every stage invariant of a trace from scratch. Failures are
/// reported, never raised.
pub fn verify_trace(n: &Nat, t: &Trace) -> VerificationReport {
    let mut report = VerificationReport::default();
    if &t.n != n {
        report.fail(Check::Input, None, format!("trace is for n = {}, expected {n}", t.n));
        return report;
    }
    let Ok(rad) = Radicand::new(n.clone()) else {
        report.fail(Check::Input, None, format!("{n} is a square"));
        return report;
    };
    if t.stages.is_empty() {
        report.fail(Check::Halting, None, "trace has no stages");
        return report;
    }

    let n_int = BigInt::from(n.clone());
    let mut a = Nat::one();
    let mut b = Nat::zero();
    let mut sign = Sign::Plus;
    let mut twins = Vec::new();

    for (pos, st) in t.stages.iter().enumerate() {
        let at = Some(pos);
        if st.i != pos {
            report.fail(Check::Index, at, format!("stage index {} at position {pos}", st.i));
        }
        let step = st.step();

        // selection context
        let (expected_k, prev_m) = match pos {
            0 => (Nat::one(), Nat::zero()),
            _ => (t.stages[pos - 1].k_next.clone(), t.stages[pos - 1].m.clone()),
        };
        if st.k != expected_k {
            report.fail(Check::Chain, at, format!("k = {} but previous k_next = {expected_k}", st.k));
        } else if st.k.is_zero() || !rad.below_root(&st.k) {
            report.fail(Check::ModulusBound, at, format!("k = {} is not in [1, sqrt(n))", st.k));
        } else {
            let r = residue_of_negated(&prev_m, &st.k);
            if st.m.clone() % &st.k != r {
                report.fail(Check::Congruence, at, format!("m = {} is not -{prev_m} mod {}", st.m, st.k));
            }
            if let Ok(choice) = rad.select_best(&st.k, &r) {
                if choice.is_twin() {
                    twins.push(pos);
                }
                if pos == 0 && choice != Best::Strict(st.m.clone()) {
                    report.fail(Check::Start, at, format!("m_0 = {} is not the best square approximation", st.m));
                }
            }
        }
        if pos == 0 && !st.k.is_one() {
            report.fail(Check::Start, at, format!("k_0 = {} instead of 1", st.k));
        }

        match signed_gap(n, &st.m) {
            Some((gap, eps)) if gap == &st.k * &st.k_next && eps == st.eps => {}
            _ => report.fail(
                Check::StepProduct,
                at,
                format!("k*k_next*eps = {}*{}*{} does not equal m^2 - n", st.k, st.k_next, st.eps),
            ),
        }
        if !is_step(n, &step) {
            report.fail(Check::Step, at, format!("{step} is not a step"));
        }
        if &st.k_next * &st.k_next >= *n {
            report.fail(Check::ModulusBound, at, format!("k_next = {} is not below sqrt(n)", st.k_next));
        }
        if !is_reduced(n, &step) {
            report.fail(Check::Reduced, at, format!("{step} is not reduced"));
        }

        // a, b recurrences against the recorded previous pair
        if !st.k.is_zero() {
            let a_num = &a * &st.m + n * &b;
            let b_num = &a + &st.m * &b;
            if a_num != &st.k * &st.a_next || b_num != &st.k * &st.b_next {
                report.fail(
                    Check::Integrality,
                    at,
                    format!("(a, b) = ({}, {}) does not follow from the previous pair", st.a_next, st.b_next),
                );
            }
        }
        let det = BigInt::from(a.clone()) * BigInt::from(st.b_next.clone())
            - BigInt::from(b.clone()) * BigInt::from(st.a_next.clone());
        if det.magnitude() != &Nat::one() {
            report.fail(Check::Determinant, at, format!("|a_i b_(i+1) - b_i a_(i+1)| = {}", det.magnitude()));
        }
        sign = sign * st.eps;
        let norm = BigInt::from(&st.a_next * &st.a_next) - &n_int * BigInt::from(&st.b_next * &st.b_next);
        if norm != sign.apply(BigInt::from(st.k_next.clone())) {
            report.fail(Check::Norm, at, format!("a^2 - n b^2 = {norm}, expected {}*{}", sign, st.k_next));
        }
        if st.k_next.is_one() && pos + 1 != t.stages.len() {
            report.fail(Check::Halting, at, "k_next = 1 before the last stage");
        }
        a = st.a_next.clone();
        b = st.b_next.clone();
    }

    let last = t.stages.last().expect("nonempty");
    if !last.k_next.is_one() {
        report.fail(Check::Halting, Some(t.stages.len() - 1), format!("last k_next = {}", last.k_next));
    }

    let sol = &t.solution;
    if sol.x != last.a_next || sol.y != last.b_next || sol.sign != sign {
        report.fail(Check::Solution, None, format!("solution {sol} does not match the final stage"));
    }
    if sol.y.is_zero() || !sol.satisfies(n) {
        report.fail(Check::Solution, None, format!("{sol} does not solve x^2 - {n} y^2 = sign"));
    }
    if !sol.x.gcd(&sol.y).is_one() {
        report.fail(Check::Coprime, None, format!("gcd({}, {}) != 1", sol.x, sol.y));
    }

    let steps = t.steps();
    match (twins.as_slice(), t.fork) {
        ([], None) => {
            if !is_mirrored(&steps) {
                report.fail(Check::Palindrome, None, "twin-free trace is not palindromic");
            }
        }
        ([j], Some(fork)) if fork.index == *j => {
            let j = *j;
            let st = &t.stages[j];
            let prev_m = if j == 0 { Nat::zero() } else { t.stages[j - 1].m.clone() };
            let r = residue_of_negated(&prev_m, &st.k);
            if let Ok(choice) = rad.select_best(&st.k, &r) {
                if choice.pick(fork.branch) != st.m {
                    report.fail(Check::Fork, Some(j), format!("m = {} is not the {} twin", st.m, fork.branch));
                }
            }
            if steps.len() != 2 * j + 2 || !twin_displayed(&steps, j) {
                report.fail(Check::TwinShape, Some(j), "sequence does not match the twin display");
            }
        }
        (found, fork) => {
            report.fail(Check::Fork, None, format!("twins at stages {found:?}, fork recorded as {fork:?}"));
        }
    }
    report
}

// (.., (k, m±, k′), (k′, m∓, k), ..) with the remaining steps mirrored around them.
fn twin_displayed(steps: &[Step], j: usize) -> bool {
    let len = steps.len();
    let (centre, next) = (&steps[j], &steps[j + 1]);
    let swapped = next.k == centre.kp && next.kp == centre.k && next.m != centre.m && next.eps != centre.eps;
    swapped && (0..len).filter(|&t| t != j && t != j + 1).all(|t| steps[len - 1 - t] == reverse(&steps[t]))
}

/// Twin-pair shape at a fork: `n = k′² + k²/4` and `m± = k′ ± k/2`.
pub fn twin_shape_holds(n: &Nat, k: &Nat, minus: &Nat, plus: &Nat) -> bool {
    if k.is_odd() || &(minus + k) != plus {
        return false;
    }
    let Some((gap, Sign::Plus)) = signed_gap(n, plus) else {
        return false;
    };
    let (kp, rem) = gap.div_rem(k);
    let half = k >> 1u32;
    rem.is_zero()
        && ((&kp * &kp) << 2u32) + k * k == n << 2u32
        && &kp + &half == *plus
        && kp >= half
        && &kp - &half == *minus
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steps::step_u64;
    use Sign::{Minus, Plus};

    fn nat(v: u64) -> Nat {
        Nat::from(v)
    }

    fn triples(t: &Trace) -> Vec<(u64, u64, u64)> {
        t.stages
            .iter()
            .map(|s| {
                let f = |v: &Nat| u64::try_from(v).unwrap();
                (f(&s.k), f(&s.m), f(&s.k_next))
            })
            .collect()
    }

    #[test]
    fn run_29_minus() {
        let t = run(&nat(29), Branch::Minus).unwrap();
        assert_eq!(t.k_sequence(), [1, 4, 5, 4, 1].map(nat));
        assert_eq!(t.m_sequence(), [5, 3, 7, 5].map(nat));
        assert_eq!(t.solution, PellSolution { x: nat(70), y: nat(13), sign: Minus });
        assert_eq!(t.fork, Some(Fork { index: 1, branch: Branch::Minus }));
    }

    #[test]
    fn run_small_cases() {
        let t = run(&nat(5), Branch::Minus).unwrap();
        assert_eq!(triples(&t), vec![(1, 2, 1)]);
        assert_eq!(t.solution, PellSolution { x: nat(2), y: nat(1), sign: Minus });
        let t = run(&nat(2), Branch::Minus).unwrap();
        assert_eq!(triples(&t), vec![(1, 1, 1)]);
        assert_eq!(t.solution, PellSolution { x: nat(1), y: nat(1), sign: Minus });
    }

    #[test]
    fn run_61() {
        let t = run(&nat(61), Branch::Minus).unwrap();
        assert_eq!(t.solution, PellSolution { x: nat(29718), y: nat(3805), sign: Minus });
        // 29718² − 61·3805² by hand: 883159524 − 883159525
        assert_eq!(29718u64 * 29718 + 1, 61 * 3805 * 3805);
    }

    #[test]
    fn run_rejects_squares() {
        for v in [0u64, 1, 4, 16, 1_000_000] {
            assert_eq!(run(&nat(v), Branch::Minus), Err(Error::NonsquareRequired(nat(v))));
        }
    }

    #[test]
    fn both_branches_29() {
        let Branches::Forked { minus, plus } = run_both_branches(&nat(29)).unwrap() else {
            panic!("29 forks");
        };
        assert_eq!(triples(&minus), vec![(1, 5, 4), (4, 3, 5), (5, 7, 4), (4, 5, 1)]);
        assert_eq!(triples(&plus), vec![(1, 5, 4), (4, 7, 5), (5, 3, 4), (4, 5, 1)]);
        assert_eq!(plus.solution, minus.solution);
        assert_eq!(plus.fork, Some(Fork { index: 1, branch: Branch::Plus }));
    }

    #[test]
    fn both_branches_single() {
        assert!(matches!(run_both_branches(&nat(5)).unwrap(), Branches::Single(_)));
        let Branches::Single(t) = run_both_branches(&nat(10)).unwrap() else {
            panic!("10 has no twin");
        };
        assert_eq!(t.solution, PellSolution { x: nat(3), y: nat(1), sign: Minus });
    }

    #[test]
    fn shortcut_examples() {
        for v in [29u64, 13, 2] {
            for policy in [Branch::Minus, Branch::Plus] {
                assert_eq!(
                    run_with_midpoint_shortcut(&nat(v), policy).unwrap(),
                    run(&nat(v), policy).unwrap(),
                    "n={v}"
                );
            }
        }
        assert_eq!(run(&nat(13), Branch::Minus).unwrap().solution, PellSolution { x: nat(18), y: nat(5), sign: Minus });
    }

    #[test]
    fn shortcut_matches_run_small_sweep() {
        for v in 2u64..=400 {
            let n = nat(v);
            if crate::arith::is_square(&n) {
                continue;
            }
            assert_eq!(run_with_midpoint_shortcut(&n, Branch::Plus).unwrap(), run(&n, Branch::Plus).unwrap(), "n={v}");
        }
    }

    #[test]
    fn verify_trace_accepts_runs() {
        let t = run(&nat(29), Branch::Minus).unwrap();
        let report = verify_trace(&nat(29), &t);
        assert!(report.passed(), "{:?}", report.failures);
        for v in [2u64, 3, 7, 13, 61, 94, 109] {
            let report = verify_trace(&nat(v), &run(&nat(v), Branch::Plus).unwrap());
            assert!(report.passed(), "n={v}: {:?}", report.failures);
        }
    }

    #[test]
    fn verify_trace_flags_tampered_a2() {
        let mut t = run(&nat(29), Branch::Minus).unwrap();
        // stage 1 produces a_2
        t.stages[1].a_next += 1u32;
        let report = verify_trace(&nat(29), &t);
        assert!(report.failed_at(Check::Determinant, 2), "{:?}", report.failures);
    }

    #[test]
    fn verify_trace_flags_other_tampering() {
        let base = run(&nat(29), Branch::Minus).unwrap();

        let mut t = base.clone();
        t.fork = None;
        assert!(verify_trace(&nat(29), &t).has(Check::Fork));

        let mut t = base.clone();
        t.solution.sign = Plus;
        assert!(verify_trace(&nat(29), &t).has(Check::Solution));

        let mut t = base.clone();
        t.stages.pop();
        assert!(verify_trace(&nat(29), &t).has(Check::Halting));

        let mut t = base.clone();
        t.stages[2].m = nat(2);
        let report = verify_trace(&nat(29), &t);
        assert!(report.failed_at(Check::Congruence, 2) || report.failed_at(Check::StepProduct, 2));

        assert!(verify_trace(&nat(30), &base).has(Check::Input));
        let mut t = base;
        t.n = nat(36);
        assert!(verify_trace(&nat(36), &t).has(Check::Input));
    }

    #[test]
    fn twin_shape_29() {
        assert!(twin_shape_holds(&nat(29), &nat(4), &nat(3), &nat(7)));
        assert!(!twin_shape_holds(&nat(29), &nat(4), &nat(3), &nat(8)));
        assert!(!twin_shape_holds(&nat(29), &nat(5), &nat(2), &nat(7)));
    }

    #[test]
    fn palindrome_13() {
        // by hand: 13 − 3² = 4 > 4² − 13 = 3 gives (1,4,3); 2 ≡ −4 mod 3 gives the
        // self-reverse (3,2,3); then (3,4,1), and (a, b) runs (4,1), (7,2), (18,5)
        let t = run(&nat(13), Branch::Minus).unwrap();
        assert_eq!(t.k_sequence(), [1, 3, 3, 1].map(nat));
        assert_eq!(t.m_sequence(), [4, 2, 4].map(nat));
        assert!(t.is_palindrome());
        assert!(t.fork.is_none());
    }

    #[test]
    fn json_shape() {
        let t = run(&nat(29), Branch::Minus).unwrap();
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["n"], "29");
        assert_eq!(v["stages"][1]["i"], 1);
        assert_eq!(v["stages"][1]["m"], "3");
        assert_eq!(v["stages"][1]["eps"], -1);
        assert_eq!(v["fork"]["index"], 1);
        assert_eq!(v["fork"]["branch"], "minus");
        assert_eq!(v["solution"]["x"], "70");
        assert_eq!(v["solution"]["y"], "13");
        assert_eq!(v["solution"]["sign"], -1);
        assert_eq!(Trace::from_json(&t.to_json()).unwrap(), t);
        let t = run(&nat(13), Branch::Minus).unwrap();
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert!(v["fork"].is_null());
        assert_eq!(step_u64(1, 4, 3, Plus), t.stages[0].step());
    }
}
