//! Exhaustive step enumeration and range sweeps that machine-check the
//! structural properties of the algorithm.
//!
//! Each `n` is an independent work unit; sweeps fan out over rayon's current
//! pool and merge reports associatively, so callers control parallelism with
//! `ThreadPool::install`.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, decimal, Nat};
use crate::engine::{self, verify_trace, Trace};
use crate::error::{Error, Result};
use crate::oracle::{self, OracleBudget};
use crate::steps::{self, cond2, cond3, is_best, is_reduced, is_step, reverse, Best, Branch, Radicand, Step, Verdict};

/// All steps of a fixed `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSet {
    #[serde(with = "decimal")]
    pub n: Nat,
    pub steps: BTreeSet<Step>,
    /// `(k, r)` classes whose best element is a twin pair.
    pub twin_sites: Vec<(u64, u64)>,
}

impl StepSet {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn contains(&self, s: &Step) -> bool {
        self.steps.contains(s)
    }
}

fn small_root(rad: &Radicand) -> Result<u64> {
    rad.root().to_u64().ok_or_else(|| Error::Budget(format!("enumerating the steps of {} is out of reach", rad.n())))
}

/// Every step `(k, m, k′)` of `n`. Only the two members of each class that
/// straddle `√n` can be best, and only classes with `r² ≡ n (mod k)` give an
/// integral `k′`.
pub fn enumerate_steps(n: &Nat) -> Result<StepSet> {
    let rad = Radicand::new(n.clone())?;
    let root = small_root(&rad)?;
    let mut steps = BTreeSet::new();
    let mut twin_sites = Vec::new();
    for k in 1..=root {
        let n_mod = (n % k).to_u64().expect("residue below k");
        let kn = Nat::from(k);
        for r in 0..k {
            if (r as u128 * r as u128 % k as u128) as u64 != n_mod {
                continue;
            }
            let choice = rad.select_best(&kn, &Nat::from(r)).expect("k below the root");
            if choice.is_twin() {
                twin_sites.push((k, r));
            }
            for m in choice.into_vec() {
                let s = Step::from_parts(n, kn.clone(), m).expect("class members share the residue of n");
                steps.insert(s);
            }
        }
    }
    Ok(StepSet { n: n.clone(), steps, twin_sites })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n_values: u64,
    pub triples: u64,
    pub steps: u64,
    pub successors: u64,
    pub twins: u64,
    pub forks: u64,
    pub runs: u64,
    pub oracle_matches: u64,
    /// Runs whose chakravala trace is longer than the continued-fraction period.
    pub longer_than_cf: u64,
}

impl Counts {
    fn merge(mut self, o: Counts) -> Counts {
        self.n_values += o.n_values;
        self.triples += o.triples;
        self.steps += o.steps;
        self.successors += o.successors;
        self.twins += o.twins;
        self.forks += o.forks;
        self.runs += o.runs;
        self.oracle_matches += o.oracle_matches;
        self.longer_than_cf += o.longer_than_cf;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    #[serde(with = "decimal")]
    pub n: Nat,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}: {}", self.n, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub check: String,
    pub n_lo: u64,
    pub n_hi: u64,
    pub counts: Counts,
    pub violations: Vec<Violation>,
    /// Empirical observations that are reported but not treated as failures.
    pub notes: Vec<String>,
    pub elapsed_secs: f64,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn elapsed(&self) -> Duration {
        Duration::from_secs_f64(self.elapsed_secs)
    }

    /// Order-independent combination of two reports over disjoint ranges.
    pub fn merge(mut self, other: TheoremReport) -> TheoremReport {
        self.n_lo = self.n_lo.min(other.n_lo);
        self.n_hi = self.n_hi.max(other.n_hi);
        self.counts = self.counts.merge(other.counts);
        self.violations.extend(other.violations);
        self.violations.sort_by(|a, b| a.n.cmp(&b.n).then_with(|| a.detail.cmp(&b.detail)));
        self.notes.extend(other.notes);
        self.notes.sort();
        self.elapsed_secs = self.elapsed_secs.max(other.elapsed_secs);
        self
    }
}

#[derive(Default)]
struct Partial {
    counts: Counts,
    violations: Vec<Violation>,
    notes: Vec<String>,
}

impl Partial {
    fn violation(&mut self, n: u64, detail: impl Into<String>) {
        self.violations.push(Violation { n: Nat::from(n), detail: detail.into() });
    }

    fn merge(mut self, o: Partial) -> Partial {
        self.counts = self.counts.merge(o.counts);
        self.violations.extend(o.violations);
        self.notes.extend(o.notes);
        self
    }
}

fn sweep(check: &str, n_lo: u64, n_hi: u64, per_n: impl Fn(u64, &mut Partial) + Sync) -> TheoremReport {
    let start = Instant::now();
    let partial = (n_lo..=n_hi)
        .into_par_iter()
        .filter(|&v| v >= 2 && !arith::is_square(&Nat::from(v)))
        .map(|v| {
            let mut p = Partial::default();
            p.counts.n_values = 1;
            per_n(v, &mut p);
            p
        })
        .reduce(Partial::default, Partial::merge);
    let mut violations = partial.violations;
    violations.sort_by(|a, b| a.n.cmp(&b.n).then_with(|| a.detail.cmp(&b.detail)));
    let mut notes = partial.notes;
    notes.sort();
    TheoremReport {
        check: check.to_string(),
        n_lo,
        n_hi,
        counts: partial.counts,
        violations,
        notes,
        elapsed_secs: start.elapsed().as_secs_f64(),
    }
}

/// The best-ness characterisation sweep: for every `(n, k, m)` with `k² < n`,
/// `1 ≤ m ≤ ⌊√n⌋ + k` and `k | m² − n`, best mod k (two-neighbour test and a
/// direct scan) agrees with both inequality forms, and strict best-ness agrees
/// with both being strict.
pub fn verify_best_equivalence(n_lo: u64, n_hi: u64) -> TheoremReport {
    let scan = OracleBudget::new(1, 2).expect("valid budget");
    sweep("prop2", n_lo, n_hi, |v, p| {
        let n = Nat::from(v);
        let root = arith::isqrt(&n).to_u64().expect("sweep values are small");
        for k in 1..=root {
            let kn = Nat::from(k);
            for m in 1..=root + k {
                if (m as u128 * m as u128 % k as u128) != (v % k) as u128 {
                    continue;
                }
                let mn = Nat::from(m);
                let s = Step::from_parts(&n, kn.clone(), mn.clone()).expect("k divides m^2 - n");
                p.counts.triples += 1;
                let two_neighbour = is_best(&n, &kn, &mn);
                let c2 = cond2(&n, &kn, &s.kp);
                let c3 = cond3(&n, &kn, &s.kp, &mn, s.eps);
                let scanned = match oracle::brute_force_best(&n, &kn, &Nat::from(m % k), scan) {
                    Ok(b) => b,
                    Err(e) => {
                        p.violation(v, format!("scan failed at k={k}, m={m}: {e}"));
                        continue;
                    }
                };
                let best = scanned.contains(&mn);
                let strictly = scanned == Best::Strict(mn.clone());
                if two_neighbour != best || c2.holds() != best || c3.holds() != best {
                    p.violation(
                        v,
                        format!("best-ness disagrees at (k={k}, m={m}, k'={}): scan={best} two_neighbour={two_neighbour} cond2={c2:?} cond3={c3:?}", s.kp),
                    );
                }
                if best && ((c2 == Verdict::HoldsStrict) != strictly || (c3 == Verdict::HoldsStrict) != strictly) {
                    p.violation(
                        v,
                        format!("strictness disagrees at (k={k}, m={m}, k'={}): strictly={strictly} cond2={c2:?} cond3={c3:?}", s.kp),
                    );
                }
            }
        }
    })
}

/// For every step of every `n` in range: every successor is reduced, lies in
/// the step set, and the twin identities hold; the step set is closed under
/// reversal of reduced steps; `k′² < n`; `k′ ≥ k` implies reduced.
pub fn verify_main_theorem(n_lo: u64, n_hi: u64) -> TheoremReport {
    sweep("theorem", n_lo, n_hi, |v, p| {
        let n = Nat::from(v);
        let set = match enumerate_steps(&n) {
            Ok(set) => set,
            Err(e) => {
                p.violation(v, format!("enumeration failed: {e}"));
                return;
            }
        };
        let rad = Radicand::new(n.clone()).expect("nonsquare");
        p.counts.twins += set.twin_sites.len() as u64;
        for &(k, r) in &set.twin_sites {
            if let Ok(Best::Twin { minus, plus }) = rad.select_best(&Nat::from(k), &Nat::from(r)) {
                if !engine::twin_shape_holds(&n, &Nat::from(k), &minus, &plus) {
                    p.violation(v, format!("twin ({minus}, {plus}) mod {k} breaks n = k'^2 + k^2/4"));
                }
            }
        }
        for s in &set.steps {
            p.counts.steps += 1;
            if &s.kp * &s.kp >= n {
                p.violation(v, format!("step {s} has k'^2 >= n"));
            }
            let reduced = is_reduced(&n, s);
            if s.kp >= s.k && !reduced {
                p.violation(v, format!("step {s} has k' >= k but is not reduced"));
            }
            if reduced && !set.contains(&reverse(s)) {
                p.violation(v, format!("reverse of reduced step {s} is missing from the step set"));
            }
            for succ in rad.successor(s).into_vec() {
                p.counts.successors += 1;
                if !is_reduced(&n, &succ) {
                    p.violation(v, format!("successor {succ} of step {s} is not reduced"));
                }
                if !set.contains(&succ) {
                    p.violation(v, format!("successor {succ} of step {s} is not in the step set"));
                }
            }
        }
    })
}

/// Runs both twin policies for every `n` and checks the sequence shapes:
/// verified traces, at most one fork, palindromes without a fork, the two
/// twin displays (each the reversed mirror of the other) with a fork, same
/// `k`-sequence and solution for both policies, bounded length, and
/// shortcut equivalence.
pub fn verify_sequence_structure(n_lo: u64, n_hi: u64) -> TheoremReport {
    sweep("structure", n_lo, n_hi, |v, p| {
        let n = Nat::from(v);
        let minus = match engine::run(&n, Branch::Minus) {
            Ok(t) => t,
            Err(e) => {
                p.violation(v, format!("run failed: {e}"));
                return;
            }
        };
        let plus = engine::run(&n, Branch::Plus).expect("same input as the minus run");
        p.counts.runs += 2;
        for t in [&minus, &plus] {
            let report = verify_trace(&n, t);
            for f in report.failures {
                p.violation(v, format!("{} trace: {f}", branch_name(t)));
            }
        }
        if let Ok(set) = enumerate_steps(&n) {
            if minus.len() > set.len() {
                p.violation(v, format!("{} stages exceed the {} possible steps", minus.len(), set.len()));
            }
        }
        let twin_stages = twin_stage_count(&n, &minus);
        if twin_stages > 1 {
            p.violation(v, format!("{twin_stages} twin stages in one run"));
        }
        match minus.fork {
            None => {
                if !minus.is_palindrome() {
                    p.violation(v, "twin-free run is not palindromic");
                }
                if plus != minus {
                    p.violation(v, "twin-free run depends on the twin policy");
                }
            }
            Some(fork) => {
                p.counts.forks += 1;
                let (ms, ps) = (minus.steps(), plus.steps());
                let len = ms.len();
                let mirrored = ps.len() == len && (0..len).all(|t| ps[t] == reverse(&ms[len - 1 - t]));
                if !mirrored {
                    p.violation(
                        v,
                        format!("fork at {}: plus sequence is not the reverse of the minus sequence", fork.index),
                    );
                }
                if let Err(e) = engine::run_both_branches(&n) {
                    p.violation(v, e.to_string());
                }
            }
        }
        if minus.k_sequence() != plus.k_sequence() {
            p.violation(v, "twin policies give different k-sequences");
        }
        if minus.solution != plus.solution {
            p.violation(v, format!("twin policies give {} vs {}", minus.solution, plus.solution));
        }
        for (t, policy) in [(&minus, Branch::Minus), (&plus, Branch::Plus)] {
            match engine::run_with_midpoint_shortcut(&n, policy) {
                Ok(s) if &s == t => {}
                Ok(_) => p.violation(v, format!("shortcut differs from the full run ({policy})")),
                Err(e) => p.violation(v, format!("shortcut failed: {e}")),
            }
        }
    })
}

/// Midpoint shortcut against the full run, field for field, for both policies.
pub fn verify_shortcut_equivalence(n_lo: u64, n_hi: u64) -> TheoremReport {
    sweep("shortcut", n_lo, n_hi, |v, p| {
        let n = Nat::from(v);
        for policy in [Branch::Minus, Branch::Plus] {
            p.counts.runs += 1;
            match (engine::run(&n, policy), engine::run_with_midpoint_shortcut(&n, policy)) {
                (Ok(full), Ok(short)) if full == short => {}
                (Ok(_), Ok(_)) => p.violation(v, format!("shortcut differs from the full run ({policy})")),
                (a, b) => p.violation(v, format!("run errors: {:?} / {:?}", a.err(), b.err())),
            }
        }
    })
}

/// Oracle agreement: the engine's solution equals the brute-force `y`-minimal
/// solution, and `select_best` equals the direct scan on every class. An
/// exhausted brute-force budget cannot confirm agreement and is reported as a
/// violation. Trace length against the continued-fraction period is recorded
/// as a note, never as a violation.
pub fn verify_oracle(n_lo: u64, n_hi: u64, budget: OracleBudget) -> TheoremReport {
    sweep("oracle", n_lo, n_hi, |v, p| {
        let n = Nat::from(v);
        let rad = Radicand::new(n.clone()).expect("nonsquare");
        let root = rad.root().to_u64().expect("sweep values are small");
        for k in 1..=root {
            let kn = Nat::from(k);
            for r in 0..k {
                let rn = Nat::from(r);
                p.counts.triples += 1;
                let fast = rad.select_best(&kn, &rn);
                let slow = oracle::brute_force_best(&n, &kn, &rn, budget);
                if fast != slow {
                    p.violation(v, format!("select_best({k}, {r}) = {fast:?} but scan gives {slow:?}"));
                }
            }
        }

        let trace = match engine::run(&n, Branch::Minus) {
            Ok(t) => t,
            Err(e) => {
                p.violation(v, format!("run failed: {e}"));
                return;
            }
        };
        p.counts.runs += 1;
        match oracle::brute_force_pell(&n, budget) {
            Some(sol) if sol == trace.solution => p.counts.oracle_matches += 1,
            Some(sol) => p.violation(v, format!("engine gives {} but brute force finds {sol}", trace.solution)),
            None => p.violation(
                v,
                format!(
                    "inconclusive: brute force exhausted y <= {} without a solution; engine gives y = {}",
                    budget.y_limit, trace.solution.y
                ),
            ),
        }
        if let Ok(cf) = oracle::cf_step_count(&n) {
            if trace.len() as u64 > cf {
                p.counts.longer_than_cf += 1;
                p.notes.push(format!("n={v}: chakravala {} stages > continued fraction {cf}", trace.len()));
            }
        }
    })
}

/// Stages of a trace whose selection was a twin, recomputed independently of
/// the recorded fork.
pub fn twin_stage_count(n: &Nat, t: &Trace) -> usize {
    let Ok(rad) = Radicand::new(n.clone()) else {
        return 0;
    };
    let mut prev_m = Nat::from(0u32);
    let mut count = 0;
    for st in &t.stages {
        let r = steps::canonical_residue(&-num_bigint::BigInt::from(prev_m.clone()), &st.k);
        if let Ok(r) = r {
            if rad.select_best(&st.k, &r).is_ok_and(|c| c.is_twin()) {
                count += 1;
            }
        }
        prev_m = st.m.clone();
    }
    count
}

fn branch_name(t: &Trace) -> &'static str {
    match t.fork.map(|f| f.branch) {
        Some(Branch::Plus) => "plus",
        _ => "minus",
    }
}

/// Which sweep to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Prop2,
    Theorem,
    Structure,
    Oracle,
}

impl Which {
    pub const ALL: [Which; 4] = [Which::Prop2, Which::Theorem, Which::Structure, Which::Oracle];

    pub fn run(self, n_lo: u64, n_hi: u64, budget: OracleBudget) -> TheoremReport {
        match self {
            Which::Prop2 => verify_best_equivalence(n_lo, n_hi),
            Which::Theorem => verify_main_theorem(n_lo, n_hi),
            Which::Structure => verify_sequence_structure(n_lo, n_hi),
            Which::Oracle => verify_oracle(n_lo, n_hi, budget),
        }
    }
}

/// Naive triple-loop enumeration, for cross-checking [`enumerate_steps`].
pub fn enumerate_steps_naive(n: u64) -> BTreeSet<Step> {
    let nn = Nat::from(n);
    let root = arith::isqrt(&nn).to_u64().expect("small");
    let mut out = BTreeSet::new();
    for k in 1..=root {
        for m in 1..=2 * root + 1 {
            if let Some(s) = Step::from_parts(&nn, Nat::from(k), Nat::from(m)) {
                if is_step(&nn, &s) {
                    out.insert(s);
                }
            }
        }
    }
    out
}
