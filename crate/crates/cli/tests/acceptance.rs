//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::process::Command;
use std::time::{Duration, Instant};

use chakravala::engine::{self, Branches, PellSolution, Trace};
use chakravala::oracle::{self, OracleBudget};
use chakravala::stepgraph;
use chakravala::{Branch, Nat, Sign};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

/// Brute-force budget for criterion 6.
const ORACLE_Y_LIMIT: u64 = 10_000_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chakravala"))
}

fn cli_json(args: &[&str]) -> Result<(i32, serde_json::Value), String> {
    let out = bin().args(args).args(["--format", "json"]).output().map_err(|e| e.to_string())?;
    let code = out.status.code().unwrap_or(-1);
    let v = serde_json::from_slice(&out.stdout).map_err(|e| format!("bad JSON from {args:?}: {e}"))?;
    Ok((code, v))
}

fn nat(v: u64) -> Nat {
    Nat::from(v)
}

fn triples(t: &Trace) -> Vec<(Nat, Nat, Nat)> {
    t.stages.iter().map(|s| (s.k.clone(), s.m.clone(), s.k_next.clone())).collect()
}

fn tri(v: [(u64, u64, u64); 4]) -> Vec<(Nat, Nat, Nat)> {
    v.iter().map(|&(a, b, c)| (nat(a), nat(b), nat(c))).collect()
}

fn pell_value(n: &Nat, s: &PellSolution) -> BigInt {
    BigInt::from(&s.x * &s.x) - BigInt::from(n * &s.y * &s.y)
}

fn nonsquare(lo: u64, hi: u64) -> impl Iterator<Item = u64> {
    (lo..=hi).filter(|&v| !chakravala::arith::is_square(&nat(v)))
}

fn worked_example() -> Outcome {
    let (code, v) = cli_json(&["trace", "29", "--both-branches"])?;
    if code != 0 {
        return Err(format!("trace exited {code}"));
    }
    let traces: Vec<Trace> = serde_json::from_value(v).map_err(|e| e.to_string())?;
    let [minus, plus] = traces.as_slice() else {
        return Err(format!("expected two traces, got {}", traces.len()));
    };
    let want_minus = tri([(1, 5, 4), (4, 3, 5), (5, 7, 4), (4, 5, 1)]);
    let want_plus = tri([(1, 5, 4), (4, 7, 5), (5, 3, 4), (4, 5, 1)]);
    if triples(minus) != want_minus || triples(plus) != want_plus {
        return Err(format!("sequences {:?} / {:?}", triples(minus), triples(plus)));
    }
    let n = nat(29);
    for t in [minus, plus] {
        let s = &t.solution;
        if (s.x.clone(), s.y.clone(), s.sign) != (nat(70), nat(13), Sign::Minus)
            || pell_value(&n, s) != BigInt::from(-1)
        {
            return Err(format!("solution {s}"));
        }
    }
    // runtime of the library call, best of several
    let mut best = Duration::MAX;
    for _ in 0..20 {
        let start = Instant::now();
        let b = engine::run_both_branches(&n).map_err(|e| e.to_string())?;
        best = best.min(start.elapsed());
        assert!(matches!(b, Branches::Forked { .. }));
    }
    if best >= Duration::from_millis(1) {
        return Err(format!("run_both_branches(29) took {best:?}"));
    }
    Ok(format!("both sequences and 70^2 - 13^2*29 = -1 reproduced in {best:?}"))
}

fn base_cases() -> Outcome {
    let t = engine::run(&nat(2), Branch::Minus).map_err(|e| e.to_string())?;
    if triples(&t) != vec![(nat(1), nat(1), nat(1))]
        || t.solution != (PellSolution { x: nat(1), y: nat(1), sign: Sign::Minus })
    {
        return Err(format!("n=2 gave {:?} {}", triples(&t), t.solution));
    }
    let mut checked = 0;
    for m in 1u64..=1000 {
        for (n, sign) in [(m * m + 1, Sign::Minus), (m * m - 1, Sign::Plus)] {
            if n < 2 {
                continue;
            }
            let t = engine::run(&nat(n), Branch::Minus).map_err(|e| e.to_string())?;
            let want = PellSolution { x: nat(m), y: nat(1), sign };
            if triples(&t) != vec![(nat(1), nat(m), nat(1))] || t.solution != want {
                return Err(format!("n={n} gave {:?} {}", triples(&t), t.solution));
            }
            checked += 1;
        }
    }
    Ok(format!("n=2 and {checked} values n = m^2 ± 1 give the single step (1,m,1)"))
}

fn sweep_via_cli(which: &str, fields: &[&str]) -> Outcome {
    let (code, v) = cli_json(&["verify", "2", "2000", "--which", which])?;
    let violations = v["violations"].as_array().map_or(usize::MAX, Vec::len);
    let counts = &v["counts"];
    if code != 0 || violations != 0 {
        return Err(format!("exit {code}, {violations} violations: {}", v["violations"]));
    }
    let summary: Vec<String> = fields.iter().map(|f| format!("{} {f}", counts[*f])).collect();
    Ok(format!("{}, 0 violations", summary.join(", ")))
}

fn proposition_sweep() -> Outcome {
    let r = stepgraph::verify_best_equivalence(2, 1000);
    if !r.passed() {
        return Err(format!("{} violations, first: {}", r.violations.len(), r.violations[0]));
    }
    Ok(format!("{} admissible (n, k, m) triples, 0 violations", r.counts.triples))
}

fn oracle_equivalence() -> Outcome {
    let budget = OracleBudget::new(ORACLE_Y_LIMIT, 2).map_err(|e| e.to_string())?;
    let mut matches = 0;
    let mut mismatches = Vec::new();
    let mut exhausted = Vec::new();
    for v in nonsquare(2, 1000) {
        let n = nat(v);
        let t = engine::run(&n, Branch::Minus).map_err(|e| e.to_string())?;
        match oracle::brute_force_pell(&n, budget) {
            Some(s) if s == t.solution => matches += 1,
            Some(s) => mismatches.push(format!("n={v}: engine {} vs brute force {s}", t.solution)),
            None => exhausted.push(format!("{v} (engine y={})", t.solution.y)),
        }
    }
    if mismatches.is_empty() && exhausted.is_empty() {
        return Ok(format!("{matches} solutions equal the brute-force y-minimal solution"));
    }
    Err(format!(
        "{matches} equal, {} mismatched, {} not reached by brute force within y <= {ORACLE_Y_LIMIT}: {}{}",
        mismatches.len(),
        exhausted.len(),
        mismatches.join("; "),
        exhausted.iter().take(8).cloned().collect::<Vec<_>>().join(", ")
            + if exhausted.len() > 8 { ", ..." } else { "" },
    ))
}

fn shortcut_equivalence() -> Outcome {
    let r = stepgraph::verify_shortcut_equivalence(2, 2000);
    if !r.passed() {
        return Err(format!("{} mismatches, first: {}", r.violations.len(), r.violations[0]));
    }
    Ok(format!("{} runs identical field for field", r.counts.runs))
}

fn big_values() -> Outcome {
    let mut parts = Vec::new();
    for v in [61u64, 109, 181, 277] {
        let n = nat(v);
        let t = engine::run(&n, Branch::Minus).map_err(|e| e.to_string())?;
        let s = &t.solution;
        let value = pell_value(&n, s);
        if value != BigInt::from(s.sign.as_i8()) || !s.x.gcd(&s.y).is_one() {
            return Err(format!("n={v}: {s} gives x^2 - n y^2 = {value}"));
        }
        parts.push(format!("n={v}: y has {} digits, sign {}", s.y.to_string().len(), s.sign));
    }
    Ok(parts.join("; "))
}

fn twin_invariance() -> Outcome {
    let mut forks = 0;
    for v in nonsquare(2, 2000) {
        let n = nat(v);
        let minus = engine::run(&n, Branch::Minus).map_err(|e| e.to_string())?;
        if minus.fork.is_none() {
            continue;
        }
        forks += 1;
        let plus = engine::run(&n, Branch::Plus).map_err(|e| e.to_string())?;
        if minus.k_sequence() != plus.k_sequence() || minus.solution != plus.solution {
            return Err(format!("n={v}: policies disagree"));
        }
    }
    Ok(format!("{forks} forking n, identical k-sequences and solutions"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 worked example n=29, both branches", worked_example),
        ("2 base cases n=2 and n=m^2±1, m<=1000", base_cases),
        ("3 main-theorem sweep 2..2000", || sweep_via_cli("theorem", &["n_values", "steps", "successors", "twins"])),
        ("4 best-ness equivalence sweep n<=1000", proposition_sweep),
        ("5 structure sweep 2..2000", || sweep_via_cli("structure", &["n_values", "runs", "forks"])),
        ("6 oracle equivalence n<=1000", oracle_equivalence),
        ("7 shortcut equivalence n<=2000", shortcut_equivalence),
        ("8 big values 61, 109, 181, 277", big_values),
        ("9 twin invariance n<=2000", twin_invariance),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS  {name} ({secs:.2}s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.2}s): {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
