use std::fmt::Write;

use chakravala::engine::{self, Trace};
use chakravala::oracle;
use chakravala::stepgraph::TheoremReport;
use chakravala::{Branch, Nat};
use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Json,
    Csv,
}

fn json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn solve(t: &Trace, format: Format) -> String {
    match format {
        Format::Human => {
            let fork = match t.fork {
                Some(f) => format!("twin fork at stage {} ({})", f.index, f.branch),
                None => "no twin fork".to_string(),
            };
            format!("{}\nstages={} {fork}\n", t.solution, t.len())
        }
        Format::Json => json(t),
        Format::Csv => {
            format!("n,x,y,sign,stages\n{},{},{},{},{}\n", t.n, t.solution.x, t.solution.y, t.solution.sign, t.len())
        }
    }
}

fn branch_label(t: &Trace) -> String {
    t.fork.map_or_else(|| "-".to_string(), |f| f.branch.to_string())
}

pub fn traces(ts: &[Trace], both: bool, format: Format) -> String {
    match format {
        Format::Json if both => json(ts),
        Format::Json => json(&ts[0]),
        Format::Csv => {
            let mut out = String::from("branch,i,k,m,k_next,eps,a_next,b_next\n");
            for t in ts {
                let label = branch_label(t);
                for s in &t.stages {
                    let _ = writeln!(
                        out,
                        "{label},{},{},{},{},{},{},{}",
                        s.i, s.k, s.m, s.k_next, s.eps, s.a_next, s.b_next
                    );
                }
            }
            out
        }
        Format::Human => {
            let mut out = String::new();
            for (idx, t) in ts.iter().enumerate() {
                if idx > 0 {
                    out.push('\n');
                }
                if both && t.fork.is_some() {
                    let _ = writeln!(out, "branch {}", branch_label(t));
                }
                out.push_str(&table(t));
            }
            out
        }
    }
}

fn table(t: &Trace) -> String {
    let header = ["i", "k", "m", "k_next", "eps", "a_next", "b_next"];
    let rows: Vec<[String; 7]> = t
        .stages
        .iter()
        .map(|s| {
            [
                s.i.to_string(),
                s.k.to_string(),
                s.m.to_string(),
                s.k_next.to_string(),
                s.eps.to_string(),
                s.a_next.to_string(),
                s.b_next.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(header.to_vec(), &mut out);
    for row in &rows {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    let fork = match t.fork {
        Some(f) => format!("stage {} ({})", f.index, f.branch),
        None => "none".to_string(),
    };
    let _ = writeln!(out, "fork: {fork}");
    let _ = writeln!(out, "palindrome: {}", if t.is_palindrome() { "yes" } else { "no" });
    let _ = writeln!(out, "solution: {}", t.solution);
    out
}

pub fn reports(rs: &[TheoremReport], format: Format) -> String {
    match format {
        Format::Json if rs.len() == 1 => json(&rs[0]),
        Format::Json => json(rs),
        Format::Csv => {
            let mut out = String::from(
                "check,n_lo,n_hi,n_values,triples,steps,successors,twins,forks,runs,oracle_matches,longer_than_cf,violations,elapsed_secs\n",
            );
            for r in rs {
                let c = &r.counts;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3}",
                    r.check,
                    r.n_lo,
                    r.n_hi,
                    c.n_values,
                    c.triples,
                    c.steps,
                    c.successors,
                    c.twins,
                    c.forks,
                    c.runs,
                    c.oracle_matches,
                    c.longer_than_cf,
                    r.violations.len(),
                    r.elapsed_secs
                );
            }
            out
        }
        Format::Human => {
            let mut out = String::new();
            for r in rs {
                let c = &r.counts;
                let _ = write!(out, "{} [{}, {}]: {} values", r.check, r.n_lo, r.n_hi, c.n_values);
                for (name, v) in [
                    ("triples", c.triples),
                    ("steps", c.steps),
                    ("successors", c.successors),
                    ("twins", c.twins),
                    ("forks", c.forks),
                    ("runs", c.runs),
                    ("oracle matches", c.oracle_matches),
                    ("longer than cf", c.longer_than_cf),
                ] {
                    if v > 0 {
                        let _ = write!(out, ", {v} {name}");
                    }
                }
                let _ = writeln!(out, "; {} violations in {:.3}s", r.violations.len(), r.elapsed_secs);
                for v in &r.violations {
                    let _ = writeln!(out, "  violation: {v}");
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub n: u64,
    pub chakravala_steps: usize,
    pub cf_steps: u64,
    pub x_digits: usize,
}

pub fn compare_rows(lo: u64, hi: u64) -> Vec<CompareRow> {
    let mut rows: Vec<CompareRow> = (lo..=hi)
        .into_par_iter()
        .filter_map(|v| {
            let n = Nat::from(v);
            let trace = engine::run(&n, Branch::Minus).ok()?;
            let cf = oracle::cf_step_count(&n).ok()?;
            Some(CompareRow {
                n: v,
                chakravala_steps: trace.len(),
                cf_steps: cf,
                x_digits: trace.solution.x.to_string().len(),
            })
        })
        .collect();
    rows.sort_by_key(|r| r.n);
    rows
}

pub fn compare(rows: &[CompareRow], format: Format) -> String {
    match format {
        Format::Json => json(rows),
        Format::Csv | Format::Human => {
            let sep = if format == Format::Csv { "," } else { "\t" };
            let mut out = ["n", "chakravala_steps", "cf_steps", "x_digits"].join(sep);
            out.push('\n');
            for r in rows {
                let _ = writeln!(out, "{}{sep}{}{sep}{}{sep}{}", r.n, r.chakravala_steps, r.cf_steps, r.x_digits);
            }
            out
        }
    }
}
