//! The chakravala cyclic algorithm for Pell's equation `x² − n·y² = ±1`.
//!
//! * [`arith`]: exact integer square roots and squareness.
//! * [`steps`]: best-mod-k selection, steps, reduced steps, successors.
//! * [`engine`]: the algorithm, twin branches, midpoint shortcut, trace checks.
//! * [`stepgraph`]: step enumeration and range sweeps.
//! * [`oracle`]: brute-force references and the continued-fraction period.
//!
//! ```
//! use chakravala::{engine, Branch, Nat};
//!
//! let trace = engine::run(&Nat::from(29u32), Branch::Minus).unwrap();
//! assert_eq!(trace.solution.to_string(), "x=70 y=13 sign=-1");
//! ```

pub mod arith;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod stepgraph;
pub mod steps;

pub use arith::{Nat, Sign};
pub use engine::{run, run_both_branches, run_with_midpoint_shortcut, verify_trace, PellSolution, Trace, TwinPolicy};
pub use error::{Error, Result};
pub use steps::{Best, BestChoice, Branch, Step, Verdict};
