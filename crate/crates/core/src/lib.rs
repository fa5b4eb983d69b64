//! Exact fair division of the unit interval.
//!
//! Valuations are piecewise-constant densities with rational breakpoints and
//! values; sets are finite unions of half-open rational intervals. All
//! arithmetic is exact, so fairness conditions are checked with `==`/`<=` on
//! rationals rather than within floating-point slack.
//!
//! * [`envyfree`]: envy-free division for non-negative valuations.
//! * [`chore`]: envy-free division of costs.
//! * [`charge`]: signed valuations, split into sign cells.
//! * [`io`]: JSON scenario, allocation and trace formats.
//! * [`solve`]: mode dispatch; [`verify`]: standalone allocation checker.

pub mod allocation;
pub mod charge;
pub mod chore;
pub mod density;
pub mod envyfree;
pub mod error;
pub mod interval;
pub mod io;
pub mod par;
pub mod random;
pub mod rational;
pub mod solve;
pub mod trace;
pub mod verify;

pub use allocation::{classify_solution, envy_matrix, merge_allocations, Allocation, Classification, EnvyMatrix};
pub use charge::{divide_cell, divide_charges, sign_cells, ChargeDivision, Sign, SignCell};
pub use chore::{chore_division, chore_satisfying_subset, reserve_sets, ChoreDivision, ReserveSystem};
pub use density::{equal_split, hahn_jordan, measure_of, select_subset, StepDensity};
pub use envyfree::{cut_and_choose, satisfying_subset, strong_division, three_player_round};
pub use error::{Error, Result};
pub use interval::{canonicalize, set_algebra, IntervalSet, SetOp};
pub use par::Execution;
pub use rational::Rational;
pub use trace::ConvergenceTrace;
pub use solve::{solve, solve_batch, solve_with, Solution};
pub use verify::{verify, VerifyReport};
