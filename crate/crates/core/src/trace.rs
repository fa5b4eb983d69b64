//! Per-round convergence records shared by the strong and chore drivers.

use crate::rational::{self, Rational};

/// Per-round contraction factor `(2^{r-1} - 1) / 2^{r-1}` for `r` participants.
pub fn contraction(r: usize) -> Rational {
    assert!(r >= 1, "contraction needs at least one participant");
    let scale = rational::pow2(r - 1);
    (&scale - rational::one()) / scale
}

/// `contraction(active)^exponent * base`, recomputed from scratch.
pub fn geometric_bound(active: usize, exponent: usize, base: &Rational) -> Rational {
    let q = contraction(active);
    let mut acc = base.clone();
    for _ in 0..exponent {
        acc *= &q;
    }
    acc
}

/// What the `averaged` column of a round measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tracked {
    /// Mean remainder measure over all participants (strong driver).
    Mean,
    /// Remainder measure of the round's lead participant (chore driver).
    Lead,
}

impl Tracked {
    pub fn as_str(self) -> &'static str {
        match self {
            Tracked::Mean => "mean",
            Tracked::Lead => "lead",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    /// 1-based round number.
    pub s: usize,
    /// Participant whose cut closed the round (strong) or who led it (chore).
    pub cutter: usize,
    pub tracked: Tracked,
    pub per_player_remainder: Vec<Rational>,
    pub averaged: Rational,
    pub bound: Rational,
    /// Participants active when the bound was derived.
    pub active: usize,
    pub exponent: usize,
    pub base: Rational,
}

impl RoundRecord {
    pub fn within_bound(&self) -> bool {
        self.averaged <= self.bound
    }
}

/// One satisfying-subset call made by a driver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetSummary {
    pub step: usize,
    pub cutter: usize,
    /// `μ_cutter(S) / 2^{r-1}` for the call's ground `S`.
    pub floor_value: Rational,
    /// `μ_cutter(H)`.
    pub cutter_value_of_h: Rational,
    /// `μ_cutter` of the cutter's own part.
    pub cutter_share: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConvergenceTrace {
    pub players: usize,
    /// `μ_j(M)` for the driver's ground `M`.
    pub initial: Vec<Rational>,
    pub rounds: Vec<RoundRecord>,
    pub calls: Vec<SubsetSummary>,
    /// `μ_j` of the unassigned residue when the driver stopped.
    pub truncation: Vec<Rational>,
}

impl ConvergenceTrace {
    pub fn new(initial: Vec<Rational>) -> Self {
        ConvergenceTrace {
            players: initial.len(),
            initial,
            ..Default::default()
        }
    }

    pub fn initial_averaged(&self) -> Rational {
        mean(&self.initial)
    }
}

pub fn mean(xs: &[Rational]) -> Rational {
    if xs.is_empty() {
        return rational::zero();
    }
    xs.iter().sum::<Rational>() / Rational::from_integer(xs.len().into())
}
