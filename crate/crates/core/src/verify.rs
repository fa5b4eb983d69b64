//! Standalone checker for a claimed allocation.
//!
//! Only measures and interval algebra are used here; none of the solver
//! code is consulted, so a solver bug cannot hide behind its own checks.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::density::measure_of;
use crate::interval::IntervalSet;
use crate::io::{AllocationDoc, Mode, Scenario};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyError {
    /// Parts are missing, duplicated, overlapping or fail to cover [0, 1).
    Structural(String),
    /// Tolerance was negative.
    Tolerance,
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Structural(msg) => write!(f, "structural error: {msg}"),
            VerifyError::Tolerance => write!(f, "tolerance must be non-negative"),
        }
    }
}

impl std::error::Error for VerifyError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub mode: Mode,
    /// `values[i][j]`: player `i`'s measure of player `j`'s part.
    pub values: Vec<Vec<Rational>>,
    pub strong: bool,
    pub weak: bool,
    pub gentleman: bool,
    pub max_strong_violation: Rational,
    pub max_gentleman_violation: Rational,
    /// `None` when the allocation carries no certificate.
    pub certificate_matches: Option<bool>,
}

impl VerifyReport {
    /// The condition the scenario's mode promises, plus agreement with any
    /// attached certificate.
    pub fn passed(&self) -> bool {
        let condition = match self.mode {
            Mode::Chore => self.gentleman,
            Mode::Strong | Mode::Charge => self.strong,
        };
        condition && self.certificate_matches != Some(false)
    }

    pub fn lines(&self) -> Vec<String> {
        let check = match self.mode {
            Mode::Chore => "gentleman",
            Mode::Strong | Mode::Charge => "strong",
        };
        let mut out = vec![
            format!("strong: {}", self.strong),
            format!("weak: {}", self.weak),
            format!("gentleman: {}", self.gentleman),
            format!("max_strong_violation: {}", rational::format(&self.max_strong_violation)),
            format!("max_gentleman_violation: {}", rational::format(&self.max_gentleman_violation)),
        ];
        if let Some(m) = self.certificate_matches {
            out.push(format!("certificate_matches: {m}"));
        }
        out.push(format!("{} ({check}): {}", self.mode.as_str(), if self.passed() { "PASS" } else { "FAIL" }));
        out
    }
}

/// Orders `doc`'s parts like the scenario's players and checks that they
/// tile [0, 1).
fn parts_in_player_order(scenario: &Scenario, doc: &AllocationDoc) -> Result<Vec<IntervalSet>, VerifyError> {
    if doc.parts.len() != scenario.players.len() {
        return Err(VerifyError::Structural(format!(
            "{} parts for {} players",
            doc.parts.len(),
            scenario.players.len()
        )));
    }
    let mut parts = Vec::with_capacity(doc.parts.len());
    for p in &scenario.players {
        let mut matching = doc.parts.iter().filter(|(n, _)| *n == p.name);
        let Some((_, set)) = matching.next() else {
            return Err(VerifyError::Structural(format!("no part for player {:?}", p.name)));
        };
        if matching.next().is_some() {
            return Err(VerifyError::Structural(format!("several parts for player {:?}", p.name)));
        }
        parts.push(set.clone());
    }
    let mut covered = IntervalSet::empty();
    for (i, part) in parts.iter().enumerate() {
        if !covered.intersect(part).is_empty() {
            return Err(VerifyError::Structural(format!(
                "part of {:?} overlaps an earlier part",
                scenario.players[i].name
            )));
        }
        covered = covered.union(part);
    }
    let missing = IntervalSet::unit().subtract(&covered);
    if !missing.is_empty() {
        return Err(VerifyError::Structural(format!("parts leave {missing} unassigned")));
    }
    Ok(parts)
}

pub fn verify(scenario: &Scenario, doc: &AllocationDoc, tolerance: &Rational) -> Result<VerifyReport, VerifyError> {
    if tolerance.is_negative() {
        return Err(VerifyError::Tolerance);
    }
    let parts = parts_in_player_order(scenario, doc)?;
    let r = parts.len();
    let values: Vec<Vec<Rational>> = scenario
        .players
        .iter()
        .map(|p| parts.iter().map(|f| measure_of(&p.density, f)).collect())
        .collect();

    let mut max_strong = Rational::zero();
    let mut max_gentleman = Rational::zero();
    let mut weak = true;
    let share = Rational::from_integer(r.into());
    for (i, row) in values.iter().enumerate() {
        let own = &row[i];
        for other in row {
            max_strong = max_strong.max(other - own);
            max_gentleman = max_gentleman.max(own - other);
        }
        let total = measure_of(&scenario.players[i].density, &IntervalSet::unit());
        if *own < &total / &share - tolerance {
            weak = false;
        }
    }

    let certificate_matches = doc.certificate.as_ref().map(|c| {
        c.envy_matrix == values
            && c.max_strong_violation == max_strong
            && c.max_gentleman_violation == max_gentleman
    });
    Ok(VerifyReport {
        mode: scenario.mode,
        strong: max_strong <= *tolerance,
        weak,
        gentleman: max_gentleman <= *tolerance,
        values,
        max_strong_violation: max_strong,
        max_gentleman_violation: max_gentleman,
        certificate_matches,
    })
}
