//! Allocations, envy matrices, solution classification, and the merge of
//! per-piece solutions over disjoint grounds.

use num_traits::{Signed, Zero};

use crate::density::{measure_of, StepDensity};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::par::Execution;
use crate::rational::Rational;

/// `parts[i]` is participant `i`'s share; `remainder` is whatever has not
/// been handed out yet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub parts: Vec<IntervalSet>,
    pub remainder: IntervalSet,
}

impl Allocation {
    pub fn new(parts: Vec<IntervalSet>, remainder: IntervalSet) -> Result<Self> {
        let alloc = Allocation { parts, remainder };
        alloc.check_disjoint()?;
        Ok(alloc)
    }

    /// `r` empty parts over an empty ground.
    pub fn empty(r: usize) -> Self {
        Allocation {
            parts: vec![IntervalSet::empty(); r],
            remainder: IntervalSet::empty(),
        }
    }

    /// Everything in `ground` left unassigned.
    pub fn unassigned(r: usize, ground: IntervalSet) -> Self {
        Allocation {
            parts: vec![IntervalSet::empty(); r],
            remainder: ground,
        }
    }

    pub fn arity(&self) -> usize {
        self.parts.len()
    }

    pub fn ground(&self) -> IntervalSet {
        self.parts
            .iter()
            .fold(self.remainder.clone(), |acc, p| acc.union(p))
    }

    pub fn assigned(&self) -> IntervalSet {
        self.parts.iter().cloned().collect()
    }

    fn check_disjoint(&self) -> Result<()> {
        let mut seen = self.remainder.clone();
        for (i, p) in self.parts.iter().enumerate() {
            if !seen.is_disjoint(p) {
                return Err(Error::Disjointness(format!(
                    "part {i} overlaps an earlier part or the remainder"
                )));
            }
            seen = seen.union(p);
        }
        Ok(())
    }

    /// Hands the remainder to participant `who`.
    pub fn absorb_remainder(&mut self, who: usize) {
        let rest = std::mem::take(&mut self.remainder);
        self.parts[who] = self.parts[who].union(&rest);
    }

    /// Re-indexes a sub-allocation over `map.len()` participants into an
    /// `r`-participant allocation; `map[k]` is the global index of local `k`.
    pub fn lift(&self, map: &[usize], r: usize) -> Allocation {
        let mut parts = vec![IntervalSet::empty(); r];
        for (local, &global) in map.iter().enumerate() {
            parts[global] = self.parts[local].clone();
        }
        Allocation {
            parts,
            remainder: self.remainder.clone(),
        }
    }
}

/// `values[i][j]` is participant `i`'s valuation of part `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyMatrix {
    pub values: Vec<Vec<Rational>>,
    pub ground: IntervalSet,
}

impl EnvyMatrix {
    pub fn size(&self) -> usize {
        self.values.len()
    }

    /// How far `i` prefers `j`'s part to their own, clamped at zero.
    pub fn envy(&self, i: usize, j: usize) -> Rational {
        positive_part(&self.values[i][j] - &self.values[i][i])
    }

    /// How far `i`'s own part costs more than `j`'s, clamped at zero.
    pub fn burden(&self, i: usize, j: usize) -> Rational {
        positive_part(&self.values[i][i] - &self.values[i][j])
    }
}

fn positive_part(x: Rational) -> Rational {
    if x.is_positive() {
        x
    } else {
        Rational::zero()
    }
}

pub fn envy_matrix(charges: &[StepDensity], alloc: &Allocation) -> Result<EnvyMatrix> {
    envy_matrix_with(Execution::default(), charges, alloc)
}

pub fn envy_matrix_with(
    exec: Execution,
    charges: &[StepDensity],
    alloc: &Allocation,
) -> Result<EnvyMatrix> {
    if charges.len() != alloc.arity() {
        return Err(Error::Arity {
            expected: charges.len(),
            found: alloc.arity(),
        });
    }
    let values = exec.map(charges, |d| {
        alloc.parts.iter().map(|p| measure_of(d, p)).collect()
    });
    Ok(EnvyMatrix {
        values,
        ground: alloc.assigned(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub strong: bool,
    pub weak: bool,
    pub gentleman: bool,
    pub max_strong_violation: Rational,
    pub max_gentleman_violation: Rational,
}

pub fn classify_solution(m: &EnvyMatrix, tolerance: &Rational) -> Result<Classification> {
    if tolerance.is_negative() {
        return Err(Error::Domain("tolerance must be non-negative".into()));
    }
    let r = m.size();
    let mut max_strong = Rational::zero();
    let mut max_gentleman = Rational::zero();
    let mut weak = true;
    for i in 0..r {
        for j in 0..r {
            let e = m.envy(i, j);
            if e > max_strong {
                max_strong = e;
            }
            let b = m.burden(i, j);
            if b > max_gentleman {
                max_gentleman = b;
            }
        }
        let row: Rational = m.values[i].iter().sum();
        let average = row / Rational::from_integer(r.into());
        if m.values[i][i] < average - tolerance {
            weak = false;
        }
    }
    Ok(Classification {
        strong: max_strong <= *tolerance,
        weak,
        gentleman: max_gentleman <= *tolerance,
        max_strong_violation: max_strong,
        max_gentleman_violation: max_gentleman,
    })
}

/// Glues allocations over pairwise-disjoint grounds part by part.
pub fn merge_allocations(pieces: &[Allocation]) -> Result<Allocation> {
    let Some(first) = pieces.first() else {
        return Err(Error::Domain("nothing to merge".into()));
    };
    let r = first.arity();
    let mut merged = Allocation::empty(r);
    let mut covered = IntervalSet::empty();
    for (k, piece) in pieces.iter().enumerate() {
        if piece.arity() != r {
            return Err(Error::Arity {
                expected: r,
                found: piece.arity(),
            });
        }
        let ground = piece.ground();
        if !covered.is_disjoint(&ground) {
            return Err(Error::Disjointness(format!(
                "piece {k} overlaps an earlier piece"
            )));
        }
        covered = covered.union(&ground);
        for (dst, src) in merged.parts.iter_mut().zip(&piece.parts) {
            *dst = dst.union(src);
        }
        merged.remainder = merged.remainder.union(&piece.remainder);
    }
    Ok(merged)
}
