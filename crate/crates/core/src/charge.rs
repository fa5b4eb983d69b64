//! Division for signed valuations.
//!
//! The unit interval is cut into sign cells, regions on which every
//! participant's density has a fixed sign. A cell where somebody gains is
//! split envy-free among the gainers; a cell where everybody loses is a chore
//! problem for the negated densities. The per-cell results are glued back
//! together part by part.

use num_traits::Zero;

use crate::allocation::{classify_solution, envy_matrix, merge_allocations, Allocation};
use crate::chore::{chore_cut_and_choose, chore_division, ChoreDivision};
use crate::density::{hahn_jordan, measure_of, StepDensity};
use crate::envyfree::{require_positive_epsilon, strong_division};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::par::Execution;
use crate::rational::Rational;
use crate::trace::ConvergenceTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignCell {
    pub cell: IntervalSet,
    pub signs: Vec<Sign>,
    pub i_plus: Vec<usize>,
    pub i_minus: Vec<usize>,
}

impl SignCell {
    fn new(cell: IntervalSet, signs: Vec<Sign>) -> Self {
        let (i_plus, i_minus) = (0..signs.len()).partition(|&i| signs[i] == Sign::Plus);
        SignCell {
            cell,
            signs,
            i_plus,
            i_minus,
        }
    }
}

/// Non-empty intersections of the participants' Hahn sets, in sign order
/// (`+` before `-`, participant 0 most significant).
pub fn sign_cells(charges: &[StepDensity]) -> Vec<SignCell> {
    let mut cells = vec![(IntervalSet::unit(), Vec::with_capacity(charges.len()))];
    for d in charges {
        let (plus, minus) = hahn_jordan(d);
        cells = cells
            .into_iter()
            .flat_map(|(cell, signs)| {
                let mut out = Vec::with_capacity(2);
                for (half, sign) in [(&plus, Sign::Plus), (&minus, Sign::Minus)] {
                    let piece = cell.intersect(half);
                    if !piece.is_empty() {
                        let mut s: Vec<Sign> = signs.clone();
                        s.push(sign);
                        out.push((piece, s));
                    }
                }
                out
            })
            .collect();
    }
    cells
        .into_iter()
        .map(|(cell, signs)| SignCell::new(cell, signs))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellMethod {
    /// Envy-free division among the gainers.
    Strong,
    /// Iterated chore division of the negated densities.
    Chore,
    /// Exact two-participant chore split.
    ChoreCutAndChoose,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellOutcome {
    pub cell: SignCell,
    pub method: CellMethod,
    /// Allocation of the cell to all participants, no remainder.
    pub allocation: Allocation,
    pub trace: ConvergenceTrace,
    /// Per participant, the truncation residue measure (absolute value).
    pub truncation: Vec<Rational>,
    /// Upper bound on any participant's envy inside this cell.
    pub certificate: Rational,
    pub chore: Option<ChoreDivision>,
}

/// Divides one sign cell among all `charges.len()` participants.
pub fn divide_cell(charges: &[StepDensity], cell: &SignCell, epsilon_cell: &Rational) -> Result<CellOutcome> {
    require_positive_epsilon(epsilon_cell)?;
    if cell.cell.is_empty() {
        return Err(Error::Domain("empty sign cell".into()));
    }
    let r = charges.len();
    if !cell.i_plus.is_empty() {
        let gainers: Vec<StepDensity> = cell.i_plus.iter().map(|&i| charges[i].clone()).collect();
        let (local, trace) = strong_division(&gainers, &cell.cell, epsilon_cell)?;
        let mut truncation = vec![Rational::zero(); r];
        for (k, &i) in cell.i_plus.iter().enumerate() {
            truncation[i] = trace.truncation[k].clone();
        }
        let certificate = trace.truncation.iter().cloned().max().unwrap_or_else(Rational::zero);
        return Ok(CellOutcome {
            cell: cell.clone(),
            method: CellMethod::Strong,
            allocation: local.lift(&cell.i_plus, r),
            trace,
            truncation,
            certificate,
            chore: None,
        });
    }

    let costs: Vec<StepDensity> = charges.iter().map(StepDensity::negate).collect();
    if r == 2 {
        let allocation = chore_cut_and_choose(&costs[0], &costs[1], &cell.cell)?;
        let initial = costs.iter().map(|d| measure_of(d, &cell.cell)).collect();
        let mut trace = ConvergenceTrace::new(initial);
        trace.truncation = vec![Rational::zero(); r];
        return Ok(CellOutcome {
            cell: cell.clone(),
            method: CellMethod::ChoreCutAndChoose,
            allocation,
            truncation: trace.truncation.clone(),
            trace,
            certificate: Rational::zero(),
            chore: None,
        });
    }
    let out = chore_division(&costs, &cell.cell, epsilon_cell)?;
    Ok(CellOutcome {
        cell: cell.clone(),
        method: CellMethod::Chore,
        allocation: out.allocation.clone(),
        trace: out.trace.clone(),
        truncation: out.trace.truncation.clone(),
        certificate: out.certified_bound(),
        chore: Some(out),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargeDivision {
    pub allocation: Allocation,
    pub cells: Vec<CellOutcome>,
    /// Sum of the per-cell certificates; bounds the final envy.
    pub certified_bound: Rational,
}

impl ChargeDivision {
    /// Per participant, summed over cells.
    pub fn truncation(&self) -> Vec<Rational> {
        let r = self.allocation.arity();
        self.cells.iter().fold(vec![Rational::zero(); r], |mut acc, c| {
            for (a, t) in acc.iter_mut().zip(&c.truncation) {
                *a += t;
            }
            acc
        })
    }
}

pub fn divide_charges(charges: &[StepDensity], epsilon: &Rational) -> Result<ChargeDivision> {
    divide_charges_with(Execution::default(), charges, epsilon)
}

/// Cells are independent, so `exec` may divide them concurrently; the merge
/// runs in cell order either way.
pub fn divide_charges_with(exec: Execution, charges: &[StepDensity], epsilon: &Rational) -> Result<ChargeDivision> {
    require_positive_epsilon(epsilon)?;
    if charges.is_empty() {
        return Err(Error::Domain("no participants".into()));
    }
    let cells = sign_cells(charges);
    let per_cell = epsilon / Rational::from_integer(cells.len().into());
    let outcomes = exec
        .map(&cells, |c| divide_cell(charges, c, &per_cell))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let pieces: Vec<Allocation> = outcomes.iter().map(|o| o.allocation.clone()).collect();
    let allocation = merge_allocations(&pieces)?;
    let certified_bound: Rational = outcomes.iter().map(|o| o.certificate.clone()).sum();
    let m = envy_matrix(charges, &allocation)?;
    if classify_solution(&m, &Rational::zero())?.max_strong_violation > certified_bound {
        return Err(Error::invariant("final envy exceeds the summed cell certificates"));
    }
    Ok(ChargeDivision {
        allocation,
        cells: outcomes,
        certified_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::canonicalize;
    use crate::rational::{int, ratio};

    fn iv(a: Rational, b: Rational) -> IntervalSet {
        canonicalize(&[(a, b)]).unwrap()
    }

    fn halves(left: i64, right: i64) -> StepDensity {
        StepDensity::new(vec![(int(0), ratio(1, 2), int(left)), (ratio(1, 2), int(1), int(right))]).unwrap()
    }

    #[test]
    fn single_positive_cell() {
        let cells = sign_cells(&[StepDensity::uniform()]);
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].signs, vec![Sign::Plus]);
        assert_eq!(cells[0].cell, IntervalSet::unit());
    }

    #[test]
    fn opposite_charges_give_two_cells() {
        let cells = sign_cells(&[halves(1, -1), halves(-1, 1)]);
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].signs, vec![Sign::Plus, Sign::Minus]);
        assert_eq!(cells[0].cell, iv(int(0), ratio(1, 2)));
        assert_eq!(cells[1].signs, vec![Sign::Minus, Sign::Plus]);
        assert_eq!(cells[1].cell, iv(ratio(1, 2), int(1)));
    }

    #[test]
    fn identical_positive_charges_one_cell() {
        let u = StepDensity::uniform();
        let cells = sign_cells(&[u.clone(), u]);
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].i_plus, vec![0, 1]);
    }

    #[test]
    fn singleton_gainer_takes_cell() {
        let charges = [halves(1, -1), halves(-1, 1)];
        let cells = sign_cells(&charges);
        let out = divide_cell(&charges, &cells[0], &ratio(1, 10)).unwrap();
        assert_eq!(out.allocation.parts[0], cells[0].cell);
        assert!(out.allocation.parts[1].is_empty());
    }

    #[test]
    fn negative_cell_split_in_half() {
        let cost = StepDensity::constant(int(-1));
        let charges = [cost.clone(), cost];
        let cells = sign_cells(&charges);
        let out = divide_cell(&charges, &cells[0], &ratio(1, 10)).unwrap();
        assert_eq!(out.method, CellMethod::ChoreCutAndChoose);
        let m = envy_matrix(&charges, &out.allocation).unwrap();
        assert_eq!(m.values[0][0], ratio(-1, 2));
        assert_eq!(m.values[1][1], ratio(-1, 2));
    }

    #[test]
    fn empty_cell_rejected() {
        let cell = SignCell::new(IntervalSet::empty(), vec![Sign::Plus]);
        assert!(matches!(
            divide_cell(&[StepDensity::uniform()], &cell, &ratio(1, 2)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn two_participant_example() {
        let charges = [halves(1, -1), halves(-1, 1)];
        let out = divide_charges(&charges, &ratio(1, 100)).unwrap();
        assert_eq!(out.allocation.parts[0], iv(int(0), ratio(1, 2)));
        assert_eq!(out.allocation.parts[1], iv(ratio(1, 2), int(1)));
        assert_eq!(out.certified_bound, int(0));
    }
}
