//! Runs the solver matching a scenario's mode and packages the result with
//! its certificate and trace rows.

use crate::allocation::{classify_solution, envy_matrix, Allocation};
use crate::charge::divide_charges_with;
use crate::chore::{chore_division, FreezeCertificate};
use crate::envyfree::strong_division;
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::io::{AllocationDoc, Certificate, FreezeEntry, Mode, Scenario, TraceRow};
use crate::io::trace_rows;
use crate::par::Execution;
use crate::rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub allocation: Allocation,
    pub document: AllocationDoc,
    pub trace: Vec<TraceRow>,
}

fn freeze_entries(certs: &[FreezeCertificate], cell: Option<usize>) -> impl Iterator<Item = FreezeEntry> + '_ {
    certs.iter().map(move |c| FreezeEntry {
        frozen: c.frozen,
        remainder_measure: c.remainder_measure.clone(),
        cell,
        cross: c.cross.clone(),
    })
}

pub fn solve(scenario: &Scenario) -> Result<Solution> {
    solve_with(Execution::default(), scenario)
}

/// `exec` only affects charge mode, whose sign cells are independent.
pub fn solve_with(exec: Execution, scenario: &Scenario) -> Result<Solution> {
    let densities = scenario.densities();
    let unit = IntervalSet::unit();
    let eps = &scenario.epsilon;
    let (allocation, truncation, certified_bound, freezes, trace) = match scenario.mode {
        Mode::Strong => {
            let (allocation, trace) = strong_division(&densities, &unit, eps)?;
            let bound = trace.truncation.iter().cloned().max().unwrap_or_else(rational::zero);
            let rows = trace_rows(&trace, None)?;
            (allocation, trace.truncation, bound, Vec::new(), rows)
        }
        Mode::Chore => {
            let out = chore_division(&densities, &unit, eps)?;
            let bound = out.certified_bound();
            let freezes = freeze_entries(&out.certificates, None).collect();
            let rows = trace_rows(&out.trace, None)?;
            (out.allocation, out.trace.truncation, bound, freezes, rows)
        }
        Mode::Charge => {
            let out = divide_charges_with(exec, &densities, eps)?;
            let mut freezes = Vec::new();
            let mut rows = Vec::new();
            for (k, cell) in out.cells.iter().enumerate() {
                if let Some(ch) = &cell.chore {
                    freezes.extend(freeze_entries(&ch.certificates, Some(k)));
                }
                rows.extend(trace_rows(&cell.trace, Some(k))?);
            }
            let truncation = out.truncation();
            (out.allocation, truncation, out.certified_bound, freezes, rows)
        }
    };
    if !allocation.remainder.is_empty() || allocation.assigned() != unit {
        return Err(Error::invariant("solver did not hand out all of [0, 1)"));
    }
    let m = envy_matrix(&densities, &allocation)?;
    let class = classify_solution(&m, &rational::zero())?;
    let certified_violation = match scenario.mode {
        Mode::Chore => &class.max_gentleman_violation,
        Mode::Strong | Mode::Charge => &class.max_strong_violation,
    };
    if *certified_violation > certified_bound {
        return Err(Error::invariant("violation exceeds the certified bound"));
    }
    let certificate = Certificate {
        envy_matrix: m.values,
        max_strong_violation: class.max_strong_violation,
        max_gentleman_violation: class.max_gentleman_violation,
        remainder_measures_at_truncation: truncation,
        certified_bound,
        freezes,
    };
    let document = AllocationDoc {
        mode: Some(scenario.mode),
        parts: scenario.names().into_iter().zip(allocation.parts.iter().cloned()).collect(),
        certificate: Some(certificate),
    };
    Ok(Solution {
        allocation,
        document,
        trace,
    })
}

/// Solves independent scenarios, concurrently when `exec` is parallel.
pub fn solve_batch(exec: Execution, scenarios: &[Scenario]) -> Vec<Result<Solution>> {
    exec.map(scenarios, |s| solve_with(Execution::Sequential, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_scenario;
    use crate::rational::ratio;

    #[test]
    fn uniform_pair_is_exact() {
        let s = parse_scenario(
            r#"{"mode":"strong","epsilon":"1/100","players":[
            {"name":"a","density":[["0","1","1"]]},{"name":"b","density":[["0","1","1"]]}]}"#,
        )
        .unwrap();
        let sol = solve(&s).unwrap();
        let cert = sol.document.certificate.unwrap();
        assert_eq!(cert.max_strong_violation, rational::zero());
        assert_eq!(cert.envy_matrix[0], vec![ratio(1, 2), ratio(1, 2)]);
    }

    #[test]
    fn batch_matches_sequential() {
        let texts = ["strong", "chore", "charge"].map(|m| {
            format!(
                r#"{{"mode":"{m}","epsilon":"1/50","players":[
                {{"name":"a","density":[["0","1/3","2"],["1/3","1","1"]]}},
                {{"name":"b","density":[["0","1/2","1"],["1/2","1","3"]]}},
                {{"name":"c","density":[["0","1","1"]]}}]}}"#
            )
        });
        let scenarios: Vec<Scenario> = texts.iter().map(|t| parse_scenario(t).unwrap()).collect();
        let par = solve_batch(Execution::Parallel, &scenarios);
        let seq = solve_batch(Execution::Sequential, &scenarios);
        for (p, s) in par.into_iter().zip(seq) {
            assert_eq!(p.unwrap(), s.unwrap());
        }
    }
}
