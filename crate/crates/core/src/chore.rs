//! Envy-free chore division: every participant's own part must cost them
//! no more than anybody else's.
//!
//! [`reserve_sets`] carves out per-participant reserves, the padded
//! satisfying subset in [`chore_satisfying_subset`] uses those reserves to
//! equalise the cheapest pieces, and [`chore_division`] repeats it on the
//! remainder, freezing a participant once what is left costs them at most
//! `epsilon` and continuing with the others.

use num_traits::Zero;

use crate::allocation::{merge_allocations, Allocation};
use crate::density::{equal_split, measure_of, select_subset, StepDensity};
use crate::envyfree::{rank_ascending, require_nonnegative, require_positive_epsilon, PreferenceLedger};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::rational::Rational;
use crate::trace::{geometric_bound, ConvergenceTrace, RoundRecord, Tracked};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReserveSystem {
    /// `ordering[k]` is the participant whose share fixed `reserves[k]`.
    pub ordering: Vec<usize>,
    pub reserves: Vec<IntervalSet>,
    pub ground: IntervalSet,
}

impl ReserveSystem {
    /// Exact reserve equalities and bounds, plus disjointness inside the ground.
    pub fn check(&self, mus: &[StepDensity]) -> Result<()> {
        let r = mus.len();
        let share = |i: usize| measure_of(&mus[i], &self.ground) / Rational::from_integer(r.into());
        let mut seen = IntervalSet::empty();
        for (k, reserve) in self.reserves.iter().enumerate() {
            if !reserve.is_subset_of(&self.ground) || !reserve.is_disjoint(&seen) {
                return Err(Error::invariant(format!("reserve {k} overlaps or leaves the ground")));
            }
            seen = seen.union(reserve);
            let lead = self.ordering[k];
            if measure_of(&mus[lead], reserve) != share(lead) {
                return Err(Error::invariant(format!("reserve {k} is not an exact share of participant {lead}")));
            }
            for &later in &self.ordering[k + 1..] {
                if measure_of(&mus[later], reserve) > share(later) {
                    return Err(Error::invariant(format!(
                        "reserve {k} exceeds the share of later participant {later}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Builds reserves `R^1..R^r` inside `s`, each an exact `1/r` share for the
/// participant that last shrank it and at most a `1/r` share for everyone
/// ordered after.
pub fn reserve_sets(mus: &[StepDensity], s: &IntervalSet) -> Result<ReserveSystem> {
    let r = mus.len();
    if r == 0 {
        return Err(Error::Domain("no participants".into()));
    }
    require_nonnegative(mus, s)?;
    let denom = Rational::from_integer(r.into());
    let shares: Vec<Rational> = mus.iter().map(|d| measure_of(d, s) / &denom).collect();
    if let Some(i) = shares.iter().position(Zero::is_zero) {
        return Err(Error::Precondition(format!(
            "participant {i} has zero measure on the reserve ground"
        )));
    }

    let mut unassigned: Vec<usize> = (0..r).collect();
    let mut available = s.clone();
    let mut ordering = Vec::with_capacity(r);
    let mut reserves = Vec::with_capacity(r);
    while let Some(&first) = unassigned.first() {
        let mut candidate = select_subset(&mus[first], &available, &shares[first])
            .map_err(|e| Error::invariant(format!("reserve stage {}: {e}", ordering.len() + 1)))?;
        let mut last = first;
        for &u in &unassigned[1..] {
            if measure_of(&mus[u], &candidate) > shares[u] {
                candidate = select_subset(&mus[u], &candidate, &shares[u])?;
                last = u;
            }
        }
        available = available.subtract(&candidate);
        unassigned.retain(|&u| u != last);
        ordering.push(last);
        reserves.push(candidate);
    }
    let system = ReserveSystem {
        ordering,
        reserves,
        ground: s.clone(),
    };
    system.check(mus)?;
    Ok(system)
}

/// Padding performed for one participant during [`chore_satisfying_subset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddingRecord {
    pub participant: usize,
    /// Total measure added to the selected sets.
    pub requested: Rational,
    /// Measure of the participant's reserve.
    pub available: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoreSubsetResult {
    pub h: IntervalSet,
    /// Exact chore-fair allocation of `h`.
    pub local_alloc: Allocation,
    pub lead_index: usize,
    /// `μ_lead(S) / 2^{r-1}`.
    pub floor_value: Rational,
    pub reserves: ReserveSystem,
    pub padding: Vec<PaddingRecord>,
    pub ledger: Vec<PreferenceLedger>,
}

/// Finds `H ⊆ s` with an exact chore-fair split and
/// `μ_lead(H) ≥ μ_lead(s) / 2^{r-1}`, where `lead` is the first participant
/// of the reserve ordering. Every participant must value `s` positively.
pub fn chore_satisfying_subset(mus: &[StepDensity], s: &IntervalSet) -> Result<ChoreSubsetResult> {
    let reserves = reserve_sets(mus, s)?;
    let r = mus.len();
    let n = 1usize << (r - 1);
    let order = reserves.ordering.clone();
    let lead = order[0];
    let floor_value = measure_of(&mus[lead], s) / Rational::from_integer(n.into());

    let mut sets = equal_split(&mus[lead], &reserves.reserves[0], n)?;
    let mut claimed = vec![Vec::new(); r];
    claimed[lead] = (0..n).collect();
    let prefers = |a: &Rational, b: &Rational| a < b;
    let mut ledger = Vec::with_capacity(r);
    let mut padding = Vec::with_capacity(r - 1);
    let snapshot = PreferenceLedger {
        round: 1,
        sets: sets.clone(),
        claimed: claimed.clone(),
    };
    snapshot.check(mus, &order, prefers)?;
    ledger.push(snapshot);

    for t in 1..r {
        let p = order[t];
        let take = n >> t;
        let vals: Vec<Rational> = sets.iter().map(|a| measure_of(&mus[p], a)).collect();
        let mut selected: Vec<usize> = rank_ascending(&vals).into_iter().take(take).collect();
        let target = vals[*selected.last().expect("at least one selected")].clone();
        let mut pool = reserves.reserves[t].clone();
        let record = PaddingRecord {
            participant: p,
            requested: selected.iter().map(|&i| &target - &vals[i]).sum(),
            available: measure_of(&mus[p], &pool),
        };
        if record.requested > record.available {
            return Err(Error::invariant(format!(
                "padding for participant {p} exceeds their reserve"
            )));
        }
        padding.push(record);
        for &i in &selected {
            let gap = &target - &vals[i];
            if gap.is_zero() {
                continue;
            }
            let extra = select_subset(&mus[p], &pool, &gap)?;
            pool = pool.subtract(&extra);
            sets[i] = sets[i].union(&extra);
        }
        selected.sort_unstable();
        for &q in &order[..t] {
            claimed[q].retain(|i| !selected.contains(i));
        }
        claimed[p] = selected;
        let snapshot = PreferenceLedger {
            round: t + 1,
            sets: sets.clone(),
            claimed: claimed.clone(),
        };
        snapshot.check(mus, &order, prefers)?;
        ledger.push(snapshot);
    }

    let parts: Vec<IntervalSet> = claimed
        .iter()
        .map(|ks| sets[*ks.iter().min().expect("every participant holds a set")].clone())
        .collect();
    let lead_share = measure_of(&mus[lead], &reserves.reserves[0]) / Rational::from_integer(n.into());
    if measure_of(&mus[lead], &parts[lead]) != lead_share {
        return Err(Error::invariant("lead's part differs from the reserve split share"));
    }
    let local_alloc = Allocation::new(parts, IntervalSet::empty())?;
    let h = local_alloc.assigned();
    if measure_of(&mus[lead], &h) < floor_value {
        return Err(Error::invariant("chore satisfying subset below its floor"));
    }
    Ok(ChoreSubsetResult {
        h,
        local_alloc,
        lead_index: lead,
        floor_value,
        reserves,
        padding,
        ledger,
    })
}

/// Exact two-participant chore split: participant 0 halves `s` by their
/// cost, participant 1 takes the cheaper half for them (the first on a tie).
pub fn chore_cut_and_choose(mu1: &StepDensity, mu2: &StepDensity, s: &IntervalSet) -> Result<Allocation> {
    require_nonnegative(&[mu1.clone(), mu2.clone()], s)?;
    let mut halves = equal_split(mu1, s, 2)?.into_iter();
    let (first, second) = (halves.next().unwrap(), halves.next().unwrap());
    let parts = if measure_of(mu2, &second) < measure_of(mu2, &first) {
        vec![first, second]
    } else {
        vec![second, first]
    };
    Allocation::new(parts, IntervalSet::empty())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitReason {
    /// Remainder cost fell to at most `epsilon`; part fixed from then on.
    Frozen,
    /// Last active participant; took the final remainder.
    FinalTaker,
    /// Remainder cost them nothing; took all of it.
    Absorbed,
}

/// When and how a participant stopped taking part in the iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExitRecord {
    pub participant: usize,
    pub reason: ExitReason,
    /// Number of satisfying-subset calls made before the exit.
    pub after_step: usize,
    /// Remainder at the moment of exit.
    pub remainder: IntervalSet,
    /// The participant's cost of that remainder.
    pub remainder_measure: Rational,
}

/// For a frozen participant `frozen`, `cross[j]` is `μ_j(F_j ∩ remainder)`:
/// how much of `j`'s final part was handed out after the freeze. It bounds
/// the amount by which `j`'s own part can cost more than `frozen`'s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreezeCertificate {
    pub frozen: usize,
    pub remainder_measure: Rational,
    pub cross: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoreDivision {
    pub allocation: Allocation,
    pub trace: ConvergenceTrace,
    pub exits: Vec<ExitRecord>,
    pub certificates: Vec<FreezeCertificate>,
}

impl ChoreDivision {
    /// Largest cross value over all freezes; upper bound on the final
    /// gentleman violation.
    pub fn certified_bound(&self) -> Rational {
        self.certificates
            .iter()
            .flat_map(|c| c.cross.iter())
            .cloned()
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Chore division of `m` with per-participant freezing at `epsilon`.
pub fn chore_division(mus: &[StepDensity], m: &IntervalSet, epsilon: &Rational) -> Result<ChoreDivision> {
    require_positive_epsilon(epsilon)?;
    if mus.is_empty() {
        return Err(Error::Domain("no participants".into()));
    }
    require_nonnegative(mus, m)?;
    let r = mus.len();
    let measure_all = |set: &IntervalSet| -> Vec<Rational> { mus.iter().map(|d| measure_of(d, set)).collect() };

    let mut trace = ConvergenceTrace::new(measure_all(m));
    let mut alloc = Allocation::empty(r);
    let mut remainder = m.clone();
    let mut active: Vec<usize> = (0..r).collect();
    let mut exits: Vec<ExitRecord> = Vec::new();
    let mut left = trace.initial.clone();
    let mut segment_base = left.clone();
    let mut led = vec![0usize; r];
    let mut step = 0;

    let exit = |who: usize, reason, remainder: &IntervalSet, left: &[Rational], step| ExitRecord {
        participant: who,
        reason,
        after_step: step,
        remainder: remainder.clone(),
        remainder_measure: left[who].clone(),
    };

    loop {
        if let Some(&z) = active.iter().find(|&&j| left[j].is_zero()) {
            exits.push(exit(z, ExitReason::Absorbed, &remainder, &left, step));
            alloc.parts[z] = alloc.parts[z].union(&remainder);
            break;
        }
        if active.len() == 1 {
            let last = active[0];
            exits.push(exit(last, ExitReason::FinalTaker, &remainder, &left, step));
            alloc.parts[last] = alloc.parts[last].union(&remainder);
            break;
        }
        let mut freezing: Vec<usize> = active.iter().copied().filter(|&j| left[j] <= *epsilon).collect();
        if !freezing.is_empty() {
            if freezing.len() == active.len() {
                // Someone has to stay for the residue: the one it costs least.
                let keep = *freezing
                    .iter()
                    .min_by(|&&a, &&b| left[a].cmp(&left[b]).then(a.cmp(&b)))
                    .unwrap();
                freezing.retain(|&j| j != keep);
            }
            for &j in &freezing {
                exits.push(exit(j, ExitReason::Frozen, &remainder, &left, step));
            }
            active.retain(|j| !freezing.contains(j));
            segment_base = left.clone();
            led = vec![0; r];
            continue;
        }

        let sub: Vec<StepDensity> = active.iter().map(|&j| mus[j].clone()).collect();
        let res = chore_satisfying_subset(&sub, &remainder)?;
        if res.h.is_empty() {
            return Err(Error::invariant("chore satisfying subset is empty"));
        }
        step += 1;
        let lead = active[res.lead_index];
        remainder = remainder.subtract(&res.h);
        alloc = merge_allocations(&[alloc, res.local_alloc.lift(&active, r)])?;
        left = measure_all(&remainder);
        led[lead] += 1;
        let record = RoundRecord {
            s: step,
            cutter: lead,
            tracked: Tracked::Lead,
            averaged: left[lead].clone(),
            bound: geometric_bound(active.len(), led[lead], &segment_base[lead]),
            per_player_remainder: left.clone(),
            active: active.len(),
            exponent: led[lead],
            base: segment_base[lead].clone(),
        };
        if !record.within_bound() {
            return Err(Error::invariant(format!("step {step}: lead remainder exceeds the decay bound")));
        }
        trace.rounds.push(record);
    }

    let mut truncation = vec![Rational::zero(); r];
    for e in &exits {
        truncation[e.participant] = e.remainder_measure.clone();
    }
    trace.truncation = truncation;
    let certificates = exits
        .iter()
        .filter(|e| e.reason == ExitReason::Frozen)
        .map(|e| FreezeCertificate {
            frozen: e.participant,
            remainder_measure: e.remainder_measure.clone(),
            cross: (0..r)
                .map(|j| {
                    if j == e.participant {
                        Rational::zero()
                    } else {
                        measure_of(&mus[j], &alloc.parts[j].intersect(&e.remainder))
                    }
                })
                .collect(),
        })
        .collect();
    Ok(ChoreDivision {
        allocation: alloc,
        trace,
        exits,
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{classify_solution, envy_matrix};
    use crate::interval::canonicalize;
    use crate::rational::{int, ratio};

    fn iv(a: Rational, b: Rational) -> IntervalSet {
        canonicalize(&[(a, b)]).unwrap()
    }

    fn left_heavy() -> StepDensity {
        StepDensity::new(vec![(int(0), ratio(1, 2), int(2)), (ratio(1, 2), int(1), int(0))]).unwrap()
    }

    fn gentleman_exact(mus: &[StepDensity], alloc: &Allocation) -> bool {
        classify_solution(&envy_matrix(mus, alloc).unwrap(), &int(0)).unwrap().gentleman
    }

    #[test]
    fn reserves_two_uniform() {
        let u = StepDensity::uniform();
        let rs = reserve_sets(&[u.clone(), u], &IntervalSet::unit()).unwrap();
        assert_eq!(rs.ordering, vec![0, 1]);
        assert_eq!(rs.reserves, vec![iv(int(0), ratio(1, 2)), iv(ratio(1, 2), int(1))]);
    }

    #[test]
    fn reserves_single_participant() {
        let rs = reserve_sets(&[StepDensity::uniform()], &IntervalSet::unit()).unwrap();
        assert_eq!(rs.ordering, vec![0]);
        assert_eq!(rs.reserves, vec![IntervalSet::unit()]);
    }

    #[test]
    fn reserves_shrink_for_second_participant() {
        let mus = [StepDensity::uniform(), left_heavy()];
        let rs = reserve_sets(&mus, &IntervalSet::unit()).unwrap();
        assert_eq!(rs.ordering, vec![1, 0]);
        assert_eq!(rs.reserves, vec![iv(int(0), ratio(1, 4)), iv(ratio(1, 4), ratio(3, 4))]);
    }

    #[test]
    fn reserves_reject_zero_measure() {
        let mus = [StepDensity::uniform(), StepDensity::constant(int(0))];
        assert!(matches!(
            reserve_sets(&mus, &IntervalSet::unit()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn chore_subset_two_uniform() {
        let u = StepDensity::uniform();
        let mus = [u.clone(), u];
        let res = chore_satisfying_subset(&mus, &IntervalSet::unit()).unwrap();
        assert_eq!(res.local_alloc.parts, vec![iv(ratio(1, 4), ratio(1, 2)), iv(int(0), ratio(1, 4))]);
        assert_eq!(res.h, iv(int(0), ratio(1, 2)));
        assert_eq!(res.floor_value, ratio(1, 2));
        assert!(gentleman_exact(&mus, &res.local_alloc));
    }

    #[test]
    fn chore_subset_single() {
        let res = chore_satisfying_subset(&[StepDensity::uniform()], &IntervalSet::unit()).unwrap();
        assert_eq!(res.h, IntervalSet::unit());
        assert_eq!(res.local_alloc.parts, vec![IntervalSet::unit()]);
    }

    #[test]
    fn chore_subset_reordered_lead() {
        let mus = [StepDensity::uniform(), left_heavy()];
        let res = chore_satisfying_subset(&mus, &IntervalSet::unit()).unwrap();
        assert_eq!(res.lead_index, 1);
        assert_eq!(res.local_alloc.parts[0], iv(int(0), ratio(1, 8)));
        assert_eq!(res.local_alloc.parts[1], iv(ratio(1, 8), ratio(1, 4)));
        assert_eq!(res.padding[0].requested, int(0));
        assert!(gentleman_exact(&mus, &res.local_alloc));
    }

    #[test]
    fn chore_subset_pads_from_reserve() {
        let mus = [
            StepDensity::new(vec![(int(0), ratio(1, 3), int(3)), (ratio(1, 3), int(1), int(0))]).unwrap(),
            StepDensity::new(vec![(int(0), ratio(1, 6), int(1)), (ratio(1, 6), int(1), int(2))]).unwrap(),
            StepDensity::uniform(),
        ];
        let res = chore_satisfying_subset(&mus, &IntervalSet::unit()).unwrap();
        res.reserves.check(&mus).unwrap();
        for p in &res.padding {
            assert!(p.requested <= p.available);
        }
        assert!(gentleman_exact(&mus, &res.local_alloc));
    }

    #[test]
    fn division_single_participant() {
        let out = chore_division(&[StepDensity::uniform()], &IntervalSet::unit(), &ratio(1, 10)).unwrap();
        assert_eq!(out.allocation.parts, vec![IntervalSet::unit()]);
        assert!(out.certificates.is_empty());
    }

    #[test]
    fn division_two_uniform() {
        let u = StepDensity::uniform();
        let mus = [u.clone(), u];
        let out = chore_division(&mus, &IntervalSet::unit(), &ratio(1, 1000)).unwrap();
        assert_eq!(out.allocation.ground(), IntervalSet::unit());
        for w in out.trace.rounds.windows(2) {
            assert_eq!(&w[1].per_player_remainder[0] * int(2), w[0].per_player_remainder[0]);
        }
        let m = envy_matrix(&mus, &out.allocation).unwrap();
        let frozen = out.certificates[0].frozen;
        assert_eq!(m.burden(frozen, 1 - frozen), int(0));
        assert!(classify_solution(&m, &int(0)).unwrap().max_gentleman_violation <= out.certified_bound());
    }

    #[test]
    fn division_zero_cost_participant_absorbs() {
        let mus = [StepDensity::uniform(), StepDensity::constant(int(0))];
        let out = chore_division(&mus, &IntervalSet::unit(), &ratio(1, 100)).unwrap();
        assert_eq!(out.allocation.parts[1], IntervalSet::unit());
        assert!(out.allocation.parts[0].is_empty());
        assert!(gentleman_exact(&mus, &out.allocation));
    }

    #[test]
    fn chore_cut_and_choose_is_exact() {
        let mus = [StepDensity::uniform(), left_heavy()];
        let a = chore_cut_and_choose(&mus[0], &mus[1], &IntervalSet::unit()).unwrap();
        assert_eq!(a.parts, vec![iv(int(0), ratio(1, 2)), iv(ratio(1, 2), int(1))]);
        assert!(gentleman_exact(&mus, &a));
    }
}
