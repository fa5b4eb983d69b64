//! Envy-free division for non-negative valuations.
//!
//! Contains the two-participant cut-and-choose, the single three-participant
//! round with a trimmed largest third, the satisfying-subset construction
//! for any number of participants, and the round-robin driver that repeats
//! it on the shrinking remainder until every participant values what is left
//! at most `epsilon`.

use num_traits::{Signed, Zero};

use crate::allocation::{merge_allocations, Allocation};
use crate::density::{equal_split, measure_of, select_subset, StepDensity};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::rational::{self, Rational};
use crate::trace::{geometric_bound, mean, ConvergenceTrace, RoundRecord, SubsetSummary, Tracked};

pub(crate) fn require_nonnegative(mus: &[StepDensity], s: &IntervalSet) -> Result<()> {
    match mus.iter().position(|d| !d.is_nonnegative_on(s)) {
        None => Ok(()),
        Some(i) => Err(Error::Precondition(format!(
            "participant {i} has negative density on the ground set"
        ))),
    }
}

pub(crate) fn require_positive_epsilon(epsilon: &Rational) -> Result<()> {
    if epsilon.is_positive() {
        Ok(())
    } else {
        Err(Error::Domain("epsilon must be positive".into()))
    }
}

/// Index order by descending value, lower index first on ties.
pub(crate) fn rank_descending(values: &[Rational]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].cmp(&values[a]).then(a.cmp(&b)));
    idx
}

/// Index order by ascending value, lower index first on ties.
pub(crate) fn rank_ascending(values: &[Rational]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].cmp(&values[b]).then(a.cmp(&b)));
    idx
}

/// Participant 0 halves `s` by their measure; participant 1 takes the half
/// they value more (the first half on a tie).
pub fn cut_and_choose(mu1: &StepDensity, mu2: &StepDensity, s: &IntervalSet) -> Result<Allocation> {
    require_nonnegative(&[mu1.clone(), mu2.clone()], s)?;
    let mut halves = equal_split(mu1, s, 2)?.into_iter();
    let (first, second) = (halves.next().unwrap(), halves.next().unwrap());
    let parts = if measure_of(mu2, &second) > measure_of(mu2, &first) {
        vec![first, second]
    } else {
        vec![second, first]
    };
    Allocation::new(parts, IntervalSet::empty())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreePlayerRound {
    /// Envy-free allocation of `s` minus the trimmed residue.
    pub partial: Allocation,
    pub remainder: IntervalSet,
}

/// One round of the three-participant construction with `cutter` splitting
/// `s` into thirds.
///
/// The other two participants are handled in ascending index order: the
/// first ("chooser") trims their favourite third down to their second
/// favourite, the second ("picker") takes their favourite of the trimmed
/// third and the two untouched ones, and the leftover goes back to the
/// remainder.
pub fn three_player_round(mus: &[StepDensity], s: &IntervalSet, cutter: usize) -> Result<ThreePlayerRound> {
    if mus.len() != 3 {
        return Err(Error::Arity {
            expected: 3,
            found: mus.len(),
        });
    }
    if cutter >= 3 {
        return Err(Error::Domain(format!("cutter index {cutter} out of range")));
    }
    require_nonnegative(mus, s)?;
    let others: Vec<usize> = (0..3).filter(|&i| i != cutter).collect();
    let (chooser, picker) = (others[0], others[1]);

    let thirds = equal_split(&mus[cutter], s, 3)?;
    let chooser_vals: Vec<Rational> = thirds.iter().map(|t| measure_of(&mus[chooser], t)).collect();
    let order = rank_descending(&chooser_vals);
    let (largest, middle, smallest) = (order[0], order[1], order[2]);

    let trimmed = if chooser_vals[largest] > chooser_vals[middle] {
        select_subset(&mus[chooser], &thirds[largest], &chooser_vals[middle])?
    } else {
        thirds[largest].clone()
    };
    let remainder = thirds[largest].subtract(&trimmed);

    // Candidates keep the index of the third they came from for tie-breaks.
    let mut candidates = [(largest, &trimmed), (middle, &thirds[middle]), (smallest, &thirds[smallest])];
    candidates.sort_by_key(|c| c.0);
    let pick = candidates
        .iter()
        .map(|(k, set)| (*k, measure_of(&mus[picker], set)))
        .fold(None::<(usize, Rational)>, |best, (k, v)| match best {
            Some((_, ref bv)) if *bv >= v => best,
            _ => Some((k, v)),
        })
        .map(|(k, _)| k)
        .expect("three candidates");

    let (cutter_gets, chooser_gets, picker_gets) = if pick == largest {
        (thirds[smallest].clone(), thirds[middle].clone(), trimmed)
    } else if pick == middle {
        (thirds[smallest].clone(), trimmed, thirds[middle].clone())
    } else {
        (thirds[middle].clone(), trimmed, thirds[smallest].clone())
    };
    let mut parts = vec![IntervalSet::empty(); 3];
    parts[cutter] = cutter_gets;
    parts[chooser] = chooser_gets;
    parts[picker] = picker_gets;
    Ok(ThreePlayerRound {
        partial: Allocation::new(parts, IntervalSet::empty())?,
        remainder,
    })
}

/// Iterates [`three_player_round`] on the remainder with the cutter rotating
/// 0, 1, 2, 0, … until every participant values the remainder at most
/// `epsilon`; the residue then goes to participant 0. Returns the allocation
/// and the per-participant residue measures at truncation.
pub fn iterate_three_player(
    mus: &[StepDensity],
    m: &IntervalSet,
    epsilon: &Rational,
) -> Result<(Allocation, Vec<Rational>)> {
    require_positive_epsilon(epsilon)?;
    if mus.len() != 3 {
        return Err(Error::Arity {
            expected: 3,
            found: mus.len(),
        });
    }
    require_nonnegative(mus, m)?;
    let mut alloc = Allocation::unassigned(3, IntervalSet::empty());
    let mut remainder = m.clone();
    let mut idle = 0;
    let mut cutter = 0;
    loop {
        let left: Vec<Rational> = mus.iter().map(|d| measure_of(d, &remainder)).collect();
        if left.iter().all(|v| v <= epsilon) {
            alloc.remainder = remainder;
            alloc.absorb_remainder(0);
            return Ok((alloc, left));
        }
        let round = three_player_round(mus, &remainder, cutter)?;
        let bound = &left[cutter] / rational::int(3);
        if measure_of(&mus[cutter], &round.remainder) > bound {
            return Err(Error::invariant("three-player remainder exceeds a third of the cutter's measure"));
        }
        if round.remainder == remainder {
            idle += 1;
            if idle >= 3 {
                return Err(Error::invariant("three-player rounds stopped making progress"));
            }
        } else {
            idle = 0;
        }
        alloc = merge_allocations(&[alloc, round.partial])?;
        remainder = round.remainder;
        cutter = (cutter + 1) % 3;
    }
}

/// Snapshot of the preference bookkeeping after one trimming round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceLedger {
    /// 1-based round, counted in relabelled order (cutter is round 1).
    pub round: usize,
    pub sets: Vec<IntervalSet>,
    /// `claimed[i]`: indices into `sets` held by participant `i`.
    pub claimed: Vec<Vec<usize>>,
}

impl PreferenceLedger {
    /// Checks disjointness, the cardinality floor for participants already
    /// processed, and that every claimed set is a favourite of its holder.
    /// `better(a, b)` is true when value `a` is strictly preferred to `b`.
    pub(crate) fn check(
        &self,
        mus: &[StepDensity],
        order: &[usize],
        better: impl Fn(&Rational, &Rational) -> bool,
    ) -> Result<()> {
        let r = order.len();
        let mut owner = vec![None; self.sets.len()];
        for (i, ks) in self.claimed.iter().enumerate() {
            for &k in ks {
                if owner[k].replace(i).is_some() {
                    return Err(Error::invariant(format!(
                        "round {}: set {k} claimed twice",
                        self.round
                    )));
                }
            }
        }
        let floor = 1usize << (r - self.round);
        for &p in &order[..self.round] {
            if self.claimed[p].len() < floor {
                return Err(Error::invariant(format!(
                    "round {}: participant {p} holds {} sets, needs {floor}",
                    self.round,
                    self.claimed[p].len()
                )));
            }
            let vals: Vec<Rational> = self.sets.iter().map(|s| measure_of(&mus[p], s)).collect();
            for &k in &self.claimed[p] {
                if vals.iter().any(|v| better(v, &vals[k])) {
                    return Err(Error::invariant(format!(
                        "round {}: set {k} is not a favourite of participant {p}",
                        self.round
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatisfyingSubsetResult {
    pub h: IntervalSet,
    /// Envy-free allocation of exactly `h`.
    pub local_alloc: Allocation,
    pub cutter_index: usize,
    pub floor_value: Rational,
    pub ledger: Vec<PreferenceLedger>,
}

/// Cutter first, then everybody else in ascending index order.
pub(crate) fn relabel(r: usize, lead: usize) -> Vec<usize> {
    std::iter::once(lead).chain((0..r).filter(|&i| i != lead)).collect()
}

/// Finds `H ⊆ s` with an exact envy-free split and
/// `μ_k(H) ≥ μ_k(s) / 2^{r-1}`.
pub fn satisfying_subset(mus: &[StepDensity], k: usize, s: &IntervalSet) -> Result<SatisfyingSubsetResult> {
    let r = mus.len();
    if k >= r {
        return Err(Error::Domain(format!("cutter index {k} out of range")));
    }
    require_nonnegative(mus, s)?;
    let n = 1usize << (r - 1);
    let total = measure_of(&mus[k], s);
    let floor_value = &total / Rational::from_integer(n.into());
    if total.is_zero() {
        return Ok(SatisfyingSubsetResult {
            h: IntervalSet::empty(),
            local_alloc: Allocation::empty(r),
            cutter_index: k,
            floor_value,
            ledger: Vec::new(),
        });
    }

    let order = relabel(r, k);
    let mut sets = equal_split(&mus[k], s, n)?;
    let mut claimed = vec![Vec::new(); r];
    claimed[k] = (0..n).collect();
    let prefers = |a: &Rational, b: &Rational| a > b;
    let mut ledger = Vec::with_capacity(r);
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
        let mut selected: Vec<usize> = rank_descending(&vals).into_iter().take(take).collect();
        let target = vals[*selected.last().expect("at least one selected")].clone();
        for &i in &selected {
            if vals[i] > target {
                sets[i] = select_subset(&mus[p], &sets[i], &target)?;
            }
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
    if measure_of(&mus[k], &parts[k]) != floor_value {
        return Err(Error::invariant("cutter's part differs from the equal-split share"));
    }
    let local_alloc = Allocation::new(parts, IntervalSet::empty())?;
    let h = local_alloc.assigned();
    Ok(SatisfyingSubsetResult {
        h,
        local_alloc,
        cutter_index: k,
        floor_value,
        ledger,
    })
}

/// Round-robin satisfying-subset driver.
///
/// Each outer round calls [`satisfying_subset`] once per participant, in
/// index order, on what is left. Rounds stop once every participant values
/// the remainder at most `epsilon`; that residue is then given to
/// participant 0 and its per-participant measures are kept in
/// [`ConvergenceTrace::truncation`].
pub fn strong_division(
    mus: &[StepDensity],
    m: &IntervalSet,
    epsilon: &Rational,
) -> Result<(Allocation, ConvergenceTrace)> {
    require_positive_epsilon(epsilon)?;
    if mus.is_empty() {
        return Err(Error::Domain("no participants".into()));
    }
    require_nonnegative(mus, m)?;
    let r = mus.len();
    let measure_all = |set: &IntervalSet| -> Vec<Rational> { mus.iter().map(|d| measure_of(d, set)).collect() };

    let mut trace = ConvergenceTrace::new(measure_all(m));
    let base = trace.initial_averaged();
    let mut alloc = Allocation::empty(r);
    let mut remainder = m.clone();
    let mut left = trace.initial.clone();
    let mut s = 0;
    while left.iter().any(|v| v > epsilon) {
        s += 1;
        let before = remainder.clone();
        for t in 0..r {
            let res = satisfying_subset(mus, t, &remainder)?;
            let value_of_h = measure_of(&mus[t], &res.h);
            if value_of_h < res.floor_value {
                return Err(Error::invariant("satisfying subset below its floor"));
            }
            trace.calls.push(SubsetSummary {
                step: trace.calls.len() + 1,
                cutter: t,
                cutter_value_of_h: value_of_h,
                cutter_share: measure_of(&mus[t], &res.local_alloc.parts[t]),
                floor_value: res.floor_value,
            });
            remainder = remainder.subtract(&res.h);
            alloc = merge_allocations(&[alloc, res.local_alloc])?;
        }
        left = measure_all(&remainder);
        let record = RoundRecord {
            s,
            cutter: r - 1,
            tracked: Tracked::Mean,
            averaged: mean(&left),
            bound: geometric_bound(r, s, &base),
            per_player_remainder: left.clone(),
            active: r,
            exponent: s,
            base: base.clone(),
        };
        if !record.within_bound() {
            return Err(Error::invariant(format!("round {s}: averaged remainder exceeds the decay bound")));
        }
        trace.rounds.push(record);
        if remainder == before {
            return Err(Error::invariant("a full round removed nothing"));
        }
    }
    trace.truncation = left;
    alloc.remainder = remainder;
    alloc.absorb_remainder(0);
    Ok((alloc, trace))
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

    fn step(cut: Rational, left: i64, right: i64) -> StepDensity {
        StepDensity::new(vec![(int(0), cut.clone(), int(left)), (cut, int(1), int(right))]).unwrap()
    }

    fn strong_exact(mus: &[StepDensity], alloc: &Allocation) -> bool {
        classify_solution(&envy_matrix(mus, alloc).unwrap(), &int(0)).unwrap().strong
    }

    #[test]
    fn cut_and_choose_uniform() {
        let u = StepDensity::uniform();
        let a = cut_and_choose(&u, &u, &IntervalSet::unit()).unwrap();
        assert_eq!(a.parts, vec![iv(ratio(1, 2), int(1)), iv(int(0), ratio(1, 2))]);
        assert!(strong_exact(&[u.clone(), u], &a));
    }

    #[test]
    fn cut_and_choose_skewed_cutter() {
        let mu1 = step(ratio(1, 2), 2, 0);
        let mu2 = StepDensity::uniform();
        let a = cut_and_choose(&mu1, &mu2, &IntervalSet::unit()).unwrap();
        assert_eq!(a.parts, vec![iv(int(0), ratio(1, 4)), iv(ratio(1, 4), int(1))]);
        assert!(strong_exact(&[mu1, mu2], &a));
    }

    #[test]
    fn cut_and_choose_indifferent_chooser() {
        let mu1 = StepDensity::uniform();
        let mu2 = StepDensity::constant(int(0));
        let a = cut_and_choose(&mu1, &mu2, &IntervalSet::unit()).unwrap();
        assert_eq!(a.parts[1], iv(int(0), ratio(1, 2)));
        assert!(strong_exact(&[mu1, mu2], &a));
    }

    #[test]
    fn cut_and_choose_rejects_negative() {
        let err = cut_and_choose(&StepDensity::constant(int(-1)), &StepDensity::uniform(), &IntervalSet::unit());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn three_player_uniform() {
        let u = StepDensity::uniform();
        let mus = vec![u.clone(), u.clone(), u];
        let round = three_player_round(&mus, &IntervalSet::unit(), 0).unwrap();
        assert!(round.remainder.is_empty());
        assert_eq!(round.partial.parts[2], iv(int(0), ratio(1, 3)));
        assert_eq!(round.partial.parts[1], iv(ratio(1, 3), ratio(2, 3)));
        assert_eq!(round.partial.parts[0], iv(ratio(2, 3), int(1)));
        assert!(strong_exact(&mus, &round.partial));
    }

    #[test]
    fn three_player_concentrated_chooser() {
        let u = StepDensity::uniform();
        let mus = vec![u.clone(), step(ratio(1, 3), 3, 0), u];
        let round = three_player_round(&mus, &IntervalSet::unit(), 0).unwrap();
        assert_eq!(round.remainder, iv(int(0), ratio(1, 3)));
        assert!(round.partial.parts[1].is_empty());
        assert!(strong_exact(&mus, &round.partial));
        assert!(measure_of(&mus[0], &round.remainder) <= ratio(1, 3));
    }

    #[test]
    fn three_player_cutter_rotation_shrinks_cutter_measure() {
        let mus = vec![
            step(ratio(1, 5), 1, 4),
            step(ratio(2, 3), 7, 1),
            step(ratio(1, 2), 0, 3),
        ];
        let s = IntervalSet::unit();
        for cutter in 0..3 {
            let round = three_player_round(&mus, &s, cutter).unwrap();
            assert!(strong_exact(&mus, &round.partial));
            let before = measure_of(&mus[cutter], &s);
            assert!(measure_of(&mus[cutter], &round.remainder) * int(3) <= before);
            assert_eq!(round.partial.assigned().union(&round.remainder), s);
        }
    }

    #[test]
    fn three_player_arity() {
        let u = StepDensity::uniform();
        assert!(matches!(
            three_player_round(&[u.clone(), u], &IntervalSet::unit(), 0),
            Err(Error::Arity { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn satisfying_subset_two_players() {
        let mus = vec![StepDensity::uniform(), step(ratio(1, 2), 0, 2)];
        let res = satisfying_subset(&mus, 0, &IntervalSet::unit()).unwrap();
        assert_eq!(res.local_alloc.parts, vec![iv(int(0), ratio(1, 2)), iv(ratio(1, 2), int(1))]);
        assert_eq!(res.h, IntervalSet::unit());
        assert_eq!(res.floor_value, ratio(1, 2));
    }

    #[test]
    fn satisfying_subset_three_uniform() {
        let u = StepDensity::uniform();
        let mus = vec![u.clone(), u.clone(), u];
        let res = satisfying_subset(&mus, 0, &IntervalSet::unit()).unwrap();
        assert_eq!(res.local_alloc.parts[2], iv(int(0), ratio(1, 4)));
        assert_eq!(res.local_alloc.parts[1], iv(ratio(1, 4), ratio(1, 2)));
        assert_eq!(res.local_alloc.parts[0], iv(ratio(1, 2), ratio(3, 4)));
        assert_eq!(res.h, iv(int(0), ratio(3, 4)));
        assert_eq!(res.ledger.len(), 3);
        assert_eq!(res.ledger[1].claimed[1], vec![0, 1]);
        assert_eq!(res.ledger[2].claimed[2], vec![0]);
    }

    #[test]
    fn satisfying_subset_zero_cutter_measure() {
        let mus = vec![StepDensity::constant(int(0)), StepDensity::uniform()];
        let res = satisfying_subset(&mus, 0, &IntervalSet::unit()).unwrap();
        assert!(res.h.is_empty());
        assert_eq!(res.local_alloc, Allocation::empty(2));
    }

    #[test]
    fn satisfying_subset_relabels_cutter() {
        let mus = vec![
            step(ratio(1, 3), 5, 1),
            step(ratio(3, 4), 1, 6),
            step(ratio(1, 2), 2, 3),
            StepDensity::uniform(),
        ];
        let s = iv(ratio(1, 10), ratio(9, 10));
        for k in 0..4 {
            let res = satisfying_subset(&mus, k, &s).unwrap();
            assert!(strong_exact(&mus, &res.local_alloc));
            assert!(res.h.is_subset_of(&s));
            assert_eq!(measure_of(&mus[k], &res.local_alloc.parts[k]) * int(8), measure_of(&mus[k], &s));
        }
    }

    #[test]
    fn driver_two_uniform_finishes_in_one_round() {
        let u = StepDensity::uniform();
        let mus = vec![u.clone(), u];
        let (alloc, trace) = strong_division(&mus, &IntervalSet::unit(), &ratio(1, 1000)).unwrap();
        assert_eq!(trace.rounds.len(), 1);
        assert_eq!(trace.truncation, vec![int(0), int(0)]);
        let c = classify_solution(&envy_matrix(&mus, &alloc).unwrap(), &int(0)).unwrap();
        assert_eq!(c.max_strong_violation, int(0));
        assert_eq!(alloc.ground(), IntervalSet::unit());
    }

    #[test]
    fn driver_three_uniform() {
        let u = StepDensity::uniform();
        let mus = vec![u.clone(), u.clone(), u];
        let eps = ratio(1, 100);
        let (alloc, trace) = strong_division(&mus, &IntervalSet::unit(), &eps).unwrap();
        let mut prev = trace.initial_averaged();
        for row in &trace.rounds {
            assert!(&row.averaged * ratio(4, 3) <= prev);
            prev = row.averaged.clone();
        }
        let c = classify_solution(&envy_matrix(&mus, &alloc).unwrap(), &eps).unwrap();
        assert!(c.strong);
        assert!(alloc.remainder.is_empty());
    }

    #[test]
    fn driver_rejects_bad_epsilon() {
        let mus = vec![StepDensity::uniform()];
        assert!(matches!(
            strong_division(&mus, &IntervalSet::unit(), &int(0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn driver_instant_termination() {
        let mus = vec![StepDensity::uniform(), StepDensity::uniform()];
        let tiny = iv(int(0), ratio(1, 10_000));
        let (alloc, trace) = strong_division(&mus, &tiny, &ratio(1, 1000)).unwrap();
        assert!(trace.rounds.is_empty());
        assert_eq!(alloc.parts[0], tiny);
    }
}
