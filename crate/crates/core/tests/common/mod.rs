//! Test-side oracles. Nothing here calls the library's measure code: the
//! measure of a set is integrated from a cumulative distribution built
//! directly from the density's pieces.
#![allow(dead_code)]

use fairdiv::density::StepDensity;
use fairdiv::interval::IntervalSet;
use fairdiv::rational::{self, Rational};
use fairdiv::Allocation;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// `∫_0^x density`.
pub fn cdf(d: &StepDensity, x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for p in d.pieces() {
        if *x <= p.start {
            break;
        }
        let hi = if *x < p.end { x } else { &p.end };
        acc += (hi - &p.start) * &p.value;
    }
    acc
}

pub fn measure(d: &StepDensity, set: &IntervalSet) -> Rational {
    set.intervals()
        .iter()
        .map(|iv| cdf(d, &iv.end) - cdf(d, &iv.start))
        .sum()
}

/// `values[i][j] = μ_i(parts[j])`.
pub fn value_matrix(mus: &[StepDensity], parts: &[IntervalSet]) -> Vec<Vec<Rational>> {
    mus.iter()
        .map(|d| parts.iter().map(|p| measure(d, p)).collect())
        .collect()
}

/// Largest `μ_i(F_j) - μ_i(F_i)`, clamped below at 0.
pub fn strong_violation(values: &[Vec<Rational>]) -> Rational {
    let mut worst = Rational::zero();
    for (i, row) in values.iter().enumerate() {
        for v in row {
            worst = worst.max(v - &row[i]);
        }
    }
    worst
}

/// Largest `μ_i(F_i) - μ_i(F_j)`, clamped below at 0.
pub fn gentleman_violation(values: &[Vec<Rational>]) -> Rational {
    let mut worst = Rational::zero();
    for (i, row) in values.iter().enumerate() {
        for v in row {
            worst = worst.max(&row[i] - v);
        }
    }
    worst
}

pub fn pairwise_disjoint(parts: &[IntervalSet]) -> bool {
    for (a, p) in parts.iter().enumerate() {
        for q in &parts[a + 1..] {
            if !p.intersect(q).is_empty() {
                return false;
            }
        }
    }
    true
}

pub fn union(parts: &[IntervalSet]) -> IntervalSet {
    parts.iter().cloned().collect()
}

/// Parts are pairwise disjoint and, with the remainder, tile `ground`.
pub fn partitions(alloc: &Allocation, ground: &IntervalSet) -> bool {
    let mut all = alloc.parts.clone();
    all.push(alloc.remainder.clone());
    pairwise_disjoint(&all) && union(&all) == *ground
}

pub fn pow2(n: usize) -> Rational {
    Rational::from_integer((1u64 << n).into())
}

/// `((2^{r-1} - 1) / 2^{r-1})^s * base`, built up by repeated multiplication.
pub fn decay_bound(r: usize, s: usize, base: &Rational) -> Rational {
    let q = (pow2(r - 1) - rational::one()) / pow2(r - 1);
    (0..s).fold(base.clone(), |acc, _| acc * &q)
}

pub fn mean(xs: &[Rational]) -> Rational {
    xs.iter().sum::<Rational>() / Rational::from_integer(xs.len().into())
}

pub fn density(pieces: &[(i64, i64, i64, i64, i64)]) -> StepDensity {
    // (start_num, start_den, end_num, end_den, value)
    StepDensity::new(
        pieces
            .iter()
            .map(|&(a, b, c, d, v)| (rational::ratio(a, b), rational::ratio(c, d), rational::int(v)))
            .collect(),
    )
    .unwrap()
}

/// Writes `[["p/q","p/q","p/q"], ...]` for a density.
pub fn density_json(d: &StepDensity) -> String {
    let rows: Vec<String> = d
        .pieces()
        .iter()
        .map(|p| {
            format!(
                "[\"{}\",\"{}\",\"{}\"]",
                rational::format(&p.start),
                rational::format(&p.end),
                rational::format(&p.value)
            )
        })
        .collect();
    format!("[{}]", rows.join(","))
}

pub fn scenario_json(mode: &str, epsilon: &str, mus: &[StepDensity]) -> String {
    let players: Vec<String> = mus
        .iter()
        .enumerate()
        .map(|(i, d)| format!("{{\"name\":\"p{i}\",\"density\":{}}}", density_json(d)))
        .collect();
    format!("{{\"mode\":\"{mode}\",\"epsilon\":\"{epsilon}\",\"players\":[{}]}}", players.join(","))
}
