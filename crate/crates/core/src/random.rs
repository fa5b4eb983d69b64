//! Seeded generators for random step densities and interval sets, used by
//! the property suites and benches.

use rand::seq::index::sample;
use rand::Rng;

use crate::density::StepDensity;
use crate::interval::{canonicalize, IntervalSet};
use crate::rational::{int, ratio, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Values {
    /// Integer values in `0..=9`, at least one piece positive.
    NonNegative,
    /// Integer values in `-9..=9`.
    Signed,
}

const GRID: i64 = 120;

fn breakpoints<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<Rational> {
    let cuts = count.min(GRID as usize - 1);
    let mut idx: Vec<i64> = sample(rng, GRID as usize - 1, cuts)
        .into_iter()
        .map(|k| k as i64 + 1)
        .collect();
    idx.sort_unstable();
    let mut out = vec![int(0)];
    out.extend(idx.into_iter().map(|k| ratio(k, GRID)));
    out.push(int(1));
    out
}

/// A density with between 1 and `max_pieces` pieces on a 1/120 grid.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, max_pieces: usize, values: Values) -> StepDensity {
    let pieces = rng.gen_range(1..=max_pieces.max(1));
    let points = breakpoints(rng, pieces - 1);
    let mut vals: Vec<i64> = (0..pieces)
        .map(|_| match values {
            Values::NonNegative => rng.gen_range(0..=9),
            Values::Signed => rng.gen_range(-9..=9),
        })
        .collect();
    if values == Values::NonNegative && vals.iter().all(|&v| v == 0) {
        let k = rng.gen_range(0..pieces);
        vals[k] = rng.gen_range(1..=9);
    }
    let triples = points
        .windows(2)
        .zip(vals)
        .map(|(w, v)| (w[0].clone(), w[1].clone(), int(v)))
        .collect();
    StepDensity::new(triples).expect("generated pieces tile [0, 1)")
}

/// A canonical set of at most `max_intervals` intervals on a 1/120 grid.
pub fn random_set<R: Rng + ?Sized>(rng: &mut R, max_intervals: usize) -> IntervalSet {
    let n = rng.gen_range(0..=max_intervals);
    let raw: Vec<_> = (0..n)
        .map(|_| {
            let a = rng.gen_range(0..=GRID);
            let b = rng.gen_range(0..=GRID);
            (ratio(a.min(b), GRID), ratio(a.max(b), GRID))
        })
        .collect();
    canonicalize(&raw).expect("grid points lie in [0, 1]")
}

pub fn random_profile<R: Rng + ?Sized>(
    rng: &mut R,
    players: usize,
    max_pieces: usize,
    values: Values,
) -> Vec<StepDensity> {
    (0..players)
        .map(|_| random_density(rng, max_pieces, values))
        .collect()
}
