//! Finite unions of half-open rational subintervals of `[0, 1)`.
//!
//! An [`IntervalSet`] is always kept in canonical form: intervals are
//! non-empty, sorted, pairwise disjoint, and never touch. Two sets are
//! equal as point sets iff they are equal as values.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub start: Rational,
    pub end: Rational,
}

impl Interval {
    pub fn new(start: Rational, end: Rational) -> Self {
        Interval { start, end }
    }

    pub fn length(&self) -> Rational {
        &self.end - &self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Subtract,
}

/// Builds the canonical set covering the union of `raw` half-open pairs.
pub fn canonicalize(raw: &[(Rational, Rational)]) -> Result<IntervalSet> {
    let unit = (Rational::zero(), Rational::one());
    let mut pieces = Vec::with_capacity(raw.len());
    for (start, end) in raw {
        for x in [start, end] {
            if *x < unit.0 || *x > unit.1 {
                return Err(Error::Domain(format!(
                    "endpoint {} outside [0, 1]",
                    rational::format(x)
                )));
            }
        }
        if start > end {
            return Err(Error::MalformedInterval {
                start: Box::new(start.clone()),
                end: Box::new(end.clone()),
            });
        }
        if start < end {
            pieces.push(Interval::new(start.clone(), end.clone()));
        }
    }
    pieces.sort_by(|a, b| a.start.cmp(&b.start));
    Ok(IntervalSet::from_sorted(pieces))
}

pub fn set_algebra(op: SetOp, a: &IntervalSet, b: &IntervalSet) -> IntervalSet {
    match op {
        SetOp::Union => a.union(b),
        SetOp::Intersect => a.intersect(b),
        SetOp::Subtract => a.subtract(b),
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    /// The whole ground set `[0, 1)`.
    pub fn unit() -> Self {
        IntervalSet {
            intervals: vec![Interval::new(Rational::zero(), Rational::one())],
        }
    }

    /// A single interval `[start, end)`; empty when `start == end`.
    pub fn interval(start: Rational, end: Rational) -> Result<Self> {
        canonicalize(&[(start, end)])
    }

    /// Merges a start-sorted list of non-empty intervals.
    fn from_sorted(sorted: Vec<Interval>) -> Self {
        let mut out: Vec<Interval> = Vec::with_capacity(sorted.len());
        for iv in sorted {
            if let Some(last) = out.last_mut() {
                if iv.start <= last.end {
                    if iv.end > last.end {
                        last.end = iv.end;
                    }
                    continue;
                }
            }
            out.push(iv);
        }
        IntervalSet { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn to_pairs(&self) -> Vec<(Rational, Rational)> {
        self.intervals
            .iter()
            .map(|iv| (iv.start.clone(), iv.end.clone()))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue length.
    pub fn length(&self) -> Rational {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        let mut merged = Vec::with_capacity(self.intervals.len() + other.intervals.len());
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() || j < other.intervals.len() {
            let take_left = match (self.intervals.get(i), other.intervals.get(j)) {
                (Some(a), Some(b)) => a.start <= b.start,
                (Some(_), None) => true,
                _ => false,
            };
            if take_left {
                merged.push(self.intervals[i].clone());
                i += 1;
            } else {
                merged.push(other.intervals[j].clone());
                j += 1;
            }
        }
        IntervalSet::from_sorted(merged)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = &self.intervals[i];
            let b = &other.intervals[j];
            let lo = if a.start > b.start { &a.start } else { &b.start };
            let hi = if a.end < b.end { &a.end } else { &b.end };
            if lo < hi {
                out.push(Interval::new(lo.clone(), hi.clone()));
            }
            if a.end < b.end {
                i += 1;
            } else {
                j += 1;
            }
        }
        // Pieces of two canonical sets never touch, so `out` is canonical.
        IntervalSet { intervals: out }
    }

    pub fn subtract(&self, other: &IntervalSet) -> IntervalSet {
        if other.is_empty() || self.is_empty() {
            return self.clone();
        }
        let mut out = Vec::new();
        let mut j = 0;
        for a in &self.intervals {
            let mut cursor = a.start.clone();
            while j < other.intervals.len() && other.intervals[j].end <= cursor {
                j += 1;
            }
            let mut k = j;
            while k < other.intervals.len() && other.intervals[k].start < a.end {
                let b = &other.intervals[k];
                if b.start > cursor {
                    out.push(Interval::new(cursor.clone(), b.start.clone()));
                }
                if b.end > cursor {
                    cursor = b.end.clone();
                }
                if cursor >= a.end {
                    break;
                }
                k += 1;
            }
            if cursor < a.end {
                out.push(Interval::new(cursor, a.end.clone()));
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.subtract(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &IntervalSet) -> bool {
        self.intersect(other).is_empty()
    }

    /// Points of `self` strictly left of `x`.
    pub fn prefix(&self, x: &Rational) -> IntervalSet {
        let mut out = Vec::new();
        for iv in &self.intervals {
            if iv.start >= *x {
                break;
            }
            let end = if iv.end < *x { iv.end.clone() } else { x.clone() };
            out.push(Interval::new(iv.start.clone(), end));
        }
        IntervalSet { intervals: out }
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        for (k, iv) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "[{}, {})", iv.start, iv.end)?;
        }
        Ok(())
    }
}

impl FromIterator<IntervalSet> for IntervalSet {
    fn from_iter<T: IntoIterator<Item = IntervalSet>>(iter: T) -> Self {
        iter.into_iter()
            .fold(IntervalSet::empty(), |acc, s| acc.union(&s))
    }
}
