//! Piecewise-constant signed densities on `[0, 1)` and the exact
//! integration, subset-selection and sign-splitting they support.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Piece {
    pub start: Rational,
    pub end: Rational,
    pub value: Rational,
}

/// A step function whose pieces tile `[0, 1)` exactly. Equal-valued
/// neighbours are merged, so the representation is canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StepDensity {
    pieces: Vec<Piece>,
}

impl StepDensity {
    /// Validates that `pieces` (in order) tile `[0, 1)` with no gap or overlap.
    pub fn new(pieces: Vec<(Rational, Rational, Rational)>) -> Result<Self> {
        let mut cursor = Rational::zero();
        let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
        for (k, (start, end, value)) in pieces.into_iter().enumerate() {
            if start != cursor {
                let what = if start > cursor { "gap" } else { "overlap" };
                return Err(Error::Domain(format!(
                    "{what} before piece {k}: expected start {}, found {}",
                    rational::format(&cursor),
                    rational::format(&start)
                )));
            }
            if end <= start {
                return Err(Error::MalformedInterval {
                    start: Box::new(start),
                    end: Box::new(end),
                });
            }
            if end > rational::one() {
                return Err(Error::Domain(format!(
                    "piece {k} ends at {} beyond 1",
                    rational::format(&end)
                )));
            }
            cursor = end.clone();
            match out.last_mut() {
                Some(last) if last.value == value => last.end = end,
                _ => out.push(Piece { start, end, value }),
            }
        }
        if cursor != rational::one() {
            return Err(Error::Domain(format!(
                "gap after last piece: tiling stops at {}",
                rational::format(&cursor)
            )));
        }
        Ok(StepDensity { pieces: out })
    }

    pub fn constant(value: Rational) -> Self {
        StepDensity {
            pieces: vec![Piece {
                start: rational::zero(),
                end: rational::one(),
                value,
            }],
        }
    }

    pub fn uniform() -> Self {
        Self::constant(rational::one())
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn negate(&self) -> Self {
        StepDensity {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    start: p.start.clone(),
                    end: p.end.clone(),
                    value: -&p.value,
                })
                .collect(),
        }
    }

    /// True when every piece meeting `a` in positive length has value ≥ 0.
    pub fn is_nonnegative_on(&self, a: &IntervalSet) -> bool {
        segments(self, a).iter().all(|s| !s.value.is_negative())
    }

    /// Non-empty pieces of `a ∩ piece`, left to right.
    pub fn segments<'a>(&'a self, a: &IntervalSet) -> Vec<Segment<'a>> {
        segments(self, a)
    }
}

#[derive(Debug, Clone)]
pub struct Segment<'a> {
    pub start: Rational,
    pub end: Rational,
    pub value: &'a Rational,
}

fn segments<'a>(d: &'a StepDensity, a: &IntervalSet) -> Vec<Segment<'a>> {
    let mut out = Vec::new();
    let pieces = &d.pieces;
    let mut p = 0;
    for iv in a.intervals() {
        while p < pieces.len() && pieces[p].end <= iv.start {
            p += 1;
        }
        let mut q = p;
        while q < pieces.len() && pieces[q].start < iv.end {
            let piece = &pieces[q];
            let lo = if piece.start > iv.start { &piece.start } else { &iv.start };
            let hi = if piece.end < iv.end { &piece.end } else { &iv.end };
            out.push(Segment {
                start: lo.clone(),
                end: hi.clone(),
                value: &piece.value,
            });
            if piece.end >= iv.end {
                break;
            }
            q += 1;
        }
        p = q;
    }
    out
}

/// Exact signed integral of `d` over `a`.
pub fn measure_of(d: &StepDensity, a: &IntervalSet) -> Rational {
    segments(d, a)
        .into_iter()
        .filter(|s| !s.value.is_zero())
        .map(|s| (s.end - s.start) * s.value)
        .sum()
}

fn require_nonnegative(d: &StepDensity, a: &IntervalSet) -> Result<()> {
    if d.is_nonnegative_on(a) {
        Ok(())
    } else {
        Err(Error::Precondition(
            "density takes negative values on the selection set".into(),
        ))
    }
}

/// Leftmost subset of `a` with `d`-measure exactly `delta`.
///
/// The cut is placed at the smallest coordinate `x` for which
/// `∫_{a ∩ [0,x)} d = delta`; zero-density stretches before the cut are
/// kept, those after it are not.
pub fn select_subset(d: &StepDensity, a: &IntervalSet, delta: &Rational) -> Result<IntervalSet> {
    require_nonnegative(d, a)?;
    let available = measure_of(d, a);
    if delta.is_negative() || *delta > available {
        return Err(Error::InfeasibleSelection {
            requested: Box::new(delta.clone()),
            available: Box::new(available),
        });
    }
    if delta.is_zero() {
        return Ok(IntervalSet::empty());
    }
    let mut acc = Rational::zero();
    for seg in segments(d, a) {
        if seg.value.is_zero() {
            continue;
        }
        let mass = (&seg.end - &seg.start) * seg.value;
        if &acc + &mass >= *delta {
            let cut = &seg.start + (delta - &acc) / seg.value;
            return Ok(a.prefix(&cut));
        }
        acc += mass;
    }
    Err(Error::invariant("select_subset ran past the end of its set"))
}

/// Partitions `s` into `n` parts of equal `d`-measure by repeated leftmost
/// selection; the last part is whatever remains.
pub fn equal_split(d: &StepDensity, s: &IntervalSet, n: usize) -> Result<Vec<IntervalSet>> {
    if n == 0 {
        return Err(Error::Domain("cannot split into zero parts".into()));
    }
    require_nonnegative(d, s)?;
    let share = measure_of(d, s) / Rational::from_integer(n.into());
    let mut rest = s.clone();
    let mut parts = Vec::with_capacity(n);
    for _ in 1..n {
        let part = select_subset(d, &rest, &share)?;
        rest = rest.subtract(&part);
        parts.push(part);
    }
    parts.push(rest);
    Ok(parts)
}

/// Hahn–Jordan split of `[0, 1)`: strictly positive pieces go to the first
/// set, everything else (including zero pieces) to the second.
pub fn hahn_jordan(d: &StepDensity) -> (IntervalSet, IntervalSet) {
    let mut plus = IntervalSet::empty();
    let mut minus = IntervalSet::empty();
    for p in &d.pieces {
        let iv = IntervalSet::interval(p.start.clone(), p.end.clone())
            .expect("pieces lie inside [0, 1)");
        if p.value.is_positive() {
            plus = plus.union(&iv);
        } else {
            minus = minus.union(&iv);
        }
    }
    (plus, minus)
}
