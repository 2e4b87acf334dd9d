//! Piecewise-constant non-negative integer functions over edge ranges.
//!
//! Capacities, residual capacities after box reservations and demand
//! profiles all use [`CapacityProfile`]. Values are stored as maximal
//! constant segments, so the representation of a function is unique and
//! the size does not depend on the number of edges.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grouping::TaskBox;

/// Edges are numbered from 1.
pub type Edge = u64;

/// Inclusive range of edges `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeRange {
    pub lo: Edge,
    pub hi: Edge,
}

impl EdgeRange {
    pub fn new(lo: Edge, hi: Edge) -> Self {
        debug_assert!(lo <= hi, "empty edge range [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn checked(lo: Edge, hi: Edge) -> Option<Self> {
        (lo <= hi).then_some(Self { lo, hi })
    }

    /// The `len` edges starting at `start`.
    pub fn from_start(start: Edge, len: u64) -> Self {
        Self::new(start, start + len - 1)
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.lo <= e && e <= self.hi
    }

    pub fn contains_range(&self, other: &EdgeRange) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &EdgeRange) -> Option<EdgeRange> {
        EdgeRange::checked(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn overlap_len(&self, other: &EdgeRange) -> u64 {
        self.intersect(other).map_or(0, |r| r.len())
    }

    pub fn intersects(&self, other: &EdgeRange) -> bool {
        self.lo.max(other.lo) <= self.hi.min(other.hi)
    }

    /// Image under the reflection `e -> m + 1 - e`.
    pub fn reflect(&self, m: Edge) -> EdgeRange {
        EdgeRange::new(m + 1 - self.hi, m + 1 - self.lo)
    }

    /// Leftmost placement of a `len`-edge path inside `self`, if any.
    pub fn leftmost_fit(&self, len: u64) -> Option<Edge> {
        (len >= 1 && len <= self.len()).then_some(self.lo)
    }
}

impl fmt::Display for EdgeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProfileError {
    #[error("capacity would become negative on edge {edge} (short by {deficit})")]
    NegativeCapacity { edge: Edge, deficit: u64 },
    #[error("profile spans differ: {left} vs {right}")]
    SpanMismatch { left: EdgeRange, right: EdgeRange },
    #[error("range {range} lies outside the profile span {span}")]
    OutOfSpan { range: EdgeRange, span: EdgeRange },
    #[error("segments do not partition {span}: {reason}")]
    BadSegments { span: EdgeRange, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Segment {
    pub range: EdgeRange,
    pub value: u64,
}

/// Canonical piecewise-constant function over `span`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CapacityProfile {
    span: EdgeRange,
    segments: Vec<Segment>,
}

impl CapacityProfile {
    pub fn constant(span: EdgeRange, value: u64) -> Self {
        Self {
            span,
            segments: vec![Segment { range: span, value }],
        }
    }

    pub fn zero(span: EdgeRange) -> Self {
        Self::constant(span, 0)
    }

    /// Builds a profile from ascending, non-overlapping segments covering
    /// `span`; equal neighbours are merged.
    pub fn from_segments(span: EdgeRange, segments: &[Segment]) -> Result<Self, ProfileError> {
        let bad = |reason: String| ProfileError::BadSegments { span, reason };
        let mut next = span.lo;
        for s in segments {
            if s.range.lo > s.range.hi {
                return Err(bad(format!("empty segment {}", s.range)));
            }
            if s.range.lo != next {
                return Err(bad(format!("expected a segment starting at {next}, got {}", s.range)));
            }
            next = s.range.hi + 1;
        }
        if segments.is_empty() || next != span.hi + 1 {
            return Err(bad(format!("coverage ends before edge {}", span.hi)));
        }
        let mut p = Self {
            span,
            segments: Vec::with_capacity(segments.len()),
        };
        for s in segments {
            p.push_merged(*s);
        }
        Ok(p)
    }

    /// Per-edge values for `span.lo ..= span.hi`.
    pub fn from_values(span: EdgeRange, values: &[u64]) -> Self {
        assert_eq!(values.len() as u64, span.len());
        let mut p = Self {
            span,
            segments: Vec::new(),
        };
        for (i, &v) in values.iter().enumerate() {
            let e = span.lo + i as u64;
            p.push_merged(Segment {
                range: EdgeRange::new(e, e),
                value: v,
            });
        }
        p
    }

    fn push_merged(&mut self, s: Segment) {
        if let Some(last) = self.segments.last_mut() {
            if last.value == s.value && last.range.hi + 1 == s.range.lo {
                last.range.hi = s.range.hi;
                return;
            }
        }
        self.segments.push(s);
    }

    pub fn span(&self) -> EdgeRange {
        self.span
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn segment_index(&self, e: Edge) -> usize {
        debug_assert!(self.span.contains(e));
        self.segments.partition_point(|s| s.range.hi < e)
    }

    pub fn value_at(&self, e: Edge) -> u64 {
        self.segments[self.segment_index(e)].value
    }

    fn overlapping(&self, range: EdgeRange) -> impl Iterator<Item = &Segment> {
        let start = self.segment_index(range.lo.max(self.span.lo));
        self.segments[start..]
            .iter()
            .take_while(move |s| s.range.lo <= range.hi)
    }

    pub fn min_over(&self, range: EdgeRange) -> u64 {
        self.overlapping(range).map(|s| s.value).min().unwrap_or(0)
    }

    pub fn max_over(&self, range: EdgeRange) -> u64 {
        self.overlapping(range).map(|s| s.value).max().unwrap_or(0)
    }

    pub fn max_value(&self) -> u64 {
        self.segments.iter().map(|s| s.value).max().unwrap_or(0)
    }

    /// Values `>= need` on every edge of `range`.
    pub fn fits(&self, range: EdgeRange, need: u64) -> bool {
        self.span.contains_range(&range) && self.overlapping(range).all(|s| s.value >= need)
    }

    /// Smallest start `s` with `[s, s+len-1]` inside `window` and every
    /// value there `>= need`. Skips whole segments that are too low.
    pub fn first_fit(&self, window: EdgeRange, len: u64, need: u64) -> Option<Edge> {
        let window = window.intersect(&self.span)?;
        let mut start = window.lo;
        'outer: while let Some(path) = EdgeRange::checked(start, start + len.max(1) - 1) {
            if path.hi > window.hi {
                return None;
            }
            for s in self.overlapping(path) {
                if s.value < need {
                    start = s.range.hi + 1;
                    continue 'outer;
                }
            }
            return Some(start);
        }
        None
    }

    /// Restriction to a sub-span.
    pub fn restrict(&self, range: EdgeRange) -> Result<Self, ProfileError> {
        if !self.span.contains_range(&range) {
            return Err(ProfileError::OutOfSpan {
                range,
                span: self.span,
            });
        }
        let segments = self
            .overlapping(range)
            .map(|s| Segment {
                range: s.range.intersect(&range).expect("overlapping segment"),
                value: s.value,
            })
            .collect();
        Ok(Self {
            span: range,
            segments,
        })
    }

    /// Extends the span to the right with a constant value.
    pub fn extend_right(&self, new_hi: Edge, value: u64) -> Self {
        let mut p = self.clone();
        if new_hi > self.span.hi {
            p.push_merged(Segment {
                range: EdgeRange::new(self.span.hi + 1, new_hi),
                value,
            });
            p.span.hi = new_hi;
        }
        p
    }

    /// Profile of `e -> self(m + 1 - e)` over the reflected span.
    pub fn reflect(&self, m: Edge) -> Self {
        let mut p = Self {
            span: self.span.reflect(m),
            segments: Vec::with_capacity(self.segments.len()),
        };
        for s in self.segments.iter().rev() {
            p.push_merged(Segment {
                range: s.range.reflect(m),
                value: s.value,
            });
        }
        p
    }

    pub fn map_values(&self, mut f: impl FnMut(u64) -> u64) -> Self {
        let mut p = Self {
            span: self.span,
            segments: Vec::with_capacity(self.segments.len()),
        };
        for s in &self.segments {
            p.push_merged(Segment {
                range: s.range,
                value: f(s.value),
            });
        }
        p
    }

    /// Walks both profiles over their common breakpoints.
    fn zip_with<T>(
        &self,
        other: &Self,
        mut f: impl FnMut(EdgeRange, u64, u64) -> Result<T, ProfileError>,
    ) -> Result<Vec<(EdgeRange, T)>, ProfileError> {
        if self.span != other.span {
            return Err(ProfileError::SpanMismatch {
                left: self.span,
                right: other.span,
            });
        }
        let (mut i, mut j) = (0, 0);
        let mut lo = self.span.lo;
        let mut out = Vec::new();
        while i < self.segments.len() && j < other.segments.len() {
            let a = &self.segments[i];
            let b = &other.segments[j];
            let hi = a.range.hi.min(b.range.hi);
            let r = EdgeRange::new(lo, hi);
            out.push((r, f(r, a.value, b.value)?));
            if a.range.hi == hi {
                i += 1;
            }
            if b.range.hi == hi {
                j += 1;
            }
            lo = hi + 1;
        }
        Ok(out)
    }

    fn from_pieces(span: EdgeRange, pieces: Vec<(EdgeRange, u64)>) -> Self {
        let mut p = Self {
            span,
            segments: Vec::with_capacity(pieces.len()),
        };
        for (range, value) in pieces {
            p.push_merged(Segment { range, value });
        }
        p
    }

    /// Common refinement of two profiles as `(range, self, other)` pieces.
    pub fn zip(&self, other: &Self) -> Result<Vec<(EdgeRange, u64, u64)>, ProfileError> {
        Ok(self
            .zip_with(other, |_, a, b| Ok((a, b)))?
            .into_iter()
            .map(|(r, (a, b))| (r, a, b))
            .collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self, ProfileError> {
        let pieces = self.zip_with(other, |_, a, b| Ok(a + b))?;
        Ok(Self::from_pieces(self.span, pieces))
    }

    /// Pointwise difference; fails if it would go negative anywhere.
    pub fn sub(&self, other: &Self) -> Result<Self, ProfileError> {
        let pieces = self.zip_with(other, |r, a, b| {
            a.checked_sub(b).ok_or_else(|| ProfileError::NegativeCapacity {
                edge: r.lo,
                deficit: b - a,
            })
        })?;
        Ok(Self::from_pieces(self.span, pieces))
    }

    /// `self(e) <= other(e)` for every edge.
    pub fn dominates(&self, other: &Self) -> Result<bool, ProfileError> {
        Ok(self
            .zip_with(other, |_, a, b| Ok(a <= b))?
            .into_iter()
            .all(|(_, ok)| ok))
    }

    /// Subtracts `amount` on `range`; fails rather than clamping.
    pub fn subtract_on(&self, range: EdgeRange, amount: u64) -> Result<Self, ProfileError> {
        if !self.span.contains_range(&range) {
            return Err(ProfileError::OutOfSpan {
                range,
                span: self.span,
            });
        }
        let mut p = Self {
            span: self.span,
            segments: Vec::with_capacity(self.segments.len() + 2),
        };
        for s in &self.segments {
            match s.range.intersect(&range) {
                None => p.push_merged(*s),
                Some(mid) => {
                    if s.range.lo < mid.lo {
                        p.push_merged(Segment {
                            range: EdgeRange::new(s.range.lo, mid.lo - 1),
                            value: s.value,
                        });
                    }
                    let value = s.value.checked_sub(amount).ok_or_else(|| {
                        ProfileError::NegativeCapacity {
                            edge: mid.lo,
                            deficit: amount - s.value,
                        }
                    })?;
                    p.push_merged(Segment { range: mid, value });
                    if mid.hi < s.range.hi {
                        p.push_merged(Segment {
                            range: EdgeRange::new(mid.hi + 1, s.range.hi),
                            value: s.value,
                        });
                    }
                }
            }
        }
        Ok(p)
    }
}

/// Residual capacity after reserving every box's height along its path.
pub fn subtract_boxes(
    profile: &CapacityProfile,
    boxes: &[TaskBox],
) -> Result<CapacityProfile, ProfileError> {
    let span = profile.span();
    for b in boxes {
        if !span.contains_range(&b.path) {
            return Err(ProfileError::OutOfSpan {
                range: b.path,
                span,
            });
        }
    }
    let reserved = reservation_profile(span, boxes.iter().map(|b| (b.path, b.height)));
    profile.sub(&reserved)
}

/// Total of `amount` over every `(range, amount)` covering each edge.
pub fn reservation_profile(
    span: EdgeRange,
    items: impl IntoIterator<Item = (EdgeRange, u64)>,
) -> CapacityProfile {
    let mut events: BTreeMap<Edge, i128> = BTreeMap::new();
    for (r, amount) in items {
        let Some(r) = r.intersect(&span) else { continue };
        *events.entry(r.lo).or_default() += amount as i128;
        *events.entry(r.hi + 1).or_default() -= amount as i128;
    }
    let mut pieces = Vec::with_capacity(events.len() + 1);
    let mut level: i128 = 0;
    let mut cursor = span.lo;
    for (&e, &delta) in &events {
        if e > cursor {
            pieces.push((EdgeRange::new(cursor, e - 1), level as u64));
            cursor = e;
        }
        level += delta;
        if cursor > span.hi {
            break;
        }
    }
    if cursor <= span.hi {
        pieces.push((EdgeRange::new(cursor, span.hi), level as u64));
    }
    CapacityProfile::from_pieces(span, pieces)
}

/// Pointwise total demand of placed tasks, each given as `(path, demand)`.
pub fn demand_profile(
    span: EdgeRange,
    placed: impl IntoIterator<Item = (EdgeRange, u64)>,
) -> CapacityProfile {
    reservation_profile(span, placed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::int;
    use proptest::prelude::*;

    fn values(p: &CapacityProfile) -> Vec<u64> {
        (p.span().lo..=p.span().hi).map(|e| p.value_at(e)).collect()
    }

    fn tb(lo: Edge, hi: Edge, h: u64) -> TaskBox {
        TaskBox {
            path: EdgeRange::new(lo, hi),
            height: h,
            demand: h,
            weight: int(1),
        }
    }

    #[test]
    fn subtract_single_box() {
        let p = CapacityProfile::constant(EdgeRange::new(1, 4), 10);
        let r = subtract_boxes(&p, &[tb(2, 3, 3)]).unwrap();
        assert_eq!(values(&r), vec![10, 7, 7, 10]);
        assert_eq!(r.segments().len(), 3);
    }

    #[test]
    fn subtract_nothing_is_identity() {
        let p = CapacityProfile::from_values(EdgeRange::new(1, 5), &[1, 2, 2, 0, 3]);
        assert_eq!(subtract_boxes(&p, &[]).unwrap(), p);
    }

    #[test]
    fn subtract_negative_is_error() {
        let p = CapacityProfile::constant(EdgeRange::new(1, 4), 2);
        let err = subtract_boxes(&p, &[tb(1, 1, 3)]).unwrap_err();
        assert_eq!(err, ProfileError::NegativeCapacity { edge: 1, deficit: 1 });
        assert!(p.subtract_on(EdgeRange::new(1, 1), 3).is_err());
    }

    #[test]
    fn demand_profile_examples() {
        let span = EdgeRange::new(1, 6);
        assert_eq!(values(&demand_profile(span, [])), vec![0; 6]);
        let two = demand_profile(span, [(EdgeRange::new(1, 3), 2), (EdgeRange::new(3, 5), 2)]);
        assert_eq!(two.value_at(3), 4);
        let one = demand_profile(span, [(EdgeRange::new(2, 4), 5)]);
        assert_eq!(values(&one), vec![0, 5, 5, 5, 0, 0]);
    }

    #[test]
    fn dominates_examples() {
        let span = EdgeRange::new(1, 4);
        let p = CapacityProfile::from_values(span, &[3, 1, 4, 1]);
        assert!(p.dominates(&p).unwrap());
        assert!(CapacityProfile::zero(span).dominates(&p).unwrap());
        let q = CapacityProfile::from_values(span, &[3, 2, 4, 1]);
        assert!(!q.dominates(&p).unwrap());
        let other = CapacityProfile::zero(EdgeRange::new(1, 5));
        assert!(matches!(p.dominates(&other), Err(ProfileError::SpanMismatch { .. })));
    }

    #[test]
    fn from_segments_validates_partition() {
        let span = EdgeRange::new(1, 4);
        let seg = |lo, hi, value| Segment { range: EdgeRange::new(lo, hi), value };
        assert!(CapacityProfile::from_segments(span, &[seg(1, 2, 1), seg(4, 4, 1)]).is_err());
        assert!(CapacityProfile::from_segments(span, &[seg(1, 2, 1)]).is_err());
        let p = CapacityProfile::from_segments(span, &[seg(1, 2, 1), seg(3, 4, 1)]).unwrap();
        assert_eq!(p.segments().len(), 1);
    }

    #[test]
    fn restrict_extend_reflect() {
        let p = CapacityProfile::from_values(EdgeRange::new(1, 4), &[1, 2, 3, 4]);
        assert_eq!(values(&p.restrict(EdgeRange::new(2, 3)).unwrap()), vec![2, 3]);
        assert_eq!(values(&p.extend_right(6, 0)), vec![1, 2, 3, 4, 0, 0]);
        assert_eq!(values(&p.reflect(4)), vec![4, 3, 2, 1]);
        assert_eq!(p.min_over(EdgeRange::new(2, 4)), 2);
        assert_eq!(p.max_over(EdgeRange::new(1, 2)), 2);
    }

    fn arb_values() -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(0u64..4, 1..12)
    }

    fn naive(span: EdgeRange, vals: &[u64]) -> CapacityProfile {
        CapacityProfile::from_values(span, vals)
    }

    proptest! {
        #[test]
        fn first_fit_matches_scan(vals in arb_values(), len in 1u64..5, need in 0u64..6, lo in 1u64..4) {
            let span = EdgeRange::new(1, vals.len() as u64);
            let p = CapacityProfile::from_values(span, &vals);
            let window = EdgeRange::new(lo.min(span.hi), span.hi);
            let naive = (window.lo..=window.hi)
                .filter(|&s| s + len - 1 <= window.hi)
                .find(|&s| (s..s + len).all(|e| vals[(e - 1) as usize] >= need));
            prop_assert_eq!(p.first_fit(window, len, need), naive);
        }

        #[test]
        fn canonical_form_is_unique(vals in arb_values()) {
            let span = EdgeRange::new(1, vals.len() as u64);
            let p = naive(span, &vals);
            // Re-splitting every segment into single edges and rebuilding
            // must give the same breakpoints.
            let mut split = Vec::new();
            for s in p.segments() {
                for e in s.range.lo..=s.range.hi {
                    split.push(Segment { range: EdgeRange::new(e, e), value: s.value });
                }
            }
            prop_assert_eq!(CapacityProfile::from_segments(span, &split).unwrap(), p.clone());
            for w in p.segments().windows(2) {
                prop_assert_ne!(w[0].value, w[1].value);
            }
        }

        #[test]
        fn subtract_then_add_roundtrip(
            vals in arb_values(),
            boxes in prop::collection::vec((0u64..12, 0u64..12, 1u64..3), 0..4),
        ) {
            let span = EdgeRange::new(1, vals.len() as u64);
            let base = naive(span, &vals).map_values(|v| v + 10);
            let boxes: Vec<TaskBox> = boxes
                .into_iter()
                .map(|(a, b, h)| {
                    let lo = 1 + a.min(b) % span.hi;
                    let hi = (1 + a.max(b) % span.hi).max(lo);
                    tb(lo, hi, h)
                })
                .collect();
            let res = subtract_boxes(&base, &boxes).unwrap();
            let back = res
                .add(&reservation_profile(span, boxes.iter().map(|b| (b.path, b.height))))
                .unwrap();
            prop_assert_eq!(back, base);
        }

        #[test]
        fn dominates_is_partial_order(a in arb_values(), b in arb_values(), c in arb_values()) {
            let n = a.len().min(b.len()).min(c.len());
            let span = EdgeRange::new(1, n as u64);
            let (pa, pb, pc) = (naive(span, &a[..n]), naive(span, &b[..n]), naive(span, &c[..n]));
            prop_assert!(pa.dominates(&pa).unwrap());
            if pa.dominates(&pb).unwrap() && pb.dominates(&pa).unwrap() {
                prop_assert_eq!(&pa, &pb);
            }
            if pa.dominates(&pb).unwrap() && pb.dominates(&pc).unwrap() {
                prop_assert!(pa.dominates(&pc).unwrap());
            }
        }
    }
}
